//! Executable one-round protocols for `f̂_z`.
//!
//! Every protocol here is one message from a sender to a receiver, who then
//! announces the answer. The message is a function of the sender's half only
//! and the decision a function of the receiver's half and the message.
//! Shared precomputation (images, τ sets) depends on the rule and `z` only
//! and is not charged.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::ca::{format_letters, Letter, Rule, RuleOrigin, Side};
use crate::cc::{col_letters, row_letters, HatOracle, TracedFunction};
use crate::ceil_log2;
use crate::classify::{
    first_appearance_letters, is_stagnating, onesidedness, spreading_status, stagnating_pair_condition, LetterSet,
    OnesidedMode,
};
use crate::error::{Error, Result};
use crate::trace::{self, right_column_raw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Alice,
    Bob,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Alice => Player::Bob,
            Player::Bob => Player::Alice,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Alice => "alice",
            Player::Bob => "bob",
        })
    }
}

/// Protocol identifiers. `Side` names the one-round complexity being
/// bounded: `Right` means Bob sends, `Left` means Alice sends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolId {
    OneSided(LetterSet),
    SpreadingConst,
    StagnatingPair,
    TraceColumn(Side),
    TraceTau(Side),
    Grouped,
    BStar(LetterSet, Side),
    FirstAppearance(Letter, Side),
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolId::OneSided(b) => write!(f, "onesided:{b}"),
            ProtocolId::SpreadingConst => f.write_str("spreading"),
            ProtocolId::StagnatingPair => f.write_str("stagnating-pair"),
            ProtocolId::TraceColumn(side) => write!(f, "trace-column:{side}"),
            ProtocolId::TraceTau(side) => write!(f, "trace-tau:{side}"),
            ProtocolId::Grouped => f.write_str("grouped"),
            ProtocolId::BStar(b, side) => write!(f, "bstar:{b}:{side}"),
            ProtocolId::FirstAppearance(a, side) => write!(f, "first-appearance:{a}:{side}"),
        }
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    /// `onesided[:B]`, `spreading`, `stagnating-pair`, `trace-column[:SIDE]`,
    /// `trace-tau[:SIDE]`, `grouped`, `bstar[:B[:SIDE]]`,
    /// `first-appearance[:a[:SIDE]]`. `B` is a string of letter digits;
    /// defaults are `B = 0`, `a = 0`, `SIDE = right`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let set = |k: usize| -> Result<LetterSet> {
            match rest.get(k) {
                None => Ok(LetterSet::singleton(0)),
                Some(digits) => {
                    let letters = crate::ca::parse_letters(digits)?;
                    if letters.is_empty() {
                        return Err(Error::EmptySubset);
                    }
                    Ok(LetterSet::from_letters(&letters))
                }
            }
        };
        let side = |k: usize| -> Result<Side> { rest.get(k).map_or(Ok(Side::Right), |x| x.parse()) };
        let max_rest = match head {
            "onesided" | "trace-column" | "trace-tau" => 1,
            "bstar" | "first-appearance" => 2,
            _ => 0,
        };
        if rest.len() > max_rest {
            return Err(Error::Parse(format!("too many fields in protocol id {s:?}")));
        }
        Ok(match head {
            "onesided" => ProtocolId::OneSided(set(0)?),
            "spreading" => ProtocolId::SpreadingConst,
            "stagnating-pair" => ProtocolId::StagnatingPair,
            "trace-column" => ProtocolId::TraceColumn(side(0)?),
            "trace-tau" => ProtocolId::TraceTau(side(0)?),
            "grouped" => ProtocolId::Grouped,
            "bstar" => ProtocolId::BStar(set(0)?, side(1)?),
            "first-appearance" => {
                let a = match rest.first() {
                    None => 0,
                    Some(d) => match crate::ca::parse_letters(d)?.as_slice() {
                        [a] => *a,
                        _ => return Err(Error::Parse(format!("expected one letter in {s:?}"))),
                    },
                };
                ProtocolId::FirstAppearance(a, side(1)?)
            }
            other => return Err(Error::Parse(format!("unknown protocol {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: Player,
    /// Bits as `'0'`/`'1'` characters.
    pub bits: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub answer: u8,
    pub answered_by: Player,
}

impl Transcript {
    pub fn total_bits(&self) -> usize {
        self.messages.iter().map(|m| m.bits.len()).sum()
    }

    /// Lines `sender:bits`, then `answer:player:bit`.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.messages.iter().map(|m| format!("{}:{}", m.sender, m.bits)).collect();
        lines.push(format!("answer:{}:{}", self.answered_by, self.answer));
        lines
    }
}

#[derive(Debug, Clone)]
enum Plan {
    /// Alice decides alone and sends the answer.
    AliceKnows,
    /// Bob decides alone; Alice says nothing.
    BobKnows,
    /// The sender announces whether their half holds a letter outside 0.
    NonZeroFlag(Player),
    /// The answer does not depend on the inputs.
    Constant(u8),
    /// Bob sends `v_1`; answer is `u_{-1} ∧ v_1`.
    AndOfNeighbours,
    Column {
        side: Side,
        image: Vec<Vec<Letter>>,
        bits: u32,
    },
    Tau {
        side: Side,
        tau: Vec<Vec<Letter>>,
        bits: u32,
    },
    Grouped {
        left_tau: BTreeSet<Vec<Letter>>,
        right_tau: BTreeSet<Vec<Letter>>,
    },
    BStar {
        side: Side,
        bits: u32,
    },
    FirstAppearance {
        side: Side,
        a: Letter,
        bits: u32,
    },
}

/// A protocol checked for applicability with its shared data precomputed.
#[derive(Debug, Clone)]
pub struct PreparedProtocol {
    id: ProtocolId,
    rule: Rule,
    mirrored: Rule,
    z: Vec<Letter>,
    plan: Plan,
}

fn inapplicable(id: &ProtocolId, reason: impl Into<String>) -> Error {
    Error::Inapplicable { protocol: id.to_string(), reason: reason.into() }
}

fn all_in(z: &[Letter], b: &LetterSet) -> bool {
    z.iter().all(|&l| b.contains(l))
}

fn to_bits(value: usize, width: u32) -> String {
    (0..width).rev().map(|k| if (value >> k) & 1 == 1 { '1' } else { '0' }).collect()
}

fn from_bits(bits: &str) -> usize {
    bits.chars().fold(0, |acc, c| 2 * acc + (c == '1') as usize)
}

impl PreparedProtocol {
    pub fn prepare(id: &ProtocolId, rule: &Rule, z: &[Letter], budget: &Budget) -> Result<PreparedProtocol> {
        if z.len() < 2 {
            return Err(Error::LengthMismatch { expected: 2, found: z.len() });
        }
        rule.check_letters(z)?;
        let q = rule.alphabet_size();
        let n = z.len() - 1;
        let zero_trace = z.iter().all(|&l| l == 0);
        let plan = match id {
            ProtocolId::OneSided(b) => {
                if !all_in(z, b) {
                    return Err(inapplicable(id, format!("z has a letter outside {{{b}}}")));
                }
                let s = onesidedness(rule, b, OnesidedMode::Plain)?;
                if s.left() {
                    Plan::AliceKnows
                } else if s.right() {
                    Plan::BobKnows
                } else {
                    return Err(inapplicable(id, format!("rule is not {{{b}}}-onesided")));
                }
            }
            ProtocolId::SpreadingConst => {
                if !zero_trace {
                    return Err(inapplicable(id, "z is not 0^(n+1)"));
                }
                let nonzero = LetterSet::singleton(0).complement(q);
                let flags = spreading_status(rule, &nonzero)?;
                if !flags.semi_strong() {
                    return Err(inapplicable(id, "the non-0 letters are not semi-strongly spreading"));
                }
                if rule.apply(0, 0, 0) == 0 {
                    if flags.left_semi_strong {
                        Plan::NonZeroFlag(Player::Bob)
                    } else {
                        Plan::NonZeroFlag(Player::Alice)
                    }
                } else if q == 2 && n >= 2 {
                    Plan::Constant(1)
                } else {
                    return Err(inapplicable(id, "0 is not quiescent (needs a binary alphabet and n >= 2)"));
                }
            }
            ProtocolId::StagnatingPair => {
                if !zero_trace {
                    return Err(inapplicable(id, "z is not 0^(n+1)"));
                }
                if !stagnating_pair_condition(rule) {
                    return Err(inapplicable(id, "needs binary, quiescent 0 and 1 not weakly spreading"));
                }
                if rule.apply(1, 0, 1) == 0 {
                    debug_assert!(is_stagnating(rule, &[0]));
                    Plan::Constant(0)
                } else {
                    Plan::AndOfNeighbours
                }
            }
            ProtocolId::TraceColumn(side) => {
                let image: Vec<Vec<Letter>> = trace::forward_image(rule, z, *side, budget)?.into_iter().collect();
                let bits = ceil_log2(image.len() as u64);
                Plan::Column { side: *side, image, bits }
            }
            ProtocolId::TraceTau(side) => {
                let tau: Vec<Vec<Letter>> = trace::tau_set(rule, z, *side, budget)?.into_iter().collect();
                let bits = ceil_log2(tau.len() as u64 + 1);
                Plan::Tau { side: *side, tau, bits }
            }
            ProtocolId::Grouped => {
                if !matches!(rule.origin(), RuleOrigin::Grouped(_)) {
                    return Err(inapplicable(id, "rule is not tagged as a 2-grouped rule"));
                }
                Plan::Grouped {
                    left_tau: trace::tau_set(rule, z, Side::Left, budget)?,
                    right_tau: trace::tau_set(rule, z, Side::Right, budget)?,
                }
            }
            ProtocolId::BStar(b, side) => {
                if !all_in(z, b) {
                    return Err(inapplicable(id, format!("z has a letter outside {{{b}}}")));
                }
                let s = onesidedness(rule, b, OnesidedMode::Star)?;
                // Bob's column ignores its right side when the centre is in B
                let ok = match side {
                    Side::Right => s.left(),
                    Side::Left => s.right(),
                };
                if !ok {
                    let which = if *side == Side::Right { "leftsided" } else { "rightsided" };
                    return Err(inapplicable(id, format!("rule is not {{{b}}}-star-{which}")));
                }
                Plan::BStar { side: *side, bits: ceil_log2(q as u64) }
            }
            ProtocolId::FirstAppearance(a, side) => {
                if !rule.is_binary() {
                    return Err(inapplicable(id, "needs a binary alphabet"));
                }
                if !zero_trace {
                    return Err(inapplicable(id, "z is not 0^(n+1)"));
                }
                if !first_appearance_letters(rule, *side).contains(a) {
                    let cond = if *side == Side::Right { "f(0a0) = f(0a1) = a" } else { "f(0a0) = f(1a0) = a" };
                    return Err(inapplicable(id, format!("{cond} fails for a = {a}")));
                }
                Plan::FirstAppearance { side: *side, a: *a, bits: ceil_log2(n as u64 + 1) }
            }
        };
        Ok(PreparedProtocol { id: id.clone(), rule: rule.clone(), mirrored: rule.mirrored(), z: z.to_vec(), plan })
    }

    pub fn id(&self) -> &ProtocolId {
        &self.id
    }

    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    pub fn sender(&self) -> Player {
        match &self.plan {
            Plan::AliceKnows | Plan::BobKnows => Player::Alice,
            Plan::NonZeroFlag(p) => *p,
            Plan::Constant(_) | Plan::AndOfNeighbours | Plan::Grouped { .. } => Player::Bob,
            Plan::Column { side, .. }
            | Plan::Tau { side, .. }
            | Plan::BStar { side, .. }
            | Plan::FirstAppearance { side, .. } => match side {
                Side::Left => Player::Alice,
                Side::Right => Player::Bob,
            },
        }
    }

    /// The bit count the cited argument promises.
    pub fn claimed_bound(&self) -> u32 {
        match &self.plan {
            Plan::AliceKnows
            | Plan::BobKnows
            | Plan::NonZeroFlag(_)
            | Plan::Constant(_)
            | Plan::AndOfNeighbours
            | Plan::Grouped { .. } => 1,
            Plan::Column { bits, .. }
            | Plan::Tau { bits, .. }
            | Plan::BStar { bits, .. }
            | Plan::FirstAppearance { bits, .. } => *bits,
        }
    }

    /// Column adjacent to the centre on `side`, computed from that half alone.
    fn column(&self, side: Side, half: &[Letter]) -> Vec<Letter> {
        let mut out = Vec::with_capacity(half.len());
        match side {
            Side::Right => right_column_raw(&self.rule, &self.z, half, &mut out),
            Side::Left => {
                let mirrored: Vec<Letter> = half.iter().rev().copied().collect();
                right_column_raw(&self.mirrored, &self.z, &mirrored, &mut out);
            }
        }
        out
    }

    /// Whether the three columns are a valid evolution of the centre.
    fn glues(&self, left: &[Letter], right: &[Letter]) -> bool {
        (0..self.n()).all(|t| self.rule.apply(left[t], self.z[t], right[t]) == self.z[t + 1])
    }

    fn glue_answer(&self, side_sent: Side, sent: &[Letter], own: &[Letter]) -> u8 {
        let ok = match side_sent {
            Side::Right => self.glues(&self.column(Side::Left, own), sent),
            Side::Left => self.glues(sent, &self.column(Side::Right, own)),
        };
        (!ok) as u8
    }

    /// Full evaluation with Bob's half fixed to zeros, as Alice can do alone.
    fn evaluate(&self, u: &[Letter], v: &[Letter]) -> u8 {
        let mut w = u.to_vec();
        w.push(self.z[0]);
        w.extend_from_slice(v);
        (crate::ca::central_trace_of(&self.rule, &w) != self.z) as u8
    }

    /// The sender's message, from the sender's half only.
    fn message(&self, own: &[Letter]) -> String {
        let n = self.n();
        match &self.plan {
            Plan::AliceKnows => {
                // right neighbours are never read while the centre stays in B
                to_bits(self.evaluate(own, &vec![0; n]) as usize, 1)
            }
            Plan::BobKnows | Plan::Constant(_) => String::new(),
            Plan::NonZeroFlag(_) => to_bits(own.iter().any(|&l| l != 0) as usize, 1),
            Plan::AndOfNeighbours => to_bits((own[0] == 1) as usize, 1),
            Plan::Column { side, image, bits } => {
                let col = self.column(*side, own);
                let index = image.binary_search(&col).expect("column lies in the precomputed image");
                to_bits(index, *bits)
            }
            Plan::Tau { side, tau, bits } => {
                let col = self.column(*side, own);
                to_bits(tau.binary_search(&col).unwrap_or(tau.len()), *bits)
            }
            Plan::Grouped { right_tau, .. } => to_bits(right_tau.contains(&self.column(Side::Right, own)) as usize, 1),
            Plan::BStar { side, bits } => {
                let near = match side {
                    Side::Right => own[0],
                    Side::Left => own[n - 1],
                };
                to_bits(near as usize, *bits)
            }
            Plan::FirstAppearance { side, a, bits } => {
                let col = self.column(*side, own);
                to_bits(col.iter().position(|l| l == a).unwrap_or(n), *bits)
            }
        }
    }

    /// The receiver's answer, from the receiver's half and the message only.
    fn decide(&self, own: &[Letter], msg: &str) -> u8 {
        let n = self.n();
        match &self.plan {
            Plan::AliceKnows => from_bits(msg) as u8,
            Plan::BobKnows => self.evaluate(&vec![0; n], own),
            Plan::Constant(c) => *c,
            Plan::NonZeroFlag(sender) => {
                if from_bits(msg) == 1 {
                    1
                } else {
                    match sender {
                        Player::Bob => self.evaluate(own, &vec![0; n]),
                        Player::Alice => self.evaluate(&vec![0; n], own),
                    }
                }
            }
            Plan::AndOfNeighbours => (own[n - 1] == 1 && from_bits(msg) == 1) as u8,
            Plan::Column { side, image, .. } => self.glue_answer(*side, &image[from_bits(msg)], own),
            Plan::Tau { side, tau, .. } => match tau.get(from_bits(msg)) {
                Some(col) => self.glue_answer(*side, col, own),
                None => 1,
            },
            Plan::Grouped { left_tau, .. } => {
                let both = from_bits(msg) == 1 && left_tau.contains(&self.column(Side::Left, own));
                (!both) as u8
            }
            Plan::BStar { side, .. } => {
                let mut g = from_bits(msg) as Letter;
                let mut col = Vec::with_capacity(n);
                for t in 0..n {
                    col.push(g);
                    g = match side {
                        Side::Right => self.rule.apply(self.z[t], g, 0),
                        Side::Left => self.rule.apply(0, g, self.z[t]),
                    };
                }
                self.glue_answer(*side, &col, own)
            }
            Plan::FirstAppearance { side, a, .. } => {
                let first = from_bits(msg);
                let col: Vec<Letter> = (0..n).map(|t| if t < first { 1 - a } else { *a }).collect();
                self.glue_answer(*side, &col, own)
            }
        }
    }

    /// Runs the protocol on `u = u_{-n}..u_{-1}` and `v = v_1..v_n`.
    pub fn run(&self, u: &[Letter], v: &[Letter]) -> Result<Transcript> {
        let n = self.n();
        for half in [u, v] {
            if half.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: half.len() });
            }
            self.rule.check_letters(half)?;
        }
        let sender = self.sender();
        let (own_s, own_r) = match sender {
            Player::Alice => (u, v),
            Player::Bob => (v, u),
        };
        let bits = self.message(own_s);
        let answer = self.decide(own_r, &bits);
        let messages = if bits.is_empty() { Vec::new() } else { vec![Message { sender, bits }] };
        Ok(Transcript { messages, answer, answered_by: sender.other() })
    }
}

pub fn run_protocol(id: &ProtocolId, rule: &Rule, z: &[Letter], u: &[Letter], v: &[Letter]) -> Result<Transcript> {
    PreparedProtocol::prepare(id, rule, z, &Budget::from_env())?.run(u, v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub protocol: String,
    pub rule: String,
    pub n: usize,
    pub z: String,
    pub pairs_checked: u64,
    pub correct: bool,
    pub max_bits: u32,
    pub claimed_bound: u32,
    pub within_bound: bool,
    /// First `(u, v)` in index order where the answer was wrong.
    pub first_mismatch: Option<(String, String)>,
}

/// Runs the protocol on every input pair and compares with the oracle.
pub fn verify_protocol(id: &ProtocolId, rule: &Rule, z: &[Letter], budget: &Budget) -> Result<VerificationReport> {
    let prepared = PreparedProtocol::prepare(id, rule, z, budget)?;
    let oracle = TracedFunction::new(rule, z)?;
    let q = rule.alphabet_size();
    let n = z.len() - 1;
    budget.check_pow("protocol verification pairs", q, 2 * n)?;
    let dim = q.pow(n as u32);
    let per_row: Vec<(u32, Option<usize>)> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let u = row_letters(i, q, n);
            let mut max_bits = 0;
            let mut bad = None;
            for j in 0..dim {
                let v = col_letters(j, q, n);
                let t = prepared.run(&u, &v).expect("validated lengths");
                max_bits = max_bits.max(t.total_bits() as u32);
                if bad.is_none() && t.answer != oracle.hat(i, j) {
                    bad = Some(j);
                }
            }
            (max_bits, bad)
        })
        .collect();
    let max_bits = per_row.iter().map(|r| r.0).max().unwrap_or(0);
    let first_mismatch = per_row
        .iter()
        .enumerate()
        .find_map(|(i, r)| r.1.map(|j| (format_letters(&row_letters(i, q, n)), format_letters(&col_letters(j, q, n)))));
    let claimed_bound = prepared.claimed_bound();
    Ok(VerificationReport {
        protocol: id.to_string(),
        rule: rule.label(),
        n,
        z: format_letters(z),
        pairs_checked: (dim * dim) as u64,
        correct: first_mismatch.is_none(),
        max_bits,
        claimed_bound,
        within_bound: max_bits <= claimed_bound,
        first_mismatch,
    })
}

/// Every protocol id meaningful for the alphabet size, including
/// inapplicable ones.
pub fn candidate_ids(q: usize) -> Vec<ProtocolId> {
    let mut ids = vec![ProtocolId::OneSided(LetterSet::singleton(0)), ProtocolId::SpreadingConst];
    if q == 2 {
        ids.push(ProtocolId::OneSided(LetterSet::singleton(1)));
        ids.push(ProtocolId::StagnatingPair);
    }
    for side in [Side::Left, Side::Right] {
        ids.push(ProtocolId::TraceColumn(side));
        ids.push(ProtocolId::TraceTau(side));
        ids.push(ProtocolId::BStar(LetterSet::singleton(0), side));
        if q == 2 {
            for a in 0..2 {
                ids.push(ProtocolId::FirstAppearance(a, side));
            }
        }
    }
    ids.push(ProtocolId::Grouped);
    ids
}

/// Verifies every applicable candidate; inapplicable ones are skipped.
pub fn verify_applicable(rule: &Rule, z: &[Letter], budget: &Budget) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for id in candidate_ids(rule.alphabet_size()) {
        match verify_protocol(&id, rule, z, budget) {
            Ok(r) => out.push(r),
            Err(Error::Inapplicable { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
