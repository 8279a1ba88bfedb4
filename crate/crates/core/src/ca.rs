//! Rules, finite words, computation triangles and traces.
//!
//! A rule is a total local map `A³ → A` on the alphabet `A = {0, .., q-1}`.
//! Words carry their absolute interval so that positions relative to the
//! central cell stay explicit: a configuration of half-width `n` lives on
//! `[-n..n]`, and each synchronous step shrinks the defined region by one
//! cell on each side.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod packed;

pub type Letter = u8;

/// Largest supported alphabet (letters are stored in a `u8`).
pub const MAX_ALPHABET: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(Error::Parse(format!("unknown side {other:?}"))),
        }
    }
}

/// Where a rule came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleOrigin {
    Elementary(u8),
    Grouped(Box<Rule>),
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    q: usize,
    table: Vec<Letter>,
    origin: RuleOrigin,
}

impl Rule {
    /// Builds an elementary rule from its canonical number `Σ f(abc) 2^(4a+2b+c)`.
    pub fn from_number(q: usize, number: u32) -> Result<Rule> {
        if q != 2 {
            return Err(Error::NonBinaryAlphabet(q));
        }
        if number > 255 {
            return Err(Error::RuleNumberOutOfRange(number));
        }
        Ok(Rule::elementary(number as u8))
    }

    pub fn elementary(number: u8) -> Rule {
        let table = (0..8).map(|i| (number >> i) & 1).collect();
        Rule { q: 2, table, origin: RuleOrigin::Elementary(number) }
    }

    /// Builds a rule from an explicit table indexed by `(a·q + b)·q + c`.
    pub fn from_table(q: usize, table: Vec<Letter>) -> Result<Rule> {
        if !(2..=MAX_ALPHABET).contains(&q) {
            return Err(Error::InvalidTable(format!("alphabet size {q} outside 2..={MAX_ALPHABET}")));
        }
        if table.len() != q * q * q {
            return Err(Error::InvalidTable(format!("expected {} entries, found {}", q * q * q, table.len())));
        }
        if let Some(&bad) = table.iter().find(|&&d| d as usize >= q) {
            return Err(Error::LetterOutOfAlphabet { letter: bad, q });
        }
        Ok(Rule { q, table, origin: RuleOrigin::Custom })
    }

    /// Canonical number; only defined for binary alphabets.
    pub fn number(&self) -> Result<u8> {
        if self.q != 2 {
            return Err(Error::NonBinaryAlphabet(self.q));
        }
        Ok(self.table.iter().enumerate().fold(0u8, |acc, (i, &d)| acc | (d << i)))
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    pub fn origin(&self) -> &RuleOrigin {
        &self.origin
    }

    pub fn table(&self) -> &[Letter] {
        &self.table
    }

    pub fn is_binary(&self) -> bool {
        self.q == 2
    }

    #[inline]
    pub fn apply(&self, a: Letter, b: Letter, c: Letter) -> Letter {
        self.table[(a as usize * self.q + b as usize) * self.q + c as usize]
    }

    /// Short identifier: `90`, `g90` for the 2-grouped rule 90, `custom-q4`.
    pub fn label(&self) -> String {
        match &self.origin {
            RuleOrigin::Elementary(n) => n.to_string(),
            RuleOrigin::Grouped(inner) => format!("g{}", inner.label()),
            RuleOrigin::Custom => match self.number() {
                Ok(n) => n.to_string(),
                Err(_) => format!("custom-q{}", self.q),
            },
        }
    }

    /// The left/right reflection `(a, b, c) ↦ f(c, b, a)`.
    pub fn mirrored(&self) -> Rule {
        let q = self.q;
        let mut table = vec![0; q * q * q];
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    table[(a * q + b) * q + c] = self.apply(c as Letter, b as Letter, a as Letter);
                }
            }
        }
        let origin = match self.origin {
            RuleOrigin::Elementary(_) => {
                let n = table.iter().enumerate().fold(0u8, |acc, (i, &d)| acc | (d << i));
                RuleOrigin::Elementary(n)
            }
            _ => RuleOrigin::Custom,
        };
        Rule { q, table, origin }
    }

    /// True when `f(abc) = f(cba)` for every triple.
    pub fn is_mirror_symmetric(&self) -> bool {
        self.mirrored().table == self.table
    }

    /// The 2-grouped rule on pairs `(x, y)` encoded as `q·x + y`:
    /// `((x₋₁,y₋₁),(x₀,y₀),(x₁,y₁)) ↦ (f(y₋₁,x₀,y₀), f(x₀,y₀,x₁))`.
    pub fn group2(&self) -> Rule {
        let q = self.q;
        let q2 = q * q;
        let mut table = vec![0; q2 * q2 * q2];
        for left in 0..q2 {
            let y_l = (left % q) as Letter;
            for mid in 0..q2 {
                let (x0, y0) = ((mid / q) as Letter, (mid % q) as Letter);
                for right in 0..q2 {
                    let x_r = (right / q) as Letter;
                    let nx = self.apply(y_l, x0, y0);
                    let ny = self.apply(x0, y0, x_r);
                    table[(left * q2 + mid) * q2 + right] = (nx as usize * q + ny as usize) as Letter;
                }
            }
        }
        Rule { q: q2, table, origin: RuleOrigin::Grouped(Box::new(self.clone())) }
    }

    /// Serializes to the text table format: `q`, then `a b c -> d` lines in
    /// lexicographic order of `(a, b, c)`.
    pub fn to_table_text(&self) -> String {
        let q = self.q;
        let mut out = format!("{q}\n");
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let d = self.apply(a as Letter, b as Letter, c as Letter);
                    out.push_str(&format!("{a} {b} {c} -> {d}\n"));
                }
            }
        }
        out
    }

    pub fn parse_table_text(text: &str) -> Result<Rule> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let q: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty rule table".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("alphabet size: {e}")))?;
        if !(2..=MAX_ALPHABET).contains(&q) {
            return Err(Error::InvalidTable(format!("alphabet size {q} outside 2..={MAX_ALPHABET}")));
        }
        let mut table = Vec::with_capacity(q * q * q);
        for index in 0..q * q * q {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing table line {}", index + 1)))?;
            let (lhs, rhs) =
                line.split_once("->").ok_or_else(|| Error::Parse(format!("expected `a b c -> d`, got {line:?}")))?;
            let args: Vec<usize> = lhs
                .split_whitespace()
                .map(|s| s.parse().map_err(|e| Error::Parse(format!("{line:?}: {e}"))))
                .collect::<Result<_>>()?;
            let expected = [index / (q * q), (index / q) % q, index % q];
            if args != expected {
                return Err(Error::Parse(format!(
                    "line {line:?} out of order, expected {} {} {}",
                    expected[0], expected[1], expected[2]
                )));
            }
            let d: usize = rhs.trim().parse().map_err(|e| Error::Parse(format!("{line:?}: {e}")))?;
            if d >= q {
                return Err(Error::LetterOutOfAlphabet { letter: d.min(255) as u8, q });
            }
            table.push(d as Letter);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing line {extra:?}")));
        }
        let mut rule = Rule::from_table(q, table)?;
        if let Ok(n) = rule.number() {
            rule.origin = RuleOrigin::Elementary(n);
        }
        Ok(rule)
    }

    pub(crate) fn check_letters(&self, letters: &[Letter]) -> Result<()> {
        match letters.iter().find(|&&l| l as usize >= self.q) {
            Some(&letter) => Err(Error::LetterOutOfAlphabet { letter, q: self.q }),
            None => Ok(()),
        }
    }

    /// One synchronous step on raw letters: `dst[k] = f(src[k], src[k+1], src[k+2])`.
    #[inline]
    pub(crate) fn step_slice(&self, src: &[Letter], dst: &mut Vec<Letter>) {
        dst.clear();
        dst.extend(src.windows(3).map(|w| self.apply(w[0], w[1], w[2])));
    }
}

/// A finite word on the absolute interval `[start..start+len-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    start: i64,
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(start: i64, letters: Vec<Letter>) -> Word {
        Word { start, letters }
    }

    /// A configuration on `[-n..n]`; the length must be odd.
    pub fn centered(letters: Vec<Letter>) -> Result<Word> {
        if letters.len().is_multiple_of(2) {
            let len = letters.len() as i64;
            return Err(Error::NotCentered { start: -(len / 2), end: len / 2 - 1 });
        }
        let n = (letters.len() / 2) as i64;
        Ok(Word { start: -n, letters })
    }

    /// Parses a digit string (`0-9`, then `a-z` for letters ≥ 10).
    pub fn from_digits(start: i64, digits: &str) -> Result<Word> {
        Ok(Word { start, letters: parse_letters(digits)? })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.letters.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    /// Letter at absolute position `k`.
    pub fn at(&self, k: i64) -> Option<Letter> {
        if k < self.start || k > self.end() {
            None
        } else {
            Some(self.letters[(k - self.start) as usize])
        }
    }

    /// Half-width `n` of a centered word.
    pub fn half_width(&self) -> Result<usize> {
        if self.letters.len() % 2 == 1 && self.start == -self.end() {
            Ok((-self.start) as usize)
        } else {
            Err(Error::NotCentered { start: self.start, end: self.end() })
        }
    }

    pub fn restrict(&self, i: i64, j: i64) -> Result<Word> {
        if i > j || i < self.start || j > self.end() {
            return Err(Error::IntervalOutOfRange { i, j, lo: self.start, hi: self.end() });
        }
        let a = (i - self.start) as usize;
        let b = (j - self.start) as usize;
        Ok(Word { start: i, letters: self.letters[a..=b].to_vec() })
    }

    pub fn digits(&self) -> String {
        format_letters(&self.letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digits())
    }
}

pub fn letter_char(l: Letter) -> char {
    std::char::from_digit(l as u32, 36).unwrap_or('?')
}

pub fn format_letters(letters: &[Letter]) -> String {
    letters.iter().map(|&l| letter_char(l)).collect()
}

pub fn parse_letters(digits: &str) -> Result<Vec<Letter>> {
    digits
        .chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as Letter)
                .ok_or_else(|| Error::Parse(format!("invalid letter {c:?} in {digits:?}")))
        })
        .collect()
}

/// `ū` with `ū_{-k} = u_k`, on the reflected interval.
pub fn mirror_word(w: &Word) -> Word {
    let mut letters = w.letters.clone();
    letters.reverse();
    Word { start: -w.end(), letters }
}

/// One synchronous step. Without a boundary letter the result lives on
/// `[i+1..j-1]`; with a left boundary letter `b` (read as the letter at
/// `i-1`) the result lives on `[i..j-1]`.
pub fn apply_step(rule: &Rule, w: &Word, left_boundary: Option<Letter>) -> Result<Word> {
    rule.check_letters(&w.letters)?;
    match left_boundary {
        None => {
            if w.len() < 3 {
                return Err(Error::WordTooShort { start: w.start, end: w.end(), needed: 3 });
            }
            let mut out = Vec::with_capacity(w.len() - 2);
            rule.step_slice(&w.letters, &mut out);
            Ok(Word { start: w.start + 1, letters: out })
        }
        Some(b) => {
            rule.check_letters(&[b])?;
            if w.len() < 2 {
                return Err(Error::WordTooShort { start: w.start, end: w.end(), needed: 2 });
            }
            let mut out = Vec::with_capacity(w.len() - 1);
            out.push(rule.apply(b, w.letters[0], w.letters[1]));
            out.extend(w.letters.windows(3).map(|x| rule.apply(x[0], x[1], x[2])));
            Ok(Word { start: w.start, letters: out })
        }
    }
}

/// The space-time diagram of a centered word: row `t` lives on `[t-n..n-t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangle {
    rows: Vec<Word>,
}

impl Triangle {
    pub fn n(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn base(&self) -> &Word {
        &self.rows[0]
    }

    pub fn rows(&self) -> &[Word] {
        &self.rows
    }

    pub fn row(&self, t: usize) -> &Word {
        &self.rows[t]
    }

    /// `f^n(w)_0`, the top cell.
    pub fn top(&self) -> Letter {
        self.rows[self.n()].letters[0]
    }

    /// The central column `T_f(w)`.
    pub fn central_trace(&self) -> Vec<Letter> {
        self.rows.iter().map(|r| r.at(0).expect("central cell defined")).collect()
    }
}

pub fn build_triangle(rule: &Rule, w: &Word) -> Result<Triangle> {
    let n = w.half_width()?;
    rule.check_letters(&w.letters)?;
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(w.clone());
    for t in 0..n {
        let mut next = Vec::with_capacity(2 * (n - t) - 1);
        rule.step_slice(&rows[t].letters, &mut next);
        rows.push(Word { start: rows[t].start + 1, letters: next });
    }
    Ok(Triangle { rows })
}

/// Column trace over `[i..j]`: one word per time step `0..=n-max(|i|,|j|)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceWord {
    pub i: i64,
    pub j: i64,
    pub values: Vec<Word>,
}

impl TraceWord {
    /// For single columns, the letters over time.
    pub fn column(&self) -> Vec<Letter> {
        self.values.iter().map(|w| w.letters[0]).collect()
    }
}

pub fn compute_trace(rule: &Rule, w: &Word, i: i64, j: i64) -> Result<TraceWord> {
    let n = w.half_width()? as i64;
    if i > j || i < -n || j > n {
        return Err(Error::IntervalOutOfRange { i, j, lo: -n, hi: n });
    }
    let triangle = build_triangle(rule, w)?;
    let horizon = (n - i.abs().max(j.abs())) as usize;
    let values = (0..=horizon).map(|t| triangle.row(t).restrict(i, j)).collect::<Result<_>>()?;
    Ok(TraceWord { i, j, values })
}

/// Central trace of raw centered letters (length `2n+1`), without building rows.
pub(crate) fn central_trace_of(rule: &Rule, letters: &[Letter]) -> Vec<Letter> {
    let n = letters.len() / 2;
    let mut trace = Vec::with_capacity(n + 1);
    let mut cur = letters.to_vec();
    let mut next = Vec::with_capacity(letters.len());
    for t in 0..=n {
        trace.push(cur[n - t]);
        if t < n {
            rule.step_slice(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    trace
}

/// Fills `out` with the base-`q` digits of `index`, least significant first.
#[inline]
pub(crate) fn digits_lsb_first(mut index: u64, q: usize, out: &mut [Letter]) {
    for slot in out.iter_mut() {
        *slot = (index % q as u64) as Letter;
        index /= q as u64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(start: i64, digits: &str) -> Word {
        Word::from_digits(start, digits).unwrap()
    }

    #[test]
    fn number_round_trip_and_examples() {
        let r90 = Rule::from_number(2, 90).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    assert_eq!(r90.apply(a, b, c), a ^ c);
                }
            }
        }
        assert!(Rule::from_number(2, 0).unwrap().table().iter().all(|&d| d == 0));
        assert!(Rule::from_number(2, 255).unwrap().table().iter().all(|&d| d == 1));
        for n in 0..=255u8 {
            assert_eq!(Rule::elementary(n).number().unwrap(), n);
        }
        let xor = Rule::from_table(2, (0..8u8).map(|i| (i >> 2) ^ (i & 1)).collect()).unwrap();
        assert_eq!(xor.number().unwrap(), 90);
        let identity = Rule::from_table(2, (0..8u8).map(|i| (i >> 1) & 1).collect()).unwrap();
        assert_eq!(identity.number().unwrap(), 204);
    }

    #[test]
    fn number_errors() {
        assert!(matches!(Rule::from_number(2, 256), Err(Error::RuleNumberOutOfRange(256))));
        assert!(matches!(Rule::from_number(3, 5), Err(Error::NonBinaryAlphabet(3))));
        let q3 = Rule::from_table(3, vec![0; 27]).unwrap();
        assert!(matches!(q3.number(), Err(Error::NonBinaryAlphabet(3))));
    }

    #[test]
    fn apply_step_examples() {
        let out = apply_step(&Rule::elementary(90), &w(-2, "00100"), None).unwrap();
        assert_eq!((out.start(), out.digits().as_str()), (-1, "101"));
        let out = apply_step(&Rule::elementary(0), &w(-2, "11011"), None).unwrap();
        assert_eq!(out.digits(), "000");
        let out = apply_step(&Rule::elementary(204), &w(-2, "01011"), None).unwrap();
        assert_eq!((out.start(), out.digits().as_str()), (-1, "101"));
        assert!(matches!(apply_step(&Rule::elementary(90), &w(0, "01"), None), Err(Error::WordTooShort { .. })));
    }

    #[test]
    fn apply_step_with_boundary_keeps_first_cell() {
        // rule 170 copies the right neighbour
        let out = apply_step(&Rule::elementary(170), &w(1, "1011"), Some(0)).unwrap();
        assert_eq!((out.start(), out.end(), out.digits().as_str()), (1, 3, "011"));
        // the boundary letter is read as the left neighbour of position i
        let out = apply_step(&Rule::elementary(240), &w(1, "01"), Some(1)).unwrap();
        assert_eq!(out.digits(), "1");
        assert!(apply_step(&Rule::elementary(240), &w(1, "0"), Some(1)).is_err());
    }

    #[test]
    fn triangle_examples() {
        let t = build_triangle(&Rule::elementary(18), &Word::centered(parse_letters("001000100").unwrap()).unwrap())
            .unwrap();
        assert_eq!(t.row(2).start(), -2);
        assert_eq!(t.row(2).digits(), "00000");
        assert_eq!(t.rows().len(), 5);

        let t = build_triangle(&Rule::elementary(90), &Word::centered(parse_letters("000010000").unwrap()).unwrap())
            .unwrap();
        assert_eq!(t.row(1).digits(), "0010100");

        let t = build_triangle(&Rule::elementary(0), &w(-3, "1101011")).unwrap();
        assert!(t.rows()[1..].iter().all(|r| r.letters().iter().all(|&d| d == 0)));
        assert!(matches!(build_triangle(&Rule::elementary(0), &w(-2, "1101")), Err(Error::NotCentered { .. })));
    }

    #[test]
    fn trace_examples() {
        let base = Word::centered(parse_letters("001000100").unwrap()).unwrap();
        let tr = compute_trace(&Rule::elementary(18), &base, 0, 0).unwrap();
        assert_eq!(format_letters(&tr.column()), "00000");

        let base = Word::centered(parse_letters("000010000").unwrap()).unwrap();
        let tr = compute_trace(&Rule::elementary(90), &base, 0, 0).unwrap();
        assert_eq!(format_letters(&tr.column()), "10000");

        let base = w(-3, "0110100");
        let tr = compute_trace(&Rule::elementary(204), &base, 0, 0).unwrap();
        assert_eq!(format_letters(&tr.column()), "0000");
        let tr = compute_trace(&Rule::elementary(204), &base, 1, 1).unwrap();
        assert_eq!(format_letters(&tr.column()), "111");

        let tr = compute_trace(&Rule::elementary(204), &base, 2, 3).unwrap();
        assert_eq!(tr.values.len(), 1);
        assert_eq!(tr.values[0].digits(), "00");
        assert!(compute_trace(&Rule::elementary(204), &base, 2, 4).is_err());
    }

    #[test]
    fn group2_examples() {
        let g90 = Rule::elementary(90).group2();
        assert_eq!(g90.alphabet_size(), 4);
        assert_eq!(g90.apply(1, 2, 3), 2);
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    let formula = 2 * ((a + b) % 2) + ((b / 2 + c / 2) % 2);
                    assert_eq!(g90.apply(a, b, c), formula, "({a},{b},{c})");
                    assert_eq!(Rule::elementary(204).group2().apply(a, b, c), b);
                    assert_eq!(Rule::elementary(0).group2().apply(a, b, c), 0);
                }
            }
        }
        assert_eq!(g90.label(), "g90");
    }

    #[test]
    fn mirror_examples() {
        let m = mirror_word(&w(1, "0100"));
        assert_eq!((m.start(), m.end(), m.digits().as_str()), (-4, -1, "0010"));
        let p = w(2, "0110");
        assert_eq!(mirror_word(&p).letters(), p.letters());
        assert_eq!(mirror_word(&mirror_word(&m)), m);
        assert_eq!(Rule::elementary(110).mirrored().number().unwrap(), 124);
        assert!(Rule::elementary(90).is_mirror_symmetric());
    }

    #[test]
    fn table_text_round_trip() {
        let g = Rule::elementary(110).group2();
        let text = g.to_table_text();
        let parsed = Rule::parse_table_text(&text).unwrap();
        assert_eq!(parsed.table(), g.table());
        let r = Rule::parse_table_text(&Rule::elementary(30).to_table_text()).unwrap();
        assert_eq!(r.number().unwrap(), 30);
        assert!(Rule::parse_table_text("2\n0 0 1 -> 1\n").is_err());
        assert!(Rule::parse_table_text("2\n0 0 0 -> 2\n").is_err());
    }

    #[test]
    fn rule_90_binomial_linearity() {
        // f^t(w)_0 = XOR_j w_j · C(t, (t+j)/2) mod 2
        let r90 = Rule::elementary(90);
        for n in 1..=10usize {
            for seed in 0..20u64 {
                let letters: Vec<Letter> =
                    (0..2 * n + 1).map(|k| ((seed.wrapping_mul(0x9E37_79B9) >> (k % 31)) & 1) as Letter).collect();
                let trace = central_trace_of(&r90, &letters);
                for t in 0..=n {
                    let mut expect = 0;
                    for j in -(t as i64)..=(t as i64) {
                        if (t as i64 + j) % 2 == 0 {
                            let k = ((t as i64 + j) / 2) as usize;
                            // Lucas: C(t, k) is odd iff k ⊆ t bitwise
                            if k & t == k {
                                expect ^= letters[(n as i64 + j) as usize];
                            }
                        }
                    }
                    assert_eq!(trace[t], expect);
                }
            }
        }
    }
}
