//! Subshifts of finite type, subautomata, expansivity and the fooling sets
//! and counting bounds built from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::ca::{central_trace_of, format_letters, parse_letters, Letter, Rule, Side};
use crate::cc::{col_index, row_index, FoolingSet, TracedFunction};
use crate::error::{Error, Result};

/// Words over `{0, .., q-1}` avoiding a finite list of factors.
///
/// `width = Some(w)` marks a list truncated from an infinite family: it is
/// exact only for words of length at most `w`, and longer words are refused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshiftSpec {
    pub q: usize,
    pub forbidden: Vec<Vec<Letter>>,
    pub width: Option<usize>,
}

impl SubshiftSpec {
    pub fn full(q: usize) -> Self {
        Self { q, forbidden: Vec::new(), width: None }
    }

    pub fn new(q: usize, forbidden: Vec<Vec<Letter>>) -> Result<Self> {
        for w in &forbidden {
            if let Some(&l) = w.iter().find(|&&l| l as usize >= q) {
                return Err(Error::LetterOutOfAlphabet { letter: l, q });
            }
        }
        Ok(Self { q, forbidden, width: None })
    }

    /// `11` and `1 0^{2k} 1` for every `2k + 2 ≤ width`.
    pub fn odd_gap(width: usize) -> Self {
        let forbidden = (0..)
            .map(|k| 2 * k + 2)
            .take_while(|&len| len <= width.max(2))
            .map(|len| {
                let mut w = vec![0; len];
                w[0] = 1;
                w[len - 1] = 1;
                w
            })
            .collect();
        Self { q: 2, forbidden, width: Some(width) }
    }

    pub fn is_full(&self) -> bool {
        self.forbidden.is_empty()
    }

    pub fn longest_forbidden(&self) -> usize {
        self.forbidden.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The same constraint on mirrored words.
    pub fn mirrored(&self) -> Self {
        let forbidden = self.forbidden.iter().map(|w| w.iter().rev().copied().collect()).collect();
        Self { q: self.q, forbidden, width: self.width }
    }

    fn check_width(&self, len: usize) -> Result<()> {
        match self.width {
            Some(w) if len > w => Err(Error::WidthExceeded { width: w, len }),
            _ => Ok(()),
        }
    }

    fn ends_with_forbidden(&self, prefix: &[Letter]) -> bool {
        self.forbidden.iter().any(|f| !f.is_empty() && prefix.ends_with(f))
    }

    fn contains_forbidden(&self, word: &[Letter]) -> bool {
        (1..=word.len()).any(|end| self.ends_with_forbidden(&word[..end]))
    }

    /// Whether `word` has no forbidden factor.
    pub fn allows(&self, word: &[Letter]) -> Result<bool> {
        self.check_width(word.len())?;
        Ok(word.iter().all(|&l| (l as usize) < self.q) && !self.contains_forbidden(word))
    }

    /// Text form: `@alphabet Q` (optional, default 2), then one forbidden
    /// word per line; `@oddgap W` expands to [`SubshiftSpec::odd_gap`];
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut q = 2;
        let mut forbidden: Vec<Vec<Letter>> = Vec::new();
        let mut width = None;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            match fields.next() {
                Some("@alphabet") => {
                    q = fields
                        .next()
                        .and_then(|x| x.parse().ok())
                        .filter(|&q: &usize| (2..=36).contains(&q))
                        .ok_or_else(|| Error::Parse(format!("bad alphabet line {line:?}")))?;
                }
                Some("@oddgap") => {
                    let w: usize = fields
                        .next()
                        .and_then(|x| x.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("bad oddgap line {line:?}")))?;
                    for f in Self::odd_gap(w).forbidden {
                        if !forbidden.contains(&f) {
                            forbidden.push(f);
                        }
                    }
                    width = Some(width.map_or(w, |old: usize| old.min(w)));
                }
                Some(word) if !word.starts_with('@') => forbidden.push(parse_letters(word)?),
                _ => return Err(Error::Parse(format!("unknown directive {line:?}"))),
            }
        }
        let mut spec = Self::new(q, forbidden)?;
        spec.width = width;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "@alphabet {}", self.q);
        if let Some(w) = self.width {
            let _ = writeln!(out, "# truncated at width {w}");
        }
        for f in &self.forbidden {
            let _ = writeln!(out, "{}", format_letters(f));
        }
        out
    }
}

/// All words of `Σ` of length `len`, in lexicographic order.
pub fn enumerate_sigma(spec: &SubshiftSpec, len: usize, budget: &Budget) -> Result<Vec<Vec<Letter>>> {
    spec.check_width(len)?;
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(len);
    extend(spec, len, &mut prefix, &mut out, budget)?;
    Ok(out)
}

fn extend(
    spec: &SubshiftSpec,
    len: usize,
    prefix: &mut Vec<Letter>,
    out: &mut Vec<Vec<Letter>>,
    budget: &Budget,
) -> Result<()> {
    if prefix.len() == len {
        budget.check("subshift enumeration", out.len() as u128 + 1)?;
        out.push(prefix.clone());
        return Ok(());
    }
    for l in 0..spec.q as Letter {
        prefix.push(l);
        if !spec.ends_with_forbidden(prefix) {
            extend(spec, len, prefix, out, budget)?;
        }
        prefix.pop();
    }
    Ok(())
}

pub fn sigma_count(spec: &SubshiftSpec, len: usize, budget: &Budget) -> Result<u64> {
    Ok(enumerate_sigma(spec, len, budget)?.len() as u64)
}

fn letters_match(rule: &Rule, spec: &SubshiftSpec) -> Result<()> {
    if rule.alphabet_size() != spec.q {
        return Err(Error::LengthMismatch { expected: rule.alphabet_size(), found: spec.q });
    }
    Ok(())
}

/// Whether the rule maps `Σ⟦i-1, j+1⟧` into `Σ⟦i, j⟧`.
///
/// Checked on words of length `3..=L+2` (`L` the longest forbidden word),
/// capped at the working width for truncated families.
pub fn check_subautomaton(rule: &Rule, spec: &SubshiftSpec, budget: &Budget) -> Result<bool> {
    letters_match(rule, spec)?;
    let mut max_len = spec.longest_forbidden() + 2;
    if let Some(w) = spec.width {
        max_len = max_len.min(w);
    }
    let mut image = Vec::new();
    for len in 3..=max_len {
        for w in enumerate_sigma(spec, len, budget)? {
            rule.step_slice(&w, &mut image);
            if spec.contains_forbidden(&image) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Zero-legality: mirror symmetry of `f` on `Σ⟦-1,1⟧` and `f(a 0 a) = 0`.
pub fn check_legal(rule: &Rule, spec: &SubshiftSpec, zero: Letter) -> Result<bool> {
    letters_match(rule, spec)?;
    if zero as usize >= spec.q {
        return Err(Error::LetterOutOfAlphabet { letter: zero, q: spec.q });
    }
    for w in enumerate_sigma(spec, 3, &Budget::default())? {
        let (a, b, c) = (w[0], w[1], w[2]);
        if !spec.allows(&[c, b, a])? || rule.apply(c, b, a) != rule.apply(a, b, c) {
            return Ok(false);
        }
        if b == zero && a == c && rule.apply(a, b, c) != zero {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExpansivityResult {
    Expansive {
        t: usize,
    },
    /// No `t ≤ t_max` works; the two words on `[-t_max..t_max]` share the
    /// width-2 trace but differ just outside it.
    Refuted {
        t_max: usize,
        witness: (String, String),
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansivityCertificate {
    pub rule: String,
    pub side: Side,
    pub result: ExpansivityResult,
}

impl ExpansivityCertificate {
    pub fn time(&self) -> Option<usize> {
        match self.result {
            ExpansivityResult::Expansive { t } => Some(t),
            ExpansivityResult::Refuted { .. } => None,
        }
    }
}

/// Words on `[-t..t]` sharing the trace of columns `{-1, 0}` (right side)
/// but differing at position 1. Column 0 is compared at times `0..=t` and
/// column -1 at times `0..t`, the times at which each is determined by the
/// word.
fn expansivity_conflict(
    rule: &Rule,
    spec: &SubshiftSpec,
    t: usize,
    budget: &Budget,
) -> Result<Option<(Vec<Letter>, Vec<Letter>)>> {
    let len = 2 * t + 1;
    let words = enumerate_sigma(spec, len, budget)?;
    let mut groups: BTreeMap<Vec<Letter>, Vec<usize>> = BTreeMap::new();
    let mut cur = Vec::with_capacity(len);
    let mut next = Vec::with_capacity(len);
    for (index, w) in words.iter().enumerate() {
        cur.clear();
        cur.extend_from_slice(w);
        let mut key = Vec::with_capacity(2 * t + 1);
        for s in 0..=t {
            let c = t - s;
            key.push(cur[c]);
            if s < t {
                key.push(cur[c - 1]);
                rule.step_slice(&cur, &mut next);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        groups.entry(key).or_default().push(index);
    }
    let mut best: Option<(usize, usize, usize)> = None;
    for members in groups.values() {
        let first = words[members[0]][t + 1];
        if members.iter().all(|&k| words[k][t + 1] == first) {
            continue;
        }
        // closest conflicting pair; quadratic scan only for small groups
        let scan = if members.len() <= 4096 { members.len() } else { 1 };
        for (a, &i) in members.iter().enumerate().take(scan) {
            for &j in &members[a + 1..] {
                if words[i][t + 1] == words[j][t + 1] {
                    continue;
                }
                let d = words[i].iter().zip(&words[j]).filter(|(x, y)| x != y).count();
                if best.is_none_or(|(bd, ..)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        if best.is_some_and(|(d, ..)| d == 1) {
            break;
        }
    }
    Ok(best.map(|(_, i, j)| (words[i].clone(), words[j].clone())))
}

/// Least `t ≤ t_max` at which the rule restricted to `Σ` is expansive on
/// `side`, or a refutation with a witness pair at `t_max`.
pub fn detect_expansivity(
    rule: &Rule,
    spec: &SubshiftSpec,
    side: Side,
    t_max: usize,
    budget: &Budget,
) -> Result<ExpansivityCertificate> {
    letters_match(rule, spec)?;
    let (oriented, sigma) = match side {
        Side::Right => (rule.clone(), spec.clone()),
        Side::Left => (rule.mirrored(), spec.mirrored()),
    };
    let mut witness = None;
    for t in 1..=t_max.max(1) {
        match expansivity_conflict(&oriented, &sigma, t, budget)? {
            None => {
                return Ok(ExpansivityCertificate {
                    rule: rule.label(),
                    side,
                    result: ExpansivityResult::Expansive { t },
                })
            }
            Some(pair) => witness = Some(pair),
        }
    }
    let (mut a, mut b) = witness.expect("at least one time step examined");
    if side == Side::Left {
        a.reverse();
        b.reverse();
    }
    Ok(ExpansivityCertificate {
        rule: rule.label(),
        side,
        result: ExpansivityResult::Refuted { t_max: t_max.max(1), witness: (format_letters(&a), format_letters(&b)) },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WzMember {
    /// Letters on the interval `[lo..hi]`.
    pub word: Vec<Letter>,
    /// Extensions on `[-n..lo-1]` and `[hi+1..n]` whose triangle traces `z`.
    pub x: Vec<Letter>,
    pub y: Vec<Letter>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WzSet {
    pub z: Vec<Letter>,
    pub lo: i64,
    pub hi: i64,
    pub members: Vec<WzMember>,
}

impl WzSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `γ(w) = (x_w w[lo..-1], w[1..hi] y_w)` as (row, column) indices.
    pub fn gamma(&self, q: usize) -> Vec<(usize, usize)> {
        let lead = (-self.lo) as usize;
        self.members
            .iter()
            .map(|m| {
                let mut u = m.x.clone();
                u.extend_from_slice(&m.word[..lead]);
                let mut v = m.word[lead + 1..].to_vec();
                v.extend_from_slice(&m.y);
                (row_index(&u, q), col_index(&v, q))
            })
            .collect()
    }
}

/// Words of `Σ⟦-⌊n/t_left⌋, ⌊n/t_right⌋⌋` that extend to a triangle in
/// `Σ⟦-n, n⟧` tracing `z`, each with its lexicographically first extension.
pub fn build_wz(
    rule: &Rule,
    spec: &SubshiftSpec,
    z: &[Letter],
    t_left: usize,
    t_right: usize,
    budget: &Budget,
) -> Result<WzSet> {
    letters_match(rule, spec)?;
    if z.len() < 2 {
        return Err(Error::LengthMismatch { expected: 2, found: z.len() });
    }
    rule.check_letters(z)?;
    let n = z.len() - 1;
    let lead = n / t_left.max(1);
    let tail = n / t_right.max(1);
    let mut members: BTreeMap<Vec<Letter>, WzMember> = BTreeMap::new();
    for w in enumerate_sigma(spec, 2 * n + 1, budget)? {
        if central_trace_of(rule, &w) != z {
            continue;
        }
        let inner = w[n - lead..=n + tail].to_vec();
        members.entry(inner.clone()).or_insert_with(|| WzMember {
            word: inner,
            x: w[..n - lead].to_vec(),
            y: w[n + tail + 1..].to_vec(),
        });
    }
    Ok(WzSet { z: z.to_vec(), lo: -(lead as i64), hi: tail as i64, members: members.into_values().collect() })
}

/// How [`build_wz_fooling`] obtains its pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WzMode {
    /// `γ(W_z)` with the given expansivity times.
    Expansive { t_left: usize, t_right: usize },
    /// Pairs `(mirror(v), v)` for `v` in the seed language, `z = 0^{n+1}`.
    Legal { seed: Vec<Vec<Letter>>, zero: Letter },
}

/// `(0100 + 0001)^m`, in lexicographic order of the block choices.
pub fn corollary_seed(m: usize) -> Vec<Vec<Letter>> {
    let blocks: [[Letter; 4]; 2] = [[0, 0, 0, 1], [0, 1, 0, 0]];
    (0..1usize << m).map(|choice| (0..m).flat_map(|k| blocks[(choice >> (m - 1 - k)) & 1]).collect()).collect()
}

/// Builds a fooling set from expansivity or from a legal seed and validates
/// it against `f̂_z` (value 0, trace equal to `z`) before returning it.
pub fn build_wz_fooling(
    rule: &Rule,
    spec: &SubshiftSpec,
    z: &[Letter],
    mode: &WzMode,
    budget: &Budget,
) -> Result<FoolingSet> {
    let q = rule.alphabet_size();
    let oracle = TracedFunction::new(rule, z)?;
    let pairs = match mode {
        WzMode::Expansive { t_left, t_right } => build_wz(rule, spec, z, *t_left, *t_right, budget)?.gamma(q),
        WzMode::Legal { seed, zero } => {
            let n = z.len() - 1;
            if z.iter().any(|l| l != zero) {
                return Err(Error::InvalidFoolingSet(format!("legal mode needs z = {zero}^{}", n + 1)));
            }
            if !check_legal(rule, spec, *zero)? {
                return Err(Error::InvalidFoolingSet(format!("rule is not {zero}-legal on the subshift")));
            }
            let mut pairs = Vec::with_capacity(seed.len());
            for v in seed {
                if v.len() != n {
                    return Err(Error::LengthMismatch { expected: n, found: v.len() });
                }
                let u: Vec<Letter> = v.iter().rev().copied().collect();
                let mut w = u.clone();
                w.push(*zero);
                w.extend_from_slice(v);
                if !spec.allows(&w)? {
                    return Err(Error::InvalidFoolingSet(format!("{} is not in the subshift", format_letters(&w))));
                }
                if central_trace_of(rule, &w) != z {
                    return Err(Error::InvalidFoolingSet(format!(
                        "symmetric word {} does not trace {}",
                        format_letters(&w),
                        format_letters(z)
                    )));
                }
                pairs.push((row_index(&u, q), col_index(v, q)));
            }
            pairs
        }
    };
    FoolingSet::validated(pairs, 0, &oracle)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardnessReport {
    pub q: usize,
    pub n: usize,
    pub k: u64,
    pub t_left: usize,
    pub t_right: usize,
    /// `1/t_right + 1/t_left - 1`, as a fraction.
    pub m: String,
    /// Whether `m > 0`, the hypothesis of the full-shift specialization.
    pub applicable: bool,
    /// `(big - q^{n+1} k) / (right - k)`, the bound the counting argument derives.
    pub bound: String,
    /// Smallest integer count compatible with `bound`.
    pub bound_ceil: String,
    /// `(big - k) / (right - k)`, the variant without the `q^{n+1}` factor.
    pub statement_variant: String,
    /// `q^{n+1}(q^{nm} - k)/(q^n - k)` when `n·m` is an integer and the
    /// hypotheses hold; `k` plays the role of `q^{ns}`.
    pub full_shift_bound: Option<String>,
}

impl HardnessReport {
    pub fn bound_value(&self) -> BigRational {
        parse_ratio(&self.bound)
    }
}

fn parse_ratio(s: &str) -> BigRational {
    s.parse().expect("formatted by this module")
}

fn pow(q: usize, e: usize) -> BigInt {
    num_traits::pow(BigInt::from(q), e)
}

/// Lower bound on the number of `z ∈ A^{n+1}` whose multi-round complexity
/// exceeds `log₂ k`, from `big = |Σ⟦-⌊n/t_left⌋, ⌊n/t_right⌋⌋|` and
/// `right = |Σ⟦1,n⟧|`.
pub fn hardness_counts(
    big: u64,
    right: u64,
    q: usize,
    n: usize,
    k: u64,
    t_left: usize,
    t_right: usize,
) -> Result<HardnessReport> {
    if k == 0 {
        return Err(Error::DivisionByZero("k must be at least 1".into()));
    }
    if k >= right {
        return Err(Error::DivisionByZero(format!("k = {k} must be below |Σ[1..n]| = {right}")));
    }
    if t_left == 0 || t_right == 0 {
        return Err(Error::DivisionByZero("expansivity times must be positive".into()));
    }
    let r = |x: BigInt| BigRational::from_integer(x);
    let big_r = r(BigInt::from(big));
    let k_r = r(BigInt::from(k));
    let denom = r(BigInt::from(right)) - &k_r;
    let bound = (&big_r - r(pow(q, n + 1)) * &k_r) / &denom;
    let statement_variant = (&big_r - &k_r) / &denom;
    let m = BigRational::new(BigInt::one(), BigInt::from(t_right))
        + BigRational::new(BigInt::one(), BigInt::from(t_left))
        - BigRational::one();
    let applicable = m.is_positive();
    let nm = &m * r(BigInt::from(n));
    let full_shift_bound = (applicable && nm.is_integer()).then(|| {
        let nm = nm.to_integer().try_into().unwrap_or(0usize);
        let value = r(pow(q, n + 1)) * (r(pow(q, nm)) - &k_r) / (r(pow(q, n)) - &k_r);
        value.to_string()
    });
    let ceil = bound.ceil().to_integer();
    let ceil = if ceil.is_negative() { BigInt::zero() } else { ceil };
    Ok(HardnessReport {
        q,
        n,
        k,
        t_left,
        t_right,
        m: m.to_string(),
        applicable,
        bound: bound.to_string(),
        bound_ceil: ceil.to_string(),
        statement_variant: statement_variant.to_string(),
        full_shift_bound,
    })
}

/// `(|Σ⟦-⌊n/t_left⌋, ⌊n/t_right⌋⌋|, |Σ⟦1,n⟧|)`.
pub fn sigma_counts(
    spec: &SubshiftSpec,
    n: usize,
    t_left: usize,
    t_right: usize,
    budget: &Budget,
) -> Result<(u64, u64)> {
    let big = sigma_count(spec, n / t_left.max(1) + n / t_right.max(1) + 1, budget)?;
    let right = sigma_count(spec, n, budget)?;
    Ok((big, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc::{build_matrix, fooling_set, multiround_exact, FoolingMode};

    fn e(n: u8) -> Rule {
        Rule::elementary(n)
    }

    fn b() -> Budget {
        Budget::default()
    }

    #[test]
    fn sigma_examples() {
        let fam = SubshiftSpec::odd_gap(4);
        assert_eq!(fam.forbidden, vec![vec![1, 1], vec![1, 0, 0, 1]]);
        assert_eq!(sigma_count(&fam, 4, &b()).unwrap(), 7);
        for n in 1..=8 {
            assert_eq!(sigma_count(&SubshiftSpec::full(2), n, &b()).unwrap(), 1 << n);
        }
        let nothing = SubshiftSpec::new(2, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(sigma_count(&nothing, 3, &b()).unwrap(), 0);
        assert!(matches!(enumerate_sigma(&fam, 5, &b()), Err(Error::WidthExceeded { .. })));
    }

    #[test]
    fn sigma_matches_filter_oracle() {
        let fam = SubshiftSpec::odd_gap(10);
        for len in 1..=10usize {
            let expected: Vec<Vec<Letter>> = (0..1u32 << len)
                .map(|x| (0..len).map(|k| ((x >> (len - 1 - k)) & 1) as Letter).collect::<Vec<_>>())
                .filter(|w| {
                    // no two 1s at odd distance... i.e. no 1 0^{2k} 1 and no 11
                    let ones: Vec<usize> = (0..len).filter(|&k| w[k] == 1).collect();
                    ones.windows(2).all(|p| (p[1] - p[0]) % 2 == 0)
                })
                .collect();
            assert_eq!(enumerate_sigma(&fam, len, &b()).unwrap(), expected, "len {len}");
        }
    }

    #[test]
    fn text_round_trip() {
        let spec = SubshiftSpec::parse("# corollary\n@oddgap 6\n").unwrap();
        assert_eq!(spec, SubshiftSpec::odd_gap(6));
        let spec = SubshiftSpec::parse("@alphabet 3\n12\n0\n").unwrap();
        assert_eq!(spec.forbidden, vec![vec![1, 2], vec![0]]);
        let again = SubshiftSpec::parse(&spec.to_text()).unwrap();
        assert_eq!(again, spec);
        assert!(SubshiftSpec::parse("@bogus").is_err());
        assert!(SubshiftSpec::parse("2").is_err());
    }

    #[test]
    fn subautomaton_examples() {
        let fam = SubshiftSpec::odd_gap(12);
        for rule in [18u8, 26, 146, 154, 218, 90] {
            assert!(check_subautomaton(&e(rule), &fam, &b()).unwrap(), "rule {rule}");
        }
        assert!(!check_subautomaton(&e(255), &fam, &b()).unwrap());
        assert!(check_subautomaton(&e(30), &SubshiftSpec::full(2), &b()).unwrap());
    }

    #[test]
    fn legal_examples() {
        let fam = SubshiftSpec::odd_gap(8);
        assert!(check_legal(&e(18), &fam, 0).unwrap());
        assert!(check_legal(&e(90), &SubshiftSpec::full(2), 0).unwrap());
        assert!(!check_legal(&e(170), &SubshiftSpec::full(2), 0).unwrap());
    }

    #[test]
    fn symmetric_words_keep_a_zero_centre() {
        let fam = SubshiftSpec::odd_gap(13);
        for number in 0..=255u8 {
            let rule = e(number);
            for spec in [SubshiftSpec::full(2), fam.clone()] {
                // legality is a property of subautomata
                if !check_subautomaton(&rule, &spec, &b()).unwrap() || !check_legal(&rule, &spec, 0).unwrap() {
                    continue;
                }
                for n in 1..=6usize {
                    for v in enumerate_sigma(&spec, n, &b()).unwrap() {
                        let mut w: Vec<Letter> = v.iter().rev().copied().collect();
                        w.push(0);
                        w.extend_from_slice(&v);
                        if spec.allows(&w).unwrap() {
                            assert_eq!(central_trace_of(&rule, &w), vec![0; n + 1], "rule {number}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn expansivity_examples() {
        let full = SubshiftSpec::full(2);
        let c = detect_expansivity(&e(90), &full, Side::Right, 3, &b()).unwrap();
        assert_eq!(c.time(), Some(1));
        let c = detect_expansivity(&e(204), &full, Side::Right, 4, &b()).unwrap();
        match c.result {
            ExpansivityResult::Refuted { t_max, witness: (a, b) } => {
                assert_eq!(t_max, 4);
                let diff: Vec<usize> =
                    a.chars().zip(b.chars()).enumerate().filter(|(_, (x, y))| x != y).map(|(k, _)| k).collect();
                // position 1 on [-4..4] is index 5
                assert_eq!(diff, vec![5]);
            }
            other => panic!("{other:?}"),
        }
        let g = e(90).group2();
        for side in [Side::Left, Side::Right] {
            let c = detect_expansivity(&g, &SubshiftSpec::full(4), side, 4, &b()).unwrap();
            assert_eq!(c.time(), Some(2), "{side}");
        }
    }

    #[test]
    fn right_permutive_rules_have_time_one() {
        let full = SubshiftSpec::full(2);
        for number in 0..=255u8 {
            let rule = e(number);
            let perm = crate::classify::permutivity(&rule);
            let right = detect_expansivity(&rule, &full, Side::Right, 1, &b()).unwrap().time() == Some(1);
            let left = detect_expansivity(&rule, &full, Side::Left, 1, &b()).unwrap().time() == Some(1);
            assert_eq!(right, matches!(perm, crate::classify::Permutivity::Right | crate::classify::Permutivity::Bi));
            assert_eq!(left, matches!(perm, crate::classify::Permutivity::Left | crate::classify::Permutivity::Bi));
        }
    }

    #[test]
    fn legal_fooling_examples() {
        let seed = vec![vec![0, 1, 0, 0], vec![0, 0, 0, 1]];
        let z = vec![0; 5];
        let fam = SubshiftSpec::odd_gap(9);
        let s = build_wz_fooling(&e(18), &fam, &z, &WzMode::Legal { seed, zero: 0 }, &b()).unwrap();
        assert_eq!(s.size(), 2);
        assert_eq!(s.bound_bits(), 1);

        let z = vec![0; 9];
        let fam = SubshiftSpec::odd_gap(17);
        let s = build_wz_fooling(&e(146), &fam, &z, &WzMode::Legal { seed: corollary_seed(2), zero: 0 }, &b()).unwrap();
        assert_eq!(s.size(), 4);
        assert_eq!(s.bound_bits(), 2);

        // a symmetric word outside the subshift is rejected
        let bad = vec![vec![1, 1, 0, 0]];
        let err =
            build_wz_fooling(&e(18), &SubshiftSpec::odd_gap(9), &[0; 5], &WzMode::Legal { seed: bad, zero: 0 }, &b());
        assert!(matches!(err, Err(Error::InvalidFoolingSet(_))));
    }

    #[test]
    fn corollary_seed_shape() {
        let s = corollary_seed(2);
        assert_eq!(s.len(), 4);
        assert_eq!(format_letters(&s[0]), "00010001");
        assert_eq!(format_letters(&s[3]), "01000100");
    }

    #[test]
    fn bipermutive_wz_and_exact_cc() {
        for number in [90u8, 105, 150, 165] {
            let rule = e(number);
            for n in 1..=3usize {
                for index in 0..1u64 << (n + 1) {
                    let mut z = vec![0; n + 1];
                    crate::ca::digits_lsb_first(index, 2, &mut z);
                    let wz = build_wz(&rule, &SubshiftSpec::full(2), &z, 1, 1, &b()).unwrap();
                    assert_eq!(wz.len(), 1 << n);
                    let s = build_wz_fooling(
                        &rule,
                        &SubshiftSpec::full(2),
                        &z,
                        &WzMode::Expansive { t_left: 1, t_right: 1 },
                        &b(),
                    )
                    .unwrap();
                    assert_eq!(s.size(), 1 << n);
                    let m = build_matrix(&rule, &z, &b()).unwrap();
                    assert_eq!(multiround_exact(&m).unwrap(), n as u32);
                }
            }
        }
    }

    #[test]
    fn wz_members_trace_z() {
        let rule = e(30);
        let z = vec![0, 1, 1, 0];
        let wz = build_wz(&rule, &SubshiftSpec::full(2), &z, 1, 2, &b()).unwrap();
        for m in &wz.members {
            let mut w = m.x.clone();
            w.extend_from_slice(&m.word);
            w.extend_from_slice(&m.y);
            assert_eq!(central_trace_of(&rule, &w), z);
        }
    }

    #[test]
    fn hardness_examples() {
        let r = hardness_counts(128, 8, 2, 3, 1, 1, 1).unwrap();
        assert_eq!(r.bound, "16");
        assert!(r.applicable);
        assert_eq!(r.full_shift_bound.as_deref(), Some("16"));
        let r = hardness_counts(128, 8, 2, 3, 7, 1, 1).unwrap();
        assert_eq!(r.bound, "16");
        assert_eq!(r.statement_variant, "121");

        let (big, right) = sigma_counts(&SubshiftSpec::full(4), 3, 2, 2, &b()).unwrap();
        let r = hardness_counts(big, right, 4, 3, 1, 2, 2).unwrap();
        assert_eq!(r.m, "0");
        assert!(!r.applicable);
        assert!(r.full_shift_bound.is_none());

        assert!(matches!(hardness_counts(128, 8, 2, 3, 8, 1, 1), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn hardness_bound_is_met_by_exact_counts() {
        // count z with certified complexity above log2 k and compare
        let b = b();
        for number in [90u8, 150] {
            let rule = e(number);
            let n = 3;
            let (big, right) = sigma_counts(&SubshiftSpec::full(2), n, 1, 1, &b).unwrap();
            for k in 1..right {
                let report = hardness_counts(big, right, 2, n, k, 1, 1).unwrap();
                let mut hard = 0u64;
                for index in 0..1u64 << (n + 1) {
                    let mut z = vec![0; n + 1];
                    crate::ca::digits_lsb_first(index, 2, &mut z);
                    let m = build_matrix(&rule, &z, &b).unwrap();
                    let cc = multiround_exact(&m).unwrap();
                    if (1u64 << cc) > k {
                        hard += 1;
                    }
                    let fool = fooling_set(&m, FoolingMode::Exact).unwrap();
                    assert!(fool.bound_bits() <= cc);
                }
                assert!(BigRational::from_integer(hard.into()) >= report.bound_value(), "rule {number} k {k}");
            }
        }
    }
}
