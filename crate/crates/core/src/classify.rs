//! Structural predicates on local rules.
//!
//! Every predicate is decided from its semantic definition by exhausting the
//! rule table. For elementary rules the report additionally evaluates the
//! published bit-pattern families and records whether they agree with the
//! semantic test.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ca::{format_letters, Letter, Rule, Side};
use crate::error::{Error, Result};

/// A subset of the alphabet, stored as a 256-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LetterSet {
    bits: [u64; 4],
}

impl LetterSet {
    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut s = Self::default();
        for &l in letters {
            s.insert(l);
        }
        s
    }

    pub fn singleton(l: Letter) -> Self {
        Self::from_letters(&[l])
    }

    pub fn full(q: usize) -> Self {
        let letters: Vec<Letter> = (0..q).map(|l| l as Letter).collect();
        Self::from_letters(&letters)
    }

    pub fn insert(&mut self, l: Letter) {
        self.bits[(l / 64) as usize] |= 1 << (l % 64);
    }

    #[inline]
    pub fn contains(&self, l: Letter) -> bool {
        (self.bits[(l / 64) as usize] >> (l % 64)) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn complement(&self, q: usize) -> Self {
        let mut s = Self::default();
        for l in 0..q {
            if !self.contains(l as Letter) {
                s.insert(l as Letter);
            }
        }
        s
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..=255u8).filter(|&l| self.contains(l)).collect()
    }

    pub fn is_subset_of(&self, other: &LetterSet) -> bool {
        self.bits.iter().zip(other.bits.iter()).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Display for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_letters(&self.letters()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sidedness {
    None,
    Left,
    Right,
    Both,
}

impl Sidedness {
    fn from_flags(left: bool, right: bool) -> Self {
        match (left, right) {
            (true, true) => Sidedness::Both,
            (true, false) => Sidedness::Left,
            (false, true) => Sidedness::Right,
            (false, false) => Sidedness::None,
        }
    }

    pub fn left(self) -> bool {
        matches!(self, Sidedness::Left | Sidedness::Both)
    }

    pub fn right(self) -> bool {
        matches!(self, Sidedness::Right | Sidedness::Both)
    }

    pub fn any(self) -> bool {
        self != Sidedness::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnesidedMode {
    /// Membership of the middle cell decides which neighbour is ignored.
    Plain,
    /// Membership of the near cell decides it (`B⋆`).
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Permutivity {
    None,
    Left,
    Right,
    Bi,
}

impl fmt::Display for Permutivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Permutivity::None => "none",
            Permutivity::Left => "left",
            Permutivity::Right => "right",
            Permutivity::Bi => "bi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpreadingFlags {
    pub left_semi_strong: bool,
    pub left_weak: bool,
    pub right_semi_strong: bool,
    pub right_weak: bool,
}

impl SpreadingFlags {
    pub fn semi_strong(&self) -> bool {
        self.left_semi_strong || self.right_semi_strong
    }

    pub fn weak(&self) -> bool {
        self.left_weak || self.right_weak
    }
}

fn letters(q: usize) -> impl Iterator<Item = Letter> + Clone {
    (0..q).map(|l| l as Letter)
}

/// Whether the rule ignores one neighbour whenever a designated cell is in `b`.
///
/// `Left` means the rule ignores its right neighbour (depends only on the
/// left side); `Right` the converse.
pub fn onesidedness(rule: &Rule, b: &LetterSet, mode: OnesidedMode) -> Result<Sidedness> {
    if b.is_empty() {
        return Err(Error::EmptySubset);
    }
    let q = rule.alphabet_size();
    let ignores_right = |x: Letter, y: Letter| {
        let first = rule.apply(x, y, 0);
        letters(q).all(|c| rule.apply(x, y, c) == first)
    };
    let ignores_left = |y: Letter, x: Letter| {
        let first = rule.apply(0, y, x);
        letters(q).all(|a| rule.apply(a, y, x) == first)
    };
    let (left, right) = match mode {
        OnesidedMode::Plain => (
            letters(q).filter(|&m| b.contains(m)).all(|m| letters(q).all(|a| ignores_right(a, m))),
            letters(q).filter(|&m| b.contains(m)).all(|m| letters(q).all(|c| ignores_left(m, c))),
        ),
        OnesidedMode::Star => (
            letters(q).filter(|&a| b.contains(a)).all(|a| letters(q).all(|m| ignores_right(a, m))),
            letters(q).filter(|&c| b.contains(c)).all(|c| letters(q).all(|m| ignores_left(m, c))),
        ),
    };
    Ok(Sidedness::from_flags(left, right))
}

/// Semi-strong and weak spreading of `b` towards each side.
///
/// Left semi-strong: `f(A ∁B B) ⊆ B`; left weak: `f(∁B ∁B B) ⊆ B`; the
/// right variants are the mirror images.
pub fn spreading_status(rule: &Rule, b: &LetterSet) -> Result<SpreadingFlags> {
    let q = rule.alphabet_size();
    if b.is_empty() || b.len() >= q {
        return Err(Error::DegenerateSubset);
    }
    let comp = b.complement(q);
    let all = LetterSet::full(q);
    let image_in_b = |outer: &LetterSet, side: Side| {
        letters(q).filter(|&x| outer.contains(x)).all(|x| {
            letters(q).filter(|&c| comp.contains(c)).all(|c| {
                letters(q).filter(|&y| b.contains(y)).all(|y| {
                    let out = match side {
                        Side::Left => rule.apply(x, c, y),
                        Side::Right => rule.apply(y, c, x),
                    };
                    b.contains(out)
                })
            })
        })
    };
    Ok(SpreadingFlags {
        left_semi_strong: image_in_b(&all, Side::Left),
        left_weak: image_in_b(&comp, Side::Left),
        right_semi_strong: image_in_b(&all, Side::Right),
        right_weak: image_in_b(&comp, Side::Right),
    })
}

pub fn permutivity(rule: &Rule) -> Permutivity {
    let q = rule.alphabet_size();
    let bijective = |f: &dyn Fn(Letter) -> Letter| {
        let mut seen = LetterSet::default();
        letters(q).all(|x| {
            let y = f(x);
            let fresh = !seen.contains(y);
            seen.insert(y);
            fresh
        })
    };
    let mut left = true;
    let mut right = true;
    for y in letters(q) {
        for x in letters(q) {
            left &= bijective(&|a| rule.apply(a, y, x));
            right &= bijective(&|c| rule.apply(x, y, c));
        }
    }
    match (left, right) {
        (true, true) => Permutivity::Bi,
        (true, false) => Permutivity::Left,
        (false, true) => Permutivity::Right,
        (false, false) => Permutivity::None,
    }
}

/// Letters `a` with `f(aaa) = a`.
pub fn quiescent_letters(rule: &Rule) -> Vec<Letter> {
    letters(rule.alphabet_size()).filter(|&a| rule.apply(a, a, a) == a).collect()
}

/// Whether `u` is stagnating: `f(x u y) = u` for all outer letters `x, y`.
pub fn is_stagnating(rule: &Rule, u: &[Letter]) -> bool {
    let q = rule.alphabet_size();
    if u.is_empty() {
        return false;
    }
    letters(q).all(|x| {
        letters(q).all(|y| {
            let mut word = Vec::with_capacity(u.len() + 2);
            word.push(x);
            word.extend_from_slice(u);
            word.push(y);
            let mut out = Vec::new();
            rule.step_slice(&word, &mut out);
            out == u
        })
    })
}

/// Stagnating words of length 1 and 2, in lexicographic order.
pub fn stagnating_words(rule: &Rule) -> Vec<Vec<Letter>> {
    let q = rule.alphabet_size();
    let mut out: Vec<Vec<Letter>> = letters(q).map(|a| vec![a]).filter(|u| is_stagnating(rule, u)).collect();
    for a in letters(q) {
        for b in letters(q) {
            if is_stagnating(rule, &[a, b]) {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

/// `f` is mirror-symmetric and `f(a zero a) = zero` for every `a`.
pub fn legal_on_full_shift(rule: &Rule, zero: Letter) -> bool {
    rule.is_mirror_symmetric() && letters(rule.alphabet_size()).all(|a| rule.apply(a, zero, a) == zero)
}

/// Letters `a` with `f(0a0) = f(0a1) = a` (right side) or
/// `f(0a0) = f(1a0) = a` (left side); binary rules only.
pub fn first_appearance_letters(rule: &Rule, side: Side) -> Vec<Letter> {
    if !rule.is_binary() {
        return Vec::new();
    }
    (0..2u8)
        .filter(|&a| match side {
            Side::Right => rule.apply(0, a, 0) == a && rule.apply(0, a, 1) == a,
            Side::Left => rule.apply(0, a, 0) == a && rule.apply(1, a, 0) == a,
        })
        .collect()
}

/// `0` quiescent and `1` neither left nor right weakly spreading (binary).
pub fn stagnating_pair_condition(rule: &Rule) -> bool {
    rule.is_binary()
        && rule.apply(0, 0, 0) == 0
        && !spreading_status(rule, &LetterSet::singleton(1)).map(|s| s.weak()).unwrap_or(true)
}

/// Bit-pattern families over the binary digits `b7..b0` of a rule number.
pub mod patterns {
    /// 0-onesided (left family, right family).
    pub const ONESIDED_ZERO: [&str; 2] = ["a7a6a4a4a3a2a0a0", "a7a6a1a0a3a2a1a0"];
    /// `∁0` semi-strongly spreading.
    pub const SPREADING_NONZERO: [&str; 2] = ["a7a611a3a2a1a0", "a7a61a4a3a21a0"];
    /// Quiescent 0 and 1 not weakly spreading on either side.
    pub const STAGNATING_PAIR: [&str; 1] = ["a7a6a50a3a200"];
    /// 0⋆onesided.
    pub const BSTAR_ZERO: [&str; 2] = ["a7a6a5a4a2a2a0a0", "a7a2a5a0a3a2a1a0"];

    /// Whether bit `p` of `number` (`p = 7` first) fits each token: a literal
    /// `0`/`1`, or `aK` meaning "equal to bit K".
    pub fn matches(number: u8, pattern: &str) -> bool {
        let bytes = pattern.as_bytes();
        let mut pos = 8i32;
        let mut i = 0;
        while i < bytes.len() {
            pos -= 1;
            if pos < 0 {
                return false;
            }
            let bit = (number >> pos) & 1;
            match bytes[i] {
                b'a' => {
                    let k = (bytes[i + 1] - b'0') as u32;
                    if bit != (number >> k) & 1 {
                        return false;
                    }
                    i += 2;
                }
                c @ (b'0' | b'1') => {
                    if bit != c - b'0' {
                        return false;
                    }
                    i += 1;
                }
                _ => return false,
            }
        }
        pos == 0
    }

    pub fn matches_any(number: u8, family: &[&str]) -> bool {
        family.iter().any(|p| matches(number, p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCheck {
    pub semantic: bool,
    pub pattern: bool,
}

impl PatternCheck {
    pub fn agrees(&self) -> bool {
        self.semantic == self.pattern
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternAgreement {
    pub onesided_zero: PatternCheck,
    pub spreading_nonzero: PatternCheck,
    pub stagnating_pair: PatternCheck,
    pub bstar_zero: PatternCheck,
}

impl PatternAgreement {
    pub fn all_agree(&self) -> bool {
        self.onesided_zero.agrees()
            && self.spreading_nonzero.agrees()
            && self.stagnating_pair.agrees()
            && self.bstar_zero.agrees()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnesidedEntry {
    pub subset: String,
    pub plain: Sidedness,
    pub star: Sidedness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadingEntry {
    pub subset: String,
    pub flags: SpreadingFlags,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub rule: String,
    pub alphabet_size: usize,
    pub quiescent: Vec<Letter>,
    pub stagnating: Vec<String>,
    pub onesided: Vec<OnesidedEntry>,
    pub spreading: Vec<SpreadingEntry>,
    pub permutivity: Permutivity,
    /// Indexed by the candidate zero letter.
    pub legal_on_full_shift: Vec<bool>,
    pub patterns: Option<PatternAgreement>,
}

impl ClassificationReport {
    pub fn onesided_for(&self, subset: &str) -> Option<&OnesidedEntry> {
        self.onesided.iter().find(|e| e.subset == subset)
    }

    pub fn spreading_for(&self, subset: &str) -> Option<&SpreadingEntry> {
        self.spreading.iter().find(|e| e.subset == subset)
    }
}

/// Subsets examined by [`classify_rule`]: every nonempty subset for `q ≤ 4`,
/// otherwise singletons, their complements and the full alphabet.
pub fn report_subsets(q: usize) -> Vec<LetterSet> {
    if q <= 4 {
        (1u32..(1 << q))
            .map(|mask| {
                let ls: Vec<Letter> = (0..q).filter(|&l| (mask >> l) & 1 == 1).map(|l| l as Letter).collect();
                LetterSet::from_letters(&ls)
            })
            .collect()
    } else {
        let mut out: Vec<LetterSet> = letters(q).map(LetterSet::singleton).collect();
        out.extend(letters(q).map(|l| LetterSet::singleton(l).complement(q)));
        out.push(LetterSet::full(q));
        out
    }
}

pub fn classify_rule(rule: &Rule) -> ClassificationReport {
    let q = rule.alphabet_size();
    let subsets = report_subsets(q);
    let onesided = subsets
        .iter()
        .map(|b| OnesidedEntry {
            subset: b.to_string(),
            plain: onesidedness(rule, b, OnesidedMode::Plain).expect("nonempty subset"),
            star: onesidedness(rule, b, OnesidedMode::Star).expect("nonempty subset"),
        })
        .collect();
    let spreading = subsets
        .iter()
        .filter(|b| b.len() < q)
        .map(|b| SpreadingEntry { subset: b.to_string(), flags: spreading_status(rule, b).expect("proper subset") })
        .collect();
    let patterns = rule.number().ok().map(|number| {
        let zero = LetterSet::singleton(0);
        let one = LetterSet::singleton(1);
        PatternAgreement {
            onesided_zero: PatternCheck {
                semantic: onesidedness(rule, &zero, OnesidedMode::Plain).expect("nonempty").any(),
                pattern: patterns::matches_any(number, &patterns::ONESIDED_ZERO),
            },
            spreading_nonzero: PatternCheck {
                semantic: spreading_status(rule, &one).expect("proper").semi_strong(),
                pattern: patterns::matches_any(number, &patterns::SPREADING_NONZERO),
            },
            stagnating_pair: PatternCheck {
                semantic: stagnating_pair_condition(rule),
                pattern: patterns::matches_any(number, &patterns::STAGNATING_PAIR),
            },
            bstar_zero: PatternCheck {
                semantic: onesidedness(rule, &zero, OnesidedMode::Star).expect("nonempty").any(),
                pattern: patterns::matches_any(number, &patterns::BSTAR_ZERO),
            },
        }
    });
    ClassificationReport {
        rule: rule.label(),
        alphabet_size: q,
        quiescent: quiescent_letters(rule),
        stagnating: stagnating_words(rule).iter().map(|u| format_letters(u)).collect(),
        onesided,
        spreading,
        permutivity: permutivity(rule),
        legal_on_full_shift: letters(q).map(|z| legal_on_full_shift(rule, z)).collect(),
        patterns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: u8) -> Rule {
        Rule::elementary(n)
    }

    fn zero() -> LetterSet {
        LetterSet::singleton(0)
    }

    #[test]
    fn onesidedness_examples() {
        assert_eq!(onesidedness(&e(143), &zero(), OnesidedMode::Plain).unwrap(), Sidedness::Left);
        assert_eq!(onesidedness(&e(170), &LetterSet::full(2), OnesidedMode::Plain).unwrap(), Sidedness::Right);
        assert_eq!(onesidedness(&e(159), &zero(), OnesidedMode::Star).unwrap(), Sidedness::Left);
        assert!(matches!(onesidedness(&e(0), &LetterSet::default(), OnesidedMode::Plain), Err(Error::EmptySubset)));
    }

    #[test]
    fn spreading_examples() {
        let one = LetterSet::singleton(1);
        let s = spreading_status(&e(182), &one).unwrap();
        assert!(s.left_semi_strong && s.right_semi_strong);
        let s = spreading_status(&e(232), &one).unwrap();
        assert!(!s.left_weak && !s.right_weak);
        assert_eq!(spreading_status(&e(0), &one).unwrap(), SpreadingFlags::default());
        assert!(matches!(spreading_status(&e(0), &LetterSet::full(2)), Err(Error::DegenerateSubset)));
        for n in 0..=255 {
            let s = spreading_status(&e(n), &one).unwrap();
            assert!(!s.left_semi_strong || s.left_weak);
            assert!(!s.right_semi_strong || s.right_weak);
        }
    }

    #[test]
    fn permutivity_examples() {
        assert_eq!(permutivity(&e(90)), Permutivity::Bi);
        assert_eq!(permutivity(&e(170)), Permutivity::Right);
        assert_eq!(permutivity(&e(240)), Permutivity::Left);
        assert_eq!(permutivity(&e(204)), Permutivity::None);
        let bi: Vec<u8> = (0..=255).filter(|&n| permutivity(&e(n)) == Permutivity::Bi).collect();
        assert_eq!(bi, vec![90, 105, 150, 165]);
    }

    #[test]
    fn family_counts() {
        let count = |pred: &dyn Fn(&Rule) -> bool| (0..=255u8).filter(|&n| pred(&e(n))).count();
        let left = count(&|r| onesidedness(r, &zero(), OnesidedMode::Plain).unwrap().left());
        let right = count(&|r| onesidedness(r, &zero(), OnesidedMode::Plain).unwrap().right());
        let either = count(&|r| onesidedness(r, &zero(), OnesidedMode::Plain).unwrap().any());
        // 64 per side, 32 on both sides
        assert_eq!((left, right, either), (64, 64, 96));
        let spreading = count(&|r| spreading_status(r, &LetterSet::singleton(1)).unwrap().semi_strong());
        assert_eq!(spreading, 96);
        assert_eq!(count(&stagnating_pair_condition), 32);
    }

    #[test]
    fn patterns_agree_with_semantics() {
        for n in 0..=255u8 {
            let report = classify_rule(&e(n));
            let p = report.patterns.unwrap();
            assert!(p.all_agree(), "rule {n}: {p:?}");
        }
    }

    #[test]
    fn pattern_matcher() {
        assert!(patterns::matches(0b1111_1111, "a7a611a3a2a1a0"));
        assert!(!patterns::matches(0b1100_1111, "a7a611a3a2a1a0"));
        assert!(patterns::matches(0b0011_0011, "a7a6a4a4a3a2a0a0"));
        assert!(!patterns::matches(0, "a7a6"));
    }

    #[test]
    fn stagnating_examples() {
        assert_eq!(stagnating_words(&e(222))[0], vec![1]);
        assert!(is_stagnating(&e(232), &[0, 0]));
        assert!(!is_stagnating(&e(232), &[0]));
        let report = classify_rule(&e(204));
        assert_eq!(report.stagnating, vec!["0", "1", "00", "01", "10", "11"]);
        for n in 0..=255u8 {
            let r = e(n);
            if is_stagnating(&r, &[0]) {
                let s = onesidedness(&r, &zero(), OnesidedMode::Plain).unwrap();
                assert_eq!(s, Sidedness::Both, "rule {n}");
            }
        }
    }

    #[test]
    fn onesided_monotone_in_subset() {
        let q = 4;
        let rule = e(110).group2();
        let subsets = report_subsets(q);
        for b in &subsets {
            let s = onesidedness(&rule, b, OnesidedMode::Plain).unwrap();
            for b2 in subsets.iter().filter(|b2| b2.is_subset_of(b)) {
                let s2 = onesidedness(&rule, b2, OnesidedMode::Plain).unwrap();
                assert!(!s.left() || s2.left());
                assert!(!s.right() || s2.right());
            }
        }
    }

    #[test]
    fn legal_examples() {
        assert!(legal_on_full_shift(&e(90), 0));
        assert!(!legal_on_full_shift(&e(170), 0));
        assert_eq!(classify_rule(&e(90)).legal_on_full_shift, vec![true, false]);
        // a ⊕ b ⊕ c fixes the middle letter of a·b·a for both choices of zero
        assert_eq!(classify_rule(&e(150)).legal_on_full_shift, vec![true, true]);
    }

    #[test]
    fn report_json_round_trip() {
        let report = classify_rule(&e(110).group2());
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: ClassificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), json);
        assert!(report.patterns.is_none());
    }
}
