//! Half-triangle columns, τ sets and trace-language counting.
//!
//! Given Bob's word `v` on `[1..n]` and the assumption that the central
//! column follows `z`, Bob can evolve his half-triangle on his own: at time
//! `t` the cells `1..n-t` are alive and cell 1 reads `z_t` as its left
//! neighbour. The column that cell 1 traces is `T_{f→z}(v)`. Alice's
//! `T_{f←z}(u)` is the mirror construction.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::ca::{digits_lsb_first, Letter, Rule, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnWord {
    pub side: Side,
    /// Letter of the cell adjacent to the centre at times `0..n`.
    pub values: Vec<Letter>,
}

/// Column of cell 1 with left boundary `z_t`, on raw letters `v_1..v_n`.
pub(crate) fn right_column_raw(rule: &Rule, z: &[Letter], v: &[Letter], out: &mut Vec<Letter>) {
    let n = v.len();
    out.clear();
    let mut cells = v.to_vec();
    let mut next = Vec::with_capacity(n);
    for t in 0..n {
        out.push(cells[0]);
        if t + 1 < n {
            next.clear();
            next.push(rule.apply(z[t], cells[0], cells[1]));
            next.extend(cells.windows(3).map(|w| rule.apply(w[0], w[1], w[2])));
            std::mem::swap(&mut cells, &mut next);
        }
    }
}

/// Computes `T_{f→z}(v)` (side `Right`, `half = v_1..v_n`) or
/// `T_{f←z}(u)` (side `Left`, `half = u_{-n}..u_{-1}` in position order).
pub fn forward_column(rule: &Rule, z: &[Letter], half: &[Letter], side: Side) -> Result<ColumnWord> {
    let n = half.len();
    if n == 0 || z.len() != n + 1 {
        return Err(Error::LengthMismatch { expected: z.len().saturating_sub(1).max(1), found: n });
    }
    rule.check_letters(z)?;
    rule.check_letters(half)?;
    let mut values = Vec::with_capacity(n);
    match side {
        Side::Right => right_column_raw(rule, z, half, &mut values),
        Side::Left => {
            let mirrored: Vec<Letter> = half.iter().rev().copied().collect();
            right_column_raw(&rule.mirrored(), z, &mirrored, &mut values);
        }
    }
    Ok(ColumnWord { side, values })
}

/// `T_{f→z}(A^{[1..n]})` (or its left counterpart) as a sorted set.
pub fn forward_image(rule: &Rule, z: &[Letter], side: Side, budget: &Budget) -> Result<BTreeSet<Vec<Letter>>> {
    let n = z.len().checked_sub(1).filter(|&n| n >= 1).ok_or(Error::LengthMismatch { expected: 2, found: z.len() })?;
    rule.check_letters(z)?;
    let q = rule.alphabet_size();
    let total = budget.check_pow("forward column enumeration", q, n)?;
    let oriented = match side {
        Side::Right => rule.clone(),
        Side::Left => rule.mirrored(),
    };
    // For the left side enumerate mirrored words directly; the image is the same set.
    let set = (0..total)
        .into_par_iter()
        .fold(
            || (BTreeSet::new(), vec![0; n], Vec::with_capacity(n)),
            |(mut set, mut half, mut out), index| {
                digits_lsb_first(index, q, &mut half);
                right_column_raw(&oriented, z, &half, &mut out);
                set.insert(out.clone());
                (set, half, out)
            },
        )
        .map(|(set, _, _)| set)
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    Ok(set)
}

pub fn forward_image_size(rule: &Rule, z: &[Letter], side: Side, budget: &Budget) -> Result<usize> {
    forward_image(rule, z, side, budget).map(|s| s.len())
}

/// `τ_{f→z}`: columns adjacent to the centre over full triangles whose
/// central trace is exactly `z` (column `-1` for the left side).
pub fn tau_set(rule: &Rule, z: &[Letter], side: Side, budget: &Budget) -> Result<BTreeSet<Vec<Letter>>> {
    let n = z.len().checked_sub(1).filter(|&n| n >= 1).ok_or(Error::LengthMismatch { expected: 2, found: z.len() })?;
    rule.check_letters(z)?;
    let q = rule.alphabet_size();
    let total = budget.check_pow("tau enumeration", q, 2 * n + 1)?;
    let len = 2 * n + 1;
    let set = (0..total)
        .into_par_iter()
        .fold(
            || (BTreeSet::new(), vec![0; len], Vec::with_capacity(len), Vec::with_capacity(n)),
            |(mut set, mut cur, mut next, mut column), index| {
                digits_lsb_first(index, q, &mut cur);
                column.clear();
                let mut ok = true;
                for t in 0..=n {
                    // cur lives on [t-n..n-t]; the centre is at index n-t
                    let c = n - t;
                    if cur[c] != z[t] {
                        ok = false;
                        break;
                    }
                    if t < n {
                        column.push(match side {
                            Side::Right => cur[c + 1],
                            Side::Left => cur[c - 1],
                        });
                        rule.step_slice(&cur, &mut next);
                        std::mem::swap(&mut cur, &mut next);
                    }
                }
                if ok {
                    set.insert(column.clone());
                }
                cur.resize(len, 0);
                (set, cur, next, column)
            },
        )
        .map(|(set, ..)| set)
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    Ok(set)
}

/// `|T_f^{[0..k)}(A^{[-n..n]})|`: distinct width-`k` traces, times `0..=n-(k-1)`.
pub fn trace_language_count(rule: &Rule, width: usize, n: usize, budget: &Budget) -> Result<u64> {
    if width == 0 || width > n + 1 {
        return Err(Error::IntervalOutOfRange { i: 0, j: width as i64 - 1, lo: -(n as i64), hi: n as i64 });
    }
    let q = rule.alphabet_size();
    let len = 2 * n + 1;
    let total = budget.check_pow("trace language enumeration", q, len)?;
    let horizon = n + 1 - width;
    let set = (0..total)
        .into_par_iter()
        .fold(
            || (HashSet::new(), vec![0; len], Vec::with_capacity(len)),
            |(mut set, mut cur, mut next), index| {
                digits_lsb_first(index, q, &mut cur);
                let mut key = Vec::with_capacity((horizon + 1) * width);
                for t in 0..=horizon {
                    // position 0 sits at index n-t
                    key.extend_from_slice(&cur[n - t..n - t + width]);
                    if t < horizon {
                        rule.step_slice(&cur, &mut next);
                        std::mem::swap(&mut cur, &mut next);
                    }
                }
                set.insert(key);
                cur.resize(len, 0);
                (set, cur, next)
            },
        )
        .map(|(set, ..)| set)
        .reduce(HashSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    Ok(set.len() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub n: usize,
    pub count: u64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub rule: String,
    pub width: usize,
    pub points: Vec<EntropyPoint>,
    /// Counts constant over the upper half of the sampled range. A finite-scale
    /// hint only, not a verdict on equicontinuity.
    pub equicontinuity_like: bool,
}

impl EntropyEstimate {
    /// CSV rows `rule,k,n,count,slope`.
    pub fn csv_rows(&self) -> Vec<String> {
        self.points.iter().map(|p| format!("{},{},{},{},{:.6}", self.rule, self.width, p.n, p.count, p.slope)).collect()
    }
}

/// Finite-`n` samples of `log₂|T_f^{[0..k)}(A^{[-n..n]})| / n` for `n = k..=n_max`.
pub fn entropy_estimate(rule: &Rule, width: usize, n_max: usize, budget: &Budget) -> Result<EntropyEstimate> {
    if width == 0 || n_max < width {
        return Err(Error::IntervalOutOfRange { i: width as i64, j: n_max as i64, lo: 1, hi: n_max as i64 });
    }
    let points = (width..=n_max)
        .map(|n| {
            let count = trace_language_count(rule, width, n, budget)?;
            Ok(EntropyPoint { n, count, slope: (count as f64).log2() / n as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    let upper = &points[points.len() / 2..];
    let equicontinuity_like = upper.windows(2).all(|w| w[0].count == w[1].count);
    Ok(EntropyEstimate { rule: rule.label(), width, points, equicontinuity_like })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::{build_triangle, format_letters, parse_letters, Word};

    fn e(n: u8) -> Rule {
        Rule::elementary(n)
    }

    fn zeros(len: usize) -> Vec<Letter> {
        vec![0; len]
    }

    fn col(rule: u8, z: &str, v: &str, side: Side) -> String {
        let c = forward_column(&e(rule), &parse_letters(z).unwrap(), &parse_letters(v).unwrap(), side).unwrap();
        format_letters(&c.values)
    }

    #[test]
    fn forward_column_examples() {
        assert_eq!(col(204, "00000", "1011", Side::Right), "1111");
        assert_eq!(col(170, "00000", "1011", Side::Right), "1011");
        assert_eq!(col(0, "01101", "1011", Side::Right), "1000");
        // rule 240 copies the left neighbour: Alice's column streams u towards the centre
        assert_eq!(col(240, "00000", "1101", Side::Left), "1011");
        assert!(forward_column(&e(0), &zeros(4), &zeros(4), Side::Right).is_err());
    }

    #[test]
    fn forward_image_examples() {
        let b = Budget::default();
        for n in 1..=10 {
            assert_eq!(forward_image_size(&e(159), &zeros(n + 1), Side::Right, &b).unwrap(), 2);
            assert!(forward_image_size(&e(12), &zeros(n + 1), Side::Right, &b).unwrap() <= n + 1);
            assert_eq!(forward_image_size(&e(170), &zeros(n + 1), Side::Right, &b).unwrap(), 1 << n);
        }
    }

    #[test]
    fn tau_examples() {
        let b = Budget::default();
        let tau = tau_set(&e(204), &zeros(5), Side::Right, &b).unwrap();
        assert_eq!(tau.into_iter().collect::<Vec<_>>(), vec![zeros(4), vec![1; 4]]);
        let z = parse_letters("0100").unwrap();
        assert!(tau_set(&e(0), &z, Side::Right, &b).unwrap().is_empty());
        let tau = tau_set(&e(0), &zeros(4), Side::Right, &b).unwrap();
        assert_eq!(tau.into_iter().collect::<Vec<_>>(), vec![zeros(3), vec![1, 0, 0]]);
    }

    #[test]
    fn forward_columns_are_sound_on_valid_triangles() {
        // whenever T_f(w) = z, the half-triangle recursion reproduces column ±1
        let b = Budget::default();
        for number in [18u8, 30, 54, 90, 110, 146, 184, 232] {
            let rule = e(number);
            for n in 1..=6usize {
                let len = 2 * n + 1;
                for index in 0..(1u64 << len) {
                    let mut letters = vec![0; len];
                    digits_lsb_first(index, 2, &mut letters);
                    let tri = build_triangle(&rule, &Word::centered(letters.clone()).unwrap()).unwrap();
                    let z = tri.central_trace();
                    let right: Vec<Letter> = (0..n).map(|t| tri.row(t).at(1).unwrap()).collect();
                    let left: Vec<Letter> = (0..n).map(|t| tri.row(t).at(-1).unwrap()).collect();
                    let fr = forward_column(&rule, &z, &letters[n + 1..], Side::Right).unwrap();
                    let fl = forward_column(&rule, &z, &letters[..n], Side::Left).unwrap();
                    assert_eq!(fr.values, right);
                    assert_eq!(fl.values, left);
                }
                // τ ⊆ image
                let z = zeros(n + 1);
                for side in [Side::Left, Side::Right] {
                    let img = forward_image(&rule, &z, side, &b).unwrap();
                    let tau = tau_set(&rule, &z, side, &b).unwrap();
                    assert!(tau.is_subset(&img), "rule {number} n {n} {side}");
                }
            }
        }
    }

    #[test]
    fn trace_language_examples() {
        let b = Budget::default();
        for n in 1..=6 {
            assert_eq!(trace_language_count(&e(170), 1, n, &b).unwrap(), 1 << (n + 1));
            assert_eq!(trace_language_count(&e(0), 1, n, &b).unwrap(), 2);
            assert_eq!(trace_language_count(&e(90), 1, n, &b).unwrap(), 1 << (n + 1));
        }
    }

    #[test]
    fn trace_language_monotone() {
        let b = Budget::default();
        for number in [30u8, 54, 110, 184] {
            let rule = e(number);
            for k in 1..=3 {
                let mut prev = 0;
                for n in k..=6 {
                    let c = trace_language_count(&rule, k, n, &b).unwrap();
                    assert!(c >= prev);
                    if k > 1 {
                        // same horizon, and the narrower window is a projection
                        assert!(c >= trace_language_count(&rule, k - 1, n - 1, &b).unwrap());
                    }
                    prev = c;
                }
            }
        }
    }

    #[test]
    fn entropy_examples() {
        let b = Budget::default();
        let est = entropy_estimate(&e(0), 1, 8, &b).unwrap();
        assert!(est.points.iter().all(|p| p.count == 2));
        assert!(est.equicontinuity_like);
        let est = entropy_estimate(&e(204), 1, 8, &b).unwrap();
        assert!(est.points.iter().all(|p| p.count == 2));
        assert!(est.equicontinuity_like);
        let est = entropy_estimate(&e(170), 1, 8, &b).unwrap();
        for p in &est.points {
            assert!((p.slope - (p.n as f64 + 1.0) / p.n as f64).abs() < 1e-12);
        }
        assert!(!est.equicontinuity_like);
        assert_eq!(est.csv_rows()[0], "170,1,1,4,2.000000");
    }

    #[test]
    fn budget_is_enforced() {
        let small = Budget::new(100);
        assert!(matches!(tau_set(&e(90), &zeros(5), Side::Right, &small), Err(Error::BudgetExceeded { .. })));
    }
}
