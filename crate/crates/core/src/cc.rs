//! Matrices of the traced function and their communication complexity.
//!
//! Index convention: row `i = Σ_k u_{-1-k} q^k` and column
//! `j = Σ_k v_{1+k} q^k`, so the cell adjacent to the centre is the least
//! significant digit on both sides.

use std::collections::HashMap;
use std::io::{Read, Write};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::ca::packed::{self, PackedRule};
use crate::ca::{central_trace_of, format_letters, Letter, Rule, Side};
use crate::ceil_log2;
use crate::error::{Error, Result};
use crate::trace;

/// Largest reduced side (distinct rows or columns) for exact multi-round search.
pub const MULTIROUND_MAX_SIDE: usize = 8;
/// Largest reduced side for the exact fooling-set search.
pub const FOOLING_EXACT_MAX_SIDE: usize = 16;

/// Alice's word `u_{-n}..u_{-1}` (position order) for a row index.
pub fn row_letters(index: usize, q: usize, n: usize) -> Vec<Letter> {
    let mut u = vec![0; n];
    let mut x = index;
    for k in 0..n {
        u[n - 1 - k] = (x % q) as Letter;
        x /= q;
    }
    u
}

/// Bob's word `v_1..v_n` for a column index.
pub fn col_letters(index: usize, q: usize, n: usize) -> Vec<Letter> {
    let mut v = vec![0; n];
    let mut x = index;
    for slot in v.iter_mut() {
        *slot = (x % q) as Letter;
        x /= q;
    }
    v
}

pub fn row_index(u: &[Letter], q: usize) -> usize {
    u.iter().fold(0, |acc, &l| acc * q + l as usize)
}

pub fn col_index(v: &[Letter], q: usize) -> usize {
    v.iter().rev().fold(0, |acc, &l| acc * q + l as usize)
}

/// Anything that can evaluate `f̂_z` on (row, column) indices.
pub trait HatOracle: Sync {
    fn alphabet_size(&self) -> usize;
    fn half_width(&self) -> usize;
    fn hat(&self, row: usize, col: usize) -> u8;
}

/// Direct evaluation of `f̂_z` from fresh triangles, without a matrix.
#[derive(Debug, Clone)]
pub struct TracedFunction {
    rule: Rule,
    z: Vec<Letter>,
    packed: Option<PackedRule>,
}

impl TracedFunction {
    pub fn new(rule: &Rule, z: &[Letter]) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::LengthMismatch { expected: 2, found: z.len() });
        }
        rule.check_letters(z)?;
        let n = z.len() - 1;
        let packed = match rule.number() {
            Ok(number) if n <= packed::MAX_HALF_WIDTH => Some(PackedRule::new(number)),
            _ => None,
        };
        Ok(Self { rule: rule.clone(), z: z.to_vec(), packed })
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn z(&self) -> &[Letter] {
        &self.z
    }

    /// `f̂_z(u, v)` for explicit words.
    pub fn eval(&self, u: &[Letter], v: &[Letter]) -> u8 {
        let mut w = Vec::with_capacity(u.len() + v.len() + 1);
        w.extend_from_slice(u);
        w.push(self.z[0]);
        w.extend_from_slice(v);
        (central_trace_of(&self.rule, &w) != self.z) as u8
    }

    /// `(f̂_z, top letter)` for a cell.
    fn cell(&self, row: usize, col: usize) -> (u8, u8) {
        let n = self.z.len() - 1;
        let q = self.rule.alphabet_size();
        if let Some(pr) = &self.packed {
            let left = (row as u64).reverse_bits() >> (64 - n);
            let mut word = left | ((self.z[0] as u64) << n) | ((col as u64) << (n + 1));
            let mut hat = 0u8;
            for t in 0..n {
                if ((word >> n) & 1) as Letter != self.z[t] {
                    hat = 1;
                }
                word = pr.step(word);
            }
            let top = ((word >> n) & 1) as u8;
            if top != self.z[n] {
                hat = 1;
            }
            (hat, top)
        } else {
            let u = row_letters(row, q, n);
            let v = col_letters(col, q, n);
            let mut w = u;
            w.push(self.z[0]);
            w.extend_from_slice(&v);
            let tr = central_trace_of(&self.rule, &w);
            ((tr != self.z) as u8, tr[n])
        }
    }
}

impl HatOracle for TracedFunction {
    fn alphabet_size(&self) -> usize {
        self.rule.alphabet_size()
    }

    fn half_width(&self) -> usize {
        self.z.len() - 1
    }

    fn hat(&self, row: usize, col: usize) -> u8 {
        self.cell(row, col).0
    }
}

/// The `q^n × q^n` matrix of `f̂_z` with the top-cell overlay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcMatrix {
    rule: String,
    q: usize,
    z: Vec<Letter>,
    dim: usize,
    hat: Vec<u8>,
    top: Vec<u8>,
}

pub fn build_matrix(rule: &Rule, z: &[Letter], budget: &Budget) -> Result<CcMatrix> {
    let f = TracedFunction::new(rule, z)?;
    let n = z.len() - 1;
    let q = rule.alphabet_size();
    budget.check_pow("matrix cells", q, 2 * n)?;
    let dim = q.pow(n as u32);
    let mut hat = vec![0u8; dim * dim];
    let mut top = vec![0u8; dim * dim];
    hat.par_chunks_mut(dim).zip(top.par_chunks_mut(dim)).enumerate().for_each(|(i, (hrow, trow))| {
        for j in 0..dim {
            let (h, t) = f.cell(i, j);
            hrow[j] = h;
            trow[j] = t;
        }
    });
    Ok(CcMatrix { rule: rule.label(), q, z: z.to_vec(), dim, hat, top })
}

impl CcMatrix {
    pub fn rule_label(&self) -> &str {
        &self.rule
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    pub fn z(&self) -> &[Letter] {
        &self.z
    }

    /// Side length `q^n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn hat(&self, row: usize, col: usize) -> u8 {
        self.hat[row * self.dim + col]
    }

    #[inline]
    pub fn top(&self, row: usize, col: usize) -> u8 {
        self.top[row * self.dim + col]
    }

    pub fn hat_row(&self, row: usize) -> &[u8] {
        &self.hat[row * self.dim..(row + 1) * self.dim]
    }

    pub fn hat_cells(&self) -> &[u8] {
        &self.hat
    }

    pub fn top_cells(&self) -> &[u8] {
        &self.top
    }

    pub fn is_constant(&self) -> bool {
        self.hat.iter().all(|&h| h == self.hat[0])
    }

    /// Row classes in first-seen order: `(class of each row, representative rows)`.
    pub fn row_classes(&self) -> (Vec<usize>, Vec<usize>) {
        classes((0..self.dim).map(|i| self.hat_row(i).to_vec()))
    }

    pub fn col_classes(&self) -> (Vec<usize>, Vec<usize>) {
        classes((0..self.dim).map(|j| (0..self.dim).map(|i| self.hat(i, j)).collect::<Vec<u8>>()))
    }

    pub fn distinct_rows(&self) -> usize {
        self.row_classes().1.len()
    }

    pub fn distinct_cols(&self) -> usize {
        self.col_classes().1.len()
    }

    /// The matrix with duplicate rows and columns removed.
    pub fn reduced(&self) -> ReducedMatrix {
        let (_, rows) = self.row_classes();
        let (_, cols) = self.col_classes();
        let cells = rows.iter().map(|&i| cols.iter().map(|&j| self.hat(i, j)).collect()).collect();
        ReducedMatrix { rows, cols, cells }
    }

    /// Binary dump: `TCCM`, `q`, `n`, the letters of `z`, then row-major
    /// `(hat, top)` byte pairs.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"TCCM")?;
        w.write_all(&[self.q as u8, self.n() as u8])?;
        w.write_all(&self.z)?;
        let mut buf = Vec::with_capacity(2 * self.hat.len());
        for (h, t) in self.hat.iter().zip(self.top.iter()) {
            buf.push(*h);
            buf.push(*t);
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<CcMatrix> {
        let mut head = [0u8; 6];
        r.read_exact(&mut head)?;
        if &head[..4] != b"TCCM" {
            return Err(Error::Parse("missing TCCM magic".into()));
        }
        let q = head[4] as usize;
        let n = head[5] as usize;
        if q < 2 || n < 1 {
            return Err(Error::Parse(format!("bad header q={q} n={n}")));
        }
        let mut z = vec![0u8; n + 1];
        r.read_exact(&mut z)?;
        let dim = q.pow(n as u32);
        let mut buf = vec![0u8; 2 * dim * dim];
        r.read_exact(&mut buf)?;
        let hat = buf.iter().step_by(2).copied().collect();
        let top = buf.iter().skip(1).step_by(2).copied().collect();
        Ok(CcMatrix { rule: "dump".into(), q, z, dim, hat, top })
    }
}

impl HatOracle for CcMatrix {
    fn alphabet_size(&self) -> usize {
        self.q
    }

    fn half_width(&self) -> usize {
        self.n()
    }

    fn hat(&self, row: usize, col: usize) -> u8 {
        CcMatrix::hat(self, row, col)
    }
}

fn classes<I: Iterator<Item = Vec<u8>>>(lines: I) -> (Vec<usize>, Vec<usize>) {
    let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut class_of = Vec::new();
    let mut reps = Vec::new();
    for (index, line) in lines.enumerate() {
        let next = reps.len();
        let class = *seen.entry(line).or_insert(next);
        if class == next {
            reps.push(index);
        }
        class_of.push(class);
    }
    (class_of, reps)
}

/// Distinct rows × distinct columns, with representative indices.
#[derive(Debug, Clone)]
pub struct ReducedMatrix {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub cells: Vec<Vec<u8>>,
}

/// `⌈log₂⌉` of the number of distinct rows (left) or columns (right).
pub fn one_round_cc(m: &CcMatrix, side: Side) -> u32 {
    let distinct = match side {
        Side::Left => m.distinct_rows(),
        Side::Right => m.distinct_cols(),
    };
    ceil_log2(distinct as u64)
}

/// Minimal depth of a deterministic protocol tree; each node is one bit
/// splitting one player's set. A leaf is a rectangle on which the player who
/// receives the last message knows the answer (every row, or every column, is
/// constant), so the answer itself is not charged, as in one-round counting.
pub fn multiround_exact(m: &CcMatrix) -> Result<u32> {
    let red = m.reduced();
    multiround_on_cells(&red.cells)
}

pub(crate) fn multiround_on_cells(cells: &[Vec<u8>]) -> Result<u32> {
    let r = cells.len();
    let c = cells.first().map_or(0, Vec::len);
    if r > MULTIROUND_MAX_SIDE || c > MULTIROUND_MAX_SIDE {
        return Err(Error::BudgetExceeded {
            what: "exact multi-round search (distinct rows/columns)",
            needed: r.max(c) as u128,
            budget: MULTIROUND_MAX_SIDE as u64,
        });
    }
    // ones[i]: columns where row i holds 1
    let ones: Vec<u8> =
        cells.iter().map(|row| row.iter().enumerate().fold(0u8, |acc, (j, &h)| acc | ((h & 1) << j))).collect();
    let mut memo = vec![u8::MAX; 1 << 16];
    let all_rows = ((1u16 << r) - 1) as u8;
    let all_cols = ((1u16 << c) - 1) as u8;
    Ok(protocol_depth(&ones, all_rows, all_cols, &mut memo) as u32)
}

fn decided(ones: &[u8], rows: u8, cols: u8) -> bool {
    let mut rows_constant = true;
    let mut rows_equal = true;
    let first = ones[rows.trailing_zeros() as usize] & cols;
    let mut rs = rows;
    while rs != 0 {
        let i = rs.trailing_zeros() as usize;
        rs &= rs - 1;
        let hit = ones[i] & cols;
        rows_constant &= hit == 0 || hit == cols;
        rows_equal &= hit == first;
        if !rows_constant && !rows_equal {
            return false;
        }
    }
    true
}

fn protocol_depth(ones: &[u8], rows: u8, cols: u8, memo: &mut [u8]) -> u8 {
    let key = ((rows as usize) << 8) | cols as usize;
    if memo[key] != u8::MAX {
        return memo[key];
    }
    let result = if decided(ones, rows, cols) {
        0
    } else {
        let mut best = u8::MAX;
        for (set, is_rows) in [(rows, true), (cols, false)] {
            if set.count_ones() < 2 {
                continue;
            }
            let low = set & set.wrapping_neg();
            let rest = set & !low;
            // parts containing the lowest element, excluding the whole set
            let mut sub = rest;
            loop {
                let part = sub | low;
                if part != set {
                    let other = set & !part;
                    let (a, b) = if is_rows {
                        (protocol_depth(ones, part, cols, memo), protocol_depth(ones, other, cols, memo))
                    } else {
                        (protocol_depth(ones, rows, part, memo), protocol_depth(ones, rows, other, memo))
                    };
                    best = best.min(1 + a.max(b));
                    if best == 1 {
                        break;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            if best == 1 {
                break;
            }
        }
        best
    };
    memo[key] = result;
    result
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoolingMode {
    Greedy,
    Exact,
}

/// Input pairs sharing one value of `f̂_z` whose cross combinations break it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoolingSet {
    pub q: usize,
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub common_value: u8,
}

impl FoolingSet {
    /// Checks both fooling conditions against `oracle` and returns the set.
    pub fn validated(pairs: Vec<(usize, usize)>, common_value: u8, oracle: &dyn HatOracle) -> Result<FoolingSet> {
        let set = FoolingSet { q: oracle.alphabet_size(), n: oracle.half_width(), pairs, common_value };
        set.validate(oracle)?;
        Ok(set)
    }

    pub fn validate(&self, oracle: &dyn HatOracle) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::InvalidFoolingSet("empty set".into()));
        }
        let c = self.common_value;
        for &(x, y) in &self.pairs {
            if oracle.hat(x, y) != c {
                return Err(Error::InvalidFoolingSet(format!(
                    "pair ({}, {}) has value {}, expected {c}",
                    self.describe_row(x),
                    self.describe_col(y),
                    oracle.hat(x, y)
                )));
            }
        }
        for (a, &(x, y)) in self.pairs.iter().enumerate() {
            for &(x2, y2) in &self.pairs[a + 1..] {
                if (x, y) == (x2, y2) {
                    return Err(Error::InvalidFoolingSet(format!(
                        "duplicate pair ({}, {})",
                        self.describe_row(x),
                        self.describe_col(y)
                    )));
                }
                if oracle.hat(x2, y) == c && oracle.hat(x, y2) == c {
                    return Err(Error::InvalidFoolingSet(format!(
                        "pairs ({}, {}) and ({}, {}) do not fool each other",
                        self.describe_row(x),
                        self.describe_col(y),
                        self.describe_row(x2),
                        self.describe_col(y2)
                    )));
                }
            }
        }
        Ok(())
    }

    fn describe_row(&self, x: usize) -> String {
        format_letters(&row_letters(x, self.q, self.n))
    }

    fn describe_col(&self, y: usize) -> String {
        format_letters(&col_letters(y, self.q, self.n))
    }

    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    /// `⌈log₂ |S|⌉`, a lower bound on the multi-round complexity.
    pub fn bound_bits(&self) -> u32 {
        ceil_log2(self.pairs.len() as u64)
    }
}

fn compatible(m: &CcMatrix, c: u8, (x, y): (usize, usize), (x2, y2): (usize, usize)) -> bool {
    x != x2 && y != y2 && (m.hat(x2, y) != c || m.hat(x, y2) != c)
}

fn greedy_for_value(m: &CcMatrix, c: u8) -> Vec<(usize, usize)> {
    let mut kept: Vec<(usize, usize)> = Vec::new();
    let mut used_cols = vec![false; m.dim()];
    for x in 0..m.dim() {
        for y in 0..m.dim() {
            if used_cols[y] || m.hat(x, y) != c {
                continue;
            }
            if kept.iter().all(|&p| compatible(m, c, p, (x, y))) {
                kept.push((x, y));
                used_cols[y] = true;
                // a second pair in the same row can never be compatible
                break;
            }
        }
    }
    kept
}

/// Finds and validates a fooling set. Greedy scans cells row-major for each
/// value and keeps the larger result; exact runs a maximum-clique search on
/// the deduplicated matrix.
pub fn fooling_set(m: &CcMatrix, mode: FoolingMode) -> Result<FoolingSet> {
    let (pairs, value) = match mode {
        FoolingMode::Greedy => {
            let zero = greedy_for_value(m, 0);
            let one = greedy_for_value(m, 1);
            if one.len() > zero.len() {
                (one, 1)
            } else {
                (zero, 0)
            }
        }
        FoolingMode::Exact => exact_fooling(m)?,
    };
    FoolingSet::validated(pairs, value, m)
}

fn exact_fooling(m: &CcMatrix) -> Result<(Vec<(usize, usize)>, u8)> {
    let red = m.reduced();
    let (r, c) = (red.rows.len(), red.cols.len());
    if r > FOOLING_EXACT_MAX_SIDE || c > FOOLING_EXACT_MAX_SIDE {
        return Err(Error::BudgetExceeded {
            what: "exact fooling-set search (distinct rows/columns)",
            needed: r.max(c) as u128,
            budget: FOOLING_EXACT_MAX_SIDE as u64,
        });
    }
    let mut best: (Vec<(usize, usize)>, u8) = (Vec::new(), 0);
    for value in [0u8, 1] {
        let vertices: Vec<(usize, usize)> =
            (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).filter(|&(i, j)| red.cells[i][j] == value).collect();
        if vertices.is_empty() {
            continue;
        }
        let adj: Vec<BitSet> = vertices
            .iter()
            .map(|&(i, j)| {
                let mut s = BitSet::new(vertices.len());
                for (k, &(i2, j2)) in vertices.iter().enumerate() {
                    if i != i2 && j != j2 && (red.cells[i2][j] != value || red.cells[i][j2] != value) {
                        s.insert(k);
                    }
                }
                s
            })
            .collect();
        let clique = max_clique(&adj, vertices.len());
        if clique.len() > best.0.len() {
            best = (clique.iter().map(|&k| (red.rows[vertices[k].0], red.cols[vertices[k].1])).collect(), value);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)] }
    }

    fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for k in 0..len {
            s.insert(k);
        }
        s
    }

    fn insert(&mut self, k: usize) {
        self.words[k / 64] |= 1 << (k % 64);
    }

    fn remove(&mut self, k: usize) {
        self.words[k / 64] &= !(1 << (k % 64));
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn first(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    fn intersect(&self, other: &BitSet) -> BitSet {
        BitSet { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let k = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(w * 64 + k)
                }
            })
        })
    }
}

/// Branch and bound with greedy colouring bounds.
fn max_clique(adj: &[BitSet], len: usize) -> Vec<usize> {
    fn expand(adj: &[BitSet], cand: BitSet, current: &mut Vec<usize>, best: &mut Vec<usize>) {
        // colour candidates greedily; colour index bounds the clique size reachable
        let mut order: Vec<(usize, usize)> = Vec::new();
        let mut uncoloured = cand.clone();
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut avail = uncoloured.clone();
            while let Some(v) = avail.first() {
                avail.remove(v);
                uncoloured.remove(v);
                for u in adj[v].iter() {
                    avail.remove(u);
                }
                order.push((v, colour));
            }
        }
        let mut cand = cand;
        for &(v, col) in order.iter().rev() {
            if current.len() + col <= best.len() {
                return;
            }
            current.push(v);
            let next = cand.intersect(&adj[v]);
            if next.is_empty() {
                if current.len() > best.len() {
                    *best = current.clone();
                }
            } else {
                expand(adj, next, current, best);
            }
            current.pop();
            cand.remove(v);
        }
    }
    let mut best = Vec::new();
    expand(adj, BitSet::full(len), &mut Vec::new(), &mut best);
    best.sort_unstable();
    best
}

/// Rank over GF(2) by bit-row elimination.
pub fn rank_gf2(cells: &[Vec<u8>]) -> usize {
    let cols = cells.first().map_or(0, Vec::len);
    let words = cols.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = cells
        .iter()
        .map(|row| {
            let mut bits = vec![0u64; words];
            for (j, &h) in row.iter().enumerate() {
                if h & 1 == 1 {
                    bits[j / 64] |= 1 << (j % 64);
                }
            }
            bits
        })
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let (w, b) = (col / 64, col % 64);
        let Some(p) = (rank..rows.len()).find(|&i| (rows[i][w] >> b) & 1 == 1) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && (row[w] >> b) & 1 == 1 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over the rationals by fraction-free (Bareiss) elimination.
pub fn rank_rational(cells: &[Vec<u8>]) -> usize {
    let cols = cells.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = cells.iter().map(|row| row.iter().map(|&h| BigInt::from(h)).collect()).collect();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(rank, p);
        let pivot = a[rank][col].clone();
        for i in rank + 1..a.len() {
            let factor = a[i][col].clone();
            for j in col + 1..cols {
                let v = (&a[i][j] * &pivot - &factor * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

/// `(rank over GF(2), rank over ℚ)` of the 0/1 matrix of `f̂_z`.
pub fn rank_diagnostics(m: &CcMatrix) -> (usize, usize) {
    let red = m.reduced();
    (rank_gf2(&red.cells), rank_rational(&red.cells))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub rule: String,
    pub n: usize,
    pub z: String,
    pub distinct_rows: usize,
    pub distinct_cols: usize,
    pub left_cc_bits: u32,
    pub right_cc_bits: u32,
    pub multiround_exact_bits: Option<u32>,
    pub fooling_mode: FoolingMode,
    pub fooling_size: usize,
    pub fooling_bound_bits: u32,
    pub rank_gf2: usize,
    pub rank_rational: usize,
    pub forward_image_right: Option<usize>,
    pub forward_image_left: Option<usize>,
    pub tau_right: Option<usize>,
    pub tau_left: Option<usize>,
    /// `⌈log₂|T_{f→z}(A^{[1..n]})|⌉`
    pub trace_column_right_bits: Option<u32>,
    pub trace_column_left_bits: Option<u32>,
    /// `⌈log₂(|τ_{f→z}| + 1)⌉`
    pub trace_tau_right_bits: Option<u32>,
    pub trace_tau_left_bits: Option<u32>,
}

/// Every bound the crate knows for one `(rule, z)`, checked for consistency.
pub fn cc_bounds(rule: &Rule, z: &[Letter], budget: &Budget) -> Result<BoundsReport> {
    let m = build_matrix(rule, z, budget)?;
    let n = m.n();
    let q = m.alphabet_size();
    let red = m.reduced();
    let distinct_rows = red.rows.len();
    let distinct_cols = red.cols.len();
    let left_cc_bits = ceil_log2(distinct_rows as u64);
    let right_cc_bits = ceil_log2(distinct_cols as u64);
    let multiround_exact_bits =
        if m.dim() <= MULTIROUND_MAX_SIDE { Some(multiround_on_cells(&red.cells)?) } else { None };
    let fooling = if distinct_rows <= FOOLING_EXACT_MAX_SIDE && distinct_cols <= FOOLING_EXACT_MAX_SIDE {
        fooling_set(&m, FoolingMode::Exact)?
    } else {
        fooling_set(&m, FoolingMode::Greedy)?
    };
    let fooling_mode = if distinct_rows <= FOOLING_EXACT_MAX_SIDE && distinct_cols <= FOOLING_EXACT_MAX_SIDE {
        FoolingMode::Exact
    } else {
        FoolingMode::Greedy
    };
    let rank_gf2 = rank_gf2(&red.cells);
    let rank_rational = rank_rational(&red.cells);

    let image = |side| trace::forward_image_size(rule, z, side, budget).ok();
    let tau = |side| trace::tau_set(rule, z, side, budget).ok().map(|s| s.len());
    let forward_image_right = image(Side::Right);
    let forward_image_left = image(Side::Left);
    let tau_right = tau(Side::Right);
    let tau_left = tau(Side::Left);

    let report = BoundsReport {
        rule: rule.label(),
        n,
        z: format_letters(z),
        distinct_rows,
        distinct_cols,
        left_cc_bits,
        right_cc_bits,
        multiround_exact_bits,
        fooling_mode,
        fooling_size: fooling.size(),
        fooling_bound_bits: fooling.bound_bits(),
        rank_gf2,
        rank_rational,
        forward_image_right,
        forward_image_left,
        tau_right,
        tau_left,
        trace_column_right_bits: forward_image_right.map(|s| ceil_log2(s as u64)),
        trace_column_left_bits: forward_image_left.map(|s| ceil_log2(s as u64)),
        trace_tau_right_bits: tau_right.map(|s| ceil_log2(s as u64 + 1)),
        trace_tau_left_bits: tau_left.map(|s| ceil_log2(s as u64 + 1)),
    };
    report.check_consistency().map_err(|msg| Error::InvalidFoolingSet(format!("{msg} (q={q})")))?;
    Ok(report)
}

impl BoundsReport {
    /// Orderings that must hold between the fields.
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        let min_one_round = self.left_cc_bits.min(self.right_cc_bits);
        if let Some(mr) = self.multiround_exact_bits {
            if self.fooling_bound_bits > mr {
                return Err(format!("fooling bound {} > multi-round {mr}", self.fooling_bound_bits));
            }
            if mr > min_one_round {
                return Err(format!("multi-round {mr} > one-round {min_one_round}"));
            }
            if self.rank_rational as u64 > 1u64 << mr {
                return Err(format!("rational rank {} > 2^{mr}", self.rank_rational));
            }
        }
        if self.fooling_bound_bits > min_one_round {
            return Err(format!("fooling bound {} > one-round {min_one_round}", self.fooling_bound_bits));
        }
        for (measured, bound, name) in [
            (self.right_cc_bits, self.trace_column_right_bits, "right column"),
            (self.right_cc_bits, self.trace_tau_right_bits, "right tau"),
            (self.left_cc_bits, self.trace_column_left_bits, "left column"),
            (self.left_cc_bits, self.trace_tau_left_bits, "left tau"),
        ] {
            if let Some(b) = bound {
                if measured > b {
                    return Err(format!("measured {measured} bits exceed the {name} protocol bound {b}"));
                }
            }
        }
        Ok(())
    }
}
