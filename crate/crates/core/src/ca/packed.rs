//! Bit-parallel evolution of binary words packed into a `u64`.
//!
//! Bit `p` holds the cell at position `p - n` of a word on `[-n..n]`, so the
//! left neighbour of bit `p` is bit `p - 1`. After `t` steps only bits
//! `t..=2n-t` are meaningful; the garbage creeping in from the edges moves
//! exactly as fast as the triangle shrinks.

use super::Letter;

/// Largest half-width whose configuration fits in one `u64`.
pub const MAX_HALF_WIDTH: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackedRule {
    // all-ones where the rule maps neighbourhood index 4a+2b+c to 1
    masks: [u64; 8],
}

#[inline(always)]
fn select(cond: u64, if_set: u64, if_clear: u64) -> u64 {
    (cond & if_set) | (!cond & if_clear)
}

impl PackedRule {
    pub fn new(number: u8) -> Self {
        let mut masks = [0u64; 8];
        for (i, m) in masks.iter_mut().enumerate() {
            if (number >> i) & 1 == 1 {
                *m = u64::MAX;
            }
        }
        Self { masks }
    }

    #[inline(always)]
    pub fn step(&self, row: u64) -> u64 {
        let l = row << 1;
        let c = row;
        let r = row >> 1;
        let k = &self.masks;
        let hi = select(c, select(r, k[7], k[6]), select(r, k[5], k[4]));
        let lo = select(c, select(r, k[3], k[2]), select(r, k[1], k[0]));
        select(l, hi, lo)
    }
}

/// Packs letters `w[0..]` (position order) into bits `0..`.
pub fn pack(letters: &[Letter]) -> u64 {
    debug_assert!(letters.len() <= 64);
    letters.iter().enumerate().fold(0u64, |acc, (p, &l)| acc | ((l as u64 & 1) << p))
}

pub fn unpack(bits: u64, len: usize) -> Vec<Letter> {
    (0..len).map(|p| ((bits >> p) & 1) as Letter).collect()
}

/// Central trace of a packed word of half-width `n`, as bits `0..=n`.
#[inline]
pub fn central_trace(rule: &PackedRule, mut row: u64, n: usize) -> u64 {
    let mut trace = 0u64;
    for t in 0..=n {
        trace |= ((row >> n) & 1) << t;
        row = rule.step(row);
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::{central_trace_of, Rule};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn packed_matches_table_evolution(number in 0u8..=255, n in 1usize..=12, seed in any::<u64>()) {
            let len = 2 * n + 1;
            let letters = unpack(seed, len);
            let rule = Rule::elementary(number);
            let expect = central_trace_of(&rule, &letters);
            let got = central_trace(&PackedRule::new(number), pack(&letters), n);
            prop_assert_eq!(unpack(got, n + 1), expect);
        }
    }
}
