//! Traced communication complexity of one-dimensional radius-1 cellular automata.
//!
//! Alice holds the left half `u` of a centered word, Bob the right half `v`,
//! and both know the central letter `z_0`. The traced function
//! `f̂_z(u, v)` is `0` when the central column of the computation triangle of
//! `u z_0 v` equals the target word `z`, and `1` otherwise. This crate builds
//! the exact matrices of that function, measures and bounds its
//! communication complexity, runs the structural protocols that explain the
//! low-complexity rules, and certifies the fooling-set lower bounds that
//! explain the hard ones.
//!
//! Module map:
//!
//! - [`ca`]: rules, words, triangles, traces, 2-grouping and mirroring.
//! - [`classify`]: structural predicates (onesidedness, spreading, permutivity, ...).
//! - [`cc`]: matrices, one-round / multi-round complexity, fooling sets, ranks.
//! - [`trace`]: half-triangle columns, τ sets, trace-language counts, entropy.
//! - [`protocols`]: executable protocols with bit accounting.
//! - [`subshift`]: forbidden-pattern languages, expansivity, W_z fooling sets.
//! - [`report`]: surveys, CSV/JSON emission and PGM rendering.

pub mod budget;
pub mod ca;
pub mod cc;
pub mod classify;
pub mod error;
pub mod protocols;
pub mod report;
pub mod subshift;
pub mod trace;

pub use budget::Budget;
pub use ca::{Letter, Rule, RuleOrigin, Side, TraceWord, Triangle, Word};
pub use error::{Error, Result};

/// `⌈log₂ count⌉`, with `0` for counts of 0 or 1.
pub fn ceil_log2(count: u64) -> u32 {
    if count <= 1 {
        0
    } else {
        64 - (count - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::ceil_log2;

    #[test]
    fn ceil_log2_small_values() {
        let expected = [0, 0, 1, 2, 2, 3, 3, 3, 3, 4];
        for (count, bits) in expected.iter().enumerate() {
            assert_eq!(ceil_log2(count as u64), *bits, "count {count}");
        }
        assert_eq!(ceil_log2(1 << 40), 40);
        assert_eq!(ceil_log2((1 << 40) + 1), 41);
    }
}
