use crate::error::{Error, Result};

/// Environment variable that caps enumeration sizes.
pub const BUDGET_ENV: &str = "TRACECC_BUDGET";

/// Default cap: enough for a `4^12` binary matrix.
pub const DEFAULT_BUDGET: u64 = 1 << 25;

/// Upper bound on the number of items (matrix cells, enumerated words)
/// a single operation may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_items: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_items: DEFAULT_BUDGET }
    }
}

impl Budget {
    pub fn new(max_items: u64) -> Self {
        Self { max_items }
    }

    /// Reads `TRACECC_BUDGET`, falling back to [`DEFAULT_BUDGET`].
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse().ok()).map(Self::new).unwrap_or_default()
    }

    pub fn check(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.max_items as u128 {
            Err(Error::BudgetExceeded { what, needed, budget: self.max_items })
        } else {
            Ok(())
        }
    }

    /// Checks `q^exp` items, without overflowing.
    pub fn check_pow(&self, what: &'static str, q: usize, exp: usize) -> Result<u64> {
        let mut needed: u128 = 1;
        for _ in 0..exp {
            needed = needed.saturating_mul(q as u128);
        }
        self.check(what, needed)?;
        Ok(needed as u64)
    }
}
