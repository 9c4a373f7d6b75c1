use serde::{Deserialize, Serialize};

/// Search effort shared by every optimizer in the crate.
///
/// All stochastic searches derive their random streams from `seed`, so two
/// runs with equal budgets produce identical results regardless of how the
/// restarts are scheduled across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Random restarts per escalation level.
    pub restarts: usize,
    /// Cap on family size / number of decomposition parts. `None` selects
    /// `max(4, 2n)` for the active atom count `n`.
    pub k_max: Option<usize>,
    /// Grid subdivisions used by the exhaustive oracles.
    pub grid: usize,
    pub seed: u64,
    /// Escalation stops once the relative gain of one more part falls below this.
    pub stabilization_tol: f64,
    /// Iteration cap for a single ascent / descent run.
    pub max_iters: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            restarts: 32,
            k_max: None,
            grid: 40,
            seed: 0,
            stabilization_tol: 1e-4,
            max_iters: 200,
        }
    }
}

impl Budget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = Some(k_max);
        self
    }

    /// Part / family cap for `active` atoms.
    pub fn parts_cap(&self, active: usize) -> usize {
        self.k_max.unwrap_or_else(|| 4.max(2 * active)).max(1)
    }
}
