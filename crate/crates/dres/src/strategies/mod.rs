//! Non-evolutionary strategies: exact search plus two deterministic
//! one-move-at-a-time heuristics.

mod fullscan;
mod heuristic;

pub use fullscan::{fullscan_solve, FullscanMode};
pub use heuristic::{balance_solve, greedy_solve};

pub(crate) mod score;

/// Caps on how long a solver may search. Zero means unlimited.
///
/// `node_limit` counts whatever unit of work the strategy reports in
/// [`crate::model::SolveResult::cycles_or_nodes`]: search-tree nodes for the
/// exact search, evolution cycles for the genetic strategies. Cycle-based
/// budgets make runs bit-reproducible; wall-clock budgets do not.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchBudget {
    pub time_limit_ms: u64,
    pub node_limit: u64,
}

impl SearchBudget {
    pub const UNLIMITED: SearchBudget = SearchBudget {
        time_limit_ms: 0,
        node_limit: 0,
    };

    pub fn cycles(node_limit: u64) -> Self {
        SearchBudget {
            time_limit_ms: 0,
            node_limit,
        }
    }

    pub fn wall_clock_ms(time_limit_ms: u64) -> Self {
        SearchBudget {
            time_limit_ms,
            node_limit: 0,
        }
    }
}
