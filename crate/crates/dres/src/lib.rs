//! Solvers and a benchmark harness for the d-resource system optimization
//! problem: given tasks with per-resource demands and migration costs,
//! nodes with per-resource capacities, and an initial task placement, find
//! a placement that overloads no node at minimum total migration cost.
//!
//! Five strategies ship with the crate:
//!
//! - **fullscan** — exact search, either exhaustive or branch-and-bound,
//! - **greedy** — deterministic locally-cheapest repair moves,
//! - **balance** — deterministic remaining-capacity tradeoff heuristic,
//! - **genetic** — a classic generational genetic algorithm baseline,
//! - **evolve** — a reinforced evolution schema built for this problem's
//!   strict feasibility constraint, with stable-genotype migration.
//!
//! [`instances`] provides a plain-text instance format, three built-in
//! benchmark instances and a seeded random generator; [`harness`] runs
//! repeated experiments and aggregates the cost statistics.

pub mod evolution;
pub mod harness;
pub mod instances;
pub mod model;
pub mod strategies;

pub use model::{Assignment, Instance, Node, ResourceVector, SolveResult, Task};
pub use strategies::{FullscanMode, SearchBudget};
