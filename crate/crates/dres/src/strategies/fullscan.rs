//! Exact search over the full assignment space, either as a plain
//! exhaustive enumeration or with branch-and-bound pruning.
//!
//! Both modes walk the same depth-first tree: tasks in descending
//! migration-cost order, and for each task its initial node first (the
//! zero-cost branch) followed by the remaining nodes in ascending index
//! order. Branch-and-bound additionally discards partial assignments that
//! already overload a node and partial assignments whose accumulated
//! migration cost has reached the incumbent's. Expensive tasks sit at the
//! top of the tree so the cost bound prunes early.

use std::time::Instant;

use crate::model::{Assignment, Instance, SolveResult};
use crate::strategies::SearchBudget;

/// How [`fullscan_solve`] traverses the assignment space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullscanMode {
    /// Visit every complete assignment. The fidelity reference; only
    /// feasible for small instances.
    Exhaustive,
    /// Same result, orders of magnitude fewer visits.
    BranchAndBound,
}

const TIME_CHECK_MASK: u64 = 0x3ff;

struct Search<'a> {
    instance: &'a Instance,
    dims: usize,
    /// Task indices in visit order.
    order: Vec<usize>,
    genes: Vec<usize>,
    usage: Vec<u64>,
    cost: u64,
    incumbent: Option<(u64, Vec<usize>)>,
    prune: bool,
    nodes_explored: u64,
    node_limit: u64,
    deadline: Option<Instant>,
    out_of_budget: bool,
}

/// Find a minimum-cost stable assignment, or prove none exists.
///
/// Returns the incumbent with `complete = false` when the budget expires
/// first; `stable = false` with `complete = true` proves the instance has no
/// stable assignment at all.
pub fn fullscan_solve(
    instance: &Instance,
    budget: &SearchBudget,
    mode: FullscanMode,
) -> SolveResult {
    let started = Instant::now();
    let mut order: Vec<usize> = (0..instance.task_count()).collect();
    order.sort_by_key(|&t| std::cmp::Reverse(instance.tasks[t].migration_cost));

    let mut search = Search {
        instance,
        dims: instance.resource_count(),
        order,
        genes: instance.initial_assignment.genes().to_vec(),
        usage: vec![0; instance.node_count() * instance.resource_count()],
        cost: 0,
        incumbent: None,
        prune: mode == FullscanMode::BranchAndBound,
        nodes_explored: 0,
        node_limit: budget.node_limit,
        deadline: (budget.time_limit_ms > 0)
            .then(|| started + std::time::Duration::from_millis(budget.time_limit_ms)),
        out_of_budget: false,
    };
    search.descend(0);

    let (best, cost, stable) = match search.incumbent {
        Some((cost, genes)) => (Assignment::new(genes), cost, true),
        None => {
            let mu0 = instance.initial_assignment.clone();
            let stable = instance.is_stable(&mu0);
            (mu0, 0, stable)
        }
    };
    SolveResult {
        best,
        cost,
        stable,
        cycles_or_nodes: search.nodes_explored,
        elapsed_ms: started.elapsed().as_millis() as u64,
        complete: !search.out_of_budget,
    }
}

impl Search<'_> {
    fn descend(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.visit_leaf();
            return;
        }
        let task = self.order[depth];
        let home = self.instance.initial_assignment.node_of(task);
        let move_cost = self.instance.tasks[task].migration_cost;
        let candidates =
            std::iter::once(home).chain((0..self.instance.node_count()).filter(|&n| n != home));
        for node in candidates {
            if self.out_of_budget || !self.spend_budget() {
                return;
            }
            let added = if node == home { 0 } else { move_cost };
            let branch_cost = self.cost + added;
            if self.prune {
                if let Some((best_cost, _)) = self.incumbent {
                    if branch_cost >= best_cost {
                        if node == home {
                            continue; // a cheaper move may still exist
                        }
                        return; // every remaining sibling costs the same
                    }
                }
                if !self.placement_fits(task, node) {
                    continue;
                }
            }
            self.place(task, node);
            let saved_cost = self.cost;
            self.cost = branch_cost;
            self.descend(depth + 1);
            self.cost = saved_cost;
            self.unplace(task, node);
        }
    }

    fn visit_leaf(&mut self) {
        if !self.prune && !self.all_within_capacity() {
            return;
        }
        let better = self.incumbent.as_ref().map_or(true, |(c, _)| self.cost < *c);
        if better {
            self.incumbent = Some((self.cost, self.genes.clone()));
        }
    }

    fn spend_budget(&mut self) -> bool {
        if self.node_limit > 0 && self.nodes_explored >= self.node_limit {
            self.out_of_budget = true;
            return false;
        }
        self.nodes_explored += 1;
        if self.nodes_explored & TIME_CHECK_MASK == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.out_of_budget = true;
                    return false;
                }
            }
        }
        true
    }

    fn placement_fits(&self, task: usize, node: usize) -> bool {
        let demand = self.instance.tasks[task].demand.levels();
        let capacity = self.instance.nodes[node].capacity.levels();
        let usage = &self.usage[node * self.dims..(node + 1) * self.dims];
        usage
            .iter()
            .zip(demand)
            .zip(capacity)
            .all(|((&u, &r), &c)| u + r <= c)
    }

    fn all_within_capacity(&self) -> bool {
        self.instance.nodes.iter().enumerate().all(|(n, node)| {
            self.usage[n * self.dims..(n + 1) * self.dims]
                .iter()
                .zip(node.capacity.levels())
                .all(|(u, c)| u <= c)
        })
    }

    fn place(&mut self, task: usize, node: usize) {
        self.genes[task] = node;
        for (i, r) in self.instance.tasks[task].demand.levels().iter().enumerate() {
            self.usage[node * self.dims + i] += r;
        }
    }

    fn unplace(&mut self, task: usize, node: usize) {
        for (i, r) in self.instance.tasks[task].demand.levels().iter().enumerate() {
            self.usage[node * self.dims + i] -= r;
        }
    }
}
