//! Ratio-based ranking helpers shared by the heuristics and the population
//! repair fallback. Stability itself is always decided on exact integers;
//! these floats only order candidates.

use crate::model::Instance;

/// Fraction of a capacity consumed. A zero-capacity resource counts as fully
/// used when idle and infinitely overloaded as soon as anything lands on it.
pub fn fraction_used(usage: u64, capacity: u64) -> f64 {
    if capacity == 0 {
        if usage == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        usage as f64 / capacity as f64
    }
}

/// Worst-resource load factor of a node; above 1.0 means overloaded.
pub fn load_factor(usage: &[u64], capacity: &[u64]) -> f64 {
    usage
        .iter()
        .zip(capacity)
        .map(|(&u, &c)| fraction_used(u, c))
        .fold(0.0, f64::max)
}

/// Per-node usage matrix, kept incrementally while a heuristic moves tasks.
pub struct UsageTable {
    levels: Vec<u64>,
    dims: usize,
}

impl UsageTable {
    pub fn new(instance: &Instance, assignment: &crate::model::Assignment) -> Self {
        let dims = instance.resource_count();
        let mut levels = vec![0u64; instance.node_count() * dims];
        for (task, &node) in assignment.genes().iter().enumerate() {
            for (i, r) in instance.tasks[task].demand.levels().iter().enumerate() {
                levels[node * dims + i] += r;
            }
        }
        UsageTable { levels, dims }
    }

    pub fn node(&self, node: usize) -> &[u64] {
        &self.levels[node * self.dims..(node + 1) * self.dims]
    }

    pub fn apply_move(&mut self, instance: &Instance, task: usize, from: usize, to: usize) {
        for (i, r) in instance.tasks[task].demand.levels().iter().enumerate() {
            self.levels[from * self.dims + i] -= r;
            self.levels[to * self.dims + i] += r;
        }
    }

    /// Would placing `task` on `node` keep the node within capacity?
    pub fn placement_fits(&self, instance: &Instance, task: usize, node: usize) -> bool {
        let demand = instance.tasks[task].demand.levels();
        let capacity = instance.nodes[node].capacity.levels();
        self.node(node)
            .iter()
            .zip(demand)
            .zip(capacity)
            .all(|((&u, &r), &c)| u + r <= c)
    }

    pub fn is_overloaded(&self, instance: &Instance, node: usize) -> bool {
        self.node(node)
            .iter()
            .zip(instance.nodes[node].capacity.levels())
            .any(|(&u, &c)| u > c)
    }

    /// Smallest relative headroom left on `node` after hypothetically
    /// placing `task` there. Higher is roomier.
    pub fn min_relative_residual(&self, instance: &Instance, task: usize, node: usize) -> f64 {
        let demand = instance.tasks[task].demand.levels();
        let capacity = instance.nodes[node].capacity.levels();
        self.node(node)
            .iter()
            .zip(demand)
            .zip(capacity)
            .map(|((&u, &r), &c)| 1.0 - fraction_used(u + r, c))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Among feasible target nodes for `task` (anything but `from`), the one
/// with the most relative headroom after placement; ties favor the lowest
/// node index.
pub fn roomiest_feasible_target(
    usage: &UsageTable,
    instance: &Instance,
    task: usize,
    from: usize,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for node in 0..instance.node_count() {
        if node == from || !usage.placement_fits(instance, task, node) {
            continue;
        }
        let residual = usage.min_relative_residual(instance, task, node);
        if best.map_or(true, |(_, r)| residual > r) {
            best = Some((node, residual));
        }
    }
    best.map(|(node, _)| node)
}
