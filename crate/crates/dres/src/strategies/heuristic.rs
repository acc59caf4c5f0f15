//! The two deterministic repair heuristics. Both repeatedly pick the most
//! overloaded node and move one of its tasks to a node that can absorb it,
//! until the system is stable or no overloaded node has a feasible move
//! left; they differ only in how the task and the target are chosen.

use std::time::Instant;

use crate::model::{Assignment, Instance, SolveResult};
use crate::strategies::score::{self, fraction_used, load_factor, UsageTable};

/// One move: take `task` off the overloaded node, put it on `target`.
struct Move {
    task: usize,
    target: usize,
}

/// Locally cheapest repair: from the most overloaded node, move the task
/// with the lowest migration cost to the feasible node that keeps the most
/// relative headroom.
pub fn greedy_solve(instance: &Instance) -> SolveResult {
    solve_with(instance, |usage, genes, inst, node| {
        let mut best: Option<(u64, usize, usize)> = None;
        for task in tasks_on(genes, node) {
            let Some(target) = score::roomiest_feasible_target(usage, inst, task, node) else {
                continue;
            };
            let cost = inst.tasks[task].migration_cost;
            if best.map_or(true, |(c, t, _)| (cost, task) < (c, t)) {
                best = Some((cost, task, target));
            }
        }
        best.map(|(_, task, target)| Move { task, target })
    })
}

/// Remaining-budget repair: rank candidate targets by the tradeoff value
/// `1 - exp(fraction_used - 1)` minimized over resources after placement,
/// and pick the task with the lowest migration cost per unit of overload it
/// relieves.
pub fn balance_solve(instance: &Instance) -> SolveResult {
    solve_with(instance, |usage, genes, inst, node| {
        let capacity = inst.nodes[node].capacity.levels();
        let before = load_factor(usage.node(node), capacity);
        let mut best: Option<(f64, usize, usize)> = None;
        for task in tasks_on(genes, node) {
            let Some(target) = best_tradeoff_target(usage, inst, task, node) else {
                continue;
            };
            let after = load_factor(&usage_without(usage, inst, task, node), capacity);
            let relieved = before - after;
            let cost = inst.tasks[task].migration_cost;
            let rate = if relieved > 0.0 {
                cost as f64 / relieved
            } else {
                f64::INFINITY
            };
            let better = match best {
                None => true,
                Some((r, t, _)) => match rate.total_cmp(&r) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Equal => task < t,
                    std::cmp::Ordering::Greater => false,
                },
            };
            if better {
                best = Some((rate, task, target));
            }
        }
        best.map(|(_, task, target)| Move { task, target })
    })
}

fn solve_with(
    instance: &Instance,
    pick_move: impl Fn(&UsageTable, &Assignment, &Instance, usize) -> Option<Move>,
) -> SolveResult {
    let started = Instant::now();
    let mut genes = instance.initial_assignment.clone();
    let mut usage = UsageTable::new(instance, &genes);
    let mut moves = 0u64;
    let stable = loop {
        let mut overloaded: Vec<usize> = (0..instance.node_count())
            .filter(|&n| usage.is_overloaded(instance, n))
            .collect();
        if overloaded.is_empty() {
            break true;
        }
        overloaded.sort_by(|&a, &b| {
            let fa = load_factor(usage.node(a), instance.nodes[a].capacity.levels());
            let fb = load_factor(usage.node(b), instance.nodes[b].capacity.levels());
            fb.total_cmp(&fa)
        });
        let mut moved = false;
        for &node in &overloaded {
            if let Some(step) = pick_move(&usage, &genes, instance, node) {
                usage.apply_move(instance, step.task, node, step.target);
                genes.set(step.task, step.target);
                moves += 1;
                moved = true;
                break;
            }
        }
        if !moved {
            break false;
        }
    };
    let cost = instance.transformation_cost(&genes);
    debug_assert_eq!(stable, instance.is_stable(&genes));
    SolveResult {
        best: genes,
        cost,
        stable,
        cycles_or_nodes: moves,
        elapsed_ms: started.elapsed().as_millis() as u64,
        complete: true,
    }
}

fn tasks_on(genes: &Assignment, node: usize) -> impl Iterator<Item = usize> + '_ {
    genes
        .genes()
        .iter()
        .enumerate()
        .filter(move |(_, &n)| n == node)
        .map(|(task, _)| task)
}

fn best_tradeoff_target(
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
        let demand = instance.tasks[task].demand.levels();
        let capacity = instance.nodes[node].capacity.levels();
        let tradeoff = usage
            .node(node)
            .iter()
            .zip(demand)
            .zip(capacity)
            .map(|((&u, &r), &c)| 1.0 - (fraction_used(u + r, c) - 1.0).exp())
            .fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(_, s)| tradeoff > s) {
            best = Some((node, tradeoff));
        }
    }
    best.map(|(node, _)| node)
}

fn usage_without(usage: &UsageTable, instance: &Instance, task: usize, node: usize) -> Vec<u64> {
    usage
        .node(node)
        .iter()
        .zip(instance.tasks[task].demand.levels())
        .map(|(&u, &r)| u - r)
        .collect()
}
