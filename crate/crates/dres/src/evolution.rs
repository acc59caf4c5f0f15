//! Population-based strategies: the reinforced evolution schema and a
//! classic generational genetic algorithm used as its baseline.
//!
//! The feasibility constraint makes this search space hostile to a plain
//! GA: only a small fraction of genotypes are stable, and the stable ones
//! are scattered. The reinforced schema answers with an aggressive cull
//! of unstable and weak individuals every cycle, and a *migration* operator
//! that refills the population with freshly drawn stable genotypes —
//! rejection sampling playing the role of random genetic drift. Individuals
//! recombine freely across cycle boundaries; the population never shrinks
//! below its living space.
//!
//! One cycle:
//!
//! 1. selection for crossover (default 25% of the population),
//! 2. selection for mutation (default 5%),
//! 3. termination of unstable genotypes (default 10% survival rate),
//! 4. termination of the weakest individuals (default 20% of the size),
//! 5. migration back up to the population limit.

use std::time::Instant;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Assignment, Instance, SolveResult};
use crate::strategies::score::{self, UsageTable};
use crate::strategies::SearchBudget;

/// A genotype with its cached evaluation. Construct through
/// [`Individual::evaluate`] so the caches can never drift from the genes.
#[derive(Debug, Clone)]
pub struct Individual {
    genotype: Assignment,
    fitness_value: u64,
    stable: bool,
}

impl Individual {
    pub fn evaluate(instance: &Instance, genotype: Assignment) -> Self {
        let fitness_value = instance.fitness(&genotype);
        let stable = instance.is_stable(&genotype);
        Individual {
            genotype,
            fitness_value,
            stable,
        }
    }

    pub fn genotype(&self) -> &Assignment {
        &self.genotype
    }

    pub fn fitness_value(&self) -> u64 {
        self.fitness_value
    }

    pub fn is_stable(&self) -> bool {
        self.stable
    }
}

/// Tuning knobs for [`evolve_solve`] and [`genetic_solve`].
#[derive(Debug, Clone)]
pub struct EvolveConfig {
    /// The living space: the size the population is refilled to each cycle.
    pub population_limit: usize,
    pub tournament_size: usize,
    /// Fraction of the population selected as crossover parents per cycle.
    pub crossover_fraction: f64,
    /// Fraction of the population cloned and mutated per cycle.
    pub mutation_fraction: f64,
    /// Chance for an unstable individual to survive the cull step.
    pub unstable_survival_rate: f64,
    /// Fraction of the population removed as weakest each cycle.
    pub weakest_cull_fraction: f64,
    /// Max rejection-sampling draws per migrant before falling back to
    /// repair; 0 means unlimited.
    pub migration_draw_cap: u64,
    pub seed: u64,
}

impl EvolveConfig {
    /// Defaults sized for the given instance: the living space is twice
    /// `task_count * node_count`, past which larger populations stopped
    /// paying for themselves. Tournament size 2 keeps the selection
    /// pressure low; larger brackets converge prematurely on the built-in
    /// instances.
    pub fn for_instance(instance: &Instance) -> Self {
        EvolveConfig {
            population_limit: (2 * instance.task_count() * instance.node_count()).max(2),
            tournament_size: 2,
            crossover_fraction: 0.25,
            mutation_fraction: 0.05,
            unstable_survival_rate: 0.10,
            weakest_cull_fraction: 0.20,
            migration_draw_cap: 10_000,
            seed: 0,
        }
    }

    fn check(&self) {
        assert!(self.population_limit >= 2, "population_limit must be >= 2");
        assert!(self.tournament_size >= 2, "tournament_size must be >= 2");
        for (name, value) in [
            ("crossover_fraction", self.crossover_fraction),
            ("mutation_fraction", self.mutation_fraction),
            ("unstable_survival_rate", self.unstable_survival_rate),
            ("weakest_cull_fraction", self.weakest_cull_fraction),
        ] {
            assert!((0.0..=1.0).contains(&value), "{name} must lie in [0, 1]");
        }
    }
}

/// Per-cycle progress sample emitted by the traced solver entry points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleTrace {
    pub cycle: u64,
    pub population_size: usize,
    /// Cost of the best stable genotype seen so far, if any.
    pub best_cost: Option<u64>,
}

/// Rejection-sample a stable genotype: draw uniform assignments until one
/// satisfies every capacity constraint. Returns `None` once `draw_cap`
/// attempts (0 = unlimited) have all failed.
///
/// Acceptance rates are often far below a percent, so the hot loop works on
/// flat demand/capacity tables and draws genes for the hungriest tasks
/// first: usage is monotone, so a draw is dead the moment any prefix
/// overloads a node, and heavy tasks sink draws fastest. Generation order
/// does not alter the accepted distribution.
pub fn random_stable_genotype<R: Rng>(
    instance: &Instance,
    rng: &mut R,
    draw_cap: u64,
) -> Option<Assignment> {
    let l = instance.task_count();
    let m = instance.node_count();
    let d = instance.resource_count();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by_key(|&t| {
        std::cmp::Reverse(instance.tasks[t].demand.levels().iter().sum::<u64>())
    });
    let demands: Vec<u64> = order
        .iter()
        .flat_map(|&t| instance.tasks[t].demand.levels().iter().copied())
        .collect();
    let capacities: Vec<u64> = instance
        .nodes
        .iter()
        .flat_map(|n| n.capacity.levels().iter().copied())
        .collect();
    let node_picker = Uniform::new(0, m);

    let mut genes = vec![0usize; l];
    let mut usage = vec![0u64; m * d];
    let mut attempts = 0u64;
    'attempt: loop {
        if draw_cap > 0 && attempts >= draw_cap {
            return None;
        }
        attempts += 1;
        usage.fill(0);
        for (slot, demand) in order.iter().zip(demands.chunks_exact(d)) {
            let node = node_picker.sample(rng);
            genes[*slot] = node;
            let used = &mut usage[node * d..node * d + d];
            let room = &capacities[node * d..node * d + d];
            for i in 0..d {
                used[i] += demand[i];
                if used[i] > room[i] {
                    continue 'attempt; // this prefix can no longer stabilize
                }
            }
        }
        return Some(Assignment::new(genes));
    }
}

/// Single-elimination tournament among `k` individuals drawn uniformly with
/// replacement; higher fitness wins each match and the earlier-drawn
/// individual wins ties. Byes go to the earliest-drawn entries.
pub fn tournament_select<'a, R: Rng>(
    population: &'a [Individual],
    k: usize,
    rng: &mut R,
) -> &'a Individual {
    tournament_select_by(population, k, rng, |ind| ind.fitness_value as i64)
}

pub(crate) fn tournament_select_by<'a, T, R: Rng>(
    population: &'a [T],
    k: usize,
    rng: &mut R,
    key: impl Fn(&T) -> i64,
) -> &'a T {
    assert!(
        !population.is_empty(),
        "tournament selection needs a non-empty population"
    );
    assert!(k >= 2, "tournament size must be >= 2");
    let draws: Vec<&T> = (0..k)
        .map(|_| &population[rng.gen_range(0..population.len())])
        .collect();
    let winner = bracket_winner(&draws, |t| key(t));
    draws[winner]
}

/// Index of the winner of a single-elimination bracket over `draws`, in
/// draw order. With a non-power-of-two field, the earliest-drawn entries
/// sit out the first round.
fn bracket_winner<T>(draws: &[&T], key: impl Fn(&T) -> i64) -> usize {
    debug_assert!(!draws.is_empty());
    let byes = draws.len().next_power_of_two() - draws.len();
    let mut round: Vec<usize> = (0..byes).collect();
    for pair in (byes..draws.len()).step_by(2) {
        round.push(play(draws, &key, pair, pair + 1));
    }
    while round.len() > 1 {
        round = round
            .chunks(2)
            .map(|pair| play(draws, &key, pair[0], pair[1]))
            .collect();
    }
    round[0]
}

fn play<T>(draws: &[&T], key: impl Fn(&T) -> i64, a: usize, b: usize) -> usize {
    // `a` was drawn earlier and wins ties.
    if key(draws[b]) > key(draws[a]) {
        b
    } else {
        a
    }
}

/// One-point crossover producing a single offspring: genes `[0, p)` from
/// the first parent, the rest from the second.
pub fn crossover_one_point<R: Rng>(
    parent_a: &Assignment,
    parent_b: &Assignment,
    rng: &mut R,
) -> Assignment {
    assert_eq!(
        parent_a.len(),
        parent_b.len(),
        "crossover parents must have equal length"
    );
    assert!(parent_a.len() >= 2, "crossover needs at least two genes");
    let cut = rng.gen_range(1..parent_a.len());
    crossover_at(parent_a, parent_b, cut)
}

fn crossover_at(parent_a: &Assignment, parent_b: &Assignment, cut: usize) -> Assignment {
    let genes = parent_a.genes()[..cut]
        .iter()
        .chain(&parent_b.genes()[cut..])
        .copied()
        .collect();
    Assignment::new(genes)
}

/// Clone `genotype` and redraw one random gene uniformly over the node
/// range; the redraw may repeat the old value.
pub fn mutate<R: Rng>(genotype: &Assignment, instance: &Instance, rng: &mut R) -> Assignment {
    let position = rng.gen_range(0..genotype.len());
    let value = rng.gen_range(0..instance.node_count());
    genotype.with_move(position, value)
}

/// Remove unstable individuals, each surviving independently with the given
/// probability. Stable individuals and survivor order are untouched.
pub fn cull_unstable<R: Rng>(population: &mut Vec<Individual>, survival_rate: f64, rng: &mut R) {
    population.retain(|ind| ind.stable || rng.gen_bool(survival_rate));
}

/// Remove the `floor(fraction * len)` weakest individuals (ties: the later
/// insertion goes first). The single best individual always survives.
pub fn cull_weakest(population: &mut Vec<Individual>, fraction: f64) {
    assert!((0.0..=1.0).contains(&fraction), "fraction must lie in [0, 1]");
    if population.is_empty() {
        return;
    }
    let count = ((fraction * population.len() as f64).floor() as usize)
        .min(population.len() - 1);
    if count == 0 {
        return;
    }
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by_key(|&i| (population[i].fitness_value, std::cmp::Reverse(i)));
    let mut removed = vec![false; population.len()];
    for &i in &order[..count] {
        removed[i] = true;
    }
    let mut index = 0;
    population.retain(|_| {
        let keep = !removed[index];
        index += 1;
        keep
    });
}

/// Append migrants until the population reaches `limit`. Migrants are
/// rejection-sampled stable genotypes; when the draw cap runs out, a
/// repaired random genotype is appended instead (unstable as a last resort
/// if repair also fails).
pub fn migrate_fill<R: Rng>(
    population: &mut Vec<Individual>,
    instance: &Instance,
    limit: usize,
    rng: &mut R,
    draw_cap: u64,
) {
    while population.len() < limit {
        let genotype = random_stable_genotype(instance, rng, draw_cap)
            .unwrap_or_else(|| repaired_genotype(instance, rng));
        population.push(Individual::evaluate(instance, genotype));
    }
}

/// Fallback migrant: start from a uniform random genotype and repeatedly
/// move a random task off a random overloaded node to the roomiest feasible
/// node, giving up after `l * m` steps.
fn repaired_genotype<R: Rng>(instance: &Instance, rng: &mut R) -> Assignment {
    let mut genes = uniform_genotype(instance, rng);
    let mut usage = UsageTable::new(instance, &genes);
    for _ in 0..instance.task_count() * instance.node_count() {
        let overloaded: Vec<usize> = (0..instance.node_count())
            .filter(|&n| usage.is_overloaded(instance, n))
            .collect();
        if overloaded.is_empty() {
            break;
        }
        let node = overloaded[rng.gen_range(0..overloaded.len())];
        let on_node: Vec<usize> = genes
            .genes()
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == node)
            .map(|(t, _)| t)
            .collect();
        let task = on_node[rng.gen_range(0..on_node.len())];
        if let Some(target) = score::roomiest_feasible_target(&usage, instance, task, node) {
            usage.apply_move(instance, task, node, target);
            genes.set(task, target);
        }
    }
    genes
}

fn uniform_genotype<R: Rng>(instance: &Instance, rng: &mut R) -> Assignment {
    let m = instance.node_count();
    Assignment::new(
        (0..instance.task_count())
            .map(|_| rng.gen_range(0..m))
            .collect(),
    )
}

/// The reinforced evolution strategy.
pub fn evolve_solve(
    instance: &Instance,
    config: &EvolveConfig,
    budget: &SearchBudget,
) -> SolveResult {
    evolve_solve_traced(instance, config, budget, |_| {})
}

/// [`evolve_solve`] with a per-cycle progress callback.
pub fn evolve_solve_traced(
    instance: &Instance,
    config: &EvolveConfig,
    budget: &SearchBudget,
    mut trace: impl FnMut(CycleTrace),
) -> SolveResult {
    config.check();
    let started = Instant::now();
    let max_cost = instance.max_migration_cost();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // The untouched initial assignment is the incumbent baseline; if it is
    // already stable it is optimal at cost zero.
    let baseline = Individual::evaluate(instance, instance.initial_assignment.clone());
    if baseline.stable {
        return finish(instance, Some((0, baseline.genotype)), 0, started);
    }
    let mut best: Option<(u64, Assignment)> = None;

    let limit = config.population_limit;
    let mut population: Vec<Individual> = Vec::with_capacity(limit);
    migrate_fill(
        &mut population,
        instance,
        limit,
        &mut rng,
        config.migration_draw_cap,
    );
    track_best(&mut best, &population, max_cost);

    let clock = BudgetClock::new(budget, started);
    let mut cycles = 0u64;
    while !clock.expired(cycles) {
        cycles += 1;
        let size = population.len();

        // 1. Selection for crossover: pair consecutive tournament winners;
        // an odd trailing winner pairs with one more fresh winner.
        let parent_count = (config.crossover_fraction * size as f64).ceil() as usize;
        let mut parents: Vec<Assignment> = Vec::with_capacity(parent_count + 1);
        for _ in 0..parent_count {
            parents
                .push(tournament_select(&population, config.tournament_size, &mut rng)
                    .genotype
                    .clone());
        }
        if parent_count % 2 == 1 {
            parents
                .push(tournament_select(&population, config.tournament_size, &mut rng)
                    .genotype
                    .clone());
        }
        for pair in parents.chunks(2) {
            let child = if pair[0].len() >= 2 {
                crossover_one_point(&pair[0], &pair[1], &mut rng)
            } else {
                pair[0].clone()
            };
            let individual = Individual::evaluate(instance, child);
            track_one(&mut best, &individual, max_cost);
            population.push(individual);
        }

        // 2. Selection for mutation, uniform over the grown population.
        let mutant_count = (config.mutation_fraction * size as f64).ceil() as usize;
        let picks: Vec<usize> = (0..mutant_count)
            .map(|_| rng.gen_range(0..population.len()))
            .collect();
        for pick in picks {
            let mutant = mutate(&population[pick].genotype, instance, &mut rng);
            let individual = Individual::evaluate(instance, mutant);
            track_one(&mut best, &individual, max_cost);
            population.push(individual);
        }

        // 3. Termination of unstable genotypes.
        cull_unstable(&mut population, config.unstable_survival_rate, &mut rng);

        // 4. Termination of the weakest individuals.
        cull_weakest(&mut population, config.weakest_cull_fraction);

        // 5. Migration back up to the living space.
        let before_fill = population.len();
        migrate_fill(
            &mut population,
            instance,
            limit,
            &mut rng,
            config.migration_draw_cap,
        );
        track_best_from(&mut best, &population[before_fill..], max_cost);

        trace(CycleTrace {
            cycle: cycles,
            population_size: population.len(),
            best_cost: best.as_ref().map(|(cost, _)| *cost),
        });
    }
    finish(instance, best, cycles, started)
}

/// Classic generational GA baseline: uniform random initial population,
/// full replacement each generation, per-gene mutation at rate `1/l`, no
/// culling — unstable individuals merely compete with their fitness pushed
/// below every stable one.
pub fn genetic_solve(
    instance: &Instance,
    config: &EvolveConfig,
    budget: &SearchBudget,
) -> SolveResult {
    genetic_solve_traced(instance, config, budget, |_| {})
}

/// [`genetic_solve`] with a per-generation progress callback.
pub fn genetic_solve_traced(
    instance: &Instance,
    config: &EvolveConfig,
    budget: &SearchBudget,
    mut trace: impl FnMut(CycleTrace),
) -> SolveResult {
    config.check();
    let started = Instant::now();
    let max_cost = instance.max_migration_cost();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let baseline = Individual::evaluate(instance, instance.initial_assignment.clone());
    if baseline.stable {
        return finish(instance, Some((0, baseline.genotype)), 0, started);
    }
    let mut best: Option<(u64, Assignment)> = None;

    let penalized = |ind: &Individual| {
        let fitness = ind.fitness_value as i64;
        if ind.stable {
            fitness
        } else {
            fitness - max_cost as i64
        }
    };

    let limit = config.population_limit;
    let mut population: Vec<Individual> = (0..limit)
        .map(|_| Individual::evaluate(instance, uniform_genotype(instance, &mut rng)))
        .collect();
    track_best(&mut best, &population, max_cost);

    let l = instance.task_count();
    let m = instance.node_count();
    let gene_mutation_rate = 1.0 / l as f64;
    let clock = BudgetClock::new(budget, started);
    let mut generations = 0u64;
    while !clock.expired(generations) {
        generations += 1;
        let mut next = Vec::with_capacity(limit);
        for _ in 0..limit {
            let parent_a =
                tournament_select_by(&population, config.tournament_size, &mut rng, penalized);
            let parent_b =
                tournament_select_by(&population, config.tournament_size, &mut rng, penalized);
            let mut child = if l >= 2 {
                crossover_one_point(&parent_a.genotype, &parent_b.genotype, &mut rng)
            } else {
                parent_a.genotype.clone()
            };
            for gene in 0..l {
                if rng.gen_bool(gene_mutation_rate) {
                    child.set(gene, rng.gen_range(0..m));
                }
            }
            let individual = Individual::evaluate(instance, child);
            track_one(&mut best, &individual, max_cost);
            next.push(individual);
        }
        population = next;
        trace(CycleTrace {
            cycle: generations,
            population_size: population.len(),
            best_cost: best.as_ref().map(|(cost, _)| *cost),
        });
    }
    finish(instance, best, generations, started)
}

struct BudgetClock {
    deadline: Option<Instant>,
    cycle_limit: u64,
}

impl BudgetClock {
    fn new(budget: &SearchBudget, started: Instant) -> Self {
        BudgetClock {
            deadline: (budget.time_limit_ms > 0)
                .then(|| started + std::time::Duration::from_millis(budget.time_limit_ms)),
            cycle_limit: budget.node_limit,
        }
    }

    fn expired(&self, cycles_done: u64) -> bool {
        if self.cycle_limit > 0 && cycles_done >= self.cycle_limit {
            return true;
        }
        self.deadline.is_some_and(|deadline| Instant::now() >= deadline)
    }
}

fn track_best(best: &mut Option<(u64, Assignment)>, population: &[Individual], max_cost: u64) {
    track_best_from(best, population, max_cost);
}

fn track_best_from(
    best: &mut Option<(u64, Assignment)>,
    individuals: &[Individual],
    max_cost: u64,
) {
    for individual in individuals {
        track_one(best, individual, max_cost);
    }
}

fn track_one(best: &mut Option<(u64, Assignment)>, individual: &Individual, max_cost: u64) {
    if !individual.stable {
        return;
    }
    let cost = max_cost - individual.fitness_value;
    if best.as_ref().map_or(true, |(c, _)| cost < *c) {
        *best = Some((cost, individual.genotype.clone()));
    }
}

fn finish(
    instance: &Instance,
    best: Option<(u64, Assignment)>,
    cycles: u64,
    started: Instant,
) -> SolveResult {
    let (best, cost, stable) = match best {
        Some((cost, genes)) => (genes, cost, true),
        None => (instance.initial_assignment.clone(), 0, false),
    };
    SolveResult {
        best,
        cost,
        stable,
        cycles_or_nodes: cycles,
        elapsed_ms: started.elapsed().as_millis() as u64,
        complete: true,
    }
}
