//! Benchmark driver: run a strategy repeatedly on an instance, verify every
//! returned assignment, and aggregate the costs into a report.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::evolution::{self, CycleTrace, EvolveConfig};
use crate::instances::{self, BUILTIN_NAMES};
use crate::model::{Instance, SolveResult};
use crate::strategies::{self, FullscanMode, SearchBudget};

/// The five stock strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Fullscan,
    Greedy,
    Balance,
    Genetic,
    Evolve,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Fullscan => "fullscan",
            StrategyKind::Greedy => "greedy",
            StrategyKind::Balance => "balance",
            StrategyKind::Genetic => "genetic",
            StrategyKind::Evolve => "evolve",
        }
    }

    /// Deterministic strategies ignore seeds; repeated runs are identical.
    pub fn is_deterministic(&self) -> bool {
        matches!(
            self,
            StrategyKind::Fullscan | StrategyKind::Greedy | StrategyKind::Balance
        )
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Builtin fixture name (`test1`..`test3`) or a file path.
    pub instance: String,
    pub strategy: StrategyKind,
    /// Only consulted when `strategy` is fullscan.
    pub fullscan_mode: FullscanMode,
    pub runs: usize,
    pub budget: SearchBudget,
    /// Run `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub population_limit: Option<usize>,
    pub tournament_size: Option<usize>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot load instance {name:?}: {message}")]
    InstanceLoad { name: String, message: String },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("run {run}: solver result failed re-verification")]
    Verification { run: usize },
}

/// Outcome of a single run, cost re-verified against the model.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub cost: u64,
    pub stable: bool,
    pub cycles_or_nodes: u64,
    pub elapsed_ms: u64,
    pub complete: bool,
}

/// Median/average/min/max/sample-stdev of a cost sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub median: f64,
    pub average: f64,
    pub min: u64,
    pub max: u64,
    pub stdev: f64,
}

/// Aggregated experiment results. `stats` is `None` when no run produced a
/// stable assignment (unstable runs carry no defined cost).
#[derive(Debug, Clone)]
pub struct StatsReport {
    pub instance_label: String,
    pub strategy: String,
    pub task_count: usize,
    pub node_count: usize,
    pub search_space: String,
    pub max_migration_cost: u64,
    pub outcomes: Vec<RunOutcome>,
    pub stats: Option<Stats>,
    pub unstable_runs: usize,
}

/// Per-cycle solver progress for one run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub run: usize,
    pub seed: u64,
    pub events: Vec<CycleTrace>,
}

/// Output flavor of [`render_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
}

/// Resolve an instance source: builtin fixture names win, anything else is
/// read from disk.
pub fn load_instance(source: &str) -> Result<Instance, HarnessError> {
    if BUILTIN_NAMES.contains(&source) {
        return Ok(instances::builtin_fixture(source).expect("checked name"));
    }
    let text = std::fs::read_to_string(Path::new(source)).map_err(|e| {
        HarnessError::InstanceLoad {
            name: source.to_string(),
            message: e.to_string(),
        }
    })?;
    instances::parse_instance(&text).map_err(|e| HarnessError::InstanceLoad {
        name: source.to_string(),
        message: e.to_string(),
    })
}

/// Run the experiment and aggregate the results.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<StatsReport, HarnessError> {
    execute(spec, false).map(|(report, _)| report)
}

/// Like [`run_experiment`], also collecting each run's per-cycle trace
/// (empty for the non-evolutionary strategies).
pub fn run_experiment_traced(
    spec: &ExperimentSpec,
) -> Result<(StatsReport, Vec<RunTrace>), HarnessError> {
    execute(spec, true)
}

fn execute(
    spec: &ExperimentSpec,
    collect_traces: bool,
) -> Result<(StatsReport, Vec<RunTrace>), HarnessError> {
    assert!(spec.runs >= 1, "an experiment needs at least one run");
    let instance = load_instance(&spec.instance)?;
    let validation = instance.validate();
    if !validation.is_valid() {
        return Err(HarnessError::InvalidInstance(validation.errors.join("; ")));
    }

    let mut outcomes = Vec::with_capacity(spec.runs);
    let mut traces = Vec::new();
    for run in 0..spec.runs {
        let seed = spec.base_seed.wrapping_add(run as u64);
        let mut events = Vec::new();
        let result = run_once(&instance, spec, seed, collect_traces, &mut events);
        if instance.is_stable(&result.best) != result.stable
            || instance.transformation_cost(&result.best) != result.cost
        {
            return Err(HarnessError::Verification { run });
        }
        outcomes.push(RunOutcome {
            run,
            seed,
            cost: result.cost,
            stable: result.stable,
            cycles_or_nodes: result.cycles_or_nodes,
            elapsed_ms: result.elapsed_ms,
            complete: result.complete,
        });
        if collect_traces {
            traces.push(RunTrace { run, seed, events });
        }
    }

    let mut stable_costs: Vec<u64> = outcomes
        .iter()
        .filter(|o| o.stable)
        .map(|o| o.cost)
        .collect();
    stable_costs.sort_unstable();
    let stats = (!stable_costs.is_empty()).then(|| summarize(&stable_costs));
    let unstable_runs = outcomes.len() - stable_costs.len();

    let report = StatsReport {
        instance_label: spec.instance.clone(),
        strategy: spec.strategy.name().to_string(),
        task_count: instance.task_count(),
        node_count: instance.node_count(),
        search_space: search_space_size(instance.node_count(), instance.task_count()),
        max_migration_cost: instance.max_migration_cost(),
        outcomes,
        stats,
        unstable_runs,
    };
    Ok((report, traces))
}

fn run_once(
    instance: &Instance,
    spec: &ExperimentSpec,
    seed: u64,
    collect_traces: bool,
    events: &mut Vec<CycleTrace>,
) -> SolveResult {
    match spec.strategy {
        StrategyKind::Fullscan => {
            strategies::fullscan_solve(instance, &spec.budget, spec.fullscan_mode)
        }
        StrategyKind::Greedy => strategies::greedy_solve(instance),
        StrategyKind::Balance => strategies::balance_solve(instance),
        StrategyKind::Genetic | StrategyKind::Evolve => {
            let mut config = EvolveConfig::for_instance(instance);
            if let Some(limit) = spec.population_limit {
                config.population_limit = limit;
            }
            if let Some(k) = spec.tournament_size {
                config.tournament_size = k;
            }
            config.seed = seed;
            let trace = |t: CycleTrace| {
                if collect_traces {
                    events.push(t);
                }
            };
            if spec.strategy == StrategyKind::Evolve {
                evolution::evolve_solve_traced(instance, &config, &spec.budget, trace)
            } else {
                evolution::genetic_solve_traced(instance, &config, &spec.budget, trace)
            }
        }
    }
}

/// Median, mean, extremes and sample standard deviation (n-1 denominator,
/// zero for a single element) of a non-empty cost sample.
pub fn summarize(costs: &[u64]) -> Stats {
    assert!(!costs.is_empty(), "summarize needs a non-empty sample");
    let mut sorted = costs.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    };
    let average = sorted.iter().sum::<u64>() as f64 / n as f64;
    let stdev = if n == 1 {
        0.0
    } else {
        let spread: f64 = sorted
            .iter()
            .map(|&c| {
                let d = c as f64 - average;
                d * d
            })
            .sum();
        (spread / (n - 1) as f64).sqrt()
    };
    Stats {
        median,
        average,
        min: sorted[0],
        max: sorted[n - 1],
        stdev,
    }
}

/// `node_count ^ task_count` rendered as a three-significant-digit
/// decimal exponent string such as `1.10E+12`.
pub fn search_space_size(node_count: usize, task_count: usize) -> String {
    assert!(node_count >= 1);
    let lg = task_count as f64 * (node_count as f64).log10();
    let mut exponent = lg.floor() as i64;
    let mut mantissa = 10f64.powf(lg - exponent as f64);
    if mantissa >= 9.995 {
        mantissa /= 10.0;
        exponent += 1;
    }
    format!("{mantissa:.2}E+{exponent:02}")
}

/// Render a report as an aligned table or a single CSV record.
pub fn render_report(report: &StatsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Table => render_table(report),
    }
}

const CSV_HEADER: &str =
    "instance,strategy,tasks,nodes,search_space,max_migration_cost,runs,stable_runs,med,avg,min,max,stdev";

fn render_csv(report: &StatsReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let stable_runs = report.outcomes.len() - report.unstable_runs;
    let stats = match &report.stats {
        Some(s) => format!("{},{},{},{},{}", s.median, s.average, s.min, s.max, s.stdev),
        None => ",,,,".to_string(),
    };
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{}\n",
        report.instance_label,
        report.strategy,
        report.task_count,
        report.node_count,
        report.search_space,
        report.max_migration_cost,
        report.outcomes.len(),
        stable_runs,
        stats
    ));
    out
}

fn render_table(report: &StatsReport) -> String {
    let mut out = String::new();
    let mut row = |key: &str, value: fmt::Arguments| {
        out.push_str(&format!("{key:<20}{value}\n"));
    };
    row(
        "instance",
        format_args!(
            "{} ({} tasks, {} nodes)",
            report.instance_label, report.task_count, report.node_count
        ),
    );
    row("strategy", format_args!("{}", report.strategy));
    row("search space", format_args!("{}", report.search_space));
    row(
        "max migration cost",
        format_args!("{}", report.max_migration_cost),
    );
    row(
        "runs",
        format_args!(
            "{} ({} stable, {} unstable)",
            report.outcomes.len(),
            report.outcomes.len() - report.unstable_runs,
            report.unstable_runs
        ),
    );
    match &report.stats {
        Some(s) => {
            row("cost med", format_args!("{}", s.median));
            row("cost avg", format_args!("{:.2}", s.average));
            row("cost min", format_args!("{}", s.min));
            row("cost max", format_args!("{}", s.max));
            row("cost stdev", format_args!("{:.2}", s.stdev));
        }
        None => {
            row(
                "warning",
                format_args!("no stable runs; cost statistics unavailable"),
            );
        }
    }
    let costs: Vec<String> = report
        .outcomes
        .iter()
        .map(|o| {
            if o.stable {
                o.cost.to_string()
            } else {
                "unstable".to_string()
            }
        })
        .collect();
    row("costs", format_args!("{}", costs.join(" ")));
    let incomplete = report.outcomes.iter().filter(|o| !o.complete).count();
    if incomplete > 0 {
        row(
            "note",
            format_args!("{incomplete} run(s) hit the budget before finishing"),
        );
    }
    out
}

/// Render per-run traces as CSV (`best_cost` empty until a stable genotype
/// has been seen).
pub fn render_trace(traces: &[RunTrace]) -> String {
    let mut out = String::from("run,seed,cycle,population,best_cost\n");
    for trace in traces {
        for event in &trace.events {
            let best = event
                .best_cost
                .map(|c| c.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                trace.run, trace.seed, event.cycle, event.population_size, best
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn greedy_spec(runs: usize) -> ExperimentSpec {
        ExperimentSpec {
            instance: "test1".to_string(),
            strategy: StrategyKind::Greedy,
            fullscan_mode: FullscanMode::BranchAndBound,
            runs,
            budget: SearchBudget::UNLIMITED,
            base_seed: 0,
            population_limit: None,
            tournament_size: None,
        }
    }

    #[test]
    fn deterministic_strategy_repeats_identically() {
        let report = run_experiment(&greedy_spec(3)).unwrap();
        assert_eq!(report.outcomes.len(), 3);
        let first = report.outcomes[0].cost;
        assert!(report.outcomes.iter().all(|o| o.cost == first && o.stable));
        let stats = report.stats.unwrap();
        assert_eq!(stats.stdev, 0.0);
        assert_eq!(stats.min, stats.max);
    }

    #[test]
    fn summarize_single_element() {
        let stats = summarize(&[5]);
        assert_eq!(stats.median, 5.0);
        assert_eq!(stats.average, 5.0);
        assert_eq!(stats.min, 5);
        assert_eq!(stats.max, 5);
        assert_eq!(stats.stdev, 0.0);
    }

    #[test]
    fn summarize_even_sample() {
        let stats = summarize(&[1, 2, 3, 4]);
        assert_eq!(stats.median, 2.5);
        assert_eq!(stats.average, 2.5);
        // Sample stdev of 1..4 is sqrt(5/3).
        assert!((stats.stdev - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((stats.stdev - 1.2910).abs() < 5e-5);
    }

    #[test]
    fn summarize_constant_sample() {
        let stats = summarize(&[7, 7, 7]);
        assert_eq!(stats.stdev, 0.0);
        assert_eq!(stats.median, 7.0);
    }

    #[test]
    fn summarize_is_order_independent() {
        let a = summarize(&[9, 1, 5, 3]);
        let b = summarize(&[1, 3, 5, 9]);
        assert_eq!(a, b);
    }

    #[test]
    fn search_space_sizes_match_the_known_instances() {
        assert_eq!(search_space_size(4, 20), "1.10E+12");
        assert_eq!(search_space_size(5, 25), "2.98E+17");
        assert_eq!(search_space_size(6, 30), "2.21E+23");
        assert_eq!(search_space_size(7, 35), "3.79E+29");
        assert_eq!(search_space_size(8, 40), "1.33E+36");
        assert_eq!(search_space_size(1, 5), "1.00E+00");
    }

    #[test]
    fn csv_header_starts_with_instance() {
        let report = run_experiment(&greedy_spec(1)).unwrap();
        let csv = render_report(&report, ReportFormat::Csv);
        let header = csv.lines().next().unwrap();
        assert_eq!(header.split(',').next().unwrap(), "instance");
    }

    #[test]
    fn csv_roundtrips_numerically() {
        let report = run_experiment(&greedy_spec(2)).unwrap();
        let csv = render_report(&report, ReportFormat::Csv);
        let data = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = data.split(',').collect();
        let stats = report.stats.unwrap();
        assert_eq!(fields[5].parse::<u64>().unwrap(), 104);
        assert_eq!(fields[8].parse::<f64>().unwrap(), stats.median);
        assert_eq!(fields[9].parse::<f64>().unwrap(), stats.average);
        assert_eq!(fields[12].parse::<f64>().unwrap(), stats.stdev);
    }

    #[test]
    fn table_contains_the_max_migration_cost() {
        let report = run_experiment(&greedy_spec(1)).unwrap();
        let table = render_report(&report, ReportFormat::Table);
        assert!(table.contains("104"));
        assert!(table.contains("1.10E+12"));
    }

    #[test]
    fn missing_instance_file_is_an_error() {
        let mut spec = greedy_spec(1);
        spec.instance = "/nonexistent/path.txt".to_string();
        let err = run_experiment(&spec).unwrap_err();
        assert!(matches!(err, HarnessError::InstanceLoad { .. }));
    }

    #[test]
    fn evolve_runs_vary_with_their_seeds_but_replay_identically() {
        let spec = ExperimentSpec {
            instance: "test1".to_string(),
            strategy: StrategyKind::Evolve,
            fullscan_mode: FullscanMode::BranchAndBound,
            runs: 3,
            budget: SearchBudget::cycles(30),
            base_seed: 10,
            population_limit: None,
            tournament_size: None,
        };
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(
            render_report(&a, ReportFormat::Csv),
            render_report(&b, ReportFormat::Csv)
        );
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.cost, y.cost);
            assert_eq!(x.seed, y.seed);
        }
    }

    #[test]
    fn traces_cover_every_cycle() {
        let spec = ExperimentSpec {
            instance: "test1".to_string(),
            strategy: StrategyKind::Evolve,
            fullscan_mode: FullscanMode::BranchAndBound,
            runs: 2,
            budget: SearchBudget::cycles(8),
            base_seed: 0,
            population_limit: None,
            tournament_size: None,
        };
        let (_, traces) = run_experiment_traced(&spec).unwrap();
        assert_eq!(traces.len(), 2);
        for trace in &traces {
            assert_eq!(trace.events.len(), 8);
            assert_eq!(trace.events.last().unwrap().cycle, 8);
        }
        let rendered = render_trace(&traces);
        assert!(rendered.starts_with("run,seed,cycle,population,best_cost\n"));
        assert_eq!(rendered.lines().count(), 1 + 16);
    }
}
