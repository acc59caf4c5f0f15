use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, ValueEnum};

use dres::harness::{
    render_report, render_trace, run_experiment, run_experiment_traced, ExperimentSpec,
    ReportFormat, StrategyKind,
};
use dres::{FullscanMode, SearchBudget};

/// Default cycle budget applied to the evolutionary strategies when no
/// budget is given, so a bare invocation terminates.
const DEFAULT_CYCLE_LIMIT: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "dres",
    about = "Benchmark solvers for the d-resource system optimization problem",
    long_about = "Runs one of the five strategies (fullscan, greedy, balance, genetic, evolve)\n\
                  against a builtin instance (test1, test2, test3) or an instance file, and\n\
                  reports Fig-style cost statistics over repeated runs."
)]
struct Cli {
    /// Builtin instance name (test1, test2, test3) or instance file path
    #[arg(long)]
    instance: String,

    /// Strategy to run
    #[arg(long, value_enum)]
    strategy: StrategyArg,

    /// Number of runs; run i uses seed <seed>+i
    #[arg(long, default_value_t = 1)]
    runs: usize,

    /// Wall-clock budget per run in milliseconds (0 = unlimited)
    #[arg(long, default_value_t = 0)]
    time_limit_ms: u64,

    /// Work budget per run: evolution cycles, or search-tree nodes for
    /// fullscan (0 = unlimited; genetic/evolve default to 10000 cycles when
    /// neither budget is set)
    #[arg(long, default_value_t = 0)]
    cycle_limit: u64,

    /// Base RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Override the population living space (default: 2 * tasks * nodes)
    #[arg(long)]
    population_limit: Option<usize>,

    /// Override the tournament size (default: 4)
    #[arg(long)]
    tournament_size: Option<usize>,

    /// Report format
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,

    /// Report destination: a file path or "stdout"
    #[arg(long, default_value = "stdout")]
    output: String,

    /// Write a per-cycle best-cost trace (CSV) to this path
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Fullscan search mode
    #[arg(long, value_enum, default_value_t = FullscanModeArg::Bnb)]
    fullscan_mode: FullscanModeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Fullscan,
    Greedy,
    Balance,
    Genetic,
    Evolve,
}

impl From<StrategyArg> for StrategyKind {
    fn from(arg: StrategyArg) -> Self {
        match arg {
            StrategyArg::Fullscan => StrategyKind::Fullscan,
            StrategyArg::Greedy => StrategyKind::Greedy,
            StrategyArg::Balance => StrategyKind::Balance,
            StrategyArg::Genetic => StrategyKind::Genetic,
            StrategyArg::Evolve => StrategyKind::Evolve,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FullscanModeArg {
    Exhaustive,
    Bnb,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let strategy: StrategyKind = cli.strategy.into();

    let mut budget = SearchBudget {
        time_limit_ms: cli.time_limit_ms,
        node_limit: cli.cycle_limit,
    };
    if !strategy.is_deterministic() && budget == SearchBudget::UNLIMITED {
        budget.node_limit = DEFAULT_CYCLE_LIMIT;
        eprintln!("note: no budget given; defaulting to {DEFAULT_CYCLE_LIMIT} cycles per run");
    }

    let spec = ExperimentSpec {
        instance: cli.instance,
        strategy,
        fullscan_mode: match cli.fullscan_mode {
            FullscanModeArg::Exhaustive => FullscanMode::Exhaustive,
            FullscanModeArg::Bnb => FullscanMode::BranchAndBound,
        },
        runs: cli.runs,
        budget,
        base_seed: cli.seed,
        population_limit: cli.population_limit,
        tournament_size: cli.tournament_size,
    };

    let report = if let Some(trace_path) = &cli.trace {
        let (report, traces) = run_experiment_traced(&spec)?;
        std::fs::write(trace_path, render_trace(&traces))
            .with_context(|| format!("cannot write trace to {}", trace_path.display()))?;
        report
    } else {
        run_experiment(&spec)?
    };

    let rendered = render_report(
        &report,
        match cli.format {
            FormatArg::Table => ReportFormat::Table,
            FormatArg::Csv => ReportFormat::Csv,
        },
    );
    if cli.output == "stdout" {
        print!("{rendered}");
    } else {
        std::fs::write(&cli.output, rendered)
            .with_context(|| format!("cannot write report to {}", cli.output))?;
    }
    Ok(())
}
