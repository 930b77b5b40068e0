use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use zipfks::io::{fit_bespoke, fit_with_table, level_label};
use zipfks::montecarlo::{CellReport, DEFAULT_REPETITIONS, DEFAULT_REPLICATES};
use zipfks::table::reference;
use zipfks::{
    build_table, load_table, parse_observations, CutoffTable, Engine, SimulationConfig, SupportSpec,
    DEFAULT_LEVELS,
};

/// Exit status for bad flags and every other failure.
const EXIT_USAGE: u8 = 2;

/// Fit discrete power laws and test them with Monte Carlo Kolmogorov-Smirnov cutoffs.
#[derive(Debug, Parser)]
#[command(name = "zipfks", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate KS cutoffs over a grid of sample sizes and exponents.
    Simulate(SimulateArgs),
    /// Fit an exponent to observations and judge the fit.
    Fit(FitArgs),
    /// Simulate the full reference grid for one support.
    Tables(TablesArgs),
}

#[derive(Debug, Args)]
struct SimulationFlags {
    /// Replicates per repetition.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    /// Independent repetitions to average.
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    reps: u32,
    /// Base seed; a time-derived seed is used (and printed) if absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all available).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    n: Vec<usize>,
    /// Generating exponents, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    gamma: Vec<f64>,
    /// Support size K, or `inf`.
    #[arg(long)]
    k: SupportSpec,
    /// Quantile levels, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
    quantiles: Vec<f64>,
    /// Output CSV (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// With `--k inf`: draw replicates from the model truncated at this value.
    #[arg(long)]
    gen_cap: Option<u32>,
    #[command(flatten)]
    sim: SimulationFlags,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("cutoffs").required(true).args(["table", "bespoke"])))]
struct FitArgs {
    /// Whitespace-separated positive integers.
    #[arg(long)]
    input: PathBuf,
    /// Declared support size K, or `inf`.
    #[arg(long)]
    k: SupportSpec,
    /// Cutoff table CSV to look the fit up in.
    #[arg(long, conflicts_with_all = ["replicates", "reps", "seed", "workers"])]
    table: Option<PathBuf>,
    /// Simulate cutoffs at the fitted exponent and the exact sample size.
    #[arg(long)]
    bespoke: bool,
    /// Print flat key=value lines instead of the report.
    #[arg(long)]
    machine: bool,
    #[command(flatten)]
    sim: SimulationFlags,
}

#[derive(Debug, Args)]
struct TablesArgs {
    /// Support size K, or `inf`.
    #[arg(long)]
    k: SupportSpec,
    /// Print the bundled published-scale table instead of simulating.
    #[arg(long, conflicts_with_all = ["replicates", "reps", "seed", "workers"])]
    published: bool,
    /// Output CSV (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sim: SimulationFlags,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit(args),
        Command::Tables(args) => tables(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn seed_or_time(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        eprintln!("warning: no --seed given, using {nanos}; pass --seed {nanos} to reproduce this run");
        nanos
    })
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, String> {
    let custom_levels = args.quantiles != DEFAULT_LEVELS;
    if custom_levels && args.out.is_some() {
        return Err(format!(
            "table files hold exactly the levels {DEFAULT_LEVELS:?}; drop --out to print other levels"
        ));
    }
    let mut template = SimulationConfig::new(args.n[0], args.k, args.gamma[0], seed_or_time(args.sim.seed))
        .with_replicates(args.sim.replicates, args.sim.reps);
    template.levels = args.quantiles;
    template.generation_cap = args.gen_cap;
    for &gamma in &args.gamma {
        SimulationConfig { gamma, ..template.clone() }
            .validate()
            .map_err(|e| e.to_string())?;
    }
    let table = run_grid(&args.n, &args.gamma, &template, args.sim.workers, args.out.is_none())?;
    if custom_levels {
        print_levels(&table);
        return Ok(ExitCode::SUCCESS);
    }
    emit_csv(&table, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn tables(args: TablesArgs) -> Result<ExitCode, String> {
    let table = if args.published {
        reference::table(args.k)
            .ok_or_else(|| format!("no bundled table for K = {}; try one of 20, 50, 100, 500, 1000, inf", args.k))?
    } else {
        let gammas = reference::gammas(args.k);
        let template = SimulationConfig::new(10, args.k, gammas[0], seed_or_time(args.sim.seed))
            .with_replicates(args.sim.replicates, args.sim.reps);
        template.validate().map_err(|e| e.to_string())?;
        run_grid(&reference::SAMPLE_SIZES, gammas, &template, args.sim.workers, args.out.is_none())?
    };
    emit_csv(&table, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

/// Runs the grid, reporting each cell on standard output, or on standard
/// error when the table itself goes to standard output.
fn run_grid(
    ns: &[usize],
    gammas: &[f64],
    template: &SimulationConfig,
    workers: Option<usize>,
    report_to_stderr: bool,
) -> Result<CutoffTable, String> {
    let engine = Engine::new(workers).map_err(|e| e.to_string())?;
    let report = |line: String| {
        if report_to_stderr {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    };
    report(format!(
        "K = {}, {} replicates x {} repetitions, seed {}, {} workers",
        template.support,
        template.replicates,
        template.repetitions,
        template.base_seed,
        engine.workers()
    ));
    let start = Instant::now();
    let table = build_table(ns, gammas, template, &engine, |cell: &CellReport| {
        let mut line = format!("gamma={:<5} n={:<6}", cell.gamma, cell.n);
        for (q, c) in cell.result.levels.iter().zip(&cell.result.cutoffs) {
            line.push_str(&format!(" {}={c:.4}", level_label(*q)));
        }
        if cell.result.retried > 0 {
            line.push_str(&format!(" retried={}", cell.result.retried));
        }
        line.push_str(&format!("  {:.2}s", cell.elapsed.as_secs_f64()));
        report(line);
    })
    .map_err(|e| e.to_string())?;
    report(format!("total {:.2}s", start.elapsed().as_secs_f64()));
    Ok(table)
}

fn print_levels(table: &CutoffTable) {
    let labels: Vec<String> = table.levels.iter().map(|&q| level_label(q)).collect();
    println!("k_support,gamma,n,{}", labels.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.cutoffs.iter().map(f64::to_string).collect();
        println!("{},{},{},{}", table.support, row.gamma, row.n, cells.join(","));
    }
}

fn emit_csv(table: &CutoffTable, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => table.write(path).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let text = table.to_csv().map_err(|e| e.to_string())?;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

fn fit(args: FitArgs) -> Result<ExitCode, String> {
    let sample = parse_observations(&args.input).map_err(|e| e.to_string())?;
    let report = match &args.table {
        Some(path) => {
            let table = load_table(path).map_err(|e| format!("{}: {e}", path.display()))?;
            fit_with_table(&sample, args.k, &table, &path.display().to_string())
        }
        None => {
            let engine = Engine::new(args.sim.workers).map_err(|e| e.to_string())?;
            let seed = seed_or_time(args.sim.seed);
            fit_bespoke(&sample, args.k, args.sim.replicates, args.sim.reps, seed, &engine)
        }
    }
    .map_err(|e| e.to_string())?;

    if args.machine {
        print!("{}", report.render_machine());
    } else {
        print!("{}", report.render_human());
    }
    Ok(if report.rejected() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}
