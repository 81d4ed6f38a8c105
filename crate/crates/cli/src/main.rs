use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ctsmapf::bench::{self, BenchGrid, MapSpec};
use ctsmapf::maps::MapKind;
use ctsmapf::rng;
use ctsmapf::solver::{self, LnsLimit, SolverConfig, Variant, DEFAULT_LNS_ITERATIONS};
use ctsmapf::{generate_instance, validate, DistCache, GridGraph, GridMap, JointPlan, Scenario};

#[derive(Parser)]
#[command(name = "ctsmapf", version, about = "Collaborative task sequencing + MAPF solver and benchmark harness")]
struct Cli {
    /// Log solver internals (lock releases, LNS iterations) to stderr
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario; prints the result record as JSON
    Solve(SolveArgs),
    /// Run a benchmark grid and write one CSV row per (instance, variant)
    Bench(BenchArgs),
    /// Generate scenario files
    Gen(GenArgs),
    /// Check a plan trace against a scenario
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Map file, or a builtin map name (empty, random, room, maze)
    #[arg(long)]
    map: String,
    #[arg(long)]
    scen: PathBuf,
    #[arg(long, default_value = "v3")]
    variant: Variant,
    /// Seconds
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// LNS iterations per sequence
    #[arg(long, conflicts_with = "lns_time")]
    lns_iters: Option<usize>,
    /// LNS seconds per sequence
    #[arg(long)]
    lns_time: Option<f64>,
    /// Stop after this many joint sequences
    #[arg(long)]
    max_sequences: Option<usize>,
    /// Disable lock release (plain task-aware PIBT)
    #[arg(long)]
    no_lock_release: bool,
    /// Where to write the plan trace
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid config (key = value lines)
    config: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// CSV output; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's root seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    /// Map file, or a builtin map name (empty, random, room, maze)
    #[arg(long)]
    map: String,
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    tasks: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Map file, or a builtin map name (empty, random, room, maze)
    #[arg(long)]
    map: String,
    #[arg(long)]
    scen: PathBuf,
    /// Plan trace written by `solve`
    #[arg(long)]
    plan: PathBuf,
}

/// Failure that is not an input error: exit code 2.
struct Failed;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.trace { log::LevelFilter::Trace } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    let run = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match run {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Builtin names resolve the same way as in bench grids so that `gen` and
/// `solve` reproduce bench instances. `root_seed` is the grid seed.
fn load_map(arg: &str, root_seed: u64) -> Result<GridMap> {
    let spec = if Path::new(arg).exists() {
        MapSpec::File(arg.into())
    } else {
        match arg.parse::<MapKind>() {
            Ok(k) => MapSpec::Builtin(k),
            Err(_) => bail!("map file {arg:?} not found"),
        }
    };
    Ok(spec.load(root_seed, None)?)
}

fn load_scenario(path: &Path, map: &GridMap) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::parse(&text, map).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_solve(a: SolveArgs) -> Result<Result<(), Failed>> {
    let map = load_map(&a.map, 0)?;
    let scenario = load_scenario(&a.scen, &map)?;
    if !(a.time_limit > 0.0 && a.time_limit.is_finite()) {
        bail!("--time-limit must be a positive number of seconds");
    }
    let lns = match (a.lns_iters, a.lns_time) {
        (_, Some(s)) => LnsLimit::Seconds(s),
        (Some(n), None) => LnsLimit::Iterations(n),
        (None, None) => LnsLimit::Iterations(DEFAULT_LNS_ITERATIONS),
    };
    let config = SolverConfig {
        time_limit: Duration::from_secs_f64(a.time_limit),
        lns,
        lock_release: !a.no_lock_release,
        seed: a.seed,
        max_sequences: a.max_sequences,
        ..SolverConfig::new(a.variant)
    };
    config.check()?;

    let graph = Arc::new(GridGraph::new(map));
    let dist = DistCache::new(graph.clone());
    let result = solver::solve(&scenario, &dist, &config);
    if let (Some(out), Some(plan)) = (&a.out, &result.best_plan) {
        fs::write(out, plan.to_trace(graph.map())).with_context(|| format!("writing {}", out.display()))?;
    }
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(if result.success { Ok(()) } else { Err(Failed) })
}

fn cmd_bench(a: BenchArgs) -> Result<Result<(), Failed>> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut grid = BenchGrid::parse(&text).with_context(|| format!("parsing {}", a.config.display()))?;
    if let Some(s) = a.seed {
        grid.seed = s;
    }
    if a.workers == 0 {
        bail!("--workers must be positive");
    }
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout()),
    };
    let mut csv = bench::csv_writer(sink)?;
    let base = a.config.parent();
    let rows = bench::run_grid(&grid, a.workers, base, |row| {
        csv.serialize(row)?;
        csv.flush()?;
        Ok(())
    })?;
    drop(csv);

    let mut report: Box<dyn Write> = if a.out.is_some() { Box::new(io::stdout()) } else { Box::new(io::stderr()) };
    for s in bench::aggregate(&rows) {
        writeln!(report, "{s}")?;
    }
    Ok(Ok(()))
}

fn cmd_gen(a: GenArgs) -> Result<Result<(), Failed>> {
    let map = load_map(&a.map, a.seed)?;
    let name = match a.map.parse::<MapKind>() {
        Ok(k) if !Path::new(&a.map).exists() => k.name().to_string(),
        _ => Path::new(&a.map).file_stem().map_or("map".into(), |s| s.to_string_lossy().into_owned()),
    };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    if !Path::new(&a.map).exists() {
        fs::write(a.out.join(format!("{name}.map")), map.to_text())?;
    }
    for idx in 0..a.count {
        let coords = [rng::name_key(&name), a.agents as u64, a.tasks as u64, idx as u64];
        let seed = rng::derive_seed(a.seed, rng::purpose::GENERATE, &coords);
        let scenario = generate_instance(&map, a.agents, a.tasks, seed)?;
        let path = a.out.join(format!("{name}-n{}-m{}-{seed:016x}.scen", a.agents, a.tasks));
        fs::write(&path, scenario.to_text(&map)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Ok(()))
}

fn cmd_validate(a: ValidateArgs) -> Result<Result<(), Failed>> {
    let map = load_map(&a.map, 0)?;
    let scenario = load_scenario(&a.scen, &map)?;
    let text = fs::read_to_string(&a.plan).with_context(|| format!("reading {}", a.plan.display()))?;
    let plan = JointPlan::parse_trace(&text, &map).with_context(|| format!("parsing {}", a.plan.display()))?;
    let graph = GridGraph::new(map);
    match validate(&plan, &scenario, &graph) {
        Ok(()) => {
            println!("ok: flowtime {} makespan {}", fmt(plan.flowtime()), fmt(plan.makespan()));
            Ok(Ok(()))
        }
        Err(violations) => {
            for v in &violations {
                println!("violation: {v}");
            }
            Ok(Err(Failed))
        }
    }
}

fn fmt(x: Option<usize>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}
