use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use mamt_core::engine::DEFAULT_STEP_CAP;
use mamt_core::metrics::{self, write_csv, BatchSummary};
use mamt_core::render::{ascii_grid, replay_frames, svg_chart, svg_frame, text_frame, ChartMetric};
use mamt_core::sweep::threads_from_env;
use mamt_core::trace::{read_trace, write_trace};
use mamt_core::{
    aggregate, compute_metrics, generate_geometric_maze, generate_grid_maze, parse_maze, run_sweep, run_trial,
    serialize_maze, GridSize, MazeGraph, SolverKind, StrategyKind, SweepSpec, TrialConfig,
};

#[derive(Parser)]
#[command(name = "mamt", version, about = "Multi-agent maze traversal simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a maze file
    Generate(GenerateArgs),
    /// Run a single trial
    Run(RunArgs),
    /// Run a sweep and write the metrics CSV
    Batch(BatchArgs),
    /// Render the frames of a recorded trace
    Replay(ReplayArgs),
    /// Check a maze file
    Validate { file: PathBuf },
}

fn parse_grid(s: &str) -> Result<GridSize, String> {
    let g: GridSize = s.parse()?;
    if g.width * g.height < 2 {
        return Err(format!(
            "grid {g} has fewer than two cells, so start and goal cannot differ"
        ));
    }
    Ok(g)
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MazeSource {
    /// Maze file
    #[arg(long)]
    maze: Option<PathBuf>,
    /// Generate a grid maze of this size, e.g. 10x10
    #[arg(long, value_parser = parse_grid)]
    grid: Option<GridSize>,
    /// Generate a geometric maze with this many nodes
    #[arg(long)]
    geometric: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_grid, conflicts_with = "geometric", required_unless_present = "geometric")]
    grid: Option<GridSize>,
    #[arg(long)]
    geometric: Option<usize>,
    /// Region of the geometric layout
    #[arg(long, value_parser = parse_grid, default_value = "100x100")]
    region: GridSize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print an ASCII picture of grid mazes
    #[arg(long)]
    ascii: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: MazeSource,
    /// Seed of a generated maze
    #[arg(long, default_value_t = 0)]
    maze_seed: u64,
    /// Number of agents
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "mamt")]
    strategy: StrategyKind,
    #[arg(long, default_value = "dfs")]
    solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    step_cap: u64,
    /// Write the event trace (JSON lines) to this file
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Check the protocol invariants after every step
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// Flat `key = value` file; keys are the long flag names below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_grid, value_delimiter = ',', action = ArgAction::Set, default_value = "10x10")]
    sizes: Vec<GridSize>,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "1,5,25,50,100,200,300")]
    agents: Vec<usize>,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "mamt")]
    strategies: Vec<StrategyKind>,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "dfs")]
    solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    step_cap: u64,
    /// CSV output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for makespan.svg and fuel.svg
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Print per-group medians to stderr
    #[arg(long)]
    summary: bool,
}

#[derive(Args)]
struct ReplayArgs {
    /// Trace file written by `run --trace`
    trace: PathBuf,
    /// Maze the trace was recorded on
    #[arg(long)]
    maze: PathBuf,
    /// Write one SVG per frame into this directory instead of printing
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Render every k-th frame (the last frame is always rendered)
    #[arg(long, default_value_t = 1)]
    every: usize,
}

fn main() -> ExitCode {
    let cli = match parse_cli() {
        Ok(cli) => cli,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Parses the command line. A batch config file is expanded into flags;
/// keys also given as explicit flags are dropped so the flags win.
fn parse_cli() -> Result<Cli> {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&args);
    let Command::Batch(batch) = &cli.command else {
        return Ok(cli);
    };
    let Some(path) = &batch.config else { return Ok(cli) };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let from_file = config_flags(&text).with_context(|| format!("in {}", path.display()))?;
    let at = args.iter().position(|a| a == "batch").expect("batch subcommand") + 1;
    let flag_name = |a: &str| {
        a.strip_prefix("--")
            .map(|f| f.split('=').next().unwrap_or(f).to_string())
    };
    let explicit: Vec<String> = args[at..].iter().filter_map(|a| flag_name(a)).collect();
    let mut merged = args[..at].to_vec();
    merged.extend(
        from_file
            .into_iter()
            .filter(|f| !explicit.contains(&flag_name(f).unwrap_or_default())),
    );
    merged.extend_from_slice(&args[at..]);
    Ok(Cli::parse_from(merged))
}

fn config_flags(text: &str) -> Result<Vec<String>> {
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`", i + 1);
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        match key.as_str() {
            "config" => bail!("line {}: config files cannot nest", i + 1),
            "summary" => {
                if value == "true" {
                    flags.push("--summary".to_string());
                }
            }
            _ => flags.push(format!("--{key}={value}")),
        }
    }
    Ok(flags)
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run(args),
        Command::Batch(args) => batch(args),
        Command::Replay(args) => replay(args),
        Command::Validate { file } => validate(&file),
    }
}

fn load_maze(path: &Path) -> Result<MazeGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_maze(&text).with_context(|| format!("invalid maze file {}", path.display()))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(bytes).context("writing to stdout"),
    }
}

fn generate(args: GenerateArgs) -> Result<u8> {
    let maze = match (args.grid, args.geometric) {
        (Some(g), _) => generate_grid_maze(g.width, g.height, args.seed)?,
        (None, Some(n)) => {
            generate_geometric_maze(n, args.seed, (args.region.width as f64, args.region.height as f64))?
        }
        (None, None) => unreachable!("clap requires a maze kind"),
    };
    write_output(args.out.as_deref(), serialize_maze(&maze).as_bytes())?;
    let counts = format!(
        "nodes={} edges={} start={} goal={} d={}",
        maze.node_count(),
        maze.edge_count(),
        maze.start(),
        maze.goal(),
        maze.optimal_distance()
    );
    if args.out.is_some() {
        println!("{counts}");
    } else {
        eprintln!("{counts}");
    }
    if args.ascii {
        if let Some(pic) = ascii_grid(&maze, None) {
            eprint!("{pic}");
        }
    }
    Ok(0)
}

fn run(args: RunArgs) -> Result<u8> {
    let source = &args.source;
    let maze = if let Some(path) = &source.maze {
        load_maze(path)?
    } else if let Some(g) = source.grid {
        generate_grid_maze(g.width, g.height, args.maze_seed)?
    } else {
        let n = source.geometric.expect("clap requires a maze source");
        generate_geometric_maze(n, args.maze_seed, (100.0, 100.0))?
    };
    let mut config = TrialConfig::new(Arc::new(maze), args.n, args.strategy, args.solver, args.seed);
    config.step_cap = args.step_cap;
    config.trace = args.trace.is_some();
    config.check_invariants = args.check;
    let result = run_trial(config)?;

    match compute_metrics(&result) {
        Some(m) => println!("{} makespan={} avg_fuel={:?}", result.status, m.makespan, m.avg_fuel),
        None => println!("{} ticks={}", result.status, result.ticks),
    }
    let head = result.head_arrival_step.map_or("-".to_string(), |k| k.to_string());
    println!("fuel={:?} head_arrival={head}", result.per_agent_fuel);
    for (tick, v) in &result.violations {
        eprintln!("violation at k={tick}: {} ({v})", v.kind());
    }
    if let (Some(path), Some(trace)) = (&args.trace, &result.trace) {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = io::BufWriter::new(file);
        write_trace(&mut out, trace)?;
        out.flush()?;
    }
    Ok(result.status.exit_code() as u8)
}

fn batch(args: BatchArgs) -> Result<u8> {
    let spec = SweepSpec {
        sizes: args.sizes,
        agents: args.agents,
        strategies: args.strategies,
        solvers: args.solvers,
        trials: args.trials,
        base_seed: args.seed,
        step_cap: args.step_cap,
    };
    let rows = run_sweep(&spec, threads_from_env())?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &rows)?;
    write_output(args.out.as_deref(), &csv)?;

    let summaries = aggregate(&rows);
    if args.summary {
        for line in summary_lines(&summaries) {
            eprintln!("{line}");
        }
    }
    if let Some(dir) = &args.plot {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("makespan.svg"), svg_chart(&summaries, ChartMetric::Makespan))?;
        fs::write(dir.join("fuel.svg"), svg_chart(&summaries, ChartMetric::AvgFuel))?;
    }
    Ok(0)
}

fn summary_lines(summaries: &[BatchSummary]) -> Vec<String> {
    let fmt = |q: Option<metrics::Quartiles>| q.map_or("-".to_string(), |q| format!("{:.2}", q.median));
    let mut lines = Vec::new();
    for s in summaries {
        let k = &s.key;
        let mut line = format!(
            "{}x{} n={} {} {}: trials={} success={} timeout={} fault={} makespan_med={} fuel_med={} d_med={}",
            k.maze_w,
            k.maze_h,
            k.n,
            k.strategy,
            k.solver,
            s.trials,
            s.successes,
            s.timeouts,
            s.faults,
            fmt(s.makespan),
            fmt(s.avg_fuel),
            s.optimal_d
        );
        let same = |n: usize, strategy: &str| {
            summaries
                .iter()
                .find(|o| {
                    o.key.maze_w == k.maze_w
                        && o.key.maze_h == k.maze_h
                        && o.key.n == n
                        && o.key.strategy == strategy
                        && o.key.solver == k.solver
                })
                .and_then(|o| o.avg_fuel)
        };
        if let (Some(now), Some(solo)) = (s.avg_fuel, same(1, &k.strategy)) {
            if k.n > 1 {
                line += &format!(
                    " fuel_cut_vs_n1={:.1}%",
                    100.0 * metrics::reduction(solo.median, now.median)
                );
            }
        }
        if let (Some(now), Some(naive)) = (s.avg_fuel, same(k.n, "naive")) {
            if k.strategy != "naive" {
                line += &format!(
                    " fuel_cut_vs_naive={:.1}%",
                    100.0 * metrics::reduction(naive.median, now.median)
                );
            }
        }
        lines.push(line);
    }
    lines
}

fn replay(args: ReplayArgs) -> Result<u8> {
    let maze = load_maze(&args.maze)?;
    let file = fs::File::open(&args.trace).with_context(|| format!("opening {}", args.trace.display()))?;
    let read = read_trace(BufReader::new(file))?;
    if let Some(line) = read.truncated_at {
        eprintln!("warning: trace unreadable from line {line}; rendering the prefix");
    }
    let replay = replay_frames(&read.records);
    for w in &replay.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(bad) = replay
        .frames
        .iter()
        .flat_map(|f| &f.positions)
        .find(|p| p.index() >= maze.node_count())
    {
        bail!("trace mentions node {bad}, which the maze does not have");
    }
    let every = args.every.max(1);
    let last = replay.frames.len().saturating_sub(1);
    let picked = replay
        .frames
        .iter()
        .enumerate()
        .filter(|(i, _)| i % every == 0 || *i == last);
    if let Some(dir) = &args.svg {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (_, frame) in picked {
            fs::write(
                dir.join(format!("frame_{:05}.svg", frame.tick)),
                svg_frame(&maze, frame),
            )?;
        }
    } else {
        let stdout = io::stdout();
        let mut out = stdout.lock();
        for (_, frame) in picked {
            let text = ascii_grid(&maze, Some(frame)).unwrap_or_else(|| text_frame(&maze, frame));
            writeln!(out, "{text}")?;
        }
    }
    eprintln!("{} frames", replay.frames.len());
    Ok(0)
}

fn validate(path: &Path) -> Result<u8> {
    let maze = load_maze(path)?;
    println!(
        "ok nodes={} edges={} start={} goal={} d={}",
        maze.node_count(),
        maze.edge_count(),
        maze.start(),
        maze.goal(),
        maze.optimal_distance()
    );
    Ok(0)
}
