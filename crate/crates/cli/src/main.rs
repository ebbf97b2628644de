use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swarmdemo::arena::RegionColor;
use swarmdemo::controller::ControllerDocument;
use swarmdemo::designer::DesignBudget;
use swarmdemo::harness::{
    cmd_design, cmd_evaluate, cmd_export_weights, check_context, load_mission, render_svg, render_text, sample_demonstration,
    write_atomic, ExperimentConfig, Profile, ReplayFormat,
};
use swarmdemo::mission::objective;
use swarmdemo::sim::{read_trace, run_episode, write_trace};

/// Environment variable overriding the number of worker threads.
const WORKERS_VAR: &str = "SWARMDEMO_WORKERS";

#[derive(Parser)]
#[command(name = "swarmdemo", version, about = "Design robot swarm control software from demonstrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the demonstration-driven design loop and write run records and
    /// selected controllers.
    Design(DesignArgs),
    /// Score a controller with the mission's original objective.
    Evaluate(EvaluateArgs),
    /// Dump a recorded trace as text frames or SVG images.
    Replay(ReplayArgs),
    /// Average learned weights over run records into a heat-map CSV.
    ExportWeights(ExportArgs),
    /// Run one episode and record its trace.
    Simulate(SimulateArgs),
    /// Write demonstrations with the whole swarm inside one floor region.
    SampleDemos(SampleArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// Canonical mission name (Homing, AAC, SAC, CFA) or mission file.
    #[arg(long)]
    mission: String,
    /// Demonstration file; repeat for several.
    #[arg(long = "demos", required = true)]
    demos: Vec<PathBuf>,
    #[arg(long, default_value = "desk")]
    profile: Profile,
    #[arg(long)]
    iterations: Option<usize>,
    /// Simulations per design iteration.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seeds_per_evaluation: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Swarm size; the profile decides when absent.
    #[arg(long)]
    robots: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    mission: String,
    #[arg(long)]
    controller: PathBuf,
    /// Half-open seed range `a..b`.
    #[arg(long, default_value = "0..30", value_parser = parse_seed_range)]
    seeds: Range<u64>,
    #[arg(long)]
    robots: Option<usize>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    trace: PathBuf,
    #[arg(long, default_value = "text")]
    format: ReplayFormat,
    /// Text file, or directory for SVG frames. Text goes to standard
    /// output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mission whose arena is drawn behind SVG frames.
    #[arg(long)]
    mission: Option<String>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(required = true)]
    records: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    mission: String,
    #[arg(long)]
    controller: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    robots: Option<usize>,
    /// Trace destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    mission: String,
    #[arg(long)]
    robots: Option<usize>,
    /// Region color, black or white.
    #[arg(long, default_value = "black")]
    color: String,
    /// Which region of that color, counting from 1 in file order.
    #[arg(long, default_value_t = 1)]
    region: usize,
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; files are named demo-1.txt, demo-2.txt, ...
    #[arg(long)]
    out: PathBuf,
}

fn parse_seed_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a >= b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok(a..b)
}

fn configure_workers() -> Result<()> {
    if let Ok(value) = std::env::var(WORKERS_VAR) {
        let n: usize = value.parse().with_context(|| format!("{WORKERS_VAR} must be a positive integer, got `{value}`"))?;
        if n == 0 {
            bail!("{WORKERS_VAR} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    Ok(())
}

fn design(args: DesignArgs) -> Result<()> {
    let profile = args.profile;
    let base = profile.budget();
    let config = ExperimentConfig {
        mission: args.mission,
        demos: args.demos,
        robots: args.robots.or(profile.robots()),
        iterations: args.iterations.unwrap_or(profile.iterations()),
        budget: DesignBudget {
            max_simulations: args.budget.unwrap_or(base.max_simulations),
            seeds_per_evaluation: args.seeds_per_evaluation.unwrap_or(base.seeds_per_evaluation),
        },
        repeats: args.repeats.unwrap_or(profile.repeats()),
        seed: args.seed,
        out: args.out,
    };
    for out in cmd_design(&config)? {
        let selected = out.run.selected_iteration();
        println!(
            "{}: selected iteration {} of {}, distance to demonstrations {:.4}{}",
            out.record.display(),
            selected.index,
            out.run.iterations.len() - 1,
            selected.distance_to_demo,
            if out.run.stopped_early { " (stopped early)" } else { "" }
        );
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mission = load_mission(&args.mission, args.robots)?;
    let doc = ControllerDocument::load(&args.controller)?;
    let evaluation = cmd_evaluate(&mission, &doc, args.seeds)?;
    let csv = evaluation.to_csv();
    match args.out {
        Some(path) => write_atomic(&path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<()> {
    let trace = read_trace(&args.trace)?;
    match args.format {
        ReplayFormat::Text => {
            let text = render_text(&trace);
            match args.out {
                Some(path) => write_atomic(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        ReplayFormat::Svg => {
            let Some(dir) = args.out else { bail!("--out <directory> is required for SVG frames") };
            let mission = args.mission.as_deref().map(|m| load_mission(m, None)).transpose()?;
            let radius = mission.as_ref().map_or(0.035, |m| m.physics.robot_radius);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for (step, state) in trace.states.iter().enumerate() {
                let svg = render_svg(state, step, mission.as_ref().map(|m| &m.arena), radius);
                write_atomic(&dir.join(format!("frame-{step:05}.svg")), svg.as_bytes())?;
            }
            eprintln!("wrote {} frames to {}", trace.states.len(), dir.display());
        }
    }
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let csv = cmd_export_weights(&args.records)?;
    match args.out {
        Some(path) => write_atomic(&path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mission = load_mission(&args.mission, args.robots)?;
    let doc = ControllerDocument::load(&args.controller)?;
    check_context(&mission, &doc)?;
    let trace = run_episode(&mission, &doc.controller, args.seed)?;
    let score = objective(&mission, &trace)?;
    write_atomic(&args.out, write_trace(&trace).as_bytes())?;
    println!("{} objective {}", mission.name, score.value);
    Ok(())
}

fn sample_demos(args: SampleArgs) -> Result<()> {
    let mission = load_mission(&args.mission, args.robots)?;
    let color = match args.color.to_ascii_lowercase().as_str() {
        "black" => RegionColor::Black,
        "white" => RegionColor::White,
        other => bail!("unknown region color `{other}`"),
    };
    if args.region == 0 {
        bail!("--region counts from 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let demos = (0..args.count)
        .map(|_| sample_demonstration(&mission, color, args.region - 1, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for (i, demo) in demos.iter().enumerate() {
        write_atomic(&args.out.join(format!("demo-{}.txt", i + 1)), demo.to_string().as_bytes())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Design(a) => design(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Replay(a) => replay(a),
        Command::ExportWeights(a) => export(a),
        Command::Simulate(a) => simulate(a),
        Command::SampleDemos(a) => sample_demos(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
