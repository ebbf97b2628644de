//! Experiment orchestration behind the command-line tool: design runs,
//! objective evaluation, trace replay and weight export.
//!
//! Every command validates all of its inputs before writing anything, and
//! every output file is written atomically.

mod output;
mod replay;

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::apprentice::{mean_weights, run_demo_cho, IrlRun};
use crate::arena::RegionColor;
use crate::controller::{ControllerDocument, DesignContext, PfsmController};
use crate::designer::DesignBudget;
use crate::error::{Error, Result};
use crate::features::{feature_labels, Demonstration};
use crate::geometry::Vec2;
use crate::mission::{build_mission, MissionSpec, ObjectiveResult, ObjectiveTracker};
use crate::sim::simulate;

pub use output::{format_number, quantile, to_csv, write_atomic};
pub use replay::{render_svg, render_text, ReplayFormat};

/// Preset experiment scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// 10 robots, 10 iterations, 500 simulations per iteration, 5 repeats.
    Desk,
    /// The mission's own swarm size, 50 iterations, 10000 simulations per
    /// iteration, 10 repeats.
    Paper,
}

impl Profile {
    pub fn robots(self) -> Option<usize> {
        match self {
            Profile::Desk => Some(10),
            Profile::Paper => None,
        }
    }

    pub fn iterations(self) -> usize {
        match self {
            Profile::Desk => 10,
            Profile::Paper => 50,
        }
    }

    pub fn budget(self) -> DesignBudget {
        match self {
            Profile::Desk => DesignBudget { max_simulations: 500, seeds_per_evaluation: 10 },
            Profile::Paper => DesignBudget { max_simulations: 10_000, seeds_per_evaluation: 10 },
        }
    }

    pub fn repeats(self) -> usize {
        match self {
            Profile::Desk => 5,
            Profile::Paper => 10,
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(format!("unknown profile `{s}` (expected desk or paper)")),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        })
    }
}

/// A mission given by canonical name or by path to a mission file.
pub fn load_mission(reference: &str, robots: Option<usize>) -> Result<MissionSpec> {
    let path = Path::new(reference);
    let mission = if path.is_file() { MissionSpec::load(path)? } else { build_mission(reference)? };
    match robots {
        Some(n) => {
            let m = mission.with_swarm_size(n);
            m.validate()?;
            Ok(m)
        }
        None => Ok(mission),
    }
}

/// A design experiment as requested on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mission: String,
    pub demos: Vec<PathBuf>,
    pub robots: Option<usize>,
    pub iterations: usize,
    pub budget: DesignBudget,
    pub repeats: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn from_profile(profile: Profile, mission: impl Into<String>, demos: Vec<PathBuf>, out: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            mission: mission.into(),
            demos,
            robots: profile.robots(),
            iterations: profile.iterations(),
            budget: profile.budget(),
            repeats: profile.repeats(),
            seed: 0,
            out: out.into(),
        }
    }

    /// Loads and checks every input.
    pub fn load(&self) -> Result<Experiment> {
        if self.repeats == 0 {
            return Err(Error::InvalidBudget("repeats must be at least 1".into()));
        }
        self.budget.validate()?;
        let mission = load_mission(&self.mission, self.robots)?;
        if self.demos.is_empty() {
            return Err(Error::InvalidDemonstration("at least one demonstration file is required".into()));
        }
        let mut demos = Vec::with_capacity(self.demos.len());
        for path in &self.demos {
            let demo = Demonstration::load(path)?;
            demo.validate(&mission).map_err(|e| Error::InvalidDemonstration(format!("{}: {e}", path.display())))?;
            demos.push(demo);
        }
        Ok(Experiment { mission, demos, config: self.clone() })
    }
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub mission: MissionSpec,
    pub demos: Vec<Demonstration>,
    pub config: ExperimentConfig,
}

impl Experiment {
    pub fn run_repeat(&self, repeat: usize) -> Result<IrlRun> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(repeat as u64));
        run_demo_cho(&self.mission, &self.demos, self.config.iterations, self.config.budget, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutput {
    pub record: PathBuf,
    pub controller: PathBuf,
    pub run: IrlRun,
}

pub fn record_path(out: &Path, repeat: usize) -> PathBuf {
    out.join(format!("run-{repeat:02}.json"))
}

pub fn controller_path(out: &Path, repeat: usize) -> PathBuf {
    out.join(format!("controller-{repeat:02}.json"))
}

/// Runs the design loop once per repeat, seeds `seed..seed + repeats`, and
/// writes a run record and the selected controller for each.
pub fn cmd_design(config: &ExperimentConfig) -> Result<Vec<DesignOutput>> {
    let experiment = config.load()?;
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let mut outputs = Vec::with_capacity(config.repeats);
    for repeat in 0..config.repeats {
        let run = experiment.run_repeat(repeat)?;
        let doc = ControllerDocument {
            context: Some(DesignContext { mission: run.mission, swarm_size: run.swarm_size }),
            controller: run.selected_iteration().controller.clone(),
        };
        let record = record_path(&config.out, repeat);
        let controller = controller_path(&config.out, repeat);
        write_atomic(&record, run.to_json().as_bytes())?;
        write_atomic(&controller, doc.to_json().as_bytes())?;
        outputs.push(DesignOutput { record, controller, run });
    }
    Ok(outputs)
}

/// Refuses controllers designed for another mission or swarm size.
pub fn check_context(mission: &MissionSpec, doc: &ControllerDocument) -> Result<()> {
    match &doc.context {
        Some(ctx) if ctx.mission != mission.name || ctx.swarm_size != mission.swarm_size => Err(Error::InvalidController(format!(
            "controller was designed for {} with {} robots, not {} with {} robots",
            ctx.mission, ctx.swarm_size, mission.name, mission.swarm_size
        ))),
        _ => Ok(()),
    }
}

/// Original objective of one episode, without keeping its trace.
pub fn evaluate_objective(mission: &MissionSpec, controller: &PfsmController, seed: u64) -> Result<ObjectiveResult> {
    let mut tracker = ObjectiveTracker::new(mission);
    simulate(mission, controller, seed, |step, state| tracker.observe(step, state))?;
    tracker.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub seeds: Vec<u64>,
    pub results: Vec<ObjectiveResult>,
}

impl Evaluation {
    pub fn values(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.value).collect()
    }

    /// Median and lower and upper hinges of the objective values.
    pub fn summary(&self) -> (f64, f64, f64) {
        let mut v = self.values();
        v.sort_by(f64::total_cmp);
        (quantile(&v, 0.5), quantile(&v, 0.25), quantile(&v, 0.75))
    }

    /// `seed,value,n_1..n_T` rows, then `summary,median,q1,q3`.
    pub fn to_csv(&self) -> String {
        let t = self.results.iter().map(|r| r.counts.len()).max().unwrap_or(0);
        let mut header = vec!["seed".to_string(), "value".to_string()];
        header.extend((1..=t).map(|i| format!("n_{i}")));
        let mut rows: Vec<Vec<String>> = self
            .seeds
            .iter()
            .zip(&self.results)
            .map(|(seed, r)| {
                let mut row = vec![seed.to_string(), format_number(r.value)];
                row.extend(r.counts.iter().map(|c| c.to_string()));
                row
            })
            .collect();
        let (median, q1, q3) = self.summary();
        rows.push(vec!["summary".into(), format_number(median), format_number(q1), format_number(q3)]);
        if header.len() < 4 {
            header.resize(4, String::new());
        }
        to_csv(&header, &rows)
    }
}

/// Scores a controller with the mission's original objective on every seed
/// of the range.
pub fn cmd_evaluate(mission: &MissionSpec, doc: &ControllerDocument, seeds: Range<u64>) -> Result<Evaluation> {
    check_context(mission, doc)?;
    if seeds.is_empty() {
        return Err(Error::EmptySample);
    }
    let seeds: Vec<u64> = seeds.collect();
    let results = seeds
        .par_iter()
        .map(|&s| evaluate_objective(mission, &doc.controller, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluation { seeds, results })
}

/// Loads run records and renders the mean-weight matrix: one row per
/// feature, one column per run, and the mean.
pub fn cmd_export_weights(records: &[PathBuf]) -> Result<String> {
    let mut runs = Vec::with_capacity(records.len());
    for path in records {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        runs.push(IrlRun::from_json(&text, path)?);
    }
    export_weights(&runs)
}

pub fn export_weights(runs: &[IrlRun]) -> Result<String> {
    let mean = mean_weights(runs)?;
    let first = &runs[0];
    let mission = build_mission(first.mission.as_str())?.with_swarm_size(first.swarm_size);
    let labels = feature_labels(&mission);
    if labels.len() != mean.len() {
        return Err(Error::DimensionMismatch(labels.len(), mean.len()));
    }
    let mut header = vec!["feature".to_string(), "landmark".to_string(), "rank".to_string()];
    header.extend((1..=runs.len()).map(|r| format!("run_{r}")));
    header.push("mean".into());
    let rows: Vec<Vec<String>> = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let (landmark, rank) = label.split_once('#').expect("labels carry a rank");
            let mut row = vec![i.to_string(), landmark.to_string(), rank.to_string()];
            row.extend(runs.iter().map(|r| format_number(r.final_weights().0[i])));
            row.push(format_number(mean[i]));
            row
        })
        .collect();
    Ok(to_csv(&header, &rows))
}

/// Landmark group with the largest mean absolute weight, and that mean,
/// from an export-weights CSV.
pub fn dominant_group(csv_text: &str) -> Option<(String, f64)> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let mut groups: Vec<(String, f64, usize)> = Vec::new();
    for record in reader.records() {
        let record = record.ok()?;
        let landmark = record.get(1)?.to_string();
        let mean: f64 = record.get(record.len() - 1)?.parse().ok()?;
        match groups.iter_mut().find(|g| g.0 == landmark) {
            Some(g) => {
                g.1 += mean.abs();
                g.2 += 1;
            }
            None => groups.push((landmark, mean.abs(), 1)),
        }
    }
    groups
        .into_iter()
        .map(|(name, sum, n)| (name, sum / n as f64))
        .fold(None, |best: Option<(String, f64)>, g| match best {
            Some(b) if b.1 >= g.1 => Some(b),
            _ => Some(g),
        })
}

/// A demonstration with every robot inside one region of the mission, the
/// `index`-th of its `color` regions. Positions are drawn uniformly and
/// kept at least one robot diameter apart.
pub fn sample_demonstration<R: Rng + ?Sized>(mission: &MissionSpec, color: RegionColor, index: usize, rng: &mut R) -> Result<Demonstration> {
    let region = mission
        .arena
        .regions
        .iter()
        .filter(|r| r.color == color)
        .nth(index)
        .ok_or_else(|| Error::InvalidDemonstration(format!("mission has no {color:?} region number {}", index + 1)))?;
    let shape = &region.shape;
    let center = shape.center();
    let extent = region_extent(shape);
    let spacing = mission.physics.robot_diameter();
    let mut positions: Vec<Vec2> = Vec::with_capacity(mission.swarm_size);
    let mut attempts = 0;
    while positions.len() < mission.swarm_size {
        if attempts == crate::sim::MAX_PLACEMENT_SAMPLES {
            return Err(Error::InitializationFailure { robots: mission.swarm_size, attempts });
        }
        attempts += 1;
        let p = center + Vec2::new(rng.random_range(-extent..extent), rng.random_range(-extent..extent));
        if shape.contains(p) && mission.arena.boundary.contains(p) && positions.iter().all(|q| q.distance(p) >= spacing) {
            positions.push(p);
        }
    }
    let demo = Demonstration::new(positions);
    demo.validate(mission)?;
    Ok(demo)
}

fn region_extent(shape: &crate::arena::Shape) -> f64 {
    match *shape {
        crate::arena::Shape::Circle { radius, .. } => radius,
        crate::arena::Shape::Rectangle { width, height, .. } => 0.5 * width.hypot(height),
    }
}
