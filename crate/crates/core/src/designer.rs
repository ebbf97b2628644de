//! Reward-driven controller design by iterated local search.
//!
//! Ten random controllers seed the search and the best becomes the
//! incumbent. Each step mutates the incumbent, runs challenger and
//! incumbent on the same fresh seeds, and keeps the challenger only if its
//! mean is strictly higher. After twenty consecutive rejections the next
//! challenger is a fresh random controller instead of a mutant. The
//! incumbent is returned when the budget runs out.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{mutate, random_controller, PfsmController};
use crate::error::{Error, Result};
use crate::features::{feature_dimension, phi, FeatureVector};
use crate::mission::MissionSpec;
use crate::sim::simulate;

pub const INITIAL_SAMPLES: usize = 10;
pub const RESTART_AFTER: usize = 20;

/// Linear reward `R(s) = w · φ(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RewardWeights(pub Vec<f64>);

impl RewardWeights {
    pub fn zeros(k: usize) -> Self {
        RewardWeights(vec![0.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn reward(&self, features: &FeatureVector) -> f64 {
        self.dot(features.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignBudget {
    pub max_simulations: usize,
    pub seeds_per_evaluation: usize,
}

impl DesignBudget {
    pub fn new(max_simulations: usize, seeds_per_evaluation: usize) -> Result<Self> {
        let b = DesignBudget { max_simulations, seeds_per_evaluation };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds_per_evaluation == 0 || self.max_simulations == 0 {
            return Err(Error::InvalidBudget("simulations and seeds per evaluation must be at least 1".into()));
        }
        if self.seeds_per_evaluation > self.max_simulations {
            return Err(Error::InvalidBudget(format!(
                "{} seeds per evaluation exceed the budget of {} simulations",
                self.seeds_per_evaluation, self.max_simulations
            )));
        }
        Ok(())
    }
}

/// Features of the final state of one episode.
pub fn terminal_features(mission: &MissionSpec, controller: &PfsmController, seed: u64) -> Result<FeatureVector> {
    let last = simulate(mission, controller, seed, |_, _| {})?;
    phi(mission, &last)
}

/// Mean terminal reward over `seeds`.
pub fn evaluate_reward(mission: &MissionSpec, controller: &PfsmController, w: &RewardWeights, seeds: &[u64]) -> Result<f64> {
    if seeds.is_empty() {
        return Err(Error::EmptySample);
    }
    check_dimension(mission, w)?;
    let scores = seeds
        .par_iter()
        .map(|&s| terminal_features(mission, controller, s).map(|f| w.reward(&f)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.iter().sum::<f64>() / seeds.len() as f64)
}

fn check_dimension(mission: &MissionSpec, w: &RewardWeights) -> Result<()> {
    let k = feature_dimension(mission);
    if w.len() != k {
        return Err(Error::DimensionMismatch(k, w.len()));
    }
    Ok(())
}

/// An accepted challenger and the scores behind the decision, both on the
/// challenger's seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acceptance {
    pub challenger_mean: f64,
    pub incumbent_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub controller: PfsmController,
    /// Mean score of the returned controller over every seed it was run on
    /// since it became the incumbent.
    pub estimate: f64,
    /// Episodes actually run.
    pub simulations: usize,
    pub acceptances: Vec<Acceptance>,
    pub restarts: usize,
}

struct Candidate {
    controller: PfsmController,
    sum: f64,
    count: usize,
}

impl Candidate {
    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

/// Searches for a controller maximizing expected terminal reward.
pub fn optimize<R: Rng + ?Sized>(mission: &MissionSpec, w: &RewardWeights, budget: DesignBudget, rng: &mut R) -> Result<PfsmController> {
    optimize_from(mission, w, budget, &[], rng)
}

/// Like [`optimize`], with `starts` taking the first places of the initial
/// sample ahead of the random controllers.
pub fn optimize_from<R: Rng + ?Sized>(
    mission: &MissionSpec,
    w: &RewardWeights,
    budget: DesignBudget,
    starts: &[PfsmController],
    rng: &mut R,
) -> Result<PfsmController> {
    check_dimension(mission, w)?;
    let scorer = |c: &PfsmController, seed: u64| terminal_features(mission, c, seed).map(|f| w.reward(&f));
    Ok(optimize_with(budget, starts, rng, scorer)?.controller)
}

/// The search itself, against an arbitrary per-episode score.
pub fn optimize_with<R, F>(budget: DesignBudget, starts: &[PfsmController], rng: &mut R, score: F) -> Result<SearchOutcome>
where
    R: Rng + ?Sized,
    F: Fn(&PfsmController, u64) -> Result<f64> + Sync,
{
    budget.validate()?;
    for c in starts {
        c.validate()?;
    }
    let s = budget.seeds_per_evaluation;
    let mut remaining = budget.max_simulations;
    let run = |jobs: Vec<(&PfsmController, u64)>| -> Result<Vec<f64>> { jobs.par_iter().map(|&(c, seed)| score(c, seed)).collect() };
    let fresh_seeds = |rng: &mut R| -> Vec<u64> { (0..s).map(|_| rng.random()).collect() };

    let initial_count = INITIAL_SAMPLES.min(remaining / s);
    let mut initial: Vec<PfsmController> = starts.iter().take(initial_count).cloned().collect();
    while initial.len() < initial_count {
        initial.push(random_controller(rng));
    }
    let seeds = fresh_seeds(rng);
    let scores = run(initial.iter().flat_map(|c| seeds.iter().map(move |&seed| (c, seed))).collect())?;
    remaining -= initial_count * s;
    let mut best = 0;
    let mut best_sum = f64::NEG_INFINITY;
    for (i, chunk) in scores.chunks(s).enumerate() {
        let sum: f64 = chunk.iter().sum();
        if sum > best_sum {
            best = i;
            best_sum = sum;
        }
    }
    let mut incumbent = Candidate { controller: initial[best].clone(), sum: best_sum, count: s };
    let mut rejections = 0;
    let mut acceptances = Vec::new();
    let mut restarts = 0;

    while remaining >= 2 * s {
        let challenger = if rejections == RESTART_AFTER {
            rejections = 0;
            restarts += 1;
            random_controller(rng)
        } else {
            mutate(&incumbent.controller, rng)
        };
        let seeds = fresh_seeds(rng);
        let jobs = seeds
            .iter()
            .map(|&seed| (&challenger, seed))
            .chain(seeds.iter().map(|&seed| (&incumbent.controller, seed)))
            .collect();
        let scores = run(jobs)?;
        remaining -= 2 * s;
        let challenger_sum: f64 = scores[..s].iter().sum();
        let incumbent_sum: f64 = scores[s..].iter().sum();
        if challenger_sum > incumbent_sum {
            acceptances.push(Acceptance { challenger_mean: challenger_sum / s as f64, incumbent_mean: incumbent_sum / s as f64 });
            incumbent = Candidate { controller: challenger, sum: challenger_sum, count: s };
            rejections = 0;
        } else {
            incumbent.sum += incumbent_sum;
            incumbent.count += s;
            rejections += 1;
        }
    }

    Ok(SearchOutcome {
        estimate: incumbent.mean(),
        controller: incumbent.controller,
        simulations: budget.max_simulations - remaining,
        acceptances,
        restarts,
    })
}
