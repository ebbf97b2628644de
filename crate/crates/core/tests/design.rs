use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swarmdemo::apprentice::{fit_max_margin, policy_expectation, IrlRun};
use swarmdemo::arena::RegionColor;
use swarmdemo::controller::{random_controller, Behavior, Condition, ControllerDocument, PfsmController, State, Transition};
use swarmdemo::designer::{evaluate_reward, optimize, DesignBudget, RewardWeights};
use swarmdemo::features::{demo_to_features, feature_expectation, FeatureExpectation};
use swarmdemo::harness::{cmd_design, cmd_evaluate, export_weights, quantile, sample_demonstration, ExperimentConfig, Profile};
use swarmdemo::mission::{build_mission, MissionSpec};

/// Random walk that stops for good on the black floor.
fn explore_then_stop_on_black() -> PfsmController {
    PfsmController {
        states: vec![
            State {
                behavior: Behavior::Exploration { turn_steps: 10 },
                transitions: vec![Transition { condition: Condition::BlackFloor { probability: 0.05 }, target: 1 }],
            },
            State { behavior: Behavior::Stop, transitions: vec![] },
        ],
        initial_state: 0,
    }
}

fn mean_objective(mission: &MissionSpec, controller: &PfsmController, seeds: std::ops::Range<u64>) -> f64 {
    let doc = ControllerDocument { context: None, controller: controller.clone() };
    let values = cmd_evaluate(mission, &doc, seeds).unwrap().values();
    values.iter().sum::<f64>() / values.len() as f64
}

/// Demonstration expectation and the weights separating it from the stop
/// controller.
fn homing_reward(mission: &MissionSpec) -> (FeatureExpectation, RewardWeights) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let demos: Vec<_> = (0..5)
        .map(|_| demo_to_features(mission, &sample_demonstration(mission, RegionColor::Black, 0, &mut rng).unwrap()).unwrap())
        .collect();
    let mu_e = feature_expectation(mission, &demos).unwrap();
    let stop = policy_expectation(mission, &PfsmController::stop(), &(100..110).collect::<Vec<_>>()).unwrap();
    let w = fit_max_margin(&mu_e, &[stop]).unwrap();
    (mu_e, w)
}

#[test]
fn aggregation_in_black_outscores_stop_under_demo_reward() {
    let m = build_mission("Homing").unwrap();
    let (_, w) = homing_reward(&m);
    let seeds: Vec<u64> = (0..10).collect();
    let aggregate = evaluate_reward(&m, &explore_then_stop_on_black(), &w, &seeds).unwrap();
    let stop = evaluate_reward(&m, &PfsmController::stop(), &w, &seeds).unwrap();
    assert!(aggregate > stop, "{aggregate} vs {stop}");
}

#[test]
fn optimizing_demo_reward_beats_random_controllers_on_homing() {
    let m = build_mission("Homing").unwrap();
    let (_, w) = homing_reward(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let designed = optimize(&m, &w, DesignBudget::new(500, 10).unwrap(), &mut rng).unwrap();
    let mut random: Vec<f64> = (0..10).map(|_| mean_objective(&m, &random_controller(&mut rng), 0..20)).collect();
    random.sort_by(f64::total_cmp);
    let baseline = quantile(&random, 0.5);
    let achieved = mean_objective(&m, &designed, 0..20);
    assert!(achieved > baseline, "designed {achieved}, random median {baseline}");
}

fn small_experiment(dir: &Path, out: &str) -> ExperimentConfig {
    let m = build_mission("Homing").unwrap().with_swarm_size(4);
    let demo = sample_demonstration(&m, RegionColor::Black, 0, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let demo_path = dir.join("demo.txt");
    std::fs::write(&demo_path, demo.to_string()).unwrap();
    let mut config = ExperimentConfig::from_profile(Profile::Desk, "Homing", vec![demo_path], dir.join(out));
    config.robots = Some(4);
    config.iterations = 2;
    config.budget = DesignBudget::new(24, 2).unwrap();
    config.repeats = 2;
    config
}

#[test]
fn design_outputs_reload_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_experiment(dir.path(), "out");
    let outputs = cmd_design(&config).unwrap();
    assert_eq!(outputs.len(), 2);
    let mission = build_mission("Homing").unwrap().with_swarm_size(4);
    for out in &outputs {
        let run = IrlRun::from_json(&std::fs::read_to_string(&out.record).unwrap(), &out.record).unwrap();
        assert_eq!(run, out.run);
        assert_eq!(run.iterations.len(), 3);
        let doc = ControllerDocument::load(&out.controller).unwrap();
        assert_eq!(doc.controller, run.selected_iteration().controller);
        assert_eq!(cmd_evaluate(&mission, &doc, 0..2).unwrap().values().len(), 2);
        // a different swarm size is a context mismatch
        assert!(cmd_evaluate(&build_mission("Homing").unwrap(), &doc, 0..2).is_err());
    }
    assert_ne!(outputs[0].run, outputs[1].run, "repeats use distinct seeds");
}

#[test]
fn single_record_exports_its_weights() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_experiment(dir.path(), "out");
    config.repeats = 1;
    let run = cmd_design(&config).unwrap().remove(0).run;
    let csv = export_weights(std::slice::from_ref(&run)).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let means: Vec<f64> = reader.records().map(|r| r.unwrap()[4].parse().unwrap()).collect();
    assert_eq!(means.len(), run.final_weights().len());
    for (m, w) in means.iter().zip(&run.final_weights().0) {
        assert!((m - w).abs() <= 1e-5 * w.abs().max(1e-3), "{m} vs {w}");
    }
}
