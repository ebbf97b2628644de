//! Sampling and neighborhood moves over the controller space.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::*;

pub fn random_behavior<R: Rng + ?Sized>(rng: &mut R) -> Behavior {
    behavior_of_kind(rng.random_range(0..Behavior::KINDS), rng)
}

fn behavior_of_kind<R: Rng + ?Sized>(kind: usize, rng: &mut R) -> Behavior {
    match kind {
        0 => Behavior::Exploration { turn_steps: rng.random_range(TURN_STEPS_RANGE.0..=TURN_STEPS_RANGE.1) },
        1 => Behavior::Stop,
        2 => Behavior::Phototaxis,
        3 => Behavior::AntiPhototaxis,
        4 => Behavior::Attraction { gain: rng.random_range(GAIN_RANGE.0..=GAIN_RANGE.1) },
        _ => Behavior::Repulsion { gain: rng.random_range(GAIN_RANGE.0..=GAIN_RANGE.1) },
    }
}

pub fn random_condition<R: Rng + ?Sized>(rng: &mut R) -> Condition {
    condition_of_kind(rng.random_range(0..Condition::KINDS), rng)
}

fn condition_of_kind<R: Rng + ?Sized>(kind: usize, rng: &mut R) -> Condition {
    let mut probability = || rng.random_range(PROBABILITY_RANGE.0..=PROBABILITY_RANGE.1);
    match kind {
        0 => Condition::BlackFloor { probability: probability() },
        1 => Condition::GrayFloor { probability: probability() },
        2 => Condition::WhiteFloor { probability: probability() },
        5 => Condition::FixedProbability { probability: probability() },
        k => {
            let threshold = rng.random_range(THRESHOLD_RANGE.0..=THRESHOLD_RANGE.1);
            let steepness = rng.random_range(STEEPNESS_RANGE.0..=STEEPNESS_RANGE.1);
            if k == 3 {
                Condition::NeighborCount { threshold, steepness }
            } else {
                Condition::InvertedNeighborCount { threshold, steepness }
            }
        }
    }
}

fn random_target<R: Rng + ?Sized>(states: usize, source: usize, rng: &mut R) -> usize {
    let t = rng.random_range(0..states - 1);
    if t >= source {
        t + 1
    } else {
        t
    }
}

/// Uniform state count, behaviors, conditions, transition counts and
/// parameters. The first state is initial.
pub fn random_controller<R: Rng + ?Sized>(rng: &mut R) -> PfsmController {
    let n = rng.random_range(1..=MAX_STATES);
    let mut states: Vec<State> = (0..n).map(|_| State { behavior: random_behavior(rng), transitions: vec![] }).collect();
    if n > 1 {
        for (i, state) in states.iter_mut().enumerate() {
            let count = rng.random_range(0..=MAX_TRANSITIONS);
            state.transitions = (0..count)
                .map(|_| Transition { condition: random_condition(rng), target: random_target(n, i, rng) })
                .collect();
        }
    }
    PfsmController { states, initial_state: 0 }
}

/// The neighborhood moves used by [`mutate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    /// Shift one parameter by up to ±10% of its range, clamped.
    PerturbParameter,
    SwapBehavior,
    SwapCondition,
    AddState,
    RemoveState,
    AddTransition,
    RemoveTransition,
    RetargetTransition,
}

impl Edit {
    pub const ALL: [Edit; 8] = [
        Edit::PerturbParameter,
        Edit::SwapBehavior,
        Edit::SwapCondition,
        Edit::AddState,
        Edit::RemoveState,
        Edit::AddTransition,
        Edit::RemoveTransition,
        Edit::RetargetTransition,
    ];

    pub fn applicable(self, c: &PfsmController) -> bool {
        let n = c.states.len();
        let transitions = c.transition_count();
        match self {
            Edit::PerturbParameter => c.parameter_count() > 0,
            Edit::SwapBehavior => true,
            Edit::SwapCondition | Edit::RemoveTransition => transitions > 0,
            Edit::AddState => n < MAX_STATES,
            Edit::RemoveState => n > 1,
            Edit::AddTransition => n > 1 && c.states.iter().any(|s| s.transitions.len() < MAX_TRANSITIONS),
            Edit::RetargetTransition => n > 2 && transitions > 0,
        }
    }
}

/// Applies exactly one edit, chosen uniformly among those applicable.
pub fn mutate<R: Rng + ?Sized>(controller: &PfsmController, rng: &mut R) -> PfsmController {
    let options: Vec<Edit> = Edit::ALL.into_iter().filter(|e| e.applicable(controller)).collect();
    let edit = *options.choose(rng).expect("SwapBehavior always applies");
    apply_edit(controller, edit, rng).expect("edit was checked applicable")
}

/// Applies `edit`, or returns `None` when it is not applicable.
pub fn apply_edit<R: Rng + ?Sized>(controller: &PfsmController, edit: Edit, rng: &mut R) -> Option<PfsmController> {
    if !edit.applicable(controller) {
        return None;
    }
    let mut c = controller.clone();
    let n = c.states.len();
    match edit {
        Edit::PerturbParameter => {
            let slot = rng.random_range(0..c.parameter_count());
            perturb_slot(&mut c, slot, rng);
        }
        Edit::SwapBehavior => {
            let s = rng.random_range(0..n);
            let old = c.states[s].behavior.kind_index();
            let kind = (old + rng.random_range(1..Behavior::KINDS)) % Behavior::KINDS;
            c.states[s].behavior = behavior_of_kind(kind, rng);
        }
        Edit::SwapCondition => {
            let (s, k) = pick_transition(&c, rng);
            let old = c.states[s].transitions[k].condition.kind_index();
            let kind = (old + rng.random_range(1..Condition::KINDS)) % Condition::KINDS;
            c.states[s].transitions[k].condition = condition_of_kind(kind, rng);
        }
        Edit::AddState => {
            c.states.push(State { behavior: random_behavior(rng), transitions: vec![] });
            // wire it in from an existing state when one has room
            let open: Vec<usize> = (0..n).filter(|&i| c.states[i].transitions.len() < MAX_TRANSITIONS).collect();
            if let Some(&from) = open.choose(rng) {
                let condition = random_condition(rng);
                c.states[from].transitions.push(Transition { condition, target: n });
            }
        }
        Edit::RemoveState => {
            let victim = rng.random_range(0..n);
            c.states.remove(victim);
            for state in &mut c.states {
                state.transitions.retain(|t| t.target != victim);
                for t in &mut state.transitions {
                    if t.target > victim {
                        t.target -= 1;
                    }
                }
            }
            if c.initial_state == victim {
                c.initial_state = 0;
            } else if c.initial_state > victim {
                c.initial_state -= 1;
            }
        }
        Edit::AddTransition => {
            let open: Vec<usize> = (0..n).filter(|&i| c.states[i].transitions.len() < MAX_TRANSITIONS).collect();
            let from = *open.choose(rng)?;
            let condition = random_condition(rng);
            let target = random_target(n, from, rng);
            c.states[from].transitions.push(Transition { condition, target });
        }
        Edit::RemoveTransition => {
            let (s, k) = pick_transition(&c, rng);
            c.states[s].transitions.remove(k);
        }
        Edit::RetargetTransition => {
            let (s, k) = pick_transition(&c, rng);
            let current = c.states[s].transitions[k].target;
            let choices: Vec<usize> = (0..n).filter(|&t| t != s && t != current).collect();
            c.states[s].transitions[k].target = *choices.choose(rng)?;
        }
    }
    debug_assert!(c.validate().is_ok(), "{edit:?} produced {c:?}");
    Some(c)
}

fn pick_transition<R: Rng + ?Sized>(c: &PfsmController, rng: &mut R) -> (usize, usize) {
    let mut k = rng.random_range(0..c.transition_count());
    for (s, state) in c.states.iter().enumerate() {
        if k < state.transitions.len() {
            return (s, k);
        }
        k -= state.transitions.len();
    }
    unreachable!("index below transition count")
}

fn perturb_real<R: Rng + ?Sized>(value: f64, (lo, hi): (f64, f64), rng: &mut R) -> f64 {
    let span = hi - lo;
    (value + rng.random_range(-0.1..=0.1) * span).clamp(lo, hi)
}

fn perturb_int<R: Rng + ?Sized>(value: u32, (lo, hi): (u32, u32), rng: &mut R) -> u32 {
    let span = (hi - lo) as f64;
    (value as f64 + rng.random_range(-0.1..=0.1) * span).round().clamp(lo as f64, hi as f64) as u32
}

/// Parameter slots are numbered state by state: behavior parameters first,
/// then each transition's condition parameters.
fn perturb_slot<R: Rng + ?Sized>(c: &mut PfsmController, mut slot: usize, rng: &mut R) {
    for state in &mut c.states {
        let bp = state.behavior.parameter_count();
        if slot < bp {
            match &mut state.behavior {
                Behavior::Exploration { turn_steps } => *turn_steps = perturb_int(*turn_steps, TURN_STEPS_RANGE, rng),
                Behavior::Attraction { gain } | Behavior::Repulsion { gain } => *gain = perturb_real(*gain, GAIN_RANGE, rng),
                _ => unreachable!(),
            }
            return;
        }
        slot -= bp;
        for t in &mut state.transitions {
            let cp = t.condition.parameter_count();
            if slot < cp {
                match &mut t.condition {
                    Condition::BlackFloor { probability }
                    | Condition::GrayFloor { probability }
                    | Condition::WhiteFloor { probability }
                    | Condition::FixedProbability { probability } => *probability = perturb_real(*probability, PROBABILITY_RANGE, rng),
                    Condition::NeighborCount { threshold, steepness } | Condition::InvertedNeighborCount { threshold, steepness } => {
                        if slot == 0 {
                            *threshold = perturb_int(*threshold, THRESHOLD_RANGE, rng);
                        } else {
                            *steepness = perturb_real(*steepness, STEEPNESS_RANGE, rng);
                        }
                    }
                }
                return;
            }
            slot -= cp;
        }
    }
    unreachable!("slot below parameter count")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn random_controllers_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            random_controller(&mut rng).validate().unwrap();
        }
    }

    #[test]
    fn same_seed_same_controller() {
        let a = random_controller(&mut ChaCha8Rng::seed_from_u64(5));
        let b = random_controller(&mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_give_distinct_controllers() {
        // Single-state controllers whose behavior has no parameter (stop,
        // phototaxis, anti-phototaxis) make up 1/4 · 1/2 = 1/8 of the draws
        // and can only take three values, so ~12 of 100 draws collapse onto
        // at most 3 distinct controllers: expected distinct count ≈ 90.5.
        // Everything else carries a continuous parameter and must be unique.
        let samples: Vec<PfsmController> = (0..100).map(|s| random_controller(&mut ChaCha8Rng::seed_from_u64(s))).collect();
        let keys: Vec<String> = samples.iter().map(|c| format!("{c:?}")).collect();
        let distinct: HashSet<&String> = keys.iter().collect();
        let parameterized: Vec<&String> = samples.iter().zip(&keys).filter(|(c, _)| c.parameter_count() > 0).map(|(_, k)| k).collect();
        let distinct_parameterized: HashSet<&&String> = parameterized.iter().collect();
        assert_eq!(distinct_parameterized.len(), parameterized.len());
        assert!(distinct.len() >= 85, "only {} distinct", distinct.len());
    }

    #[test]
    fn trivial_controller_mutations_stay_valid() {
        let c = PfsmController::stop();
        assert!(!Edit::RemoveState.applicable(&c));
        assert!(!Edit::RemoveTransition.applicable(&c));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let m = mutate(&c, &mut rng);
            m.validate().unwrap();
            assert!(!m.states.is_empty());
        }
    }

    #[test]
    fn mutation_chain_is_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut c = random_controller(&mut rng);
        for _ in 0..1000 {
            c = mutate(&c, &mut rng);
            c.validate().unwrap();
        }
    }

    #[test]
    fn perturbing_certain_probability_stays_in_upper_decile() {
        let c = PfsmController {
            states: vec![
                State { behavior: Behavior::Stop, transitions: vec![Transition { condition: Condition::FixedProbability { probability: 1.0 }, target: 1 }] },
                State { behavior: Behavior::Stop, transitions: vec![] },
            ],
            initial_state: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let m = apply_edit(&c, Edit::PerturbParameter, &mut rng).unwrap();
            let Condition::FixedProbability { probability } = m.states[0].transitions[0].condition else { panic!() };
            assert!((0.9..=1.0).contains(&probability), "{probability}");
        }
    }

    #[test]
    fn removing_a_state_reindexes_targets() {
        let c = PfsmController {
            states: vec![
                State { behavior: Behavior::Stop, transitions: vec![Transition { condition: Condition::FixedProbability { probability: 0.5 }, target: 2 }] },
                State { behavior: Behavior::Phototaxis, transitions: vec![Transition { condition: Condition::FixedProbability { probability: 0.5 }, target: 0 }] },
                State { behavior: Behavior::Stop, transitions: vec![Transition { condition: Condition::FixedProbability { probability: 0.5 }, target: 1 }] },
            ],
            initial_state: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let m = apply_edit(&c, Edit::RemoveState, &mut rng).unwrap();
            m.validate().unwrap();
            assert_eq!(m.states.len(), 2);
        }
    }

    #[test]
    fn every_edit_kind_gets_used() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = HashSet::new();
        for _ in 0..400 {
            let c = random_controller(&mut rng);
            for e in Edit::ALL {
                if let Some(m) = apply_edit(&c, e, &mut rng) {
                    m.validate().unwrap();
                    seen.insert(format!("{e:?}"));
                }
            }
        }
        assert_eq!(seen.len(), Edit::ALL.len());
    }
}
