use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controller::{ControllerRuntime, PfsmController};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mission::MissionSpec;

use super::{apply_actuation, resolve_motion, RobotState, SwarmState, World};

/// Rejection-sampling attempts allowed for the initial placement.
pub const MAX_PLACEMENT_SAMPLES: usize = 100_000;

/// A recorded episode: one swarm state per control step, initial and final
/// included.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub states: Vec<SwarmState>,
    pub seed: u64,
    pub step_duration: f64,
}

impl Trace {
    pub fn final_state(&self) -> &SwarmState {
        self.states.last().expect("trace holds at least the initial state")
    }
}

/// Number of control steps in an episode of `duration` seconds.
pub fn step_count(duration: f64, dt: f64) -> usize {
    (duration / dt + 1e-9).floor() as usize
}

/// Uniform non-overlapping placement inside the arena.
pub fn place_robots<R: Rng + ?Sized>(mission: &MissionSpec, rng: &mut R) -> Result<SwarmState> {
    let arena = &mission.arena;
    let r = mission.physics.robot_radius;
    let diameter = mission.physics.robot_diameter();
    let extent = arena.boundary.circumradius;
    let mut robots: Vec<RobotState> = Vec::with_capacity(mission.swarm_size);
    let mut attempts = 0;
    while robots.len() < mission.swarm_size {
        if attempts == MAX_PLACEMENT_SAMPLES {
            return Err(Error::InitializationFailure { robots: mission.swarm_size, attempts });
        }
        attempts += 1;
        let p = Vec2::new(rng.random_range(-extent..extent), rng.random_range(-extent..extent));
        let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let free = arena.boundary.clearance(p) >= r
            && arena.walls.iter().all(|w| w.distance_to(p) >= r)
            && robots.iter().all(|o| o.position.distance(p) >= diameter);
        if free {
            robots.push(RobotState::new(p, heading));
        }
    }
    Ok(SwarmState::new(robots))
}

/// Runs one episode, handing every state (initial included) to `observe`,
/// and returns the final state. A pure function of its inputs.
pub fn simulate<F>(mission: &MissionSpec, controller: &PfsmController, seed: u64, mut observe: F) -> Result<SwarmState>
where
    F: FnMut(usize, &SwarmState),
{
    controller.validate()?;
    let params = &mission.physics;
    let world = World::new(&mission.arena, params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = place_robots(mission, &mut rng)?;
    let mut runtimes = vec![ControllerRuntime::new(controller); state.len()];
    let mut next = state.clone();
    observe(0, &state);
    for step in 1..=step_count(mission.duration, params.dt) {
        for (i, runtime) in runtimes.iter_mut().enumerate() {
            let reading = world.sense(&state, i, &mut rng);
            let wheels = controller.step(runtime, &reading, params, &mut rng);
            next.robots[i] = apply_actuation(state.robots[i], wheels, params.dt, params);
        }
        resolve_motion(&world, &state, &mut next);
        std::mem::swap(&mut state, &mut next);
        observe(step, &state);
    }
    Ok(state)
}

/// Runs one episode and records the full trace.
pub fn run_episode(mission: &MissionSpec, controller: &PfsmController, seed: u64) -> Result<Trace> {
    let mut states = Vec::with_capacity(step_count(mission.duration, mission.physics.dt) + 1);
    simulate(mission, controller, seed, |_, s| states.push(s.clone()))?;
    Ok(Trace { states, seed, step_duration: mission.physics.dt })
}
