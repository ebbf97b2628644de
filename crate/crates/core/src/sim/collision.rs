use crate::arena::ArenaSpec;
use crate::geometry::{sweep_capsule, sweep_circle, Vec2};

use super::{SimParams, SwarmState, World};

/// Tolerance used when checking clearance constraints.
const SLACK: f64 = 1e-9;

/// Static projection: pushes robots out of the boundary and walls to the
/// tangent point and separates overlapping pairs symmetrically along their
/// center line, repeating until no constraint is violated.
pub fn resolve_collisions(arena: &ArenaSpec, params: &SimParams, swarm: &SwarmState) -> SwarmState {
    let world = World::new(arena, params);
    let r = params.robot_radius;
    let diameter = params.robot_diameter();
    let mut out = swarm.clone();
    for _ in 0..100 {
        let mut moved = false;
        for robot in out.robots.iter_mut() {
            for n in &world.normals {
                let s = world.apothem - robot.position.dot(*n);
                if s < r - SLACK {
                    robot.position = robot.position - *n * (r - s);
                    moved = true;
                }
            }
            for w in &arena.walls {
                let c = w.closest_point(robot.position);
                let d = robot.position.distance(c);
                if d < r - SLACK {
                    let dir = (robot.position - c).normalized().unwrap_or_else(|| (w.to - w.from).perp().normalized().unwrap_or(Vec2::new(1.0, 0.0)));
                    robot.position = c + dir * r;
                    moved = true;
                }
            }
        }
        let n = out.robots.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let delta = out.robots[j].position - out.robots[i].position;
                let d = delta.norm();
                if d < diameter - SLACK {
                    let dir = delta.normalized().unwrap_or(Vec2::new(1.0, 0.0));
                    let push = dir * ((diameter - d) / 2.0);
                    out.robots[i].position = out.robots[i].position - push;
                    out.robots[j].position += push;
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    out
}

/// Resolves one control step: every robot whose move from `previous` to
/// `proposed` would violate a clearance constraint is projected back along
/// its displacement to the first contact. Robots are processed in index
/// order against already-resolved lower indices and the previous positions
/// of higher ones, so a single pass restores all constraints provided
/// `previous` satisfied them.
pub fn resolve_motion(world: &World<'_>, previous: &SwarmState, proposed: &mut SwarmState) {
    let p = world.params;
    let r = p.robot_radius;
    let diameter = p.robot_diameter();
    let n = previous.robots.len();
    for i in 0..n {
        let start = previous.robots[i].position;
        let motion = proposed.robots[i].position - start;
        if motion.norm_sq() == 0.0 {
            continue;
        }
        let mut t = 1.0f64;
        for normal in &world.normals {
            let outward = motion.dot(*normal);
            if outward > 0.0 {
                let s0 = world.apothem - start.dot(*normal);
                t = t.min(((s0 - r) / outward).max(0.0));
            }
        }
        for w in &world.arena.walls {
            if let Some(hit) = sweep_capsule(start, motion, w, r) {
                t = t.min(hit);
            }
        }
        let reach = motion.norm() + diameter;
        for j in (0..n).filter(|&j| j != i) {
            let other = if j < i { proposed.robots[j].position } else { previous.robots[j].position };
            if (other - start).norm_sq() > reach * reach {
                continue;
            }
            if let Some(hit) = sweep_circle(start, motion, other, diameter) {
                t = t.min(hit);
            }
        }
        if t < 1.0 {
            proposed.robots[i].position = start + motion * t;
        }
    }
}

/// Number of clearance violations (robot-boundary, robot-wall, robot-robot)
/// beyond `tolerance`.
pub fn violations(arena: &ArenaSpec, params: &SimParams, swarm: &SwarmState, tolerance: f64) -> usize {
    let r = params.robot_radius;
    let diameter = params.robot_diameter();
    let mut count = 0;
    for (i, a) in swarm.robots.iter().enumerate() {
        if arena.boundary.clearance(a.position) < r - tolerance {
            count += 1;
        }
        count += arena.walls.iter().filter(|w| w.distance_to(a.position) < r - tolerance).count();
        count += swarm.robots[i + 1..]
            .iter()
            .filter(|b| a.position.distance(b.position) < diameter - tolerance)
            .count();
    }
    count
}
