//! Line-oriented trace format: a `#` header carrying the seed, step
//! duration and robot count, then one line per step holding `x y θ` for
//! every robot in fixed decimal notation.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

use super::{RobotState, SwarmState, Trace};

pub const TRACE_DECIMALS: usize = 6;

const MAGIC: &str = "# swarmdemo-trace";

pub fn write_trace(trace: &Trace) -> String {
    let robots = trace.states.first().map_or(0, SwarmState::len);
    let mut out = format!("{MAGIC} seed={} dt={} robots={robots}\n", trace.seed, trace.step_duration);
    for state in &trace.states {
        let mut first = true;
        for r in &state.robots {
            for v in [r.position.x, r.position.y, r.heading] {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{v:.prec$}", prec = TRACE_DECIMALS).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_trace(text: &str, origin: &Path) -> Result<Trace> {
    let err = |line: usize, msg: &str| Error::parse(origin, format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(origin, "empty trace file"))?;
    let fields = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| err(1, "missing trace header"))?;
    let (mut seed, mut dt, mut robots) = (None, None, None);
    for field in fields.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| err(1, "malformed header field"))?;
        match key {
            "seed" => seed = value.parse::<u64>().ok(),
            "dt" => dt = value.parse::<f64>().ok(),
            "robots" => robots = value.parse::<usize>().ok(),
            _ => return Err(err(1, &format!("unknown header field `{key}`"))),
        }
    }
    let (Some(seed), Some(dt), Some(robots)) = (seed, dt, robots) else {
        return Err(err(1, "header needs seed, dt and robots"));
    };
    let mut states = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| err(idx + 1, &e.to_string()))?;
        if values.len() != 3 * robots {
            return Err(err(idx + 1, &format!("expected {} values, found {}", 3 * robots, values.len())));
        }
        states.push(SwarmState::new(
            values
                .chunks_exact(3)
                .map(|c| RobotState { position: Vec2::new(c[0], c[1]), heading: c[2] })
                .collect(),
        ));
    }
    if states.is_empty() {
        return Err(Error::parse(origin, "trace has no states"));
    }
    Ok(Trace { states, seed, step_duration: dt })
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_is_fixed_six_decimals() {
        let trace = Trace {
            states: vec![SwarmState::new(vec![RobotState { position: Vec2::new(0.5, -0.25), heading: 1.0 / 3.0 }])],
            seed: 7,
            step_duration: 0.1,
        };
        let text = write_trace(&trace);
        assert_eq!(text, "# swarmdemo-trace seed=7 dt=0.1 robots=1\n0.500000 -0.250000 0.333333\n");
        let back = parse_trace(&text, Path::new("t")).unwrap();
        assert_eq!(write_trace(&back), text);
        assert_eq!(back.seed, 7);
    }

    #[test]
    fn empty_and_malformed_inputs_fail() {
        assert!(parse_trace("", Path::new("t")).is_err());
        assert!(parse_trace("# swarmdemo-trace seed=1 dt=0.1 robots=1\n", Path::new("t")).is_err());
        assert!(parse_trace("# swarmdemo-trace seed=1 dt=0.1 robots=1\n1 2\n", Path::new("t")).is_err());
        assert!(parse_trace("1 2 3\n", Path::new("t")).is_err());
    }
}
