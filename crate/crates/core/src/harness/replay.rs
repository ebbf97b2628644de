//! Frame-by-frame dumps of recorded traces.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::arena::{ArenaSpec, RegionColor, Shape};
use crate::sim::{SwarmState, Trace, TRACE_DECIMALS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayFormat {
    Text,
    Svg,
}

impl FromStr for ReplayFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ReplayFormat::Text),
            "svg" => Ok(ReplayFormat::Svg),
            _ => Err(format!("unknown replay format `{s}` (expected text or svg)")),
        }
    }
}

/// One `frame <step>` block per state, robots as `x y heading` lines.
pub fn render_text(trace: &Trace) -> String {
    let mut out = String::new();
    for (step, state) in trace.states.iter().enumerate() {
        writeln!(out, "frame {step} t={:.prec$}", step as f64 * trace.step_duration, prec = 1).unwrap();
        for r in &state.robots {
            writeln!(out, "{:.p$} {:.p$} {:.p$}", r.position.x, r.position.y, r.heading, p = TRACE_DECIMALS).unwrap();
        }
    }
    out
}

/// A standalone SVG image of one state. Robot coordinates are written with
/// the trace's own precision so frames can be read back exactly.
pub fn render_svg(state: &SwarmState, step: usize, arena: Option<&ArenaSpec>, robot_radius: f64) -> String {
    let extent = arena.map_or(1.5, |a| a.boundary.circumradius * 1.05);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" data-step="{step}">"#,
        -extent,
        -extent,
        2.0 * extent,
        2.0 * extent
    )
    .unwrap();
    // flip y so the arena reads with y pointing up
    out.push_str("<g transform=\"scale(1,-1)\">\n");
    if let Some(a) = arena {
        let points: Vec<String> = a.boundary.vertices().iter().map(|v| format!("{:.4},{:.4}", v.x, v.y)).collect();
        writeln!(out, r##"<polygon points="{}" fill="#bbbbbb"/>"##, points.join(" ")).unwrap();
        for region in &a.regions {
            let fill = match region.color {
                RegionColor::Black => "#000000",
                RegionColor::White => "#ffffff",
            };
            match region.shape {
                Shape::Circle { center, radius } => {
                    writeln!(out, r#"<circle cx="{:.4}" cy="{:.4}" r="{:.4}" fill="{fill}"/>"#, center.x, center.y, radius).unwrap()
                }
                Shape::Rectangle { center, width, height, orientation } => writeln!(
                    out,
                    r#"<rect x="{:.4}" y="{:.4}" width="{width:.4}" height="{height:.4}" transform="rotate({:.4} {:.4} {:.4})" fill="{fill}"/>"#,
                    center.x - width / 2.0,
                    center.y - height / 2.0,
                    orientation.to_degrees(),
                    center.x,
                    center.y
                )
                .unwrap(),
            }
        }
        for w in &a.walls {
            writeln!(
                out,
                r##"<line x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="#804000" stroke-width="0.01"/>"##,
                w.from.x, w.from.y, w.to.x, w.to.y
            )
            .unwrap();
        }
    }
    for r in &state.robots {
        writeln!(
            out,
            r##"<circle class="robot" cx="{:.p$}" cy="{:.p$}" r="{robot_radius}" data-heading="{:.p$}" fill="#3060c0"/>"##,
            r.position.x,
            r.position.y,
            r.heading,
            p = TRACE_DECIMALS
        )
        .unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}
