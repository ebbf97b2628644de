//! Arena layout: the convex boundary, colored floor regions, internal walls
//! and the light source.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Segment, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloorColor {
    Black,
    Gray,
    White,
}

/// Colors a region can carry; gray is the implicit background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionColor {
    Black,
    White,
}

impl From<RegionColor> for FloorColor {
    fn from(c: RegionColor) -> Self {
        match c {
            RegionColor::Black => FloorColor::Black,
            RegionColor::White => FloorColor::White,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Circle {
        center: Vec2,
        radius: f64,
    },
    Rectangle {
        center: Vec2,
        width: f64,
        height: f64,
        /// Rotation of the width axis from the x axis, radians.
        #[serde(default)]
        orientation: f64,
    },
}

impl Shape {
    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Shape::Circle { center, radius } => (p - center).norm_sq() <= radius * radius,
            Shape::Rectangle { center, width, height, orientation } => {
                let local = (p - center).rotated(-orientation);
                local.x.abs() <= width / 2.0 && local.y.abs() <= height / 2.0
            }
        }
    }

    /// Closest point of the (closed) shape to `p`; `p` itself when inside.
    pub fn nearest_point(&self, p: Vec2) -> Vec2 {
        match *self {
            Shape::Circle { center, radius } => {
                let d = p - center;
                let n = d.norm();
                if n <= radius {
                    p
                } else {
                    center + d * (radius / n)
                }
            }
            Shape::Rectangle { center, width, height, orientation } => {
                let local = (p - center).rotated(-orientation);
                let clamped = Vec2::new(
                    local.x.clamp(-width / 2.0, width / 2.0),
                    local.y.clamp(-height / 2.0, height / 2.0),
                );
                if clamped == local {
                    p
                } else {
                    center + clamped.rotated(orientation)
                }
            }
        }
    }

    pub fn distance(&self, p: Vec2) -> f64 {
        p.distance(self.nearest_point(p))
    }

    pub fn center(&self) -> Vec2 {
        match *self {
            Shape::Circle { center, .. } | Shape::Rectangle { center, .. } => center,
        }
    }

    /// Points that must lie inside the arena for the shape to be inside it.
    fn hull_points(&self) -> Vec<Vec2> {
        match *self {
            Shape::Circle { center, radius } => (0..64)
                .map(|k| center + Vec2::from_angle(k as f64 * std::f64::consts::TAU / 64.0) * radius)
                .collect(),
            Shape::Rectangle { center, width, height, orientation } => [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                .iter()
                .map(|&(sx, sy)| center + Vec2::new(sx * width / 2.0, sy * height / 2.0).rotated(orientation))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub color: RegionColor,
    #[serde(flatten)]
    pub shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Light {
    pub position: Vec2,
    pub on: bool,
}

/// Regular polygon centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub sides: usize,
    pub circumradius: f64,
}

impl Boundary {
    /// Counter-clockwise vertices; the first edge is centred on the +x axis.
    pub fn vertices(&self) -> Vec<Vec2> {
        let n = self.sides as f64;
        let step = std::f64::consts::TAU / n;
        (0..self.sides)
            .map(|k| Vec2::from_angle(-step / 2.0 + k as f64 * step) * self.circumradius)
            .collect()
    }

    pub fn edges(&self) -> Vec<Segment> {
        let v = self.vertices();
        (0..v.len()).map(|i| Segment::new(v[i], v[(i + 1) % v.len()])).collect()
    }

    pub fn apothem(&self) -> f64 {
        self.circumradius * (std::f64::consts::PI / self.sides as f64).cos()
    }

    pub fn area(&self) -> f64 {
        let n = self.sides as f64;
        0.5 * n * self.circumradius * self.circumradius * (std::f64::consts::TAU / n).sin()
    }

    /// Largest distance between two boundary points.
    pub fn diameter(&self) -> f64 {
        if self.sides % 2 == 0 {
            2.0 * self.circumradius
        } else {
            self.circumradius * (1.0 + (std::f64::consts::PI / self.sides as f64).cos())
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn clearance(&self, p: Vec2) -> f64 {
        let step = std::f64::consts::TAU / self.sides as f64;
        let a = self.apothem();
        (0..self.sides)
            .map(|k| a - p.dot(Vec2::from_angle(k as f64 * step)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.clearance(p) >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaSpec {
    pub boundary: Boundary,
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
    #[serde(default)]
    pub walls: Vec<Segment>,
    #[serde(default)]
    pub light: Option<Light>,
}

impl ArenaSpec {
    pub fn validate(&self) -> Result<()> {
        let b = &self.boundary;
        if b.sides < 3 || !(b.circumradius > 0.0) {
            return Err(Error::InvalidMission(format!(
                "boundary needs >= 3 sides and positive circumradius, got {} / {}",
                b.sides, b.circumradius
            )));
        }
        for (i, r) in self.regions.iter().enumerate() {
            let ok = match r.shape {
                Shape::Circle { radius, .. } => radius > 0.0,
                Shape::Rectangle { width, height, .. } => width > 0.0 && height > 0.0,
            };
            if !ok {
                return Err(Error::InvalidMission(format!("region {i} has non-positive extent")));
            }
            if r.shape.hull_points().iter().any(|&p| b.clearance(p) < -1e-9) {
                return Err(Error::InvalidMission(format!("region {i} leaves the arena")));
            }
        }
        for (i, w) in self.walls.iter().enumerate() {
            if !b.contains(w.from) || !b.contains(w.to) {
                return Err(Error::InvalidMission(format!("wall {i} leaves the arena")));
            }
        }
        if let Some(light) = &self.light {
            if b.clearance(light.position) > 0.0 {
                return Err(Error::InvalidMission("light source must be outside the arena".into()));
            }
        }
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        self.boundary.diameter()
    }

    pub fn light_on(&self) -> Option<Vec2> {
        self.light.filter(|l| l.on).map(|l| l.position)
    }

    /// Floor color without the inside-arena check.
    pub fn color_at(&self, p: Vec2) -> FloorColor {
        self.regions
            .iter()
            .rev()
            .find(|r| r.shape.contains(p))
            .map_or(FloorColor::Gray, |r| r.color.into())
    }
}

/// Color of the topmost region containing `p`; later regions are on top.
pub fn floor_color(arena: &ArenaSpec, p: Vec2) -> Result<FloorColor> {
    if !arena.boundary.contains(p) {
        return Err(Error::OutsideArena { x: p.x, y: p.y });
    }
    Ok(arena.color_at(p))
}
