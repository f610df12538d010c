use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::vec2::Vec2;

/// A rectangle with an arbitrary orientation. `axis` is the unit direction of
/// the long side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotRect {
    pub center: Vec2,
    pub axis: Vec2,
    pub half_long: f64,
    pub half_short: f64,
}

impl RotRect {
    pub fn new(center: Vec2, axis: Vec2, half_long: f64, half_short: f64) -> Result<Self> {
        let axis = axis
            .normalized()
            .ok_or_else(|| LabError::invalid("rectangle axis must be a nonzero vector"))?;
        if !(half_short > 0.0 && half_long >= half_short && half_long.is_finite()) {
            return Err(LabError::invalid(format!(
                "need half_long >= half_short > 0, got {half_long} and {half_short}"
            )));
        }
        if !center.is_finite() {
            return Err(LabError::invalid("rectangle center must be finite"));
        }
        Ok(RotRect { center, axis, half_long, half_short })
    }

    /// Unit direction of the short side.
    pub fn cross_axis(&self) -> Vec2 {
        self.axis.perp()
    }

    /// Coordinates of `p` along the long and short axes, relative to the center.
    pub fn local(&self, p: Vec2) -> (f64, f64) {
        let d = p - self.center;
        (d.dot(self.axis), d.dot(self.cross_axis()))
    }

    pub fn point_at(&self, along: f64, across: f64) -> Vec2 {
        self.center + self.axis * along + self.cross_axis() * across
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let (a, b) = self.local(p);
        a.abs() <= self.half_long && b.abs() <= self.half_short
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let (l, s) = (self.half_long, self.half_short);
        [
            self.point_at(-l, -s),
            self.point_at(l, -s),
            self.point_at(l, s),
            self.point_at(-l, s),
        ]
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_long * self.half_short
    }

    pub fn long_side(&self) -> f64 {
        2.0 * self.half_long
    }

    pub fn short_side(&self) -> f64 {
        2.0 * self.half_short
    }
}
