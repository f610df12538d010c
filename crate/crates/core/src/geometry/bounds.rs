use serde::{Deserialize, Serialize};

use super::dyadic::Interval;
use super::rect::RotRect;
use crate::error::{LabError, Result};
use crate::oscillatory::CurveSpec;
use crate::vec2::Vec2;

/// Arc samples used to fit a rectangle.
pub const RECT_SAMPLES: usize = 1024;

/// Default constant `c1` in the side-length budgets `c1 R l m` and `c1 R l^2`.
pub const DEFAULT_RECT_CONSTANT: f64 = 4.0;

/// A rectangle around `{R gamma(t) : t in I}` and its size budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcRect {
    pub rect: RotRect,
    #[serde(rename = "R")]
    pub r: f64,
    pub interval: Interval,
    /// `c1 R l m`.
    pub long_budget: f64,
    /// `c1 R l^2`.
    pub short_budget: f64,
    pub within_budget: bool,
}

/// Rectangle aligned with the chord of `{R gamma(t) : t in I}` containing a
/// 1024-point sample of the arc, each side pushed out by the largest
/// distance the arc can stray from a sample segment.
pub fn bounding_rect(curve: &CurveSpec, r: f64, interval: Interval) -> Result<ArcRect> {
    bounding_rect_with(curve, r, interval, DEFAULT_RECT_CONSTANT)
}

pub fn bounding_rect_with(curve: &CurveSpec, r: f64, interval: Interval, c1: f64) -> Result<ArcRect> {
    let (a, b) = (interval.a, interval.b);
    if !(a >= 1.0 && b <= 2.0) {
        return Err(LabError::invalid(format!("[{a}, {b}] is not inside [1, 2]")));
    }
    if !(b > a) {
        return Err(LabError::invalid("interval has zero length"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(LabError::invalid(format!("R = {r} must be positive")));
    }
    let point = |t: f64| Vec2::new(t, curve.phi(t)) * r;
    let samples: Vec<Vec2> = (0..RECT_SAMPLES)
        .map(|i| point(a + (b - a) * i as f64 / (RECT_SAMPLES - 1) as f64))
        .collect();
    let axis = (samples[RECT_SAMPLES - 1] - samples[0])
        .normalized()
        .ok_or_else(|| LabError::CheckFailed("arc chord has zero length".into()))?;
    let cross = axis.perp();
    let (mut lo_a, mut hi_a, mut lo_c, mut hi_c) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &q in &samples {
        let (u, v) = (q.dot(axis), q.dot(cross));
        lo_a = lo_a.min(u);
        hi_a = hi_a.max(u);
        lo_c = lo_c.min(v);
        hi_c = hi_c.max(v);
    }
    // A sample segment of parameter length h deviates from the arc by at most
    // R h^2 max|phi''| / 8.
    let h = (b - a) / (RECT_SAMPLES - 1) as f64;
    let (_, _, d2_lo, d2_hi) = curve.derivative_bounds(a, b);
    let gap = r * h * h * d2_lo.abs().max(d2_hi.abs()) / 8.0;
    let half_long = 0.5 * (hi_a - lo_a) + gap;
    let half_short = 0.5 * (hi_c - lo_c) + gap;
    let center = axis * (0.5 * (lo_a + hi_a)) + cross * (0.5 * (lo_c + hi_c));
    let half_short = half_short.max(f64::MIN_POSITIVE);
    let rect = if half_long >= half_short {
        RotRect::new(center, axis, half_long, half_short)?
    } else {
        RotRect::new(center, cross, half_short, half_long)?
    };
    if let Some(q) = samples.iter().find(|&&q| !rect.contains(q)) {
        return Err(LabError::CheckFailed(format!("arc sample {q:?} escapes its rectangle")));
    }
    let l = b - a;
    let long_budget = c1 * r * l * curve.m;
    let short_budget = c1 * r * l * l;
    Ok(ArcRect {
        rect,
        r,
        interval,
        long_budget,
        short_budget,
        within_budget: rect.half_long <= long_budget && rect.half_short <= short_budget,
    })
}
