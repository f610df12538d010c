//! Areas of intersections of translated tubular neighbourhoods of two arcs
//! of a scaled curve, and the parameter-window bound behind them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dyadic::{Interval, WhitneyPair};
use super::rect::RotRect;
use crate::error::{LabError, Result};
use crate::oscillatory::CurveSpec;
use crate::vec2::Vec2;

/// Parameters shared by the tube experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeParams {
    #[serde(rename = "R")]
    pub r: f64,
    pub delta: f64,
    /// Tube radius factor: the radius is `C R^delta`.
    #[serde(rename = "C", default = "default_c_big")]
    pub c_big: f64,
    /// Separation factor: `dist(I, J) >= c 2^-n`.
    #[serde(rename = "c", default = "default_c_small")]
    pub c_small: f64,
    pub n: u32,
    #[serde(default = "default_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_c_big() -> f64 {
    2.0
}

fn default_c_small() -> f64 {
    0.5
}

fn default_samples() -> usize {
    100_000
}

/// Fewest Monte-Carlo samples accepted.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Samples per parallel chunk; chunk `j` draws from stream `j` of the seed.
const MC_CHUNK: usize = 4096;

/// Parameter steps used to locate the part of one arc near the other.
const ARC_STEPS: usize = 4096;

impl TubeParams {
    pub fn new(r: f64, delta: f64, n: u32) -> Self {
        TubeParams {
            r,
            delta,
            c_big: default_c_big(),
            c_small: default_c_small(),
            n,
            mc_samples: default_samples(),
            seed: 0,
        }
    }

    pub fn radius(&self) -> f64 {
        self.c_big * self.r.powf(self.delta)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(LabError::invalid(format!("R = {} must be >= 1", self.r)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LabError::invalid(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.c_big > 0.0 && self.c_small > 0.0) {
            return Err(LabError::invalid("C and c must be positive"));
        }
        if self.n < 1 {
            return Err(LabError::invalid("n must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeIntersection {
    pub x_shift: Vec2,
    pub i_tilde: Interval,
    pub j_tilde: Interval,
    #[serde(rename = "R")]
    pub r: f64,
    pub delta: f64,
    #[serde(rename = "C")]
    pub c_big: f64,
    pub n: u32,
    pub m: f64,
    pub area: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: usize,
    /// Area of the sampled rectangle.
    pub region_area: f64,
    /// `R^(2 delta) 2^n m`.
    pub bound: f64,
    pub bound_ratio: f64,
    pub note: Option<String>,
}

/// The pair's intervals, each lengthened by `2^-n / 10` about its center and
/// clipped to `[1, 2]`.
pub fn whitney_tube_intervals(pair: &WhitneyPair) -> (Interval, Interval) {
    let extra = pair.i.len() / 10.0;
    let clip = |iv: Interval| Interval { a: iv.a.max(1.0), b: iv.b.min(2.0) };
    (clip(pair.i.interval().widened(extra)), clip(pair.j.interval().widened(extra)))
}

/// Shift that moves `R gamma(inf I)` onto `R gamma(mid J)`.
pub fn meeting_shift(curve: &CurveSpec, r: f64, i: &Interval, j: &Interval) -> Vec2 {
    (curve.point(j.mid()) - curve.point(i.a)) * r
}

/// Distance from `z` to `{shift + R gamma(t) : t in iv}`, exact whenever it
/// is at most `reach` and `R` exceeds a few tube radii. Any arc point within
/// `reach` of `z` has its first coordinate within `reach` of `z.x`, which
/// pins a short parameter window; the foot of the perpendicular is found
/// there by bisection on `(P(t) - z) . P'(t)`.
fn dist_to_arc(curve: &CurveSpec, r: f64, shift: Vec2, iv: &Interval, z: Vec2, reach: f64) -> f64 {
    let lo = ((z.x - shift.x - reach) / r).max(iv.a);
    let hi = ((z.x - shift.x + reach) / r).min(iv.b);
    if lo > hi {
        return f64::INFINITY;
    }
    let p = |t: f64| shift + Vec2::new(t, curve.phi(t)) * r;
    let g = |t: f64| (p(t) - z).dot(Vec2::new(1.0, curve.phi_d1(t)));
    let foot = if g(lo) >= 0.0 {
        lo
    } else if g(hi) <= 0.0 {
        hi
    } else {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..64 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if g(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    (p(foot) - z).norm().min((p(lo) - z).norm()).min((p(hi) - z).norm())
}

fn check_intervals(params: &TubeParams, i: &Interval, j: &Interval) -> Result<()> {
    let unit = Interval { a: 1.0, b: 2.0 };
    if !(i.within(&unit) && j.within(&unit)) || i.is_empty() || j.is_empty() {
        return Err(LabError::invalid("I and J must be nondegenerate subintervals of [1, 2]"));
    }
    let need = params.c_small * (-(params.n as f64)).exp2();
    if i.dist(j) < need {
        return Err(LabError::invalid(format!(
            "dist(I, J) = {} is below c 2^-n = {need}",
            i.dist(j)
        )));
    }
    Ok(())
}

/// Rectangle containing every point within `rho_max` of both tubes' arcs:
/// the part of the `J` arc within `2 rho_max` of the shifted `I` arc, boxed
/// along its chord and inflated by `rho_max`.
fn sampling_region(
    curve: &CurveSpec,
    r: f64,
    i: &Interval,
    j: &Interval,
    shift: Vec2,
    rho_max: f64,
) -> Option<RotRect> {
    let step = j.len() / ARC_STEPS as f64;
    let speed = r * curve.derivative_bounds(j.a, j.b).1.abs().hypot(1.0);
    let reach = 2.0 * rho_max + speed * step;
    let near: Vec<usize> = (0..=ARC_STEPS)
        .filter(|&k| {
            let s = j.a + k as f64 * step;
            dist_to_arc(curve, r, shift, i, curve.point(s) * r, reach) <= reach
        })
        .collect();
    let (first, last) = (*near.first()?, *near.last()?);
    let s0 = (j.a + (first as f64 - 1.0) * step).max(j.a);
    let s1 = (j.a + (last as f64 + 1.0) * step).min(j.b);
    let pts: Vec<Vec2> = (0..=ARC_STEPS)
        .map(|k| curve.point(s0 + (s1 - s0) * k as f64 / ARC_STEPS as f64) * r)
        .collect();
    let axis = (pts[ARC_STEPS] - pts[0]).normalized().unwrap_or(Vec2::new(1.0, 0.0));
    let cross = axis.perp();
    let (mut la, mut ha, mut lc, mut hc) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for q in &pts {
        la = la.min(q.dot(axis));
        ha = ha.max(q.dot(axis));
        lc = lc.min(q.dot(cross));
        hc = hc.max(q.dot(cross));
    }
    let h = (s1 - s0) / ARC_STEPS as f64;
    let (_, _, d2lo, d2hi) = curve.derivative_bounds(s0, s1);
    let gap = r * h * h * d2lo.abs().max(d2hi.abs()) / 8.0;
    let hl = 0.5 * (ha - la) + gap + rho_max;
    let hs = 0.5 * (hc - lc) + gap + rho_max;
    let center = axis * (0.5 * (la + ha)) + cross * (0.5 * (lc + hc));
    if hl >= hs {
        RotRect::new(center, axis, hl, hs).ok()
    } else {
        RotRect::new(center, cross, hs, hl).ok()
    }
}

/// Monte-Carlo area of `(x + Gamma_{R,I} + B(0, C R^delta)) cap
/// (Gamma_{R,J} + B(0, C R^delta))` for one `C`.
pub fn tube_intersection_area(
    curve: &CurveSpec,
    params: &TubeParams,
    i_tilde: Interval,
    j_tilde: Interval,
    x_shift: Vec2,
) -> Result<TubeIntersection> {
    let mut out = tube_intersection_areas(curve, params, &[params.c_big], i_tilde, j_tilde, x_shift)?;
    Ok(out.remove(0))
}

/// [`tube_intersection_area`] for several tube radius factors, all from the
/// same samples (drawn in the region of the largest `C`), so the areas are
/// monotone in `C` sample by sample.
pub fn tube_intersection_areas(
    curve: &CurveSpec,
    params: &TubeParams,
    c_values: &[f64],
    i_tilde: Interval,
    j_tilde: Interval,
    x_shift: Vec2,
) -> Result<Vec<TubeIntersection>> {
    params.validate()?;
    check_intervals(params, &i_tilde, &j_tilde)?;
    if params.mc_samples < MIN_MC_SAMPLES {
        return Err(LabError::invalid(format!(
            "mc_samples = {} is below {MIN_MC_SAMPLES}",
            params.mc_samples
        )));
    }
    if c_values.is_empty() || c_values.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(LabError::invalid("C values must be positive"));
    }
    if !x_shift.is_finite() {
        return Err(LabError::invalid("shift must be finite"));
    }
    let r = params.r;
    let scale = r.powf(params.delta);
    let rhos: Vec<f64> = c_values.iter().map(|c| c * scale).collect();
    let rho_max = rhos.iter().cloned().fold(0.0, f64::max);
    let bound = r.powf(2.0 * params.delta) * (params.n as f64).exp2() * curve.m;
    let n = params.mc_samples;

    let region = sampling_region(curve, r, &i_tilde, &j_tilde, x_shift, rho_max);
    let (hits, region_area) = match region {
        None => (vec![0u64; rhos.len()], 0.0),
        Some(rect) => {
            let chunks = n.div_ceil(MC_CHUNK);
            let per_chunk: Vec<Vec<u64>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                    rng.set_stream(c as u64);
                    let count = MC_CHUNK.min(n - c * MC_CHUNK);
                    let mut hits = vec![0u64; rhos.len()];
                    for _ in 0..count {
                        let u: f64 = rng.random_range(-1.0..1.0);
                        let v: f64 = rng.random_range(-1.0..1.0);
                        let z = rect.point_at(u * rect.half_long, v * rect.half_short);
                        let db = dist_to_arc(curve, r, Vec2::ZERO, &j_tilde, z, rho_max);
                        if db > rho_max {
                            continue;
                        }
                        let da = dist_to_arc(curve, r, x_shift, &i_tilde, z, rho_max);
                        for (h, &rho) in hits.iter_mut().zip(&rhos) {
                            if da <= rho && db <= rho {
                                *h += 1;
                            }
                        }
                    }
                    hits
                })
                .collect();
            let mut total = vec![0u64; rhos.len()];
            for h in per_chunk {
                for (t, x) in total.iter_mut().zip(h) {
                    *t += x;
                }
            }
            (total, rect.area())
        }
    };

    Ok(c_values
        .iter()
        .zip(hits)
        .map(|(&c, h)| {
            let f = h as f64 / n as f64;
            let area = region_area * f;
            let std_error = region_area * (f * (1.0 - f) / n as f64).sqrt();
            let note = if region.is_none() {
                Some("arcs never come within two tube radii; the tubes are disjoint".to_string())
            } else if h == 0 {
                Some("no sample hit both tubes; the intersection may be empty".to_string())
            } else {
                None
            };
            TubeIntersection {
                x_shift,
                i_tilde,
                j_tilde,
                r,
                delta: params.delta,
                c_big: c,
                n: params.n,
                m: curve.m,
                area,
                std_error,
                hits: h,
                samples: n,
                region_area,
                bound,
                bound_ratio: area / bound,
                note,
            }
        })
        .collect())
}

/// Result of [`w_bound_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WScan {
    /// Smallest `t` in `I` whose tube ball meets the `J` tube.
    pub t_min: f64,
    /// Largest `w` such that the ball at `t_min + w` still meets the `J` tube.
    pub w_max: f64,
    /// `8 C 2^n R^(delta - 1) m1 / (c m2)`.
    pub bound: f64,
    pub m1: f64,
    pub m2: f64,
    pub within_bound: bool,
}

/// Grid points used for `t` and `w`.
const W_GRID: usize = 20_000;

/// Bisection steps refining a grid crossing.
const W_REFINE: usize = 50;

/// Finds `t_min` and the largest admissible `w` by scanning `I` on a grid,
/// refining each crossing by bisection. A ball at `x + R gamma(u)` meets the
/// `J` tube iff `dist(x + R gamma(u), Gamma_{R,J}) <= 2 C R^delta`, which is
/// the one-dimensional minimisation over the partner parameter.
pub fn w_bound_scan(
    curve: &CurveSpec,
    params: &TubeParams,
    i_tilde: Interval,
    j_tilde: Interval,
    x_shift: Vec2,
) -> Result<WScan> {
    params.validate()?;
    check_intervals(params, &i_tilde, &j_tilde)?;
    let r = params.r;
    let reach = 2.0 * params.radius();
    let meets = |u: f64| {
        let z = x_shift + curve.point(u) * r;
        dist_to_arc(curve, r, Vec2::ZERO, &j_tilde, z, reach) <= reach
    };
    let grid = |k: usize, a: f64, b: f64| a + (b - a) * k as f64 / W_GRID as f64;

    let first = (0..=W_GRID)
        .find(|&k| meets(grid(k, i_tilde.a, i_tilde.b)))
        .ok_or_else(|| LabError::invalid("the tubes never meet: no admissible (t, s) at w = 0"))?;
    let mut t_min = grid(first, i_tilde.a, i_tilde.b);
    if first > 0 {
        let (mut a, mut b) = (grid(first - 1, i_tilde.a, i_tilde.b), t_min);
        for _ in 0..W_REFINE {
            let mid = 0.5 * (a + b);
            if meets(mid) {
                b = mid;
            } else {
                a = mid;
            }
        }
        t_min = b;
    }

    let span = i_tilde.b - t_min;
    let last = (0..=W_GRID).rev().find(|&k| meets(t_min + grid(k, 0.0, span))).unwrap_or(0);
    let mut w_max = grid(last, 0.0, span);
    if last < W_GRID {
        let (mut a, mut b) = (w_max, grid(last + 1, 0.0, span));
        for _ in 0..W_REFINE {
            let mid = 0.5 * (a + b);
            if meets(t_min + mid) {
                a = mid;
            } else {
                b = mid;
            }
        }
        w_max = a;
    }

    let (_, m1, m2, _) = curve.derivative_bounds(1.0, 2.0);
    let bound = 8.0 * params.c_big * (params.n as f64).exp2() * r.powf(params.delta - 1.0) * m1
        / (params.c_small * m2);
    Ok(WScan { t_min, w_max, bound, m1, m2, within_bound: w_max <= bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{whitney_pairs, DyadicInterval};

    fn setup(n: u32) -> (Interval, Interval) {
        let pair = WhitneyPair::new(DyadicInterval::new(n, 0).unwrap(), DyadicInterval::new(n, 3).unwrap()).unwrap();
        whitney_tube_intervals(&pair)
    }

    #[test]
    fn distance_matches_dense_scan() {
        let c = CurveSpec::parabola();
        let iv = Interval::new(1.2, 1.6).unwrap();
        let r = 64.0;
        for z in [Vec2::new(90.0, 120.0), Vec2::new(80.0, 100.0), Vec2::new(76.0, 93.0)] {
            let dense = (0..=200_000)
                .map(|k| {
                    let t = iv.a + iv.len() * k as f64 / 200_000.0;
                    (c.point(t) * r - z).norm()
                })
                .fold(f64::INFINITY, f64::min);
            let d = dist_to_arc(&c, r, Vec2::ZERO, &iv, z, 50.0);
            if dense <= 50.0 {
                assert!((d - dense).abs() < 1e-6, "{d} vs {dense}");
            }
        }
    }

    #[test]
    fn separated_tubes_have_zero_area() {
        let c = CurveSpec::parabola();
        let (i, j) = setup(3);
        let mut p = TubeParams::new(256.0, 0.1, 3);
        p.mc_samples = 20_000;
        let normal = Vec2::new(-1.0, 1.0).normalized().unwrap();
        let out = tube_intersection_area(&c, &p, i, j, normal * (1e4 * p.radius())).unwrap();
        assert_eq!(out.area, 0.0);
        assert!(out.note.is_some());
    }

    #[test]
    fn overlapping_intervals_are_rejected() {
        let c = CurveSpec::parabola();
        let i = Interval::new(1.0, 1.25).unwrap();
        let p = TubeParams::new(256.0, 0.1, 3);
        assert!(tube_intersection_area(&c, &p, i, i, Vec2::ZERO).is_err());
    }

    #[test]
    fn area_is_monotone_in_c_and_below_tube_area() {
        let c = CurveSpec::parabola();
        let (i, j) = setup(3);
        let mut p = TubeParams::new(256.0, 0.1, 3);
        p.mc_samples = 20_000;
        let x = meeting_shift(&c, p.r, &i, &j);
        let out = tube_intersection_areas(&c, &p, &[1.0, 2.0, 4.0], i, j, x).unwrap();
        assert!(out[0].area <= out[1].area && out[1].area <= out[2].area);
        assert!(out[1].area > 0.0);
        for o in &out {
            let rho = o.c_big * p.r.powf(p.delta);
            let len_i = p.r * i.len() * (1.0 + 16.0f64).sqrt();
            assert!(o.area <= 2.0 * rho * len_i + std::f64::consts::PI * rho * rho);
        }
    }

    #[test]
    fn same_seed_same_area() {
        let c = CurveSpec::parabola();
        let (i, j) = setup(2);
        let mut p = TubeParams::new(128.0, 0.1, 2);
        p.mc_samples = 10_000;
        p.seed = 9;
        let x = meeting_shift(&c, p.r, &i, &j);
        let a = tube_intersection_area(&c, &p, i, j, x).unwrap();
        let b = tube_intersection_area(&c, &p, i, j, x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn w_scan_respects_bound_and_scales() {
        let c = CurveSpec::parabola();
        let (i, j) = setup(3);
        let w_at = |r: f64| {
            let p = TubeParams::new(r, 0.1, 3);
            let x = meeting_shift(&c, r, &i, &j);
            w_bound_scan(&c, &p, i, j, x).unwrap()
        };
        let (a, b) = (w_at(256.0), w_at(1024.0));
        assert!(a.within_bound && b.within_bound);
        let ratio = a.w_max / b.w_max;
        assert!((2.0..=8.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn w_scan_rejects_far_tubes() {
        let c = CurveSpec::parabola();
        let (i, j) = setup(3);
        let p = TubeParams::new(256.0, 0.1, 3);
        assert!(w_bound_scan(&c, &p, i, j, Vec2::new(-1e5, 1e5)).is_err());
    }

    #[test]
    fn pairs_give_admissible_intervals() {
        for pair in whitney_pairs(3).unwrap() {
            let (i, j) = whitney_tube_intervals(&pair);
            assert!(i.dist(&j) >= 0.5 * pair.i.len());
        }
    }
}
