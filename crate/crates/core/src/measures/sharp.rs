use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Atom, AtomicMeasure, Provenance};
use crate::error::{LabError, Result};
use crate::geometry::RotRect;
use crate::sum::ComplexSum;
use crate::vec2::Vec2;
use crate::DEFAULT_ATOM_BUDGET;

/// Which of the two bump-train constructions to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharpCase {
    /// `alpha > 1`: frequencies in the window `[R, R + sqrt R]`.
    CaseI,
    /// `alpha <= 1/2`: frequencies in the dyadic window `[R, 2R]`.
    CaseIii,
}

/// A modulated train of `T` translated bumps whose Fourier transform is large
/// on the rectangle `D` hugging the arc `{(t, t^p)}` over the frequency window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpExampleSpec {
    pub p: f64,
    pub alpha: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub case_id: SharpCase,
    #[serde(default = "default_bump_order")]
    pub bump_order: u32,
    #[serde(default = "default_samples")]
    pub samples_per_bump: usize,
}

fn default_bump_order() -> u32 {
    2
}

fn default_samples() -> usize {
    8
}

/// Geometry derived from a [`SharpExampleSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedGeometry {
    /// Rectangle in frequency space containing the arc over the window.
    #[serde(rename = "rect_D")]
    pub rect_d: RotRect,
    /// Long-axis direction of `D`; the bumps are translated along it.
    pub v: Vec2,
    #[serde(rename = "c_D")]
    pub c_d: Vec2,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "N")]
    pub n: usize,
    /// Bump support: the rectangle dual to `D`, centered at the origin.
    pub dual: RotRect,
    /// Frequency window `[a, b]` covered by `D`.
    pub window: [f64; 2],
    /// `sup |psi|`.
    pub psi_amplitude: f64,
    /// Required order of `|psi_hat|` on `D`.
    pub psi_hat_target: f64,
    /// `min |psi_hat| / psi_hat_target` over the center and corners of `D`.
    pub psi_hat_ratio: f64,
}

/// Arc sample count used to fit `D`.
const ARC_SAMPLES: usize = 1024;

/// Smallest admissible `min |psi_hat| / target`.
const PSI_HAT_MIN_RATIO: f64 = 0.1;

impl SharpExampleSpec {
    pub fn new(p: f64, alpha: f64, r: f64, case_id: SharpCase) -> Result<Self> {
        let spec = SharpExampleSpec {
            p,
            alpha,
            r,
            case_id,
            bump_order: default_bump_order(),
            samples_per_bump: default_samples(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(LabError::invalid(format!("p = {} must exceed 1", self.p)));
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(LabError::invalid(format!("alpha = {} must lie in (0, 2)", self.alpha)));
        }
        if !(self.r >= 2.0 && self.r.is_finite()) {
            return Err(LabError::invalid(format!("R = {} must be >= 2", self.r)));
        }
        match self.case_id {
            SharpCase::CaseI if self.alpha <= 1.0 => {
                return Err(LabError::invalid("case_i needs alpha > 1"));
            }
            SharpCase::CaseIii if self.alpha > 0.5 => {
                return Err(LabError::invalid("case_iii needs alpha <= 1/2"));
            }
            _ => {}
        }
        if self.bump_order < 2 {
            return Err(LabError::invalid("bump_order must be >= 2"));
        }
        if self.samples_per_bump < 8 {
            return Err(LabError::invalid("samples_per_bump must be >= 8"));
        }
        Ok(())
    }

    /// Number of translates `T` (nearest integer, at least 1).
    pub fn translates(&self) -> usize {
        let e = match self.case_id {
            SharpCase::CaseI => (self.p - 0.5) * (self.alpha - 1.0),
            SharpCase::CaseIii => self.alpha,
        };
        round_positive(self.r.powf(e))
    }

    /// Number of sub-rectangles `N` of `D`.
    pub fn subrectangles(&self) -> usize {
        let e = match self.case_id {
            SharpCase::CaseI => self.p - 0.5,
            SharpCase::CaseIii => self.p,
        };
        round_positive(self.r.powf(e) / self.translates() as f64)
    }

    /// Frequency window `[a, b]` of the curve parameter.
    pub fn window(&self) -> [f64; 2] {
        match self.case_id {
            SharpCase::CaseI => [self.r, self.r + self.r.sqrt()],
            SharpCase::CaseIii => [self.r, 2.0 * self.r],
        }
    }

    /// Nominal (short, long) side lengths of `D`.
    pub fn nominal_sides(&self) -> (f64, f64) {
        match self.case_id {
            SharpCase::CaseI => (1.0, self.r.powf(self.p - 0.5)),
            SharpCase::CaseIii => (self.r, self.r.powf(self.p)),
        }
    }

    /// `sup |psi|`, which fixes the total variation at order one.
    pub fn psi_amplitude(&self) -> f64 {
        match self.case_id {
            SharpCase::CaseI => self.r.powf((self.p - 0.5) * (2.0 - self.alpha)),
            SharpCase::CaseIii => self.r.powf(self.p + 1.0 - self.alpha),
        }
    }

    /// Order of magnitude `|psi_hat|` must reach on `D`.
    pub fn psi_hat_target(&self) -> f64 {
        match self.case_id {
            SharpCase::CaseI => self.r.powf((self.p - 0.5) * (1.0 - self.alpha)),
            SharpCase::CaseIii => self.r.powf(-self.alpha),
        }
    }

    pub fn atom_count(&self) -> u128 {
        self.translates() as u128 * (self.samples_per_bump as u128).pow(2)
    }
}

fn round_positive(x: f64) -> usize {
    (x.round() as usize).max(1)
}

/// Fits the rectangle `D` to the arc `t -> (t, t^p)` over `[a, b]`: long side
/// along the chord, sides measured from a dense sample and inflated by the
/// sampling gap, short side at least half its nominal size.
fn fit_rect(spec: &SharpExampleSpec) -> Result<RotRect> {
    let [a, b] = spec.window();
    let p = spec.p;
    let arc = |t: f64| Vec2::new(t, t.powf(p));
    let v = (arc(b) - arc(a))
        .normalized()
        .ok_or_else(|| LabError::CheckFailed("degenerate chord".into()))?;
    let w = v.perp();
    let (mut lo_v, mut hi_v, mut lo_w, mut hi_w) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let h = (b - a) / (ARC_SAMPLES - 1) as f64;
    for i in 0..ARC_SAMPLES {
        let q = arc(a + i as f64 * h);
        let (s, u) = (q.dot(v), q.dot(w));
        lo_v = lo_v.min(s);
        hi_v = hi_v.max(s);
        lo_w = lo_w.min(u);
        hi_w = hi_w.max(u);
    }
    // Between samples the arc leaves the chord of a sample segment by at most
    // h^2 sup|phi''| / 8.
    let curv = p * (p - 1.0) * a.max(b).powf(p - 2.0).max(a.min(b).powf(p - 2.0));
    let gap = h * h * curv / 8.0;
    let (nom_short, _) = spec.nominal_sides();
    let long = (hi_v - lo_v) * 1.02 + 2.0 * gap;
    let short = ((hi_w - lo_w) * 1.05 + 2.0 * gap).max(nom_short / 2.0);
    let center = v * ((lo_v + hi_v) / 2.0) + w * ((lo_w + hi_w) / 2.0);
    RotRect::new(center, v, long / 2.0, short / 2.0)
}

/// One-dimensional midpoint samples of the bump `(1 - u^2)^q` on `[-1, 1]`.
fn bump_nodes(q: u32, s: usize) -> Vec<(f64, f64)> {
    (0..s)
        .map(|i| {
            let u = -1.0 + (2 * i + 1) as f64 / s as f64;
            (u, (1.0 - u * u).powi(q as i32))
        })
        .collect()
}

/// `sum_i f(u_i) exp(-2 pi i s u_i)` for the one-dimensional bump samples.
fn bump_ft_1d(nodes: &[(f64, f64)], s: f64) -> Complex64 {
    let mut acc = ComplexSum::new();
    for &(u, f) in nodes {
        acc.add(Complex64::from_polar(f, -TAU * (s * u)));
    }
    acc.value()
}

pub fn build_sharp_example(spec: &SharpExampleSpec) -> Result<(AtomicMeasure, DerivedGeometry)> {
    build_sharp_example_with_budget(spec, DEFAULT_ATOM_BUDGET)
}

/// Quadrature of `mu(y) = exp(2 pi i y.c_D) sum_{k=1}^T psi(y - k v / T)`
/// with `psi` a tensor bump supported on the rectangle dual to `D`.
///
/// The measure is stored as the Minkowski sum of one modulated bump grid and
/// the list of translates `k v / T`, which carry the matching phase factors.
pub fn build_sharp_example_with_budget(
    spec: &SharpExampleSpec,
    budget: usize,
) -> Result<(AtomicMeasure, DerivedGeometry)> {
    spec.validate()?;
    let required = spec.atom_count();
    if required > budget as u128 {
        return Err(LabError::Budget {
            what: "sharp-example atoms",
            required,
            budget: budget as u128,
        });
    }
    let rect = fit_rect(spec)?;
    let v = rect.axis;
    let w = rect.cross_axis();
    let c_d = rect.center;
    // Full widths of the dual rectangle: reciprocal side lengths of D, with
    // the short side along v.
    let hv = 1.0 / (2.0 * rect.long_side());
    let hw = 1.0 / (2.0 * rect.short_side());
    let dual = RotRect::new(Vec2::ZERO, w, hw, hv)?;

    let s = spec.samples_per_bump;
    let q = spec.bump_order;
    let amp = spec.psi_amplitude();
    let nodes = bump_nodes(q, s);
    let cell = (2.0 * hv / s as f64) * (2.0 * hw / s as f64);

    let target = spec.psi_hat_target();
    let psi_hat = |eta: Vec2| {
        amp * cell * (bump_ft_1d(&nodes, eta.dot(v) * hv) * bump_ft_1d(&nodes, eta.dot(w) * hw)).norm()
    };
    let (l, sh) = (rect.half_long, rect.half_short);
    let probes = [
        Vec2::ZERO,
        v * l + w * sh,
        v * l - w * sh,
        v * (-l) + w * sh,
        v * (-l) - w * sh,
    ];
    let ratio = probes.iter().map(|&e| psi_hat(e)).fold(f64::INFINITY, f64::min) / target;
    if ratio < PSI_HAT_MIN_RATIO {
        return Err(LabError::CheckFailed(format!(
            "|psi_hat| on D is {ratio:.3e} times the required lower bound"
        )));
    }

    // Phases are reduced modulo one cycle before scaling by 2 pi.
    let cv = c_d.dot(v);
    let cw = c_d.dot(w);
    let mut grid = Vec::with_capacity(s * s);
    for &(ui, fi) in &nodes {
        for &(uj, fj) in &nodes {
            let (a, b) = (ui * hv, uj * hw);
            let pos = v * a + w * b;
            let cycles = (a * cv + b * cw).rem_euclid(1.0);
            grid.push(Atom::new(pos, Complex64::from_polar(amp * fi * fj * cell, TAU * cycles)));
        }
    }
    let t = spec.translates();
    let shifts = (1..=t)
        .map(|k| {
            let frac = k as f64 / t as f64;
            let cycles = (frac * cv).rem_euclid(1.0);
            Atom::new(v * frac, Complex64::from_polar(1.0, TAU * cycles))
        })
        .collect();
    let spacing = (2.0 * hv / s as f64).max(2.0 * hw / s as f64);
    let measure =
        AtomicMeasure::from_factors(vec![grid, shifts], spec.alpha, Provenance::SharpExample, spacing)?;
    let geom = DerivedGeometry {
        rect_d: rect,
        v,
        c_d,
        t,
        n: spec.subrectangles(),
        dual,
        window: spec.window(),
        psi_amplitude: amp,
        psi_hat_target: target,
        psi_hat_ratio: ratio,
    };
    Ok((measure, geom))
}
