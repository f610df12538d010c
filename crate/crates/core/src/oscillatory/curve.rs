use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Graph functions `phi` for curves `t -> (t, phi(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveFamily {
    /// `phi(t) = t^2`.
    Parabola,
    /// `phi(t) = t^p`.
    Power { p: f64 },
    /// `phi(t) = R^(p-1) t^p`, the rescaling that maps `[R, 2R]` onto `[1, 2]`.
    PowerRescaled {
        p: f64,
        #[serde(rename = "R")]
        r: f64,
    },
    /// `phi(t) = a t^2 + b t + c`.
    Quadratic { a: f64, b: f64, c: f64 },
    /// `phi(t) = slope * t`; has no curvature and never passes validation.
    Linear { slope: f64 },
}

impl CurveFamily {
    /// `phi(t) = m t^2 / 2 + m t / 2`, with `phi' = m (t + 1/2)` and `phi'' = m`.
    pub fn m_curve(m: f64) -> Self {
        CurveFamily::Quadratic { a: m / 2.0, b: m / 2.0, c: 0.0 }
    }

    pub fn phi(&self, t: f64) -> f64 {
        match *self {
            CurveFamily::Parabola => t * t,
            CurveFamily::Power { p } => t.powf(p),
            CurveFamily::PowerRescaled { p, r } => r.powf(p - 1.0) * t.powf(p),
            CurveFamily::Quadratic { a, b, c } => (a * t + b) * t + c,
            CurveFamily::Linear { slope } => slope * t,
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        match *self {
            CurveFamily::Parabola => 2.0 * t,
            CurveFamily::Power { p } => p * t.powf(p - 1.0),
            CurveFamily::PowerRescaled { p, r } => r.powf(p - 1.0) * p * t.powf(p - 1.0),
            CurveFamily::Quadratic { a, b, .. } => 2.0 * a * t + b,
            CurveFamily::Linear { slope } => slope,
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match *self {
            CurveFamily::Parabola => 2.0,
            CurveFamily::Power { p } => p * (p - 1.0) * t.powf(p - 2.0),
            CurveFamily::PowerRescaled { p, r } => r.powf(p - 1.0) * p * (p - 1.0) * t.powf(p - 2.0),
            CurveFamily::Quadratic { a, .. } => 2.0 * a,
            CurveFamily::Linear { .. } => 0.0,
        }
    }

    /// Coefficients `(a, b, c)` when `phi` is exactly a quadratic polynomial.
    pub fn quadratic_coeffs(&self) -> Option<(f64, f64, f64)> {
        match *self {
            CurveFamily::Parabola => Some((1.0, 0.0, 0.0)),
            CurveFamily::Power { p } if p == 2.0 => Some((1.0, 0.0, 0.0)),
            CurveFamily::PowerRescaled { p, r } if p == 2.0 => Some((r, 0.0, 0.0)),
            CurveFamily::Quadratic { a, b, c } => Some((a, b, c)),
            CurveFamily::Linear { slope } => Some((0.0, slope, 0.0)),
            _ => None,
        }
    }

    /// The derivative scale `m` each family is designed around.
    pub fn natural_m(&self) -> f64 {
        match *self {
            CurveFamily::Parabola => 2.0,
            CurveFamily::Power { p } => p,
            CurveFamily::PowerRescaled { p, r } => r.powf(p - 1.0),
            CurveFamily::Quadratic { a, .. } => 2.0 * a,
            CurveFamily::Linear { slope } => slope.abs(),
        }
    }

    /// `phi -> factor * phi`.
    pub fn scaled(&self, factor: f64) -> Option<CurveFamily> {
        self.quadratic_coeffs().map(|(a, b, c)| CurveFamily::Quadratic {
            a: factor * a,
            b: factor * b,
            c: factor * c,
        })
    }
}

/// Default comparability constant `c0` in `phi'/m, phi''/m in [1/c0, c0]`.
pub const DEFAULT_COMPARABILITY: f64 = 8.0;

/// Grid size for the derivative checks on `[1, 2]`.
const CHECK_POINTS: usize = 1024;

/// A curve `gamma(t) = (t, phi(t))` on `[1, 2]` whose first two derivatives
/// are comparable to `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub family: CurveFamily,
    pub m: f64,
    pub c0: f64,
}

impl CurveSpec {
    pub fn new(family: CurveFamily, m: f64) -> Result<Self> {
        Self::with_comparability(family, m, DEFAULT_COMPARABILITY)
    }

    pub fn with_comparability(family: CurveFamily, m: f64, c0: f64) -> Result<Self> {
        let spec = CurveSpec { family, m, c0 };
        spec.validate()?;
        Ok(spec)
    }

    /// `t^2` with `m = 2`.
    pub fn parabola() -> Self {
        CurveSpec { family: CurveFamily::Parabola, m: 2.0, c0: DEFAULT_COMPARABILITY }
    }

    /// `R^(p-1) t^p` with `m = R^(p-1)`. The comparability constant is the
    /// default or the smallest one the derivatives of `t^p` allow, whichever
    /// is larger.
    pub fn power_rescaled(p: f64, r: f64) -> Result<Self> {
        if !(p > 1.0 && r >= 1.0) {
            return Err(LabError::invalid(format!("power_rescaled needs p > 1 and R >= 1, got {p}, {r}")));
        }
        let family = CurveFamily::PowerRescaled { p, r };
        let m = r.powf(p - 1.0);
        // phi'/m = p t^(p-1) and phi''/m = p (p-1) t^(p-2) drift away from 1
        // as p grows, so the comparability constant widens to fit them.
        let mut c0 = DEFAULT_COMPARABILITY;
        for i in 0..CHECK_POINTS {
            let t = 1.0 + i as f64 / (CHECK_POINTS - 1) as f64;
            for ratio in [family.d1(t) / m, family.d2(t) / m] {
                c0 = c0.max(ratio * (1.0 + 1e-12)).max((1.0 + 1e-12) / ratio);
            }
        }
        Self::with_comparability(family, m, c0)
    }

    /// `m t^2 / 2 + m t / 2`.
    pub fn m_curve(m: f64) -> Result<Self> {
        if !(m >= 1.0) {
            return Err(LabError::invalid(format!("m = {m} must be >= 1")));
        }
        Self::new(CurveFamily::m_curve(m), m)
    }

    /// Uses the family's own derivative scale.
    pub fn from_family(family: CurveFamily) -> Result<Self> {
        Self::new(family, family.natural_m())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(LabError::invalid(format!("m = {} must be >= 1", self.m)));
        }
        if !(self.c0 >= 1.0) {
            return Err(LabError::invalid("comparability constant must be >= 1"));
        }
        let (lo, hi) = (1.0 / self.c0, self.c0);
        for i in 0..CHECK_POINTS {
            let t = 1.0 + i as f64 / (CHECK_POINTS - 1) as f64;
            let r1 = self.family.d1(t) / self.m;
            let r2 = self.family.d2(t) / self.m;
            if !(lo..=hi).contains(&r1) || !(lo..=hi).contains(&r2) {
                return Err(LabError::invalid(format!(
                    "at t = {t}: phi'/m = {r1:.4}, phi''/m = {r2:.4} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.family.phi(t)
    }

    pub fn phi_d1(&self, t: f64) -> f64 {
        self.family.d1(t)
    }

    pub fn phi_d2(&self, t: f64) -> f64 {
        self.family.d2(t)
    }

    pub fn point(&self, t: f64) -> crate::Vec2 {
        crate::Vec2::new(t, self.phi(t))
    }

    /// `max |phi'|` over `[a, b]`, sampled on a grid including the endpoints.
    pub fn max_slope(&self, a: f64, b: f64) -> f64 {
        (0..=CHECK_POINTS)
            .map(|i| self.phi_d1(a + (b - a) * i as f64 / CHECK_POINTS as f64).abs())
            .fold(0.0, f64::max)
    }

    /// `(min phi', max phi', min phi'', max phi'')` over `[a, b]`.
    pub fn derivative_bounds(&self, a: f64, b: f64) -> (f64, f64, f64, f64) {
        let mut out = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=CHECK_POINTS {
            let t = a + (b - a) * i as f64 / CHECK_POINTS as f64;
            let (d1, d2) = (self.phi_d1(t), self.phi_d2(t));
            out = (out.0.min(d1), out.1.max(d1), out.2.min(d2), out.3.max(d2));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_is_valid() {
        let c = CurveSpec::parabola();
        c.validate().unwrap();
        assert_eq!(c.phi(1.5), 2.25);
        assert_eq!(c.max_slope(1.0, 2.0), 4.0);
    }

    #[test]
    fn linear_curves_fail_the_curvature_gate() {
        assert!(CurveSpec::new(CurveFamily::Linear { slope: 2.0 }, 2.0).is_err());
    }

    #[test]
    fn m_curves_are_valid_for_all_m() {
        for m in [1.0, 2.0, 16.0, 1e4] {
            let c = CurveSpec::m_curve(m).unwrap();
            assert_eq!(c.phi_d2(1.3), m);
            assert!((c.phi_d1(1.5) - 2.0 * m).abs() < 1e-12 * m);
        }
        assert!(CurveSpec::m_curve(0.5).is_err());
    }

    #[test]
    fn rescaled_power_matches_its_scale() {
        for p in [1.5, 2.0, 3.0, 5.0] {
            let c = CurveSpec::power_rescaled(p, 64.0).unwrap();
            assert!((c.phi(1.0) - 64f64.powf(p - 1.0)).abs() < 1e-9);
        }
        assert!(CurveSpec::power_rescaled(1.0, 64.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fams = [
            CurveFamily::Parabola,
            CurveFamily::Power { p: 2.5 },
            CurveFamily::PowerRescaled { p: 3.0, r: 4.0 },
            CurveFamily::m_curve(3.0),
        ];
        let h = 1e-5;
        for f in fams {
            for t in [1.0, 1.37, 2.0] {
                let d1 = (f.phi(t + h) - f.phi(t - h)) / (2.0 * h);
                let d2 = (f.d1(t + h) - f.d1(t - h)) / (2.0 * h);
                assert!((d1 - f.d1(t)).abs() < 1e-6 * (1.0 + d1.abs()), "{f:?}");
                assert!((d2 - f.d2(t)).abs() < 1e-6 * (1.0 + d2.abs()), "{f:?}");
            }
        }
    }
}
