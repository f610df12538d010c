use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{unit_phase, CurveSpec, Frequency};
use crate::error::{LabError, Result};
use crate::sum::ComplexSum;

/// Panels per unit of `1 + |xi_1| + max|phi'| |xi_2|`: eight panels per
/// oscillation at the fastest phase speed.
const PANELS_PER_CYCLE: f64 = 8.0;

/// Largest panel count tried before giving up.
const MAX_PANELS: usize = 1 << 26;

/// Result of [`curve_arc_ft`] with its a posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcQuadrature {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels: usize,
}

fn midpoint(curve: &CurveSpec, a: f64, b: f64, xi: Frequency, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut acc = ComplexSum::new();
    for i in 0..n {
        let t = a + (i as f64 + 0.5) * h;
        acc.add(unit_phase(t * xi.xi.x + curve.phi(t) * xi.xi.y));
    }
    acc.value() * h
}

/// `int_a^b exp(-2 pi i (t xi_1 + phi(t) xi_2)) dt`.
///
/// Composite midpoint sums at panel counts `n, 2n, 4n, ...` are combined by
/// Richardson extrapolation; the result is accepted once two successive
/// extrapolants differ by less than `tol`. The starting panel length is at
/// most `1 / (8 (1 + |xi_1| + max|phi'| |xi_2|))`.
pub fn curve_arc_ft(curve: &CurveSpec, interval: [f64; 2], xi: Frequency, tol: f64) -> Result<ArcQuadrature> {
    let [a, b] = interval;
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(LabError::invalid(format!("interval [{a}, {b}] must satisfy 0 <= a < b")));
    }
    if !(tol > 0.0) {
        return Err(LabError::invalid("tol must be positive"));
    }
    if xi.xi.x == 0.0 && xi.xi.y == 0.0 {
        return Ok(ArcQuadrature { value: Complex64::new(b - a, 0.0), error_estimate: 0.0, panels: 1 });
    }
    let speed = 1.0 + xi.xi.x.abs() + curve.max_slope(a, b) * xi.xi.y.abs();
    let mut n = ((b - a) * PANELS_PER_CYCLE * speed).ceil() as usize;
    n = n.max(16);
    let mut coarse = midpoint(curve, a, b, xi, n);
    let mut prev: Option<Complex64> = None;
    loop {
        if 2 * n > MAX_PANELS {
            return Err(LabError::NoConvergence(format!(
                "arc transform at xi = ({}, {}) did not reach tol {tol:e} within {MAX_PANELS} panels",
                xi.xi.x, xi.xi.y
            )));
        }
        let fine = midpoint(curve, a, b, xi, 2 * n);
        let extrapolated = (fine * 4.0 - coarse) / 3.0;
        if let Some(p) = prev {
            let err = (extrapolated - p).norm();
            if err < tol {
                return Ok(ArcQuadrature { value: extrapolated, error_estimate: err, panels: 2 * n });
            }
        }
        prev = Some(extrapolated);
        coarse = fine;
        n *= 2;
    }
}

/// `(xi_2, |lambda_hat(0, xi_2)| sqrt(xi_2))` for the arc measure of the
/// curve over `interval`.
pub fn check_van_der_corput(curve: &CurveSpec, xi2_values: &[f64], interval: [f64; 2]) -> Result<Vec<(f64, f64)>> {
    xi2_values
        .iter()
        .map(|&x2| {
            if !(x2 >= 1.0 && x2.is_finite()) {
                return Err(LabError::invalid(format!("xi_2 = {x2} must be >= 1")));
            }
            let q = curve_arc_ft(curve, interval, Frequency::new(0.0, x2)?, 1e-10)?;
            Ok((x2, q.value.norm() * x2.sqrt()))
        })
        .collect()
}
