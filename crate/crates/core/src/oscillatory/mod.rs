//! Fourier transforms of atomic measures and of arc measures on curves.
//!
//! All transforms use `mu_hat(xi) = sum_j w_j exp(-2 pi i xi . x_j)`. Phases
//! are reduced modulo one cycle before multiplying by `2 pi`, so large
//! frequencies lose no more accuracy than the product `xi . x` itself.

mod arc;
mod curve;
mod progression;

pub use arc::{check_van_der_corput, curve_arc_ft, ArcQuadrature};
pub use curve::{CurveFamily, CurveSpec, DEFAULT_COMPARABILITY};
pub use progression::{ft_progression, QuadraticProgression};

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measures::{Atom, AtomicMeasure};
use crate::sum::ComplexSum;
use crate::vec2::Vec2;

/// A point of frequency space (cycles per unit length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency {
    pub xi: Vec2,
}

impl Frequency {
    pub fn new(xi1: f64, xi2: f64) -> Result<Self> {
        Self::from_vec(Vec2::new(xi1, xi2))
    }

    pub fn from_vec(xi: Vec2) -> Result<Self> {
        if !xi.is_finite() {
            return Err(LabError::invalid(format!("frequency {xi:?} is not finite")));
        }
        Ok(Frequency { xi })
    }
}

/// `exp(-2 pi i cycles)` with the argument reduced to `[0, 1)` first.
#[inline]
pub(crate) fn unit_phase(cycles: f64) -> Complex64 {
    let (s, c) = (TAU * cycles.rem_euclid(1.0)).sin_cos();
    Complex64::new(c, -s)
}

/// `sum_{a in atoms} w_a exp(-2 pi i xi . a)`, compensated.
pub(crate) fn factor_ft(atoms: &[Atom], xi: Vec2) -> Complex64 {
    let mut acc = ComplexSum::new();
    for a in atoms {
        acc.add(a.weight * unit_phase(xi.dot(a.position)));
    }
    acc.value()
}

/// `mu_hat(xi)`. Factored measures multiply the transforms of their factors.
pub fn ft_atomic(measure: &AtomicMeasure, xi: Frequency) -> Complex64 {
    let mut factors = measure.factors().iter();
    let first = factors.next().map_or(Complex64::new(1.0, 0.0), |f| factor_ft(f, xi.xi));
    factors.fold(first, |acc, f| acc * factor_ft(f, xi.xi))
}

/// Default number of frequencies per parallel task in [`ft_batch`].
pub const DEFAULT_CHUNK: usize = 64;

/// `ft_atomic` at every point, in input order.
pub fn ft_batch(measure: &AtomicMeasure, points: &[Frequency]) -> Vec<Complex64> {
    ft_batch_chunked(measure, points, DEFAULT_CHUNK)
}

/// [`ft_batch`] with an explicit task size. Every value is computed by the
/// same sequential sum regardless of scheduling, so results are bitwise
/// identical to [`ft_atomic`].
pub fn ft_batch_chunked(measure: &AtomicMeasure, points: &[Frequency], chunk: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); points.len()];
    out.par_chunks_mut(chunk.max(1))
        .zip(points.par_chunks(chunk.max(1)))
        .for_each(|(o, p)| {
            for (slot, &xi) in o.iter_mut().zip(p) {
                *slot = ft_atomic(measure, xi);
            }
        });
    out
}
