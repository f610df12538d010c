//! Fourier transforms along quadratic progressions of frequencies.
//!
//! For nodes `xi_i = base + i step + i^2 curv` the phase of each atom is a
//! quadratic polynomial in `i`, so consecutive terms `w exp(-2 pi i xi_i . x)`
//! follow a two-term multiplicative recurrence. The nodes are split into
//! blocks; each block re-anchors every atom with exact `sin_cos` calls and
//! then advances by complex multiplications only. Atoms are processed in
//! tiles of [`TILE`] with [`LANES`] independent partial sums per node, and
//! tile sums are combined with compensated addition. Blocks run in parallel
//! and never share partial sums, so results do not depend on scheduling.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::unit_phase;
use crate::error::{LabError, Result};
use crate::measures::{Atom, AtomicMeasure};
use crate::vec2::Vec2;

const LANES: usize = 8;
const TILE: usize = 64;
const GROUPS: usize = TILE / LANES;

/// Nodes advanced by recurrence before re-anchoring. The recurrence loses
/// about `BLOCK^2 / 2` ulps of phase at worst.
pub const BLOCK: usize = 512;

/// Frequencies `base + i step + i^2 curv` for `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProgression {
    pub base: Vec2,
    pub step: Vec2,
    pub curv: Vec2,
    pub len: usize,
}

impl QuadraticProgression {
    pub fn new(base: Vec2, step: Vec2, curv: Vec2, len: usize) -> Result<Self> {
        if !(base.is_finite() && step.is_finite() && curv.is_finite()) {
            return Err(LabError::invalid("progression coefficients must be finite"));
        }
        Ok(QuadraticProgression { base, step, curv, len })
    }

    pub fn point(&self, i: usize) -> Vec2 {
        let i = i as f64;
        self.base + self.step * i + self.curv * (i * i)
    }
}

#[derive(Clone, Copy)]
struct Lanes {
    re: [f64; LANES],
    im: [f64; LANES],
}

impl Lanes {
    const ZERO: Lanes = Lanes { re: [0.0; LANES], im: [0.0; LANES] };

    #[inline(always)]
    fn set(&mut self, l: usize, z: Complex64) {
        self.re[l] = z.re;
        self.im[l] = z.im;
    }

    #[inline(always)]
    fn mul_assign(&mut self, o: &Lanes) {
        for l in 0..LANES {
            let re = self.re[l] * o.re[l] - self.im[l] * o.im[l];
            let im = self.re[l] * o.im[l] + self.im[l] * o.re[l];
            self.re[l] = re;
            self.im[l] = im;
        }
    }

    #[inline(always)]
    fn add_assign(&mut self, o: &Lanes) {
        for l in 0..LANES {
            self.re[l] += o.re[l];
            self.im[l] += o.im[l];
        }
    }

    /// Fixed pairwise reduction of the lanes.
    #[inline(always)]
    fn total(&self) -> Complex64 {
        let r = ((self.re[0] + self.re[1]) + (self.re[2] + self.re[3]))
            + ((self.re[4] + self.re[5]) + (self.re[6] + self.re[7]));
        let i = ((self.im[0] + self.im[1]) + (self.im[2] + self.im[3]))
            + ((self.im[4] + self.im[5]) + (self.im[6] + self.im[7]));
        Complex64::new(r, i)
    }
}

/// Compensated complex accumulators, one per node of a block.
struct BlockAcc {
    sum: Vec<Complex64>,
    comp: Vec<Complex64>,
}

impl BlockAcc {
    fn new(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        BlockAcc { sum: vec![z; n], comp: vec![z; n] }
    }

    #[inline(always)]
    fn add(&mut self, k: usize, z: Complex64) {
        fn two_sum(s: &mut f64, c: &mut f64, x: f64) {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        }
        two_sum(&mut self.sum[k].re, &mut self.comp[k].re, z.re);
        two_sum(&mut self.sum[k].im, &mut self.comp[k].im, z.im);
    }
}

/// Adds one tile's contributions for nodes `i0 .. i0 + n` into `acc`.
fn tile_block(tile: &[Atom], prog: &QuadraticProgression, i0: usize, n: usize, acc: &mut BlockAcc) {
    let x0 = prog.point(i0);
    let d = prog.step + prog.curv * (2.0 * i0 as f64);
    let c = prog.curv;
    let mut s = [Lanes::ZERO; GROUPS];
    let mut r = [Lanes::ZERO; GROUPS];
    let mut q = [Lanes::ZERO; GROUPS];
    let mut linear = true;
    for (j, a) in tile.iter().enumerate() {
        let (g, l) = (j / LANES, j % LANES);
        let dd = d.dot(a.position);
        let cc = c.dot(a.position);
        s[g].set(l, a.weight * unit_phase(x0.dot(a.position)));
        r[g].set(l, unit_phase(dd + cc));
        q[g].set(l, unit_phase(2.0 * cc));
        linear &= cc == 0.0;
    }
    // Padding lanes keep s = 0 and never contribute.
    let groups = tile.len().div_ceil(LANES);
    if linear {
        for k in 0..n {
            let mut v = Lanes::ZERO;
            for g in 0..groups {
                v.add_assign(&s[g]);
                s[g].mul_assign(&r[g]);
            }
            acc.add(k, v.total());
        }
    } else {
        for k in 0..n {
            let mut v = Lanes::ZERO;
            for g in 0..groups {
                v.add_assign(&s[g]);
                s[g].mul_assign(&r[g]);
                r[g].mul_assign(&q[g]);
            }
            acc.add(k, v.total());
        }
    }
}

fn factor_block(atoms: &[Atom], prog: &QuadraticProgression, i0: usize, out: &mut [Complex64]) {
    let mut acc = BlockAcc::new(out.len());
    for tile in atoms.chunks(TILE) {
        tile_block(tile, prog, i0, out.len(), &mut acc);
    }
    for (k, o) in out.iter_mut().enumerate() {
        *o *= acc.sum[k] + acc.comp[k];
    }
}

/// `mu_hat` at every node of the progression, in order.
pub fn ft_progression(measure: &AtomicMeasure, prog: &QuadraticProgression) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0); prog.len];
    out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
        for f in measure.factors() {
            factor_block(f, prog, b * BLOCK, chunk);
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_cantor_measure, build_sharp_example, CantorSpec, Provenance, SharpCase, SharpExampleSpec};
    use crate::oscillatory::{ft_atomic, Frequency};

    fn check(measure: &AtomicMeasure, prog: &QuadraticProgression, tol: f64) {
        let fast = ft_progression(measure, prog);
        let scale = measure.total_variation();
        for (i, v) in fast.iter().enumerate() {
            let exact = ft_atomic(measure, Frequency::from_vec(prog.point(i)).unwrap());
            assert!((v - exact).norm() <= tol * scale, "node {i}: {v} vs {exact}");
        }
    }

    #[test]
    fn matches_direct_sums_on_a_parabola() {
        let m = build_cantor_measure(&CantorSpec::symmetric(1.5, 2, 6).unwrap()).unwrap();
        // R (t, t^2) at t = 1 + (i + 1/2) h.
        let (r, n) = (300.0, 1500);
        let h = 1.0 / n as f64;
        let t0 = 1.0 + h / 2.0;
        let prog = QuadraticProgression::new(
            Vec2::new(r * t0, r * t0 * t0),
            Vec2::new(r * h, 2.0 * r * t0 * h),
            Vec2::new(0.0, r * h * h),
            n,
        )
        .unwrap();
        check(&m, &prog, 1e-10);
    }

    #[test]
    fn matches_direct_sums_for_complex_weights() {
        let spec = SharpExampleSpec::new(2.0, 1.5, 128.0, SharpCase::CaseI).unwrap();
        let (m, _) = build_sharp_example(&spec).unwrap();
        let prog = QuadraticProgression::new(
            Vec2::new(128.0, 16384.0),
            Vec2::new(0.01, 2.56),
            Vec2::new(0.0, 1e-4),
            1200,
        )
        .unwrap();
        check(&m, &prog, 1e-10);
    }

    #[test]
    fn odd_atom_counts_and_short_progressions() {
        let atoms: Vec<Atom> = (0..77)
            .map(|j| Atom::real((j as f64 * 0.37).sin(), (j as f64 * 0.11).cos(), 1.0 + j as f64))
            .collect();
        let m = AtomicMeasure::from_atoms(atoms, 1.0, Provenance::Custom).unwrap();
        for len in [0, 1, 3, BLOCK + 1] {
            let prog = QuadraticProgression::new(
                Vec2::new(-3.0, 2.0),
                Vec2::new(0.3, 0.2),
                Vec2::new(0.001, -0.002),
                len,
            )
            .unwrap();
            check(&m, &prog, 1e-10);
        }
    }
}
