//! Finite atomic measures on the plane and their constructors.
//!
//! An [`AtomicMeasure`] is stored as a Minkowski sum of one or more atom lists
//! ("factors"): the logical atoms are all sums `a_1 + ... + a_k` with weight
//! `w_1 * ... * w_k`. A plain measure has a single factor. Product Cantor
//! measures factor into their two coordinate Cantor sets, and the modulated
//! bump families factor into one bump grid and its list of translates, so the
//! Fourier transform is a product of short direct sums.

mod audit;
mod cantor;
mod io;
mod sharp;

pub use audit::{audit_dimension, audit_dimension_with_budget, DimensionReport, SamplingPlan};
pub use cantor::{build_cantor_measure, build_cantor_measure_with_budget, CantorSpec};
pub use io::{read_csv, write_csv};
pub use sharp::{
    build_sharp_example, build_sharp_example_with_budget, DerivedGeometry, SharpCase,
    SharpExampleSpec,
};

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sum::NeumaierSum;
use crate::vec2::Vec2;

/// A weighted point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Vec2,
    pub weight: Complex64,
}

impl Atom {
    pub fn new(position: Vec2, weight: Complex64) -> Self {
        Atom { position, weight }
    }

    pub fn real(x: f64, y: f64, w: f64) -> Self {
        Atom::new(Vec2::new(x, y), Complex64::new(w, 0.0))
    }

    fn is_finite(&self) -> bool {
        self.position.is_finite() && self.weight.re.is_finite() && self.weight.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Cantor,
    SharpExample,
    Custom,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Cantor => "cantor",
            Provenance::SharpExample => "sharp_example",
            Provenance::Custom => "custom",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Provenance {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cantor" => Ok(Provenance::Cantor),
            "sharp_example" => Ok(Provenance::SharpExample),
            "custom" => Ok(Provenance::Custom),
            other => Err(LabError::Parse(format!("unknown provenance `{other}`"))),
        }
    }
}

/// Logical atom counts above this are not expanded to compute an exact
/// support radius; the triangle-inequality bound is used instead.
const EXACT_RADIUS_LIMIT: u128 = 2_000_000;

/// Support radius recorded for a measure concentrated at the origin.
const MIN_SUPPORT_RADIUS: f64 = 1e-300;

/// A finite weighted sum of point masses approximating a Borel measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    factors: Vec<Vec<Atom>>,
    declared_alpha: f64,
    support_radius: f64,
    atom_spacing: f64,
    provenance: Provenance,
}

impl AtomicMeasure {
    /// Builds a measure from an explicit atom list. The atom spacing is the
    /// smallest distance between two distinct atoms (zero for a single atom).
    pub fn from_atoms(atoms: Vec<Atom>, declared_alpha: f64, provenance: Provenance) -> Result<Self> {
        let spacing = nearest_neighbour_distance(&atoms);
        Self::from_factors(vec![atoms], declared_alpha, provenance, spacing)
    }

    /// Builds a measure whose atoms are the Minkowski sums of the factor atoms.
    pub fn from_factors(
        factors: Vec<Vec<Atom>>,
        declared_alpha: f64,
        provenance: Provenance,
        atom_spacing: f64,
    ) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(Vec::is_empty) {
            return Err(LabError::invalid("a measure needs at least one atom"));
        }
        if let Some(bad) = factors.iter().flatten().find(|a| !a.is_finite()) {
            return Err(LabError::invalid(format!("non-finite atom {bad:?}")));
        }
        if !(0.0..=2.0).contains(&declared_alpha) {
            return Err(LabError::invalid(format!(
                "declared alpha {declared_alpha} outside [0, 2]"
            )));
        }
        if !(atom_spacing >= 0.0 && atom_spacing.is_finite()) {
            return Err(LabError::invalid("atom spacing must be finite and >= 0"));
        }
        let mut m = AtomicMeasure {
            factors,
            declared_alpha,
            support_radius: 0.0,
            atom_spacing,
            provenance,
        };
        let tv = m.total_variation();
        if !(tv > 0.0 && tv.is_finite()) {
            return Err(LabError::invalid("total variation must be finite and positive"));
        }
        if provenance == Provenance::Cantor {
            let mut total = NeumaierSum::new();
            for f in &m.factors {
                if f.iter().any(|a| a.weight.im != 0.0 || a.weight.re <= 0.0) {
                    return Err(LabError::invalid("Cantor weights must be positive reals"));
                }
            }
            for a in m.atoms() {
                total.add(a.weight.re);
            }
            if (total.value() - 1.0).abs() > 1e-12 {
                return Err(LabError::invalid(format!(
                    "Cantor weights sum to {} instead of 1",
                    total.value()
                )));
            }
        }
        m.support_radius = m.compute_support_radius().max(MIN_SUPPORT_RADIUS);
        Ok(m)
    }

    fn compute_support_radius(&self) -> f64 {
        if self.factors.len() == 1 || self.atom_count() <= EXACT_RADIUS_LIMIT {
            return self.atoms().map(|a| a.position.norm()).fold(0.0, f64::max);
        }
        // Coordinate-axis factorisation (product sets): exact.
        if self.factors.len() == 2
            && self.factors[0].iter().all(|a| a.position.y == 0.0)
            && self.factors[1].iter().all(|a| a.position.x == 0.0)
        {
            let mx = self.factors[0].iter().map(|a| a.position.x.abs()).fold(0.0, f64::max);
            let my = self.factors[1].iter().map(|a| a.position.y.abs()).fold(0.0, f64::max);
            return mx.hypot(my);
        }
        self.factors
            .iter()
            .map(|f| f.iter().map(|a| a.position.norm()).fold(0.0, f64::max))
            .sum()
    }

    pub fn factors(&self) -> &[Vec<Atom>] {
        &self.factors
    }

    pub fn declared_alpha(&self) -> f64 {
        self.declared_alpha
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Radius of a ball about the origin containing every atom.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Resolution of the discretisation: balls smaller than this are not
    /// meaningful for dimension audits.
    pub fn atom_spacing(&self) -> f64 {
        self.atom_spacing
    }

    /// Number of logical atoms (product of factor sizes).
    pub fn atom_count(&self) -> u128 {
        self.factors.iter().map(|f| f.len() as u128).product()
    }

    /// Number of atoms actually held in memory.
    pub fn stored_atoms(&self) -> usize {
        self.factors.iter().map(Vec::len).sum()
    }

    /// Iterates the logical atoms; the last factor varies fastest.
    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        let sizes: Vec<usize> = self.factors.iter().map(Vec::len).collect();
        let total = self.atom_count();
        (0..total).map(move |mut idx| {
            let mut pos = Vec2::ZERO;
            let mut w = Complex64::new(1.0, 0.0);
            for (f, &n) in self.factors.iter().zip(&sizes).rev() {
                let a = &f[(idx % n as u128) as usize];
                idx /= n as u128;
                pos += a.position;
                w *= a.weight;
            }
            Atom::new(pos, w)
        })
    }

    /// Expands the factors into a single explicit atom list.
    pub fn to_explicit(&self, budget: usize) -> Result<AtomicMeasure> {
        if self.factors.len() == 1 {
            return Ok(self.clone());
        }
        let n = self.atom_count();
        if n > budget as u128 {
            return Err(LabError::Budget {
                what: "expanded atom list",
                required: n,
                budget: budget as u128,
            });
        }
        let mut m = self.clone();
        m.factors = vec![self.atoms().collect()];
        Ok(m)
    }

    /// `sum_j |w_j|`.
    pub fn total_variation(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.iter().map(|a| a.weight.norm()).collect::<NeumaierSum>().value())
            .product()
    }

    /// Center of mass of the total-variation measure.
    pub fn center_of_mass(&self) -> Vec2 {
        // The center of mass of a Minkowski sum is the sum of the factor centers.
        self.factors.iter().fold(Vec2::ZERO, |acc, f| {
            let mut mx = NeumaierSum::new();
            let mut my = NeumaierSum::new();
            let mut m = NeumaierSum::new();
            for a in f {
                let w = a.weight.norm();
                mx.add(w * a.position.x);
                my.add(w * a.position.y);
                m.add(w);
            }
            acc + Vec2::new(mx.value(), my.value()) * (1.0 / m.value())
        })
    }

    /// Multiplies every weight by `c`.
    pub fn scaled(&self, c: Complex64) -> AtomicMeasure {
        let mut m = self.clone();
        for a in &mut m.factors[0] {
            a.weight *= c;
        }
        m
    }

    /// Multiplies each weight by `exp(2 pi i x_j . h)`, which translates the
    /// Fourier transform: the result at `xi` equals the original at `xi - h`.
    pub fn modulated(&self, h: Vec2) -> AtomicMeasure {
        let mut m = self.clone();
        for a in m.factors.iter_mut().flatten() {
            let cycles = (a.position.dot(h)).rem_euclid(1.0);
            a.weight *= Complex64::from_polar(1.0, TAU * cycles);
        }
        if m.provenance == Provenance::Cantor {
            m.provenance = Provenance::Custom;
        }
        m
    }

    pub(crate) fn set_atom_spacing(&mut self, spacing: f64) {
        self.atom_spacing = spacing;
    }
}

/// Uniform probability measure on an `nx` by `ny` grid of cell midpoints of
/// the unit square centered at the origin, a discretised Lebesgue measure.
pub fn uniform_grid(nx: usize, ny: usize) -> Result<AtomicMeasure> {
    if nx == 0 || ny == 0 {
        return Err(LabError::invalid("grid sides must be positive"));
    }
    let axis = |n: usize, horizontal: bool| -> Vec<Atom> {
        (0..n)
            .map(|i| {
                let c = (i as f64 + 0.5) / n as f64 - 0.5;
                let w = 1.0 / n as f64;
                if horizontal {
                    Atom::real(c, 0.0, w)
                } else {
                    Atom::real(0.0, c, w)
                }
            })
            .collect()
    };
    let spacing = (1.0 / nx as f64).max(1.0 / ny as f64);
    AtomicMeasure::from_factors(vec![axis(nx, true), axis(ny, false)], 2.0, Provenance::Custom, spacing)
}

/// Smallest distance between two distinct atom positions, by sorting on x and
/// sweeping a window of width equal to the best distance found so far.
fn nearest_neighbour_distance(atoms: &[Atom]) -> f64 {
    let mut pts: Vec<Vec2> = atoms.iter().map(|a| a.position).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if pts[j].x - pts[i].x >= best {
                break;
            }
            best = best.min((pts[j] - pts[i]).norm());
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_variation_of_signed_pair() {
        let m = AtomicMeasure::from_atoms(
            vec![Atom::real(0.0, 0.0, 1.0), Atom::real(1.0, 0.0, -1.0)],
            1.0,
            Provenance::Custom,
        )
        .unwrap();
        assert_eq!(m.total_variation(), 2.0);
        assert_eq!(m.support_radius(), 1.0);
        assert_eq!(m.atom_spacing(), 1.0);
    }

    #[test]
    fn empty_measure_is_rejected() {
        assert!(AtomicMeasure::from_atoms(vec![], 1.0, Provenance::Custom).is_err());
    }

    #[test]
    fn zero_mass_is_rejected() {
        let r = AtomicMeasure::from_atoms(vec![Atom::real(0.0, 0.0, 0.0)], 1.0, Provenance::Custom);
        assert!(r.is_err());
    }

    #[test]
    fn non_finite_atoms_are_rejected() {
        let r = AtomicMeasure::from_atoms(
            vec![Atom::real(f64::NAN, 0.0, 1.0)],
            1.0,
            Provenance::Custom,
        );
        assert!(r.is_err());
    }

    #[test]
    fn factored_atoms_expand_to_minkowski_sums() {
        let a = vec![Atom::real(0.0, 0.0, 0.5), Atom::real(1.0, 0.0, 0.5)];
        let b = vec![Atom::real(0.0, 0.0, 0.25), Atom::real(0.0, 2.0, 0.75)];
        let m = AtomicMeasure::from_factors(vec![a, b], 1.0, Provenance::Custom, 1.0).unwrap();
        let atoms: Vec<Atom> = m.atoms().collect();
        assert_eq!(m.atom_count(), 4);
        assert_eq!(atoms[0], Atom::real(0.0, 0.0, 0.125));
        assert_eq!(atoms[1], Atom::real(0.0, 2.0, 0.375));
        assert_eq!(atoms[2], Atom::real(1.0, 0.0, 0.125));
        assert_eq!(atoms[3], Atom::real(1.0, 2.0, 0.375));
        assert!((m.support_radius() - 5f64.sqrt()).abs() < 1e-15);
        assert!((m.total_variation() - 1.0).abs() < 1e-15);
        let e = m.to_explicit(10).unwrap();
        assert_eq!(e.factors().len(), 1);
        assert!(m.to_explicit(3).is_err());
    }

    #[test]
    fn nearest_neighbour_matches_brute_force() {
        let atoms: Vec<Atom> = (0..200)
            .map(|i| {
                let x = ((i * 7919) % 211) as f64 / 211.0;
                let y = ((i * 104729) % 197) as f64 / 197.0;
                Atom::real(x, y, 1.0)
            })
            .collect();
        let mut brute = f64::INFINITY;
        for i in 0..atoms.len() {
            for j in 0..i {
                let d = (atoms[i].position - atoms[j].position).norm();
                if d > 0.0 {
                    brute = brute.min(d);
                }
            }
        }
        assert_eq!(nearest_neighbour_distance(&atoms), brute);
    }
}
