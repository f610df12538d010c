use serde::{Deserialize, Serialize};

use super::{Atom, AtomicMeasure, Provenance};
use crate::error::{LabError, Result};
use crate::DEFAULT_ATOM_BUDGET;

/// Parameters of a product Cantor set: each axis keeps `branches` children of
/// relative length `ratio` at every level, spread evenly from end to end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub branches_x: u32,
    pub branches_y: u32,
    pub ratio_x: f64,
    pub ratio_y: f64,
    pub depth: u32,
}

fn axis_dimension(branches: u32, ratio: f64) -> f64 {
    if branches == 1 {
        0.0
    } else {
        (branches as f64).ln() / (1.0 / ratio).ln()
    }
}

fn check_axis(name: &str, branches: u32, ratio: f64) -> Result<()> {
    if branches == 0 {
        return Err(LabError::invalid(format!("branches_{name} must be >= 1")));
    }
    if !(ratio > 0.0 && ratio <= 1.0 / branches as f64) {
        return Err(LabError::invalid(format!(
            "ratio_{name} = {ratio} must lie in (0, 1/{branches}]"
        )));
    }
    if branches > 1 && ratio >= 1.0 {
        return Err(LabError::invalid(format!("ratio_{name} must be < 1")));
    }
    Ok(())
}

impl CantorSpec {
    pub fn new(branches_x: u32, ratio_x: f64, branches_y: u32, ratio_y: f64, depth: u32) -> Result<Self> {
        let spec = CantorSpec { branches_x, branches_y, ratio_x, ratio_y, depth };
        spec.validate()?;
        Ok(spec)
    }

    /// The same Cantor set on both axes with `branches` children per level and
    /// the ratio that gives total dimension `alpha`.
    pub fn symmetric(alpha: f64, branches: u32, depth: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(LabError::invalid(format!("alpha = {alpha} must lie in (0, 2]")));
        }
        if branches < 2 {
            return Err(LabError::invalid("need at least 2 branches per axis"));
        }
        let ratio = (branches as f64).powf(-2.0 / alpha);
        Self::new(branches, ratio, branches, ratio, depth)
    }

    pub fn validate(&self) -> Result<()> {
        check_axis("x", self.branches_x, self.ratio_x)?;
        check_axis("y", self.branches_y, self.ratio_y)?;
        if self.depth == 0 {
            return Err(LabError::invalid("depth must be >= 1"));
        }
        let a = self.implied_alpha();
        if !(0.0..=2.0 + 1e-12).contains(&a) {
            return Err(LabError::invalid(format!("implied dimension {a} outside (0, 2]")));
        }
        Ok(())
    }

    /// `log b_x / log(1/r_x) + log b_y / log(1/r_y)`; an axis with one branch
    /// contributes nothing.
    pub fn implied_alpha(&self) -> f64 {
        axis_dimension(self.branches_x, self.ratio_x) + axis_dimension(self.branches_y, self.ratio_y)
    }

    pub fn atom_count(&self) -> u128 {
        (self.branches_x as u128 * self.branches_y as u128).pow(self.depth)
    }

    /// Atoms held in memory by the factored representation.
    pub fn stored_atoms(&self) -> u128 {
        (self.branches_x as u128).pow(self.depth) + (self.branches_y as u128).pow(self.depth)
    }

    /// Side length of the finest cells along the subdivided axes (zero when
    /// neither axis branches).
    pub fn cell_size(&self) -> f64 {
        let mut s: f64 = 0.0;
        if self.branches_x > 1 {
            s = s.max(self.ratio_x.powi(self.depth as i32));
        }
        if self.branches_y > 1 {
            s = s.max(self.ratio_y.powi(self.depth as i32));
        }
        s
    }

    /// Smallest depth whose cell size is at most `resolution`.
    pub fn depth_for_resolution(mut self, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(LabError::invalid("resolution must be positive"));
        }
        if self.branches_x == 1 && self.branches_y == 1 {
            return Ok(self);
        }
        self.depth = 1;
        while self.cell_size() > resolution {
            self.depth += 1;
            if self.depth > 200 {
                return Err(LabError::invalid("resolution unreachable"));
            }
        }
        Ok(self)
    }
}

/// Centers of the depth-`depth` cells of a one-dimensional Cantor set built
/// on `[-1/2, 1/2]`.
fn axis_centers(branches: u32, ratio: f64, depth: u32) -> Vec<f64> {
    let mut lefts = vec![-0.5];
    let mut len = 1.0;
    for _ in 0..depth {
        let child = ratio * len;
        let step = if branches > 1 {
            (len - child) / (branches - 1) as f64
        } else {
            0.0
        };
        let offset = if branches > 1 { 0.0 } else { (len - child) / 2.0 };
        lefts = lefts
            .iter()
            .flat_map(|&a| (0..branches).map(move |j| a + offset + j as f64 * step))
            .collect();
        len = child;
    }
    lefts.into_iter().map(|a| a + len / 2.0).collect()
}

pub fn build_cantor_measure(spec: &CantorSpec) -> Result<AtomicMeasure> {
    build_cantor_measure_with_budget(spec, DEFAULT_ATOM_BUDGET)
}

/// Product Cantor measure with equal weights on the finest cells. The budget
/// bounds the atoms held in memory: the two coordinate Cantor sets are stored
/// separately and combined as a Minkowski sum.
pub fn build_cantor_measure_with_budget(spec: &CantorSpec, budget: usize) -> Result<AtomicMeasure> {
    spec.validate()?;
    let stored = spec.stored_atoms();
    if stored > budget as u128 {
        return Err(LabError::Budget {
            what: "Cantor atoms",
            required: stored,
            budget: budget as u128,
        });
    }
    let xs = axis_centers(spec.branches_x, spec.ratio_x, spec.depth);
    let ys = axis_centers(spec.branches_y, spec.ratio_y, spec.depth);
    let wx = 1.0 / xs.len() as f64;
    let wy = 1.0 / ys.len() as f64;
    let fx = xs.into_iter().map(|x| Atom::real(x, 0.0, wx)).collect();
    let fy = ys.into_iter().map(|y| Atom::real(0.0, y, wy)).collect();
    let alpha = spec.implied_alpha().min(2.0);
    AtomicMeasure::from_factors(vec![fx, fy], alpha, Provenance::Cantor, spec.cell_size())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_cell_is_a_point_mass() {
        let spec = CantorSpec::new(1, 1.0, 1, 1.0, 1).unwrap();
        let m = build_cantor_measure(&spec).unwrap();
        let atoms: Vec<Atom> = m.atoms().collect();
        assert_eq!(atoms, vec![Atom::real(0.0, 0.0, 1.0)]);
        assert_eq!(m.declared_alpha(), 0.0);
    }

    #[test]
    fn middle_thirds_depth_two() {
        let spec = CantorSpec::new(2, 1.0 / 3.0, 1, 1.0, 2).unwrap();
        let m = build_cantor_measure(&spec).unwrap();
        let xs: Vec<f64> = m.atoms().map(|a| a.position.x).collect();
        // Level-2 cells of [-1/2, 1/2]: [0,1/9], [2/9,1/3], [2/3,7/9], [8/9,1] shifted by -1/2.
        let expect = [1.0 / 18.0, 5.0 / 18.0, 13.0 / 18.0, 17.0 / 18.0].map(|c| c - 0.5);
        assert_eq!(xs.len(), 4);
        for (x, e) in xs.iter().zip(expect) {
            assert!((x - e).abs() < 1e-15, "{x} vs {e}");
        }
        assert!(m.atoms().all(|a| a.position.y == 0.0 && a.weight.re == 0.25));
        assert!((m.declared_alpha() - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn four_corner_cells() {
        let spec = CantorSpec::new(2, 1.0 / 3.0, 2, 1.0 / 3.0, 1).unwrap();
        let m = build_cantor_measure(&spec).unwrap();
        let pts: Vec<(f64, f64)> = m.atoms().map(|a| (a.position.x, a.position.y)).collect();
        let c = 1.0 / 3.0;
        assert_eq!(pts.len(), 4);
        for (p, e) in pts.iter().zip([(-c, -c), (-c, c), (c, -c), (c, c)]) {
            assert!((p.0 - e.0).abs() < 1e-15 && (p.1 - e.1).abs() < 1e-15);
        }
        assert!((m.declared_alpha() - 2.0 * 2f64.ln() / 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(CantorSpec::new(2, 0.6, 1, 1.0, 1).is_err());
        assert!(CantorSpec::new(0, 0.5, 1, 1.0, 1).is_err());
        assert!(CantorSpec::new(2, 0.5, 2, 0.5, 0).is_err());
        assert!(CantorSpec::new(3, 0.2, 3, 0.2, 1).is_ok());
    }

    #[test]
    fn budget_counts_stored_atoms() {
        let spec = CantorSpec::symmetric(1.5, 2, 12).unwrap();
        assert_eq!(spec.stored_atoms(), 8192);
        assert!(build_cantor_measure_with_budget(&spec, 8191).is_err());
        let m = build_cantor_measure_with_budget(&spec, 8192).unwrap();
        assert_eq!(m.atom_count(), 1 << 24);
    }

    #[test]
    fn depth_for_resolution_is_minimal() {
        let spec = CantorSpec::symmetric(1.26, 2, 1).unwrap().depth_for_resolution(1e-4).unwrap();
        assert!(spec.cell_size() <= 1e-4);
        let mut shallower = spec;
        shallower.depth -= 1;
        assert!(shallower.cell_size() > 1e-4);
    }

    proptest! {
        #[test]
        fn weights_sum_to_one_and_support_in_unit_square(
            bx in 1u32..4, by in 1u32..4, sx in 0.3f64..1.0, sy in 0.3f64..1.0, depth in 1u32..5
        ) {
            let rx = if bx == 1 { sx } else { sx / bx as f64 };
            let ry = if by == 1 { sy } else { sy / by as f64 };
            let spec = CantorSpec::new(bx, rx, by, ry, depth).unwrap();
            let m = build_cantor_measure(&spec).unwrap();
            prop_assert_eq!(m.atom_count(), spec.atom_count());
            prop_assert!((m.total_variation() - 1.0).abs() < 1e-12);
            for a in m.atoms() {
                prop_assert!(a.position.x.abs() <= 0.5 && a.position.y.abs() <= 0.5);
                prop_assert!(a.position.norm() <= m.support_radius());
            }
        }
    }
}
