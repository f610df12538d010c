use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AtomicMeasure;
use crate::error::{LabError, Result};
use crate::sum::NeumaierSum;
use crate::vec2::Vec2;
use crate::DEFAULT_ATOM_BUDGET;

/// Where balls are centered and which radii are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    /// Center a ball on every atom.
    pub include_atoms: bool,
    /// Side of the uniform grid of centers over the bounding box of the atoms.
    pub grid: usize,
    #[serde(default)]
    pub extra_centers: Vec<Vec2>,
    /// Explicit radii; by default dyadic from the atom spacing up to twice the
    /// support radius.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan { include_atoms: true, grid: 64, extra_centers: Vec::new(), radii: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub alpha: f64,
    pub radii: Vec<f64>,
    /// Largest `|mu|(B(center, r)) / r^alpha` found.
    pub worst_ratio: f64,
    pub worst_center: Vec2,
    pub worst_radius: f64,
    pub centers_sampled: usize,
}

/// Atoms bucketed into square cells of side `h`, sorted by cell.
struct CellIndex {
    h: f64,
    pos: Vec<Vec2>,
    mass: Vec<f64>,
    cells: HashMap<(i64, i64), (usize, usize, f64)>,
}

impl CellIndex {
    fn new(points: &[(Vec2, f64)], h: f64) -> Self {
        let key = |p: Vec2| ((p.x / h).floor() as i64, (p.y / h).floor() as i64);
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by_key(|&i| key(points[i].0));
        let pos: Vec<Vec2> = order.iter().map(|&i| points[i].0).collect();
        let mass: Vec<f64> = order.iter().map(|&i| points[i].1).collect();
        let mut cells = HashMap::new();
        let mut start = 0;
        while start < pos.len() {
            let k = key(pos[start]);
            let mut end = start;
            let mut total = NeumaierSum::new();
            while end < pos.len() && key(pos[end]) == k {
                total.add(mass[end]);
                end += 1;
            }
            cells.insert(k, (start, end, total.value()));
            start = end;
        }
        CellIndex { h, pos, mass, cells }
    }

    fn ball_mass(&self, c: Vec2, r: f64) -> f64 {
        let h = self.h;
        let (i0, i1) = (((c.x - r) / h).floor() as i64, ((c.x + r) / h).floor() as i64);
        let (j0, j1) = (((c.y - r) / h).floor() as i64, ((c.y + r) / h).floor() as i64);
        let mut acc = NeumaierSum::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                let Some(&(s, e, total)) = self.cells.get(&(i, j)) else { continue };
                let (x0, y0) = (i as f64 * h, j as f64 * h);
                let far = (x0 - c.x).abs().max((x0 + h - c.x).abs())
                    .hypot((y0 - c.y).abs().max((y0 + h - c.y).abs()));
                if far < r {
                    acc.add(total);
                } else {
                    for k in s..e {
                        if (self.pos[k] - c).norm() <= r {
                            acc.add(self.mass[k]);
                        }
                    }
                }
            }
        }
        acc.value()
    }
}

pub fn audit_dimension(measure: &AtomicMeasure, alpha: f64, plan: &SamplingPlan) -> Result<DimensionReport> {
    audit_dimension_with_budget(measure, alpha, plan, DEFAULT_ATOM_BUDGET)
}

/// Maximum of `|mu|(B(y, r)) / r^alpha` over the centers and radii of `plan`.
/// Balls about the origin and the center of mass with radius equal to the
/// support radius (or the smallest radius, if larger) are always included.
pub fn audit_dimension_with_budget(
    measure: &AtomicMeasure,
    alpha: f64,
    plan: &SamplingPlan,
    budget: usize,
) -> Result<DimensionReport> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(LabError::invalid(format!("alpha = {alpha} must lie in (0, 2]")));
    }
    let spacing = measure.atom_spacing();
    let sr = measure.support_radius();
    let radii = match &plan.radii {
        Some(r) => r.clone(),
        None => {
            let mut r = if spacing > 0.0 { spacing } else { 2.0 * sr / 4096.0 };
            let mut out = Vec::new();
            loop {
                out.push(r);
                if r >= 2.0 * sr {
                    break;
                }
                r *= 2.0;
            }
            out
        }
    };
    if radii.is_empty() {
        return Err(LabError::invalid("no radii given"));
    }
    for &r in &radii {
        if !(r > 0.0 && r.is_finite()) {
            return Err(LabError::invalid(format!("radius {r} must be positive")));
        }
        if r < spacing * (1.0 - 1e-9) {
            return Err(LabError::invalid(format!(
                "radius {r:e} is below the atom spacing {spacing:e}"
            )));
        }
    }

    let explicit = measure.to_explicit(budget)?;
    let points: Vec<(Vec2, f64)> = explicit.atoms().map(|a| (a.position, a.weight.norm())).collect();
    let total: f64 = points.iter().map(|p| p.1).collect::<NeumaierSum>().value();

    let mut centers: Vec<Vec2> = Vec::new();
    if plan.include_atoms {
        centers.extend(points.iter().map(|p| p.0));
    }
    if plan.grid > 0 {
        let (mut lo, mut hi) = (points[0].0, points[0].0);
        for &(p, _) in &points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let g = plan.grid;
        for i in 0..g {
            for j in 0..g {
                let fx = (i as f64 + 0.5) / g as f64;
                let fy = (j as f64 + 0.5) / g as f64;
                centers.push(Vec2::new(lo.x + fx * (hi.x - lo.x), lo.y + fy * (hi.y - lo.y)));
            }
        }
    }
    centers.extend(plan.extra_centers.iter().copied());

    // Balls about the origin and the center of mass hold everything once the
    // radius reaches the support radius; never go below the smallest radius.
    let r_global = sr.max(radii.iter().cloned().fold(f64::INFINITY, f64::min));
    let mut best = (f64::NEG_INFINITY, Vec2::ZERO, 0.0);
    let mut consider = |ratio: f64, c: Vec2, r: f64| {
        if ratio > best.0 {
            best = (ratio, c, r);
        }
    };
    consider(total / r_global.powf(alpha), Vec2::ZERO, r_global);
    let com = measure.center_of_mass();
    let coarse = CellIndex::new(&points, r_global / 4.0);
    consider(coarse.ball_mass(com, r_global) / r_global.powf(alpha), com, r_global);

    for &r in &radii {
        let index = CellIndex::new(&points, r / 4.0);
        let masses: Vec<f64> = centers.par_iter().map(|&c| index.ball_mass(c, r)).collect();
        let scale = r.powf(alpha);
        for (&c, m) in centers.iter().zip(masses) {
            consider(m / scale, c, r);
        }
    }

    Ok(DimensionReport {
        alpha,
        radii,
        worst_ratio: best.0,
        worst_center: best.1,
        worst_radius: best.2,
        centers_sampled: centers.len() + 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_cantor_measure, Atom, CantorSpec, Provenance};

    #[test]
    fn single_atom_half_radius() {
        let m = AtomicMeasure::from_atoms(vec![Atom::real(0.3, 0.2, 1.0)], 1.0, Provenance::Custom)
            .unwrap();
        let plan = SamplingPlan { radii: Some(vec![0.5]), grid: 0, ..Default::default() };
        let rep = audit_dimension(&m, 1.0, &plan).unwrap();
        assert_eq!(rep.worst_ratio, 2.0);
        assert_eq!(rep.worst_radius, 0.5);
    }

    #[test]
    fn radii_below_spacing_are_rejected() {
        let m = build_cantor_measure(&CantorSpec::new(2, 1.0 / 3.0, 2, 1.0 / 3.0, 3).unwrap()).unwrap();
        let plan = SamplingPlan { radii: Some(vec![m.atom_spacing() / 2.0]), ..Default::default() };
        assert!(audit_dimension(&m, 1.26, &plan).is_err());
    }

    #[test]
    fn ball_masses_match_brute_force() {
        let m = build_cantor_measure(&CantorSpec::new(3, 0.25, 2, 0.3, 3).unwrap()).unwrap();
        let pts: Vec<(Vec2, f64)> = m.atoms().map(|a| (a.position, a.weight.norm())).collect();
        for r in [0.01, 0.05, 0.2, 0.7] {
            let idx = CellIndex::new(&pts, r / 4.0);
            for c in [Vec2::new(0.1, -0.2), Vec2::new(-0.33, 0.3), Vec2::ZERO] {
                let brute: f64 = pts.iter().filter(|p| (p.0 - c).norm() <= r).map(|p| p.1).sum();
                assert!((idx.ball_mass(c, r) - brute).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lebesgue_grid_ratio_is_bounded() {
        let n = 64;
        let atoms = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let x = (i as f64 + 0.5) / n as f64 - 0.5;
                let y = (j as f64 + 0.5) / n as f64 - 0.5;
                Atom::real(x, y, 1.0 / (n * n) as f64)
            })
            .collect();
        let m = AtomicMeasure::from_atoms(atoms, 2.0, Provenance::Custom).unwrap();
        let radii: Vec<f64> = (0..7).map(|k| m.atom_spacing() * 2f64.powi(k)).filter(|&r| r <= 1.0).collect();
        let plan = SamplingPlan { radii: Some(radii), ..Default::default() };
        let rep = audit_dimension(&m, 2.0, &plan).unwrap();
        assert!(rep.worst_ratio <= 4.0 * std::f64::consts::PI, "{}", rep.worst_ratio);
    }

    #[test]
    fn global_ball_is_always_sampled() {
        let m = build_cantor_measure(&CantorSpec::new(2, 0.4, 2, 0.4, 3).unwrap()).unwrap();
        let plan = SamplingPlan { radii: Some(vec![m.atom_spacing()]), grid: 4, ..Default::default() };
        let rep = audit_dimension(&m, 1.5, &plan).unwrap();
        assert!(rep.worst_ratio >= m.total_variation() / m.support_radius().powf(1.5));
    }
}
