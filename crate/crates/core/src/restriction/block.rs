use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measures::AtomicMeasure;
use crate::oscillatory::{ft_batch, ft_progression, CurveSpec, Frequency, QuadraticProgression};
use crate::sum::NeumaierSum;
use crate::vec2::Vec2;

/// Frequency range an integral runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// `t in [1, 2]` along the scaled curve `R gamma(t)`.
    UnitInterval,
    /// `t in [R, 2R]` along `(t, t^p)`.
    Dyadic,
    /// `t in [R, R + sqrt R]` along `(t, t^p)`.
    SqrtWindow,
}

impl BlockKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::UnitInterval => "unit_interval",
            BlockKind::Dyadic => "dyadic",
            BlockKind::SqrtWindow => "sqrt_window",
        }
    }

    /// Parameter window of the block at scale `r`.
    pub fn window(self, r: f64) -> [f64; 2] {
        match self {
            BlockKind::UnitInterval => [1.0, 2.0],
            BlockKind::Dyadic => [r, 2.0 * r],
            BlockKind::SqrtWindow => [r, r + r.sqrt()],
        }
    }
}

/// A midpoint-rule value of `int |mu_hat|^2 t^gamma` over one block, with
/// the same sum at twice the nodes as a convergence check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockIntegral {
    #[serde(rename = "R")]
    pub r: f64,
    pub value: f64,
    pub gamma: f64,
    pub kind: BlockKind,
    pub quad_nodes: usize,
    /// Value at `2 * quad_nodes`.
    pub refined_value: f64,
    /// `|refined_value - value| < STABILITY_TOL * value`.
    pub converged: bool,
}

impl BlockIntegral {
    pub fn relative_change(&self) -> f64 {
        (self.refined_value - self.value).abs() / self.value
    }
}

/// Relative change allowed between `n` and `2n` nodes.
pub const STABILITY_TOL: f64 = 0.01;

/// Nodes per parallel batch of frequencies.
const SEGMENT: usize = 1 << 15;

/// Frequencies `scale * (t, phi(t))` with an optional exact quadratic form
/// `phi(t) = qa t^2 + qb t + qc` for the recurrence kernel.
struct Path<'a> {
    scale: f64,
    phi: &'a (dyn Fn(f64) -> f64 + Sync),
    quadratic: Option<(f64, f64, f64)>,
}

impl Path<'_> {
    fn point(&self, t: f64) -> Vec2 {
        Vec2::new(t, (self.phi)(t)) * self.scale
    }
}

/// `h sum_i t_i^gamma |mu_hat(path(t_i))|^2`, `t_i = a + (i + 1/2) h`.
fn midpoint_energy(measure: &AtomicMeasure, path: &Path, a: f64, b: f64, n: usize, gamma: f64) -> Result<f64> {
    let h = (b - a) / n as f64;
    let mut acc = NeumaierSum::new();
    let mut i0 = 0;
    while i0 < n {
        let len = SEGMENT.min(n - i0);
        let t0 = a + (i0 as f64 + 0.5) * h;
        let values = match path.quadratic {
            Some((qa, qb, _)) => {
                let prog = QuadraticProgression::new(
                    path.point(t0),
                    Vec2::new(h, h * (2.0 * qa * t0 + qb)) * path.scale,
                    Vec2::new(0.0, qa * h * h) * path.scale,
                    len,
                )?;
                ft_progression(measure, &prog)
            }
            None => {
                let pts = (0..len)
                    .map(|k| Frequency::from_vec(path.point(a + ((i0 + k) as f64 + 0.5) * h)))
                    .collect::<Result<Vec<_>>>()?;
                ft_batch(measure, &pts)
            }
        };
        for (k, v) in values.iter().enumerate() {
            let t = a + ((i0 + k) as f64 + 0.5) * h;
            let w = if gamma == 0.0 { 1.0 } else { t.powf(gamma) };
            acc.add(w * v.norm_sqr());
        }
        i0 += len;
    }
    Ok(acc.value() * h)
}

/// Runs the sum at `n` and `2n` nodes; an all-cancellation result is retried
/// once at `4n` before giving up.
fn stable_block(
    measure: &AtomicMeasure,
    path: &Path,
    window: [f64; 2],
    n: usize,
    gamma: f64,
) -> Result<(usize, f64, f64)> {
    let [a, b] = window;
    let mut n = n;
    let mut value = midpoint_energy(measure, path, a, b, n, gamma)?;
    if !(value > f64::MIN_POSITIVE) {
        n *= 4;
        value = midpoint_energy(measure, path, a, b, n, gamma)?;
        if !(value > f64::MIN_POSITIVE) {
            return Err(LabError::CheckFailed(format!(
                "block over [{a}, {b}] cancels to {value:e} even at {n} nodes"
            )));
        }
    }
    let refined = midpoint_energy(measure, path, a, b, 2 * n, gamma)?;
    Ok((n, value, refined))
}

/// Smallest node count accepted by [`restriction_integral`]:
/// `8 ceil(R (1 + max|phi'|) support_radius)`.
pub fn restriction_node_floor(measure: &AtomicMeasure, curve: &CurveSpec, r: f64) -> usize {
    let speed = r * (1.0 + curve.max_slope(1.0, 2.0)) * measure.support_radius();
    8 * (speed.ceil() as usize).max(1)
}

/// `int_1^2 |mu_hat(R gamma(t))|^2 dt` by the midpoint rule on `quad_nodes`
/// nodes.
pub fn restriction_integral(
    measure: &AtomicMeasure,
    curve: &CurveSpec,
    r: f64,
    quad_nodes: usize,
) -> Result<BlockIntegral> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(LabError::invalid(format!("R = {r} must be positive")));
    }
    let floor = restriction_node_floor(measure, curve, r);
    if quad_nodes < floor {
        return Err(LabError::NodeFloor { given: quad_nodes, required: floor });
    }
    let family = curve.family;
    let phi = move |t: f64| family.phi(t);
    let path = Path { scale: r, phi: &phi, quadratic: family.quadratic_coeffs() };
    let (n, value, refined) = stable_block(measure, &path, [1.0, 2.0], quad_nodes, 0.0)?;
    Ok(block(r, 0.0, BlockKind::UnitInterval, n, value, refined))
}

fn block(r: f64, gamma: f64, kind: BlockKind, n: usize, value: f64, refined: f64) -> BlockIntegral {
    BlockIntegral {
        r,
        value,
        gamma,
        kind,
        quad_nodes: n,
        refined_value: refined,
        converged: (refined - value).abs() < STABILITY_TOL * value,
    }
}

/// Smallest node count accepted by [`weighted_block`]:
/// `8 ceil(L (1 + p b^(p-1)) support_radius)` for the window `[a, b]` of
/// length `L`.
pub fn weighted_node_floor(measure: &AtomicMeasure, p: f64, r: f64, kind: BlockKind) -> usize {
    let [a, b] = kind.window(r);
    let speed = (b - a) * (1.0 + p * b.powf(p - 1.0)) * measure.support_radius();
    8 * (speed.ceil() as usize).max(1)
}

/// `int |mu_hat(t, t^p)|^2 t^gamma dt` over the block of `kind` at scale `R`.
pub fn weighted_block(
    measure: &AtomicMeasure,
    p: f64,
    gamma: f64,
    r: f64,
    kind: BlockKind,
    quad_nodes: usize,
) -> Result<BlockIntegral> {
    if kind == BlockKind::UnitInterval {
        return Err(LabError::invalid("weighted blocks run over dyadic or sqrt windows"));
    }
    if !(r >= 2.0 && r.is_finite()) {
        return Err(LabError::invalid(format!("R = {r} must be >= 2")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(LabError::invalid(format!("p = {p} must exceed 1")));
    }
    if !gamma.is_finite() {
        return Err(LabError::invalid("gamma must be finite"));
    }
    let floor = weighted_node_floor(measure, p, r, kind);
    if quad_nodes < floor {
        return Err(LabError::NodeFloor { given: quad_nodes, required: floor });
    }
    let phi = move |t: f64| t.powf(p);
    let quadratic = (p == 2.0).then_some((1.0, 0.0, 0.0));
    let path = Path { scale: 1.0, phi: &phi, quadratic };
    let (n, value, refined) = stable_block(measure, &path, kind.window(r), quad_nodes, gamma)?;
    Ok(block(r, gamma, kind, n, value, refined))
}
