use serde::{Deserialize, Serialize};

use super::block::{weighted_block, weighted_node_floor, BlockIntegral, BlockKind};
use super::fit::{fit_decay, DecayFit};
use crate::error::{LabError, Result};
use crate::measures::{
    build_cantor_measure_with_budget, build_sharp_example_with_budget, CantorSpec, SharpCase,
    SharpExampleSpec,
};
use crate::DEFAULT_ATOM_BUDGET;

/// Dimension ranges with different critical weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `1 < alpha < 2`.
    #[serde(rename = "i")]
    I,
    /// `1/2 < alpha <= 1`.
    #[serde(rename = "ii")]
    Ii,
    /// `0 < alpha <= 1/2`.
    #[serde(rename = "iii")]
    Iii,
}

impl Regime {
    pub fn of(alpha: f64) -> Result<Regime> {
        if alpha > 1.0 && alpha < 2.0 {
            Ok(Regime::I)
        } else if alpha > 0.5 && alpha <= 1.0 {
            Ok(Regime::Ii)
        } else if alpha > 0.0 && alpha <= 0.5 {
            Ok(Regime::Iii)
        } else {
            Err(LabError::invalid(format!("alpha = {alpha} must lie in (0, 2)")))
        }
    }

    /// Critical `gamma`: the weighted integral of every compactly supported
    /// `alpha`-dimensional measure converges below it, and fails to for some
    /// measure at and above it.
    pub fn boundary_gamma(self, alpha: f64, p: f64) -> f64 {
        match self {
            Regime::I => alpha * p - alpha / 2.0 - p,
            Regime::Ii => -0.5,
            Regime::Iii => alpha - 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Convergent,
    DivergentExamplesExist,
    Boundary,
}

/// What the fitted block slope shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    Decay,
    Boundary,
    Growth,
}

/// Measure family used as evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Cantor,
    SharpCaseI,
    SharpCaseIii,
}

/// Tolerances and discretisation choices for [`threshold_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    /// Convergent side passes when the slope is at most `-decay_threshold`.
    pub decay_threshold: f64,
    /// Boundary passes when the slope is at least `-no_decay_threshold`.
    pub no_decay_threshold: f64,
    /// Divergent side passes when the slope is at least `growth_threshold`.
    pub growth_threshold: f64,
    /// Dimension excess of the witness used for `1/2 < alpha <= 1`.
    pub regime_ii_delta: f64,
    /// Cantor cells are at most `resolution / max |frequency|` across.
    pub resolution: f64,
    pub cantor_branches: u32,
    pub samples_per_bump: usize,
    pub bump_order: u32,
    /// Node count as a multiple of the node floor.
    pub oversample: f64,
    pub atom_budget: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            decay_threshold: 0.03,
            no_decay_threshold: 0.05,
            growth_threshold: 0.03,
            regime_ii_delta: 0.05,
            resolution: 1.0,
            cantor_branches: 2,
            samples_per_bump: 8,
            bump_order: 2,
            oversample: 1.0,
            atom_budget: DEFAULT_ATOM_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVerdict {
    pub alpha: f64,
    pub p: f64,
    pub gamma: f64,
    pub regime: Regime,
    pub boundary_gamma: f64,
    pub predicted: Prediction,
    pub witness: Witness,
    pub witness_alpha: f64,
    pub empirical_block_slope: f64,
    pub observed: Observed,
    /// The observation agrees with the prediction at the configured thresholds.
    pub consistent: bool,
    pub blocks: Vec<BlockIntegral>,
    pub fit: DecayFit,
    pub note: Option<String>,
}

/// Validates parameters and classifies `gamma` against the critical weight.
pub fn predict(alpha: f64, p: f64, gamma: f64) -> Result<(Regime, f64, Prediction)> {
    let regime = Regime::of(alpha)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(LabError::invalid(format!("p = {p} must exceed 1")));
    }
    if !(gamma > -1.0 && gamma.is_finite()) {
        return Err(LabError::invalid(format!("gamma = {gamma} must exceed -1")));
    }
    let b = regime.boundary_gamma(alpha, p);
    let predicted = if (gamma - b).abs() <= 1e-9 {
        Prediction::Boundary
    } else if gamma < b {
        Prediction::Convergent
    } else {
        Prediction::DivergentExamplesExist
    };
    Ok((regime, b, predicted))
}

/// Cantor measure of dimension `alpha` resolved down to the largest
/// frequency reached by dyadic blocks up to `r_max`.
pub fn cantor_witness_spec(alpha: f64, p: f64, r_max: f64, cfg: &ThresholdConfig) -> Result<CantorSpec> {
    let max_freq = (2.0 * r_max).hypot((2.0 * r_max).powf(p));
    CantorSpec::symmetric(alpha, cfg.cantor_branches, 1)?.depth_for_resolution(cfg.resolution / max_freq)
}

/// Checks on the weighted integrals `int |mu_hat(t, t^p)|^2 t^gamma dt`.
///
/// Below the critical weight a Cantor measure of dimension `alpha` must show
/// decaying dyadic blocks. At or above it the modulated bump trains built for
/// each `R` must show blocks that do not decay, respectively grow.
pub fn threshold_experiment(
    alpha: f64,
    p: f64,
    gamma: f64,
    r_list: &[f64],
    cfg: &ThresholdConfig,
) -> Result<ThresholdVerdict> {
    let (regime, boundary, predicted) = predict(alpha, p, gamma)?;
    if r_list.len() < 3 {
        return Err(LabError::invalid("need at least 3 values of R"));
    }
    if let Some(&bad) = r_list.iter().find(|&&r| !(r >= 2.0 && r.is_finite())) {
        return Err(LabError::invalid(format!("R = {bad} must be >= 2")));
    }
    let mut rs = r_list.to_vec();
    rs.sort_by(f64::total_cmp);
    let nodes = |floor: usize| (floor as f64 * cfg.oversample).ceil() as usize;

    let mut note = None;
    let (witness, witness_alpha, blocks) = if predicted == Prediction::Convergent {
        let spec = cantor_witness_spec(alpha, p, *rs.last().unwrap(), cfg)?;
        let mu = build_cantor_measure_with_budget(&spec, cfg.atom_budget)?;
        let blocks = rs
            .iter()
            .map(|&r| {
                let n = nodes(weighted_node_floor(&mu, p, r, BlockKind::Dyadic));
                weighted_block(&mu, p, gamma, r, BlockKind::Dyadic, n)
            })
            .collect::<Result<Vec<_>>>()?;
        (Witness::Cantor, spec.implied_alpha(), blocks)
    } else {
        let (case, w_alpha, kind, witness) = match regime {
            Regime::I => (SharpCase::CaseI, alpha, BlockKind::SqrtWindow, Witness::SharpCaseI),
            Regime::Ii => {
                let a = 1.0 + cfg.regime_ii_delta;
                note = Some(format!(
                    "witness has dimension {a}; its own critical weight is {:.4}, so at finite \
                     delta its blocks decay like R^({:.4})",
                    Regime::I.boundary_gamma(a, p),
                    gamma - Regime::I.boundary_gamma(a, p)
                ));
                (SharpCase::CaseI, a, BlockKind::SqrtWindow, Witness::SharpCaseI)
            }
            Regime::Iii => (SharpCase::CaseIii, alpha, BlockKind::Dyadic, Witness::SharpCaseIii),
        };
        let blocks = rs
            .iter()
            .map(|&r| {
                let spec = SharpExampleSpec {
                    p,
                    alpha: w_alpha,
                    r,
                    case_id: case,
                    bump_order: cfg.bump_order,
                    samples_per_bump: cfg.samples_per_bump,
                };
                let (mu, _) = build_sharp_example_with_budget(&spec, cfg.atom_budget)?;
                let n = nodes(weighted_node_floor(&mu, p, r, kind));
                weighted_block(&mu, p, gamma, r, kind, n)
            })
            .collect::<Result<Vec<_>>>()?;
        (witness, w_alpha, blocks)
    };

    let fit = fit_decay(&blocks)?;
    let slope = fit.slope;
    let observed = if slope <= -cfg.decay_threshold {
        Observed::Decay
    } else if slope >= cfg.growth_threshold {
        Observed::Growth
    } else {
        Observed::Boundary
    };
    let consistent = match predicted {
        Prediction::Convergent => slope <= -cfg.decay_threshold,
        Prediction::Boundary => slope >= -cfg.no_decay_threshold,
        Prediction::DivergentExamplesExist => slope >= cfg.growth_threshold,
    };
    Ok(ThresholdVerdict {
        alpha,
        p,
        gamma,
        regime,
        boundary_gamma: boundary,
        predicted,
        witness,
        witness_alpha,
        empirical_block_slope: slope,
        observed,
        consistent,
        blocks,
        fit,
        note,
    })
}
