//! Restriction integrals of `|mu_hat|^2` along curves, power-law fits and
//! the convergence threshold experiments.

mod block;
mod fit;
mod threshold;

pub use block::{
    restriction_integral, restriction_node_floor, weighted_block, weighted_node_floor, BlockIntegral,
    BlockKind, STABILITY_TOL,
};
pub use fit::{fit_decay, m_dependence_scan, DecayFit, MScan};
pub use threshold::{
    cantor_witness_spec, predict, threshold_experiment, Observed, Prediction, Regime, ThresholdConfig,
    ThresholdVerdict, Witness,
};
