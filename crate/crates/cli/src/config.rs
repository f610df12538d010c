//! Experiment configuration files.

use std::path::PathBuf;

use curvelab::measures::{build_cantor_measure_with_budget, uniform_grid};
use curvelab::restriction::predict;
use curvelab::{AtomicMeasure, CantorSpec, CurveFamily, CurveSpec, SharpExampleSpec, ThresholdConfig, DEFAULT_ATOM_BUDGET};
use serde::{Deserialize, Serialize};

use crate::RunError;

/// One experiment run: what to compute and where to put it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_budget")]
    pub atom_budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_ATOM_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "parameters", rename_all = "snake_case")]
pub enum Experiment {
    Decay(DecayParams),
    MScan(MScanParams),
    Threshold(ThresholdParams),
    Alpha0(Alpha0Params),
    Vdc(VdcParams),
    Whitney(WhitneyParams),
    Tubes(TubesParams),
    Rect(RectParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Decay(_) => "decay",
            Experiment::MScan(_) => "m_scan",
            Experiment::Threshold(_) => "threshold",
            Experiment::Alpha0(_) => "alpha0",
            Experiment::Vdc(_) => "vdc",
            Experiment::Whitney(_) => "whitney",
            Experiment::Tubes(_) => "tubes",
            Experiment::Rect(_) => "rect",
        }
    }
}

/// A list of values, or the powers of two between two exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Log2 { log2_from: i32, log2_to: i32 },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Values(ref v) => v.clone(),
            Grid::Log2 { log2_from, log2_to } => (log2_from..=log2_to).map(|k| (2f64).powi(k)).collect(),
        }
    }

    fn check(&self, name: &str, min_len: usize, min_value: f64) -> Result<Vec<f64>, RunError> {
        let v = self.values();
        if v.len() < min_len {
            return Err(RunError::config(format!("{name} needs at least {min_len} values")));
        }
        if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x >= min_value)) {
            return Err(RunError::config(format!("{name} value {bad} must be >= {min_value}")));
        }
        Ok(v)
    }
}

/// Where an experiment's measure comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSource {
    /// Symmetric Cantor set of dimension `alpha`. Without an explicit depth,
    /// cells are resolved down to `resolution / |largest frequency|`.
    Cantor {
        alpha: f64,
        #[serde(default = "default_branches")]
        branches: u32,
        #[serde(default)]
        depth: Option<u32>,
        #[serde(default = "default_resolution")]
        resolution: f64,
    },
    CantorSpec(CantorSpec),
    Sharp(SharpExampleSpec),
    Grid { nx: usize, ny: usize },
    Csv { path: PathBuf },
}

fn default_branches() -> u32 {
    2
}

fn default_resolution() -> f64 {
    1.0
}

impl MeasureSource {
    fn cantor_spec(&self, max_freq: f64) -> Result<Option<CantorSpec>, RunError> {
        Ok(match *self {
            MeasureSource::Cantor { alpha, branches, depth, resolution } => {
                let base = CantorSpec::symmetric(alpha, branches, depth.unwrap_or(1))?;
                Some(match depth {
                    Some(_) => base,
                    None => base.depth_for_resolution(resolution / max_freq)?,
                })
            }
            MeasureSource::CantorSpec(s) => {
                s.validate()?;
                Some(s)
            }
            _ => None,
        })
    }

    /// The dimension the source was asked for, falling back to what the
    /// built measure declares.
    pub fn alpha(&self, built: &AtomicMeasure) -> f64 {
        match *self {
            MeasureSource::Cantor { alpha, .. } => alpha,
            MeasureSource::Sharp(s) => s.alpha,
            _ => built.declared_alpha(),
        }
    }

    /// Cheap checks: parameters and atom counts against the budget.
    pub fn validate(&self, max_freq: f64, budget: usize) -> Result<(), RunError> {
        let stored = match self {
            MeasureSource::Sharp(s) => {
                s.validate()?;
                s.atom_count()
            }
            MeasureSource::Grid { nx, ny } => {
                if *nx == 0 || *ny == 0 {
                    return Err(RunError::config("grid sides must be positive"));
                }
                (*nx + *ny) as u128
            }
            MeasureSource::Csv { path } => {
                if !path.is_file() {
                    return Err(RunError::config(format!("measure file {} not found", path.display())));
                }
                0
            }
            _ => self.cantor_spec(max_freq)?.map_or(0, |s| s.stored_atoms()),
        };
        if stored > budget as u128 {
            return Err(RunError::Resource(format!("measure needs {stored} atoms, budget is {budget}")));
        }
        Ok(())
    }

    pub fn build(&self, max_freq: f64, budget: usize) -> Result<AtomicMeasure, RunError> {
        Ok(match self {
            MeasureSource::Sharp(s) => curvelab::measures::build_sharp_example_with_budget(s, budget)?.0,
            MeasureSource::Grid { nx, ny } => uniform_grid(*nx, *ny)?,
            MeasureSource::Csv { path } => {
                let file = std::fs::File::open(path)
                    .map_err(|e| RunError::config(format!("{}: {e}", path.display())))?;
                curvelab::measures::read_csv(std::io::BufReader::new(file))?
            }
            _ => build_cantor_measure_with_budget(&self.cantor_spec(max_freq)?.expect("cantor source"), budget)?,
        })
    }
}

fn parabola() -> CurveFamily {
    CurveFamily::Parabola
}

fn curve(family: CurveFamily) -> Result<CurveSpec, RunError> {
    Ok(CurveSpec::from_family(family)?)
}

/// Largest frequency `|R gamma(t)|` over `t in [1, 2]`.
fn max_frequency(curve: &CurveSpec, r_max: f64) -> f64 {
    (0..=64)
        .map(|i| curve.point(1.0 + i as f64 / 64.0).norm() * r_max)
        .fold(0.0, f64::max)
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub measure: MeasureSource,
    #[serde(default = "parabola")]
    pub curve: CurveFamily,
    pub r_values: Grid,
    #[serde(default = "one")]
    pub oversample: f64,
    #[serde(default = "decay_tolerance")]
    pub slope_tolerance: f64,
}

fn decay_tolerance() -> f64 {
    0.15
}

impl DecayParams {
    pub fn curve(&self) -> Result<CurveSpec, RunError> {
        curve(self.curve)
    }

    pub fn max_frequency(&self) -> Result<f64, RunError> {
        let rs = self.r_values.values();
        Ok(max_frequency(&self.curve()?, rs.iter().cloned().fold(0.0, f64::max)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MScanParams {
    pub measure: MeasureSource,
    #[serde(rename = "R")]
    pub r: f64,
    pub m_values: Vec<f64>,
    #[serde(default = "one")]
    pub oversample: f64,
    #[serde(default = "m_tolerance")]
    pub slope_tolerance: f64,
}

fn m_tolerance() -> f64 {
    0.3
}

impl MScanParams {
    pub fn max_frequency(&self) -> Result<f64, RunError> {
        let m = self.m_values.iter().cloned().fold(1.0, f64::max);
        Ok(max_frequency(&CurveSpec::m_curve(m)?, self.r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub alpha: f64,
    pub p: f64,
    pub gamma: f64,
    pub r_values: Grid,
    #[serde(default)]
    pub config: ThresholdConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alpha0Params {
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "alpha_above")]
    pub alpha_above: f64,
    #[serde(default = "alpha_below")]
    pub alpha_below: f64,
    #[serde(default = "r_above")]
    pub r_above: Grid,
    #[serde(default = "r_below")]
    pub r_below: Grid,
    #[serde(default)]
    pub config: ThresholdConfig,
}

fn two() -> f64 {
    2.0
}

fn alpha_above() -> f64 {
    1.4
}

fn alpha_below() -> f64 {
    1.3
}

fn r_above() -> Grid {
    Grid::Log2 { log2_from: 2, log2_to: 7 }
}

fn r_below() -> Grid {
    Grid::Log2 { log2_from: 7, log2_to: 11 }
}

impl Alpha0Params {
    /// Critical dimension where the critical weight crosses `gamma`.
    pub fn critical_alpha(&self) -> f64 {
        (self.gamma + self.p) / (self.p - 0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VdcParams {
    #[serde(default = "parabola")]
    pub curve: CurveFamily,
    #[serde(default = "vdc_interval")]
    pub interval: [f64; 2],
    #[serde(default = "vdc_xi")]
    pub xi2_values: Grid,
    #[serde(default = "vdc_ratio")]
    pub max_ratio: f64,
}

fn vdc_interval() -> [f64; 2] {
    [0.0, 2.0]
}

fn vdc_xi() -> Grid {
    Grid::Log2 { log2_from: 4, log2_to: 12 }
}

fn vdc_ratio() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyParams {
    pub n_max: u32,
    #[serde(default = "whitney_points")]
    pub points: usize,
}

fn whitney_points() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubesParams {
    #[serde(default = "parabola")]
    pub curve: CurveFamily,
    pub delta: f64,
    pub n_values: Vec<u32>,
    pub r_values: Grid,
    /// Offsets `(k_I, k_J)` of the Whitney pair at every generation.
    #[serde(default = "tube_pair")]
    pub pair: (u64, u64),
    #[serde(rename = "C", default = "c_big")]
    pub c_big: f64,
    #[serde(rename = "c", default = "c_small")]
    pub c_small: f64,
    #[serde(default = "mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "tube_tolerance")]
    pub slope_tolerance: f64,
}

fn tube_pair() -> (u64, u64) {
    (0, 3)
}

fn c_big() -> f64 {
    2.0
}

fn c_small() -> f64 {
    0.5
}

fn mc_samples() -> usize {
    100_000
}

fn tube_tolerance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectParams {
    #[serde(default = "parabola")]
    pub curve: CurveFamily,
    pub r_values: Grid,
    /// Every dyadic interval of this generation is boxed.
    #[serde(default = "rect_generation")]
    pub n: u32,
    #[serde(default = "rect_constant")]
    pub c1: f64,
}

fn rect_generation() -> u32 {
    3
}

fn rect_constant() -> f64 {
    curvelab::geometry::DEFAULT_RECT_CONSTANT
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::config(format!("bad config: {e}")))
    }

    /// Checks every precondition that can be checked without computing.
    pub fn validate(&self) -> Result<(), RunError> {
        let budget = self.atom_budget;
        if budget == 0 {
            return Err(RunError::config("atom_budget must be positive"));
        }
        match &self.experiment {
            Experiment::Decay(p) => {
                p.r_values.check("r_values", 3, f64::MIN_POSITIVE)?;
                check_oversample(p.oversample)?;
                p.measure.validate(p.max_frequency()?, budget)?;
            }
            Experiment::MScan(p) => {
                if p.m_values.len() < 2 {
                    return Err(RunError::config("m_values needs at least 2 values"));
                }
                if let Some(m) = p.m_values.iter().find(|m| !(**m >= 1.0 && m.is_finite())) {
                    return Err(RunError::config(format!("m = {m} must be >= 1")));
                }
                if !(p.r > 0.0 && p.r.is_finite()) {
                    return Err(RunError::config(format!("R = {} must be positive", p.r)));
                }
                check_oversample(p.oversample)?;
                p.measure.validate(p.max_frequency()?, budget)?;
            }
            Experiment::Threshold(p) => {
                predict(p.alpha, p.p, p.gamma)?;
                p.r_values.check("r_values", 3, 2.0)?;
                check_threshold_config(&p.config)?;
            }
            Experiment::Alpha0(p) => {
                predict(p.alpha_above, p.p, p.gamma)?;
                predict(p.alpha_below, p.p, p.gamma)?;
                if !(p.alpha_below < p.critical_alpha() && p.critical_alpha() < p.alpha_above) {
                    return Err(RunError::config(format!(
                        "alpha_below < {:.4} < alpha_above must hold",
                        p.critical_alpha()
                    )));
                }
                p.r_above.check("r_above", 3, 2.0)?;
                p.r_below.check("r_below", 3, 2.0)?;
                check_threshold_config(&p.config)?;
            }
            Experiment::Vdc(p) => {
                curve(p.curve)?;
                let [a, b] = p.interval;
                if !(0.0 <= a && a < b && b.is_finite()) {
                    return Err(RunError::config(format!("interval [{a}, {b}] must satisfy 0 <= a < b")));
                }
                p.xi2_values.check("xi2_values", 2, 1.0)?;
            }
            Experiment::Whitney(p) => {
                if !(2..=30).contains(&p.n_max) {
                    return Err(RunError::config(format!("n_max = {} must lie in 2..=30", p.n_max)));
                }
                if p.points == 0 {
                    return Err(RunError::config("points must be positive"));
                }
            }
            Experiment::Tubes(p) => {
                curve(p.curve)?;
                p.r_values.check("r_values", 2, 1.0)?;
                if p.n_values.is_empty() {
                    return Err(RunError::config("n_values is empty"));
                }
                for &n in &p.n_values {
                    let i = curvelab::DyadicInterval::new(n, p.pair.0)?;
                    let j = curvelab::DyadicInterval::new(n, p.pair.1)?;
                    curvelab::WhitneyPair::new(i, j)?;
                }
                if !(p.delta > 0.0 && p.delta < 1.0) {
                    return Err(RunError::config(format!("delta = {} must lie in (0, 1)", p.delta)));
                }
                if !(p.c_big > 0.0 && p.c_small > 0.0) {
                    return Err(RunError::config("C and c must be positive"));
                }
                if p.mc_samples < curvelab::geometry::MIN_MC_SAMPLES {
                    return Err(RunError::config(format!(
                        "mc_samples must be >= {}",
                        curvelab::geometry::MIN_MC_SAMPLES
                    )));
                }
            }
            Experiment::Rect(p) => {
                curve(p.curve)?;
                p.r_values.check("r_values", 2, f64::MIN_POSITIVE)?;
                if !(1..=20).contains(&p.n) {
                    return Err(RunError::config(format!("n = {} must lie in 1..=20", p.n)));
                }
                if !(p.c1 > 0.0) {
                    return Err(RunError::config("c1 must be positive"));
                }
            }
        }
        Ok(())
    }
}

fn check_oversample(x: f64) -> Result<(), RunError> {
    if !(x >= 1.0 && x.is_finite()) {
        return Err(RunError::config(format!("oversample = {x} must be >= 1")));
    }
    Ok(())
}

fn check_threshold_config(c: &ThresholdConfig) -> Result<(), RunError> {
    check_oversample(c.oversample)?;
    if !(c.resolution > 0.0) || c.samples_per_bump < 8 || c.cantor_branches < 2 {
        return Err(RunError::config(
            "threshold config needs resolution > 0, samples_per_bump >= 8 and cantor_branches >= 2",
        ));
    }
    Ok(())
}
