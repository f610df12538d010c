//! The computation behind each experiment kind.

use curvelab::geometry::{
    bounding_rect_with, meeting_shift, whitney_tube_intervals, DyadicInterval, Interval, TubeParams, WhitneyPair,
};
use curvelab::restriction::{restriction_node_floor, DecayFit};
use curvelab::{
    check_van_der_corput, fit_decay, m_dependence_scan, restriction_integral, threshold_experiment,
    tube_intersection_area, w_bound_scan, whitney_cover_check, whitney_pairs, BlockIntegral, CurveSpec,
    ThresholdVerdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::*;
use crate::plot::{Plot, Series};
use crate::RunError;

/// Measured against predicted, with the tolerance the verdict used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub measured_exponent: Option<f64>,
    pub predicted_exponent: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

/// Everything an experiment produces before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
    pub verdict: Verdict,
    /// One flag per quadrature or sampling step.
    pub convergence: Vec<bool>,
    pub plot: Option<Plot>,
}

/// Shortest decimal that round-trips.
pub fn num(x: f64) -> String {
    format!("{x}")
}

const BLOCK_HEADER: [&str; 6] = ["R", "value", "gamma", "kind", "quad_nodes", "converged"];

fn block_row(b: &BlockIntegral) -> Vec<String> {
    vec![num(b.r), num(b.value), num(b.gamma), b.kind.as_str().into(), b.quad_nodes.to_string(), b.converged.to_string()]
}

fn points(blocks: &[BlockIntegral]) -> Vec<(f64, f64)> {
    blocks.iter().map(|b| (b.r, b.value)).collect()
}

fn fit_json(f: &DecayFit) -> Value {
    json!({"slope": f.slope, "intercept": f.intercept, "max_residual": f.max_residual})
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    match &cfg.experiment {
        Experiment::Decay(p) => decay(p, cfg.atom_budget),
        Experiment::MScan(p) => m_scan(p, cfg.atom_budget),
        Experiment::Threshold(p) => threshold(p, cfg.atom_budget),
        Experiment::Alpha0(p) => alpha0(p, cfg.atom_budget),
        Experiment::Vdc(p) => vdc(p),
        Experiment::Whitney(p) => whitney(p, cfg.seed),
        Experiment::Tubes(p) => tubes(p, cfg.seed),
        Experiment::Rect(p) => rect(p),
    }
}

fn decay(p: &DecayParams, budget: usize) -> Result<Outcome, RunError> {
    let curve = p.curve()?;
    let mu = p.measure.build(p.max_frequency()?, budget)?;
    let alpha = p.measure.alpha(&mu);
    let mut blocks = Vec::new();
    for r in p.r_values.values() {
        let n = (restriction_node_floor(&mu, &curve, r) as f64 * p.oversample).ceil() as usize;
        blocks.push(restriction_integral(&mu, &curve, r, n).map_err(RunError::during("restriction_integral"))?);
    }
    let fit = fit_decay(&blocks).map_err(RunError::during("fit_decay"))?;
    let predicted = -alpha / 2.0;
    let passed = fit.slope <= predicted + p.slope_tolerance;
    Ok(Outcome {
        header: BLOCK_HEADER.to_vec(),
        rows: blocks.iter().map(block_row).collect(),
        summary: json!({
            "alpha": alpha,
            "stored_atoms": mu.stored_atoms(),
            "atoms": mu.atom_count().to_string(),
            "fit": fit_json(&fit),
            "reference_slope": predicted,
        }),
        verdict: Verdict {
            measured_exponent: Some(fit.slope),
            predicted_exponent: Some(predicted),
            tolerance: Some(p.slope_tolerance),
            passed,
        },
        convergence: blocks.iter().map(|b| b.converged).collect(),
        plot: Some(Plot {
            title: format!("restriction integral, alpha = {alpha}"),
            x_label: "R".into(),
            y_label: "int |mu_hat(R gamma)|^2".into(),
            series: vec![Series { label: "measured".into(), points: points(&blocks), reference_slope: Some(predicted) }],
        }),
    })
}

fn m_scan(p: &MScanParams, budget: usize) -> Result<Outcome, RunError> {
    let mu = p.measure.build(p.max_frequency()?, budget)?;
    let alpha = p.measure.alpha(&mu);
    let scan = m_dependence_scan(&mu, alpha, p.r, &p.m_values, p.oversample)
        .map_err(RunError::during("m_dependence_scan"))?;
    let predicted = scan.predicted_slope();
    let rows = scan
        .m_values
        .iter()
        .zip(&scan.blocks)
        .map(|(m, b)| vec![num(*m), num(b.r), num(b.value), b.quad_nodes.to_string(), b.converged.to_string()])
        .collect();
    Ok(Outcome {
        header: vec!["m", "R", "value", "quad_nodes", "converged"],
        rows,
        summary: json!({"alpha": alpha, "R": p.r, "fit": fit_json(&scan.fit), "reference_slope": predicted}),
        verdict: Verdict {
            measured_exponent: Some(scan.fit.slope),
            predicted_exponent: Some(predicted),
            tolerance: Some(p.slope_tolerance),
            passed: scan.fit.slope <= predicted + p.slope_tolerance,
        },
        convergence: scan.blocks.iter().map(|b| b.converged).collect(),
        plot: Some(Plot {
            title: format!("curvature dependence at R = {}", p.r),
            x_label: "m".into(),
            y_label: "int |mu_hat(R gamma_m)|^2".into(),
            series: vec![Series {
                label: "measured".into(),
                points: scan.m_values.iter().zip(&scan.blocks).map(|(m, b)| (*m, b.value)).collect(),
                reference_slope: Some(predicted),
            }],
        }),
    })
}

fn verdict_json(v: &ThresholdVerdict) -> Value {
    json!({
        "alpha": v.alpha,
        "p": v.p,
        "gamma": v.gamma,
        "regime": v.regime,
        "boundary_gamma": v.boundary_gamma,
        "predicted": v.predicted,
        "witness": v.witness,
        "witness_alpha": v.witness_alpha,
        "empirical_block_slope": v.empirical_block_slope,
        "observed": v.observed,
        "consistent": v.consistent,
        "fit": fit_json(&v.fit),
        "note": v.note,
    })
}

fn threshold(p: &ThresholdParams, budget: usize) -> Result<Outcome, RunError> {
    let mut cfg = p.config.clone();
    cfg.atom_budget = cfg.atom_budget.min(budget);
    let v = threshold_experiment(p.alpha, p.p, p.gamma, &p.r_values.values(), &cfg)
        .map_err(RunError::during("threshold_experiment"))?;
    let predicted = v.gamma - v.boundary_gamma;
    Ok(Outcome {
        header: BLOCK_HEADER.to_vec(),
        rows: v.blocks.iter().map(block_row).collect(),
        summary: verdict_json(&v),
        verdict: Verdict {
            measured_exponent: Some(v.empirical_block_slope),
            predicted_exponent: Some(predicted),
            tolerance: None,
            passed: v.consistent,
        },
        convergence: v.blocks.iter().map(|b| b.converged).collect(),
        plot: Some(Plot {
            title: format!("weighted blocks, alpha = {}, p = {}, gamma = {}", p.alpha, p.p, p.gamma),
            x_label: "R".into(),
            y_label: "block value".into(),
            series: vec![Series { label: "measured".into(), points: points(&v.blocks), reference_slope: Some(predicted) }],
        }),
    })
}

fn alpha0(p: &Alpha0Params, budget: usize) -> Result<Outcome, RunError> {
    let mut cfg = p.config.clone();
    cfg.atom_budget = cfg.atom_budget.min(budget);
    let above = threshold_experiment(p.alpha_above, p.p, p.gamma, &p.r_above.values(), &cfg)
        .map_err(RunError::during("threshold_experiment (above)"))?;
    let below = threshold_experiment(p.alpha_below, p.p, p.gamma, &p.r_below.values(), &cfg)
        .map_err(RunError::during("threshold_experiment (below)"))?;
    let mut rows = Vec::new();
    for (side, v) in [("above", &above), ("below", &below)] {
        for b in &v.blocks {
            let mut row = vec![side.to_string(), num(v.alpha)];
            row.extend(block_row(b));
            rows.push(row);
        }
    }
    let mut header = vec!["side", "alpha"];
    header.extend(BLOCK_HEADER);
    Ok(Outcome {
        header,
        rows,
        summary: json!({
            "critical_alpha": p.critical_alpha(),
            "above": verdict_json(&above),
            "below": verdict_json(&below),
        }),
        verdict: Verdict {
            measured_exponent: None,
            predicted_exponent: None,
            tolerance: None,
            passed: above.consistent && below.consistent,
        },
        convergence: above.blocks.iter().chain(&below.blocks).map(|b| b.converged).collect(),
        plot: Some(Plot {
            title: format!("critical dimension {:.4} at p = {}", p.critical_alpha(), p.p),
            x_label: "R".into(),
            y_label: "block value".into(),
            series: vec![
                Series {
                    label: format!("alpha = {} (Cantor)", p.alpha_above),
                    points: points(&above.blocks),
                    reference_slope: None,
                },
                Series {
                    label: format!("alpha = {} (sharp example)", p.alpha_below),
                    points: points(&below.blocks),
                    reference_slope: Some(below.gamma - below.boundary_gamma),
                },
            ],
        }),
    })
}

fn vdc(p: &VdcParams) -> Result<Outcome, RunError> {
    let curve = CurveSpec::from_family(p.curve)?;
    let xs = p.xi2_values.values();
    let scaled = check_van_der_corput(&curve, &xs, p.interval).map_err(RunError::during("check_van_der_corput"))?;
    let abs: Vec<(f64, f64)> = scaled.iter().map(|&(x, v)| (x, v / x.sqrt())).collect();
    let fit = DecayFit::from_values(&xs, &abs.iter().map(|a| a.1).collect::<Vec<_>>())
        .map_err(RunError::during("fit"))?;
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0f64), |(l, h), &(_, v)| (l.min(v), h.max(v)));
    let ratio = hi / lo;
    Ok(Outcome {
        header: vec!["xi2", "abs_lambda_hat", "scaled"],
        rows: scaled.iter().zip(&abs).map(|(&(x, s), &(_, a))| vec![num(x), num(a), num(s)]).collect(),
        summary: json!({
            "interval": p.interval,
            "max_over_min": ratio,
            "max_ratio": p.max_ratio,
            "fit": fit_json(&fit),
            "reference_slope": -0.5,
        }),
        verdict: Verdict {
            measured_exponent: Some(fit.slope),
            predicted_exponent: Some(-0.5),
            tolerance: None,
            passed: ratio <= p.max_ratio,
        },
        convergence: vec![true; xs.len()],
        plot: Some(Plot {
            title: format!("arc measure on [{}, {}]", p.interval[0], p.interval[1]),
            x_label: "xi_2".into(),
            y_label: "|lambda_hat(0, xi_2)|".into(),
            series: vec![Series { label: "measured".into(), points: abs, reference_slope: Some(-0.5) }],
        }),
    })
}

fn whitney(p: &WhitneyParams, seed: u64) -> Result<Outcome, RunError> {
    let scale = (p.n_max as f64).exp2();
    let gap = 2.0 / scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(p.points);
    while pts.len() < p.points {
        let (s, t): (f64, f64) = (rng.random_range(1.0..2.0), rng.random_range(1.0..2.0));
        let on_grid = |u: f64| ((u - 1.0) * scale).fract() == 0.0;
        if s > 1.0 && t > 1.0 && (s - t).abs() > gap && !on_grid(s) && !on_grid(t) {
            pts.push((s, t));
        }
    }
    let report = whitney_cover_check(&pts, p.n_max).map_err(RunError::during("whitney_cover_check"))?;
    let mut per_generation = serde_json::Map::new();
    for n in 2..=p.n_max.min(16) {
        per_generation.insert(n.to_string(), json!(whitney_pairs(n)?.len()));
    }
    let histogram: serde_json::Map<String, Value> =
        report.histogram.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    Ok(Outcome {
        header: vec!["s", "t", "multiplicity"],
        rows: pts.iter().zip(&report.multiplicities).map(|(&(s, t), m)| vec![num(s), num(t), m.to_string()]).collect(),
        summary: json!({
            "n_max": p.n_max,
            "points": p.points,
            "histogram": histogram,
            "pairs_per_generation": per_generation,
        }),
        verdict: Verdict {
            measured_exponent: None,
            predicted_exponent: None,
            tolerance: None,
            passed: report.all_exactly_once(),
        },
        convergence: Vec::new(),
        plot: None,
    })
}

fn tubes(p: &TubesParams, seed: u64) -> Result<Outcome, RunError> {
    let curve = CurveSpec::from_family(p.curve)?;
    let rs = p.r_values.values();
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut slopes = serde_json::Map::new();
    let mut worst = f64::NEG_INFINITY;
    let mut w_ok = true;
    let mut convergence = Vec::new();
    for &n in &p.n_values {
        let pair = WhitneyPair::new(DyadicInterval::new(n, p.pair.0)?, DyadicInterval::new(n, p.pair.1)?)?;
        let (it, jt) = whitney_tube_intervals(&pair);
        let mut ratios = Vec::new();
        for &r in &rs {
            let params = TubeParams {
                r,
                delta: p.delta,
                c_big: p.c_big,
                c_small: p.c_small,
                n,
                mc_samples: p.mc_samples,
                seed,
            };
            let shift = meeting_shift(&curve, r, &it, &jt);
            let a = tube_intersection_area(&curve, &params, it, jt, shift)
                .map_err(RunError::during("tube_intersection_area"))?;
            let w = w_bound_scan(&curve, &params, it, jt, shift).map_err(RunError::during("w_bound_scan"))?;
            w_ok &= w.within_bound;
            convergence.push(a.std_error < 0.05 * a.bound);
            ratios.push((r, a.bound_ratio));
            rows.push(vec![
                n.to_string(),
                num(r),
                num(p.c_big),
                num(a.area),
                num(a.std_error),
                num(a.bound),
                num(a.bound_ratio),
                num(w.w_max),
                num(w.bound),
                w.within_bound.to_string(),
            ]);
        }
        let fit = DecayFit::from_values(&rs, &ratios.iter().map(|x| x.1).collect::<Vec<_>>())
            .map_err(RunError::during("fit"))?;
        worst = worst.max(fit.slope);
        slopes.insert(n.to_string(), json!(fit.slope));
        series.push(Series { label: format!("n = {n}"), points: ratios, reference_slope: Some(0.0) });
    }
    Ok(Outcome {
        header: vec!["n", "R", "C", "area", "std_error", "bound", "bound_ratio", "w_max", "w_bound", "w_within"],
        rows,
        summary: json!({
            "delta": p.delta,
            "pair": p.pair,
            "slopes": slopes,
            "w_bound_held": w_ok,
            "reference_slope": 0.0,
        }),
        verdict: Verdict {
            measured_exponent: Some(worst),
            predicted_exponent: Some(0.0),
            tolerance: Some(p.slope_tolerance),
            passed: worst <= p.slope_tolerance && w_ok,
        },
        convergence,
        plot: Some(Plot {
            title: format!("tube intersections, delta = {}", p.delta),
            x_label: "R".into(),
            y_label: "area / (R^(2 delta) 2^n m)".into(),
            series,
        }),
    })
}

fn rect(p: &RectParams) -> Result<Outcome, RunError> {
    let curve = CurveSpec::from_family(p.curve)?;
    let rs = p.r_values.values();
    let mut rows = Vec::new();
    let mut longest = Vec::new();
    let mut all_within = true;
    for &r in &rs {
        let mut long = 0f64;
        for k in 0..(1u64 << p.n) {
            let d = DyadicInterval::new(p.n, k)?;
            let iv = Interval::new(d.left(), d.right())?;
            let out = bounding_rect_with(&curve, r, iv, p.c1).map_err(RunError::during("bounding_rect"))?;
            all_within &= out.within_budget;
            long = long.max(out.rect.long_side());
            rows.push(vec![
                num(r),
                p.n.to_string(),
                k.to_string(),
                num(iv.a),
                num(iv.b),
                num(out.rect.long_side()),
                num(out.rect.short_side()),
                num(out.long_budget),
                num(out.short_budget),
                out.within_budget.to_string(),
            ]);
        }
        longest.push((r, long));
    }
    let fit = DecayFit::from_values(&rs, &longest.iter().map(|x| x.1).collect::<Vec<_>>())
        .map_err(RunError::during("fit"))?;
    Ok(Outcome {
        header: vec!["R", "n", "k", "a", "b", "long_side", "short_side", "long_budget", "short_budget", "within_budget"],
        rows,
        summary: json!({"n": p.n, "c1": p.c1, "all_within_budget": all_within, "long_side_fit": fit_json(&fit)}),
        verdict: Verdict {
            measured_exponent: Some(fit.slope),
            predicted_exponent: Some(1.0),
            tolerance: None,
            passed: all_within,
        },
        convergence: Vec::new(),
        plot: Some(Plot {
            title: format!("rectangles around arcs of length 2^-{}", p.n),
            x_label: "R".into(),
            y_label: "longest side".into(),
            series: vec![Series { label: "measured".into(), points: longest, reference_slope: Some(1.0) }],
        }),
    })
}
