//! Numerical laboratory for Fourier transforms of fractal measures restricted
//! to curves in the plane.
//!
//! The crate is organised around four subsystems:
//!
//! * [`measures`] builds finite atomic measures (product Cantor sets and the
//!   modulated bump families that saturate the curve restriction exponents) and
//!   audits their ball-growth dimension.
//! * [`oscillatory`] evaluates Fourier transforms of atomic measures and of arc
//!   measures on curves `t -> (t, phi(t))`.
//! * [`restriction`] integrates `|mu_hat|^2` along scaled curves and dyadic
//!   frequency blocks, fits power laws and runs the threshold experiments.
//! * [`geometry`] covers the dyadic/Whitney combinatorics, bounding rectangles
//!   of curved arcs and Monte-Carlo areas of tube intersections.
//!
//! The Fourier convention throughout is `mu_hat(xi) = sum_j w_j exp(-2 pi i xi . x_j)`,
//! see [`FT_SIGN`].

pub mod error;
pub mod geometry;
pub mod measures;
pub mod oscillatory;
pub mod restriction;
pub mod sum;
pub mod vec2;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
pub use vec2::Vec2;

pub use geometry::{
    bounding_rect, tube_intersection_area, tube_intersection_areas, w_bound_scan,
    whitney_cover_check, whitney_pairs, DyadicInterval, Interval, RotRect, TubeIntersection,
    TubeParams, WhitneyPair,
};
pub use measures::{
    audit_dimension, build_cantor_measure, build_sharp_example, Atom, AtomicMeasure, CantorSpec,
    DerivedGeometry, DimensionReport, Provenance, SamplingPlan, SharpCase, SharpExampleSpec,
};
pub use oscillatory::{
    check_van_der_corput, curve_arc_ft, ft_atomic, ft_batch, CurveFamily, CurveSpec, Frequency,
    QuadraticProgression,
};
pub use restriction::{
    fit_decay, m_dependence_scan, restriction_integral, threshold_experiment, weighted_block,
    BlockIntegral, BlockKind, DecayFit, ThresholdConfig, ThresholdVerdict,
};

/// Sign of the exponent in the Fourier transform: `exp(FT_SIGN * 2 pi i xi . x)`.
pub const FT_SIGN: f64 = -1.0;

/// Default cap on the number of atoms a constructor may materialise.
pub const DEFAULT_ATOM_BUDGET: usize = 10_000_000;
