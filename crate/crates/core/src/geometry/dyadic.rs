use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A closed interval `[a, b]` of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(LabError::invalid(format!("[{a}, {b}] is not an interval")));
        }
        Ok(Interval { a, b })
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.b <= self.a
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.a <= t && t <= self.b
    }

    /// Distance between the closed intervals (zero if they meet).
    pub fn dist(&self, other: &Interval) -> f64 {
        (other.a - self.b).max(self.a - other.b).max(0.0)
    }

    /// Same center, total length increased by `extra`.
    pub fn widened(&self, extra: f64) -> Interval {
        Interval { a: self.a - extra / 2.0, b: self.b + extra / 2.0 }
    }

    pub fn within(&self, outer: &Interval) -> bool {
        outer.a <= self.a && self.b <= outer.b
    }
}

/// `[1 + k 2^-n, 1 + (k + 1) 2^-n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub n: u32,
    pub k: u64,
}

/// Generations are limited so that endpoints are exact in `f64`.
pub const MAX_GENERATION: u32 = 52;

impl DyadicInterval {
    pub fn new(n: u32, k: u64) -> Result<Self> {
        if n > MAX_GENERATION {
            return Err(LabError::invalid(format!("generation {n} exceeds {MAX_GENERATION}")));
        }
        if k >= 1u64 << n {
            return Err(LabError::invalid(format!("offset {k} out of range for generation {n}")));
        }
        Ok(DyadicInterval { n, k })
    }

    pub fn len(&self) -> f64 {
        (-(self.n as f64)).exp2()
    }

    pub fn left(&self) -> f64 {
        1.0 + self.k as f64 * self.len()
    }

    pub fn right(&self) -> f64 {
        1.0 + (self.k + 1) as f64 * self.len()
    }

    pub fn interval(&self) -> Interval {
        Interval { a: self.left(), b: self.right() }
    }

    pub fn parent(&self) -> Option<DyadicInterval> {
        (self.n > 0).then(|| DyadicInterval { n: self.n - 1, k: self.k / 2 })
    }

    /// The generation-`n` interval containing `t`, if `t` is in `[1, 2)`.
    pub fn containing(t: f64, n: u32) -> Option<DyadicInterval> {
        if !(1.0..2.0).contains(&t) || n > MAX_GENERATION {
            return None;
        }
        let k = ((t - 1.0) * (n as f64).exp2()).floor() as u64;
        Some(DyadicInterval { n, k: k.min((1u64 << n) - 1) })
    }

    /// Closures intersect and the intervals differ.
    pub fn adjacent(&self, other: &DyadicInterval) -> bool {
        self != other && self.left() <= other.right() && other.left() <= self.right()
    }

    /// Closures are disjoint.
    pub fn separated(&self, other: &DyadicInterval) -> bool {
        self.right() < other.left() || other.right() < self.left()
    }
}

/// Equal-length dyadic intervals with disjoint closures whose parents are
/// distinct and touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WhitneyPair {
    #[serde(rename = "I")]
    pub i: DyadicInterval,
    #[serde(rename = "J")]
    pub j: DyadicInterval,
}

impl WhitneyPair {
    pub fn is_related(i: &DyadicInterval, j: &DyadicInterval) -> bool {
        if i.n != j.n || !i.separated(j) {
            return false;
        }
        match (i.parent(), j.parent()) {
            (Some(pi), Some(pj)) => pi.adjacent(&pj),
            _ => false,
        }
    }

    pub fn new(i: DyadicInterval, j: DyadicInterval) -> Result<Self> {
        if !Self::is_related(&i, &j) {
            return Err(LabError::invalid(format!("{i:?} and {j:?} are not a Whitney pair")));
        }
        Ok(WhitneyPair { i, j })
    }

    pub fn generation(&self) -> u32 {
        self.i.n
    }
}

/// All ordered pairs `(I, J)` of generation `n`, sorted by `(k_I, k_J)`.
pub fn whitney_pairs(n: u32) -> Result<Vec<WhitneyPair>> {
    if n < 2 {
        return Err(LabError::invalid(format!("generation {n} must be >= 2")));
    }
    if n > MAX_GENERATION {
        return Err(LabError::invalid(format!("generation {n} exceeds {MAX_GENERATION}")));
    }
    let count = 1u64 << n;
    let mut out = Vec::new();
    for ki in 0..count {
        let i = DyadicInterval { n, k: ki };
        // Partners have parents at distance one, so they are within 3 offsets.
        for kj in ki.saturating_sub(3)..(ki + 4).min(count) {
            let j = DyadicInterval { n, k: kj };
            if WhitneyPair::is_related(&i, &j) {
                out.push(WhitneyPair { i, j });
            }
        }
    }
    Ok(out)
}

/// Outcome of [`whitney_cover_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub n_max: u32,
    /// Number of generations `n <= n_max` whose pairs contain each point.
    pub multiplicities: Vec<usize>,
    /// Multiplicity -> number of points.
    pub histogram: BTreeMap<usize, usize>,
}

impl CoverReport {
    pub fn all_exactly_once(&self) -> bool {
        self.histogram.keys().all(|&k| k == 1)
    }
}

/// Counts, for each `(s, t)`, the Whitney pairs `(I, J)` of generations
/// `2..=n_max` with `s in I` and `t in J`.
///
/// Points must lie in the open square, off the generation-`n_max` dyadic
/// grid, and satisfy `|s - t| > 2^(1 - n_max)`: closer points are only
/// covered at generations beyond `n_max`.
pub fn whitney_cover_check(points: &[(f64, f64)], n_max: u32) -> Result<CoverReport> {
    if !(2..=MAX_GENERATION).contains(&n_max) {
        return Err(LabError::invalid(format!("n_max = {n_max} must lie in 2..={MAX_GENERATION}")));
    }
    let scale = (n_max as f64).exp2();
    let gap = 2.0 / scale;
    let mut multiplicities = Vec::with_capacity(points.len());
    for &(s, t) in points {
        for u in [s, t] {
            if !(u > 1.0 && u < 2.0) {
                return Err(LabError::invalid(format!("({s}, {t}) is outside (1, 2)^2")));
            }
            let g = (u - 1.0) * scale;
            if g == g.floor() {
                return Err(LabError::invalid(format!("({s}, {t}) lies on the dyadic grid")));
            }
        }
        if !((s - t).abs() > gap) {
            return Err(LabError::invalid(format!(
                "({s}, {t}) is within 2^(1-{n_max}) of the diagonal"
            )));
        }
        let mut count = 0;
        for n in 2..=n_max {
            let i = DyadicInterval::containing(s, n).expect("checked range");
            let j = DyadicInterval::containing(t, n).expect("checked range");
            if WhitneyPair::is_related(&i, &j) {
                count += 1;
            }
        }
        multiplicities.push(count);
    }
    let mut histogram = BTreeMap::new();
    for &m in &multiplicities {
        *histogram.entry(m).or_insert(0) += 1;
    }
    Ok(CoverReport { n_max, multiplicities, histogram })
}
