//! Fixtures shared by the kernel benchmarks in `benches/`.

use curvelab::{build_cantor_measure, AtomicMeasure, CantorSpec, Frequency, Result};

/// Symmetric two-branch Cantor measure of dimension `alpha` at `depth`.
pub fn cantor(alpha: f64, depth: u32) -> Result<AtomicMeasure> {
    build_cantor_measure(&CantorSpec::symmetric(alpha, 2, depth)?)
}

/// `n` frequencies along a diagonal ray out to radius `r`.
pub fn ray(n: usize, r: f64) -> Vec<Frequency> {
    (1..=n)
        .map(|k| {
            let t = r * k as f64 / n as f64;
            Frequency::new(0.6 * t, 0.8 * t).expect("finite frequency")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_build() {
        assert_eq!(super::cantor(1.5, 4).unwrap().atom_count(), 256);
        assert_eq!(super::ray(5, 10.0).len(), 5);
    }
}
