//! Fixtures shared by the benchmarks.

use holojet::{Complex64, DiskPoint, NDifferential, PointPair};

/// Degree-8 power series differential of order `n` with fixed coefficients.
pub fn series_differential(n: usize) -> NDifferential {
    let coeffs = (0..=8)
        .map(|k| Complex64::new((0.4 * k as f64).cos(), (0.9 * k as f64).sin()))
        .collect();
    NDifferential::power_series(n, coeffs)
}

/// Twenty interior point pairs spread over `|z|, |w| < 0.8`.
pub fn sample_pairs() -> Vec<PointPair> {
    (0..20)
        .map(|i| {
            let t = i as f64;
            let z = Complex64::from_polar(0.04 * t, 0.7 * t);
            let w = Complex64::from_polar(0.8 - 0.035 * t, 2.1 * t + 0.3);
            PointPair::new(DiskPoint::new(z).unwrap(), DiskPoint::new(w).unwrap())
        })
        .collect()
}
