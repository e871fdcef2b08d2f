//! Simulated third-grating scans with Poisson counting noise, and the
//! sinusoidal fit that turns counts back into visibility and phase.

use crate::error::{Error, Result};
use crate::optics::FringePattern;
use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use std::f64::consts::PI;

/// Counts recorded at each third-grating offset.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Offsets [m].
    pub offsets: Vec<f64>,
    pub counts: Vec<u64>,
    /// Integration time per point [s].
    pub integration_time: f64,
    /// The normalised pattern the counts were drawn from.
    pub true_pattern: FringePattern,
}

/// Draw Poisson counts at every offset.
///
/// The expected rate at `x` is `flux * survival * S(x) / c_0`; the pattern is
/// normalised here, so only its shape matters. Every point draws from its own
/// random stream derived from `(seed, index)`.
pub fn simulate_scan(
    pattern: &FringePattern,
    offsets: &[f64],
    flux: f64,
    integration_time: f64,
    survival: f64,
    seed: u64,
) -> Result<ScanResult> {
    if !(flux > 0.0) || !flux.is_finite() {
        return Err(Error::invalid(format!("flux must be > 0, got {flux}")));
    }
    if !(integration_time > 0.0) {
        return Err(Error::invalid(format!("integration time must be > 0, got {integration_time}")));
    }
    if !(0.0..=1.0).contains(&survival) {
        return Err(Error::invalid(format!("survival must lie in [0, 1], got {survival}")));
    }
    let norm = pattern.normalized();
    let mut counts = Vec::with_capacity(offsets.len());
    for (i, &x) in offsets.iter().enumerate() {
        let shape = norm.evaluate(x);
        if shape < -1e-9 {
            return Err(Error::UnphysicalPattern(format!(
                "expected signal {shape:e} < 0 at offset {x:e} m"
            )));
        }
        let mean = flux * survival * integration_time * shape.max(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let n = if mean > 0.0 {
            let d = Poisson::new(mean).map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))?;
            d.sample(&mut rng) as u64
        } else {
            0
        };
        counts.push(n);
    }
    Ok(ScanResult {
        offsets: offsets.to_vec(),
        counts,
        integration_time,
        true_pattern: norm,
    })
}

/// Result of fitting `N(x) = N0 (1 + V sin(2 pi x / d + phi))`.
///
/// With the signal written as `c_0 + 2|c_1| cos(2 pi x/d + arg c_1)`, the fitted
/// phase equals `arg c_1 + pi/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeFit {
    pub visibility: f64,
    /// In `[0, 2 pi)`.
    pub phase: f64,
    /// `N0` divided by the integration time [counts/s].
    pub mean_rate: f64,
    /// Covariance of `(mean_rate, visibility, phase)`.
    pub covariance: [[f64; 3]; 3],
    pub chi2_reduced: f64,
}

impl FringeFit {
    pub fn visibility_error(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }

    pub fn phase_error(&self) -> f64 {
        self.covariance[2][2].sqrt()
    }

    /// The fitted phase expressed as `arg c_1`, wrapped to `(-pi, pi]`.
    pub fn pattern_phase(&self) -> f64 {
        let p = (self.phase - PI / 2.0).rem_euclid(2.0 * PI);
        if p > PI {
            p - 2.0 * PI
        } else {
            p
        }
    }
}

/// Weighted linear least squares on `(N0, N0 V cos phi, N0 V sin phi)` with
/// Poisson weights `1 / max(count, 1)`.
pub fn fit_fringe(scan: &ScanResult, period: f64) -> Result<FringeFit> {
    let counts: Vec<f64> = scan.counts.iter().map(|&c| c as f64).collect();
    fit_counts(&scan.offsets, &counts, scan.integration_time, period)
}

/// [`fit_fringe`] on real-valued counts, for example noiseless expectations.
pub fn fit_counts(offsets: &[f64], counts: &[f64], integration_time: f64, period: f64) -> Result<FringeFit> {
    let n = offsets.len();
    if n != counts.len() {
        return Err(Error::invalid("offsets and counts differ in length"));
    }
    if n < 8 {
        return Err(Error::invalid(format!("fit needs at least 8 points, got {n}")));
    }
    if !(period > 0.0) {
        return Err(Error::invalid(format!("period must be > 0, got {period}")));
    }
    if !(integration_time > 0.0) {
        return Err(Error::invalid(format!("integration time must be > 0, got {integration_time}")));
    }
    let (lo, hi) = offsets
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    // A uniform grid of n points covering one period has span (n-1)/n d.
    let coverage = (hi - lo) * n as f64 / (n - 1) as f64;
    if coverage < period * (1.0 - 1e-9) {
        return Err(Error::invalid(format!(
            "offsets span {:e} m, less than one period {period:e} m",
            hi - lo
        )));
    }
    let k = 2.0 * PI / period;
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    let rows: Vec<(Vector3<f64>, f64, f64)> = offsets
        .iter()
        .zip(counts)
        .map(|(&x, &y)| {
            let row = Vector3::new(1.0, (k * x).sin(), (k * x).cos());
            (row, y, 1.0 / y.max(1.0))
        })
        .collect();
    for (row, y, w) in &rows {
        ata += *w * row * row.transpose();
        atb += *w * *y * row;
    }
    let cov_lin = ata.try_inverse().ok_or_else(|| {
        Error::invalid("degenerate offsets: design matrix is singular")
    })?;
    // Relative conditioning check; an exactly periodic degenerate set gives a near-singular matrix.
    let cond = ata.norm() * cov_lin.norm();
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::invalid("degenerate offsets: design matrix is singular"));
    }
    let p = cov_lin * atb;
    let (a, b, c) = (p[0], p[1], p[2]);
    if !(a > 0.0) {
        return Err(Error::invalid("fitted mean count is not positive"));
    }
    let amp = (b * b + c * c).sqrt();
    let visibility = amp / a;
    let phase = c.atan2(b).rem_euclid(2.0 * PI);

    let dof = (n - 3) as f64;
    let chi2: f64 = rows
        .iter()
        .map(|(row, y, w)| w * (y - row.dot(&p)).powi(2))
        .sum();

    // Jacobian of (a / t, amp / a, atan2(c, b)) with respect to (a, b, c).
    let t = integration_time;
    let mut jac = Matrix3::<f64>::zeros();
    jac[(0, 0)] = 1.0 / t;
    jac[(1, 0)] = -amp / (a * a);
    if amp > 0.0 {
        jac[(1, 1)] = b / (amp * a);
        jac[(1, 2)] = c / (amp * a);
        jac[(2, 1)] = -c / (amp * amp);
        jac[(2, 2)] = b / (amp * amp);
    }
    let cov = jac * cov_lin * jac.transpose();
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
        }
    }
    Ok(FringeFit {
        visibility,
        phase,
        mean_rate: a / t,
        covariance,
        chi2_reduced: chi2 / dof,
    })
}

/// `count` offsets evenly covering `periods` periods, starting at zero, endpoint excluded.
pub fn scan_offsets(period: f64, periods: f64, count: usize) -> Vec<f64> {
    let span = period * periods;
    (0..count).map(|i| span * i as f64 / count as f64).collect()
}
