//! Brute-force reference: paraxial wave propagation on a periodic 1D grid.
//!
//! G1 is illuminated incoherently, which is the same as an incoherent sum of
//! point sources placed in the G1 plane and weighted by `|t1|^2`. By
//! periodicity one G1 period of sources is enough. Each source field is
//! propagated to G2 with the Fresnel transfer function, multiplied by `t2`,
//! propagated to G3 and recorded as an intensity. The detected flux at a scan
//! offset is the overlap of the summed intensity with the shifted G3 mask.

use super::grating::{intensity_transmission, transmission};
use super::pattern::FringePattern;
use crate::beam::{de_broglie_wavelength, VelocitySample};
use crate::error::{Error, Result};
use crate::model::{InterferometerConfig, MoleculeSpecies};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Resolution of the oracle grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleGrid {
    pub samples_per_period: usize,
    pub n_periods: usize,
    /// Point sources across one G1 period; must divide `samples_per_period`.
    pub n_sources: usize,
    /// Sub-samples per cell used to average the transmission functions.
    pub subsamples: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            samples_per_period: 128,
            n_periods: 512,
            n_sources: 128,
            subsamples: 16,
        }
    }
}

impl OracleGrid {
    pub fn new(samples_per_period: usize, n_periods: usize, n_sources: usize) -> Self {
        Self {
            samples_per_period,
            n_periods,
            n_sources,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_period < 64 || self.n_periods < 32 || self.n_sources < 64 {
            return Err(Error::invalid(format!(
                "oracle grid needs samples_per_period >= 64, n_periods >= 32, n_sources >= 64 (got {}, {}, {})",
                self.samples_per_period, self.n_periods, self.n_sources
            )));
        }
        if self.samples_per_period % self.n_sources != 0 {
            return Err(Error::invalid(format!(
                "n_sources ({}) must divide samples_per_period ({})",
                self.n_sources, self.samples_per_period
            )));
        }
        if self.subsamples == 0 {
            return Err(Error::invalid("subsamples must be >= 1"));
        }
        Ok(())
    }

    fn len(&self) -> usize {
        self.samples_per_period * self.n_periods
    }
}

struct Propagator {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    transfer: Vec<Complex64>,
}

impl Propagator {
    fn new(n: usize, dx: f64, lambda: f64, distance: f64) -> Self {
        let mut planner = FftPlanner::new();
        let width = n as f64 * dx;
        let transfer = (0..n)
            .map(|k| {
                let ks = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                let f = ks / width;
                Complex64::from_polar(1.0 / n as f64, -PI * lambda * distance * f * f)
            })
            .collect();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            transfer,
        }
    }

    fn propagate(&self, field: &mut [Complex64]) {
        self.forward.process(field);
        for (a, h) in field.iter_mut().zip(&self.transfer) {
            *a *= h;
        }
        self.inverse.process(field);
    }
}

/// Cell average of `f` over the cell centred at `x`.
fn cell_average<T>(x: f64, dx: f64, sub: usize, f: impl Fn(f64) -> T) -> T
where
    T: std::iter::Sum<T> + std::ops::Div<f64, Output = T>,
{
    (0..sub)
        .map(|q| f(x - 0.5 * dx + (q as f64 + 0.5) * dx / sub as f64))
        .sum::<T>()
        / sub as f64
}

/// Summed intensity in the G3 plane over all sources, normalised per source.
fn detector_plane_intensity(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    v: f64,
    grid: &OracleGrid,
) -> Result<Vec<f64>> {
    grid.validate()?;
    cfg.validate()?;
    let d = cfg.period();
    let lambda = de_broglie_wavelength(mol, v)?;
    let xi = cfg.separation * lambda / (d * d);
    // The widest angle on the grid walks (spp / 2) lambda L / d sideways; it must
    // not wrap around half the window.
    if grid.samples_per_period as f64 * xi > grid.n_periods as f64 {
        return Err(Error::Aliasing(format!(
            "samples_per_period x L/L_T = {:.1} exceeds n_periods = {}; widen the window",
            grid.samples_per_period as f64 * xi,
            grid.n_periods
        )));
    }
    let n = grid.len();
    let dx = d / grid.samples_per_period as f64;
    let sub = grid.subsamples;
    let [x1, x2, _] = cfg.grating_offsets;
    let wc = cfg.wall_cutoff;

    let t2: Vec<Complex64> = (0..n)
        .map(|i| cell_average(i as f64 * dx, dx, sub, |x| transmission(&cfg.gratings[1], v, wc, x - x2)))
        .collect();
    let stride = grid.samples_per_period / grid.n_sources;
    let sources: Vec<(usize, f64)> = (0..grid.n_sources)
        .map(|s| {
            let i = s * stride;
            let w = cell_average(i as f64 * dx, dx, sub, |x| {
                intensity_transmission(&cfg.gratings[0], wc, x - x1)
            });
            (i, w)
        })
        .filter(|&(_, w)| w > 0.0)
        .collect();

    let prop = Propagator::new(n, dx, lambda, cfg.separation);
    let mut total = vec![0.0; n];
    // Fixed-size batches keep memory bounded; batches are summed in source order
    // so the result does not depend on the number of worker threads.
    for batch in sources.chunks(16) {
        let parts: Vec<Vec<f64>> = batch
            .par_iter()
            .map(|&(i, w)| {
                let mut field = vec![Complex64::new(0.0, 0.0); n];
                field[i] = Complex64::new(1.0, 0.0);
                prop.propagate(&mut field);
                for (a, t) in field.iter_mut().zip(&t2) {
                    *a *= t;
                }
                prop.propagate(&mut field);
                field.iter().map(|a| w * a.norm_sqr()).collect()
            })
            .collect();
        for part in parts {
            for (acc, p) in total.iter_mut().zip(part) {
                *acc += p;
            }
        }
    }
    let norm = 1.0 / grid.n_sources as f64;
    total.iter_mut().for_each(|v| *v *= norm);
    Ok(total)
}

fn detect(cfg: &InterferometerConfig, grid: &OracleGrid, intensity: &[f64], offset: f64) -> f64 {
    let d = cfg.period();
    let dx = d / grid.samples_per_period as f64;
    let x3 = cfg.grating_offsets[2];
    intensity
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p == 0.0 {
                return 0.0;
            }
            p * cell_average(i as f64 * dx, dx, grid.subsamples, |x| {
                intensity_transmission(&cfg.gratings[2], cfg.wall_cutoff, x - x3 - offset)
            })
        })
        .sum()
}

/// Detected flux (fraction of the flux incident on G1) at each G3 scan offset.
pub fn fresnel_oracle(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    v: f64,
    grid: &OracleGrid,
    scan_offsets: &[f64],
) -> Result<Vec<f64>> {
    let intensity = detector_plane_intensity(cfg, mol, v, grid)?;
    Ok(scan_offsets
        .par_iter()
        .map(|&s| detect(cfg, grid, &intensity, s))
        .collect())
}

/// Velocity-weighted oracle flux.
pub fn fresnel_oracle_averaged(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    sample: &VelocitySample,
    grid: &OracleGrid,
    scan_offsets: &[f64],
) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::invalid("velocity sample is empty"));
    }
    let mut total = vec![0.0; scan_offsets.len()];
    for (v, w) in sample.iter() {
        let flux = fresnel_oracle(cfg, mol, v, grid, scan_offsets)?;
        for (acc, f) in total.iter_mut().zip(flux) {
            *acc += w * f;
        }
    }
    Ok(total)
}

/// Fourier coefficients `c_0..=c_M` of oracle flux sampled at `n_scan` equally
/// spaced offsets across one period.
pub fn pattern_from_scan(flux: &[f64], period: f64, harmonics: usize) -> Result<FringePattern> {
    let n = flux.len();
    if n < 2 * harmonics + 1 {
        return Err(Error::invalid(format!(
            "{n} scan points cannot resolve {harmonics} harmonics"
        )));
    }
    let c = (0..=harmonics)
        .map(|m| {
            flux.iter()
                .enumerate()
                .map(|(k, &s)| Complex64::from_polar(s, -2.0 * PI * (m * k) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect();
    FringePattern::new(c, period)
}

/// Oracle fringe pattern from `n_scan` offsets across one period.
pub fn oracle_pattern(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    sample: &VelocitySample,
    grid: &OracleGrid,
    n_scan: usize,
    harmonics: usize,
) -> Result<FringePattern> {
    let d = cfg.period();
    let offsets: Vec<f64> = (0..n_scan).map(|k| k as f64 * d / n_scan as f64).collect();
    let flux = fresnel_oracle_averaged(cfg, mol, sample, grid, &offsets)?;
    pattern_from_scan(&flux, d, harmonics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::AMU;
    use crate::model::Grating;

    const D: f64 = 991e-9;

    fn small_grid() -> OracleGrid {
        OracleGrid::new(64, 64, 64)
    }

    fn cfg(f: f64, sep: f64) -> InterferometerConfig {
        let g = Grating::ideal(D, f).unwrap();
        InterferometerConfig::new([g.clone(), g.clone(), g], sep).unwrap()
    }

    fn c70() -> MoleculeSpecies {
        MoleculeSpecies::new(840.0 * AMU, 70).unwrap()
    }

    #[test]
    fn open_gratings_are_flat() {
        let offsets: Vec<f64> = (0..16).map(|k| k as f64 * D / 16.0).collect();
        let flux = fresnel_oracle(&cfg(1.0, 0.2), &c70(), 100.0, &small_grid(), &offsets).unwrap();
        let p = pattern_from_scan(&flux, D, 4).unwrap();
        assert!(p.visibility() < 1e-10, "V = {}", p.visibility());
        assert!((p.mean() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oracle_is_passive() {
        let offsets: Vec<f64> = (0..8).map(|k| k as f64 * D / 8.0).collect();
        let flux = fresnel_oracle(&cfg(0.479, 0.2), &c70(), 100.0, &small_grid(), &offsets).unwrap();
        assert!(flux.iter().all(|&f| (0.0..=1.0 + 1e-6).contains(&f)));
    }

    #[test]
    fn aliasing_guard() {
        let offsets = [0.0];
        let err = fresnel_oracle(&cfg(0.479, 50.0), &c70(), 100.0, &small_grid(), &offsets).unwrap_err();
        assert!(matches!(err, Error::Aliasing(_)));
    }

    #[test]
    fn grid_validation() {
        assert!(OracleGrid::new(64, 64, 48).validate().is_err());
        assert!(OracleGrid::new(32, 64, 64).validate().is_err());
        assert!(OracleGrid::new(128, 32, 64).validate().is_ok());
    }

    #[test]
    fn deterministic() {
        let offsets: Vec<f64> = (0..4).map(|k| k as f64 * D / 4.0).collect();
        let a = fresnel_oracle(&cfg(0.479, 0.2), &c70(), 100.0, &small_grid(), &offsets).unwrap();
        let b = fresnel_oracle(&cfg(0.479, 0.2), &c70(), 100.0, &small_grid(), &offsets).unwrap();
        assert_eq!(a, b);
    }
}
