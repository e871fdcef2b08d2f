//! Longitudinal velocity statistics of the molecular beam and the derived
//! wavelength and coherence quantities.

use crate::constants::{H, K_B};
use crate::error::{Error, Result};
use crate::model::{BeamModel, MoleculeSpecies};
use crate::numerics::{adaptive_simpson, GaussLegendre};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

const NORMALIZATION_TOL: f64 = 1e-10;

/// The shifted Maxwell-Boltzmann density `v^2 exp(-m (v - v0)^2 / 2kT)`,
/// truncated to the beam's selection window and normalised there.
#[derive(Debug, Clone)]
pub struct VelocityDistribution {
    beam: BeamModel,
    mass: f64,
    norm: f64,
    // Shift of the exponent keeping the unnormalised density near unity.
    log_scale: f64,
}

impl VelocityDistribution {
    pub fn new(beam: &BeamModel, mol: &MoleculeSpecies) -> Result<Self> {
        if !(beam.v_min < beam.v_max) {
            return Err(Error::config(
                "beam.v_min_m_per_s",
                format!("empty velocity window [{}, {}]", beam.v_min, beam.v_max),
            ));
        }
        beam.validate()?;
        let mut dist = Self {
            beam: beam.clone(),
            mass: mol.mass,
            norm: 1.0,
            log_scale: 0.0,
        };
        // Peak of the unnormalised log density inside the window.
        let peak = dist.mode_unclipped().clamp(beam.v_min, beam.v_max).max(1e-300);
        dist.log_scale = dist.log_unnormalized(peak);
        let norm = adaptive_simpson(|v| dist.unnormalized(v), beam.v_min, beam.v_max, NORMALIZATION_TOL * 1e-2)?;
        if !(norm > 0.0) {
            return Err(Error::invalid("velocity distribution has zero mass in its window"));
        }
        dist.norm = norm;
        Ok(dist)
    }

    fn beta(&self) -> f64 {
        self.mass / (2.0 * K_B * self.beam.source_temperature)
    }

    fn log_unnormalized(&self, v: f64) -> f64 {
        2.0 * v.ln() - self.beta() * (v - self.beam.v0).powi(2)
    }

    fn unnormalized(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        (self.log_unnormalized(v) - self.log_scale).exp()
    }

    /// Stationary point of `v^2 exp(-beta (v-v0)^2)` for v > 0.
    fn mode_unclipped(&self) -> f64 {
        let v0 = self.beam.v0;
        let b = self.beta();
        0.5 * (v0 + (v0 * v0 + 4.0 / b).sqrt())
    }

    /// Most probable velocity within the window.
    pub fn mode(&self) -> f64 {
        self.mode_unclipped().clamp(self.beam.v_min, self.beam.v_max)
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if v < self.beam.v_min || v > self.beam.v_max {
            return 0.0;
        }
        self.unnormalized(v) / self.norm
    }

    pub fn beam(&self) -> &BeamModel {
        &self.beam
    }

    /// `int v pdf(v) dv` by adaptive quadrature.
    pub fn mean(&self) -> Result<f64> {
        adaptive_simpson(|v| v * self.pdf(v), self.beam.v_min, self.beam.v_max, 1e-12)
    }

    pub fn std_dev(&self) -> Result<f64> {
        let mean = self.mean()?;
        let var = adaptive_simpson(
            |v| (v - mean).powi(2) * self.pdf(v),
            self.beam.v_min,
            self.beam.v_max,
            1e-12,
        )?;
        Ok(var.sqrt())
    }
}

/// Normalised velocity density at `v`.
pub fn velocity_pdf(v: f64, beam: &BeamModel, mol: &MoleculeSpecies) -> Result<f64> {
    if v < 0.0 {
        return Err(Error::invalid(format!("velocity must be >= 0, got {v}")));
    }
    Ok(VelocityDistribution::new(beam, mol)?.pdf(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Gauss-Legendre nodes weighted by the density. Deterministic.
    #[default]
    Quadrature,
    /// Inverse-CDF draws with equal weights.
    MonteCarlo,
}

/// Discrete stand-in for the velocity distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySample {
    pub velocities: Vec<f64>,
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl VelocitySample {
    /// A single velocity with unit weight.
    pub fn monochromatic(v: f64) -> Self {
        Self {
            velocities: vec![v],
            weights: vec![1.0],
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.velocities.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, w)| v * w).sum()
    }

    pub fn min_velocity(&self) -> f64 {
        self.velocities.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Discretise the beam distribution into `n` weighted velocities.
pub fn sample_velocities(
    beam: &BeamModel,
    mol: &MoleculeSpecies,
    n: usize,
    seed: u64,
    mode: SamplingMode,
) -> Result<VelocitySample> {
    if n == 0 {
        return Err(Error::invalid("need at least one velocity sample"));
    }
    let dist = VelocityDistribution::new(beam, mol)?;
    match mode {
        SamplingMode::Quadrature => {
            let rule = GaussLegendre::new(n);
            let (velocities, mut weights): (Vec<f64>, Vec<f64>) = rule
                .mapped(beam.v_min, beam.v_max)
                .map(|(v, w)| (v, w * dist.pdf(v)))
                .unzip();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                return Err(Error::invalid("quadrature weights vanish; window too narrow for density"));
            }
            weights.iter_mut().for_each(|w| *w /= total);
            Ok(VelocitySample {
                velocities,
                weights,
                seed,
            })
        }
        SamplingMode::MonteCarlo => {
            let table = CdfTable::new(&dist);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let velocities: Vec<f64> = (0..n).map(|_| table.invert(&dist, rng.random::<f64>())).collect();
            Ok(VelocitySample {
                velocities,
                weights: vec![1.0 / n as f64; n],
                seed,
            })
        }
    }
}

/// Tabulated cumulative distribution for inverse-transform sampling.
struct CdfTable {
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    rule: GaussLegendre,
}

impl CdfTable {
    const CELLS: usize = 2048;

    fn new(dist: &VelocityDistribution) -> Self {
        let b = dist.beam();
        let rule = GaussLegendre::new(8);
        let h = (b.v_max - b.v_min) / Self::CELLS as f64;
        let edges: Vec<f64> = (0..=Self::CELLS).map(|i| b.v_min + h * i as f64).collect();
        let mut cumulative = Vec::with_capacity(Self::CELLS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in edges.windows(2) {
            acc += rule.integrate(w[0], w[1], |v| dist.pdf(v));
            cumulative.push(acc);
        }
        // Absorb the residual quadrature error into the normalisation.
        let total = acc;
        cumulative.iter_mut().for_each(|c| *c /= total);
        Self {
            edges,
            cumulative,
            rule,
        }
    }

    fn invert(&self, dist: &VelocityDistribution, u: f64) -> f64 {
        let cell = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&u).expect("finite cdf"))
        {
            Ok(i) => return self.edges[i],
            Err(i) => i.saturating_sub(1).min(Self::CELLS - 1),
        };
        let (lo, hi) = (self.edges[cell], self.edges[cell + 1]);
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let scale = self.cumulative[Self::CELLS].max(total);
        let base = self.cumulative[cell];
        let mass_in_cell = self.cumulative[cell + 1] - base;
        let raw_cell = self.rule.integrate(lo, hi, |v| dist.pdf(v));
        // F(v) restricted to this cell, expressed in the table's normalisation.
        let partial = |v: f64| base + mass_in_cell * self.rule.integrate(lo, v, |x| dist.pdf(x)) / raw_cell;
        let (mut a, mut b) = (lo, hi);
        let mut v = lo + (u - base) / mass_in_cell.max(f64::MIN_POSITIVE) * (hi - lo);
        for _ in 0..60 {
            let f = partial(v) - u;
            if f.abs() < 1e-14 * scale {
                break;
            }
            if f > 0.0 {
                b = v;
            } else {
                a = v;
            }
            let slope = mass_in_cell * dist.pdf(v) / raw_cell;
            let newton = v - f / slope;
            v = if slope > 0.0 && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
        }
        v
    }
}

/// `h / (m v)`.
pub fn de_broglie_wavelength(mol: &MoleculeSpecies, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::invalid(format!("velocity must be > 0, got {v}")));
    }
    Ok(H / (mol.mass * v))
}

/// Longitudinal coherence length `lambda v / dv` (proportionality constant one).
pub fn coherence_length(lambda_db: f64, v: f64, delta_v: f64) -> Result<f64> {
    if !(delta_v > 0.0) {
        return Err(Error::invalid(format!("velocity spread must be > 0, got {delta_v}")));
    }
    Ok(lambda_db * v / delta_v)
}

/// Whether n-th order diffraction survives the finite coherence length.
pub fn order_observable(lambda_db: f64, coherence_length: f64, n: u32) -> Result<bool> {
    if n < 1 {
        return Err(Error::invalid("diffraction order must be >= 1"));
    }
    // A relative slack of a few ulps keeps the boundary case L_c = n lambda inclusive
    // when L_c itself came out of a floating-point product.
    Ok(coherence_length >= n as f64 * lambda_db * (1.0 - 4.0 * f64::EPSILON))
}

/// Transverse temperature selected by a collimation half angle: `m (v sin theta)^2 / 2 k_B`.
pub fn transverse_temperature(mol: &MoleculeSpecies, v: f64, half_angle: f64) -> Result<f64> {
    if !(half_angle > 0.0 && half_angle < FRAC_PI_2) {
        return Err(Error::invalid(format!(
            "collimation half angle must lie in (0, pi/2), got {half_angle}"
        )));
    }
    let vt = v * half_angle.sin();
    Ok(mol.mass * vt * vt / (2.0 * K_B))
}
