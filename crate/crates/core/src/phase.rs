//! Phase-averaging channels: the fringe is shifted by a classical parameter
//! (velocity, grating position, internal clock state) and averaging over that
//! parameter washes out the contrast.

use crate::beam::VelocitySample;
use crate::constants::{C, G_STANDARD};
use crate::error::{Error, Result};
use crate::model::{InterferometerConfig, MoleculeSpecies};
use crate::optics::ChannelReduction;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Fringe phase from gravity along the grating vector, `k a T^2` with `T = L/v`.
pub fn gravity_phase(cfg: &InterferometerConfig, v: f64) -> Result<f64> {
    let t = flight_time(cfg, v)?;
    Ok(cfg.k_grating() * cfg.gravity_accel * t * t)
}

/// Coriolis fringe phase `k (2 v Omega) T^2`.
pub fn coriolis_phase(cfg: &InterferometerConfig, v: f64) -> Result<f64> {
    let t = flight_time(cfg, v)?;
    Ok(cfg.k_grating() * 2.0 * v * cfg.rotation_rate * t * t)
}

fn flight_time(cfg: &InterferometerConfig, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::invalid(format!("velocity must be > 0, got {v}")));
    }
    Ok(cfg.separation / v)
}

/// Total inertial fringe phase `(2 pi / d)(g + 2 v Omega)(L/v)^2`.
pub fn inertial_phase(cfg: &InterferometerConfig, v: f64) -> Result<f64> {
    Ok(gravity_phase(cfg, v)? + coriolis_phase(cfg, v)?)
}

/// Linearised spread of the inertial phase over a velocity spread `delta_v`.
///
/// Each term is differentiated on its own: the gravity part scales as `1/v^2`
/// and contributes `2 phi_g dv/v`, the Coriolis part scales as `1/v` and
/// contributes `phi_c dv/v`. The magnitudes are added.
pub fn phase_spread(cfg: &InterferometerConfig, v: f64, delta_v: f64) -> Result<f64> {
    if !(delta_v >= 0.0) {
        return Err(Error::invalid(format!("velocity spread must be >= 0, got {delta_v}")));
    }
    let rel = delta_v / v;
    Ok((2.0 * gravity_phase(cfg, v)? * rel).abs() + (coriolis_phase(cfg, v)? * rel).abs())
}

/// How inertial phases enter a velocity-averaged pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InertialMode {
    #[default]
    Off,
    /// `exp(i m phi(v))` applied to every velocity's own pattern.
    PerVelocity,
    /// One averaged factor applied after the velocity average.
    Lumped,
}

impl InertialMode {
    /// Combine the two configuration switches; both on would count the same
    /// dephasing twice.
    pub fn from_flags(per_velocity: bool, lumped: bool) -> Result<Self> {
        match (per_velocity, lumped) {
            (true, true) => Err(Error::ModeConflict(
                "inertial phases requested both per velocity and lumped".into(),
            )),
            (true, false) => Ok(Self::PerVelocity),
            (false, true) => Ok(Self::Lumped),
            (false, false) => Ok(Self::Off),
        }
    }
}

/// Pure phase factor `exp(i m phi(v))` for a single velocity.
pub fn inertial_phase_reduction(
    cfg: &InterferometerConfig,
    v: f64,
    harmonics: usize,
) -> Result<ChannelReduction> {
    let phi = inertial_phase(cfg, v)?;
    ChannelReduction::from_fn("inertial", harmonics, |m| Complex64::from_polar(1.0, m as f64 * phi))
}

/// Lumped factor `r_m = sum_k w_k exp(i m phi(v_k))`.
///
/// The mean phase is kept in the argument, so the lumped channel shifts the
/// fringe the same way the per-velocity treatment does.
pub fn inertial_reduction(
    cfg: &InterferometerConfig,
    sample: &VelocitySample,
    harmonics: usize,
) -> Result<ChannelReduction> {
    if sample.is_empty() {
        return Err(Error::invalid("velocity sample is empty"));
    }
    let phases = sample
        .iter()
        .map(|(v, w)| Ok((inertial_phase(cfg, v)?, w)))
        .collect::<Result<Vec<_>>>()?;
    ChannelReduction::from_fn("inertial", harmonics, |m| {
        phases
            .iter()
            .map(|&(phi, w)| w * Complex64::from_polar(1.0, m as f64 * phi))
            .sum()
    })
}

/// Independent Gaussian jitter of the three grating positions [m].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VibrationModel {
    pub sigma_x: [f64; 3],
}

impl VibrationModel {
    pub fn new(sigma_x: [f64; 3]) -> Result<Self> {
        if sigma_x.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::config("channels.vibration.sigma_nm", "jitter amplitudes must be >= 0"));
        }
        Ok(Self { sigma_x })
    }

    /// RMS fringe phase `(2 pi/d) sqrt(s1^2 + 4 s2^2 + s3^2)`.
    pub fn phase_rms(&self, d: f64) -> f64 {
        let [a, b, c] = self.sigma_x;
        2.0 * PI / d * (a * a + 4.0 * b * b + c * c).sqrt()
    }
}

/// `r_m = exp(-m^2 sigma_phi^2 / 2)`.
pub fn vibration_reduction(vib: &VibrationModel, d: f64, harmonics: usize) -> Result<ChannelReduction> {
    if !(d > 0.0) {
        return Err(Error::invalid(format!("period must be > 0, got {d}")));
    }
    let s2 = vib.phase_rms(d).powi(2);
    ChannelReduction::from_fn("vibration", harmonics, |m| {
        Complex64::new((-0.5 * (m * m) as f64 * s2).exp(), 0.0)
    })
}

/// Fringe shift from the polarisability force `chi (E.grad)E` acting over one flight `L/v`.
pub fn electric_fringe_shift(cfg: &InterferometerConfig, mol: &MoleculeSpecies, v: f64) -> Result<f64> {
    let t = flight_time(cfg, v)?;
    if cfg.electric_field_term == 0.0 {
        return Ok(0.0);
    }
    let accel = mol.susceptibility()? * cfg.electric_field_term / mol.mass;
    Ok(cfg.k_grating() * accel * t * t)
}

pub fn electric_reduction(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    v: f64,
    harmonics: usize,
) -> Result<ChannelReduction> {
    let phi = electric_fringe_shift(cfg, mol, v)?;
    ChannelReduction::from_fn("electric", harmonics, |m| Complex64::from_polar(1.0, m as f64 * phi))
}

/// Vibrational modes acting as clocks that tick at different rates in the two
/// arms because of the gravitational red shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockModel {
    /// Angular frequencies of the modes [rad/s].
    pub mode_frequencies: Vec<f64>,
    /// Height difference between the arms [m].
    pub height_separation: f64,
    /// Time spent in superposition [s].
    pub evolution_time: f64,
}

impl ClockModel {
    pub fn new(mode_frequencies: Vec<f64>, height_separation: f64, evolution_time: f64) -> Result<Self> {
        if mode_frequencies.is_empty() {
            return Err(Error::config("channels.clock.mode_frequencies_rad_per_s", "need at least one mode"));
        }
        if mode_frequencies.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::config("channels.clock.mode_frequencies_rad_per_s", "frequencies must be > 0"));
        }
        if !height_separation.is_finite() || !(evolution_time >= 0.0) {
            return Err(Error::config(
                "channels.clock",
                "height separation must be finite and evolution time >= 0",
            ));
        }
        Ok(Self {
            mode_frequencies,
            height_separation,
            evolution_time,
        })
    }

    pub fn at_time(&self, evolution_time: f64) -> Self {
        Self {
            evolution_time,
            ..self.clone()
        }
    }

    /// Full-revival period of mode `k` alone [s].
    pub fn revival_period(&self, k: usize) -> f64 {
        2.0 * PI / (self.mode_frequencies[k] * red_shift(self.height_separation).abs())
    }
}

/// Fractional frequency shift `g dh / c^2` between clocks `dh` apart in height.
pub fn red_shift(height_separation: f64) -> f64 {
    G_STANDARD * height_separation / (C * C)
}

/// Visibility multiplier `prod_k |cos(omega_k (g dh / c^2) t / 2)|`.
pub fn clock_dephasing(clock: &ClockModel) -> f64 {
    let eps = red_shift(clock.height_separation);
    clock
        .mode_frequencies
        .iter()
        .map(|w| (w * eps * clock.evolution_time / 2.0).cos().abs())
        .product()
}

/// Same multiplier on every harmonic.
pub fn clock_reduction(clock: &ClockModel, harmonics: usize) -> Result<ChannelReduction> {
    ChannelReduction::uniform("clock", harmonics, clock_dephasing(clock))
}

/// Factor by which the coherence time must change when going from a particle
/// of mass `reference_mass` to one of mass `mass`; it scales as `1/sqrt(M)`.
pub fn coherence_time_ratio(reference_mass: f64, mass: f64) -> Result<f64> {
    if !(reference_mass > 0.0 && mass > 0.0) {
        return Err(Error::invalid("masses must be > 0"));
    }
    Ok((reference_mass / mass).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{AMU, DEBYE, K_B};
    use crate::model::Grating;
    use crate::units::polarizability_from_volume_a3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(g: f64, omega: f64) -> InterferometerConfig {
        let gr = Grating::ideal(991e-9, 0.479).unwrap();
        let mut c = InterferometerConfig::new([gr.clone(), gr.clone(), gr], 0.44).unwrap();
        c.gravity_accel = g;
        c.rotation_rate = omega;
        c
    }

    #[test]
    fn inertial_phase_hand_value() {
        assert_eq!(inertial_phase(&cfg(0.0, 0.0), 100.0).unwrap(), 0.0);
        let phi = inertial_phase(&cfg(9.81, 0.0), 100.0).unwrap();
        let expected = 2.0 * PI / 991e-9 * 9.81 * (0.44f64 / 100.0).powi(2);
        assert!((phi - expected).abs() < 1e-9 * expected);
        assert!((phi - 1204.0).abs() < 1.0);
        assert!(inertial_phase(&cfg(9.81, 0.0), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn inertial_scaling_laws(v in 20.0f64..500.0, g in -10.0f64..10.0, om in -1e-3f64..1e-3) {
            let c = cfg(g, om);
            let grav = gravity_phase(&c, v).unwrap();
            let cor = coriolis_phase(&c, v).unwrap();
            prop_assert!((inertial_phase(&c, v).unwrap() - (grav + cor)).abs() <= 1e-15 * (grav.abs() + cor.abs()));
            prop_assert!((gravity_phase(&c, 2.0 * v).unwrap() - grav / 4.0).abs() <= 1e-14 * grav.abs());
            prop_assert!((coriolis_phase(&c, 2.0 * v).unwrap() - cor / 2.0).abs() <= 1e-14 * cor.abs());
        }

        #[test]
        fn vibration_depends_only_on_phase_variance(a in 0.0f64..100e-9, b in 0.0f64..100e-9, c in 0.0f64..100e-9) {
            let x = vibration_reduction(&VibrationModel::new([a, b, c]).unwrap(), 991e-9, 4).unwrap();
            let y = vibration_reduction(&VibrationModel::new([c, b, a]).unwrap(), 991e-9, 4).unwrap();
            for m in 1..=4 {
                prop_assert!((x.get(m) - y.get(m)).norm() <= 1e-14);
                prop_assert!(x.get(m).norm() <= 1.0);
            }
        }
    }

    #[test]
    fn spread_matches_derivative() {
        let c = cfg(9.81, 0.0);
        let v = 150.0;
        let dv = 1e-4;
        let numeric = (gravity_phase(&c, v - dv).unwrap() - gravity_phase(&c, v + dv).unwrap()) / (2.0 * dv);
        let spread = phase_spread(&c, v, 1.0).unwrap();
        assert!((spread - numeric.abs()).abs() < 1e-6 * spread);
        assert_eq!(phase_spread(&c, v, 0.0).unwrap(), 0.0);
        let cor = cfg(0.0, 7.3e-5);
        let numeric = (coriolis_phase(&cor, v - dv).unwrap() - coriolis_phase(&cor, v + dv).unwrap()) / (2.0 * dv);
        assert!((phase_spread(&cor, v, 1.0).unwrap() - numeric.abs()).abs() < 1e-6 * numeric.abs());
    }

    #[test]
    fn lumped_reduction_limits() {
        let c = cfg(9.81, 0.0);
        let r = inertial_reduction(&c, &VelocitySample::monochromatic(120.0), 3).unwrap();
        for m in 1..=3 {
            assert!((r.get(m).norm() - 1.0).abs() < 1e-12);
        }
        // pick v2 so that the phases differ by exactly pi
        let v1 = 100.0;
        let phi1 = inertial_phase(&c, v1).unwrap();
        let k = 2.0 * PI / 991e-9 * 9.81 * 0.44 * 0.44;
        let v2 = (k / (phi1 + PI)).sqrt();
        let pair = VelocitySample {
            velocities: vec![v1, v2],
            weights: vec![0.5, 0.5],
            seed: 0,
        };
        assert!(inertial_reduction(&c, &pair, 1).unwrap().get(1).norm() < 1e-9);
        assert!(inertial_reduction(&c, &VelocitySample { velocities: vec![], weights: vec![], seed: 0 }, 1).is_err());
    }

    #[test]
    fn lumped_reduction_gaussian_limit() {
        // Gaussian weights in v; phase approximately linear in v over the narrow band.
        let c = cfg(0.0, 1e-2);
        let v0 = 200.0;
        let slope = coriolis_phase(&c, v0).unwrap() / v0;
        for target in [0.05, 0.15, 0.3] {
            let sv = target / slope;
            let n = 2001;
            let mut vs = Vec::new();
            let mut ws = Vec::new();
            for i in 0..n {
                let z = -8.0 + 16.0 * i as f64 / (n - 1) as f64;
                vs.push(v0 + z * sv);
                ws.push((-0.5 * z * z).exp());
            }
            let s: f64 = ws.iter().sum();
            ws.iter_mut().for_each(|w| *w /= s);
            let sample = VelocitySample { velocities: vs, weights: ws, seed: 0 };
            let mean: f64 = sample.iter().map(|(v, w)| w * coriolis_phase(&c, v).unwrap()).sum();
            let rms = sample
                .iter()
                .map(|(v, w)| w * (coriolis_phase(&c, v).unwrap() - mean).powi(2))
                .sum::<f64>()
                .sqrt();
            let r = inertial_reduction(&c, &sample, 1).unwrap().get(1).norm();
            let gauss = (-rms * rms / 2.0).exp();
            assert!((r / gauss - 1.0).abs() < 0.01, "rms {rms}: {r} vs {gauss}");
        }
    }

    #[test]
    fn mode_flags() {
        assert_eq!(InertialMode::from_flags(false, false).unwrap(), InertialMode::Off);
        assert_eq!(InertialMode::from_flags(true, false).unwrap(), InertialMode::PerVelocity);
        assert_eq!(InertialMode::from_flags(false, true).unwrap(), InertialMode::Lumped);
        assert!(matches!(InertialMode::from_flags(true, true), Err(Error::ModeConflict(_))));
    }

    #[test]
    fn vibration_examples() {
        let d = 991e-9;
        assert!(vibration_reduction(&VibrationModel::default(), d, 3).unwrap().is_identity());
        let vib = VibrationModel::new([0.0, d / (2.0 * PI) * 0.5, 0.0]).unwrap();
        assert!((vibration_reduction(&vib, d, 1).unwrap().get(1).re - (-0.5f64).exp()).abs() < 1e-12);
        let outer = VibrationModel::new([1e-9, 0.0, 0.0]).unwrap().phase_rms(d);
        let middle = VibrationModel::new([0.0, 1e-9, 0.0]).unwrap().phase_rms(d);
        assert!((middle * middle / (outer * outer) - 4.0).abs() < 1e-12);
        assert!(VibrationModel::new([-1.0, 0.0, 0.0]).is_err());
    }

    fn polar() -> MoleculeSpecies {
        let mut m = MoleculeSpecies::new(331.0 * AMU, 42).unwrap();
        m.alpha_stat = polarizability_from_volume_a3(30.0);
        m.dipole_sq_mean = 2.7 * 2.7;
        m.internal_temperature = 500.0;
        m
    }

    #[test]
    fn electric_shift() {
        let mut c = cfg(0.0, 0.0);
        let mol = polar();
        assert_eq!(electric_fringe_shift(&c, &mol, 100.0).unwrap(), 0.0);
        c.electric_field_term = 1e12;
        let phi = electric_fringe_shift(&c, &mol, 100.0).unwrap();
        let chi = mol.alpha_stat + 7.29 * DEBYE * DEBYE / (3.0 * K_B * 500.0);
        let expected = 2.0 * PI / 991e-9 * chi * 1e12 / mol.mass * (0.44f64 / 100.0).powi(2);
        assert!((phi / expected - 1.0).abs() < 1e-12);
        // doubling T halves the dipole part
        let mut hot = mol.clone();
        hot.internal_temperature = 1000.0;
        let dip = |m: &MoleculeSpecies| m.susceptibility().unwrap() - m.alpha_stat;
        assert!((dip(&hot) / dip(&mol) - 0.5).abs() < 1e-14);
        let mut cold = mol.clone();
        cold.internal_temperature = 0.0;
        assert!(electric_fringe_shift(&c, &cold, 100.0).is_err());
        let r = electric_reduction(&c, &mol, 100.0, 2).unwrap();
        assert!((r.get(2).arg() - (2.0 * phi).rem_euclid(2.0 * PI)).abs() < 1e-9
            || (r.get(2).arg() - ((2.0 * phi + PI).rem_euclid(2.0 * PI) - PI)).abs() < 1e-9);
    }

    #[test]
    fn clock_single_mode_revival() {
        let clock = ClockModel::new(vec![1e13], 1.0, 0.0).unwrap();
        assert_eq!(clock_dephasing(&clock), 1.0);
        let tp = clock.revival_period(0);
        assert!(clock_dephasing(&clock.at_time(tp / 2.0)) < 1e-9);
        assert!((clock_dephasing(&clock.at_time(tp)) - 1.0).abs() < 1e-9);
        assert!((red_shift(1.0) - 1.09e-16).abs() < 0.005e-16);
        assert!(ClockModel::new(vec![], 1.0, 1.0).is_err());
        assert!(ClockModel::new(vec![-1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn clock_many_modes_suppress_revivals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let freqs: Vec<f64> = (0..50).map(|_| 1e13 * rng.random_range(1.0..3.0)).collect();
        let clock = ClockModel::new(freqs.clone(), 1.0, 0.0).unwrap();
        let slow = (0..50).map(|k| clock.revival_period(k)).fold(0.0, f64::max);
        let mut dropped = false;
        for i in 1..=200_000 {
            let t = 10.0 * slow * i as f64 / 200_000.0;
            let v = clock_dephasing(&clock.at_time(t));
            if v < 0.5 {
                dropped = true;
            }
            if dropped {
                assert!(v < 0.99, "revival to {v} at t = {t}");
            }
        }
        assert!(dropped);
    }

    #[test]
    fn coherence_time_scaling() {
        assert!((coherence_time_ratio(1.0, 4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(coherence_time_ratio(0.0, 4.0).is_err());
    }
}
