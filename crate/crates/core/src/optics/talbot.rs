//! Analytic near-field propagation for the symmetric three-grating setup.
//!
//! With G1 illuminated incoherently and equal grating distances `L`, the
//! detected signal against the G3 offset has the Fourier coefficients
//!
//! ```text
//! c_m = A1_{-m} A3_{-m} T_m(L / L_T) exp(i m dphi_geo) prod_k r_m^(k)
//! T_m(xi) = sum_j b_j conj(b_{j-2m}) exp(2 pi i m (m - j) xi)
//! ```
//!
//! where `A` are Fourier coefficients of the outer gratings' intensity
//! transmissions and `b` those of the middle grating's amplitude transmission.
//! The fringe period equals the grating period, so only even-index
//! correlations of `b` enter. [`super::oracle`] checks all of this against
//! direct wave propagation.

use super::grating::{grating_coefficients, intensity_coefficient};
use super::pattern::{ChannelReduction, FringePattern, GratingCoefficients, Truncation};
use crate::beam::{de_broglie_wavelength, VelocitySample};
use crate::error::{Error, Result};
use crate::model::{InterferometerConfig, MoleculeSpecies};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Self-imaging distance `d^2 / lambda`.
pub fn talbot_length(d: f64, lambda_db: f64) -> f64 {
    d * d / lambda_db
}

/// `T_n(xi) = sum_j b_j conj(b_{j-2n}) exp(2 pi i n (n - j) xi)`.
///
/// `T_0(xi)` is the transmitted power for every `xi`, and at integer `xi`
/// `T_n` reduces to the `2n`-th Fourier coefficient of `|t|^2`.
pub fn talbot_lau_coefficient(b: &GratingCoefficients, n: i64, xi: f64) -> Complex64 {
    let order = b.order() as i64;
    let lo = (-order).max(2 * n - order);
    let hi = order.min(2 * n + order);
    let nf = n as f64;
    (lo..=hi)
        .map(|j| {
            let phase = 2.0 * PI * nf * ((n - j) as f64) * xi;
            b.get(j) * b.get(j - 2 * n).conj() * Complex64::from_polar(1.0, phase)
        })
        .sum()
}

/// Reduced distance `L / L_T` at velocity `v`.
pub fn reduced_distance(cfg: &InterferometerConfig, mol: &MoleculeSpecies, v: f64) -> Result<f64> {
    let lambda = de_broglie_wavelength(mol, v)?;
    Ok(cfg.separation / talbot_length(cfg.period(), lambda))
}

fn outer_factor(cfg: &InterferometerConfig, m: i64) -> f64 {
    intensity_coefficient(&cfg.gratings[0], cfg.wall_cutoff, -m)
        * intensity_coefficient(&cfg.gratings[2], cfg.wall_cutoff, -m)
}

/// Pattern for a single velocity before any channel is applied. The tail is not checked.
pub fn bare_pattern(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    v: f64,
    trunc: &Truncation,
) -> Result<FringePattern> {
    cfg.validate()?;
    trunc.validate()?;
    let xi = reduced_distance(cfg, mol, v)?;
    let b = grating_coefficients(&cfg.gratings[1], v, trunc.orders, cfg.wall_cutoff)?;
    pattern_from_coefficients(cfg, &b, xi, trunc.harmonics)
}

fn pattern_from_coefficients(
    cfg: &InterferometerConfig,
    b: &GratingCoefficients,
    xi: f64,
    harmonics: usize,
) -> Result<FringePattern> {
    let geo = cfg.geometric_phase();
    let c: Vec<Complex64> = (0..=harmonics as i64)
        .map(|m| {
            outer_factor(cfg, m)
                * talbot_lau_coefficient(b, m, xi)
                * Complex64::from_polar(1.0, m as f64 * geo)
        })
        .collect();
    if !(c[0].re > 0.0) {
        return Err(Error::UnphysicalPattern(
            "no flux reaches the detector (closed gratings)".into(),
        ));
    }
    FringePattern::new(c, cfg.period())
}

/// Detected-signal Fourier coefficients at one velocity with channel factors applied.
pub fn fringe_coefficients(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    v: f64,
    reductions: &[ChannelReduction],
    trunc: &Truncation,
) -> Result<FringePattern> {
    let mut p = bare_pattern(cfg, mol, v, trunc)?;
    for r in reductions {
        p = p.apply(r)?;
    }
    if let Some(tol) = trunc.tail_tolerance {
        p.check_tail(tol)?;
    }
    Ok(p)
}

/// Classical ray-optics counterpart: straight trajectories through the three
/// masks with an isotropic angular distribution, `c_m = A1_{-m} A2_{2m} A3_{-m}`.
/// Independent of wavelength and identical to the wave result whenever `L / L_T`
/// is an integer.
pub fn classical_fringe_coefficients(cfg: &InterferometerConfig, harmonics: usize) -> Result<FringePattern> {
    cfg.validate()?;
    let geo = cfg.geometric_phase();
    let c: Vec<Complex64> = (0..=harmonics as i64)
        .map(|m| {
            outer_factor(cfg, m)
                * intensity_coefficient(&cfg.gratings[1], cfg.wall_cutoff, 2 * m)
                * Complex64::from_polar(1.0, m as f64 * geo)
        })
        .collect();
    FringePattern::new(c, cfg.period())
}

/// Bare per-velocity patterns of a sample, kept so channel factors can be
/// re-applied cheaply (for example along a sweep).
#[derive(Debug, Clone)]
pub struct VelocityResolvedPattern {
    pub velocities: Vec<f64>,
    pub weights: Vec<f64>,
    pub patterns: Vec<FringePattern>,
    pub truncation: Truncation,
}

impl VelocityResolvedPattern {
    pub fn new(
        cfg: &InterferometerConfig,
        mol: &MoleculeSpecies,
        sample: &VelocitySample,
        trunc: &Truncation,
    ) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::invalid("velocity sample is empty"));
        }
        let patterns = sample
            .velocities
            .par_iter()
            .map(|&v| bare_pattern(cfg, mol, v, trunc))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            velocities: sample.velocities.clone(),
            weights: sample.weights.clone(),
            patterns,
            truncation: *trunc,
        })
    }

    /// Average with per-velocity channel factors from `channels(v)`.
    pub fn average<F>(&self, channels: F) -> Result<FringePattern>
    where
        F: Fn(f64) -> Result<Vec<ChannelReduction>> + Sync,
    {
        let reduced = self
            .velocities
            .par_iter()
            .zip(&self.patterns)
            .map(|(&v, p)| {
                let mut p = p.clone();
                for r in channels(v)? {
                    p = p.apply(&r)?;
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        let avg = FringePattern::weighted_sum(self.weights.iter().copied().zip(&reduced))?;
        if let Some(tol) = self.truncation.tail_tolerance {
            avg.check_tail(tol)?;
        }
        Ok(avg)
    }
}

/// `c_m = sum_k w_k c_m(v_k)` with channel factors rebuilt at every velocity.
pub fn velocity_averaged_pattern<F>(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    sample: &VelocitySample,
    channels: F,
    trunc: &Truncation,
) -> Result<FringePattern>
where
    F: Fn(f64) -> Result<Vec<ChannelReduction>> + Sync,
{
    VelocityResolvedPattern::new(cfg, mol, sample, trunc)?.average(channels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::AMU;
    use crate::model::Grating;
    use crate::optics::grating::material_grating_coefficients;
    use proptest::prelude::*;

    const D: f64 = 991e-9;

    fn c70() -> MoleculeSpecies {
        MoleculeSpecies::new(840.0 * AMU, 70).unwrap()
    }

    fn ideal_cfg(f: f64, separation: f64) -> InterferometerConfig {
        let g = Grating::ideal(D, f).unwrap();
        InterferometerConfig::new([g.clone(), g.clone(), g], separation).unwrap()
    }

    #[test]
    fn talbot_length_examples() {
        assert!((talbot_length(991e-9, 4.75e-12) - 0.2067).abs() < 1e-4);
        assert!((talbot_length(266e-9, 53e-15) - 1.335).abs() < 1e-3);
        assert_eq!(talbot_length(1e-6, 1e-12) * 2.0, talbot_length(1e-6, 0.5e-12));
    }

    #[test]
    fn open_gratings_give_no_fringes() {
        let cfg = ideal_cfg(1.0, 0.44);
        let p = fringe_coefficients(&cfg, &c70(), 100.0, &[], &Truncation::new(4, 16)).unwrap();
        assert!(p.mean() > 0.0);
        for m in 1..=4 {
            assert!(p.c(m).norm() < 1e-14);
        }
        assert!(p.visibility() < 1e-14);
    }

    #[test]
    fn middle_grating_quarter_shift_flips_phase() {
        let mut cfg = ideal_cfg(0.479, 0.3);
        let t = Truncation::visibility();
        let p0 = fringe_coefficients(&cfg, &c70(), 100.0, &[], &t).unwrap();
        cfg.grating_offsets = [0.0, D / 4.0, 0.0];
        let p1 = fringe_coefficients(&cfg, &c70(), 100.0, &[], &t).unwrap();
        let dphi = (p1.c(1) / p0.c(1)).arg();
        assert!((dphi.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn integer_distance_equals_classical() {
        let mol = c70();
        // Only the finite order count separates the two at integer distance.
        let t = Truncation::new(4, 2048).unchecked();
        let lambda = de_broglie_wavelength(&mol, 100.0).unwrap();
        for n in 1..=2 {
            let cfg = ideal_cfg(0.479, n as f64 * talbot_length(D, lambda));
            let q = fringe_coefficients(&cfg, &mol, 100.0, &[], &t).unwrap();
            let c = classical_fringe_coefficients(&cfg, t.harmonics).unwrap();
            assert!((q.visibility() - c.visibility()).abs() < 2e-4);
        }
        let cfg = ideal_cfg(0.479, 0.25 * talbot_length(D, lambda));
        let q = fringe_coefficients(&cfg, &mol, 100.0, &[], &t).unwrap();
        let c = classical_fringe_coefficients(&cfg, t.harmonics).unwrap();
        assert!((q.visibility() - c.visibility()).abs() > 0.05);
    }

    #[test]
    fn integer_distance_is_intensity_coefficient() {
        // At xi = 1 the middle grating acts through |t|^2 alone.
        let g = Grating::ideal(D, 0.3).unwrap();
        let b = material_grating_coefficients(&g, 100.0, 2000, 0.0).unwrap();
        for n in 1..4 {
            let t = talbot_lau_coefficient(&b, n, 1.0);
            let a = intensity_coefficient(&g, 0.0, 2 * n);
            assert!((t.re - a).abs() < 5e-4, "n={n}: {t} vs {a}");
        }
    }

    #[test]
    fn antiphase_velocities_cancel() {
        let cfg = ideal_cfg(0.479, 0.3);
        let mol = c70();
        let t = Truncation::visibility();
        let p = fringe_coefficients(&cfg, &mol, 100.0, &[], &t).unwrap();
        // Build a second velocity's channel that shifts the fringe by pi.
        let sample = VelocitySample {
            velocities: vec![100.0, 100.0],
            weights: vec![0.5, 0.5],
            seed: 0,
        };
        let flip = ChannelReduction::from_fn("flip", t.harmonics, |m| {
            Complex64::from_polar(1.0, PI * m as f64)
        })
        .unwrap();
        let bank = VelocityResolvedPattern::new(&cfg, &mol, &sample, &t).unwrap();
        let toggle = std::sync::atomic::AtomicUsize::new(0);
        let avg = bank
            .average(|_| {
                let k = toggle.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                Ok(if k % 2 == 0 { vec![] } else { vec![flip.clone()] })
            })
            .unwrap();
        assert!(avg.c(1).norm() < 1e-15 * p.mean());
    }

    #[test]
    fn single_velocity_average_is_identity() {
        let cfg = ideal_cfg(0.479, 0.3);
        let mol = c70();
        let t = Truncation::visibility();
        let direct = fringe_coefficients(&cfg, &mol, 120.0, &[], &t).unwrap();
        let avg = velocity_averaged_pattern(&cfg, &mol, &VelocitySample::monochromatic(120.0), |_| Ok(vec![]), &t)
            .unwrap();
        assert_eq!(direct, avg);
    }

    #[test]
    fn tail_check_rejects_short_truncation() {
        let cfg = ideal_cfg(0.479, 0.3);
        let err = fringe_coefficients(&cfg, &c70(), 100.0, &[], &Truncation::new(4, 64)).unwrap_err();
        assert!(matches!(err, Error::Truncation(_)));
    }

    proptest! {
        #[test]
        fn zeroth_coefficient_is_power(xi in 0.0f64..5.0, f in 0.05f64..1.0) {
            let b = material_grating_coefficients(&Grating::ideal(D, f).unwrap(), 100.0, 64, 0.0).unwrap();
            let t0 = talbot_lau_coefficient(&b, 0, xi);
            prop_assert!((t0.re - b.power()).abs() < 1e-10);
            prop_assert!(t0.im.abs() < 1e-10);
        }

        #[test]
        // 2|c_1|/c_0 <= 2 sinc^2(pi f), so the bound V <= 1 needs f >= 0.443;
        // narrower outer slits give comb-like signals with V up to 2.
        fn patterns_are_hermitian_and_bounded(f in 0.45f64..1.0, sep in 0.05f64..1.0, v in 60.0f64..300.0) {
            let cfg = ideal_cfg(f, sep);
            let p = fringe_coefficients(&cfg, &c70(), v, &[], &Truncation::visibility()).unwrap();
            for m in 0..=4 {
                prop_assert_eq!(p.c(-m), p.c(m).conj());
            }
            prop_assert!(p.visibility() <= 1.0 + 1e-6);
        }
    }
}
