//! Domain types describing the particle, the background gas, the gratings,
//! the instrument and the source.
//!
//! Everything here is stored in SI units. Constructors check the type
//! invariants so downstream code can rely on them.

use crate::constants::{DEBYE, K_B};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Everything the physics channels need to know about the interfering particle.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSpecies {
    /// Mass [kg].
    pub mass: f64,
    /// Static polarizability [C m^2/V].
    pub alpha_stat: f64,
    /// Thermal mean of the squared dipole moment, in Debye^2.
    pub dipole_sq_mean: f64,
    pub n_atoms: u32,
    /// Internal (vibrational) temperature [K].
    pub internal_temperature: f64,
    /// Characteristic temperature of the single-frequency heat-capacity model [K].
    pub einstein_temperature: f64,
    /// Gray-body absorption cross-section [m^2] at the reference wavelength.
    pub absorption_cross_section: f64,
    /// Power-law index of the emissivity, `sigma(omega) ~ omega^p`. Zero is a gray body.
    pub absorption_exponent: f64,
    /// Wavelength at which `absorption_cross_section` is quoted [m].
    pub absorption_reference_wavelength: f64,
}

impl MoleculeSpecies {
    /// A molecule with only mass and atom count set; all optional properties zero.
    pub fn new(mass: f64, n_atoms: u32) -> Result<Self> {
        let m = Self {
            mass,
            alpha_stat: 0.0,
            dipole_sq_mean: 0.0,
            n_atoms,
            internal_temperature: 0.0,
            einstein_temperature: 1000.0,
            absorption_cross_section: 0.0,
            absorption_exponent: 0.0,
            absorption_reference_wavelength: 10e-6,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::config("molecule.mass", "mass must be > 0"));
        }
        if !(self.alpha_stat >= 0.0) {
            return Err(Error::config("molecule.alpha", "polarizability must be >= 0"));
        }
        if !(self.dipole_sq_mean >= 0.0) {
            return Err(Error::config("molecule.dipole_sq", "dipole_sq_mean must be >= 0"));
        }
        if self.n_atoms < 2 {
            return Err(Error::config("molecule.n_atoms", "n_atoms must be >= 2"));
        }
        if !(self.internal_temperature >= 0.0) {
            return Err(Error::config(
                "molecule.internal_temperature",
                "internal_temperature must be >= 0",
            ));
        }
        if !(self.einstein_temperature > 0.0) {
            return Err(Error::config(
                "molecule.einstein_temperature",
                "einstein_temperature must be > 0",
            ));
        }
        if !(self.absorption_cross_section >= 0.0) {
            return Err(Error::config(
                "channels.thermal.sigma_abs",
                "absorption cross-section must be >= 0",
            ));
        }
        if !(self.absorption_exponent >= 0.0) || !(self.absorption_reference_wavelength > 0.0) {
            return Err(Error::config(
                "channels.thermal.absorption_exponent",
                "emissivity exponent must be >= 0 and reference wavelength > 0",
            ));
        }
        Ok(())
    }

    /// Number of vibrational modes, `3N - 6` (linear molecules are not special-cased).
    pub fn vibrational_modes(&self) -> f64 {
        (3.0 * self.n_atoms as f64 - 6.0).max(1.0)
    }

    /// Total electric susceptibility `alpha + <d.d>/3kT` [C m^2/V].
    pub fn susceptibility(&self) -> Result<f64> {
        if self.dipole_sq_mean == 0.0 {
            return Ok(self.alpha_stat);
        }
        if !(self.internal_temperature > 0.0) {
            return Err(Error::invalid(
                "dipole contribution to the susceptibility needs internal_temperature > 0",
            ));
        }
        let d2 = self.dipole_sq_mean * DEBYE * DEBYE;
        Ok(self.alpha_stat + d2 / (3.0 * K_B * self.internal_temperature))
    }
}

/// Collision partner in the residual gas.
#[derive(Debug, Clone, PartialEq)]
pub struct GasSpecies {
    pub mass: f64,
    pub temperature: f64,
    /// Effective (decohering) cross-section against the interfering molecule [m^2].
    pub effective_cross_section: f64,
}

impl GasSpecies {
    pub fn new(mass: f64, temperature: f64, effective_cross_section: f64) -> Result<Self> {
        for (name, v) in [
            ("gas.mass", mass),
            ("gas.temperature", temperature),
            ("channels.collisional.sigma_eff", effective_cross_section),
        ] {
            if !(v > 0.0) {
                return Err(Error::config(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(Self {
            mass,
            temperature,
            effective_cross_section,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GratingKind {
    /// Nanofabricated slit array with Casimir-Polder interaction at the walls.
    Material,
    /// Standing light wave acting as a pure phase grating.
    OpticalPhase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grating {
    pub kind: GratingKind,
    /// Period d [m].
    pub period: f64,
    /// Slit width over period (material only).
    pub open_fraction: f64,
    /// Wall thickness along the beam [m] (material only).
    pub thickness: f64,
    /// Van der Waals coefficient C3 [J m^3] (material only).
    pub c3: f64,
    /// Retarded Casimir-Polder coefficient C4 [J m^4]; carried but not used by the
    /// default slit profile.
    pub c4: f64,
    /// Peak phase of an optical grating [rad].
    pub phase_amplitude: f64,
}

impl Grating {
    pub fn material(period: f64, open_fraction: f64, thickness: f64, c3: f64) -> Result<Self> {
        let g = Self {
            kind: GratingKind::Material,
            period,
            open_fraction,
            thickness,
            c3,
            c4: 0.0,
            phase_amplitude: 0.0,
        };
        g.validate("grating")?;
        Ok(g)
    }

    /// Binary slit grating without any wall interaction.
    pub fn ideal(period: f64, open_fraction: f64) -> Result<Self> {
        Self::material(period, open_fraction, 0.0, 0.0)
    }

    pub fn optical(period: f64, phase_amplitude: f64) -> Result<Self> {
        let g = Self {
            kind: GratingKind::OpticalPhase,
            period,
            open_fraction: 1.0,
            thickness: 0.0,
            c3: 0.0,
            c4: 0.0,
            phase_amplitude,
        };
        g.validate("grating")?;
        Ok(g)
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.period > 0.0) {
            return Err(Error::config(format!("{path}.period"), "period must be > 0"));
        }
        if !(self.open_fraction > 0.0 && self.open_fraction <= 1.0) {
            return Err(Error::config(
                format!("{path}.open_fraction"),
                format!("open_fraction out of (0,1] (got {})", self.open_fraction),
            ));
        }
        if !(self.thickness >= 0.0) {
            return Err(Error::config(format!("{path}.thickness"), "thickness must be >= 0"));
        }
        if !(self.c3 >= 0.0) {
            return Err(Error::config(format!("{path}.c3"), "c3 must be >= 0"));
        }
        if !(self.c4 >= 0.0) {
            return Err(Error::config(format!("{path}.c4"), "c4 must be >= 0"));
        }
        if !(self.phase_amplitude >= 0.0) {
            return Err(Error::config(
                format!("{path}.phase_amplitude"),
                "phase_amplitude must be >= 0",
            ));
        }
        Ok(())
    }

    /// Slit width [m].
    pub fn slit_width(&self) -> f64 {
        self.open_fraction * self.period
    }
}

/// Symmetric three-grating near-field interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerConfig {
    pub gratings: [Grating; 3],
    /// Distance G1-G2 = G2-G3 [m].
    pub separation: f64,
    /// Lateral grating positions x1, x2, x3 [m].
    pub grating_offsets: [f64; 3],
    /// Rotation rate about the slit direction [rad/s].
    pub rotation_rate: f64,
    /// Acceleration along the grating vector [m/s^2].
    pub gravity_accel: f64,
    /// `(E.grad)E` along the grating vector [V^2/m^3].
    pub electric_field_term: f64,
    /// Distance from a wall inside which molecules count as absorbed [m].
    pub wall_cutoff: f64,
}

impl InterferometerConfig {
    pub fn new(gratings: [Grating; 3], separation: f64) -> Result<Self> {
        let cfg = Self {
            gratings,
            separation,
            grating_offsets: [0.0; 3],
            rotation_rate: 0.0,
            gravity_accel: 0.0,
            electric_field_term: 0.0,
            wall_cutoff: 1e-9,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation > 0.0) {
            return Err(Error::config("interferometer.separation_mm", "separation must be > 0"));
        }
        for (i, g) in self.gratings.iter().enumerate() {
            g.validate(&format!("interferometer.gratings[{i}]"))?;
        }
        let d = self.gratings[0].period;
        for (i, g) in self.gratings.iter().enumerate().skip(1) {
            if ((g.period - d) / d).abs() > 1e-12 {
                return Err(Error::config(
                    format!("interferometer.gratings[{i}].period_nm"),
                    "all three grating periods must be equal",
                ));
            }
        }
        if !(self.wall_cutoff >= 0.0) {
            return Err(Error::config("interferometer.wall_cutoff_nm", "must be >= 0"));
        }
        for (name, v) in [
            ("rotation_rate_rad_per_s", self.rotation_rate),
            ("gravity_accel_m_per_s2", self.gravity_accel),
            ("electric_field_term_V2_per_m3", self.electric_field_term),
        ] {
            if !v.is_finite() {
                return Err(Error::config(format!("interferometer.{name}"), "must be finite"));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.gratings[0].period
    }

    /// Reciprocal grating vector `2 pi / d`.
    pub fn k_grating(&self) -> f64 {
        2.0 * PI / self.period()
    }

    /// Geometric fringe phase `(x1 - 2 x2 + x3) 2 pi / d`.
    pub fn geometric_phase(&self) -> f64 {
        let [x1, x2, x3] = self.grating_offsets;
        (x1 - 2.0 * x2 + x3) * self.k_grating()
    }

    pub fn with_separation(&self, separation: f64) -> Self {
        Self {
            separation,
            ..self.clone()
        }
    }
}

/// Shifted Maxwell-Boltzmann source.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamModel {
    pub v0: f64,
    /// Longitudinal source temperature [K].
    pub source_temperature: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub collimation_half_angle: f64,
}

impl BeamModel {
    /// Beam with the default window `v0 +- 4 sigma_v` clipped at zero.
    pub fn new(v0: f64, source_temperature: f64, mass: f64) -> Result<Self> {
        if !(source_temperature > 0.0) {
            return Err(Error::config(
                "beam.source_temperature_K",
                "source_temperature must be > 0",
            ));
        }
        let sigma = Self::thermal_width(source_temperature, mass);
        let b = Self {
            v0,
            source_temperature,
            v_min: (v0 - 4.0 * sigma).max(0.0),
            v_max: v0 + 4.0 * sigma,
            collimation_half_angle: 0.0,
        };
        b.validate()?;
        Ok(b)
    }

    /// Beam whose Gaussian factor has width `relative_spread * v0`.
    pub fn with_relative_spread(v0: f64, relative_spread: f64, mass: f64) -> Result<Self> {
        if !(relative_spread > 0.0) || !(v0 > 0.0) {
            return Err(Error::config(
                "beam.velocity_spread_rel",
                "relative spread and v0 must be > 0",
            ));
        }
        let sigma = relative_spread * v0;
        Self::new(v0, mass * sigma * sigma / K_B, mass)
    }

    /// `sqrt(kT/m)`, the width of the Gaussian factor.
    pub fn thermal_width(temperature: f64, mass: f64) -> f64 {
        (K_B * temperature / mass).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.source_temperature > 0.0) {
            return Err(Error::config(
                "beam.source_temperature_K",
                "source_temperature must be > 0",
            ));
        }
        if !(self.v_min >= 0.0 && self.v_min < self.v_max) {
            return Err(Error::config(
                "beam.v_min_m_per_s",
                format!("window needs 0 <= v_min < v_max (got {} .. {})", self.v_min, self.v_max),
            ));
        }
        if !(self.collimation_half_angle >= 0.0) {
            return Err(Error::config(
                "beam.collimation_half_angle_urad",
                "collimation angle must be >= 0",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::polarizability_from_volume_a3;

    #[test]
    fn open_fraction_bound_message() {
        let err = Grating::ideal(991e-9, 1.2).unwrap_err();
        assert!(err.to_string().contains("open_fraction out of (0,1]"));
        assert!(Grating::ideal(991e-9, 1.0).is_ok());
        assert!(Grating::ideal(991e-9, 0.0).is_err());
    }

    #[test]
    fn unequal_periods_rejected() {
        let g = Grating::ideal(1e-6, 0.5).unwrap();
        let g2 = Grating::ideal(1.1e-6, 0.5).unwrap();
        assert!(InterferometerConfig::new([g.clone(), g2, g], 0.4).is_err());
    }

    #[test]
    fn geometric_phase_from_offsets() {
        let g = Grating::ideal(1e-6, 0.5).unwrap();
        let mut cfg = InterferometerConfig::new([g.clone(), g.clone(), g], 0.4).unwrap();
        cfg.grating_offsets = [0.0, 0.25e-6, 0.0];
        assert!((cfg.geometric_phase() + PI).abs() < 1e-12);
    }

    #[test]
    fn molecule_invariants() {
        assert!(MoleculeSpecies::new(1e-24, 1).is_err());
        assert!(MoleculeSpecies::new(0.0, 60).is_err());
        let m = MoleculeSpecies::new(1e-24, 60).unwrap();
        assert_eq!(m.vibrational_modes(), 174.0);
    }

    #[test]
    fn susceptibility_dipole_term_scales_inverse_temperature() {
        let mut m = MoleculeSpecies::new(331.3 * crate::constants::AMU, 41).unwrap();
        m.alpha_stat = polarizability_from_volume_a3(30.0);
        m.dipole_sq_mean = 2.7 * 2.7;
        m.internal_temperature = 500.0;
        let chi500 = m.susceptibility().unwrap() - m.alpha_stat;
        m.internal_temperature = 1000.0;
        let chi1000 = m.susceptibility().unwrap() - m.alpha_stat;
        assert!((chi500 / chi1000 - 2.0).abs() < 1e-12);
        m.internal_temperature = 0.0;
        assert!(m.susceptibility().is_err());
    }

    #[test]
    fn default_window() {
        let mass = 840.0 * crate::constants::AMU;
        let b = BeamModel::with_relative_spread(100.0, 0.1, mass).unwrap();
        assert!((b.v_min - 60.0).abs() < 1e-9);
        assert!((b.v_max - 140.0).abs() < 1e-9);
        let wide = BeamModel::new(0.0, 900.0, mass).unwrap();
        assert_eq!(wide.v_min, 0.0);
    }
}
