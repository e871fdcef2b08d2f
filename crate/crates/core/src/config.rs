//! TOML scenario files.
//!
//! Every numeric key carries its unit in the name (`period_nm`,
//! `pressure_mbar`, ...). Unknown keys are rejected so that a typo cannot
//! silently fall back to a default.

use crate::beam::{sample_velocities, SamplingMode, VelocitySample};
use crate::channels::ChannelSet;
use crate::decoherence::{heating_to_temperature, CollisionChannel, HeatingCalibration, ThermalChannel};
use crate::error::{Error, Result};
use crate::model::{BeamModel, GasSpecies, Grating, GratingKind, InterferometerConfig, MoleculeSpecies};
use crate::optics::{OracleGrid, Truncation};
use crate::phase::{ClockModel, InertialMode, VibrationModel};
use crate::units::{
    convert_mass, mbar_to_pa, mev_nm3_to_si, mev_nm4_to_si, nm2_to_m2, polarizability_from_volume_a3,
    MassUnit,
};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    molecule: RawMolecule,
    gas: Option<RawGas>,
    interferometer: RawInterferometer,
    beam: RawBeam,
    #[serde(default)]
    channels: RawChannels,
    heating_calibration: Option<RawHeating>,
    #[serde(default)]
    numerics: RawNumerics,
    #[serde(default)]
    oracle: RawOracle,
    #[serde(default)]
    scan: RawScan,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawMolecule {
    mass_da: Option<f64>,
    mass_kg: Option<f64>,
    n_atoms: u32,
    #[serde(default)]
    alpha_volume_A3: f64,
    #[serde(default)]
    dipole_sq_debye2: f64,
    #[serde(default)]
    internal_temperature_K: f64,
    einstein_temperature_K: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawGas {
    mass_da: f64,
    temperature_K: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawInterferometer {
    separation_mm: f64,
    gratings: Vec<RawGrating>,
    offsets_nm: Option<[f64; 3]>,
    #[serde(default)]
    rotation_rate_rad_per_s: f64,
    #[serde(default)]
    gravity_accel_m_per_s2: f64,
    #[serde(default)]
    electric_field_term_V2_per_m3: f64,
    wall_cutoff_nm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawGratingKind {
    Material,
    Optical,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawGrating {
    kind: RawGratingKind,
    period_nm: f64,
    open_fraction: Option<f64>,
    #[serde(default)]
    thickness_nm: f64,
    c3_meV_nm3: Option<f64>,
    #[serde(default)]
    c4_meV_nm4: f64,
    #[serde(default)]
    phase_amplitude_rad: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawBeam {
    v0_m_per_s: f64,
    source_temperature_K: Option<f64>,
    velocity_spread_rel: Option<f64>,
    v_min_m_per_s: Option<f64>,
    v_max_m_per_s: Option<f64>,
    #[serde(default)]
    collimation_half_angle_urad: f64,
    samples: Option<usize>,
    sampling: Option<RawSampling>,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawSampling {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawChannels {
    collisional: Option<RawCollisional>,
    thermal: Option<RawThermal>,
    vibration: Option<RawVibration>,
    inertial: Option<RawInertial>,
    electric: Option<RawToggle>,
    clock: Option<RawClock>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCollisional {
    #[serde(default = "yes")]
    enabled: bool,
    pressure_mbar: f64,
    sigma_eff_nm2: f64,
    path_length_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawThermal {
    #[serde(default = "yes")]
    enabled: bool,
    T0_K: Option<f64>,
    laser_power_W: Option<f64>,
    sigma_abs_nm2: f64,
    #[serde(default)]
    absorption_exponent: f64,
    reference_wavelength_um: Option<f64>,
    cooling_steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVibration {
    #[serde(default = "yes")]
    enabled: bool,
    sigma_nm: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInertial {
    #[serde(default = "yes")]
    enabled: bool,
    #[serde(default)]
    per_velocity: bool,
    #[serde(default)]
    lumped: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToggle {
    #[serde(default = "yes")]
    enabled: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClock {
    #[serde(default = "yes")]
    enabled: bool,
    mode_frequencies_rad_per_s: Vec<f64>,
    height_separation_m: f64,
    evolution_time_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawHeating {
    points_W_K: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    harmonics: Option<usize>,
    grating_orders: Option<usize>,
    tail_tolerance: Option<f64>,
    check_tail: Option<bool>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    samples_per_period: Option<usize>,
    periods: Option<usize>,
    sources: Option<usize>,
    subsamples: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawScan {
    points: Option<usize>,
    periods: Option<f64>,
    flux_hz: Option<f64>,
    integration_time_s: Option<f64>,
    seed: Option<u64>,
}

/// How the velocity distribution is discretised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSettings {
    pub samples: usize,
    pub mode: SamplingMode,
    pub seed: u64,
}

/// Settings of a simulated third-grating scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub points: usize,
    /// Number of grating periods covered.
    pub periods: f64,
    /// Detected flux without gas losses [counts/s].
    pub flux: f64,
    /// Per point [s].
    pub integration_time: f64,
    pub seed: u64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            points: 50,
            periods: 2.0,
            flux: 200.0,
            integration_time: 1.0,
            seed: 0,
        }
    }
}

/// A validated configuration with all units converted to SI.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub molecule: MoleculeSpecies,
    pub gas: Option<GasSpecies>,
    pub interferometer: InterferometerConfig,
    pub beam: BeamModel,
    pub channels: ChannelSet,
    pub heating: HeatingCalibration,
    pub sampling: SamplingSettings,
    pub truncation: Truncation,
    pub oracle: OracleGrid,
    pub scan: ScanSettings,
}

impl Scenario {
    pub fn velocity_sample(&self) -> Result<VelocitySample> {
        sample_velocities(
            &self.beam,
            &self.molecule,
            self.sampling.samples,
            self.sampling.seed,
            self.sampling.mode,
        )
    }
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be > 0 (got {v})")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be >= 0 (got {v})")))
    }
}

/// Parse and validate a TOML scenario document.
pub fn validate_config(text: &str) -> Result<Scenario> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Parse(e.to_string()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let first = inner.lines().find(|l| !l.trim().is_empty() && !l.contains("TOML parse error")).unwrap_or("");
        let msg = inner
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty())
            .unwrap_or(first)
            .trim()
            .to_string();
        if path == "." || path.is_empty() {
            Error::Parse(msg)
        } else {
            Error::config(path, msg)
        }
    })?;
    build(raw)
}

/// Read and validate a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    validate_config(&text)
}

fn build(raw: RawConfig) -> Result<Scenario> {
    let m = &raw.molecule;
    let mass = match (m.mass_da, m.mass_kg) {
        (Some(da), None) => convert_mass(da, MassUnit::Dalton)
            .map_err(|_| Error::config("molecule.mass_da", format!("must be > 0 (got {da})")))?,
        (None, Some(kg)) => convert_mass(kg, MassUnit::Kilogram)
            .map_err(|_| Error::config("molecule.mass_kg", format!("must be > 0 (got {kg})")))?,
        (None, None) => return Err(Error::config("molecule.mass_da", "missing mass (mass_da or mass_kg)")),
        (Some(_), Some(_)) => {
            return Err(Error::config("molecule.mass_kg", "give only one of mass_da and mass_kg"))
        }
    };
    let mut molecule = MoleculeSpecies::new(mass, m.n_atoms).map_err(|_| {
        Error::config("molecule.n_atoms", format!("n_atoms must be >= 2 (got {})", m.n_atoms))
    })?;
    molecule.alpha_stat = polarizability_from_volume_a3(non_negative("molecule.alpha_volume_A3", m.alpha_volume_A3)?);
    molecule.dipole_sq_mean = non_negative("molecule.dipole_sq_debye2", m.dipole_sq_debye2)?;
    molecule.internal_temperature =
        non_negative("molecule.internal_temperature_K", m.internal_temperature_K)?;
    if let Some(t) = m.einstein_temperature_K {
        molecule.einstein_temperature = positive("molecule.einstein_temperature_K", t)?;
    }

    let heating = match &raw.heating_calibration {
        Some(h) => HeatingCalibration::new(h.points_W_K.iter().map(|p| (p[0], p[1])).collect())
            .map_err(|e| match e {
                Error::Config { message, .. } => Error::config("heating_calibration.points_W_K", message),
                other => other,
            })?,
        None => HeatingCalibration::default(),
    };

    let mut channels = ChannelSet::default();
    if let Some(th) = &raw.channels.thermal {
        molecule.absorption_cross_section =
            nm2_to_m2(non_negative("channels.thermal.sigma_abs_nm2", th.sigma_abs_nm2)?);
        molecule.absorption_exponent = non_negative("channels.thermal.absorption_exponent", th.absorption_exponent)?;
        if let Some(lam) = th.reference_wavelength_um {
            molecule.absorption_reference_wavelength = positive("channels.thermal.reference_wavelength_um", lam)? * 1e-6;
        }
        if th.enabled {
            let t0 = match (th.T0_K, th.laser_power_W) {
                (Some(t), None) => non_negative("channels.thermal.T0_K", t)?,
                (None, Some(p)) => heating_to_temperature(&heating, p)
                    .map_err(|e| Error::config("channels.thermal.laser_power_W", e.to_string()))?,
                (None, None) => {
                    return Err(Error::config("channels.thermal.T0_K", "missing T0_K (or laser_power_W)"))
                }
                (Some(_), Some(_)) => {
                    return Err(Error::config(
                        "channels.thermal.laser_power_W",
                        "give only one of T0_K and laser_power_W",
                    ))
                }
            };
            let steps = th.cooling_steps.unwrap_or(400);
            if steps < 16 {
                return Err(Error::config("channels.thermal.cooling_steps", "must be >= 16"));
            }
            channels.thermal = Some(ThermalChannel::new(t0, steps)?);
        }
    }
    molecule.validate()?;

    let gas = match &raw.gas {
        Some(g) => Some((
            convert_mass(g.mass_da, MassUnit::Dalton)
                .map_err(|_| Error::config("gas.mass_da", format!("must be > 0 (got {})", g.mass_da)))?,
            positive("gas.temperature_K", g.temperature_K)?,
        )),
        None => None,
    };
    let mut gas_species = None;
    if let Some(c) = &raw.channels.collisional {
        let (gm, gt) = gas.ok_or_else(|| Error::config("gas", "collisional channel needs a [gas] table"))?;
        let species = GasSpecies::new(gm, gt, nm2_to_m2(positive("channels.collisional.sigma_eff_nm2", c.sigma_eff_nm2)?))?;
        let pressure = mbar_to_pa(non_negative("channels.collisional.pressure_mbar", c.pressure_mbar)?);
        positive("channels.collisional.path_length_m", c.path_length_m)?;
        if c.enabled {
            channels.collisional = Some(CollisionChannel::new(species.clone(), pressure, c.path_length_m)?);
        }
        gas_species = Some(species);
    }

    let ri = &raw.interferometer;
    if ri.gratings.len() != 3 {
        return Err(Error::config(
            "interferometer.gratings",
            format!("exactly three gratings required (got {})", ri.gratings.len()),
        ));
    }
    let gratings = ri
        .gratings
        .iter()
        .enumerate()
        .map(|(i, g)| grating(i, g))
        .collect::<Result<Vec<_>>>()?;
    let gratings: [Grating; 3] = gratings.try_into().expect("three gratings");
    let separation = positive("interferometer.separation_mm", ri.separation_mm)? * 1e-3;
    let mut interferometer = InterferometerConfig::new(gratings, separation)?;
    if let Some(o) = ri.offsets_nm {
        if o.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("interferometer.offsets_nm", "offsets must be finite"));
        }
        interferometer.grating_offsets = o.map(|x| x * 1e-9);
    }
    interferometer.rotation_rate = ri.rotation_rate_rad_per_s;
    interferometer.gravity_accel = ri.gravity_accel_m_per_s2;
    interferometer.electric_field_term = ri.electric_field_term_V2_per_m3;
    if let Some(w) = ri.wall_cutoff_nm {
        interferometer.wall_cutoff = non_negative("interferometer.wall_cutoff_nm", w)? * 1e-9;
    }
    interferometer.validate()?;

    let rb = &raw.beam;
    let v0 = positive("beam.v0_m_per_s", rb.v0_m_per_s)?;
    let mut beam = match (rb.source_temperature_K, rb.velocity_spread_rel) {
        (Some(t), None) => BeamModel::new(v0, positive("beam.source_temperature_K", t)?, mass)?,
        (None, Some(s)) => BeamModel::with_relative_spread(v0, positive("beam.velocity_spread_rel", s)?, mass)?,
        (None, None) => {
            return Err(Error::config(
                "beam.source_temperature_K",
                "missing source_temperature_K (or velocity_spread_rel)",
            ))
        }
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "beam.velocity_spread_rel",
                "give only one of source_temperature_K and velocity_spread_rel",
            ))
        }
    };
    if let Some(v) = rb.v_min_m_per_s {
        beam.v_min = non_negative("beam.v_min_m_per_s", v)?;
    }
    if let Some(v) = rb.v_max_m_per_s {
        beam.v_max = positive("beam.v_max_m_per_s", v)?;
    }
    let half_angle = non_negative("beam.collimation_half_angle_urad", rb.collimation_half_angle_urad)? * 1e-6;
    beam.collimation_half_angle = half_angle;
    beam.validate()?;
    let samples = rb.samples.unwrap_or(64);
    if samples == 0 {
        return Err(Error::config("beam.samples", "must be >= 1"));
    }
    let sampling = SamplingSettings {
        samples,
        mode: match rb.sampling {
            Some(RawSampling::MonteCarlo) => SamplingMode::MonteCarlo,
            _ => SamplingMode::Quadrature,
        },
        seed: rb.seed,
    };

    if let Some(v) = &raw.channels.vibration {
        let vib = VibrationModel::new(v.sigma_nm.map(|s| s * 1e-9))?;
        if v.enabled {
            channels.vibration = Some(vib);
        }
    }
    if let Some(i) = &raw.channels.inertial {
        let mode = InertialMode::from_flags(i.per_velocity, i.lumped)?;
        if i.enabled {
            channels.inertial = if mode == InertialMode::Off { InertialMode::PerVelocity } else { mode };
        }
    }
    if let Some(e) = &raw.channels.electric {
        channels.electric = e.enabled;
    }
    if let Some(c) = &raw.channels.clock {
        let clock = ClockModel::new(c.mode_frequencies_rad_per_s.clone(), c.height_separation_m, c.evolution_time_s)?;
        if c.enabled {
            channels.clock = Some(clock);
        }
    }

    let defaults = Truncation::default();
    let n = &raw.numerics;
    let truncation = Truncation {
        harmonics: n.harmonics.unwrap_or(defaults.harmonics),
        orders: n.grating_orders.unwrap_or(defaults.orders),
        tail_tolerance: match (n.check_tail, n.tail_tolerance) {
            (Some(false), Some(_)) => {
                return Err(Error::config("numerics.tail_tolerance", "set without check_tail"))
            }
            (Some(false), None) => None,
            (_, Some(t)) => Some(positive("numerics.tail_tolerance", t)?),
            (_, None) => defaults.tail_tolerance,
        },
    };
    truncation
        .validate()
        .map_err(|e| Error::config("numerics.grating_orders", e.to_string()))?;

    let og = OracleGrid::default();
    let oracle = OracleGrid {
        samples_per_period: raw.oracle.samples_per_period.unwrap_or(og.samples_per_period),
        n_periods: raw.oracle.periods.unwrap_or(og.n_periods),
        n_sources: raw.oracle.sources.unwrap_or(og.n_sources),
        subsamples: raw.oracle.subsamples.unwrap_or(og.subsamples),
    };
    oracle.validate().map_err(|e| Error::config("oracle", e.to_string()))?;

    let sd = ScanSettings::default();
    let s = &raw.scan;
    let scan = ScanSettings {
        points: s.points.unwrap_or(sd.points),
        periods: positive("scan.periods", s.periods.unwrap_or(sd.periods))?,
        flux: positive("scan.flux_hz", s.flux_hz.unwrap_or(sd.flux))?,
        integration_time: positive("scan.integration_time_s", s.integration_time_s.unwrap_or(sd.integration_time))?,
        seed: s.seed.unwrap_or(sd.seed),
    };
    if scan.points < 8 {
        return Err(Error::config("scan.points", "must be >= 8"));
    }

    Ok(Scenario {
        molecule,
        gas: gas_species,
        interferometer,
        beam,
        channels,
        heating,
        sampling,
        truncation,
        oracle,
        scan,
    })
}

fn grating(i: usize, g: &RawGrating) -> Result<Grating> {
    let path = format!("interferometer.gratings[{i}]");
    let period = positive(&format!("{path}.period_nm"), g.period_nm)? * 1e-9;
    let out = match g.kind {
        RawGratingKind::Material => {
            let f = g
                .open_fraction
                .ok_or_else(|| Error::config(format!("{path}.open_fraction"), "missing open_fraction"))?;
            let c3 = g.c3_meV_nm3.ok_or_else(|| {
                Error::config(format!("{path}.c3_meV_nm3"), "missing c3_meV_nm3 (use 0 for an ideal grating)")
            })?;
            Grating {
                kind: GratingKind::Material,
                period,
                open_fraction: f,
                thickness: g.thickness_nm * 1e-9,
                c3: mev_nm3_to_si(c3),
                c4: mev_nm4_to_si(g.c4_meV_nm4),
                phase_amplitude: 0.0,
            }
        }
        RawGratingKind::Optical => {
            if g.open_fraction.is_some() || g.c3_meV_nm3.is_some() {
                return Err(Error::config(
                    path,
                    "optical gratings take only period_nm and phase_amplitude_rad",
                ));
            }
            Grating {
                kind: GratingKind::OpticalPhase,
                period,
                open_fraction: 1.0,
                thickness: 0.0,
                c3: 0.0,
                c4: 0.0,
                phase_amplitude: g.phase_amplitude_rad,
            }
        }
    };
    out.validate(&path).map_err(|e| match e {
        Error::Config { path, message } => {
            let key = match path.rsplit('.').next() {
                Some("period") => "period_nm",
                Some("thickness") => "thickness_nm",
                Some("c3") => "c3_meV_nm3",
                Some("c4") => "c4_meV_nm4",
                Some("phase_amplitude") => "phase_amplitude_rad",
                Some(other) => other,
                None => "",
            };
            let base = path.rsplit_once('.').map(|(b, _)| b).unwrap_or(&path);
            Error::config(format!("{base}.{key}"), message)
        }
        other => other,
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{AMU, EPSILON0};
    use std::f64::consts::PI;

    pub(crate) const MINIMAL: &str = r#"
[molecule]
mass_da = 840.0
n_atoms = 70

[interferometer]
separation_mm = 440.0

[[interferometer.gratings]]
kind = "material"
period_nm = 991.0
open_fraction = 0.479
c3_meV_nm3 = 0.0

[[interferometer.gratings]]
kind = "material"
period_nm = 991.0
open_fraction = 0.479
c3_meV_nm3 = 0.0

[[interferometer.gratings]]
kind = "material"
period_nm = 991.0
open_fraction = 0.479
c3_meV_nm3 = 0.0

[beam]
v0_m_per_s = 100.0
velocity_spread_rel = 0.1
"#;

    fn with(extra: &str) -> String {
        format!("{MINIMAL}\n{extra}")
    }

    #[test]
    fn minimal_document() {
        let s = validate_config(MINIMAL).unwrap();
        assert!((s.molecule.mass - 1.3949e-24).abs() < 1e-28);
        assert!((s.molecule.mass - 840.0 * AMU).abs() == 0.0);
        assert_eq!(s.beam.v0, 100.0);
        assert_eq!(s.channels, ChannelSet::default());
        assert_eq!(s.interferometer.separation, 0.44);
        assert!((s.interferometer.period() - 991e-9).abs() < 1e-20);
        assert_eq!(s.sampling.samples, 64);
        assert_eq!(s.truncation, Truncation::default());
    }

    #[test]
    fn polarizability_volume_converted() {
        let text = MINIMAL.replace("n_atoms = 70", "n_atoms = 70\nalpha_volume_A3 = 89.0");
        let s = validate_config(&text).unwrap();
        let expected = 4.0 * PI * EPSILON0 * 89e-30;
        assert!((s.molecule.alpha_stat / expected - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bound_violations_report_key_path() {
        let text = MINIMAL.replacen("open_fraction = 0.479", "open_fraction = 1.2", 1);
        let err = validate_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("interferometer.gratings[0].open_fraction"), "{msg}");
        assert!(msg.contains("open_fraction out of (0,1]"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("n_atoms = 70", "n_atoms = 70\nmass_dalton = 3.0");
        let err = validate_config(&text).unwrap_err();
        assert!(err.to_string().contains("mass_dalton"), "{err}");
        let err = validate_config(&with("[channels.thermall]\nenabled = true")).unwrap_err();
        assert!(err.to_string().contains("thermall"), "{err}");
    }

    #[test]
    fn missing_keys_rejected() {
        let text = MINIMAL.replace("n_atoms = 70\n", "");
        let err = validate_config(&text).unwrap_err();
        assert!(err.to_string().contains("n_atoms"), "{err}");
        let text = MINIMAL.replace("velocity_spread_rel = 0.1\n", "");
        assert!(validate_config(&text).unwrap_err().to_string().contains("beam.source_temperature_K"));
        let text = MINIMAL.replacen("c3_meV_nm3 = 0.0\n", "", 1);
        assert!(validate_config(&text).unwrap_err().to_string().contains("c3_meV_nm3"));
    }

    #[test]
    fn channels_parsed() {
        let text = with(
            r#"
[gas]
mass_da = 28.0
temperature_K = 300.0

[channels.collisional]
pressure_mbar = 3e-8
sigma_eff_nm2 = 20.0
path_length_m = 0.88

[channels.thermal]
laser_power_W = 3.0
sigma_abs_nm2 = 1e-8
absorption_exponent = 3.0

[channels.vibration]
sigma_nm = [1.0, 2.0, 3.0]

[channels.inertial]
lumped = true

[channels.electric]
enabled = false

[channels.clock]
mode_frequencies_rad_per_s = [1e13, 2e13]
height_separation_m = 1.0
evolution_time_s = 0.01
"#,
        );
        let s = validate_config(&text).unwrap();
        let c = s.channels.collisional.as_ref().unwrap();
        assert!((c.pressure - 3e-6).abs() < 1e-20);
        assert!((c.gas.effective_cross_section - 2e-17).abs() < 1e-30);
        assert!((s.channels.thermal.as_ref().unwrap().initial_temperature - 1500.0).abs() < 1e-9);
        assert!((s.molecule.absorption_cross_section - 1e-26).abs() < 1e-40);
        assert_eq!(s.channels.inertial, InertialMode::Lumped);
        assert!(!s.channels.electric);
        for (a, b) in s.channels.vibration.unwrap().sigma_x.iter().zip([1e-9, 2e-9, 3e-9]) {
            assert!((a - b).abs() < 1e-24);
        }
        assert_eq!(s.channels.clock.as_ref().unwrap().mode_frequencies.len(), 2);
    }

    #[test]
    fn inertial_double_counting_rejected() {
        let err = validate_config(&with("[channels.inertial]\nper_velocity = true\nlumped = true")).unwrap_err();
        assert!(matches!(err, Error::ModeConflict(_)));
    }

    #[test]
    fn collisional_needs_gas() {
        let err = validate_config(&with(
            "[channels.collisional]\npressure_mbar = 1e-7\nsigma_eff_nm2 = 20.0\npath_length_m = 0.88",
        ))
        .unwrap_err();
        assert!(err.to_string().starts_with("gas"), "{err}");
    }

    #[test]
    fn unequal_periods_rejected() {
        let text = MINIMAL.replacen("period_nm = 991.0", "period_nm = 990.0", 1);
        assert!(validate_config(&text).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(validate_config(MINIMAL).unwrap(), validate_config(MINIMAL).unwrap());
    }

    #[test]
    fn heating_power_out_of_range() {
        let err = validate_config(&with("[channels.thermal]\nlaser_power_W = 12.0\nsigma_abs_nm2 = 1e-8")).unwrap_err();
        assert!(err.to_string().contains("laser_power_W"));
    }
}
