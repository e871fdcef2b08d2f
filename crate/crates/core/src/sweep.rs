//! Noiseless model curves over one scanned parameter.

use crate::beam::{sample_velocities, VelocitySample};
use crate::channels::{predict, predict_resolved, ChannelSet};
use crate::config::Scenario;
use crate::decoherence::{heating_to_temperature, ThermalChannel};
use crate::error::{Error, Result};
use crate::model::BeamModel;
use crate::numerics::unwrap_phase;
use crate::optics::talbot::VelocityResolvedPattern;
use crate::phase::InertialMode;
use crate::units::mbar_to_pa;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Background pressure [mbar].
    Pressure,
    /// Heating-laser power [W], mapped through the heating calibration.
    Heating,
    /// Single molecular velocity [m/s]; the fringe phase shows the inertial shift.
    CoriolisMap,
    /// Relative width `dv/v0` of the velocity distribution.
    VelocitySpread,
}

impl SweepKind {
    /// CSV header name of the swept column.
    pub fn column(&self) -> &'static str {
        match self {
            SweepKind::Pressure => "pressure_mbar",
            SweepKind::Heating => "laser_power_W",
            SweepKind::CoriolisMap => "velocity_m_per_s",
            SweepKind::VelocitySpread => "velocity_spread_rel",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Pressure => "pressure",
            SweepKind::Heating => "heating",
            SweepKind::CoriolisMap => "coriolis_map",
            SweepKind::VelocitySpread => "velocity_spread",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pressure" => Ok(SweepKind::Pressure),
            "heating" => Ok(SweepKind::Heating),
            "coriolis_map" | "coriolis-map" => Ok(SweepKind::CoriolisMap),
            "velocity_spread" | "velocity-spread" => Ok(SweepKind::VelocitySpread),
            other => Err(Error::invalid(format!(
                "unknown sweep kind '{other}' (expected pressure, heating, coriolis_map or velocity_spread)"
            ))),
        }
    }
}

/// One row of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub visibility: f64,
    /// `arg c_1` [rad]; unwrapped along the grid for the Coriolis map.
    pub phase: f64,
    /// Expected detected rate [counts/s].
    pub rate: f64,
}

/// Evaluate the model at every grid value, in grid order.
pub fn run_sweep(kind: SweepKind, scenario: &Scenario, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("sweep grid contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("sweep grid must be sorted in ascending order"));
    }
    let cfg = &scenario.interferometer;
    let mol = &scenario.molecule;
    let trunc = &scenario.truncation;
    let flux = scenario.scan.flux;
    match kind {
        SweepKind::Pressure => {
            let base = scenario.channels.collisional.as_ref().ok_or_else(|| {
                Error::config("channels.collisional", "pressure sweep needs a collisional channel")
            })?;
            if grid[0] < 0.0 {
                return Err(Error::invalid("pressures must be >= 0"));
            }
            let sample = scenario.velocity_sample()?;
            let resolved = VelocityResolvedPattern::new(cfg, mol, &sample, trunc)?;
            grid.par_iter()
                .map(|&p| {
                    let channels = ChannelSet {
                        collisional: Some(base.with_pressure(mbar_to_pa(p))?),
                        ..scenario.channels.clone()
                    };
                    let pred = predict_resolved(&resolved, cfg, mol, &channels)?;
                    Ok(row(p, pred.visibility(), pred.phase(), flux * pred.survival))
                })
                .collect()
        }
        SweepKind::Heating => {
            let steps = scenario.channels.thermal.as_ref().map_or(400, |t| t.cooling_steps);
            let sample = scenario.velocity_sample()?;
            let resolved = VelocityResolvedPattern::new(cfg, mol, &sample, trunc)?;
            grid.par_iter()
                .map(|&power| {
                    let t0 = heating_to_temperature(&scenario.heating, power)?;
                    let channels = ChannelSet {
                        thermal: Some(ThermalChannel::new(t0, steps)?),
                        ..scenario.channels.clone()
                    };
                    let pred = predict_resolved(&resolved, cfg, mol, &channels)?;
                    Ok(row(power, pred.visibility(), pred.phase(), flux * pred.survival))
                })
                .collect()
        }
        SweepKind::CoriolisMap => {
            if grid[0] <= 0.0 {
                return Err(Error::invalid("velocities must be > 0"));
            }
            let channels = ChannelSet {
                inertial: InertialMode::PerVelocity,
                ..scenario.channels.clone()
            };
            let mut rows = grid
                .par_iter()
                .map(|&v| {
                    let pred = predict(cfg, mol, &VelocitySample::monochromatic(v), &channels, trunc)?;
                    Ok(row(v, pred.visibility(), pred.phase(), flux * pred.survival))
                })
                .collect::<Result<Vec<_>>>()?;
            // The bare Talbot-Lau coefficient may change sign between velocities;
            // unwrapping twice the phase removes those pi jumps.
            let doubled: Vec<f64> = rows.iter().map(|r| 2.0 * r.phase).collect();
            for (r, p) in rows.iter_mut().zip(unwrap_phase(&doubled)) {
                r.phase = p / 2.0;
            }
            Ok(rows)
        }
        SweepKind::VelocitySpread => {
            if grid[0] <= 0.0 {
                return Err(Error::invalid("relative spreads must be > 0"));
            }
            grid.par_iter()
                .map(|&s| {
                    let beam = BeamModel {
                        collimation_half_angle: scenario.beam.collimation_half_angle,
                        ..BeamModel::with_relative_spread(scenario.beam.v0, s, mol.mass)?
                    };
                    let sample = sample_velocities(
                        &beam,
                        mol,
                        scenario.sampling.samples,
                        scenario.sampling.seed,
                        scenario.sampling.mode,
                    )?;
                    let pred = predict(cfg, mol, &sample, &scenario.channels, trunc)?;
                    Ok(row(s, pred.visibility(), pred.phase(), flux * pred.survival))
                })
                .collect()
        }
    }
}

fn row(value: f64, visibility: f64, phase: f64, rate: f64) -> SweepRow {
    SweepRow {
        value,
        visibility,
        phase,
        rate,
    }
}

/// Parse `start:stop:count` into `count` evenly spaced values (inclusive).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::invalid(format!("grid '{spec}' is not start:stop:count")));
    }
    let start: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad grid start '{}'", parts[0])))?;
    let stop: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad grid stop '{}'", parts[1])))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad grid count '{}'", parts[2])))?;
    if count == 0 {
        return Err(Error::invalid("grid count must be >= 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok(crate::numerics::linspace(start, stop, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;

    fn scenario(extra: &str) -> Scenario {
        scenario_with(extra, 0.0)
    }

    fn scenario_with(extra: &str, rotation: f64) -> Scenario {
        let text = format!(
            r#"
[molecule]
mass_da = 840.0
n_atoms = 70

[interferometer]
separation_mm = 200.0
rotation_rate_rad_per_s = {rotation}

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
velocity_spread_rel = 0.05
samples = 16

[numerics]
harmonics = 4
grating_orders = 64
check_tail = false
{extra}
"#
        );
        validate_config(&text).unwrap()
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:2e-6:25").unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 0.0);
        assert!((g[24] - 2e-6).abs() < 1e-21);
        assert_eq!(parse_grid("3:4:1").unwrap(), vec![3.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:x").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn kinds_round_trip() {
        for k in [SweepKind::Pressure, SweepKind::Heating, SweepKind::CoriolisMap, SweepKind::VelocitySpread] {
            assert_eq!(k.name().parse::<SweepKind>().unwrap(), k);
        }
        assert!("bogus".parse::<SweepKind>().is_err());
    }

    #[test]
    fn pressure_sweep_is_log_linear() {
        let s = scenario(
            "[gas]\nmass_da = 28.0\ntemperature_K = 300.0\n[channels.collisional]\npressure_mbar = 0.0\nsigma_eff_nm2 = 20.0\npath_length_m = 0.88",
        );
        let grid = parse_grid("0:2e-6:9").unwrap();
        let rows = run_sweep(SweepKind::Pressure, &s, &grid).unwrap();
        let ch = s.channels.collisional.as_ref().unwrap();
        let slope = -1.0 / ch.decay_pressure() * 100.0; // per mbar
        let v0 = rows[0].visibility.ln();
        for r in &rows {
            assert!((r.visibility.ln() - (v0 + slope * r.value)).abs() < 1e-10);
        }
        assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), grid);
        // rows are bit-reproducible
        assert_eq!(rows, run_sweep(SweepKind::Pressure, &s, &grid).unwrap());
    }

    #[test]
    fn pressure_sweep_requires_channel() {
        let s = scenario("");
        assert!(run_sweep(SweepKind::Pressure, &s, &[0.0, 1e-7]).is_err());
    }

    #[test]
    fn grid_must_be_sorted() {
        let s = scenario("");
        assert!(run_sweep(SweepKind::VelocitySpread, &s, &[0.1, 0.05]).is_err());
        assert!(run_sweep(SweepKind::VelocitySpread, &s, &[]).is_err());
    }

    #[test]
    fn coriolis_phase_follows_inverse_velocity() {
        let grid = parse_grid("80:120:41").unwrap();
        let still = run_sweep(SweepKind::CoriolisMap, &scenario(""), &grid).unwrap();
        let turning = run_sweep(SweepKind::CoriolisMap, &scenario_with("", 1e-3), &grid).unwrap();
        let k = 2.0 * std::f64::consts::PI / 991e-9 * 2.0 * 1e-3 * 0.2 * 0.2;
        let offset = turning[0].phase - still[0].phase - k / grid[0];
        for (a, b) in turning.iter().zip(&still) {
            let shift = a.phase - b.phase - offset;
            assert!((shift - k / a.value).abs() < 1e-9, "v = {}", a.value);
            assert!((a.visibility - b.visibility).abs() < 1e-12);
        }
    }

    #[test]
    fn narrow_spread_approaches_monochromatic() {
        let s = scenario("");
        let rows = run_sweep(SweepKind::VelocitySpread, &s, &[1e-5, 0.1]).unwrap();
        let mono = run_sweep(SweepKind::CoriolisMap, &s, &[100.0]).unwrap();
        assert!((rows[0].visibility - mono[0].visibility).abs() < 1e-4);
        assert!((rows[1].visibility - mono[0].visibility).abs() > 1e-3);
    }

    #[test]
    fn heating_sweep_monotone() {
        let s = scenario("[channels.thermal]\nenabled = false\nsigma_abs_nm2 = 1e-8\nabsorption_exponent = 3.0\ncooling_steps = 64");
        let rows = run_sweep(SweepKind::Heating, &s, &[0.0, 3.0, 6.0, 10.5]).unwrap();
        assert!(rows.windows(2).all(|w| w[1].visibility <= w[0].visibility));
        assert!(run_sweep(SweepKind::Heating, &s, &[0.0, 11.0]).is_err());
    }
}
