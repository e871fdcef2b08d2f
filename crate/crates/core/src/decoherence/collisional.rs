//! Residual-gas collisions.
//!
//! Each collision is taken to destroy the fringe for that molecule and, for
//! all but grazing events, to remove it from the detected beam. The molecule
//! either passes undisturbed with probability `exp(-N)` or does not contribute
//! to the fringe at all.

use crate::constants::K_B;
use crate::error::{Error, Result};
use crate::model::GasSpecies;
use crate::optics::ChannelReduction;

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionChannel {
    pub gas: GasSpecies,
    /// Background pressure [Pa].
    pub pressure: f64,
    /// Path length through the gas [m].
    pub path_length: f64,
}

impl CollisionChannel {
    pub fn new(gas: GasSpecies, pressure: f64, path_length: f64) -> Result<Self> {
        if !(pressure >= 0.0) {
            return Err(Error::config("channels.collisional.pressure_mbar", "pressure must be >= 0"));
        }
        if !(path_length > 0.0) {
            return Err(Error::config("channels.collisional.path_length_m", "path length must be > 0"));
        }
        Ok(Self {
            gas,
            pressure,
            path_length,
        })
    }

    pub fn with_pressure(&self, pressure: f64) -> Result<Self> {
        Self::new(self.gas.clone(), pressure, self.path_length)
    }

    /// Pressure `k T / (sigma L)` at which the fringe amplitude drops by `1/e` [Pa].
    pub fn decay_pressure(&self) -> f64 {
        K_B * self.gas.temperature / (self.gas.effective_cross_section * self.path_length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionKinematics {
    /// [1/m^3]
    pub number_density: f64,
    /// [m]; infinite in vacuum.
    pub mean_free_path: f64,
    pub expected_collisions: f64,
    pub survival: f64,
}

pub fn collision_kinematics(ch: &CollisionChannel, v: f64) -> Result<CollisionKinematics> {
    if !(v > 0.0) {
        return Err(Error::invalid(format!("velocity must be > 0, got {v}")));
    }
    let n = ch.pressure / (K_B * ch.gas.temperature);
    if n == 0.0 {
        return Ok(CollisionKinematics {
            number_density: 0.0,
            mean_free_path: f64::INFINITY,
            expected_collisions: 0.0,
            survival: 1.0,
        });
    }
    let mfp = 1.0 / (n * ch.gas.effective_cross_section);
    let expected = ch.path_length / mfp;
    Ok(CollisionKinematics {
        number_density: n,
        mean_free_path: mfp,
        expected_collisions: expected,
        survival: (-expected).exp(),
    })
}

/// Fringe factor `exp(-N)` on every harmonic `m != 0`, plus the count survival.
pub fn collisional_reduction(
    ch: &CollisionChannel,
    v: f64,
    harmonics: usize,
) -> Result<(ChannelReduction, f64)> {
    let k = collision_kinematics(ch, v)?;
    let r = ChannelReduction::uniform("collisional", harmonics, k.survival)?;
    Ok((r, k.survival))
}

/// Effective cross-section that turns visibility `v_low` at `p_low` into
/// `v_high` at `p_high` (pressures in Pa), given gas temperature and path.
pub fn calibrate_cross_section(
    p_low: f64,
    v_low: f64,
    p_high: f64,
    v_high: f64,
    gas_temperature: f64,
    path_length: f64,
) -> Result<f64> {
    if !(p_high > p_low) || !(v_low > v_high) || !(v_high > 0.0) {
        return Err(Error::invalid(
            "calibration needs p_high > p_low and v_low > v_high > 0",
        ));
    }
    Ok(K_B * gas_temperature * (v_low / v_high).ln() / ((p_high - p_low) * path_length))
}
