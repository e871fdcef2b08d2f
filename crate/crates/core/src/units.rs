//! The handful of unit conversions accepted by the configuration layer.

use crate::constants::{AMU, DEBYE, EPSILON0, E_CHARGE};
use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassUnit {
    Dalton,
    Kilogram,
}

/// Convert a mass to kilograms.
pub fn convert_mass(value: f64, unit: MassUnit) -> Result<f64> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::invalid(format!("mass must be positive, got {value}")));
    }
    Ok(match unit {
        MassUnit::Dalton => value * AMU,
        MassUnit::Kilogram => value,
    })
}

pub fn kg_to_da(kg: f64) -> f64 {
    kg / AMU
}

/// Polarizability volume in cubic angstrom to SI polarizability [C m^2/V].
pub fn polarizability_from_volume_a3(volume_a3: f64) -> f64 {
    4.0 * PI * EPSILON0 * volume_a3 * 1e-30
}

pub fn debye2_to_si(value: f64) -> f64 {
    value * DEBYE * DEBYE
}

/// meV nm^3 to J m^3.
pub fn mev_nm3_to_si(value: f64) -> f64 {
    value * 1e-3 * E_CHARGE * 1e-27
}

/// meV nm^4 to J m^4.
pub fn mev_nm4_to_si(value: f64) -> f64 {
    value * 1e-3 * E_CHARGE * 1e-36
}

pub fn mbar_to_pa(value: f64) -> f64 {
    value * 100.0
}

pub fn pa_to_mbar(value: f64) -> f64 {
    value / 100.0
}

pub fn nm2_to_m2(value: f64) -> f64 {
    value * 1e-18
}
