//! Mapping from heating-laser power to the molecules' internal temperature.

use crate::error::{Error, Result};

/// Monotone table of `(laser power [W], entry temperature [K])` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatingCalibration {
    table: Vec<(f64, f64)>,
}

impl HeatingCalibration {
    pub fn new(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::config("heating_calibration", "need at least two (power, temperature) points"));
        }
        for (i, w) in table.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) || !(w[1].1 > w[0].1) {
                return Err(Error::config(
                    format!("heating_calibration[{}]", i + 1),
                    "power and temperature must both increase strictly",
                ));
            }
        }
        if table.iter().any(|&(p, t)| !p.is_finite() || !t.is_finite() || p < 0.0 || t < 0.0) {
            return Err(Error::config("heating_calibration", "entries must be finite and >= 0"));
        }
        Ok(Self { table })
    }

    pub fn table(&self) -> &[(f64, f64)] {
        &self.table
    }

    pub fn power_range(&self) -> (f64, f64) {
        (self.table[0].0, self.table[self.table.len() - 1].0)
    }

    /// Inverse lookup: the power that produces entry temperature `t`.
    pub fn power_for_temperature(&self, t: f64) -> Result<f64> {
        let swapped: Vec<_> = self.table.iter().map(|&(p, t)| (t, p)).collect();
        interpolate(&swapped, t, "temperature")
    }
}

impl Default for HeatingCalibration {
    /// Illustrative two-point demo calibration: the unheated beam leaves the
    /// source at 900 K and full power (10.5 W) reaches 3000 K.
    fn default() -> Self {
        Self {
            table: vec![(0.0, 900.0), (10.5, 3000.0)],
        }
    }
}

fn interpolate(table: &[(f64, f64)], x: f64, what: &str) -> Result<f64> {
    let (lo, hi) = (table[0].0, table[table.len() - 1].0);
    if !(x >= lo && x <= hi) {
        return Err(Error::invalid(format!("{what} {x} outside calibrated range [{lo}, {hi}]")));
    }
    let i = table.partition_point(|&(p, _)| p <= x).clamp(1, table.len() - 1);
    let ((x0, y0), (x1, y1)) = (table[i - 1], table[i]);
    Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Piecewise-linear interpolation of the calibration table.
pub fn heating_to_temperature(cal: &HeatingCalibration, power: f64) -> Result<f64> {
    interpolate(&cal.table, power, "laser power")
}
