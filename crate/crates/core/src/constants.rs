//! Physical constants (CODATA 2018 exact or recommended values, SI units).

use std::f64::consts::PI;

/// Planck constant [J s].
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant [J s].
pub const HBAR: f64 = H / (2.0 * PI);
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum [m/s].
pub const C: f64 = 299_792_458.0;
/// Atomic mass constant [kg].
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Vacuum permittivity [F/m].
pub const EPSILON0: f64 = 8.854_187_812_8e-12;
/// One Debye [C m].
pub const DEBYE: f64 = 1e-21 / C;
/// Elementary charge [C], used for meV conversions.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Standard gravity [m/s^2].
pub const G_STANDARD: f64 = 9.806_65;

/// The fixed constant set as a value, for callers that want to pass it around
/// or print it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub h: f64,
    pub hbar: f64,
    pub k_b: f64,
    pub c: f64,
    pub amu: f64,
    pub epsilon0: f64,
    pub debye: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        h: H,
        hbar: HBAR,
        k_b: K_B,
        c: C,
        amu: AMU,
        epsilon0: EPSILON0,
        debye: DEBYE,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codata_values() {
        assert_eq!(PhysicalConstants::default(), PhysicalConstants::SI);
        assert!((HBAR - 1.054_571_817e-34).abs() / HBAR < 1e-9);
        assert!((DEBYE - 3.335_640_95e-30).abs() / DEBYE < 1e-8);
    }
}
