//! Grating transmission, analytic Talbot-Lau propagation and the brute-force
//! wave-propagation oracle used to validate it.

pub mod grating;
pub mod oracle;
pub mod pattern;
pub mod talbot;

pub use grating::{
    grating_coefficients, intensity_coefficient, material_grating_coefficients,
    optical_grating_coefficients, slit_phase_profile, transmission,
};
pub use oracle::{fresnel_oracle, fresnel_oracle_averaged, oracle_pattern, OracleGrid};
pub use pattern::{ChannelReduction, FringePattern, GratingCoefficients, Truncation};
pub use talbot::{
    bare_pattern, classical_fringe_coefficients, fringe_coefficients, reduced_distance,
    talbot_lau_coefficient, talbot_length, velocity_averaged_pattern, VelocityResolvedPattern,
};
