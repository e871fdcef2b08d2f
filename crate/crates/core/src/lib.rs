//! Near-field Talbot-Lau matter-wave interferometry.
//!
//! The crate predicts detected fringe patterns of a symmetric three-grating
//! interferometer from the grating transmissions, the beam's velocity
//! distribution and a set of channels that either decohere the molecule
//! (residual gas, thermal photon emission) or smear the fringe phase
//! (inertial forces, vibrations, electric fields, internal clocks).
//!
//! Every fringe pattern is a list of complex Fourier coefficients `c_m` of the
//! signal against the third-grating offset. Channels act multiplicatively on
//! those coefficients through [`ChannelReduction`] values.

pub mod beam;
pub mod channels;
pub mod config;
pub mod constants;
pub mod decoherence;
pub mod error;
pub mod model;
pub mod numerics;
pub mod optics;
pub mod phase;
pub mod scan;
pub mod sweep;
pub mod units;

pub use beam::{
    coherence_length, de_broglie_wavelength, order_observable, sample_velocities,
    transverse_temperature, velocity_pdf, SamplingMode, VelocityDistribution, VelocitySample,
};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use model::{BeamModel, GasSpecies, Grating, GratingKind, InterferometerConfig, MoleculeSpecies};
pub use units::{convert_mass, MassUnit};
pub use optics::{
    fringe_coefficients, fresnel_oracle, talbot_length, velocity_averaged_pattern, ChannelReduction,
    FringePattern, GratingCoefficients, OracleGrid, Truncation,
};
pub use channels::{predict, predict_resolved, ChannelSet, PreparedChannels, Prediction};
pub use config::{load_config, validate_config, SamplingSettings, ScanSettings, Scenario};
pub use decoherence::{
    collision_kinematics, collisional_reduction, heating_to_temperature, radiative_cooling,
    thermal_reduction, thermal_spectral_rate, which_path_separation, CollisionChannel, HeatingCalibration,
    ThermalChannel,
};
pub use phase::{
    clock_dephasing, electric_fringe_shift, inertial_phase, inertial_reduction, phase_spread,
    vibration_reduction, ClockModel, InertialMode, VibrationModel,
};
pub use scan::{fit_counts, fit_fringe, simulate_scan, FringeFit, ScanResult};
pub use sweep::{parse_grid, run_sweep, SweepKind, SweepRow};
