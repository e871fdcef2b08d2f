//! Channels that entangle the molecule with its environment: residual-gas
//! collisions and thermal photon emission.

pub mod collisional;
pub mod heating;
pub mod thermal;

pub use collisional::{
    calibrate_cross_section, collision_kinematics, collisional_reduction, CollisionChannel,
    CollisionKinematics,
};
pub use heating::{heating_to_temperature, HeatingCalibration};
pub use thermal::{
    emitted_power, heat_capacity, mean_photon_kernel, monochromatic_photon_reduction,
    peak_emission_wavelength, photon_emission_rate, planck_integral, radiative_cooling,
    thermal_reduction, thermal_reduction_with, thermal_spectral_rate, which_path_separation,
    CoolingTrajectory, PlanckKernel, ThermalChannel, ThermalContext,
};
