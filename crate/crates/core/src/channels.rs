//! The set of enabled physics channels and their combined action on a
//! velocity-averaged fringe pattern.

use crate::beam::VelocitySample;
use crate::decoherence::{
    collision_kinematics, collisional_reduction, thermal_reduction_with, CollisionChannel,
    ThermalChannel, ThermalContext,
};
use crate::error::{Error, Result};
use crate::model::{InterferometerConfig, MoleculeSpecies};
use crate::optics::talbot::VelocityResolvedPattern;
use crate::optics::{ChannelReduction, FringePattern, Truncation};
use crate::phase::{
    clock_reduction, electric_reduction, inertial_phase_reduction, inertial_reduction,
    vibration_reduction, ClockModel, InertialMode, VibrationModel,
};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelSet {
    pub collisional: Option<CollisionChannel>,
    pub thermal: Option<ThermalChannel>,
    pub inertial: InertialMode,
    pub vibration: Option<VibrationModel>,
    pub electric: bool,
    pub clock: Option<ClockModel>,
}

impl ChannelSet {
    pub fn none() -> Self {
        Self::default()
    }

    /// Build what can be shared across velocities (the cooling trajectory).
    pub fn prepare<'a>(
        &'a self,
        cfg: &'a InterferometerConfig,
        mol: &'a MoleculeSpecies,
        sample: &VelocitySample,
        harmonics: usize,
    ) -> Result<PreparedChannels<'a>> {
        let thermal = match &self.thermal {
            Some(ch) => {
                let v_min = sample.min_velocity();
                if !(v_min > 0.0) {
                    return Err(Error::invalid("thermal channel needs all sampled velocities > 0"));
                }
                Some(ThermalContext::new(mol, ch, 2.0 * cfg.separation / v_min)?)
            }
            None => None,
        };
        let mut global = Vec::new();
        if self.inertial == InertialMode::Lumped {
            global.push(inertial_reduction(cfg, sample, harmonics)?);
        }
        if let Some(vib) = &self.vibration {
            global.push(vibration_reduction(vib, cfg.period(), harmonics)?);
        }
        if let Some(clock) = &self.clock {
            global.push(clock_reduction(clock, harmonics)?);
        }
        Ok(PreparedChannels {
            set: self,
            cfg,
            mol,
            harmonics,
            thermal,
            global,
        })
    }
}

/// A [`ChannelSet`] bound to one instrument, molecule and velocity sample.
#[derive(Debug, Clone)]
pub struct PreparedChannels<'a> {
    set: &'a ChannelSet,
    cfg: &'a InterferometerConfig,
    mol: &'a MoleculeSpecies,
    harmonics: usize,
    thermal: Option<ThermalContext>,
    global: Vec<ChannelReduction>,
}

impl PreparedChannels<'_> {
    /// Factors that depend on the molecule's velocity.
    pub fn per_velocity(&self, v: f64) -> Result<Vec<ChannelReduction>> {
        let m = self.harmonics;
        let mut out = Vec::new();
        if let Some(ch) = &self.set.collisional {
            out.push(collisional_reduction(ch, v, m)?.0);
        }
        if let Some(ctx) = &self.thermal {
            out.push(thermal_reduction_with(self.cfg, self.mol, ctx, v, m)?);
        }
        if self.set.inertial == InertialMode::PerVelocity {
            out.push(inertial_phase_reduction(self.cfg, v, m)?);
        }
        if self.set.electric {
            out.push(electric_reduction(self.cfg, self.mol, v, m)?);
        }
        Ok(out)
    }

    /// Factors applied once to the velocity-averaged pattern.
    pub fn global(&self) -> &[ChannelReduction] {
        &self.global
    }

    /// Fraction of molecules that reach the detector at velocity `v`.
    pub fn survival(&self, v: f64) -> Result<f64> {
        match &self.set.collisional {
            Some(ch) => Ok(collision_kinematics(ch, v)?.survival),
            None => Ok(1.0),
        }
    }
}

/// Velocity-averaged pattern together with the averaged count survival.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub pattern: FringePattern,
    pub survival: f64,
}

impl Prediction {
    pub fn visibility(&self) -> f64 {
        self.pattern.visibility()
    }

    pub fn phase(&self) -> f64 {
        self.pattern.phase()
    }
}

/// Apply `channels` to bare per-velocity patterns that were computed earlier.
pub fn predict_resolved(
    resolved: &VelocityResolvedPattern,
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    channels: &ChannelSet,
) -> Result<Prediction> {
    let sample = VelocitySample {
        velocities: resolved.velocities.clone(),
        weights: resolved.weights.clone(),
        seed: 0,
    };
    let prepared = channels.prepare(cfg, mol, &sample, resolved.truncation.harmonics)?;
    let mut pattern = resolved.average(|v| prepared.per_velocity(v))?;
    for r in prepared.global() {
        pattern = pattern.apply(r)?;
    }
    let survival = sample
        .iter()
        .map(|(v, w)| Ok(w * prepared.survival(v)?))
        .sum::<Result<f64>>()?;
    Ok(Prediction { pattern, survival })
}

/// Velocity-averaged pattern of `cfg` with every enabled channel applied.
pub fn predict(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    sample: &VelocitySample,
    channels: &ChannelSet,
    trunc: &Truncation,
) -> Result<Prediction> {
    let resolved = VelocityResolvedPattern::new(cfg, mol, sample, trunc)?;
    predict_resolved(&resolved, cfg, mol, channels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::AMU;
    use crate::decoherence::ThermalChannel;
    use crate::model::{GasSpecies, Grating};
    use crate::optics::velocity_averaged_pattern;

    fn setup() -> (InterferometerConfig, MoleculeSpecies, VelocitySample) {
        let g = Grating::ideal(991e-9, 0.479).unwrap();
        let cfg = InterferometerConfig::new([g.clone(), g.clone(), g], 0.2).unwrap();
        let mut mol = MoleculeSpecies::new(840.0 * AMU, 70).unwrap();
        mol.absorption_cross_section = 1e-26;
        mol.absorption_exponent = 3.0;
        let sample = VelocitySample {
            velocities: vec![95.0, 100.0, 105.0],
            weights: vec![0.25, 0.5, 0.25],
            seed: 0,
        };
        (cfg, mol, sample)
    }

    #[test]
    fn empty_set_matches_plain_average() {
        let (cfg, mol, sample) = setup();
        let trunc = Truncation::visibility();
        let p = predict(&cfg, &mol, &sample, &ChannelSet::none(), &trunc).unwrap();
        let q = velocity_averaged_pattern(&cfg, &mol, &sample, |_| Ok(vec![]), &trunc).unwrap();
        assert_eq!(p.pattern, q);
        assert_eq!(p.survival, 1.0);
    }

    #[test]
    fn trivial_channels_leave_pattern_unchanged() {
        let (cfg, mol, sample) = setup();
        let trunc = Truncation::visibility();
        let gas = GasSpecies::new(28.0 * AMU, 300.0, 2e-17).unwrap();
        let set = ChannelSet {
            collisional: Some(CollisionChannel::new(gas, 0.0, 0.88).unwrap()),
            thermal: Some(ThermalChannel::new(0.0, 64).unwrap()),
            inertial: InertialMode::PerVelocity,
            vibration: Some(VibrationModel::default()),
            electric: true,
            clock: Some(ClockModel::new(vec![1e13], 1.0, 0.0).unwrap()),
        };
        let base = predict(&cfg, &mol, &sample, &ChannelSet::none(), &trunc).unwrap();
        let p = predict(&cfg, &mol, &sample, &set, &trunc).unwrap();
        for m in 0..=4 {
            assert!((p.pattern.c(m) - base.pattern.c(m)).norm() < 1e-15);
        }
        assert_eq!(p.survival, 1.0);
    }

    #[test]
    fn collisions_scale_fringe_and_counts() {
        let (cfg, mol, sample) = setup();
        let trunc = Truncation::visibility();
        let gas = GasSpecies::new(28.0 * AMU, 300.0, 2e-17).unwrap();
        let ch = CollisionChannel::new(gas, 1e-4, 0.88).unwrap();
        let s = collision_kinematics(&ch, 100.0).unwrap().survival;
        let set = ChannelSet {
            collisional: Some(ch),
            ..Default::default()
        };
        let base = predict(&cfg, &mol, &sample, &ChannelSet::none(), &trunc).unwrap();
        let p = predict(&cfg, &mol, &sample, &set, &trunc).unwrap();
        assert!((p.visibility() / base.visibility() - s).abs() < 1e-12);
        assert!((p.survival - s).abs() < 1e-15);
    }

    #[test]
    fn lumped_and_per_velocity_agree_for_single_velocity() {
        let (mut cfg, mol, _) = setup();
        cfg.gravity_accel = 9.81;
        let sample = VelocitySample::monochromatic(100.0);
        let trunc = Truncation::visibility();
        let per = ChannelSet {
            inertial: InertialMode::PerVelocity,
            ..Default::default()
        };
        let lumped = ChannelSet {
            inertial: InertialMode::Lumped,
            ..Default::default()
        };
        let a = predict(&cfg, &mol, &sample, &per, &trunc).unwrap();
        let b = predict(&cfg, &mol, &sample, &lumped, &trunc).unwrap();
        for m in 0..=4 {
            assert!((a.pattern.c(m) - b.pattern.c(m)).norm() < 1e-12);
        }
    }

    #[test]
    fn thermal_reduces_visibility() {
        let (cfg, mol, sample) = setup();
        let trunc = Truncation::visibility();
        let set = ChannelSet {
            thermal: Some(ThermalChannel::new(3000.0, 200).unwrap()),
            ..Default::default()
        };
        let base = predict(&cfg, &mol, &sample, &ChannelSet::none(), &trunc).unwrap();
        let p = predict(&cfg, &mol, &sample, &set, &trunc).unwrap();
        assert!(p.visibility() < base.visibility());
        assert_eq!(p.survival, 1.0);
    }
}
