//! Thermal photon emission by hot molecules and the resulting which-path decoherence.
//!
//! Emission follows a Planck photon spectrum scaled by the absorption
//! cross-section `sigma(omega) = sigma_abs (omega / omega_ref)^p`; `p = 0` is a gray
//! body. The molecule cools while it flies, with its internal energy stored in
//! `3N - 6` Einstein oscillators. A photon emitted while the two arms are `dx`
//! apart multiplies the m-th fringe harmonic by the orientation-averaged factor
//! `sinc(omega m dx / c)`.
//!
//! In the dimensionless frequency `x = hbar omega / k T` every integral over the
//! spectrum reduces to
//!
//! ```text
//! K_s(beta) = int_0^inf x^s / (e^x - 1) (1 - sinc(beta x)) dx
//!           = Gamma(s+1) zeta(s+1) - Gamma(s) / beta * sum_n Im (n - i beta)^(-s)
//! ```
//!
//! which is evaluated with an Euler-Maclaurin tail and tabulated in `beta`.

use crate::constants::{C, HBAR, K_B};
use crate::beam::de_broglie_wavelength;
use crate::error::{Error, Result};
use crate::model::{InterferometerConfig, MoleculeSpecies};
use crate::numerics::{one_minus_sinc, GaussLegendre};
use crate::optics::ChannelReduction;
use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// `sum_{n >= 1} (n - i beta)^(-q)` for `q > 1`.
fn shifted_zeta(q: f64, beta: f64) -> Complex64 {
    const N: usize = 32;
    let z = |n: f64| Complex64::new(n, -beta);
    let mut sum: Complex64 = (1..N).map(|n| z(n as f64).powf(-q)).sum();
    let zn = z(N as f64);
    let g = zn.powf(-q);
    let rise = |k: usize| (0..k).map(|i| q + i as f64).product::<f64>();
    // Euler-Maclaurin: integral, half endpoint, then odd derivatives.
    sum += zn.powf(1.0 - q) / (q - 1.0) + 0.5 * g;
    sum += rise(1) * zn.powf(-q - 1.0) / 12.0;
    sum -= rise(3) * zn.powf(-q - 3.0) / 720.0;
    sum += rise(5) * zn.powf(-q - 5.0) / 30240.0;
    sum -= rise(7) * zn.powf(-q - 7.0) / 1209600.0;
    sum
}

/// `int_0^inf x^q / (e^x - 1) dx = Gamma(q+1) zeta(q+1)`.
pub fn planck_integral(q: f64) -> f64 {
    gamma(q + 1.0) * shifted_zeta(q + 1.0, 0.0).re
}

/// `K_s(beta)` computed directly (no table).
pub fn planck_kernel_direct(s: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    let beta = beta.abs();
    if beta < 0.01 {
        // 1 - sinc(y) = y^2/3! - y^4/5! + y^6/7! - y^8/9!
        let mut acc = 0.0;
        let mut fact = 1.0;
        for k in 1..=4 {
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * beta.powi(2 * k as i32) / fact * planck_integral(s + 2.0 * k as f64);
        }
        return acc;
    }
    planck_integral(s) - gamma(s) / beta * shifted_zeta(s, beta).im
}

/// Tabulated `K_s(beta)` for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct PlanckKernel {
    s: f64,
    total: f64,
    log_beta_min: f64,
    step: f64,
    log_values: Vec<f64>,
}

impl PlanckKernel {
    const BETA_MIN: f64 = 1e-3;
    const BETA_MAX: f64 = 1e5;
    const NODES: usize = 4001;

    pub fn new(s: f64) -> Self {
        let (lo, hi) = (Self::BETA_MIN.ln(), Self::BETA_MAX.ln());
        let step = (hi - lo) / (Self::NODES - 1) as f64;
        let log_values = (0..Self::NODES)
            .map(|i| planck_kernel_direct(s, (lo + step * i as f64).exp()).ln())
            .collect();
        Self {
            s,
            total: planck_integral(s),
            log_beta_min: lo,
            step,
            log_values,
        }
    }

    /// Table for exponent `s`, built once per process and shared afterwards.
    pub fn shared(s: f64) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<Vec<Arc<PlanckKernel>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut tables = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(k) = tables.iter().find(|k| k.s.to_bits() == s.to_bits()) {
            return Arc::clone(k);
        }
        let k = Arc::new(Self::new(s));
        tables.push(Arc::clone(&k));
        k
    }

    /// `K_s(infinity)`: the plain photon-number integral.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn eval(&self, beta: f64) -> f64 {
        let beta = beta.abs();
        if beta < Self::BETA_MIN || beta > Self::BETA_MAX {
            return planck_kernel_direct(self.s, beta);
        }
        // Cubic Lagrange interpolation of ln K in ln beta.
        let u = (beta.ln() - self.log_beta_min) / self.step;
        let i = (u.floor() as isize).clamp(1, Self::NODES as isize - 3) as usize;
        let t = u - i as f64;
        let f = &self.log_values[i - 1..i + 3];
        let l = f[0] * (-t * (t - 1.0) * (t - 2.0) / 6.0)
            + f[1] * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0)
            + f[2] * (-(t + 1.0) * t * (t - 2.0) / 2.0)
            + f[3] * ((t + 1.0) * t * (t - 1.0) / 6.0);
        l.exp()
    }
}

fn reference_frequency(mol: &MoleculeSpecies) -> f64 {
    2.0 * PI * C / mol.absorption_reference_wavelength
}

/// Photon emission rate per unit angular frequency [1/(s rad/s)].
pub fn thermal_spectral_rate(mol: &MoleculeSpecies, t: f64, omega: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("temperature must be > 0, got {t}")));
    }
    if omega <= 0.0 {
        return Ok(0.0);
    }
    let sigma = mol.absorption_cross_section * (omega / reference_frequency(mol)).powf(mol.absorption_exponent);
    let x = HBAR * omega / (K_B * t);
    Ok(sigma * omega * omega / (PI * PI * C * C) / x.exp_m1())
}

/// `R(T)` such that the photon rate density in `x = hbar omega / kT` is `R x^(2+p) / (e^x - 1)`.
fn rate_prefactor(mol: &MoleculeSpecies, t: f64) -> f64 {
    let p = mol.absorption_exponent;
    let w_t = K_B * t / HBAR;
    mol.absorption_cross_section * w_t.powi(3) * (w_t / reference_frequency(mol)).powf(p) / (PI * PI * C * C)
}

/// Total photon emission rate [1/s].
pub fn photon_emission_rate(mol: &MoleculeSpecies, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    rate_prefactor(mol, t) * planck_integral(2.0 + mol.absorption_exponent)
}

/// Radiated power [W].
pub fn emitted_power(mol: &MoleculeSpecies, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    K_B * t * rate_prefactor(mol, t) * planck_integral(3.0 + mol.absorption_exponent)
}

/// Wavelength at the maximum of the emitted power per unit wavelength [m].
pub fn peak_emission_wavelength(mol: &MoleculeSpecies, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("temperature must be > 0, got {t}")));
    }
    // dP/dlambda ~ lambda^-(5+p) / (exp(y) - 1) with y = hc/(lambda k T):
    // stationary where y = (5 + p)(1 - e^-y).
    let n = 5.0 + mol.absorption_exponent;
    let mut y = n;
    for _ in 0..100 {
        let next = n * (1.0 - (-y).exp());
        if (next - y).abs() < 1e-15 * y {
            break;
        }
        y = next;
    }
    Ok(2.0 * PI * HBAR * C / (y * K_B * t))
}

/// Einstein-model heat capacity of the `3N - 6` vibrational modes [J/K].
pub fn heat_capacity(mol: &MoleculeSpecies, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let y = mol.einstein_temperature / t;
    // y^2 e^y / (e^y - 1)^2 written to stay finite for large y
    let e = (-y).exp();
    mol.vibrational_modes() * K_B * y * y * e / ((1.0 - e) * (1.0 - e))
}

/// Temperature history `T(t)` of a cooling molecule on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingTrajectory {
    pub dt: f64,
    pub temperatures: Vec<f64>,
    /// `dT/dt` at each node, used for Hermite interpolation.
    pub rates: Vec<f64>,
}

impl CoolingTrajectory {
    fn constant(t0: f64, duration: f64, steps: usize) -> Self {
        Self {
            dt: duration / steps as f64,
            temperatures: vec![t0; steps + 1],
            rates: vec![0.0; steps + 1],
        }
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.temperatures.len() - 1) as f64
    }

    pub fn initial(&self) -> f64 {
        self.temperatures[0]
    }

    pub fn final_temperature(&self) -> f64 {
        *self.temperatures.last().expect("non-empty trajectory")
    }

    /// Cubic Hermite interpolation; clamps outside the integrated range.
    pub fn temperature_at(&self, t: f64) -> f64 {
        if self.dt == 0.0 || t <= 0.0 {
            return self.temperatures[0];
        }
        let n = self.temperatures.len() - 1;
        let u = t / self.dt;
        if u >= n as f64 {
            return self.temperatures[n];
        }
        let i = u.floor() as usize;
        let s = u - i as f64;
        let (y0, y1) = (self.temperatures[i], self.temperatures[i + 1]);
        let (m0, m1) = (self.rates[i] * self.dt, self.rates[i + 1] * self.dt);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }
}

fn cooling_rate(mol: &MoleculeSpecies, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    -emitted_power(mol, t) / heat_capacity(mol, t)
}

fn rk4(mol: &MoleculeSpecies, t0: f64, duration: f64, steps: usize) -> Result<CoolingTrajectory> {
    let h = duration / steps as f64;
    let mut temps = Vec::with_capacity(steps + 1);
    let mut rates = Vec::with_capacity(steps + 1);
    let mut y = t0;
    temps.push(y);
    rates.push(cooling_rate(mol, y));
    for _ in 0..steps {
        let k1 = cooling_rate(mol, y);
        let k2 = cooling_rate(mol, y + 0.5 * h * k1);
        let k3 = cooling_rate(mol, y + 0.5 * h * k2);
        let k4 = cooling_rate(mol, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(y > 0.0) || !(y + 0.5 * h * k1 > 0.0) || !(y + 0.5 * h * k2 > 0.0) || !(y + h * k3 > 0.0) {
            // An explicit step that overshoots through zero is unstable, not a physical result.
            return Err(Error::Convergence(format!(
                "cooling step of {h:e} s overshoots; raise cooling_steps above {steps}"
            )));
        }
        temps.push(y);
        rates.push(cooling_rate(mol, y));
    }
    Ok(CoolingTrajectory {
        dt: h,
        temperatures: temps,
        rates,
    })
}

/// Integrate `C(T) dT/dt = -P(T)` from `T0` over `duration` with `steps` RK4 steps.
///
/// The run is repeated with twice the steps; a change of the final temperature
/// above 0.1 % is reported as non-convergence.
pub fn radiative_cooling(
    mol: &MoleculeSpecies,
    t0: f64,
    duration: f64,
    steps: usize,
) -> Result<CoolingTrajectory> {
    if steps < 16 {
        return Err(Error::invalid(format!("need at least 16 cooling steps, got {steps}")));
    }
    if !(t0 >= 0.0) || !(duration >= 0.0) {
        return Err(Error::invalid("initial temperature and duration must be >= 0"));
    }
    if t0 == 0.0 || mol.absorption_cross_section == 0.0 || duration == 0.0 {
        return Ok(CoolingTrajectory::constant(t0, duration, steps));
    }
    let coarse = rk4(mol, t0, duration, steps)?;
    let fine = rk4(mol, t0, duration, 2 * steps)?;
    let (a, b) = (coarse.final_temperature(), fine.final_temperature());
    if (a - b).abs() > 1e-3 * b.max(f64::MIN_POSITIVE) {
        return Err(Error::Convergence(format!(
            "cooling trajectory changed by {:.3} % under step halving; raise cooling_steps above {steps}",
            100.0 * (a - b).abs() / b
        )));
    }
    Ok(coarse)
}

/// Arm separation at time `t` after the first grating: rises linearly to
/// `lambda L / d` at the middle grating and closes again at the third.
pub fn which_path_separation(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    v: f64,
    t: f64,
) -> Result<f64> {
    let lambda = de_broglie_wavelength(mol, v)?;
    let transit = cfg.separation / v;
    if !(t >= 0.0 && t <= 2.0 * transit * (1.0 + 1e-12)) {
        return Err(Error::invalid(format!(
            "time {t} s outside the flight [0, {}] s",
            2.0 * transit
        )));
    }
    let dx_max = lambda * cfg.separation / cfg.period();
    let frac = if t <= transit { t / transit } else { (2.0 * transit - t) / transit };
    Ok(dx_max * frac.max(0.0))
}

/// Settings of the emission channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalChannel {
    /// Internal temperature on entering the interferometer [K].
    pub initial_temperature: f64,
    /// RK4 steps over the longest flight time considered.
    pub cooling_steps: usize,
}

impl ThermalChannel {
    pub fn new(initial_temperature: f64, cooling_steps: usize) -> Result<Self> {
        if !(initial_temperature >= 0.0) {
            return Err(Error::config("channels.thermal.T0_K", "initial temperature must be >= 0"));
        }
        Ok(Self {
            initial_temperature,
            cooling_steps,
        })
    }
}

/// Cooling trajectory and spectral kernel shared by all velocities of a run.
#[derive(Debug, Clone)]
pub struct ThermalContext {
    pub trajectory: Arc<CoolingTrajectory>,
    pub kernel: Arc<PlanckKernel>,
}

impl ThermalContext {
    /// Prepare for flight times up to `max_duration`.
    pub fn new(mol: &MoleculeSpecies, ch: &ThermalChannel, max_duration: f64) -> Result<Self> {
        let trajectory = radiative_cooling(mol, ch.initial_temperature, max_duration, ch.cooling_steps)?;
        Ok(Self {
            trajectory: Arc::new(trajectory),
            kernel: PlanckKernel::shared(2.0 + mol.absorption_exponent),
        })
    }

    /// Same trajectory, new kernel table only if the exponent changed.
    pub fn with_trajectory(&self, trajectory: CoolingTrajectory) -> Self {
        Self {
            trajectory: Arc::new(trajectory),
            kernel: Arc::clone(&self.kernel),
        }
    }
}

/// Exponents `E_m = int dt R(T) K(m dx(t) kT / hbar c)` for `m = 1..=harmonics`.
fn decoherence_exponents(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    ctx: &ThermalContext,
    v: f64,
    harmonics: usize,
    panels: usize,
) -> Result<Vec<f64>> {
    let transit = cfg.separation / v;
    let rule = GaussLegendre::new(16);
    let mut e = vec![0.0; harmonics];
    // The separation has a kink at the middle grating; integrate each half separately.
    for (a, b) in [(0.0, transit), (transit, 2.0 * transit)] {
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            for (t, w) in rule.mapped(a + h * p as f64, a + h * (p + 1) as f64) {
                let temp = ctx.trajectory.temperature_at(t);
                if temp <= 0.0 {
                    continue;
                }
                let dx = which_path_separation(cfg, mol, v, t)?;
                let weight = w * rate_prefactor(mol, temp);
                let base = dx * K_B * temp / (HBAR * C);
                for (m, slot) in e.iter_mut().enumerate() {
                    *slot += weight * ctx.kernel.eval(base * (m + 1) as f64);
                }
            }
        }
    }
    Ok(e)
}

/// `r_m = exp(-E_m)` for a molecule flying at `v`, using a prepared context.
pub fn thermal_reduction_with(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    ctx: &ThermalContext,
    v: f64,
    harmonics: usize,
) -> Result<ChannelReduction> {
    if !(v > 0.0) {
        return Err(Error::invalid(format!("velocity must be > 0, got {v}")));
    }
    let flight = 2.0 * cfg.separation / v;
    if flight > ctx.trajectory.duration() * (1.0 + 1e-9) {
        return Err(Error::invalid(format!(
            "flight time {flight:e} s exceeds the prepared cooling trajectory ({:e} s)",
            ctx.trajectory.duration()
        )));
    }
    if ctx.trajectory.initial() == 0.0 || mol.absorption_cross_section == 0.0 {
        return Ok(ChannelReduction::identity("thermal", harmonics));
    }
    let mut panels = 4;
    let mut prev = decoherence_exponents(cfg, mol, ctx, v, harmonics, panels)?;
    loop {
        panels *= 2;
        let next = decoherence_exponents(cfg, mol, ctx, v, harmonics, panels)?;
        let converged = prev
            .iter()
            .zip(&next)
            .all(|(a, b)| (a - b).abs() <= 1e-6 * b.abs() + 1e-13);
        prev = next;
        if converged {
            break;
        }
        if panels > 1024 {
            return Err(Error::Convergence(
                "thermal decoherence time integral did not settle".into(),
            ));
        }
    }
    ChannelReduction::from_fn("thermal", harmonics, |m| Complex64::new((-prev[m - 1]).exp(), 0.0))
}

/// `r_m` for a molecule at `v`, computing the cooling trajectory for this flight only.
pub fn thermal_reduction(
    cfg: &InterferometerConfig,
    mol: &MoleculeSpecies,
    ch: &ThermalChannel,
    v: f64,
    harmonics: usize,
) -> Result<ChannelReduction> {
    if !(v > 0.0) {
        return Err(Error::invalid(format!("velocity must be > 0, got {v}")));
    }
    let ctx = ThermalContext::new(mol, ch, 2.0 * cfg.separation / v)?;
    thermal_reduction_with(cfg, mol, &ctx, v, harmonics)
}

/// Fringe factor after `expected_photons` photons of one wavelength emitted at separation `dx`.
pub fn monochromatic_photon_reduction(expected_photons: f64, wavelength: f64, dx: f64, m: u32) -> f64 {
    let k = 2.0 * PI / wavelength;
    (-expected_photons * one_minus_sinc(k * m as f64 * dx)).exp()
}

/// Spectrum-averaged kernel `<1 - sinc(omega m dx / c)>` over the emitted photons at temperature `t`.
pub fn mean_photon_kernel(mol: &MoleculeSpecies, t: f64, dx: f64, m: u32) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("temperature must be > 0, got {t}")));
    }
    let s = 2.0 + mol.absorption_exponent;
    let beta = m as f64 * dx * K_B * t / (HBAR * C);
    Ok(planck_kernel_direct(s, beta) / planck_integral(s))
}
