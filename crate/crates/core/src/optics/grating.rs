//! Transmission functions of single gratings and their Fourier coefficients.
//!
//! Material gratings are opaque bars with straight slits; a molecule crossing
//! a slit picks up the eikonal phase of the `-C3/r^3` attraction to both walls
//! over the wall thickness. Molecules closer than the wall cutoff stick.
//! Optical gratings are pure phase masks `exp(i phi0 cos^2(pi x / d))`.

use super::pattern::GratingCoefficients;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::model::{Grating, GratingKind};
use crate::numerics::{bessel_j_all, sinc, GaussLegendre};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Wall-phase change allowed across one quadrature panel [rad].
const PANEL_PHASE_STEP: f64 = 1.5;
/// Below this wall distance the integral is done by asymptotic endpoint expansion,
/// expressed as the wall phase at which the switch happens [rad].
const ASYMPTOTIC_PHASE: f64 = 1000.0;
/// Relative agreement required between 16- and 32-node panel rules.
const NODE_DOUBLING_TOL: f64 = 1e-8;

fn require_material(g: &Grating) -> Result<()> {
    if g.kind != GratingKind::Material {
        return Err(Error::invalid("operation needs a material grating"));
    }
    Ok(())
}

/// Strength `a` of the eikonal wall phase `a / r^3` [rad m^3].
fn wall_phase_strength(g: &Grating, v: f64) -> f64 {
    g.c3 * g.thickness / (HBAR * v)
}

/// Absorbing margin at each wall. Without an attractive potential there is
/// nothing to stick to and the full geometric slit stays open.
pub fn effective_wall_cutoff(g: &Grating, wall_cutoff: f64) -> f64 {
    if g.c3 > 0.0 && g.thickness > 0.0 {
        wall_cutoff
    } else {
        0.0
    }
}

/// Open fraction after removing the absorbing wall margins.
pub fn effective_open_fraction(g: &Grating, wall_cutoff: f64) -> f64 {
    match g.kind {
        GratingKind::OpticalPhase => 1.0,
        GratingKind::Material => {
            let w = effective_wall_cutoff(g, wall_cutoff);
            ((g.slit_width() - 2.0 * w) / g.period).max(0.0)
        }
    }
}

/// Eikonal phase at relative slit position `xi` (`-1` and `1` are the walls).
pub fn slit_phase_profile(g: &Grating, v: f64, xi: f64) -> Result<f64> {
    require_material(g)?;
    if !(xi.abs() < 1.0) {
        return Err(Error::invalid(format!(
            "slit position must be strictly inside the slit, got xi = {xi}"
        )));
    }
    if !(v > 0.0) {
        return Err(Error::invalid(format!("velocity must be > 0, got {v}")));
    }
    let half = 0.5 * g.slit_width();
    let (r_left, r_right) = (half * (1.0 + xi), half * (1.0 - xi));
    Ok(wall_phase_strength(g, v) * (r_left.powi(-3) + r_right.powi(-3)))
}

/// Amplitude transmission at lateral position `x` relative to a slit centre
/// (or intensity maximum for optical gratings); periodic in `x`.
pub fn transmission(g: &Grating, v: f64, wall_cutoff: f64, x: f64) -> Complex64 {
    let d = g.period;
    let y = x - d * (x / d).round();
    match g.kind {
        GratingKind::OpticalPhase => {
            let c = (PI * y / d).cos();
            Complex64::from_polar(1.0, g.phase_amplitude * c * c)
        }
        GratingKind::Material => {
            let half = 0.5 * g.slit_width();
            let w = effective_wall_cutoff(g, wall_cutoff);
            if y.abs() >= half - w {
                return Complex64::new(0.0, 0.0);
            }
            let a = wall_phase_strength(g, v);
            if a == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            Complex64::from_polar(1.0, a * ((half + y).powi(-3) + (half - y).powi(-3)))
        }
    }
}

/// `|t(x)|^2`, the classical transmission probability.
pub fn intensity_transmission(g: &Grating, wall_cutoff: f64, x: f64) -> f64 {
    match g.kind {
        GratingKind::OpticalPhase => 1.0,
        GratingKind::Material => {
            let d = g.period;
            let y = x - d * (x / d).round();
            let open = 0.5 * g.slit_width() - effective_wall_cutoff(g, wall_cutoff);
            if y.abs() < open {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Fourier coefficient `A_m` of the intensity transmission `|t|^2`.
pub fn intensity_coefficient(g: &Grating, wall_cutoff: f64, m: i64) -> f64 {
    match g.kind {
        GratingKind::OpticalPhase => {
            if m == 0 {
                1.0
            } else {
                0.0
            }
        }
        GratingKind::Material => {
            let f = effective_open_fraction(g, wall_cutoff);
            f * sinc(PI * m as f64 * f)
        }
    }
}

/// Quadrature data for one half of the slit, `x` from the centre towards a wall.
struct HalfSlit {
    a: f64,
    half: f64,
    period: f64,
    /// End of the Gauss-Legendre region.
    x_split: f64,
    /// Absorbing boundary.
    x_end: f64,
    panels: Vec<(f64, f64)>,
}

impl HalfSlit {
    fn new(g: &Grating, v: f64, wall_cutoff: f64, order: usize) -> Self {
        let a = wall_phase_strength(g, v);
        let half = 0.5 * g.slit_width();
        let d = g.period;
        let w = effective_wall_cutoff(g, wall_cutoff);
        let x_end = half - w;
        let k_max = 2.0 * PI * order as f64 / d;
        // Switch to the endpoint expansion once the wall phase is large and its
        // gradient dominates the grating-order phase.
        let r_asym = if a > 0.0 {
            (a / ASYMPTOTIC_PHASE).cbrt().min((3.0 * a / (10.0 * k_max.max(1.0))).powf(0.25))
        } else {
            0.0
        };
        let x_split = if r_asym > w { half - r_asym } else { x_end };
        let max_width = d / (2.0 * (order as f64 + 1.0));

        let mut panels = Vec::new();
        let mut hi = x_split;
        let mut prev = f64::INFINITY;
        while hi > 0.0 {
            let r = half - hi;
            let wall_limit = if a > 0.0 {
                PANEL_PHASE_STEP * r.powi(4) / (3.0 * a)
            } else {
                f64::INFINITY
            };
            let width = wall_limit.min(2.0 * prev).min(max_width);
            let lo = (hi - width).max(0.0);
            panels.push((lo, hi));
            prev = hi - lo;
            hi = lo;
        }
        panels.reverse();
        Self {
            a,
            half,
            period: d,
            x_split,
            x_end,
            panels,
        }
    }

    fn phase(&self, x: f64) -> f64 {
        if self.a == 0.0 {
            return 0.0;
        }
        self.a * ((self.half + x).powi(-3) + (self.half - x).powi(-3))
    }

    fn phase_d1(&self, x: f64) -> f64 {
        3.0 * self.a * ((self.half - x).powi(-4) - (self.half + x).powi(-4))
    }

    fn phase_d2(&self, x: f64) -> f64 {
        12.0 * self.a * ((self.half - x).powi(-5) + (self.half + x).powi(-5))
    }

    /// `int_0^{x_split} exp(i phi) cos(2 pi j x / d) dx` for `j = 0..=order`.
    fn panel_sums(&self, rule: &GaussLegendre, order: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); order + 1];
        let k = 2.0 * PI / self.period;
        for &(lo, hi) in &self.panels {
            for (x, w) in rule.mapped(lo, hi) {
                let t = Complex64::from_polar(w, self.phase(x));
                let step = Complex64::from_polar(1.0, k * x);
                let mut rot = Complex64::new(1.0, 0.0);
                for slot in out.iter_mut() {
                    *slot += t * rot.re;
                    rot *= step;
                }
            }
        }
        out
    }

    /// Two-term endpoint expansion of the same integral over `[x_split, x_end]`.
    fn asymptotic_sums(&self, order: usize) -> Vec<Complex64> {
        if self.x_split >= self.x_end {
            return vec![Complex64::new(0.0, 0.0); order + 1];
        }
        let k = 2.0 * PI / self.period;
        let i = Complex64::i();
        let endpoint = |x: f64, kj: f64| -> Complex64 {
            // cos = (e^{+} + e^{-}) / 2; each exponential is expanded separately.
            let phi = self.phase(x);
            let p1 = self.phase_d1(x);
            let p2 = self.phase_d2(x);
            let mut acc = Complex64::new(0.0, 0.0);
            for s in [1.0, -1.0] {
                let psi = phi + s * kj * x;
                let dpsi = p1 + s * kj;
                let e = Complex64::from_polar(1.0, psi);
                acc += e * (1.0 / (i * dpsi) - p2 / dpsi.powi(3));
            }
            0.5 * acc
        };
        (0..=order)
            .map(|j| {
                let kj = k * j as f64;
                endpoint(self.x_end, kj) - endpoint(self.x_split, kj)
            })
            .collect()
    }
}

/// Fourier coefficients of a material slit grating, `b_j = (1/d) int t(x) e^{-2 pi i j x/d} dx`.
///
/// The slit is centred on `x = 0`, so `b_j = b_{-j}`.
pub fn material_grating_coefficients(
    g: &Grating,
    v: f64,
    order: usize,
    wall_cutoff: f64,
) -> Result<GratingCoefficients> {
    require_material(g)?;
    if order < 8 {
        return Err(Error::Truncation(format!("grating order J={order} must be >= 8")));
    }
    if !(v > 0.0) {
        return Err(Error::invalid(format!("velocity must be > 0, got {v}")));
    }
    let slit = HalfSlit::new(g, v, wall_cutoff, order);
    if slit.x_end <= 0.0 {
        // The wall margins close the slit completely.
        return Ok(GratingCoefficients::from_fn(order, |_| Complex64::new(0.0, 0.0)));
    }
    let tail = slit.asymptotic_sums(order);
    let coarse = slit.panel_sums(&GaussLegendre::new(16), order);
    let fine = slit.panel_sums(&GaussLegendre::new(32), order);

    let scale = 2.0 / g.period;
    let largest = fine
        .iter()
        .zip(&tail)
        .map(|(f, t)| ((f + t) * scale).norm())
        .fold(0.0, f64::max);
    let worst = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| ((c - f) * scale).norm())
        .fold(0.0, f64::max);
    if worst > NODE_DOUBLING_TOL * largest.max(f64::MIN_POSITIVE) {
        return Err(Error::Convergence(format!(
            "slit quadrature changed by {:.2e} (relative) under node doubling",
            worst / largest
        )));
    }
    let half: Vec<Complex64> = fine.iter().zip(&tail).map(|(f, t)| (f + t) * scale).collect();
    Ok(GratingCoefficients::from_fn(order, |j| half[j.unsigned_abs() as usize]))
}

/// Fourier coefficients of the sinusoidal phase grating:
/// `b_j = exp(i phi0 / 2) i^j J_j(phi0 / 2)`.
pub fn optical_grating_coefficients(g: &Grating, order: usize) -> Result<GratingCoefficients> {
    if g.kind != GratingKind::OpticalPhase {
        return Err(Error::invalid("operation needs an optical phase grating"));
    }
    let phi0 = g.phase_amplitude;
    if (order as f64) < phi0 {
        return Err(Error::Truncation(format!(
            "grating order J={order} is below the phase amplitude {phi0:.3}; raise J"
        )));
    }
    let bessel = bessel_j_all(order, 0.5 * phi0);
    let global = Complex64::from_polar(1.0, 0.5 * phi0);
    Ok(GratingCoefficients::from_fn(order, |j| {
        let n = j.unsigned_abs() as usize;
        let jn = if j < 0 && n % 2 == 1 { -bessel[n] } else { bessel[n] };
        global * Complex64::i().powi(j as i32) * jn
    }))
}

/// Dispatch on the grating kind.
pub fn grating_coefficients(
    g: &Grating,
    v: f64,
    order: usize,
    wall_cutoff: f64,
) -> Result<GratingCoefficients> {
    match g.kind {
        GratingKind::Material => material_grating_coefficients(g, v, order, wall_cutoff),
        GratingKind::OpticalPhase => optical_grating_coefficients(g, order),
    }
}
