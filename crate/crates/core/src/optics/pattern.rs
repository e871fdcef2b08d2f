use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Amplitude-transmission Fourier coefficients `b_j`, `j = -J..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct GratingCoefficients {
    coeffs: Vec<Complex64>,
    order: usize,
}

impl GratingCoefficients {
    /// Build from a dense slice ordered `b_{-J}, ..., b_J`.
    pub fn from_dense(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::invalid("coefficient list must have odd length 2J+1"));
        }
        let order = coeffs.len() / 2;
        Ok(Self { coeffs, order })
    }

    /// Build from a function of the order.
    pub fn from_fn(order: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let j = order as i64;
        Self {
            coeffs: (-j..=j).map(&mut f).collect(),
            order,
        }
    }

    /// Truncation order J.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `b_j`, zero outside the stored range.
    #[inline]
    pub fn get(&self, j: i64) -> Complex64 {
        let idx = j + self.order as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `sum_j |b_j|^2`: the transmitted fraction of a plane wave.
    pub fn power(&self) -> f64 {
        self.coeffs.iter().map(|b| b.norm_sqr()).sum()
    }
}

/// How many fringe harmonics and grating orders to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Highest fringe harmonic M.
    pub harmonics: usize,
    /// Highest grating diffraction order J.
    pub orders: usize,
    /// Largest acceptable `|c_M| / |c_1|`; `None` skips the tail test.
    pub tail_tolerance: Option<f64>,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            harmonics: 48,
            orders: 192,
            tail_tolerance: Some(1e-6),
        }
    }
}

impl Truncation {
    pub fn new(harmonics: usize, orders: usize) -> Self {
        Self {
            harmonics,
            orders,
            tail_tolerance: Some(1e-6),
        }
    }

    /// Enough to resolve the visibility and phase of the first harmonic; the
    /// higher-harmonic tail is not inspected.
    pub fn visibility() -> Self {
        Self {
            harmonics: 4,
            orders: 256,
            tail_tolerance: None,
        }
    }

    pub fn unchecked(self) -> Self {
        Self {
            tail_tolerance: None,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.harmonics < 1 {
            return Err(Error::invalid("need at least one fringe harmonic"));
        }
        if self.orders < 4 * self.harmonics {
            return Err(Error::Truncation(format!(
                "grating order J={} must be at least 4M={}",
                self.orders,
                4 * self.harmonics
            )));
        }
        Ok(())
    }
}

/// Per-harmonic complex multiplier produced by one physical channel.
///
/// Only `m >= 0` is stored; negative harmonics are the complex conjugates,
/// which makes Hermitian symmetry hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReduction {
    pub label: String,
    r: Vec<Complex64>,
}

impl ChannelReduction {
    const MAGNITUDE_SLACK: f64 = 1e-9;

    pub fn identity(label: impl Into<String>, harmonics: usize) -> Self {
        Self {
            label: label.into(),
            r: vec![Complex64::new(1.0, 0.0); harmonics + 1],
        }
    }

    /// Build from `f(m)` for `m = 1..=harmonics`; `r_0` is fixed to one.
    pub fn from_fn(
        label: impl Into<String>,
        harmonics: usize,
        mut f: impl FnMut(usize) -> Complex64,
    ) -> Result<Self> {
        let label = label.into();
        let mut r = Vec::with_capacity(harmonics + 1);
        r.push(Complex64::new(1.0, 0.0));
        for m in 1..=harmonics {
            let v = f(m);
            if !(v.norm() <= 1.0 + Self::MAGNITUDE_SLACK) {
                return Err(Error::UnphysicalPattern(format!(
                    "channel '{label}' has |r_{m}| = {} > 1",
                    v.norm()
                )));
            }
            r.push(v);
        }
        Ok(Self { label, r })
    }

    /// Same real factor for every non-zero harmonic.
    pub fn uniform(label: impl Into<String>, harmonics: usize, factor: f64) -> Result<Self> {
        Self::from_fn(label, harmonics, |_| Complex64::new(factor, 0.0))
    }

    pub fn harmonics(&self) -> usize {
        self.r.len() - 1
    }

    /// `r_m`, with `r_{-m} = conj(r_m)`.
    pub fn get(&self, m: i64) -> Complex64 {
        let v = self.r[m.unsigned_abs() as usize];
        if m < 0 {
            v.conj()
        } else {
            v
        }
    }

    pub fn is_identity(&self) -> bool {
        self.r.iter().all(|v| *v == Complex64::new(1.0, 0.0))
    }

    /// Pointwise product, keeping the label of `self`.
    pub fn compose(&self, other: &ChannelReduction) -> Result<Self> {
        if other.harmonics() < self.harmonics() {
            return Err(Error::invalid(format!(
                "channel '{}' carries {} harmonics, need {}",
                other.label,
                other.harmonics(),
                self.harmonics()
            )));
        }
        Ok(Self {
            label: self.label.clone(),
            r: self.r.iter().zip(&other.r).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Fourier series of the detected signal against the third-grating offset.
///
/// Stores `c_0..=c_M`; `c_{-m}` is the conjugate of `c_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringePattern {
    c: Vec<Complex64>,
    pub period: f64,
}

impl FringePattern {
    /// Build from `c_0..=c_M`. `c_0` must be real and positive.
    pub fn new(mut c: Vec<Complex64>, period: f64) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::invalid("fringe pattern needs c_0"));
        }
        if !(c[0].re > 0.0) {
            return Err(Error::UnphysicalPattern(format!(
                "mean signal c_0 = {} is not positive",
                c[0]
            )));
        }
        c[0].im = 0.0;
        Ok(Self { c, period })
    }

    pub fn harmonics(&self) -> usize {
        self.c.len() - 1
    }

    #[inline]
    pub fn c(&self, m: i64) -> Complex64 {
        match self.c.get(m.unsigned_abs() as usize) {
            None => Complex64::new(0.0, 0.0),
            Some(v) if m < 0 => v.conj(),
            Some(v) => *v,
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.c
    }

    pub fn mean(&self) -> f64 {
        self.c[0].re
    }

    /// `2 |c_1| / c_0`.
    pub fn visibility(&self) -> f64 {
        2.0 * self.c(1).norm() / self.mean()
    }

    /// `arg c_1`.
    pub fn phase(&self) -> f64 {
        self.c(1).arg()
    }

    /// Copy with `c_0 = 1`.
    pub fn normalized(&self) -> Self {
        let c0 = self.mean();
        Self {
            c: self.c.iter().map(|v| v / c0).collect(),
            period: self.period,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            c: self.c.iter().map(|v| v * factor).collect(),
            period: self.period,
        }
    }

    /// Signal at offset `x`: `sum_m c_m exp(2 pi i m x / d)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let k = 2.0 * PI / self.period;
        self.c[0].re
            + 2.0
                * self.c[1..]
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (c * Complex64::from_polar(1.0, k * (i + 1) as f64 * x)).re)
                    .sum::<f64>()
    }

    /// Multiply every harmonic by the channel factor.
    pub fn apply(&self, r: &ChannelReduction) -> Result<Self> {
        if r.harmonics() < self.harmonics() {
            return Err(Error::invalid(format!(
                "channel '{}' carries {} harmonics, pattern has {}",
                r.label,
                r.harmonics(),
                self.harmonics()
            )));
        }
        Ok(Self {
            c: self
                .c
                .iter()
                .enumerate()
                .map(|(m, c)| c * r.get(m as i64))
                .collect(),
            period: self.period,
        })
    }

    /// Reject a truncation whose last harmonic is not negligible.
    pub fn check_tail(&self, tolerance: f64) -> Result<()> {
        let m = self.harmonics();
        if m < 2 {
            return Ok(());
        }
        let c1 = self.c(1).norm();
        // A pattern without a first harmonic is judged against its mean instead.
        let reference = if c1 < 1e-6 * self.mean() { self.mean() } else { c1 };
        let tail = self.c(m as i64).norm();
        if tail > tolerance * reference {
            return Err(Error::Truncation(format!(
                "|c_{m}| / |c_1| = {:.3e} exceeds {tolerance:.1e}; raise the harmonic count",
                tail / reference
            )));
        }
        Ok(())
    }

    /// Weighted sum of patterns sharing period and harmonic count.
    pub fn weighted_sum<'a>(items: impl IntoIterator<Item = (f64, &'a FringePattern)>) -> Result<Self> {
        let mut iter = items.into_iter();
        let (w0, first) = iter
            .next()
            .ok_or_else(|| Error::invalid("cannot average an empty set of patterns"))?;
        let mut c: Vec<Complex64> = first.c.iter().map(|v| v * w0).collect();
        for (w, p) in iter {
            if p.c.len() != c.len() {
                return Err(Error::invalid("patterns with different harmonic counts"));
            }
            for (acc, v) in c.iter_mut().zip(&p.c) {
                *acc += v * w;
            }
        }
        FringePattern::new(c, first.period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermitian_by_construction() {
        let p = FringePattern::new(vec![c(1.0, 0.0), c(0.1, 0.2), c(-0.05, 0.01)], 1e-6).unwrap();
        for m in 0..4 {
            assert_eq!(p.c(-m), p.c(m).conj());
        }
        assert!((p.visibility() - 2.0 * (0.05f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn evaluate_matches_series() {
        let p = FringePattern::new(vec![c(2.0, 0.0), c(0.3, -0.4)], 1.0).unwrap();
        for &x in &[0.0, 0.1, 0.37] {
            let direct = 2.0 + 2.0 * (c(0.3, -0.4) * Complex64::from_polar(1.0, 2.0 * PI * x)).re;
            assert!((p.evaluate(x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn non_positive_mean_rejected() {
        assert!(FringePattern::new(vec![c(0.0, 0.0)], 1.0).is_err());
    }

    #[test]
    fn reduction_magnitude_bound() {
        assert!(ChannelReduction::uniform("x", 3, 1.0 + 1e-6).is_err());
        let r = ChannelReduction::from_fn("x", 2, |m| Complex64::from_polar(0.5, m as f64)).unwrap();
        assert_eq!(r.get(0), c(1.0, 0.0));
        assert_eq!(r.get(-2), r.get(2).conj());
    }

    #[test]
    fn tail_check_uses_mean_when_first_harmonic_vanishes() {
        let p = FringePattern::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1e-7, 0.0)], 1.0).unwrap();
        assert!(p.check_tail(1e-6).is_ok());
        let q = FringePattern::new(vec![c(1.0, 0.0), c(1e-3, 0.0), c(1e-7, 0.0)], 1.0).unwrap();
        assert!(q.check_tail(1e-6).is_err());
    }

    #[test]
    fn truncation_requires_four_orders_per_harmonic() {
        assert!(Truncation::new(8, 31).validate().is_err());
        assert!(Truncation::new(8, 32).validate().is_ok());
    }
}
