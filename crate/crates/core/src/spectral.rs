//! Angular Fourier modes, radial mode profiles, and the gradient products
//! on an annulus.
//!
//! All mode sums follow the one-dimensional radial form
//! `Σ_n ∫ [ρ u_n' conj(v_n') + (n²/ρ) u_n conj(v_n)] dρ`
//! without the `2π` that a literal area integral over the angle would add.
//! Every minimiser, ratio and slope computed from these products is
//! unchanged by that constant.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{try_quad, DEFAULT_REL_TOL};

/// Fixed reduction order for mode sums: ascending `|n|`, `n` before `-n`.
pub fn mode_order(n: i32) -> (u32, bool) {
    (n.unsigned_abs(), n < 0)
}

/// Fourier coefficients `f_n` for `|n| <= N`; absent indices are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierModes {
    truncation: u32,
    coefficients: BTreeMap<i32, Complex64>,
}

impl FourierModes {
    pub fn new(truncation: u32) -> Self {
        Self {
            truncation,
            coefficients: BTreeMap::new(),
        }
    }

    /// Builds modes from `(n, f_n)` pairs with the smallest truncation
    /// that holds them. Duplicate indices are refused.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, Complex64)>,
    {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let truncation = pairs.iter().map(|(n, _)| n.unsigned_abs()).max().unwrap_or(0);
        let mut modes = Self::new(truncation);
        for (n, value) in pairs {
            if modes.coefficients.contains_key(&n) {
                return Err(Error::Invalid(format!("mode {n} given twice")));
            }
            modes.set(n, value)?;
        }
        Ok(modes)
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn set(&mut self, n: i32, value: Complex64) -> Result<()> {
        if n.unsigned_abs() > self.truncation {
            return Err(Error::Invalid(format!(
                "mode {n} lies outside truncation {}",
                self.truncation
            )));
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Invalid(format!("mode {n} has a non-finite coefficient")));
        }
        self.coefficients.insert(n, value);
        Ok(())
    }

    pub fn get(&self, n: i32) -> Complex64 {
        self.coefficients.get(&n).copied().unwrap_or_default()
    }

    /// Stored `(n, f_n)` pairs in the canonical mode order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        let mut keys: Vec<i32> = self.coefficients.keys().copied().collect();
        keys.sort_by_key(|&n| mode_order(n));
        keys.into_iter().map(move |n| (n, self.coefficients[&n]))
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            truncation: self.truncation,
            coefficients: self.coefficients.iter().map(|(&n, &c)| (n, c * alpha)).collect(),
        }
    }

    /// Checks `f_{-n} = conj(f_n)`, the condition for real angular data.
    pub fn enforce_real(&self, tol: f64) -> Result<()> {
        for n in 0..=self.truncation as i32 {
            let diff = (self.get(-n) - self.get(n).conj()).norm();
            if diff > tol {
                return Err(Error::Invalid(format!(
                    "data declared real but f_{{-{n}}} differs from conj(f_{n}) by {diff:e}"
                )));
            }
        }
        Ok(())
    }

    /// `f(ω) = Σ f_n e^{inω}`.
    pub fn synthesize(&self, omega: f64) -> Complex64 {
        self.iter()
            .fold(Complex64::new(0.0, 0.0), |acc, (n, c)| {
                acc + c * Complex64::from_polar(1.0, n as f64 * omega)
            })
    }
}

/// Uniform-grid (trapezoidal) Fourier coefficients of periodic samples on
/// `[0, 2π)`, truncated to `|n| <= truncation`.
pub fn fourier_coeffs_from_samples(samples: &[Complex64], truncation: u32) -> Result<FourierModes> {
    let m = samples.len();
    let required = 4 * truncation as usize + 1;
    if m < required {
        return Err(Error::Aliasing {
            samples: m,
            truncation,
            required,
        });
    }
    let mut modes = FourierModes::new(truncation);
    let t = truncation as i64;
    for n in -t..=t {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &s) in samples.iter().enumerate() {
            // reduce n*j modulo m before forming the angle
            let phase = (n * j as i64).rem_euclid(m as i64) as f64 / m as f64;
            acc += s * Complex64::from_polar(1.0, -TAU * phase);
        }
        modes.set(n as i32, acc / m as f64)?;
    }
    Ok(modes)
}

/// `B_outer \ closure(B_inner)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    inner: f64,
    outer: f64,
}

impl Annulus {
    /// `outer` may be `f64::INFINITY` for exterior profiles.
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0) || !inner.is_finite() || !(outer > inner) {
            return Err(Error::Domain(format!(
                "annulus needs 0 < inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(Self { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn contains_radius(&self, r: f64) -> bool {
        r >= self.inner && r <= self.outer
    }

    pub fn contains(&self, other: &Annulus) -> bool {
        other.inner >= self.inner && other.outer <= self.outer
    }
}

/// Value and radial derivative of one mode profile.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadialValue {
    pub value: Complex64,
    pub derivative: Complex64,
}

type Evaluator = dyn Fn(f64) -> Result<RadialValue> + Send + Sync;

/// Radial profile `u_n(r)` of a single angular mode.
#[derive(Clone)]
pub struct RadialModeFunction {
    mode: i32,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for RadialModeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialModeFunction").field("mode", &self.mode).finish()
    }
}

impl RadialModeFunction {
    pub fn new<F>(mode: i32, eval: F) -> Self
    where
        F: Fn(f64) -> Result<RadialValue> + Send + Sync + 'static,
    {
        Self {
            mode,
            eval: Arc::new(eval),
        }
    }

    pub fn mode(&self) -> i32 {
        self.mode
    }

    pub fn eval(&self, r: f64) -> Result<RadialValue> {
        (self.eval)(r)
    }

    /// Pointwise product with a constant.
    pub fn scaled(&self, alpha: Complex64) -> Self {
        let inner = self.eval.clone();
        Self::new(self.mode, move |r| {
            let v = inner(r)?;
            Ok(RadialValue {
                value: v.value * alpha,
                derivative: v.derivative * alpha,
            })
        })
    }
}

/// A set of mode profiles, all valid on `domain`, at most one per mode.
#[derive(Debug, Clone)]
pub struct ModeSet {
    domain: Annulus,
    modes: Vec<RadialModeFunction>,
}

impl ModeSet {
    pub fn new(domain: Annulus, modes: Vec<RadialModeFunction>) -> Result<Self> {
        let mut modes = modes;
        modes.sort_by_key(|m| mode_order(m.mode));
        if modes.windows(2).any(|w| w[0].mode == w[1].mode) {
            return Err(Error::Invalid("mode set has a repeated mode".into()));
        }
        Ok(Self { domain, modes })
    }

    pub fn domain(&self) -> Annulus {
        self.domain
    }

    pub fn modes(&self) -> &[RadialModeFunction] {
        &self.modes
    }

    pub fn get(&self, n: i32) -> Option<&RadialModeFunction> {
        self.modes.iter().find(|m| m.mode == n)
    }

    /// `Σ_n u_n(r) e^{inω}` with unit weights.
    pub fn evaluate(&self, r: f64, omega: f64) -> Result<Complex64> {
        self.check_radius(r)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in &self.modes {
            acc += m.eval(r)?.value * Complex64::from_polar(1.0, m.mode as f64 * omega);
        }
        Ok(acc)
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if self.domain.contains_radius(r) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "radius {r} outside [{}, {}]",
                self.domain.inner, self.domain.outer
            )))
        }
    }

    fn check_window(&self, window: &Annulus) -> Result<()> {
        if self.domain.contains(window) && window.outer.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "integration window [{}, {}] not inside [{}, {}]",
                window.inner, window.outer, self.domain.inner, self.domain.outer
            )))
        }
    }
}

/// `Σ_n f_n u_n(r) e^{inω}`; modes missing from either side contribute zero.
pub fn evaluate_field(modes: &FourierModes, radial: &ModeSet, r: f64, omega: f64) -> Result<Complex64> {
    radial.check_radius(r)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in radial.modes() {
        let c = modes.get(m.mode());
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        acc += c * m.eval(r)?.value * Complex64::from_polar(1.0, m.mode() as f64 * omega);
    }
    Ok(acc)
}

/// `Re Σ_n ∫ [ρ u_n' conj(v_n') + (n²/ρ) u_n conj(v_n)] dρ` over `domain`.
pub fn hermitian_product(u: &ModeSet, v: &ModeSet, domain: &Annulus) -> Result<f64> {
    hermitian_product_with_tol(u, v, domain, DEFAULT_REL_TOL)
}

pub fn hermitian_product_with_tol(u: &ModeSet, v: &ModeSet, domain: &Annulus, rel_tol: f64) -> Result<f64> {
    u.check_window(domain)?;
    v.check_window(domain)?;
    let mut total = 0.0;
    for um in u.modes() {
        let Some(vm) = v.get(um.mode()) else { continue };
        let n2 = (um.mode() as f64).powi(2);
        let est = try_quad(
            |rho| {
                let a = um.eval(rho)?;
                let b = vm.eval(rho)?;
                Ok((rho * a.derivative * b.derivative.conj() + n2 / rho * a.value * b.value.conj()).re)
            },
            domain.inner,
            domain.outer,
            rel_tol,
        )?;
        total += est.value;
    }
    Ok(total)
}

/// Full H¹ norm: gradient part of [`hermitian_product`] plus the L² term
/// `∫ ρ |v_n|² dρ`, with the same angular convention.
pub fn h1_norm(v: &ModeSet, domain: &Annulus) -> Result<f64> {
    h1_norm_with_tol(v, domain, DEFAULT_REL_TOL)
}

pub fn h1_norm_with_tol(v: &ModeSet, domain: &Annulus, rel_tol: f64) -> Result<f64> {
    v.check_window(domain)?;
    let mut total = 0.0;
    for m in v.modes() {
        let n2 = (m.mode() as f64).powi(2);
        let est = try_quad(
            |rho| {
                let a = m.eval(rho)?;
                Ok(rho * a.derivative.norm_sqr() + (n2 / rho + rho) * a.value.norm_sqr())
            },
            domain.inner,
            domain.outer,
            rel_tol,
        )?;
        total += est.value;
    }
    Ok(total.max(0.0).sqrt())
}

/// Multiplies every mode by `e^{-ikr}`.
pub fn gauge_transform(u: &ModeSet, k: f64) -> Result<ModeSet> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let modes = u
        .modes()
        .iter()
        .map(|m| {
            let inner = m.clone();
            RadialModeFunction::new(m.mode(), move |r| {
                let v = inner.eval(r)?;
                let phase = Complex64::from_polar(1.0, -k * r);
                Ok(RadialValue {
                    value: phase * v.value,
                    derivative: phase * (v.derivative - Complex64::i() * k * v.value),
                })
            })
        })
        .collect();
    ModeSet::new(u.domain(), modes)
}
