//! Closed-form minimiser of the radiation functional on an annulus.
//!
//! For boundary data `f = Σ f_n e^{inω}` on `|x| = R0` the exact outgoing
//! field is `ψ_n(r) = f_n H_n(kr) / H_n(kR0)` and the minimiser is
//! `u = ψ + v` with `v_n(r) = v_n^R η_n(kr)`, where
//! `η_n(s) = Y_n(kR0) J_n(s) - J_n(kR0) Y_n(s)` vanishes on the inner
//! circle and `v_n^R = -f_n γ_n^R / c_n^R`.
//!
//! With `s = kρ`,
//! `c_n^R = ∫_{kR0}^{kR} [s η'² + (s + n²/s) η²] ds` and
//! `γ_n^R = (2/π) i k (R - R0) + (1/H_n(kR0)) ∫_{kR0}^{kR} [s H' η' + (s + n²/s) H η] ds`,
//! both evaluated through [`pair_antiderivative`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cylinder::{
    cross_product_integral, cyl_eval, cyl_sequence, pair_antiderivative, CylinderPoint, CylinderSequence,
};
use crate::error::{Error, Result};
use crate::quad::try_quad;
use crate::spectral::{
    gauge_transform, hermitian_product_with_tol, Annulus, FourierModes, ModeSet, RadialModeFunction,
    RadialValue,
};

/// Relative gap below which `R` is treated as collapsing onto `R0`.
pub const MIN_RELATIVE_GAP: f64 = 1e-6;

/// Wavenumber, inner radius and Dirichlet data on the inner circle.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    k: f64,
    r0: f64,
    data: FourierModes,
}

impl ProblemSpec {
    pub fn new(k: f64, r0: f64, data: FourierModes) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Invalid(format!("wavenumber must be positive, got {k}")));
        }
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::Invalid(format!("inner radius must be positive, got {r0}")));
        }
        let spec = Self { k, r0, data };
        for (n, _) in spec.data.iter() {
            ModeBasis::new(n, &spec)?;
        }
        Ok(spec)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn data(&self) -> &FourierModes {
        &self.data
    }

    pub fn with_data(&self, data: FourierModes) -> Result<Self> {
        Self::new(self.k, self.r0, data)
    }
}

/// `η_n(s)` and `η_n'(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaValue {
    pub value: f64,
    pub derivative: f64,
}

/// Cylinder values at `kR0` for one mode, shared by every radial evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeBasis {
    mode: i32,
    order: u32,
    k: f64,
    x0: f64,
    j0: f64,
    y0: f64,
    h0: Complex64,
    h0p: Complex64,
}

impl ModeBasis {
    pub fn new(mode: i32, spec: &ProblemSpec) -> Result<Self> {
        let order = mode.unsigned_abs();
        let x0 = spec.k * spec.r0;
        let p = cyl_eval(order, x0)?;
        let h = p.hankel();
        if h.h1.norm() == 0.0 || !h.h1.norm().is_finite() {
            return Err(Error::Conditioning(format!(
                "H_{order}({x0}) is not usable as a normaliser"
            )));
        }
        Ok(Self {
            mode,
            order,
            k: spec.k,
            x0,
            j0: p.j,
            y0: p.y,
            h0: h.h1,
            h0p: h.h1p,
        })
    }

    pub fn mode(&self) -> i32 {
        self.mode
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `kR0`.
    pub fn inner_argument(&self) -> f64 {
        self.x0
    }

    /// `H_n^(1)(kR0)`.
    pub fn hankel_at_inner(&self) -> Complex64 {
        self.h0
    }

    pub fn eta_at(&self, p: &CylinderPoint) -> EtaValue {
        EtaValue {
            value: self.y0 * p.j - self.j0 * p.y,
            derivative: self.y0 * p.jp - self.j0 * p.yp,
        }
    }

    /// `η` for order `m` (any sign) from a precomputed sequence.
    pub fn eta_from_sequence(&self, seq: &CylinderSequence, m: i32) -> f64 {
        self.y0 * seq.j(m) - self.j0 * seq.y(m)
    }

    pub fn eta(&self, s: f64) -> Result<EtaValue> {
        Ok(self.eta_at(&cyl_eval(self.order, s)?))
    }

    /// `H_n(kr) / H_n(kR0)` and its `r`-derivative.
    pub fn outgoing(&self, r: f64) -> Result<RadialValue> {
        let h = cyl_eval(self.order, self.k * r)?.hankel();
        Ok(RadialValue {
            value: h.h1 / self.h0,
            derivative: self.k * h.h1p / self.h0,
        })
    }

    /// `η_n(kr)` and its `r`-derivative.
    pub fn standing(&self, r: f64) -> Result<RadialValue> {
        let e = self.eta(self.k * r)?;
        Ok(RadialValue {
            value: Complex64::new(e.value, 0.0),
            derivative: Complex64::new(self.k * e.derivative, 0.0),
        })
    }

    fn eta_antiderivative(&self, s: f64, p: &CylinderPoint) -> Result<f64> {
        let e = self.eta_at(p);
        let v = Complex64::new(e.value, 0.0);
        let d = Complex64::new(e.derivative, 0.0);
        Ok(pair_antiderivative(self.order, s, v, d, v, d)?.re)
    }

    fn hankel_eta_antiderivative(&self, s: f64, p: &CylinderPoint) -> Result<Complex64> {
        let e = self.eta_at(p);
        let h = p.hankel();
        pair_antiderivative(
            self.order,
            s,
            h.h1,
            h.h1p,
            Complex64::new(e.value, 0.0),
            Complex64::new(e.derivative, 0.0),
        )
    }

    fn c_closed_form(&self, outer: f64) -> Result<f64> {
        let s1 = self.k * outer;
        let lower = self.eta_antiderivative(self.x0, &cyl_eval(self.order, self.x0)?)?;
        let upper = self.eta_antiderivative(s1, &cyl_eval(self.order, s1)?)?;
        Ok(upper - lower)
    }

    fn gamma_closed_form(&self, r0: f64, outer: f64) -> Result<Complex64> {
        let s1 = self.k * outer;
        let lower = self.hankel_eta_antiderivative(self.x0, &cyl_eval(self.order, self.x0)?)?;
        let upper = self.hankel_eta_antiderivative(s1, &cyl_eval(self.order, s1)?)?;
        let linear = Complex64::new(0.0, 2.0 / PI * self.k * (outer - r0));
        Ok(linear + (upper - lower) / self.h0)
    }

    /// `∫_a^b [k² ρ η'(kρ)² + (n²/ρ + ρ) η(kρ)²] dρ`, the squared H¹ norm of
    /// `η_n(kρ)` over `a <= ρ <= b`, in closed form.
    pub fn standing_h1_squared(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.standing_h1_antiderivative(b)? - self.standing_h1_antiderivative(a)?)
    }

    fn standing_h1_antiderivative(&self, rho: f64) -> Result<f64> {
        let s = self.k * rho;
        let n = self.order as i32;
        let seq = cyl_sequence(self.order + 1, s)?;
        let lo = self.eta_from_sequence(&seq, n - 1);
        let mid = self.eta_from_sequence(&seq, n);
        let hi = self.eta_from_sequence(&seq, n + 1);
        let slope = 0.5 * (lo - hi);
        let re = |x: f64| Complex64::new(x, 0.0);
        let gradient_part = pair_antiderivative(self.order, s, re(mid), re(slope), re(mid), re(slope))?.re;
        let weight_part = cross_product_integral(self.order, s, [re(lo), re(mid), re(hi)], [re(lo), re(mid), re(hi)])?.re;
        Ok(gradient_part - (1.0 - 1.0 / (self.k * self.k)) * weight_part)
    }

    /// `G(kR0)` reduces to `-(2 kR0 / π) H_n'(kR0)` because `η_n(kR0) = 0`.
    pub fn hankel_eta_lower_limit(&self) -> Complex64 {
        -2.0 * self.x0 / PI * self.h0p
    }
}

/// `η_n(ρ)` and `η_n'(ρ)` for the argument `ρ` of `η` itself.
pub fn eta(n: i32, rho: f64, spec: &ProblemSpec) -> Result<EtaValue> {
    ModeBasis::new(n, spec)?.eta(rho)
}

fn check_outer(outer: f64, spec: &ProblemSpec) -> Result<()> {
    if !(outer > spec.r0) || !outer.is_finite() {
        return Err(Error::Domain(format!(
            "outer radius {outer} must exceed the inner radius {}",
            spec.r0
        )));
    }
    Ok(())
}

/// `c_n^R`, the quadratic coefficient of mode `n`.
pub fn c_coeff(n: i32, outer: f64, spec: &ProblemSpec) -> Result<f64> {
    check_outer(outer, spec)?;
    ModeBasis::new(n, spec)?.c_closed_form(outer)
}

/// `γ_n^R`, the linear coefficient of mode `n`.
pub fn gamma_coeff(n: i32, outer: f64, spec: &ProblemSpec) -> Result<Complex64> {
    check_outer(outer, spec)?;
    ModeBasis::new(n, spec)?.gamma_closed_form(spec.r0, outer)
}

/// Per-mode closed-form quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub mode: i32,
    pub f: Complex64,
    pub c: f64,
    pub gamma: Complex64,
    pub v: Complex64,
    pub outer: f64,
}

impl ModeSolution {
    /// `c |v|² + 2 Re(f γ conj(v))` at a trial coefficient.
    pub fn quadratic(&self, v: Complex64) -> f64 {
        self.c * v.norm_sqr() + 2.0 * (self.f * self.gamma * v.conj()).re
    }
}

/// Minimiser of the radiation functional on `R0 < r < R`.
#[derive(Debug, Clone)]
pub struct AnnulusSolution {
    spec: ProblemSpec,
    outer: f64,
    modes: Vec<ModeSolution>,
    bases: Vec<ModeBasis>,
}

/// Solves the per-mode quadratic problems for outer radius `outer`.
pub fn solve(spec: &ProblemSpec, outer: f64) -> Result<AnnulusSolution> {
    check_outer(outer, spec)?;
    if outer < spec.r0 * (1.0 + MIN_RELATIVE_GAP) {
        return Err(Error::Conditioning(format!(
            "outer radius {outer} is within {MIN_RELATIVE_GAP:e} of R0 = {}",
            spec.r0
        )));
    }
    let mut modes = Vec::with_capacity(spec.data.len());
    let mut bases = Vec::with_capacity(spec.data.len());
    for (n, f) in spec.data.iter() {
        let basis = ModeBasis::new(n, spec)?;
        let c = basis.c_closed_form(outer)?;
        if !(c > 0.0) {
            return Err(Error::Conditioning(format!(
                "c_{n}^R = {c:e} is not positive at R = {outer}"
            )));
        }
        let gamma = basis.gamma_closed_form(spec.r0, outer)?;
        modes.push(ModeSolution {
            mode: n,
            f,
            c,
            gamma,
            v: -f * gamma / c,
            outer,
        });
        bases.push(basis);
    }
    Ok(AnnulusSolution {
        spec: spec.clone(),
        outer,
        modes,
        bases,
    })
}

impl AnnulusSolution {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn modes(&self) -> &[ModeSolution] {
        &self.modes
    }

    pub fn bases(&self) -> &[ModeBasis] {
        &self.bases
    }

    pub fn mode(&self, n: i32) -> Option<&ModeSolution> {
        self.modes.iter().find(|m| m.mode == n)
    }

    pub fn domain(&self) -> Annulus {
        Annulus::new(self.spec.r0, self.outer).expect("outer > r0 checked in solve")
    }

    /// `ψ` restricted to the annulus.
    pub fn psi_modes(&self) -> ModeSet {
        self.assemble(true, false)
    }

    /// `v = u - ψ`.
    pub fn v_modes(&self) -> ModeSet {
        self.assemble(false, true)
    }

    /// `u = ψ + v`.
    pub fn u_modes(&self) -> ModeSet {
        self.assemble(true, true)
    }

    fn assemble(&self, with_psi: bool, with_v: bool) -> ModeSet {
        let modes = self
            .modes
            .iter()
            .zip(&self.bases)
            .map(|(m, b)| {
                let (basis, f, v) = (*b, m.f, m.v);
                RadialModeFunction::new(m.mode, move |r| {
                    let mut out = RadialValue::default();
                    if with_psi {
                        let h = basis.outgoing(r)?;
                        out.value += f * h.value;
                        out.derivative += f * h.derivative;
                    }
                    if with_v {
                        let e = basis.standing(r)?;
                        out.value += v * e.value;
                        out.derivative += v * e.derivative;
                    }
                    Ok(out)
                })
            })
            .collect();
        ModeSet::new(self.domain(), modes).expect("modes are distinct")
    }
}

/// Exact outgoing solution on `|x| >= R0`.
pub fn exact_solution(spec: &ProblemSpec) -> Result<ModeSet> {
    let mut modes = Vec::new();
    for (n, f) in spec.data.iter() {
        let basis = ModeBasis::new(n, spec)?;
        modes.push(RadialModeFunction::new(n, move |r| {
            let h = basis.outgoing(r)?;
            Ok(RadialValue {
                value: f * h.value,
                derivative: f * h.derivative,
            })
        }));
    }
    ModeSet::new(Annulus::new(spec.r0, f64::INFINITY)?, modes)
}

/// `Σ_n [c_n |v_n|² + 2 Re(f_n γ_n conj(v_n))]`, with optional replacement
/// coefficients for any subset of the modes.
pub fn reduced_functional(
    sol: &AnnulusSolution,
    v_override: Option<&BTreeMap<i32, Complex64>>,
) -> Result<f64> {
    if let Some(over) = v_override {
        let truncation = sol.spec.data.truncation();
        if let Some(bad) = over.keys().find(|n| n.unsigned_abs() > truncation) {
            return Err(Error::Invalid(format!(
                "override for mode {bad} lies outside truncation {truncation}"
            )));
        }
    }
    let mut total = 0.0;
    for m in &sol.modes {
        let v = v_override.and_then(|o| o.get(&m.mode).copied()).unwrap_or(m.v);
        total += m.quadratic(v);
    }
    // Overrides on modes with zero data still carry c |v|².
    if let Some(over) = v_override {
        for (&n, &v) in over {
            if sol.mode(n).is_none() {
                total += c_coeff(n, sol.outer, &sol.spec)? * v.norm_sqr();
            }
        }
    }
    Ok(total)
}

/// Largest relative Helmholtz residual `|u'' + u'/r + (k² - n²/r²) u|`
/// over all modes at the given radii. Second derivatives come from the
/// three-term recurrence, not from the ODE being checked.
pub fn helmholtz_residual(sol: &AnnulusSolution, radii: &[f64]) -> Result<f64> {
    let domain = sol.domain();
    let k = sol.spec.k;
    let mut worst = 0.0_f64;
    for &r in radii {
        if !domain.contains_radius(r) {
            return Err(Error::Domain(format!("radius {r} outside the annulus")));
        }
        for (m, b) in sol.modes.iter().zip(&sol.bases) {
            let n = b.order as i32;
            let s = k * r;
            let seq = cyl_sequence(b.order + 2, s)?;
            let a = m.f / b.h0;
            let combo = |jv: f64, yv: f64| a * Complex64::new(jv, yv) + m.v * (b.y0 * jv - b.j0 * yv);
            let value = combo(seq.j(n), seq.y(n));
            let first = combo(seq.jp(n), seq.yp(n));
            let second = combo(seq.jpp(n), seq.ypp(n));
            let bend = 1.0 - (n as f64 / s).powi(2);
            let residual = second + first / s + bend * value;
            let scale = second.norm() + first.norm() / s + bend.abs() * value.norm();
            if scale > 0.0 {
                worst = worst.max(residual.norm() / scale);
            }
        }
    }
    Ok(worst)
}

/// `J_R(u) = ∫ |∇u - i k u x/|x||² dx / (2π)`, integrated directly from the
/// assembled field: an angular trapezoid sum (exact for the band-limited
/// field) inside an adaptive radial quadrature.
pub fn radiation_functional(sol: &AnnulusSolution, u: &ModeSet, rel_tol: f64) -> Result<f64> {
    let k = sol.spec.k;
    let max_mode = u.modes().iter().map(|m| m.mode().unsigned_abs()).max().unwrap_or(0) as usize;
    let samples = 4 * max_mode + 4;
    let angles: Vec<f64> = (0..samples)
        .map(|j| std::f64::consts::TAU * j as f64 / samples as f64)
        .collect();
    let domain = sol.domain();
    let est = try_quad(
        |r| {
            let values: Vec<(i32, RadialValue)> = u
                .modes()
                .iter()
                .map(|m| m.eval(r).map(|v| (m.mode(), v)))
                .collect::<Result<_>>()?;
            let mut mean = 0.0;
            for &w in &angles {
                let mut field = Complex64::new(0.0, 0.0);
                let mut radial = Complex64::new(0.0, 0.0);
                let mut angular = Complex64::new(0.0, 0.0);
                for &(n, v) in &values {
                    let e = Complex64::from_polar(1.0, n as f64 * w);
                    field += v.value * e;
                    radial += v.derivative * e;
                    angular += Complex64::new(0.0, n as f64) * v.value * e;
                }
                let er = radial - Complex64::i() * k * field;
                let ew = angular / r;
                mean += er.norm_sqr() + ew.norm_sqr();
            }
            Ok(r * mean / samples as f64)
        },
        domain.inner(),
        domain.outer(),
        rel_tol,
    )?;
    Ok(est.value)
}

/// `⟨Ψ, Ψ⟩_R`, the constant part of `J_R(ψ + v)`, by quadrature.
pub fn psi_self_product(sol: &AnnulusSolution, rel_tol: f64) -> Result<f64> {
    let gauged = gauge_transform(&sol.psi_modes(), sol.spec.k)?;
    hermitian_product_with_tol(&gauged, &gauged, &sol.domain(), rel_tol)
}
