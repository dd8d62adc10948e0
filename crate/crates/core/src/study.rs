//! Convergence experiments: H¹ distance between the truncated minimiser and
//! the exact outgoing field as the outer radius grows, and log-log slope
//! fits of those distances.
//!
//! Since `ψ - u = -v`, both error norms reduce to `Σ_n |v_n^R|² ‖η_n(k·)‖²`
//! over the relevant window, which [`ModeBasis::standing_h1_squared`]
//! evaluates in closed form.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::cyl_eval;
use crate::error::{Error, Result};
use crate::solver::{reduced_functional, solve, AnnulusSolution, ProblemSpec};

/// Minimum number of radii for a slope fit.
pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `H¹(A_{R*})` with `R*` fixed.
    FixedWindow,
    /// `H¹(A_R)` over the whole computational annulus.
    FullDomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    spec: ProblemSpec,
    r_values: Vec<f64>,
    r_star: f64,
    norms: Vec<NormKind>,
}

impl SweepConfig {
    pub fn new(spec: ProblemSpec, r_values: Vec<f64>, r_star: f64, norms: Vec<NormKind>) -> Result<Self> {
        if !(r_star > spec.r0()) || !r_star.is_finite() {
            return Err(Error::Invalid(format!(
                "R* = {r_star} must exceed R0 = {}",
                spec.r0()
            )));
        }
        if r_values.is_empty() {
            return Err(Error::Invalid("sweep needs at least one outer radius".into()));
        }
        if r_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("outer radii must be strictly increasing".into()));
        }
        if let Some(bad) = r_values.iter().find(|&&r| !(r > r_star) || !r.is_finite()) {
            return Err(Error::Invalid(format!("outer radius {bad} does not exceed R* = {r_star}")));
        }
        if !norms.is_empty() && r_values.len() < MIN_FIT_POINTS {
            return Err(Error::Invalid(format!(
                "slope fits need at least {MIN_FIT_POINTS} radii, got {}",
                r_values.len()
            )));
        }
        let mut norms = norms;
        norms.dedup();
        Ok(Self {
            spec,
            r_values,
            r_star,
            norms,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn r_values(&self) -> &[f64] {
        &self.r_values
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    pub fn norms(&self) -> &[NormKind] {
        &self.norms
    }
}

/// `min · 10^(i / per_decade)` for every `i` that stays below `max`.
pub fn geometric_radii(min: f64, max: f64, per_decade: u32) -> Result<Vec<f64>> {
    if !(min > 0.0) || !(max >= min) || per_decade == 0 {
        return Err(Error::Invalid(format!(
            "bad geometric range min={min}, max={max}, per_decade={per_decade}"
        )));
    }
    let limit = max * (1.0 + 1e-12);
    let mut out = Vec::new();
    for i in 0.. {
        let r = min * 10f64.powf(i as f64 / per_decade as f64);
        if r > limit {
            break;
        }
        out.push(r);
    }
    Ok(out)
}

fn check_solution_radius(outer: f64, spec: &ProblemSpec) -> Result<()> {
    if !(outer > spec.r0()) {
        return Err(Error::Domain(format!(
            "outer radius {outer} must exceed R0 = {}",
            spec.r0()
        )));
    }
    Ok(())
}

/// `Σ_n |v_n|² ‖η_n(k·)‖²_{H¹(a, b)}` for a solved annulus.
fn correction_norm(sol: &AnnulusSolution, a: f64, b: f64) -> Result<f64> {
    let mut total = 0.0;
    for (m, basis) in sol.modes().iter().zip(sol.bases()) {
        if m.v.norm_sqr() == 0.0 {
            continue;
        }
        total += m.v.norm_sqr() * basis.standing_h1_squared(a, b)?;
    }
    Ok(total.max(0.0).sqrt())
}

/// `‖ψ - u_{A_R}‖_{H¹(A_{R*})}`.
pub fn error_fixed_window(spec: &ProblemSpec, outer: f64, r_star: f64) -> Result<f64> {
    check_solution_radius(outer, spec)?;
    if !(r_star > spec.r0() && r_star < outer) {
        return Err(Error::Domain(format!(
            "need R0 < R* < R, got R0 = {}, R* = {r_star}, R = {outer}",
            spec.r0()
        )));
    }
    let sol = solve(spec, outer)?;
    correction_norm(&sol, spec.r0(), r_star)
}

/// `‖ψ - u_{A_R}‖_{H¹(A_R)}`.
pub fn error_full_domain(spec: &ProblemSpec, outer: f64) -> Result<f64> {
    check_solution_radius(outer, spec)?;
    let sol = solve(spec, outer)?;
    correction_norm(&sol, spec.r0(), outer)
}

/// Least-squares line through `(ln R, ln error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log-error about the fitted line.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            points.len()
        )));
    }
    if let Some(&(r, e)) = points.iter().find(|&&(r, e)| !(r > 0.0) || !(e > 0.0) || !r.is_finite() || !e.is_finite()) {
        return Err(Error::Fit(format!(
            "log undefined at R = {r}, error = {e}"
        )));
    }
    let mut radii: Vec<f64> = points.iter().map(|p| p.0).collect();
    radii.sort_by(f64::total_cmp);
    if radii.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Fit("repeated R values".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-24 * n) {
        return Err(Error::Fit("R values have no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: points.len(),
    })
}

/// Keeps the largest error in each consecutive window of width `window`
/// in `R`. Points must be sorted by `R`.
pub fn envelope_points(points: &[(f64, f64)], window: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut start = f64::NEG_INFINITY;
    for &(r, e) in points {
        if r >= start + window {
            start = r;
            out.push((r, e));
        } else if let Some(last) = out.last_mut() {
            if e > last.1 {
                *last = (r, e);
            }
        }
    }
    out
}

/// Slope through per-half-period maxima; the error oscillates in `R` with
/// period `π / k`.
pub fn fit_envelope_slope(points: &[(f64, f64)], k: f64) -> Result<SlopeFit> {
    fit_loglog_slope(&envelope_points(points, 0.5 * PI / k))
}

/// Leading term `(2kR/π) [J_n(kR0)² + Y_n(kR0)²]` of `c_n^R`.
pub fn asymptotic_c(n: i32, outer: f64, spec: &ProblemSpec) -> Result<f64> {
    check_solution_radius(outer, spec)?;
    let p = cyl_eval(n.unsigned_abs(), spec.k() * spec.r0())?;
    Ok(2.0 * spec.k() * outer / PI * (p.j * p.j + p.y * p.y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeDiagnostic {
    pub mode: i32,
    pub c: f64,
    pub abs_gamma: f64,
    pub abs_v: f64,
    /// `R |γ_n^R| / c_n^R`, bounded when `γ/c = O(1/R)`.
    pub r_gamma_over_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub outer: f64,
    pub error_fixed: f64,
    pub error_full: f64,
    pub reduced_functional: f64,
    pub modes: Vec<ModeDiagnostic>,
}

impl SweepRow {
    pub fn max_abs_gamma(&self) -> f64 {
        self.modes.iter().map(|m| m.abs_gamma).fold(0.0, f64::max)
    }

    pub fn max_r_gamma_over_c(&self) -> f64 {
        self.modes.iter().map(|m| m.r_gamma_over_c).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub r_star: f64,
    pub rows: Vec<SweepRow>,
    pub slope_fixed: Option<SlopeFit>,
    pub slope_full: Option<SlopeFit>,
}

fn sweep_row(spec: &ProblemSpec, outer: f64, r_star: f64) -> Result<SweepRow> {
    let sol = solve(spec, outer)?;
    let modes = sol
        .modes()
        .iter()
        .map(|m| ModeDiagnostic {
            mode: m.mode,
            c: m.c,
            abs_gamma: m.gamma.norm(),
            abs_v: m.v.norm(),
            r_gamma_over_c: outer * m.gamma.norm() / m.c,
        })
        .collect();
    Ok(SweepRow {
        outer,
        error_fixed: correction_norm(&sol, spec.r0(), r_star)?,
        error_full: correction_norm(&sol, spec.r0(), outer)?,
        reduced_functional: reduced_functional(&sol, None)?,
        modes,
    })
}

/// Solves at every radius of the sweep (rows in parallel, reduced in
/// ascending `R`) and fits the requested slopes.
pub fn run_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    let rows = config
        .r_values
        .par_iter()
        .map(|&outer| {
            sweep_row(&config.spec, outer, config.r_star).map_err(|e| Error::AtRadius {
                outer,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fit = |kind: NormKind, pick: fn(&SweepRow) -> f64| -> Result<Option<SlopeFit>> {
        if !config.norms.contains(&kind) {
            return Ok(None);
        }
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.outer, pick(r))).collect();
        fit_loglog_slope(&points).map(Some)
    };
    let slope_fixed = fit(NormKind::FixedWindow, |r| r.error_fixed)?;
    let slope_full = fit(NormKind::FullDomain, |r| r.error_full)?;
    Ok(ConvergenceReport {
        r_star: config.r_star,
        rows,
        slope_fixed,
        slope_full,
    })
}

/// `(R, R |γ_n^R / c_n^R|)` along the given radii.
pub fn gamma_ratio_profile(spec: &ProblemSpec, n: i32, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    radii
        .iter()
        .map(|&outer| {
            let c = crate::solver::c_coeff(n, outer, spec)?;
            let g = crate::solver::gamma_coeff(n, outer, spec)?;
            Ok((outer, outer * g.norm() / c))
        })
        .collect()
}
