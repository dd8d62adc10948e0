//! Test-only oracles. Nothing here calls the closed forms under test.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use radmin::cylinder::cyl_eval;
use radmin::quad::{quad, quad_complex};
use radmin::solver::ProblemSpec;
use radmin::spectral::FourierModes;

/// Neumaier compensated sum.
pub fn neumaier(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Ascending series `Σ (-1)^m (x/2)^(2m+n) / (m! (m+n)!)`, 80 terms.
pub fn series_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= half / i as f64;
    }
    let mut term = lead;
    let mut terms = Vec::with_capacity(80);
    for m in 0..80u32 {
        terms.push(term);
        term *= -half * half / ((m + 1) as f64 * (m + 1 + n) as f64);
    }
    neumaier(terms)
}

/// Bessel's integral `J_n(x) = (1/2π) ∫_0^{2π} cos(nθ - x sin θ) dθ` by the
/// periodic trapezoid rule, which converges geometrically once the node
/// count exceeds `x + n` by a margin.
pub fn trapezoid_j(n: u32, x: f64) -> f64 {
    let m = (2.0 * (x + n as f64) + 200.0) as usize;
    let h = 2.0 * PI / m as f64;
    neumaier((0..m).map(|i| {
        let t = i as f64 * h;
        (n as f64 * t - x * t.sin()).cos()
    })) / m as f64
}

/// Schläfli's integral for `Y_n(x)`:
/// `(1/π) ∫_0^π sin(x sin θ - nθ) dθ - (1/π) ∫_0^∞ (e^{nt} + (-1)^n e^{-nt}) e^{-x sinh t} dt`.
pub fn integral_y(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let first = quad(|t| (x * t.sin() - nf * t).sin(), 0.0, PI, 1e-13).unwrap().value;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    // Upper limit where the integrand is below e^{-50} relative to its start.
    let mut upper = 1.0_f64;
    while x * upper.sinh() - nf * upper < 50.0 {
        upper += 0.5;
    }
    let second = quad(
        |t| ((nf * t).exp() + sign * (-nf * t).exp()) * (-x * t.sinh()).exp(),
        0.0,
        upper,
        1e-13,
    )
    .unwrap()
    .value;
    (first - second) / PI
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn crel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn spec_with(k: f64, r0: f64, modes: &[(i32, Complex64)]) -> ProblemSpec {
    ProblemSpec::new(k, r0, FourierModes::from_pairs(modes.iter().copied()).unwrap()).unwrap()
}

pub fn unit_modes(k: f64, r0: f64, ns: &[i32]) -> ProblemSpec {
    let modes: Vec<_> = ns.iter().map(|&n| (n, Complex64::new(1.0, 0.0))).collect();
    spec_with(k, r0, &modes)
}

/// `η_n(s)` and `η_n'(s)` assembled from raw cylinder values.
fn eta_raw(n: u32, x0: f64, s: f64) -> (f64, f64) {
    let a = cyl_eval(n, x0).unwrap();
    let p = cyl_eval(n, s).unwrap();
    (a.y * p.j - a.j * p.y, a.y * p.jp - a.j * p.yp)
}

/// `c_n^R` as the literal radial integral in `ρ`.
pub fn c_by_quadrature(n: u32, k: f64, r0: f64, outer: f64, rel_tol: f64) -> f64 {
    let x0 = k * r0;
    let n2 = (n as f64).powi(2);
    quad(
        |rho| {
            let (e, ep) = eta_raw(n, x0, k * rho);
            rho * k * k * ep * ep + (rho * k * k + n2 / rho) * e * e
        },
        r0,
        outer,
        rel_tol,
    )
    .unwrap()
    .value
}

/// `γ_n^R` as the linear term plus the literal radial integral in `ρ`.
pub fn gamma_by_quadrature(n: u32, k: f64, r0: f64, outer: f64, rel_tol: f64) -> Complex64 {
    let x0 = k * r0;
    let n2 = (n as f64).powi(2);
    let h0 = cyl_eval(n, x0).unwrap().hankel().h1;
    let integral = quad_complex(
        |rho| {
            let h = cyl_eval(n, k * rho).unwrap().hankel();
            let (e, ep) = eta_raw(n, x0, k * rho);
            k * k * rho * h.h1p * ep + (k * k * rho + n2 / rho) * h.h1 * e
        },
        r0,
        outer,
        rel_tol,
    )
    .unwrap()
    .value;
    Complex64::new(0.0, 2.0 / PI * k * (outer - r0)) + integral / h0
}

/// Minimises `c |v|² + 2 Re(f γ conj(v))` over the complex plane by a
/// dense grid scan followed by compass search. Uses only evaluations of
/// the quadratic.
pub fn brute_force_minimiser(c: f64, f: Complex64, gamma: Complex64) -> Complex64 {
    let q = |v: Complex64| c * v.norm_sqr() + 2.0 * (f * gamma * v.conj()).re;
    // |v*| <= 2 |f γ| / c from q(v) >= c|v|² - 2|fγ||v| and q(v*) <= 0.
    let bound = (2.0 * (f * gamma).norm() / c).max(1e-300);
    let steps = 400;
    let mut best = Complex64::new(0.0, 0.0);
    let mut best_q = q(best);
    for i in 0..=steps {
        for j in 0..=steps {
            let v = Complex64::new(
                -bound + 2.0 * bound * i as f64 / steps as f64,
                -bound + 2.0 * bound * j as f64 / steps as f64,
            );
            let value = q(v);
            if value < best_q {
                best_q = value;
                best = v;
            }
        }
    }
    let mut step = 2.0 * bound / steps as f64;
    let dirs = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    while step > 1e-13 * bound {
        let mut moved = false;
        for d in dirs {
            let trial = best + d * step;
            let value = q(trial);
            if value < best_q {
                best_q = value;
                best = trial;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best
}
