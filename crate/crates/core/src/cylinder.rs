//! Bessel, Neumann and Hankel functions of integer order and real positive
//! argument, together with the exact antiderivatives of the weighted
//! cylinder-function products the closed-form solver needs.
//!
//! `J_n` is always produced by Miller's backward recurrence. Below
//! [`ASYMPTOTIC_THRESHOLD`] the recurrence is normalised with
//! `J_0 + 2 Σ J_2k = 1` and `Y_0`, `Y_1` come from the Neumann series over
//! the same `J_k` run. Above it, `J_0`, `J_1`, `Y_0`, `Y_1` come from the
//! Hankel asymptotic expansion; the Miller run is rescaled against the
//! asymptotic `J_0`, `J_1` pair. `Y_n` is always obtained by forward
//! recurrence, which is stable for the dominant solution.
//!
//! Negative orders follow `C_{-n} = (-1)^n C_n`; every public entry point
//! takes the order as `|n|`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest order accepted by [`cyl_eval`] and [`hankel_eval`].
pub const DEFAULT_MAX_ORDER: u32 = 64;

/// Arguments at or above this use the Hankel asymptotic expansion for the
/// orders 0 and 1. At 20 the smallest asymptotic term is below 1e-17.
pub const ASYMPTOTIC_THRESHOLD: f64 = 20.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_LIMIT: f64 = 1e250;

/// Values of `J_n`, `Y_n` and their derivatives at one `(n, x)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderPoint {
    pub order: u32,
    pub argument: f64,
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

impl CylinderPoint {
    /// `J_n Y_n' - J_n' Y_n`, which equals `2 / (pi x)`.
    pub fn wronskian(&self) -> f64 {
        self.j * self.yp - self.jp * self.y
    }

    /// Second derivatives `(J_n'', Y_n'')` taken from Bessel's equation.
    pub fn ode_second_derivatives(&self) -> (f64, f64) {
        (
            ode_second_derivative(self.order, self.argument, self.j, self.jp),
            ode_second_derivative(self.order, self.argument, self.y, self.yp),
        )
    }

    pub fn hankel(&self) -> HankelValue {
        let h1 = Complex64::new(self.j, self.y);
        HankelValue {
            order: self.order,
            argument: self.argument,
            h1,
            h1p: Complex64::new(self.jp, self.yp),
            h2: h1.conj(),
        }
    }
}

/// `H_n^(1)`, its derivative, and `H_n^(2)` at one `(n, x)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelValue {
    pub order: u32,
    pub argument: f64,
    pub h1: Complex64,
    pub h1p: Complex64,
    pub h2: Complex64,
}

/// `J_k(x)` and `Y_k(x)` for every order `0..=top` at a single argument.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSequence {
    argument: f64,
    j: Vec<f64>,
    y: Vec<f64>,
}

impl CylinderSequence {
    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn top_order(&self) -> u32 {
        (self.j.len() - 1) as u32
    }

    /// `J_n(x)` for any `|n| <= top`, negative orders by reflection.
    pub fn j(&self, n: i32) -> f64 {
        reflect(n, self.j[n.unsigned_abs() as usize])
    }

    pub fn y(&self, n: i32) -> f64 {
        reflect(n, self.y[n.unsigned_abs() as usize])
    }

    /// `J_n'(x) = (J_{n-1} - J_{n+1}) / 2`; needs `|n| < top`.
    pub fn jp(&self, n: i32) -> f64 {
        0.5 * (self.j(n - 1) - self.j(n + 1))
    }

    pub fn yp(&self, n: i32) -> f64 {
        0.5 * (self.y(n - 1) - self.y(n + 1))
    }

    /// `J_n''(x) = (J_{n-2} - 2 J_n + J_{n+2}) / 4`; needs `|n| + 2 <= top`.
    pub fn jpp(&self, n: i32) -> f64 {
        0.25 * (self.j(n - 2) - 2.0 * self.j(n) + self.j(n + 2))
    }

    pub fn ypp(&self, n: i32) -> f64 {
        0.25 * (self.y(n - 2) - 2.0 * self.y(n) + self.y(n + 2))
    }

    pub fn point(&self, order: u32) -> CylinderPoint {
        let n = order as i32;
        CylinderPoint {
            order,
            argument: self.argument,
            j: self.j(n),
            y: self.y(n),
            jp: self.jp(n),
            yp: self.yp(n),
        }
    }
}

fn reflect(n: i32, value: f64) -> f64 {
    if n < 0 && n % 2 != 0 {
        -value
    } else {
        value
    }
}

/// `C'' = -C'/x - (1 - n^2/x^2) C` for any cylinder function of order `n`.
pub fn ode_second_derivative(order: u32, x: f64, value: f64, derivative: f64) -> f64 {
    let n = order as f64;
    -derivative / x - (1.0 - n * n / (x * x)) * value
}

/// Evaluates `J_n`, `Y_n` and first derivatives with the default order cap.
pub fn cyl_eval(order: u32, argument: f64) -> Result<CylinderPoint> {
    cyl_eval_with_limit(order, argument, DEFAULT_MAX_ORDER)
}

pub fn cyl_eval_with_limit(order: u32, argument: f64, max_order: u32) -> Result<CylinderPoint> {
    if order > max_order {
        return Err(Error::UnsupportedOrder {
            order,
            max: max_order,
        });
    }
    Ok(cyl_sequence(order + 1, argument)?.point(order))
}

pub fn hankel_eval(order: u32, argument: f64) -> Result<HankelValue> {
    Ok(cyl_eval(order, argument)?.hankel())
}

/// Computes `J_k(x)`, `Y_k(x)` for `k = 0..=top`.
///
/// `top` may exceed [`DEFAULT_MAX_ORDER`] by the two extra orders the
/// derivative formulas need.
pub fn cyl_sequence(top: u32, argument: f64) -> Result<CylinderSequence> {
    if !(argument > 0.0) || !argument.is_finite() {
        return Err(Error::Domain(format!(
            "cylinder functions need a finite positive argument, got {argument}"
        )));
    }
    if top > DEFAULT_MAX_ORDER + 2 {
        return Err(Error::UnsupportedOrder {
            order: top,
            max: DEFAULT_MAX_ORDER + 2,
        });
    }
    let x = argument;
    let top = top.max(1) as usize;
    let run = miller_run(top, x);

    let (j, y0, y1) = if x >= ASYMPTOTIC_THRESHOLD {
        let (j0, y0) = hankel_asymptotic(0, x);
        let (j1, y1) = hankel_asymptotic(1, x);
        // Divide out the magnitude first: the raw run may sit near the
        // rescale limit, where squaring overflows.
        let big = run.values[0].abs().max(run.values[1].abs());
        let (u0, u1) = (run.values[0] / big, run.values[1] / big);
        let scale = (u0 * j0 + u1 * j1) / (u0 * u0 + u1 * u1) / big;
        let j = run.values.iter().map(|v| v * scale).collect::<Vec<_>>();
        (j, y0, y1)
    } else {
        let scale = 1.0 / run.norm_sum;
        let j = run.values.iter().map(|v| v * scale).collect::<Vec<_>>();
        let log_term = (0.5 * x).ln() + EULER_GAMMA;
        let y0 = 2.0 / PI * (log_term * j[0] - 2.0 * scale * run.neumann_even);
        let y1 = 2.0 / PI * (log_term * j[1] - j[0] / x + scale * run.neumann_odd);
        (j, y0, y1)
    };

    let mut y = Vec::with_capacity(top + 1);
    y.push(y0);
    y.push(y1);
    for k in 1..top {
        let next = 2.0 * k as f64 / x * y[k] - y[k - 1];
        if !next.is_finite() {
            return Err(Error::Overflow(format!("Y_{}({x})", k + 1)));
        }
        y.push(next);
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!("J_n({x}) for n <= {top}")));
    }
    Ok(CylinderSequence { argument: x, j, y })
}

struct MillerRun {
    /// Unnormalised `J_0..=J_top`.
    values: Vec<f64>,
    /// `J_0 + 2 Σ J_2k`.
    norm_sum: f64,
    /// `Σ_{k>=1} (-1)^k J_2k / k`.
    neumann_even: f64,
    /// `Σ_{k>=1} (-1)^k (J_{2k-1} - J_{2k+1}) / k`.
    neumann_odd: f64,
}

fn miller_start(top: usize, x: f64) -> usize {
    let reach = top.max(x.ceil() as usize).max(1);
    let start = reach + 2 * (40.0 * reach as f64).sqrt().ceil() as usize + 10;
    start + start % 2
}

fn miller_run(top: usize, x: f64) -> MillerRun {
    let start = miller_start(top, x);
    let mut values = vec![0.0; top + 1];
    let mut above = 0.0_f64; // J_{k+1}
    let mut current = 1e-30_f64; // J_k, starting at k = start
    let mut norm_sum = 0.0;
    let mut neumann_even = 0.0;
    let mut neumann_odd = 0.0;

    for k in (0..=start).rev() {
        if k <= top {
            values[k] = current;
        }
        if k == 0 {
            norm_sum += current;
        } else if k % 2 == 0 {
            norm_sum += 2.0 * current;
            let half = (k / 2) as f64;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            neumann_even += sign * current / half;
        } else {
            // J_k = J_{2m-1} contributes +(-1)^m/m, and as J_{2m'+1} with
            // m' = m - 1 contributes -(-1)^{m'}/m'.
            let m = (k + 1) / 2;
            let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
            let mut contrib = sign_m * current / m as f64;
            if m > 1 {
                contrib += sign_m * current / (m - 1) as f64;
            }
            neumann_odd += contrib;
        }
        if k == 0 {
            break;
        }
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_LIMIT {
            let s = 1.0 / RESCALE_LIMIT;
            current *= s;
            above *= s;
            norm_sum *= s;
            neumann_even *= s;
            neumann_odd *= s;
            for v in values.iter_mut() {
                *v *= s;
            }
        }
    }
    MillerRun {
        values,
        norm_sum,
        neumann_even,
        neumann_odd,
    }
}

/// `(J_nu(x), Y_nu(x))` for `nu` in {0, 1} from the Hankel expansion.
fn hankel_asymptotic(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut previous = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= previous || term == 0.0 {
            break;
        }
        previous = term.abs();
        // a_k / x^k enters P (k even) or Q (k odd) with sign (-1)^floor(k/2).
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-18 * (p.abs() + q.abs()) {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    // cos/sin of x - (2 nu + 1) pi / 4, expanded so the reduction of x is exact.
    let (cos_w, sin_w) = if nu == 0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    let amp = (2.0 / (PI * x)).sqrt();
    (
        amp * (p * cos_w - q * sin_w),
        amp * (p * sin_w + q * cos_w),
    )
}

fn finite_or_overflow(value: Complex64, what: &str) -> Result<Complex64> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(what.to_string()))
    }
}

/// Antiderivative of `r C' D' + (r + n^2/r) C D` for two cylinder functions
/// `C`, `D` of the same order `n`:
///
/// `F(r) = r^2 (C D + C' D') + r C' D - n^2 C D`.
pub fn pair_antiderivative(
    order: u32,
    argument: f64,
    c_val: Complex64,
    c_prime: Complex64,
    d_val: Complex64,
    d_prime: Complex64,
) -> Result<Complex64> {
    let r = argument;
    let n2 = (order as f64).powi(2);
    let cd = c_val * d_val;
    let value = r * r * (cd + c_prime * d_prime) + r * c_prime * d_val - n2 * cd;
    finite_or_overflow(value, "pair antiderivative")
}

/// Antiderivative of `r C_n D_n`:
///
/// `(r^2 / 4) (2 C_n D_n - C_{n-1} D_{n+1} - C_{n+1} D_{n-1})`,
/// with the triples ordered `(n - 1, n, n + 1)`.
pub fn cross_product_integral(
    order: u32,
    argument: f64,
    c_vals: [Complex64; 3],
    d_vals: [Complex64; 3],
) -> Result<Complex64> {
    let _ = order;
    let [c_lo, c_mid, c_hi] = c_vals;
    let [d_lo, d_mid, d_hi] = d_vals;
    let r2 = argument * argument;
    let value = 0.25 * r2 * (2.0 * c_mid * d_mid - c_lo * d_hi - c_hi * d_lo);
    finite_or_overflow(value, "cross product integral")
}
