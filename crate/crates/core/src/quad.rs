//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `rel_tol * |value| + ABS_FLOOR`. The error of each
//! panel is the plain `|K15 - G7|` difference, which overestimates the true
//! error of the Kronrod result on smooth integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const ABS_FLOOR: f64 = 1e-14;
pub const MAX_SUBINTERVALS: usize = 20_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Integral estimate and its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mid = f(center)?;
    let mut kronrod = mid * WGK[7];
    let mut gauss = mid * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    Ok(Panel { a, b, value, error })
}

/// Adaptive quadrature of a fallible complex integrand.
pub fn try_quad_complex<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadEstimate<Complex64>>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadEstimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
        });
    }
    let first = kronrod_panel(&mut f, a, b)?;
    let mut total = first.value;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    while total_error > rel_tol * total.norm() + ABS_FLOOR {
        if heap.len() >= MAX_SUBINTERVALS {
            return Err(Error::Accuracy {
                estimate: total.norm(),
                error: total_error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Accuracy {
                estimate: total.norm(),
                error: total_error,
                intervals: heap.len() + 1,
            });
        }
        let left = kronrod_panel(&mut f, worst.a, mid)?;
        let right = kronrod_panel(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum in interval order so the result does not depend on the
    // incremental update history.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    Ok(QuadEstimate {
        value,
        error,
        intervals: panels.len(),
    })
}

pub fn quad_complex<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadEstimate<Complex64>>
where
    F: FnMut(f64) -> Complex64,
{
    try_quad_complex(|s| Ok(f(s)), a, b, rel_tol)
}

/// Adaptive quadrature of a real integrand.
pub fn quad<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadEstimate<f64>>
where
    F: FnMut(f64) -> f64,
{
    let est = try_quad_complex(|s| Ok(Complex64::new(f(s), 0.0)), a, b, rel_tol)?;
    Ok(QuadEstimate {
        value: est.value.re,
        error: est.error,
        intervals: est.intervals,
    })
}

pub fn try_quad<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadEstimate<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let est = try_quad_complex(|s| f(s).map(|v| Complex64::new(v, 0.0)), a, b, rel_tol)?;
    Ok(QuadEstimate {
        value: est.value.re,
        error: est.error,
        intervals: est.intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_are_consistent() {
        let kronrod: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let gauss: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((kronrod - 2.0).abs() < 1e-15);
        assert!((gauss - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_exact_on_polynomials() {
        // K15 is exact to degree 22, G7 to degree 13.
        for deg in 0..=22 {
            let mut f = |x: f64| Ok(Complex64::new(x.powi(deg), 0.0));
            let p = kronrod_panel(&mut f, 0.0, 1.0).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((p.value.re - exact).abs() < 1e-14, "degree {deg}");
            if deg <= 13 {
                assert!(p.error < 1e-14, "degree {deg}");
            }
        }
    }

    #[test]
    fn basic_integrals() {
        let r = quad(|s| s, 1.0, 2.0, DEFAULT_REL_TOL).unwrap();
        assert!((r.value - 1.5).abs() < 1e-14);
        let r = quad(f64::sin, 0.0, PI, DEFAULT_REL_TOL).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        assert!(r.error <= DEFAULT_REL_TOL * 2.0 + ABS_FLOOR);
    }

    #[test]
    fn oscillatory_complex() {
        // int_0^50 e^{i s} ds = -i (e^{50 i} - 1)
        let r = quad_complex(|s| Complex64::from_polar(1.0, s), 0.0, 50.0, 1e-12).unwrap();
        let exact = -Complex64::i() * (Complex64::from_polar(1.0, 50.0) - 1.0);
        assert!((r.value - exact).norm() < 1e-12);
        assert!(r.intervals > 1);
    }

    #[test]
    fn empty_interval_and_errors() {
        assert_eq!(quad(|s| s, 3.0, 3.0, 1e-10).unwrap().value, 0.0);
        assert!(quad(|s| s, 2.0, 1.0, 1e-10).is_err());
        let r = quad(|s| (1.0 / s).sin() / s, 0.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
        let r = try_quad(|_| Err(Error::Domain("x".into())), 0.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
