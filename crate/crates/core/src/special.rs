//! Beta and complementary incomplete Beta functions by adaptive quadrature.
//!
//! `B'(x, y, z) = int_z^1 u^(x-1) (1-u)^(y-1) du` is evaluated piecewise. On
//! `[1/2, 1]` with `y < 1` the substitution `v = (1-u)^y` removes the endpoint
//! singularity:
//!
//! ```text
//! int_a^1 u^(x-1) (1-u)^(y-1) du = (1/y) int_0^((1-a)^y) (1 - v^(1/y))^(x-1) dv
//! ```
//!
//! and symmetrically `w = u^x` on `[0, 1/2]` when `x < 1`. What remains is a
//! bounded integrand handled by global adaptive Gauss-Kronrod (7/15).

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerance and work limit for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { abs_tol: 1e-12, max_subdivisions: 1 << 20 }
    }
}

impl QuadratureSpec {
    fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::param("quadrature", "abs_tol and max_subdivisions must be positive"));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Global adaptive integration of a bounded integrand over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.check()?;
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = gauss_kronrod(&f, a, b);
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut subdivisions = 0;
    while total_err > spec.abs_tol {
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Quadrature { tol: spec.abs_tol, subdivisions, estimate: total_err });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in f64.
            return Err(Error::Quadrature { tol: spec.abs_tol, subdivisions, estimate: total_err });
        }
        let (lv, le) = gauss_kronrod(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod(&f, mid, worst.b);
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // Re-sum to shed drift from the running updates.
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

fn check_shape(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite() && y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("Beta shape parameters must be positive, got ({x}, {y})")));
    }
    Ok(())
}

fn check_limit(z: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("incomplete Beta limit must lie in [0,1], got {z}")));
    }
    Ok(())
}

/// `int_a^1 u^(x-1)(1-u)^(y-1) du` for `a >= 1/2`.
fn upper_piece(x: f64, y: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    if a >= 1.0 {
        return Ok(0.0);
    }
    if y < 1.0 {
        let inv_y = 1.0 / y;
        let top = (1.0 - a).powf(y);
        let v = integrate(|v: f64| (1.0 - v.powf(inv_y)).powf(x - 1.0), 0.0, top, spec)?;
        Ok(v * inv_y)
    } else {
        integrate(|u: f64| u.powf(x - 1.0) * (1.0 - u).powf(y - 1.0), a, 1.0, spec)
    }
}

/// `int_lo^hi u^(x-1)(1-u)^(y-1) du` for `0 <= lo <= hi <= 1/2`.
fn lower_piece(x: f64, y: f64, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    if x < 1.0 {
        let inv_x = 1.0 / x;
        let w = integrate(|w: f64| (1.0 - w.powf(inv_x)).powf(y - 1.0), lo.powf(x), hi.powf(x), spec)?;
        Ok(w * inv_x)
    } else {
        integrate(|u: f64| u.powf(x - 1.0) * (1.0 - u).powf(y - 1.0), lo, hi, spec)
    }
}

fn split_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec { abs_tol: 0.5 * spec.abs_tol, ..*spec }
}

/// Complementary incomplete Beta function `int_z^1 u^(x-1)(1-u)^(y-1) du`.
pub fn beta_complement_with(x: f64, y: f64, z: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_shape(x, y)?;
    check_limit(z)?;
    if z >= 0.5 {
        return upper_piece(x, y, z, spec);
    }
    let half = split_spec(spec);
    Ok(lower_piece(x, y, z, 0.5, &half)? + upper_piece(x, y, 0.5, &half)?)
}

pub fn beta_complement(x: f64, y: f64, z: f64) -> Result<f64> {
    beta_complement_with(x, y, z, &QuadratureSpec::default())
}

/// Lower incomplete Beta function `int_0^z u^(x-1)(1-u)^(y-1) du`.
pub fn beta_lower_with(x: f64, y: f64, z: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_shape(x, y)?;
    check_limit(z)?;
    if z <= 0.5 {
        return lower_piece(x, y, 0.0, z, spec);
    }
    // int_0^z = int_0^(1/2) + (int_(1/2)^1 - int_z^1)
    let third = QuadratureSpec { abs_tol: spec.abs_tol / 3.0, ..*spec };
    Ok(lower_piece(x, y, 0.0, 0.5, &third)? + upper_piece(x, y, 0.5, &third)? - upper_piece(x, y, z, &third)?)
}

pub fn beta_lower(x: f64, y: f64, z: f64) -> Result<f64> {
    beta_lower_with(x, y, z, &QuadratureSpec::default())
}

/// Beta function `B(x, y)`.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    beta_complement(x, y, 0.0)
}

pub fn beta_with(x: f64, y: f64, spec: &QuadratureSpec) -> Result<f64> {
    beta_complement_with(x, y, 0.0, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn beta_closed_forms() {
        assert!((beta(1.0, 1.0).unwrap() - 1.0).abs() < 1e-13);
        assert!((beta(0.5, 0.5).unwrap() - PI).abs() < 1e-11);
        let want = 2.0 * PI / 3f64.sqrt();
        assert!((beta(2.0 / 3.0, 1.0 / 3.0).unwrap() - want).abs() < 1e-11);
        // B(2, 3) = 1!2!/4! = 1/12
        assert!((beta(2.0, 3.0).unwrap() - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn complement_endpoints() {
        for (x, y) in [(0.5, 0.5), (0.3, 0.7), (2.0, 0.25)] {
            assert_eq!(beta_complement(x, y, 1.0).unwrap(), 0.0);
            assert_eq!(beta_complement(x, y, 0.0).unwrap(), beta(x, y).unwrap());
        }
    }

    #[test]
    fn complement_arcsine_values() {
        // For x = y = 1/2 the antiderivative is 2 asin(sqrt(u)).
        assert!((beta_complement(0.5, 0.5, 0.5).unwrap() - PI / 2.0).abs() < 1e-11);
        let z = 0.5f64.sqrt();
        let want = PI - 2.0 * (2f64.powf(-0.25)).asin();
        assert!((beta_complement(0.5, 0.5, z).unwrap() - want).abs() < 1e-11);
        assert!((want - 1.143_717_740_402_420_4).abs() < 1e-15);
    }

    #[test]
    fn singular_exponents_converge() {
        for alpha in [2.1, 3.0, 4.0, 6.0] {
            let x = 2.0 / alpha;
            let y = 1.0 - x;
            let full = beta(x, y).unwrap();
            // B(x, 1-x) = pi / sin(pi x)
            let want = PI / (PI * x).sin();
            assert!((full - want).abs() < 1e-10 * want.max(1.0), "alpha={alpha}: {full} vs {want}");
            let part = beta_complement(x, y, 0.3).unwrap();
            assert!(part.is_finite() && part > 0.0 && part < full);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -1.0).is_err());
        assert!(beta_complement(0.5, 0.5, 1.5).is_err());
        assert!(beta_complement(0.5, 0.5, -0.1).is_err());
        assert!(beta_complement(f64::NAN, 0.5, 0.2).is_err());
    }

    #[test]
    fn integrate_polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, &QuadratureSpec::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn tiny_budget_reports_failure() {
        let spec = QuadratureSpec { abs_tol: 1e-15, max_subdivisions: 1 };
        let err = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
