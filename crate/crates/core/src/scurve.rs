//! The two-parameter S-curve.
//!
//! A straight line `y - y_c = m (x - x_c)` damped by its own continued fraction
//! `y - y_c = m (x - x_c) / (1 + a (y - y_c)^2)` settles on the cubic
//!
//! ```text
//! a u^3 + u = m (x - x_c),    u = y - y_c
//! ```
//!
//! which has exactly one real root for `a > 0`. The curve is a sigmoid with its
//! inflection at `(x_c, y_c)`, slope `m` there, and saturation controlled by `a`.
//!
//! Forward evaluation uses a rearranged Cardano formula in the normalized
//! variable `v = sqrt(a) u`, which solves `v^3 + v = sqrt(a) m (x - x_c)` without
//! cancellation or overflow. The two radical terms of the textbook closed form
//! are still available through [`cardano_terms`]; they carry the subprocess
//! interpretation used by [`crate::superposition`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one S-curve.
///
/// `a` is the dissipation parameter (T⁻²), `m` the slope at the inflection
/// (H/m), `(x_c, y_c)` the inflection point (A/m, T).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SCurveParams {
    pub a: f64,
    pub m: f64,
    pub x_c: f64,
    pub y_c: f64,
}

/// Value and first three derivatives at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub y: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl SCurveParams {
    pub fn new(a: f64, m: f64, x_c: f64, y_c: f64) -> Result<Self> {
        let params = Self { a, m, x_c, y_c };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        finite("a", self.a)?;
        finite("m", self.m)?;
        finite("x_c", self.x_c)?;
        finite("y_c", self.y_c)?;
        if self.a < 0.0 {
            return Err(Error::InvalidModel(format!("a must be >= 0, got {}", self.a)));
        }
        Ok(())
    }

    /// Deviation `u = y - y_c` of the curve at `x`.
    pub fn deviation(&self, x: f64) -> Result<f64> {
        self.validate()?;
        finite("x", x)?;
        let c = self.m * (x - self.x_c);
        finite("m (x - x_c)", c)?;
        Ok(solve_cubic(self.a, c))
    }

    /// `y(x)`.
    pub fn eval_forward(&self, x: f64) -> Result<f64> {
        Ok(self.deviation(x)? + self.y_c)
    }

    /// `x(y)`, exact: `x = (a u^3 + u) / m + x_c`.
    pub fn eval_inverse(&self, y: f64) -> Result<f64> {
        self.validate()?;
        finite("y", y)?;
        if self.m == 0.0 {
            return Err(Error::SingularSlope);
        }
        let u = y - self.y_c;
        Ok((self.a * u * u * u + u) / self.m + self.x_c)
    }

    pub fn d1(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.d1)
    }

    pub fn d2(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.d2)
    }

    pub fn d3(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.d3)
    }

    /// All derivatives from a single forward solve.
    pub fn derivatives(&self, x: f64) -> Result<Derivatives> {
        let u = self.deviation(x)?;
        let (d1, d2, d3) = derivatives_at(self.a, self.m, u);
        Ok(Derivatives {
            y: u + self.y_c,
            d1,
            d2,
            d3,
        })
    }
}

/// Derivatives of the implicit curve expressed through `u = y - y_c`.
pub(crate) fn derivatives_at(a: f64, m: f64, u: f64) -> (f64, f64, f64) {
    let w = 1.0 + 3.0 * a * u * u;
    let d1 = m / w;
    let d2 = -6.0 * a * u * d1 * d1 / w;
    let d3 = -(6.0 * a / w) * d1 * (d1 * d1 + 3.0 * u * d2);
    (d1, d2, d3)
}

/// Real root of `a u^3 + u = c` for `a >= 0`.
pub fn solve_cubic(a: f64, c: f64) -> f64 {
    if a == 0.0 || c == 0.0 {
        return c;
    }
    let k = a.sqrt();
    let g = k * c;
    unit_root(g) / k
}

/// Real root of `v^3 + v = g`.
///
/// With `T^3 = |g|/2 + s`, `T'^3 = s - |g|/2`, `s = sqrt(g^2/4 + 1/27)` and
/// `T T' = 1/3`, Cardano gives `v = sign(g) (T - T')`. The difference is
/// rewritten as `g / (T^2 + T T' + T'^2)` so that nothing cancels.
fn unit_root(g: f64) -> f64 {
    const INV_SQRT_27: f64 = 0.192_450_089_729_875_25;
    let h = 0.5 * g.abs();
    let s = h.hypot(INV_SQRT_27);
    let t = (h + s).cbrt();
    let t_conj = 1.0 / (3.0 * t);
    let mut v = g / (t * t + t_conj * t_conj + 1.0 / 3.0);

    // One Newton polish step; skipped where v^3 would overflow.
    let r = v * (v * v + 1.0) - g;
    if r.is_finite() {
        v -= r / (3.0 * v * v + 1.0);
    }
    v
}

/// The two radical terms `(S1, S2)` of the closed form, with `S1 + S2 = u`.
///
/// ```text
/// D  = -27 c / (2a) + sqrt((27 c / (2a))^2 + 27 / a^3)
/// S1 = -D^(1/3) / 3
/// S2 = D^(-1/3) / a
/// ```
///
/// For `c > 0` the bracket `D` is evaluated through its conjugate
/// `(27/a^3) / (27 c/(2a) + sqrt(..))`. Requires `a > 0`.
pub fn cardano_terms(a: f64, c: f64) -> Result<(f64, f64)> {
    finite("a", a)?;
    finite("c", c)?;
    if a <= 0.0 {
        return Err(Error::DecompositionUndefined(a));
    }
    let b = 27.0 * c / (2.0 * a);
    let k = 27.0 / (a * a * a);
    let root = b.hypot(k.sqrt());
    let d = if c > 0.0 { k / (b + root) } else { -b + root };
    let w = d.cbrt();
    Ok((-w / 3.0, 1.0 / (a * w)))
}

fn finite(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn curve(a: f64, m: f64, x_c: f64, y_c: f64) -> SCurveParams {
        SCurveParams::new(a, m, x_c, y_c).unwrap()
    }

    /// Bisection on the cubic, independent of the closed form.
    fn bisect_cubic(a: f64, c: f64) -> f64 {
        let f = |u: f64| a * u * u * u + u - c;
        let (mut lo, mut hi) = (-c.abs() - 1.0, c.abs() + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn forward_at_inflection() {
        assert_eq!(curve(0.002, 41.0, -4.4, 13.0).eval_forward(-4.4).unwrap(), 13.0);
    }

    #[test]
    fn forward_straight_line() {
        assert_eq!(curve(0.0, 2.0, 1.0, 3.0).eval_forward(2.0).unwrap(), 5.0);
    }

    #[test]
    fn forward_unit_cubic() {
        let y = curve(1.0, 1.0, 0.0, 0.0).eval_forward(2.0).unwrap();
        assert!((y - 1.0).abs() < 1e-15, "{y}");
        assert!((bisect_cubic(1.0, 2.0) - y).abs() < 1e-13);
    }

    #[test]
    fn forward_rejects_non_finite() {
        let c = curve(1.0, 1.0, 0.0, 0.0);
        assert!(matches!(c.eval_forward(f64::NAN), Err(Error::Domain { .. })));
        let bad = SCurveParams { a: f64::INFINITY, m: 1.0, x_c: 0.0, y_c: 0.0 };
        assert!(bad.eval_forward(1.0).is_err());
        assert!(SCurveParams::new(-1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(curve(0.002, 41.0, -4.4, 13.0).eval_inverse(13.0).unwrap(), -4.4);
        assert_eq!(curve(1.0, 1.0, 0.0, 0.0).eval_inverse(1.0).unwrap(), 2.0);
        assert!(matches!(
            curve(1.0, 0.0, 0.0, 0.0).eval_inverse(1.0),
            Err(Error::SingularSlope)
        ));
    }

    #[test]
    fn first_derivative_examples() {
        assert_eq!(curve(15.52, 0.131, 50.0, 0.4).d1(50.0).unwrap(), 0.131);
        for x in [-10.0, 0.0, 3.0, 1e6] {
            assert_eq!(curve(0.0, 2.5, 1.0, 0.0).d1(x).unwrap(), 2.5);
        }
        let c = curve(1.0, 1.0, 0.0, 0.0);
        assert!((c.d1(2.0).unwrap() - 0.25).abs() < 1e-15);
        let fd = central(|x| c.eval_forward(x).unwrap(), 2.0, 1e-3);
        assert!((fd - 0.25).abs() < 1e-10);
    }

    #[test]
    fn second_derivative_examples() {
        assert_eq!(curve(3.0, 0.7, -2.0, 1.0).d2(-2.0).unwrap(), 0.0);
        assert_eq!(curve(0.0, 0.7, -2.0, 1.0).d2(5.0).unwrap(), 0.0);
        let c = curve(1.0, 1.0, 0.0, 0.0);
        assert!((c.d2(2.0).unwrap() + 0.09375).abs() < 1e-15);
        let fd = central(|x| c.d1(x).unwrap(), 2.0, 1e-3);
        assert!((fd + 0.09375).abs() < 1e-10);
    }

    #[test]
    fn third_derivative_examples() {
        assert_eq!(curve(0.0, 0.7, -2.0, 1.0).d3(5.0).unwrap(), 0.0);
        let c = curve(1.0, 1.0, 0.0, 0.0);
        assert_eq!(c.d3(0.0).unwrap(), -6.0);
        let fd = central(|x| c.d2(x).unwrap(), 2.0, 1e-3);
        let an = c.d3(2.0).unwrap();
        assert!(((fd - an) / an).abs() < 1e-6, "fd {fd} analytic {an}");
    }

    #[test]
    fn third_derivative_negative_at_inflection_for_rising_curves() {
        for (a, m) in [(0.5, 2.0), (3.0, 0.01), (100.0, 0.2)] {
            assert!(curve(a, m, 1.0, 1.0).d3(1.0).unwrap() < 0.0);
        }
    }

    #[test]
    fn saturation() {
        let c = curve(2.0, 1.0, 0.0, 0.0);
        let d = c.d1(1e9).unwrap();
        assert!(d > 0.0 && d < 1e-5);
    }

    #[test]
    fn extreme_parameters_stay_finite() {
        // Tiny a: indistinguishable from the line.
        let c = curve(1e-200, 3.0, 0.0, 0.0);
        assert!((c.eval_forward(2.0).unwrap() - 6.0).abs() < 1e-14);
        // Huge argument.
        let c = curve(1e-3, 1e200, 0.0, 0.0);
        let y = c.eval_forward(1e90).unwrap();
        assert!(y.is_finite());
        assert!((1e-3 * y * y * y / 1e290 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cardano_terms_need_positive_a() {
        assert!(matches!(cardano_terms(0.0, 1.0), Err(Error::DecompositionUndefined(_))));
        let (s1, s2) = cardano_terms(1.0, 0.0).unwrap();
        assert!((s1 + s2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn cubic_residual(la in -4.0f64..4.0, lm in -3.0f64..3.0, neg in any::<bool>(),
                          x in -1e3f64..1e3, x_c in -100.0f64..100.0, y_c in -5.0f64..5.0) {
            let m = if neg { -(10f64.powf(lm)) } else { 10f64.powf(lm) };
            let p = curve(10f64.powf(la), m, x_c, y_c);
            let u = p.eval_forward(x).unwrap() - y_c;
            let c = m * (x - x_c);
            let res = p.a * u * u * u + u - c;
            prop_assert!(res.abs() <= 1e-12 * (1.0 + c.abs()), "res {}", res);
        }

        #[test]
        fn round_trip(la in -4.0f64..4.0, lm in -3.0f64..3.0, x in -1e3f64..1e3, x_c in -100.0f64..100.0) {
            let p = curve(10f64.powf(la), 10f64.powf(lm), x_c, 0.3);
            let back = p.eval_inverse(p.eval_forward(x).unwrap()).unwrap();
            prop_assert!((back - x).abs() <= 1e-10 * x.abs().max(x_c.abs()).max(1.0));
        }

        #[test]
        fn odd_symmetry(la in -3.0f64..3.0, m in 0.01f64..10.0, d in 0.0f64..500.0) {
            let p = curve(10f64.powf(la), m, 7.0, 2.0);
            let up = p.eval_forward(7.0 + d).unwrap() - 2.0;
            let down = p.eval_forward(7.0 - d).unwrap() - 2.0;
            prop_assert!((up + down).abs() <= 1e-14 * up.abs().max(1.0));
        }

        #[test]
        fn increasing_for_positive_slope(la in -3.0f64..3.0, m in 0.01f64..10.0,
                                         x in -100.0f64..100.0, dx in 1e-3f64..10.0) {
            let p = curve(10f64.powf(la), m, 0.0, 0.0);
            prop_assert!(p.eval_forward(x + dx).unwrap() > p.eval_forward(x).unwrap());
            prop_assert!(p.d1(x).unwrap() > 0.0);
        }
    }
}
