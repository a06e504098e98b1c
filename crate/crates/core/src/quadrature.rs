//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local Richardson error estimates.
    pub error_bound: f64,
}

const PANELS: usize = 16;
const MAX_DEPTH: u32 = 48;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`, measured
/// against the integral of `|f|` so that sign cancellation cannot stall it.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error_bound: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let width = (hi - lo) / PANELS as f64;

    let mut stack = Vec::with_capacity(PANELS);
    let mut magnitude = 0.0;
    for i in 0..PANELS {
        let pa = lo + width * i as f64;
        let pb = if i == PANELS - 1 { hi } else { pa + width };
        let (fa, fm, fb) = (f(pa), f(0.5 * (pa + pb)), f(pb));
        if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
            return Err(Error::Quadrature { estimate: f64::NAN, error_bound: f64::INFINITY });
        }
        magnitude += (pb - pa) / 6.0 * (fa.abs() + 4.0 * fm.abs() + fb.abs());
        let whole = simpson(pa, pb, fa, fm, fb);
        stack.push(Panel { a: pa, b: pb, fa, fm, fb, whole, tol: 0.0, depth: 0 });
    }
    let tol = rel_tol * magnitude.max(f64::MIN_POSITIVE);
    for p in &mut stack {
        p.tol = tol * (p.b - p.a) / (hi - lo);
    }

    let mut value = 0.0;
    let mut error_bound = 0.0;
    let mut converged = true;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
        let (flm, frm) = (f(lm), f(rm));
        if !(flm.is_finite() && frm.is_finite()) {
            return Err(Error::Quadrature { estimate: value, error_bound: f64::INFINITY });
        }
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let diff = left + right - p.whole;
        if diff.abs() <= 15.0 * p.tol || p.depth >= MAX_DEPTH {
            if p.depth >= MAX_DEPTH && diff.abs() > 15.0 * p.tol {
                converged = false;
            }
            value += left + right + diff / 15.0;
            error_bound += diff.abs() / 15.0;
        } else {
            let depth = p.depth + 1;
            let tol = 0.5 * p.tol;
            stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth });
            stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol, depth });
        }
    }
    if converged {
        Ok(Integral { value: sign * value, error_bound })
    } else {
        Err(Error::Quadrature { estimate: sign * value, error_bound })
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = adaptive_simpson(|x| x * x * x - 2.0 * x, -1.0, 3.0, 1e-10).unwrap();
        assert!((r.value - 12.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_integrands() {
        let r = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        let r = adaptive_simpson(|x| 1.0 / (1.0 + x * x), -50.0, 50.0, 1e-10).unwrap();
        assert!((r.value - 2.0 * 50f64.atan()).abs() < 1e-8);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = adaptive_simpson(f64::exp, 1.0, 0.0, 1e-10).unwrap();
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(f64::exp, 2.0, 2.0, 1e-8).unwrap().value, 0.0);
    }

    #[test]
    fn singular_integrand_reports_failure() {
        let r = adaptive_simpson(|x: f64| x.abs().powf(-0.9), -1.0, 1.0, 1e-12);
        assert!(r.is_err());
    }
}
