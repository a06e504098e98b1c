//! Scalar root finding: grid scans for sign changes and a Newton-Raphson
//! iteration safeguarded by bisection.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerances for [`newton_safeguarded`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    /// Converged once `|f| <= abs_tol * |f'| * width`, i.e. the remaining
    /// Newton correction is below `abs_tol` of the initial bracket width.
    pub abs_tol: f64,
    /// Converged once a step is below `step_tol` relative to `max(|x|, width)`.
    pub step_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, step_tol: 1e-14, max_iter: 100 }
    }
}

/// An interval `[lo, hi]` on which `f(lo) * f(hi) <= 0`. `lo == hi` marks an
/// exact zero found on a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    /// Checks ordering and the sign condition against `f`.
    pub fn new(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidBracket { lo, hi, reason: "lo > hi" });
        }
        let (flo, fhi) = (f(lo), f(hi));
        if !(flo.is_finite() && fhi.is_finite()) {
            return Err(Error::InvalidBracket { lo, hi, reason: "f not finite at an end" });
        }
        if flo * fhi > 0.0 {
            return Err(Error::InvalidBracket { lo, hi, reason: "no sign change" });
        }
        Ok(Self { lo, hi })
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Grid density used when scanning a curve fitted to `samples` points.
pub fn grid_size(samples: usize) -> usize {
    256.max(4 * samples)
}

/// Evaluates `f` on `n_grid` uniform nodes over `[lo, hi]` and returns one
/// bracket per sign change between neighbours. A node where `f` is exactly zero
/// yields `[x, x]` and does not also open a bracket with its neighbours.
pub fn scan_sign_changes(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n_grid: usize,
) -> Result<Vec<Bracket>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidBracket { lo, hi, reason: "scan range must satisfy lo < hi" });
    }
    if n_grid < 2 {
        return Err(Error::InvalidBracket { lo, hi, reason: "scan needs at least two nodes" });
    }
    let step = (hi - lo) / (n_grid - 1) as f64;
    let node = |i: usize| if i == n_grid - 1 { hi } else { lo + step * i as f64 };

    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n_grid {
        let x = node(i);
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Scan { node: i, x });
        }
        if fx == 0.0 {
            out.push(Bracket { lo: x, hi: x });
        } else if let Some((px, pf)) = prev {
            if pf != 0.0 && pf.signum() != fx.signum() {
                out.push(Bracket { lo: px, hi: x });
            }
        }
        prev = Some((x, fx));
    }
    Ok(out)
}

/// Newton-Raphson kept inside `bracket`: any iterate that would leave the
/// current bracket, or a step that fails to halve the residual, is replaced by
/// bisection. The bracket shrinks on every iteration, so the returned root
/// always lies inside the initial one.
pub fn newton_safeguarded(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    bracket: Bracket,
    cfg: &RootConfig,
) -> Result<f64> {
    if bracket.is_degenerate() {
        return Ok(bracket.lo);
    }
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::InvalidBracket { lo, hi, reason: "no sign change" });
    }
    let rising = flo < 0.0;
    let width = hi - lo;

    let mut x = if flo.abs() < fhi.abs() { lo } else { hi };
    let mut fx = if flo.abs() < fhi.abs() { flo } else { fhi };
    let mut dx_old = width;
    let mut best = (x, fx.abs());

    for iter in 1..=cfg.max_iter {
        let d = df(x);
        let newton = x - fx / d;
        let in_bracket = newton.is_finite() && newton > lo && newton < hi;
        let (next, step) = if in_bracket && (fx / d).abs() * 2.0 <= dx_old.abs() {
            (newton, fx / d)
        } else {
            let mid = 0.5 * (lo + hi);
            (mid, x - mid)
        };
        dx_old = step;
        x = next;
        fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NoConvergence { best: best.0, iterations: iter });
        }
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if fx == 0.0 || fx.abs() <= cfg.abs_tol * df(x).abs() * width {
            return Ok(x);
        }
        if step.abs() <= cfg.step_tol * x.abs().max(width) {
            return Ok(x);
        }
        if (fx < 0.0) == rising {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= cfg.step_tol * x.abs().max(width) {
            return Ok(best.0);
        }
    }
    Err(Error::NoConvergence { best: best.0, iterations: cfg.max_iter })
}

/// Scans `[lo, hi]` and polishes every bracket with [`newton_safeguarded`].
pub fn find_roots(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n_grid: usize,
    cfg: &RootConfig,
) -> Result<Vec<f64>> {
    scan_sign_changes(&f, lo, hi, n_grid)?
        .into_iter()
        .map(|b| newton_safeguarded(&f, &df, b, cfg))
        .collect()
}
