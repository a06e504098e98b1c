//! Hysteresis loops from an upper and a lower branch model.
//!
//! The loop is closed by the two points where the branches cross. Its area is
//! the integral of the branch difference between them; for single S-curve
//! branches the integral along B has a closed form because the inverse map
//! `x = (a u^3 + u)/m + x_c` is a polynomial.

use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::report::{model_value, sig9};
use crate::rootfind::{grid_size, newton_safeguarded, scan_sign_changes, RootConfig};
use crate::scurve::SCurveParams;
use crate::superposition::{Component, SubprocessValues, Superposition};

/// Relative tolerance of the numeric area.
pub const AREA_REL_TOL: f64 = 1e-8;

/// Doublings tried by [`HysteresisLoop::auto`] before giving up.
const MAX_DOUBLINGS: u32 = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisLoop {
    upper: Superposition,
    lower: Superposition,
    h_range: (f64, f64),
    n_grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopAnalysis {
    pub left: Point,
    pub right: Point,
    pub area: f64,
}

impl HysteresisLoop {
    /// Checks both branches for monotonicity on the scan grid over `h_range`.
    pub fn new(upper: Superposition, lower: Superposition, h_range: (f64, f64)) -> Result<Self> {
        Self::with_grid(upper, lower, h_range, grid_size(0))
    }

    pub fn with_grid(
        upper: Superposition,
        lower: Superposition,
        h_range: (f64, f64),
        n_grid: usize,
    ) -> Result<Self> {
        let (lo, hi) = h_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidBracket { lo, hi, reason: "h_range must satisfy lo < hi" });
        }
        let n_grid = n_grid.max(2);
        for (name, branch) in [("upper", &upper), ("lower", &lower)] {
            check_monotone(name, branch, lo, hi, n_grid)?;
        }
        Ok(Self { upper, lower, h_range, n_grid })
    }

    /// Range covering both datasets, widened by 5% on each side.
    pub fn from_data(
        upper: Superposition,
        lower: Superposition,
        upper_data: &Dataset,
        lower_data: &Dataset,
    ) -> Result<Self> {
        let (ul, uh) = upper_data.h_range();
        let (ll, lh) = lower_data.h_range();
        let (lo, hi) = (ul.min(ll), uh.max(lh));
        let pad = 0.05 * (hi - lo);
        let n = grid_size(upper_data.len() + lower_data.len());
        Self::with_grid(upper, lower, (lo - pad, hi + pad), n)
    }

    /// Picks a range for models without data: starting from the span of the
    /// component centers, the half-width doubles until the branch difference
    /// has the same sign at both ends and changes sign at least twice inside.
    /// Stops at the first such range, so far-field crossings of branches with
    /// unequal asymptotes stay outside.
    pub fn auto(upper: Superposition, lower: Superposition) -> Result<Self> {
        let centers: Vec<f64> =
            upper.components().iter().chain(lower.components()).map(|c| c.x_c).collect();
        let lo = centers.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (lo + hi);
        let mut half = (0.5 * (hi - lo)).max(min_width(&upper).min(min_width(&lower)));
        if !(half > 0.0) || !half.is_finite() {
            half = 1.0;
        }
        let diff = |x: f64| upper.eval(x).unwrap_or(f64::NAN) - lower.eval(x).unwrap_or(f64::NAN);
        let n_grid = grid_size(0);
        for _ in 0..MAX_DOUBLINGS {
            let (a, b) = (mid - half, mid + half);
            let (fa, fb) = (diff(a), diff(b));
            if fa != 0.0 && fb != 0.0 && fa.signum() == fb.signum() {
                let crossings = scan_sign_changes(diff, a, b, n_grid)?;
                if crossings.len() >= 2 {
                    return Self::with_grid(upper, lower, (a, b), n_grid);
                }
            }
            half *= 2.0;
        }
        let half = half / 2.0;
        Self::with_grid(upper, lower, (mid - half, mid + half), n_grid)
    }

    pub fn upper(&self) -> &Superposition {
        &self.upper
    }

    pub fn lower(&self) -> &Superposition {
        &self.lower
    }

    pub fn h_range(&self) -> (f64, f64) {
        self.h_range
    }

    fn is_single_curve(&self) -> bool {
        self.upper.len() == 1 && self.lower.len() == 1
    }
}

/// Two single S-curve branches sharing `(a, m)`, differing only in center.
pub fn representative_loop(
    a: f64,
    m: f64,
    upper_center: (f64, f64),
    lower_center: (f64, f64),
) -> Result<HysteresisLoop> {
    if !(a > 0.0) || !(m > 0.0) {
        return Err(Error::InvalidModel(format!("representative loop needs a > 0 and m > 0, got a = {a}, m = {m}")));
    }
    let branch = |(x_c, y_c): (f64, f64)| {
        SCurveParams::new(a, m, x_c, y_c)?;
        Superposition::new(a, vec![Component::new(1.0, m, x_c, y_c)])
    };
    HysteresisLoop::auto(branch(upper_center)?, branch(lower_center)?)
}

/// The two crossings of the branches, left to right.
pub fn intersections(lp: &HysteresisLoop) -> Result<(Point, Point)> {
    let diff = |x: f64| lp.upper.eval(x).unwrap_or(f64::NAN) - lp.lower.eval(x).unwrap_or(f64::NAN);
    let slope = |x: f64| lp.upper.d1(x).unwrap_or(f64::NAN) - lp.lower.d1(x).unwrap_or(f64::NAN);
    let (lo, hi) = lp.h_range;
    let crossings = scan_sign_changes(diff, lo, hi, lp.n_grid)?;
    if crossings.len() != 2 {
        return Err(Error::Topology { crossings });
    }
    let cfg = RootConfig::default();
    let point = |b| -> Result<Point> {
        let x = newton_safeguarded(diff, slope, b, &cfg)?;
        Ok(Point { x, y: 0.5 * (lp.upper.eval(x)? + lp.lower.eval(x)?) })
    };
    Ok((point(crossings[0])?, point(crossings[1])?))
}

/// Enclosed area, always `>= 0`: closed form along B for single S-curve
/// branches, adaptive quadrature along H otherwise.
pub fn loop_area(lp: &HysteresisLoop, pts: (Point, Point)) -> Result<f64> {
    if lp.is_single_curve() {
        closed_form_area(lp, pts)
    } else {
        quadrature_area(lp, pts)
    }
}

/// `|∫ (x_lower(y) - x_upper(y)) dy|` between the crossing levels. Single
/// S-curve branches only.
pub fn closed_form_area(lp: &HysteresisLoop, pts: (Point, Point)) -> Result<f64> {
    let (Some(up), Some(low)) = (sole(&lp.upper), sole(&lp.lower)) else {
        return Err(Error::InvalidModel("closed-form area needs single S-curve branches".into()));
    };
    let (y1, y2) = (pts.0.y, pts.1.y);
    let gap = antiderivative(lp.lower.a(), &low, y2) - antiderivative(lp.lower.a(), &low, y1)
        - (antiderivative(lp.upper.a(), &up, y2) - antiderivative(lp.upper.a(), &up, y1));
    Ok(gap.abs())
}

/// `|∫ (y_upper(x) - y_lower(x)) dx|` between the crossings, by adaptive
/// Simpson.
pub fn quadrature_area(lp: &HysteresisLoop, pts: (Point, Point)) -> Result<f64> {
    let diff = |x: f64| lp.upper.eval(x).unwrap_or(f64::NAN) - lp.lower.eval(x).unwrap_or(f64::NAN);
    Ok(adaptive_simpson(diff, pts.0.x, pts.1.x, AREA_REL_TOL)?.value.abs())
}

/// Intersections and area.
pub fn analyze(lp: &HysteresisLoop) -> Result<LoopAnalysis> {
    let (left, right) = intersections(lp)?;
    let area = loop_area(lp, (left, right))?;
    Ok(LoopAnalysis { left, right, area })
}

/// Subprocess values of each branch at `x`, `(upper, lower)`.
pub fn branch_subprocesses(lp: &HysteresisLoop, x: f64) -> Result<(SubprocessValues, SubprocessValues)> {
    Ok((lp.upper.decompose_subprocesses(x)?, lp.lower.decompose_subprocesses(x)?))
}

impl LoopAnalysis {
    /// JSON report with both branch models. The area is the raw B-H integral,
    /// an energy density per cycle.
    pub fn to_json(&self, lp: &HysteresisLoop) -> Value {
        json!({
            "left": { "x": sig9(self.left.x), "y": sig9(self.left.y) },
            "right": { "x": sig9(self.right.x), "y": sig9(self.right.y) },
            "area": sig9(self.area),
            "units": { "x": "A/m", "y": "T", "area": "J/m^3" },
            "h_range": [sig9(lp.h_range.0), sig9(lp.h_range.1)],
            "upper": model_value(&lp.upper),
            "lower": model_value(&lp.lower),
        })
    }
}

fn sole(sup: &Superposition) -> Option<Component> {
    match sup.components() {
        [c] if c.p != 0.0 && c.m != 0.0 => Some(*c),
        _ => None,
    }
}

/// `∫ x dy` along the branch `y = p (y_c + u)`: with `u = y/p - y_c`,
/// `dy = p du` and `x = (a u^3 + u)/m + x_c`.
fn antiderivative(a: f64, c: &Component, y: f64) -> f64 {
    let u = y / c.p - c.y_c;
    let u2 = u * u;
    c.p * ((a * u2 * u2 / 4.0 + u2 / 2.0) / c.m + c.x_c * u)
}

/// Narrowest transition width `1/(|m| sqrt(a))` among the components.
fn min_width(sup: &Superposition) -> f64 {
    let sa = sup.a().sqrt().max(f64::MIN_POSITIVE);
    sup.components()
        .iter()
        .filter(|c| c.m != 0.0)
        .map(|c| 1.0 / (c.m.abs() * sa))
        .fold(f64::INFINITY, f64::min)
}

fn check_monotone(branch: &'static str, sup: &Superposition, lo: f64, hi: f64, n: usize) -> Result<()> {
    let step = (hi - lo) / (n - 1) as f64;
    for i in 0..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        if !(sup.d1(x)? >= 0.0) {
            return Err(Error::NotMonotone { branch, x });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    /// Roots of `3aΔ u² - 3aΔ² u + aΔ³ + Δ - m(x_c2 - x_c1) = 0`, the
    /// condition that both inverse maps give the same x at `u = y - y_c1`.
    fn analytic_crossings(a: f64, m: f64, c1: (f64, f64), c2: (f64, f64)) -> (f64, f64) {
        let d = c2.1 - c1.1;
        let (qa, qb, qc) = (3.0 * a * d, -3.0 * a * d * d, a * d.powi(3) + d - m * (c2.0 - c1.0));
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        let (u1, u2) = ((-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa));
        let (lo, hi) = (u1.min(u2), u1.max(u2));
        (c1.1 + lo, c1.1 + hi)
    }

    fn representative() -> HysteresisLoop {
        let p = fixtures::representative_params();
        representative_loop(p.a, p.m, p.upper_center, p.lower_center).unwrap()
    }

    #[test]
    fn representative_crossings_match_quadratic() {
        let p = fixtures::representative_params();
        let lp = representative();
        let (left, right) = intersections(&lp).unwrap();
        let (y1, y2) = analytic_crossings(p.a, p.m, p.upper_center, p.lower_center);
        assert!((left.y - y1).abs() < 1e-8, "{left:?} vs {y1}");
        assert!((right.y - y2).abs() < 1e-8, "{right:?} vs {y2}");
        assert!((0.5 * (y1 + y2) - 19.5).abs() < 1e-9);
        assert!((0.5 * (y2 - y1) - 74.14).abs() < 0.01);
        let span = y2 - y1;
        for pt in [left, right] {
            let gap = lp.upper().eval(pt.x).unwrap() - lp.lower().eval(pt.x).unwrap();
            assert!(gap.abs() <= 1e-10 * span, "{gap}");
        }
    }

    #[test]
    fn representative_area() {
        let r = analyze(&representative()).unwrap();
        assert!((r.area - 1033.57).abs() / 1033.57 < 5e-3, "{r:?}");
    }

    #[test]
    fn closed_form_and_quadrature_agree() {
        for (a, m, c1, c2) in [
            (0.002, 41.0, (-4.4, 13.0), (6.4, 26.0)),
            (1.5, 0.3, (-2.0, 0.0), (2.0, 0.1)),
            (15.0, 0.13, (-30.0, 0.0), (30.0, 0.05)),
        ] {
            let lp = representative_loop(a, m, c1, c2).unwrap();
            let pts = intersections(&lp).unwrap();
            let exact = closed_form_area(&lp, pts).unwrap();
            let numeric = quadrature_area(&lp, pts).unwrap();
            assert!((exact - numeric).abs() <= 1e-6 * exact, "{exact} {numeric}");
        }
    }

    #[test]
    fn swapping_centers_keeps_area() {
        let p = fixtures::representative_params();
        let a = analyze(&representative()).unwrap();
        let swapped = representative_loop(p.a, p.m, p.lower_center, p.upper_center).unwrap();
        let b = analyze(&swapped).unwrap();
        assert!((a.area - b.area).abs() < 1e-9 * a.area);
        assert!((a.left.x - b.left.x).abs() < 1e-9 && (a.right.y - b.right.y).abs() < 1e-9);
    }

    #[test]
    fn translation_invariance() {
        let base = analyze(&representative_loop(1.5, 0.3, (-2.0, 0.0), (2.0, 0.1)).unwrap()).unwrap();
        let moved =
            analyze(&representative_loop(1.5, 0.3, (-2.0 + 37.0, -4.0), (2.0 + 37.0, 0.1 - 4.0)).unwrap())
                .unwrap();
        assert!((base.area - moved.area).abs() < 1e-9 * base.area);
        assert!((moved.left.x - base.left.x - 37.0).abs() < 1e-9);
        assert!((moved.left.y - base.left.y + 4.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_loop() {
        let lp = representative_loop(0.002, 41.0, (1.0, 2.0), (1.0, 2.0)).unwrap();
        assert!(matches!(intersections(&lp), Err(Error::Topology { .. })));
        let pts = (Point { x: -3.0, y: -5.0 }, Point { x: 3.0, y: 9.0 });
        assert_eq!(loop_area(&lp, pts).unwrap(), 0.0);
    }

    #[test]
    fn single_crossing_is_a_topology_error() {
        let up = Superposition::new(1.0, vec![Component::new(1.0, 1.0, 0.0, 0.0)]).unwrap();
        let low = Superposition::new(1.0, vec![Component::new(1.0, 1.0, 0.0, 0.0), Component::new(0.0, 1.0, 0.0, 0.0)]).unwrap();
        let shifted = Superposition::new(1.0, vec![Component::new(1.0, 1.0, 0.0, 0.5)]).unwrap();
        let lp = HysteresisLoop::new(up.clone(), shifted, (-10.0, 10.0)).unwrap();
        match intersections(&lp) {
            Err(Error::Topology { crossings }) => assert!(crossings.is_empty()),
            other => panic!("{other:?}"),
        }
        let lp = HysteresisLoop::new(up, low, (-10.0, 10.0)).unwrap();
        assert!(matches!(intersections(&lp), Err(Error::Topology { .. })));
    }

    #[test]
    fn decreasing_branch_rejected() {
        let up = Superposition::new(1.0, vec![Component::new(-1.0, 1.0, 0.0, 0.0)]).unwrap();
        let low = Superposition::new(1.0, vec![Component::new(1.0, 1.0, 0.0, 0.0)]).unwrap();
        assert!(matches!(
            HysteresisLoop::new(up, low, (-1.0, 1.0)),
            Err(Error::NotMonotone { branch: "upper", .. })
        ));
    }

    #[test]
    fn fitted_pair_crossings_are_on_both_branches() {
        let lp = HysteresisLoop::auto(fixtures::ferrite_upper(), fixtures::ferrite_lower()).unwrap();
        let r = analyze(&lp).unwrap();
        assert!(r.left.x < r.right.x && r.area > 0.0);
        // Regression values for the bundled model files.
        assert!((r.left.x + 110.436_960_809_399).abs() < 1e-6, "{r:?}");
        assert!((r.right.x - 64.872_880_352_192).abs() < 1e-6, "{r:?}");
        assert!((r.area - 12.843_639_137_413).abs() < 1e-6 * 12.84, "{r:?}");
        // The auto range stops before the far crossing near H = -1.17e4.
        assert!(lp.h_range().0 > -5000.0);
    }

    #[test]
    fn subprocesses_per_branch() {
        let lp = representative();
        let (up, low) = branch_subprocesses(&lp, -4.4).unwrap();
        assert!((up.s_one + up.s_two).abs() < 1e-12);
        for x in [-30.0, 0.0, 12.0] {
            let (up, low2) = branch_subprocesses(&lp, x).unwrap();
            assert!((up.total() - lp.upper().eval(x).unwrap()).abs() < 1e-10 * 100.0);
            assert!((low2.total() - lp.lower().eval(x).unwrap()).abs() < 1e-10 * 100.0);
        }
        assert!(low.offset == 26.0);
        let ferrite = HysteresisLoop::auto(fixtures::ferrite_upper(), fixtures::ferrite_lower()).unwrap();
        let (mag, diss) = ferrite.upper().split_by_sign();
        assert!(mag.unwrap().components()[0].p > 0.0);
        assert!(diss.unwrap().components()[0].p < 0.0);
    }

    #[test]
    fn report_fields() {
        let lp = representative();
        let v = analyze(&lp).unwrap().to_json(&lp);
        for key in ["left", "right", "area", "upper", "lower"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: Superposition = serde_json::from_value(v["upper"].clone()).unwrap();
        assert_eq!(&back, lp.upper());
    }
}
