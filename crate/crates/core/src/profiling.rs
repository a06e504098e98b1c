//! Profile measures of a fitted curve.
//!
//! The inflection `(x0, y0)` solves `y_net'' = 0` and carries the maximum
//! permeability `m0 = y_net'(x0)`. The curvature extrema `x1 < x0 < x2` solve
//! `y_net''' = 0`. Forcing the representative curve
//! `a0 (y - y0)^3 + (y - y0) = m0 (x - x0)` through `(x1, y1)` and `(x2, y2)`
//! gives two values of `a0`; their spread measures how far the curve is from a
//! symmetric, ideal S-curve.

use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::report::sig9;
use crate::rootfind::{grid_size, newton_safeguarded, scan_sign_changes, RootConfig};
use crate::superposition::Superposition;

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 4.0 * std::f64::consts::PI * 1e-7;

/// Closed interval searched for roots, with its scan density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRange {
    pub lo: f64,
    pub hi: f64,
    pub n_grid: usize,
}

impl SearchRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, n_grid: grid_size(0) }
    }

    /// Range of a dataset, scanned with `max(256, 4 * samples)` nodes.
    pub fn of(data: &Dataset) -> Self {
        let (lo, hi) = data.h_range();
        Self { lo, hi, n_grid: grid_size(data.len()) }
    }

    /// Range for a model without data: the span of the component centers
    /// widened by four transition widths `1/(|m| sqrt(a))` of the broadest
    /// component.
    pub fn around(sup: &Superposition) -> Self {
        let cs = sup.components();
        let lo = cs.iter().map(|c| c.x_c).fold(f64::INFINITY, f64::min);
        let hi = cs.iter().map(|c| c.x_c).fold(f64::NEG_INFINITY, f64::max);
        let sa = sup.a().sqrt();
        let width = cs
            .iter()
            .filter(|c| c.m != 0.0)
            .map(|c| 1.0 / (c.m.abs() * sa))
            .fold(0.0, f64::max);
        let pad = if width.is_finite() && width > 0.0 { 4.0 * width } else { (hi - lo).max(1.0) };
        Self::new(lo - pad, hi + pad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inflection {
    pub x0: f64,
    pub y0: f64,
    pub m0: f64,
}

/// `a0` bounds. `from_x1`/`from_x2` keep the raw value produced at each
/// curvature extremum; `a1 <= a2` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AInterval {
    pub a1: f64,
    pub a2: f64,
    pub from_x1: f64,
    pub from_x2: f64,
}

impl AInterval {
    pub fn width(&self) -> f64 {
        self.a2 - self.a1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Knee {
    pub x_k: f64,
    pub y_k: f64,
    /// `|y''|` vanishes on the whole range; the point is an arbitrary endpoint.
    pub flat: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveProfile {
    pub x0: f64,
    pub y0: f64,
    pub m0: f64,
    pub curvature_extrema: Option<(f64, f64)>,
    pub a_interval: std::result::Result<AInterval, String>,
    pub pct_nonlinearity: f64,
    pub damped_measure: f64,
    pub knee: Option<Knee>,
    pub relative_permeability: f64,
    pub warnings: Vec<String>,
}

impl CurveProfile {
    /// JSON report; numbers rounded to 9 significant digits.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "x0": sig9(self.x0),
            "y0": sig9(self.y0),
            "m0": sig9(self.m0),
            "pct_nonlinearity": sig9(self.pct_nonlinearity),
            "damped_measure": sig9(self.damped_measure),
            "relative_permeability": sig9(self.relative_permeability),
            "units": {
                "x0": "A/m", "y0": "T", "m0": "H/m", "a_interval": "T^-2",
                "damped_measure": "H/m", "x_k": "A/m", "y_k": "T"
            },
        });
        match &self.a_interval {
            Ok(iv) => {
                v["a_interval"] = json!([sig9(iv.a1), sig9(iv.a2)]);
            }
            Err(reason) => {
                v["a_interval"] = json!("unavailable");
                v["a_interval_reason"] = json!(reason);
            }
        }
        if let Some((x1, x2)) = self.curvature_extrema {
            v["curvature_extrema"] = json!([sig9(x1), sig9(x2)]);
        }
        v["knee"] = match self.knee {
            Some(k) => json!({ "x_k": sig9(k.x_k), "y_k": sig9(k.y_k), "flat": k.flat }),
            None => Value::Null,
        };
        if !self.warnings.is_empty() {
            v["warnings"] = json!(self.warnings);
        }
        v
    }
}

/// Locates the single inflection in `range`.
pub fn inflection(sup: &Superposition, range: &SearchRange) -> Result<Inflection> {
    let d2 = |x: f64| sup.d2(x).unwrap_or(f64::NAN);
    let d3 = |x: f64| sup.d3(x).unwrap_or(f64::NAN);
    let brackets = scan_sign_changes(d2, range.lo, range.hi, range.n_grid)?;
    if brackets.len() != 1 {
        return Err(Error::AmbiguousInflection { brackets });
    }
    let x0 = newton_safeguarded(d2, d3, brackets[0], &RootConfig::default())?;
    let (y0, m0, _, _) = sup.derivatives(x0)?;
    Ok(Inflection { x0, y0, m0 })
}

/// Roots of `y'''` nearest to the inflection on either side.
pub fn curvature_extrema(sup: &Superposition, range: &SearchRange) -> Result<(f64, f64)> {
    if sup.a() == 0.0 {
        return Err(Error::ExtremaNotInData { left: 0, right: 0 });
    }
    let x0 = inflection(sup, range)?.x0;
    let roots = third_derivative_roots(sup, range)?;
    let left: Vec<f64> = roots.iter().copied().filter(|&r| r < x0).collect();
    let right: Vec<f64> = roots.iter().copied().filter(|&r| r > x0).collect();
    match (left.last(), right.first()) {
        (Some(&x1), Some(&x2)) => Ok((x1, x2)),
        _ => Err(Error::ExtremaNotInData { left: left.len(), right: right.len() }),
    }
}

/// `a0` from each curvature extremum:
/// `a_i = (m0 (x_i - x0) - (y_i - y0)) / (y_i - y0)^3`.
pub fn a0_interval(sup: &Superposition, infl: &Inflection, x1: f64, x2: f64) -> Result<AInterval> {
    let y1 = sup.eval(x1)?;
    let y2 = sup.eval(x2)?;
    let floor = 1e-9 * (y2 - y1).abs();
    let raw = |x: f64, y: f64| {
        let dy = y - infl.y0;
        if !(dy.abs() > floor) {
            return Err(Error::SingularInterval { x, delta: dy });
        }
        Ok((infl.m0 * (x - infl.x0) - dy) / (dy * dy * dy))
    };
    let from_x1 = raw(x1, y1)?;
    let from_x2 = raw(x2, y2)?;
    Ok(AInterval { a1: from_x1.min(from_x2), a2: from_x1.max(from_x2), from_x1, from_x2 })
}

/// `|Σ p_i m_i - m0| / m0`, over all components.
pub fn pct_nonlinearity(sup: &Superposition, m0: f64) -> Result<f64> {
    if m0 == 0.0 {
        return Err(Error::ZeroPermeability);
    }
    Ok((sup.slope_sum() - m0).abs() / m0.abs())
}

/// `m / (1 + a)`.
pub fn damped_measure(m: f64, a: f64) -> f64 {
    m / (1.0 + a)
}

/// Point of maximum `|y''|` on the range: interior roots of `y'''` compete with
/// the two endpoints, which may win when the data clips the curvature peak.
pub fn knee_point(sup: &Superposition, range: &SearchRange) -> Result<Knee> {
    let mut candidates = vec![range.lo, range.hi];
    if sup.a() > 0.0 {
        candidates.extend(third_derivative_roots(sup, range)?);
    }
    let mut best = (range.lo, -1.0);
    for x in candidates {
        let curvature = sup.d2(x)?.abs();
        if curvature > best.1 {
            best = (x, curvature);
        }
    }
    Ok(Knee { x_k: best.0, y_k: sup.eval(best.0)?, flat: best.1 == 0.0 })
}

/// Inflection, maximum permeability, `a0` interval and the derived measures.
/// When the curvature extrema fall outside the range, the interval is
/// replaced by the reason.
pub fn profile(sup: &Superposition, range: &SearchRange) -> Result<CurveProfile> {
    let infl = inflection(sup, range)?;
    let extrema = curvature_extrema(sup, range);
    let curvature_extrema = extrema.as_ref().ok().copied();
    let a_interval = extrema
        .and_then(|(x1, x2)| a0_interval(sup, &infl, x1, x2))
        .map_err(|e| e.to_string());
    Ok(CurveProfile {
        x0: infl.x0,
        y0: infl.y0,
        m0: infl.m0,
        curvature_extrema,
        a_interval,
        pct_nonlinearity: pct_nonlinearity(sup, infl.m0)?,
        damped_measure: damped_measure(infl.m0, sup.a()),
        knee: Some(knee_point(sup, range)?),
        relative_permeability: infl.m0 / MU_0,
        warnings: Vec::new(),
    })
}

/// Fewer samples than this between the curvature extrema trigger a warning.
pub const MIN_SAMPLES_IN_INTERVAL: usize = 5;

/// [`profile`] over the dataset's H range, flagging intervals resolved by too
/// few samples.
pub fn profile_dataset(sup: &Superposition, data: &Dataset) -> Result<CurveProfile> {
    let mut p = profile(sup, &SearchRange::of(data))?;
    if let Some((x1, x2)) = p.curvature_extrema {
        let inside = data.samples().iter().filter(|s| s.h >= x1 && s.h <= x2).count();
        if inside < MIN_SAMPLES_IN_INTERVAL {
            p.warnings.push(format!(
                "only {inside} samples between the curvature extrema; the a0 interval is poorly constrained"
            ));
        }
    }
    Ok(p)
}

fn third_derivative_roots(sup: &Superposition, range: &SearchRange) -> Result<Vec<f64>> {
    let d3 = |x: f64| sup.d3(x).unwrap_or(f64::NAN);
    let d4 = |x: f64| {
        // d4 by differentiating d3 numerically; only steers Newton.
        let h = 1e-6 * (range.hi - range.lo).max(x.abs() * 1e-3);
        (d3(x + h) - d3(x - h)) / (2.0 * h)
    };
    let cfg = RootConfig::default();
    scan_sign_changes(d3, range.lo, range.hi, range.n_grid)?
        .into_iter()
        .map(|b| match newton_safeguarded(d3, d4, b, &cfg) {
            Err(Error::NoConvergence { best, .. }) => Ok(best),
            other => other,
        })
        .collect()
}
