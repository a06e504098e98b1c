//! Reference checks on the bundled loop models, rendered as a pass/fail table.

use std::fmt::Write as _;

use crate::error::Result;
use crate::fixtures::{self, LoopParams};
use crate::hysteresis::{analyze, representative_loop, HysteresisLoop};
use crate::profiling::{inflection, SearchRange};
use crate::report::sig9;
use crate::superposition::Superposition;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

impl Check {
    fn value(name: &str, expected: f64, got: f64, tol: f64, relative: bool) -> Self {
        let err = if relative { (got - expected).abs() / expected.abs() } else { (got - expected).abs() };
        let bound = if relative { format!("{}%", tol * 100.0) } else { format!("{tol}") };
        Self {
            name: name.into(),
            expected: format!("{expected} ± {bound}"),
            got: format!("{}", sig9(got)),
            pass: err <= tol,
        }
    }

    fn failed(name: &str, expected: &str, err: impl std::fmt::Display) -> Self {
        Self { name: name.into(), expected: expected.into(), got: format!("error: {err}"), pass: false }
    }
}

/// Inputs of the demo as JSON text, so that damaged copies can be checked.
#[derive(Debug, Clone, Copy)]
pub struct Inputs<'a> {
    pub upper: &'a str,
    pub lower: &'a str,
    pub representative: &'a str,
}

impl Default for Inputs<'static> {
    fn default() -> Self {
        Self {
            upper: fixtures::FERRITE_UPPER_JSON,
            lower: fixtures::FERRITE_LOWER_JSON,
            representative: fixtures::REPRESENTATIVE_LOOP_JSON,
        }
    }
}

pub fn run() -> Vec<Check> {
    run_with(Inputs::default())
}

pub fn run_with(inputs: Inputs<'_>) -> Vec<Check> {
    let mut checks = Vec::new();
    representative_checks(inputs.representative, &mut checks);
    let branches = Superposition::from_json(inputs.upper)
        .map_err(|e| ("upper model", e))
        .and_then(|u| Superposition::from_json(inputs.lower).map(|l| (u, l)).map_err(|e| ("lower model", e)));
    match branches {
        Ok((upper, lower)) => {
            fitted_loop_checks(&upper, &lower, &mut checks);
            permeability_checks(&upper, &lower, &mut checks);
        }
        Err((which, e)) => checks.push(Check::failed(which, "valid model file", e)),
    }
    checks
}

fn representative_checks(text: &str, out: &mut Vec<Check>) {
    let name = "representative loop area";
    let result = serde_json::from_str::<LoopParams>(text)
        .map_err(crate::Error::from)
        .and_then(|p| representative_loop(p.a, p.m, p.upper_center, p.lower_center))
        .and_then(|lp| analyze(&lp));
    out.push(match result {
        Ok(r) => Check::value(name, 1033.57, r.area, 5e-3, true),
        Err(e) => Check::failed(name, "1033.57 ± 0.5%", e),
    });
}

fn fitted_loop_checks(upper: &Superposition, lower: &Superposition, out: &mut Vec<Check>) {
    match HysteresisLoop::auto(upper.clone(), lower.clone()).and_then(|lp| analyze(&lp)) {
        Ok(r) => {
            out.push(Check::value("fitted loop left crossing H", -106.093, r.left.x, 1e-2, true));
            out.push(Check::value("fitted loop left crossing B", -0.346, r.left.y, 5e-3, false));
            out.push(Check::value("fitted loop right crossing H", 105.503, r.right.x, 1e-2, true));
            out.push(Check::value("fitted loop right crossing B", 0.346, r.right.y, 5e-3, false));
            out.push(Check::value("fitted loop area", 14.74, r.area, 2e-2, true));
        }
        Err(e) => out.push(Check::failed("fitted loop", "two crossings", e)),
    }
}

fn permeability_checks(upper: &Superposition, lower: &Superposition, out: &mut Vec<Check>) {
    for (branch, sup, m0, x0) in [("upper", upper, 0.00976, -11.99), ("lower", lower, 0.0099, 11.698)] {
        match max_permeability(sup) {
            Ok((x, m)) => {
                out.push(Check::value(&format!("{branch} branch max permeability"), m0, m, 1e-2, true));
                out.push(Check::value(&format!("{branch} branch max permeability H"), x0, x, 0.5, false));
            }
            Err(e) => out.push(Check::failed(&format!("{branch} branch max permeability"), "one inflection", e)),
        }
    }
}

/// `(x0, m0)` of a branch.
pub fn max_permeability(sup: &Superposition) -> Result<(f64, f64)> {
    let i = inflection(sup, &SearchRange::around(sup))?;
    Ok((i.x0, i.m0))
}

pub fn render(checks: &[Check]) -> String {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let we = checks.iter().map(|c| c.expected.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let pad = we - c.expected.chars().count();
        let _ = writeln!(s, "{status}  {:<w$}  expected {}{}  got {}", c.name, c.expected, " ".repeat(pad), c.got);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(s, "{} checks, {failed} failed", checks.len());
    s
}
