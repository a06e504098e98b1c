//! Least-squares fitting of S-curves and superpositions to B-H data.
//!
//! Inflection centers are picked from the data and frozen. The free
//! parameters are `log a` and, per component, `(p_i, m_i)`; the optimizer is a
//! Levenberg-Marquardt iteration on the normal equations. Jacobian columns come
//! from implicit differentiation of the cubic, so they stay exact when `a`
//! becomes tiny and the curve degenerates to a line.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scurve::{solve_cubic, SCurveParams};
use crate::superposition::{Component, Superposition};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterStrategy {
    /// Data samples nearest to equally spaced levels of the B range.
    #[default]
    Quantile,
    /// Explicit `(x_c, y_c)` centers, one per component.
    User(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub n_curves: usize,
    pub center_strategy: CenterStrategy,
    /// All components share one `a`. Only `true` is supported.
    pub share_a: bool,
    pub max_iter: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub residual_tol: f64,
    pub damping_init: f64,
    /// Inclusive sample index range used by [`fit_two_param`].
    pub weight_range: Option<(usize, usize)>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_curves: 1,
            center_strategy: CenterStrategy::Quantile,
            share_a: true,
            max_iter: 200,
            residual_tol: 1e-10,
            damping_init: 1e-3,
            weight_range: None,
        }
    }
}

impl FitConfig {
    pub fn with_curves(n_curves: usize) -> Self {
        Self { n_curves, ..Self::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    fn validate(&self, data: &Dataset) -> Result<()> {
        if !self.share_a {
            return Err(Error::InvalidModel("per-component a is not supported".into()));
        }
        if self.n_curves == 0 || self.n_curves > data.len() / 2 {
            return Err(Error::InvalidModel(format!(
                "n_curves must be in 1..={} for {} samples, got {}",
                data.len() / 2,
                data.len(),
                self.n_curves
            )));
        }
        if !(self.damping_init > 0.0) || !(self.residual_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidModel("damping_init, residual_tol and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: Superposition,
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squared residuals after each accepted step, starting with the
    /// initial guess.
    pub cost_history: Vec<f64>,
}

/// Picks `n` data samples as inflection centers: for each level
/// `b_min + k/(n+1) * (b_max - b_min)`, `k = 1..=n`, the nearest unused sample
/// with a B value not already taken. Returned in increasing B.
pub fn select_centers(data: &Dataset, n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::Selection("at least one center is required".into()));
    }
    if n > data.len() / 2 {
        return Err(Error::Selection(format!(
            "{n} centers requested from {} samples (max {})",
            data.len(),
            data.len() / 2
        )));
    }
    let samples = data.samples();
    let mut distinct: Vec<f64> = samples.iter().map(|s| s.b).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < n {
        return Err(Error::Selection(format!(
            "only {} distinct B values for {n} centers",
            distinct.len()
        )));
    }

    let (b_min, b_max) = data.b_range();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for k in 1..=n {
        let level = b_min + (b_max - b_min) * k as f64 / (n + 1) as f64;
        let pick = samples
            .iter()
            .enumerate()
            .filter(|(_, s)| chosen.iter().all(|&c| samples[c].b != s.b))
            .min_by(|(i, s), (j, t)| {
                (s.b - level).abs().total_cmp(&(t.b - level).abs()).then(i.cmp(j))
            })
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Selection("ran out of distinct samples".into()))?;
        chosen.push(pick);
    }
    chosen.sort_by(|&i, &j| samples[i].b.total_cmp(&samples[j].b).then(i.cmp(&j)));
    Ok(chosen.into_iter().map(|i| (samples[i].h, samples[i].b)).collect())
}

/// Mean `(h, b)` of the samples in an inclusive index range; a natural center
/// for a two-parameter fit over that range.
pub fn mean_center(data: &Dataset, range: (usize, usize)) -> Result<(f64, f64)> {
    let picked = slice_range(data, Some(range))?;
    let n = picked.len() as f64;
    let (sh, sb) = picked.iter().fold((0.0, 0.0), |(h, b), s| (h + s.h, b + s.b));
    Ok((sh / n, sb / n))
}

/// Fits `(a, m)` of a single S-curve with its inflection fixed at `center`.
pub fn fit_two_param(data: &Dataset, center: (f64, f64), cfg: &FitConfig) -> Result<SCurveParams> {
    if !cfg.share_a || !(cfg.damping_init > 0.0) || cfg.max_iter == 0 {
        return Err(Error::InvalidModel("invalid fit configuration".into()));
    }
    let samples = slice_range(data, cfg.weight_range)?;
    let fit = single_curve(samples, center, cfg)?;
    if !fit.converged {
        return Err(Error::FitFailed {
            reason: format!("no convergence in {} iterations", fit.iterations),
            best: Box::new(fit),
        });
    }
    Ok(fit.model.components()[0].curve(fit.model.a()))
}

/// Unit-weight S-curve through `center`. With one component the weight is
/// pinned to 1: `(p, a, m)` and `(p s, a s^2, m / s)` give the same curve
/// when `y_c = 0`.
fn single_curve(samples: &[crate::dataset::Sample], center: (f64, f64), cfg: &FitConfig) -> Result<FitResult> {
    if samples.len() < 2 {
        return Err(Error::Dataset("two-parameter fit needs at least two samples".into()));
    }
    let (x_c, y_c) = center;
    let span = b_span(samples);
    let a0 = 1.0 / (span * span);
    let m0 = secant_near(samples, x_c);
    let xs: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.b).collect();

    let model = |theta: &[f64], out: &mut [f64], mut jac: Option<&mut DMatrix<f64>>| {
        let a = theta[0].exp();
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            let (u, d) = component_partials(a, 1.0, theta[1], x - x_c);
            out[i] = u + y_c - y;
            if let Some(j) = jac.as_deref_mut() {
                j[(i, 0)] = d[0];
                j[(i, 1)] = d[2];
            }
        }
    };
    let problem = Problem {
        theta0: vec![a0.ln(), m0],
        log_a_bounds: (a0.ln() - LOG_A_SPAN, a0.ln() + LOG_A_SPAN),
        n_residuals: xs.len(),
        y_span: span,
    };
    let outcome = levenberg_marquardt(&problem, &model, cfg);
    let params = SCurveParams { a: outcome.theta[0].exp(), m: outcome.theta[1], x_c, y_c };
    let result = FitResult {
        model: Superposition::single(params)?,
        rms_residual: (outcome.cost / xs.len() as f64).sqrt(),
        iterations: outcome.iterations,
        converged: outcome.converged,
        cost_history: outcome.cost_history,
    };
    match outcome.failure {
        Some(reason) => Err(Error::FitFailed { reason, best: Box::new(result) }),
        None => Ok(result),
    }
}

/// Fits the n-term superposition with frozen centers. A single term is
/// fitted with unit weight, as in [`fit_two_param`].
///
/// Returns `converged: false` when the iteration cap is hit, and
/// [`Error::FitFailed`] when damping escalation can no longer find a descent
/// step away from a stationary point.
pub fn fit_superposition(data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate(data)?;
    let n = cfg.n_curves;
    let centers = match &cfg.center_strategy {
        CenterStrategy::Quantile => select_centers(data, n)?,
        CenterStrategy::User(list) => {
            if list.len() != n {
                return Err(Error::Selection(format!(
                    "{} user centers given for {n} curves",
                    list.len()
                )));
            }
            list.clone()
        }
    };
    let samples = data.samples();
    let span = data.b_span();
    if !(span > 0.0) {
        return Err(Error::Dataset("B is constant".into()));
    }
    if n == 1 {
        return single_curve(samples, centers[0], cfg);
    }
    let a0 = 1.0 / (span * span);

    let xs: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.b).collect();
    let secants: Vec<f64> = centers.iter().map(|&(x_c, _)| secant_near(samples, x_c)).collect();
    let starts = initial_guesses(&xs, &ys, &centers, &secants, a0);
    let model = |theta: &[f64], out: &mut [f64], mut jac: Option<&mut DMatrix<f64>>| {
        let a = theta[0].exp();
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            let mut v = 0.0;
            let mut d_log_a = 0.0;
            for (k, &(x_c, y_c)) in centers.iter().enumerate() {
                let (p, m) = (theta[1 + 2 * k], theta[2 + 2 * k]);
                let (u, d) = component_partials(a, p, m, x - x_c);
                v += p * (u + y_c);
                if let Some(j) = jac.as_deref_mut() {
                    d_log_a += d[0];
                    j[(i, 1 + 2 * k)] = d[1] + y_c;
                    j[(i, 2 + 2 * k)] = d[2];
                }
            }
            out[i] = v - y;
            if let Some(j) = jac.as_deref_mut() {
                j[(i, 0)] = d_log_a;
            }
        }
    };
    let mut best: Option<Outcome> = None;
    for theta0 in starts {
        let problem = Problem {
            theta0,
            log_a_bounds: (a0.ln() - LOG_A_SPAN, a0.ln() + LOG_A_SPAN),
            n_residuals: xs.len(),
            y_span: span,
        };
        let run = levenberg_marquardt(&problem, &model, cfg);
        let better = match &best {
            None => true,
            Some(b) => (run.failure.is_none(), -run.cost) > (b.failure.is_none(), -b.cost),
        };
        let exact = run.failure.is_none() && run.cost <= exact_cost(span, xs.len());
        if better {
            best = Some(run);
        }
        if exact {
            break;
        }
    }
    let outcome = best.expect("at least one start");

    let components = centers
        .iter()
        .enumerate()
        .map(|(k, &(x_c, y_c))| Component::new(outcome.theta[1 + 2 * k], outcome.theta[2 + 2 * k], x_c, y_c))
        .collect();
    let result = FitResult {
        model: Superposition::new(outcome.theta[0].exp(), components)?,
        rms_residual: (outcome.cost / xs.len() as f64).sqrt(),
        iterations: outcome.iterations,
        converged: outcome.converged,
        cost_history: outcome.cost_history,
    };
    match outcome.failure {
        Some(reason) => Err(Error::FitFailed { reason, best: Box::new(result) }),
        None => Ok(result),
    }
}

/// `log a` may move this far (in nats) from its initial guess.
const LOG_A_SPAN: f64 = 30.0;
/// Starting points refined by Levenberg-Marquardt, best first.
const MULTI_START: usize = 4;

/// rms at or below 1e-13 of the B span counts as an exact fit.
fn exact_cost(y_span: f64, n_res: usize) -> f64 {
    (1e-13 * y_span).powi(2) * n_res as f64
}

/// Multipliers applied to the secant slopes. Every combination of
/// [`SLOPE_FACTORS`] while that stays small, otherwise geometric spreads
/// across the components.
fn slope_patterns(n: usize) -> Vec<Vec<f64>> {
    if SLOPE_FACTORS.len().pow(n as u32) <= MAX_PATTERNS {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    SLOPE_FACTORS.iter().map(move |&f| {
                        let mut q = p.clone();
                        q.push(f);
                        q
                    })
                })
                .collect();
        }
        out
    } else {
        SLOPE_FACTORS
            .iter()
            .map(|&r| (0..n).map(|j| r.powf(j as f64 / (n - 1) as f64 * 2.0 - 1.0)).collect())
            .collect()
    }
}

const SLOPE_FACTORS: [f64; 5] = [1.0, 0.2, 0.5, 2.0, 5.0];
const MAX_PATTERNS: usize = 125;

/// Candidate starting points, ranked by cost. `a` runs over half decades
/// around `a0`; the slopes are the local secants, also spread geometrically
/// across components so that terms with unequal slopes can separate. For
/// each `(a, m)` the weights, in which the model is linear, are solved by
/// least squares.
fn initial_guesses(xs: &[f64], ys: &[f64], centers: &[(f64, f64)], secants: &[f64], a0: f64) -> Vec<Vec<f64>> {
    let n = centers.len();
    let target = DVector::from_column_slice(ys);
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    let patterns = slope_patterns(n);
    for k in -8..=8 {
        let a = a0 * 10f64.powf(0.5 * k as f64);
        for pattern in &patterns {
            let ms: Vec<f64> = secants.iter().zip(pattern).map(|(m, f)| m * f).collect();
            let basis = DMatrix::from_fn(xs.len(), n, |i, j| solve_cubic(a, ms[j] * (xs[i] - centers[j].0)) + centers[j].1);
            let p = match basis.clone().svd(true, true).solve(&target, 1e-12) {
                Ok(p) if p.iter().all(|v| v.is_finite()) => p,
                _ => DVector::from_element(n, 1.0 / n as f64),
            };
            let cost = (&basis * &p - &target).norm_squared();
            if !cost.is_finite() {
                continue;
            }
            let mut theta = vec![a.ln()];
            for j in 0..n {
                theta.extend([p[j], ms[j]]);
            }
            scored.push((cost, theta));
        }
    }
    scored.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut starts: Vec<Vec<f64>> = scored.into_iter().take(MULTI_START).map(|(_, t)| t).collect();
    // The plain guess p = 1/n at a0 always competes.
    let mut plain = vec![a0.ln()];
    for &m in secants {
        plain.extend([1.0 / n as f64, m]);
    }
    starts.push(plain);
    starts
}
const MAX_DAMPING: f64 = 1e16;
/// Residual/column cosine below which a point counts as stationary.
const GRADIENT_TOL: f64 = 1e-10;
/// Looser cosine accepted when damping escalation stalls.
const STALL_GRADIENT_TOL: f64 = 1e-6;

struct Problem {
    theta0: Vec<f64>,
    log_a_bounds: (f64, f64),
    n_residuals: usize,
    y_span: f64,
}

struct Outcome {
    theta: Vec<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
    cost_history: Vec<f64>,
    failure: Option<String>,
}

/// Residuals `model - data` and, when requested, their Jacobian.
type Model<'a> = dyn Fn(&[f64], &mut [f64], Option<&mut DMatrix<f64>>) + 'a;

/// Residual derivatives of one component `p (u + y_c)` with respect to
/// `(log a, p, m)`, from implicit differentiation of `a u^3 + u = m dx`.
fn component_partials(a: f64, p: f64, m: f64, dx: f64) -> (f64, [f64; 3]) {
    let u = solve_cubic(a, m * dx);
    let w = 1.0 + 3.0 * a * u * u;
    (u, [-p * a * u * u * u / w, u, p * dx / w])
}

fn levenberg_marquardt(problem: &Problem, model: &Model<'_>, cfg: &FitConfig) -> Outcome {
    let n_par = problem.theta0.len();
    let n_res = problem.n_residuals;
    let (lo_bound, hi_bound) = problem.log_a_bounds;
    let clamp = |theta: &mut [f64]| theta[0] = theta[0].clamp(lo_bound, hi_bound);
    let cost_of = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let exact_cost = exact_cost(problem.y_span, n_res);

    let mut theta = problem.theta0.clone();
    clamp(&mut theta);
    let mut r = vec![0.0; n_res];
    let mut r_trial = vec![0.0; n_res];
    let mut jac = DMatrix::<f64>::zeros(n_res, n_par);
    model(&theta, &mut r, None);
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let mut lambda = cfg.damping_init;
    let mut converged = false;
    let mut failure = None;
    let mut iterations = 0;

    while iterations < cfg.max_iter && !converged {
        iterations += 1;
        if !cost.is_finite() {
            failure = Some("cost is not finite".to_string());
            break;
        }
        if cost <= exact_cost {
            converged = true;
            break;
        }
        model(&theta, &mut r, Some(&mut jac));
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &rv;

        // Freeze log a while it sits on a bound and descent points outward.
        let pinned = (theta[0] <= lo_bound && grad[0] > 0.0) || (theta[0] >= hi_bound && grad[0] < 0.0);
        let cosine = gradient_cosine(&jac, &grad, cost, pinned);
        if cosine <= GRADIENT_TOL {
            converged = true;
            break;
        }

        let mut accepted = false;
        while lambda <= MAX_DAMPING {
            let mut lhs = jtj.clone();
            let mut rhs = -&grad;
            for j in 0..n_par {
                lhs[(j, j)] += lambda * jtj[(j, j)].max(1e-300);
            }
            if pinned {
                lhs.row_mut(0).fill(0.0);
                lhs.column_mut(0).fill(0.0);
                lhs[(0, 0)] = 1.0;
                rhs[0] = 0.0;
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&rhs);
            let mut trial: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, d)| t + d).collect();
            clamp(&mut trial);
            model(&trial, &mut r_trial, None);
            let trial_cost = cost_of(&r_trial);
            if trial_cost.is_finite() && trial_cost < cost {
                let decrease = (cost - trial_cost) / cost;
                theta = trial;
                std::mem::swap(&mut r, &mut r_trial);
                cost = trial_cost;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if decrease < cfg.residual_tol || cost <= exact_cost {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            if cosine <= STALL_GRADIENT_TOL {
                converged = true;
            } else {
                failure = Some(format!(
                    "damping escalation cap reached (residual/Jacobian cosine {cosine:.3e})"
                ));
            }
            break;
        }
    }

    Outcome { theta, cost, iterations, converged, cost_history: history, failure }
}

/// Largest `|J_j . r| / (|J_j| |r|)` over the free parameters: zero at a
/// stationary point.
fn gradient_cosine(jac: &DMatrix<f64>, grad: &DVector<f64>, cost: f64, pinned: bool) -> f64 {
    let r_norm = cost.sqrt();
    if r_norm == 0.0 {
        return 0.0;
    }
    jac.column_iter()
        .zip(grad.iter())
        .enumerate()
        .filter(|(j, _)| !(pinned && *j == 0))
        .map(|(_, (col, g))| {
            let c = col.norm();
            if c == 0.0 {
                0.0
            } else {
                g.abs() / (c * r_norm)
            }
        })
        .fold(0.0, f64::max)
}

fn slice_range(data: &Dataset, range: Option<(usize, usize)>) -> Result<&[crate::dataset::Sample]> {
    let samples = data.samples();
    match range {
        None => Ok(samples),
        Some((first, last)) => {
            if first > last || last >= samples.len() {
                return Err(Error::Dataset(format!(
                    "sample range {first}..={last} outside 0..{}",
                    samples.len()
                )));
            }
            Ok(&samples[first..=last])
        }
    }
}

fn b_span(samples: &[crate::dataset::Sample]) -> f64 {
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.b), hi.max(s.b)));
    (hi - lo).max(f64::MIN_POSITIVE)
}

/// Slope between the samples bracketing `x`.
fn secant_near(samples: &[crate::dataset::Sample], x: f64) -> f64 {
    let idx = samples.partition_point(|s| s.h < x).clamp(1, samples.len() - 1);
    let lo = idx.saturating_sub(1);
    let hi = (idx + 1).min(samples.len() - 1);
    let (a, b) = (samples[lo], samples[hi]);
    (b.b - a.b) / (b.h - a.h)
}
