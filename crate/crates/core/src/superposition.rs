//! Weighted sums of S-curves sharing one dissipation parameter.
//!
//! `y_net(x) = Σ p_i · y(a, m_i, x - x_ci, y_ci)`. Each component keeps its own
//! slope and inflection; the single `a` couples them. Components with
//! `p_i m_i >= 0` magnetize, the rest dissipate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scurve::{cardano_terms, derivatives_at, solve_cubic, SCurveParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub p: f64,
    pub m: f64,
    pub x_c: f64,
    pub y_c: f64,
}

impl Component {
    pub fn new(p: f64, m: f64, x_c: f64, y_c: f64) -> Self {
        Self { p, m, x_c, y_c }
    }

    /// Effective slope `p m`; its sign decides magnetizing vs dissipative.
    pub fn slope(&self) -> f64 {
        self.p * self.m
    }

    pub fn is_magnetizing(&self) -> bool {
        self.slope() >= 0.0
    }

    pub fn curve(&self, a: f64) -> SCurveParams {
        SCurveParams { a, m: self.m, x_c: self.x_c, y_c: self.y_c }
    }
}

/// The regression model. Serialized as
/// `{"a": .., "components": [{"p": .., "m": .., "x_c": .., "y_c": ..}, ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSuperposition")]
pub struct Superposition {
    a: f64,
    components: Vec<Component>,
}

#[derive(Deserialize)]
struct RawSuperposition {
    a: f64,
    components: Vec<Component>,
}

impl TryFrom<RawSuperposition> for Superposition {
    type Error = Error;

    fn try_from(raw: RawSuperposition) -> Result<Self> {
        Superposition::new(raw.a, raw.components)
    }
}

/// `S_I`, `S_II` and the constant offset at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubprocessValues {
    pub s_one: f64,
    pub s_two: f64,
    pub offset: f64,
}

impl SubprocessValues {
    pub fn total(&self) -> f64 {
        self.s_one + self.s_two + self.offset
    }
}

impl Superposition {
    pub fn new(a: f64, components: Vec<Component>) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::InvalidModel(format!("a must be finite and >= 0, got {a}")));
        }
        if components.is_empty() {
            return Err(Error::InvalidModel("at least one component is required".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if ![c.p, c.m, c.x_c, c.y_c].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidModel(format!("component {i} is not finite: {c:?}")));
            }
        }
        Ok(Self { a, components })
    }

    /// A single component with unit weight: the plain S-curve.
    pub fn single(params: SCurveParams) -> Result<Self> {
        params.validate()?;
        Self::new(params.a, vec![Component::new(1.0, params.m, params.x_c, params.y_c)])
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `Σ p_i m_i`.
    pub fn slope_sum(&self) -> f64 {
        self.components.iter().map(Component::slope).sum()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_x(x)?;
        Ok(self
            .components
            .iter()
            .map(|c| c.p * (solve_cubic(self.a, c.m * (x - c.x_c)) + c.y_c))
            .sum())
    }

    pub fn d1(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.1)
    }

    pub fn d2(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.2)
    }

    pub fn d3(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.3)
    }

    /// `(y, y', y'', y''')` in one pass over the components.
    pub fn derivatives(&self, x: f64) -> Result<(f64, f64, f64, f64)> {
        check_x(x)?;
        let mut acc = (0.0, 0.0, 0.0, 0.0);
        for c in &self.components {
            let u = solve_cubic(self.a, c.m * (x - c.x_c));
            let (d1, d2, d3) = derivatives_at(self.a, c.m, u);
            acc.0 += c.p * (u + c.y_c);
            acc.1 += c.p * d1;
            acc.2 += c.p * d2;
            acc.3 += c.p * d3;
        }
        Ok(acc)
    }

    /// Splits `y_net` into the weighted radical terms `S_I = Σ p_i S1_i`,
    /// `S_II = Σ p_i S2_i` and the offset `Σ p_i y_ci`.
    pub fn decompose_subprocesses(&self, x: f64) -> Result<SubprocessValues> {
        check_x(x)?;
        if self.a <= 0.0 {
            return Err(Error::DecompositionUndefined(self.a));
        }
        let mut out = SubprocessValues { s_one: 0.0, s_two: 0.0, offset: 0.0 };
        for c in &self.components {
            let (s1, s2) = cardano_terms(self.a, c.m * (x - c.x_c))?;
            out.s_one += c.p * s1;
            out.s_two += c.p * s2;
            out.offset += c.p * c.y_c;
        }
        Ok(out)
    }

    /// Partitions the components into `(magnetizing, dissipative)` by the sign
    /// of `p_i m_i`; zero products count as magnetizing. Either side is `None`
    /// when it has no components. Both parts share `a`, and because the model
    /// is linear in its components their evaluations add up to `self`.
    pub fn split_by_sign(&self) -> (Option<Superposition>, Option<Superposition>) {
        let (mag, diss): (Vec<Component>, Vec<Component>) =
            self.components.iter().partition(|c| c.is_magnetizing());
        let wrap = |cs: Vec<Component>| {
            (!cs.is_empty()).then_some(Superposition { a: self.a, components: cs })
        };
        (wrap(mag), wrap(diss))
    }

    /// Same components in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let components = order
            .iter()
            .map(|&i| {
                self.components
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::InvalidModel(format!("no component {i}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.a, components)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what: "x", value: x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn upper_branch() -> Superposition {
        Superposition::new(
            2.873,
            vec![
                Component::new(-1.673, 0.004, -8.4682, -0.0035),
                Component::new(1.55, 0.0106, -11.796, 0.0),
            ],
        )
        .unwrap()
    }

    fn arb_sup(max_n: usize) -> impl Strategy<Value = Superposition> {
        let comp = (-2.0f64..2.0, 0.01f64..2.0, -20.0f64..20.0, -1.0f64..1.0)
            .prop_map(|(p, m, x_c, y_c)| Component::new(p, m, x_c, y_c));
        (0.05f64..20.0, prop::collection::vec(comp, 1..=max_n))
            .prop_map(|(a, cs)| Superposition::new(a, cs).unwrap())
    }

    #[test]
    fn single_term_matches_scurve() {
        let p = SCurveParams::new(0.7, 1.3, 2.0, -0.5).unwrap();
        let sup = Superposition::single(p).unwrap();
        for x in [-30.0, -1.0, 2.0, 4.5, 100.0] {
            assert_eq!(sup.eval(x).unwrap(), p.eval_forward(x).unwrap());
        }
        assert_eq!(sup.d1(2.0).unwrap(), 1.3);
    }

    #[test]
    fn zero_weights_vanish() {
        let sup = Superposition::new(
            1.0,
            vec![Component::new(0.0, 1.0, 0.0, 3.0), Component::new(0.0, -2.0, 5.0, 1.0)],
        )
        .unwrap();
        for x in [-5.0, 0.0, 7.0] {
            assert_eq!(sup.eval(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn upper_branch_is_increasing() {
        let sup = upper_branch();
        let mut prev = sup.eval(-200.0).unwrap();
        for i in 1..=400 {
            let y = sup.eval(-200.0 + i as f64).unwrap();
            assert!(y > prev);
            prev = y;
        }
    }

    #[test]
    fn upper_branch_peak_permeability() {
        let sup = upper_branch();
        let (mut best_x, mut best) = (0.0, f64::MIN);
        for i in 0..=60_000 {
            let x = -40.0 + i as f64 * 1e-3;
            let d = sup.d1(x).unwrap();
            if d > best {
                best = d;
                best_x = x;
            }
        }
        assert!((best - 0.00976).abs() / 0.00976 < 0.01, "{best}");
        assert!((best_x + 11.99).abs() < 0.1, "{best_x}");
    }

    #[test]
    fn upper_branch_sign_split() {
        let (mag, diss) = upper_branch().split_by_sign();
        let mag = mag.unwrap();
        let diss = diss.unwrap();
        assert_eq!(mag.components(), &[Component::new(1.55, 0.0106, -11.796, 0.0)]);
        assert_eq!(diss.components(), &[Component::new(-1.673, 0.004, -8.4682, -0.0035)]);
        assert!((diss.slope_sum() + 0.0067).abs() < 1e-4);
        assert!((mag.slope_sum() - 0.0165).abs() < 1e-4);
        assert_eq!(mag.a(), diss.a());
    }

    #[test]
    fn all_magnetizing_split() {
        let sup = Superposition::new(
            1.0,
            vec![Component::new(1.0, 1.0, 0.0, 0.0), Component::new(0.0, -1.0, 1.0, 0.0)],
        )
        .unwrap();
        let (mag, diss) = sup.split_by_sign();
        assert_eq!(mag.unwrap(), sup);
        assert!(diss.is_none());
    }

    #[test]
    fn decomposition_at_center() {
        let sup = Superposition::single(SCurveParams::new(2.0, 0.5, 3.0, 1.0).unwrap()).unwrap();
        let s = sup.decompose_subprocesses(3.0).unwrap();
        assert!((s.s_one + s.s_two).abs() < 1e-15);
        assert_eq!(s.offset, 1.0);
    }

    #[test]
    fn decomposition_needs_positive_a() {
        let sup = Superposition::new(0.0, vec![Component::new(1.0, 1.0, 0.0, 0.0)]).unwrap();
        assert!(matches!(
            sup.decompose_subprocesses(1.0),
            Err(Error::DecompositionUndefined(_))
        ));
    }

    #[test]
    fn first_subprocess_peaks_first() {
        // Basic-magnetization-like model: S_I reaches its peak slope before S_II.
        let sup = Superposition::new(
            20.0,
            vec![Component::new(0.6, 0.12, 40.0, 0.35), Component::new(0.4, 0.05, 70.0, 0.6)],
        )
        .unwrap();
        let h = 1e-3;
        let slope = |x: f64, pick: fn(&SubprocessValues) -> f64| {
            let hi = sup.decompose_subprocesses(x + h).unwrap();
            let lo = sup.decompose_subprocesses(x - h).unwrap();
            (pick(&hi) - pick(&lo)) / (2.0 * h)
        };
        let argmax = |pick: fn(&SubprocessValues) -> f64| {
            (0..=2000)
                .map(|i| i as f64 * 0.1 - 50.0)
                .max_by(|&p, &q| slope(p, pick).total_cmp(&slope(q, pick)))
                .unwrap()
        };
        let peak_one = argmax(|s| s.s_one);
        let peak_two = argmax(|s| s.s_two);
        assert!(peak_one < peak_two, "{peak_one} vs {peak_two}");
    }

    #[test]
    fn rejects_invalid() {
        assert!(Superposition::new(1.0, vec![]).is_err());
        assert!(Superposition::new(-1.0, vec![Component::new(1.0, 1.0, 0.0, 0.0)]).is_err());
        assert!(Superposition::new(1.0, vec![Component::new(f64::NAN, 1.0, 0.0, 0.0)]).is_err());
        assert!(Superposition::from_json(r#"{"a": 1.0, "components": []}"#).is_err());
    }

    #[test]
    fn json_field_names() {
        let text = upper_branch().to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["a"], 2.873);
        let first = &v["components"][0];
        for key in ["p", "m", "x_c", "y_c"] {
            assert!(first.get(key).is_some(), "{key}");
        }
        assert_eq!(Superposition::from_json(&text).unwrap(), upper_branch());
    }

    proptest! {
        #[test]
        fn reconstruction(sup in arb_sup(6), x in -60.0f64..60.0) {
            let s = sup.decompose_subprocesses(x).unwrap();
            let y = sup.eval(x).unwrap();
            let scale: f64 = sup.components().iter().map(|c| {
                let (s1, s2) = cardano_terms(sup.a(), c.m * (x - c.x_c)).unwrap();
                c.p.abs() * (s1.abs() + s2.abs() + c.y_c.abs())
            }).sum();
            prop_assert!((s.total() - y).abs() <= 1e-10 * scale.max(y.abs()));
        }

        #[test]
        fn split_adds_up(sup in arb_sup(6), x in -60.0f64..60.0) {
            let (mag, diss) = sup.split_by_sign();
            let part = |s: Option<Superposition>| s.map_or(0.0, |s| s.eval(x).unwrap());
            let total = part(mag) + part(diss);
            let y = sup.eval(x).unwrap();
            prop_assert!((total - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }

        #[test]
        fn linear_in_concatenation(a in arb_sup(3), b in arb_sup(3), x in -60.0f64..60.0) {
            let b = Superposition::new(a.a(), b.components().to_vec()).unwrap();
            let joined = Superposition::new(
                a.a(), a.components().iter().chain(b.components()).copied().collect()).unwrap();
            let lhs = joined.eval(x).unwrap();
            let rhs = a.eval(x).unwrap() + b.eval(x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn permutation_invariance(sup in arb_sup(5), x in -60.0f64..60.0) {
            let order: Vec<usize> = (0..sup.len()).rev().collect();
            let rev = sup.permuted(&order).unwrap();
            let (y, d1, d2, d3) = sup.derivatives(x).unwrap();
            let (ry, rd1, rd2, rd3) = rev.derivatives(x).unwrap();
            let scale: f64 = sup.components().iter().map(|c| c.p.abs() * (1.0 + c.m.abs()).powi(3) * (1.0 + sup.a())).sum();
            for (l, r) in [(y, ry), (d1, rd1), (d2, rd2), (d3, rd3)] {
                prop_assert!((l - r).abs() <= 1e-14 * scale.max(l.abs()) * 4.0);
            }
        }
    }
}
