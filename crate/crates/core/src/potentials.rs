//! Symmetric, nonnegative, compactly supported potentials.
//!
//! A [`PotentialSpec`] is a symbolic shape plus the parameters `(b, ε, γ)`
//! of the standing hypotheses: support `[-b, b]`, strict monotonicity on
//! `[-b, -ε]` and a floor `inf_{[-ε, 0]} v > γ`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of equispaced samples used by each sampled hypothesis check.
pub const HYPOTHESIS_GRID: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("support half-width b must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("eps must satisfy 0 < eps <= b, got eps={eps}, b={b}")]
    Eps { eps: f64, b: f64 },
    #[error("height must be nonnegative and finite, got {0}")]
    Height(f64),
    #[error("gamma must be positive and finite, got {0}")]
    Gamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    /// `height · 1_{[-b, b]}`.
    Step,
    /// Linear ramp from 0 at `-b` to `height` at `-eps`, flat core, mirrored.
    Trapezoid,
    /// `height · cos²(πx / 2b)` on `[-b, b]`.
    #[serde(rename = "bump")]
    TruncatedBump,
    Zero,
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PotentialKind::Step => "step",
            PotentialKind::Trapezoid => "trapezoid",
            PotentialKind::TruncatedBump => "bump",
            PotentialKind::Zero => "zero",
        };
        f.write_str(name)
    }
}

/// Symbolic description of a potential together with its hypothesis
/// parameters. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub b: f64,
    pub height: f64,
    pub eps: f64,
    pub gamma: f64,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, b: f64, height: f64, eps: f64, gamma: f64) -> Self {
        Self {
            kind,
            b,
            height,
            eps,
            gamma,
        }
    }

    /// Step of half-width `b`; `eps = b` and `gamma = height / 2`.
    pub fn step(b: f64, height: f64) -> Self {
        Self::new(PotentialKind::Step, b, height, b, 0.5 * height)
    }

    /// Trapezoid with plateau half-width `eps`; `gamma = height / 2`.
    pub fn trapezoid(b: f64, eps: f64, height: f64) -> Self {
        Self::new(PotentialKind::Trapezoid, b, height, eps, 0.5 * height)
    }

    /// Truncated `cos²` bump; `gamma` is placed halfway between 0 and the
    /// value of the bump at `-eps`.
    pub fn bump(b: f64, eps: f64, height: f64) -> Self {
        let edge = height * (FRAC_PI_2 * eps / b).cos().powi(2);
        Self::new(PotentialKind::TruncatedBump, b, height, eps, 0.5 * edge)
    }

    /// The free Laplacian. `b` only matters for the bound formulas.
    pub fn zero(b: f64) -> Self {
        Self::new(PotentialKind::Zero, b, 0.0, b, 1.0)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate_shape(&self) -> Result<(), PotentialError> {
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(PotentialError::HalfWidth(self.b));
        }
        if !(self.eps.is_finite() && self.eps > 0.0 && self.eps <= self.b) {
            return Err(PotentialError::Eps {
                eps: self.eps,
                b: self.b,
            });
        }
        if !(self.height.is_finite() && self.height >= 0.0) {
            return Err(PotentialError::Height(self.height));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(PotentialError::Gamma(self.gamma));
        }
        Ok(())
    }

    /// `‖v‖∞`, known in closed form for every family.
    pub fn sup_norm(&self) -> f64 {
        match self.kind {
            PotentialKind::Zero => 0.0,
            _ => self.height,
        }
    }

    /// Pointwise value `v(x)`. Every branch works on `|x|`, so the result
    /// is bitwise symmetric.
    pub fn evaluate(&self, x: f64) -> f64 {
        let r = x.abs();
        if r > self.b {
            return 0.0;
        }
        match self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Step => self.height,
            PotentialKind::Trapezoid => {
                if r <= self.eps || self.eps >= self.b {
                    self.height
                } else {
                    self.height * (self.b - r) / (self.b - self.eps)
                }
            }
            PotentialKind::TruncatedBump => {
                let c = (FRAC_PI_2 * r / self.b).cos();
                self.height * c * c
            }
        }
    }

    /// Value assigned to a grid node at `x` on a uniform grid of spacing `h`.
    ///
    /// Continuous shapes are sampled pointwise. The step is averaged against
    /// the hat function of the node, which equals the pointwise value away
    /// from the jumps and `height / 2` on a node sitting exactly on a jump.
    pub fn node_value(&self, x: f64, h: f64) -> f64 {
        match self.kind {
            PotentialKind::Step => {
                let r = x.abs();
                if r + h <= self.b {
                    self.height
                } else if r - h >= self.b {
                    0.0
                } else {
                    let lo = ((-self.b - r) / h).clamp(-1.0, 1.0);
                    let hi = ((self.b - r) / h).clamp(-1.0, 1.0);
                    self.height * (hat_primitive(hi) - hat_primitive(lo))
                }
            }
            _ => self.evaluate(x),
        }
    }

    /// Positions where `v` jumps.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self.kind {
            PotentialKind::Step if self.height > 0.0 => vec![-self.b, self.b],
            _ => Vec::new(),
        }
    }

    pub fn validate_hypotheses(&self) -> HypothesisReport {
        HypothesisReport::check(self)
    }
}

/// Antiderivative of the unit hat `1 - |t|` on `[-1, 1]`, zero at `t = -1`.
fn hat_primitive(t: f64) -> f64 {
    if t <= 0.0 {
        0.5 + t + 0.5 * t * t
    } else {
        0.5 + t - 0.5 * t * t
    }
}

/// Boolean outcome of every standing hypothesis for one potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub well_formed: bool,
    pub symmetric: bool,
    pub nonnegative: bool,
    pub compact_support: bool,
    pub monotone_on_ramp: bool,
    pub floor_on_core: bool,
    pub small_coupling: bool,
    pub grid_points: usize,
}

impl HypothesisReport {
    fn failed() -> Self {
        Self {
            well_formed: false,
            symmetric: false,
            nonnegative: false,
            compact_support: false,
            monotone_on_ramp: false,
            floor_on_core: false,
            small_coupling: false,
            grid_points: HYPOTHESIS_GRID,
        }
    }

    pub fn check(spec: &PotentialSpec) -> Self {
        if spec.validate_shape().is_err() {
            return Self::failed();
        }
        let b = spec.b;
        let n = HYPOTHESIS_GRID;

        let wide = sample(-2.0 * b, 2.0 * b, n);
        let symmetric = wide.iter().all(|&x| spec.evaluate(x) == spec.evaluate(-x));
        let nonnegative = wide.iter().all(|&x| spec.evaluate(x) >= 0.0);

        // Strictly outside the support, on both sides.
        let outside = sample(b, 3.0 * b, n);
        let compact_support = outside
            .iter()
            .filter(|&&x| x > b)
            .all(|&x| spec.evaluate(x) == 0.0 && spec.evaluate(-x) == 0.0);

        let monotone_on_ramp = if spec.eps >= b {
            true
        } else {
            let ramp: Vec<f64> = sample(-b, -spec.eps, n)
                .into_iter()
                .map(|x| spec.evaluate(x))
                .collect();
            ramp.windows(2).all(|w| w[1] - w[0] > 0.0)
        };

        let floor = sample(-spec.eps, 0.0, n)
            .into_iter()
            .map(|x| spec.evaluate(x))
            .fold(f64::INFINITY, f64::min);
        let floor_on_core = floor > spec.gamma;

        let small_coupling = b * b * spec.sup_norm() < 0.5;

        Self {
            well_formed: true,
            symmetric,
            nonnegative,
            compact_support,
            monotone_on_ramp,
            floor_on_core,
            small_coupling,
            grid_points: n,
        }
    }

    /// Every hypothesis of the ratio and cosine bounds.
    pub fn lemma_applicable(&self) -> bool {
        self.proposition_applicable() && self.small_coupling
    }

    /// Hypotheses of the separation estimate (no coupling restriction).
    pub fn proposition_applicable(&self) -> bool {
        self.well_formed
            && self.symmetric
            && self.nonnegative
            && self.compact_support
            && self.monotone_on_ramp
            && self.floor_on_core
    }
}

fn sample(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + i as f64 * step })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn step_values() {
        let s = PotentialSpec::step(0.5, 1.0);
        assert_eq!(s.evaluate(0.0), 1.0);
        assert_eq!(s.evaluate(0.6), 0.0);
        assert_eq!(s.evaluate(-0.6), 0.0);
    }

    #[test]
    fn trapezoid_ramp_midpoint() {
        let s = PotentialSpec::trapezoid(1.0, 0.5, 1.0);
        assert_eq!(s.evaluate(-0.75), 0.5);
        assert_eq!(s.evaluate(0.2), 1.0);
    }

    #[test]
    fn small_step_satisfies_everything() {
        let s = PotentialSpec::new(PotentialKind::Step, 0.5, 1.0, 0.5, 0.5);
        let r = s.validate_hypotheses();
        assert!(r.lemma_applicable(), "{r:?}");
        assert_eq!(r.grid_points, HYPOTHESIS_GRID);
    }

    #[test]
    fn wide_step_breaks_coupling() {
        let s = PotentialSpec::step(1.0, 1.0);
        let r = s.validate_hypotheses();
        assert!(!r.small_coupling);
        assert!(r.proposition_applicable());
        assert!(!r.lemma_applicable());
    }

    #[test]
    fn zero_has_no_floor() {
        for gamma in [1e-6, 0.5, 3.0] {
            let r = PotentialSpec::zero(0.5)
                .with_gamma(gamma)
                .validate_hypotheses();
            assert!(!r.floor_on_core);
            assert!(r.small_coupling);
        }
    }

    #[test]
    fn step_with_short_eps_is_not_monotone() {
        let s = PotentialSpec::new(PotentialKind::Step, 0.5, 1.0, 0.25, 0.5);
        assert!(!s.validate_hypotheses().monotone_on_ramp);
    }

    #[test]
    fn trapezoid_and_bump_pass() {
        assert!(PotentialSpec::trapezoid(0.5, 0.25, 1.0)
            .validate_hypotheses()
            .lemma_applicable());
        assert!(PotentialSpec::bump(0.5, 0.25, 1.0)
            .validate_hypotheses()
            .lemma_applicable());
    }

    #[test]
    fn degenerate_specs_report_false() {
        let bad = [
            PotentialSpec::step(-1.0, 1.0),
            PotentialSpec::new(PotentialKind::Trapezoid, 0.5, 1.0, 0.75, 0.5),
            PotentialSpec::new(PotentialKind::Step, 0.5, -1.0, 0.5, 0.5),
            PotentialSpec::new(PotentialKind::Step, 0.5, 1.0, 0.5, 0.0),
            PotentialSpec::new(PotentialKind::Step, f64::NAN, 1.0, 0.5, 0.5),
        ];
        for s in bad {
            let r = s.validate_hypotheses();
            assert!(!r.well_formed && !r.lemma_applicable(), "{s:?}");
        }
    }

    #[test]
    fn step_node_average() {
        let s = PotentialSpec::step(0.5, 1.0);
        // node on the jump
        assert!((s.node_value(0.5, 0.01) - 0.5).abs() < 1e-12);
        assert!((s.node_value(-0.5, 0.01) - 0.5).abs() < 1e-12);
        assert_eq!(s.node_value(0.2, 0.01), 1.0);
        assert_eq!(s.node_value(0.8, 0.01), 0.0);
        // jump a quarter cell to the right of the node
        let v = s.node_value(0.5 - 0.0025, 0.01);
        let expected = 0.5 + 0.25 - 0.5 * 0.25 * 0.25;
        assert!((v - expected).abs() < 1e-12, "{v}");
    }

    #[test]
    fn json_schema() {
        let s: PotentialSpec =
            serde_json::from_str(r#"{"kind":"bump","b":0.5,"height":1.0,"eps":0.25,"gamma":0.1}"#)
                .unwrap();
        assert_eq!(s.kind, PotentialKind::TruncatedBump);
        let back = serde_json::to_string(&PotentialSpec::step(0.5, 1.0)).unwrap();
        assert!(back.contains(r#""kind":"step""#));
    }

    fn any_spec() -> impl Strategy<Value = PotentialSpec> {
        (0usize..4, 0.05f64..3.0, 0.0f64..5.0, 0.05f64..1.0).prop_map(|(k, b, h, frac)| {
            let kind = [
                PotentialKind::Step,
                PotentialKind::Trapezoid,
                PotentialKind::TruncatedBump,
                PotentialKind::Zero,
            ][k];
            PotentialSpec::new(kind, b, h, frac * b, 0.1)
        })
    }

    proptest! {
        #[test]
        fn symmetric_and_compact(spec in any_spec(), x in -10.0f64..10.0) {
            prop_assert_eq!(spec.evaluate(x), spec.evaluate(-x));
            prop_assert!(spec.evaluate(x) >= 0.0);
            if x.abs() > spec.b {
                prop_assert_eq!(spec.evaluate(x), 0.0);
            }
        }

        #[test]
        fn trapezoid_ramp_strictly_increasing(b in 0.1f64..3.0, frac in 0.05f64..0.95, h in 0.01f64..5.0) {
            let s = PotentialSpec::trapezoid(b, frac * b, h);
            let xs = sample(-b, -frac * b, 500);
            for w in xs.windows(2) {
                prop_assert!(s.evaluate(w[1]) > s.evaluate(w[0]));
            }
        }

        #[test]
        fn step_coupling_flag_matches_predicate(b in 0.05f64..2.0, h in 0.0f64..4.0) {
            let s = PotentialSpec::step(b, h).with_gamma(1.0);
            prop_assert_eq!(s.validate_hypotheses().small_coupling, b * b * h < 0.5);
        }
    }
}
