//! Brute-force checks built on finitely-atomic functions.
//!
//! A pair of simple functions on a shared partition is a point of `Ω₃`
//! through its three norms, and `‖φ + ψ‖^p` is a lower bound for `B₃` there.
//! Everything in this module is independent of the boundary-value and
//! envelope machinery, so it can be used to test it.

mod search;
mod suite;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp_domain::{ConePoint, Exponent};

pub use search::{lower_bound_b3, search_lower_bound, LowerBound};
pub use suite::{
    random_pair, run_inequality_suite, verify_concavity, verify_majorant, ConcavityReport,
    Inequality, InequalityReport, MajorantReport,
};

/// Relative tolerance of the sign contracts.
pub const SLACK_TOL: f64 = 1e-12;

/// A simple function: weights summing to one and the values on each piece.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    atoms: Vec<(f64, f64)>,
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::domain("a step function needs at least one atom"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::domain("atom weights must be positive and finite"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("atom weights sum to {total}, not 1")));
    }
    Ok(())
}

impl StepFunction {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let weights: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        check_weights(&weights)?;
        if atoms.iter().any(|a| !a.1.is_finite()) {
            return Err(Error::domain("atom values must be finite"));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `‖f‖_p^p`.
    pub fn norm_pow(&self, e: &Exponent) -> f64 {
        self.atoms
            .iter()
            .map(|(w, v)| w * v.abs().powf(e.p()))
            .sum()
    }
}

/// Two simple functions on the same partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionPair {
    pub weights: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl FunctionPair {
    pub fn new(weights: Vec<f64>, phi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        if phi.len() != weights.len() || psi.len() != weights.len() {
            return Err(Error::domain("phi and psi must have one value per atom"));
        }
        if phi.iter().chain(&psi).any(|v| !v.is_finite()) {
            return Err(Error::domain("atom values must be finite"));
        }
        Ok(Self { weights, phi, psi })
    }

    /// A single atom of full weight.
    pub fn constant(phi: f64, psi: f64) -> Self {
        Self {
            weights: vec![1.0],
            phi: vec![phi],
            psi: vec![psi],
        }
    }

    pub fn phi(&self) -> StepFunction {
        StepFunction {
            atoms: self
                .weights
                .iter()
                .copied()
                .zip(self.phi.iter().copied())
                .collect(),
        }
    }

    pub fn psi(&self) -> StepFunction {
        StepFunction {
            atoms: self
                .weights
                .iter()
                .copied()
                .zip(self.psi.iter().copied())
                .collect(),
        }
    }

    /// The pair on `[0, α)` followed by `other` on `[α, 1)`.
    pub fn concat(&self, other: &FunctionPair, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha = {alpha} outside (0, 1)")));
        }
        let weights = self
            .weights
            .iter()
            .map(|w| alpha * w)
            .chain(other.weights.iter().map(|w| (1.0 - alpha) * w))
            .collect();
        let join = |a: &[f64], b: &[f64]| a.iter().chain(b).copied().collect();
        Ok(Self {
            weights,
            phi: join(&self.phi, &other.phi),
            psi: join(&self.psi, &other.psi),
        })
    }

    fn integral(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.weights
            .iter()
            .zip(self.phi.iter().zip(&self.psi))
            .map(|(w, (a, b))| w * f(*a, *b))
            .sum()
    }
}

/// `(‖φ‖^p, ‖ψ‖^p, ‖φ − ψ‖^p)`.
pub fn norms(pair: &FunctionPair, e: &Exponent) -> ConePoint {
    let p = e.p();
    ConePoint::new(
        pair.integral(|a, _| a.abs().powf(p)),
        pair.integral(|_, b| b.abs().powf(p)),
        pair.integral(|a, b| (a - b).abs().powf(p)),
    )
}

/// `‖φ + ψ‖^p`.
pub fn sum_norm(pair: &FunctionPair, e: &Exponent) -> f64 {
    pair.integral(|a, b| (a + b).abs().powf(e.p()))
}

/// Signed difference of the two sides of an inequality, with the larger
/// side as scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slack {
    pub value: f64,
    pub scale: f64,
}

impl Slack {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            value: lhs - rhs,
            scale: lhs.abs().max(rhs.abs()),
        }
    }

    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.value / self.scale
        }
    }

    pub fn at_least_zero(&self) -> bool {
        self.value >= -SLACK_TOL * self.scale
    }

    pub fn at_most_zero(&self) -> bool {
        self.value <= SLACK_TOL * self.scale
    }
}

/// `(‖φ‖ + ‖ψ‖)^p + |‖φ‖ − ‖ψ‖|^p − ‖φ + ψ‖^p − ‖φ − ψ‖^p`.
///
/// Nonnegative for `p ≥ 2`, nonpositive for `p ∈ [1, 2]`.
pub fn verify_hanner(pair: &FunctionPair, e: &Exponent) -> Slack {
    let p = e.p();
    let x = norms(pair, e);
    let (a, b) = (x.x1.powf(1.0 / p), x.x2.powf(1.0 / p));
    let lhs = (a + b).powf(p) + (a - b).abs().powf(p);
    Slack::new(lhs, sum_norm(pair, e) + x.x3)
}

/// Whether the Hanner slack has the sign required at this exponent.
pub fn hanner_holds(slack: &Slack, e: &Exponent) -> bool {
    let p = e.p();
    (p < 2.0 || slack.at_least_zero()) && (p > 2.0 || slack.at_most_zero())
}

/// Clarkson's inequality: `2^{p−1}(‖φ‖^p + ‖ψ‖^p) ≥ ‖φ + ψ‖^p + ‖φ − ψ‖^p`
/// for `p ≥ 2` and `2(‖φ‖^p + ‖ψ‖^p)^{q/p} ≥ ‖φ + ψ‖^q + ‖φ − ψ‖^q` for
/// `p ∈ (1, 2)`. Not defined at `p = 1`.
pub fn verify_clarkson(pair: &FunctionPair, e: &Exponent) -> Result<Slack> {
    let p = e.p();
    if p <= 1.0 {
        return Err(Error::precondition("the Clarkson inequality needs p > 1"));
    }
    let x = norms(pair, e);
    let plus = sum_norm(pair, e);
    Ok(if p >= 2.0 {
        Slack::new(2f64.powf(p - 1.0) * (x.x1 + x.x2), plus + x.x3)
    } else {
        let r = e.q() / p;
        Slack::new(2.0 * (x.x1 + x.x2).powf(r), plus.powf(r) + x.x3.powf(r))
    })
}
