//! Exponent, the cone `Ω₃`, its section `Ω` and the homogeneity reduction.
//!
//! A point `x = (x₁, x₂, x₃)` of `Ω₃` records the `p`-th powers of
//! `‖φ‖`, `‖ψ‖` and `‖φ − ψ‖`. The cone is cut by the plane
//! `x₁ + x₂ + x₃ = 1`; its projection onto the first two coordinates is the
//! planar domain `Ω` on which most of the geometry happens.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance of the triangle inequality on `x^{1/p}`.
pub const CONE_TOL: f64 = 1e-12;

/// Half-width of the band around `p = 2` treated as the linear regime.
pub const TWO_TOL: f64 = 1e-12;

/// Smallest exponent accepted by the Bellman evaluators.
pub const P_MIN_BELLMAN: f64 = 1.01;

/// Largest exponent accepted anywhere in the crate.
pub const P_MAX: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    BelowTwo,
    Two,
    AboveTwo,
}

/// The `L^p` exponent together with its conjugate and regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    p: f64,
    q: f64,
    regime: Regime,
}

impl Exponent {
    /// Accepts `p ∈ [1, 64]`, the range of the inequality verifiers.
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || !(1.0..=P_MAX).contains(&p) {
            return Err(Error::domain(format!(
                "exponent p = {p} outside the supported range [1, {P_MAX}]"
            )));
        }
        let q = if p == 1.0 {
            f64::INFINITY
        } else {
            p / (p - 1.0)
        };
        let regime = if (p - 2.0).abs() <= TWO_TOL {
            Regime::Two
        } else if p < 2.0 {
            Regime::BelowTwo
        } else {
            Regime::AboveTwo
        };
        Ok(Self { p, q, regime })
    }

    /// Accepts `p ∈ [1.01, 64]`, the range of the Bellman evaluators.
    pub fn bellman(p: f64) -> Result<Self> {
        let e = Self::new(p)?;
        e.require_bellman()?;
        Ok(e)
    }

    pub(crate) fn require_bellman(&self) -> Result<()> {
        if self.p < P_MIN_BELLMAN {
            return Err(Error::domain(format!(
                "exponent p = {} below the Bellman range [{P_MIN_BELLMAN}, {P_MAX}]",
                self.p
            )));
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent `p/(p−1)`; infinite for `p = 1`.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `2^p`, the value of `B₃(1, 1, 0)`.
    pub fn two_pow_p(&self) -> f64 {
        2f64.powf(self.p)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p = {}", self.p)
    }
}

/// A point `(x₁, x₂, x₃)` of `ℝ³`, meant to lie in `Ω₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConePoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

/// One of the three triangle inequalities on `(x₁^{1/p}, x₂^{1/p}, x₃^{1/p})`.
///
/// The numbering matches the three ways the Minkowski inequality can
/// degenerate: inequality `k` is tight when the `k`-th root equals the sum
/// of the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleInequality {
    First,
    Second,
    Third,
}

impl fmt::Display for TriangleInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TriangleInequality::First => "x1^(1/p) <= x2^(1/p) + x3^(1/p)",
            TriangleInequality::Second => "x2^(1/p) <= x1^(1/p) + x3^(1/p)",
            TriangleInequality::Third => "x3^(1/p) <= x1^(1/p) + x2^(1/p)",
        };
        f.write_str(s)
    }
}

impl ConePoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(k * self.x1, k * self.x2, k * self.x3)
    }

    pub fn is_zero(&self) -> bool {
        self.x1 == 0.0 && self.x2 == 0.0 && self.x3 == 0.0
    }

    /// `(x₁^{1/p}, x₂^{1/p}, x₃^{1/p})`, the three norms.
    pub fn roots(&self, e: &Exponent) -> [f64; 3] {
        let inv = 1.0 / e.p();
        self.coords().map(|x| x.powf(inv))
    }

    /// Triangle gaps `g_k = (sum of the other two roots) − r_k`, together
    /// with the tolerance scale (the largest root).
    pub(crate) fn gaps(&self, e: &Exponent) -> ([f64; 3], f64) {
        let [r1, r2, r3] = self.roots(e);
        let scale = r1.max(r2).max(r3);
        ([r2 + r3 - r1, r1 + r3 - r2, r1 + r2 - r3], scale)
    }

    /// The first violated condition, if any. Negative or non-finite
    /// coordinates are reported as a domain error message.
    pub fn violation(&self, e: &Exponent) -> Option<String> {
        if self.coords().iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Some("coordinates must be finite and nonnegative".into());
        }
        let (gaps, scale) = self.gaps(e);
        let tol = CONE_TOL * scale;
        let which = [
            TriangleInequality::First,
            TriangleInequality::Second,
            TriangleInequality::Third,
        ];
        gaps.iter()
            .zip(which)
            .find(|(g, _)| **g < -tol)
            .map(|(_, w)| format!("triangle inequality {w} violated"))
    }
}

/// Membership in `Ω₃`. Total: negative or non-finite input gives `false`.
pub fn in_cone(x: &ConePoint, e: &Exponent) -> bool {
    x.violation(e).is_none()
}

/// A point `(y₁, y₂)` of the section `Ω`; the third coordinate is
/// `y₃ = 1 − y₁ − y₂`.
///
/// The complement is stored rather than recomputed so that points produced
/// by an exact formula (boundary parametrisations, projections) keep a
/// correctly rounded `y₃` even when it is tiny. The triangle test on
/// `y₃^{1/p}` is very sensitive to absolute error there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionPoint {
    pub y1: f64,
    pub y2: f64,
    #[serde(skip)]
    y3: f64,
}

impl SectionPoint {
    pub fn new(y1: f64, y2: f64) -> Self {
        Self {
            y1,
            y2,
            y3: 1.0 - y1 - y2,
        }
    }

    /// Builds a point from all three barycentric parts; `y3` must equal
    /// `1 − y1 − y2` up to rounding.
    pub fn from_parts(y1: f64, y2: f64, y3: f64) -> Self {
        debug_assert!((y1 + y2 + y3 - 1.0).abs() <= 1e-12);
        Self { y1, y2, y3 }
    }

    pub fn y3(&self) -> f64 {
        self.y3
    }

    /// Mirror image under the coordinate swap `y₁ ↔ y₂`.
    pub fn swap(&self) -> Self {
        Self {
            y1: self.y2,
            y2: self.y1,
            y3: self.y3,
        }
    }

    /// The point of the cone `Ω₃ ∩ {x₁+x₂+x₃ = 1}` it represents.
    pub fn lift(&self) -> ConePoint {
        ConePoint::new(self.y1, self.y2, self.y3)
    }

    pub fn in_section(&self, e: &Exponent) -> bool {
        in_cone(&self.lift(), e)
    }

    pub fn dist(&self, other: &SectionPoint) -> f64 {
        (self.y1 - other.y1).hypot(self.y2 - other.y2)
    }
}

/// Splits a nonzero point of the cone into its section representative and
/// the scale `x₁ + x₂ + x₃`.
pub fn project_to_section(x: &ConePoint) -> Result<(SectionPoint, f64)> {
    if x.is_zero() {
        return Err(Error::domain("the cone apex has no section representative"));
    }
    let scale = x.x1 + x.x2 + x.x3;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!(
            "cannot project {x:?}: coordinates must be nonnegative and finite"
        )));
    }
    Ok((
        SectionPoint::from_parts(x.x1 / scale, x.x2 / scale, x.x3 / scale),
        scale,
    ))
}

pub fn lift_to_cone(y: &SectionPoint, scale: f64) -> Result<ConePoint> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    Ok(y.lift().scale(scale))
}
