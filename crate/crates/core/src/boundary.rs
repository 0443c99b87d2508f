//! The boundary `∂Ω`, boundary values of `B` and torsion of the lifted arcs.
//!
//! `∂Ω` is the union of three arcs, one for each way the triangle inequality
//! on the norms can become an equality. With `D(s) = s^p + (1−s)^p + 1`:
//!
//! | arc | `γ(s)`                     | `F(γ(s))`          |
//! |-----|----------------------------|--------------------|
//! | 1   | `(1, s^p) / D`             | `(1+s)^p / D`      |
//! | 2   | `((1−s)^p, 1) / D`         | `(2−s)^p / D`      |
//! | 3   | `(s^p, (1−s)^p) / D`       | `|1−2s|^p / D`     |
//!
//! Traversed in the order 1, 2, 3 the arcs run counter-clockwise through
//! the corners `(1/2, 0) → (1/2, 1/2) → (0, 1/2) → (1/2, 0)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp_domain::{ConePoint, Exponent, Regime, SectionPoint, CONE_TOL};

/// Parameters closer than this to an arc end are clamped in the closed-form
/// torsion, whose power `p − 3` diverges there when `p < 3`.
pub const TORSION_CLAMP: f64 = 1e-9;

/// Default finite-difference step for [`torsion_numeric`].
pub const TORSION_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Arc {
    First = 1,
    Second = 2,
    Third = 3,
}

impl Arc {
    pub const ALL: [Arc; 3] = [Arc::First, Arc::Second, Arc::Third];

    pub fn id(self) -> u8 {
        self as u8
    }

    /// The arc that follows in counter-clockwise order.
    pub fn next(self) -> Arc {
        match self {
            Arc::First => Arc::Second,
            Arc::Second => Arc::Third,
            Arc::Third => Arc::First,
        }
    }
}

impl TryFrom<u8> for Arc {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Arc::First),
            2 => Ok(Arc::Second),
            3 => Ok(Arc::Third),
            _ => Err(Error::domain(format!("arc id {id} not in {{1, 2, 3}}"))),
        }
    }
}

/// A point of `∂Ω` given by its arc and parameter `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryParam {
    pub arc: Arc,
    pub s: f64,
}

impl BoundaryParam {
    pub fn new(arc: u8, s: f64) -> Result<Self> {
        let arc = Arc::try_from(arc)?;
        let b = Self { arc, s };
        b.check()?;
        Ok(b)
    }

    pub fn on(arc: Arc, s: f64) -> Self {
        Self { arc, s }
    }

    fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::domain(format!(
                "boundary parameter s = {} outside [0, 1]",
                self.s
            )));
        }
        Ok(())
    }

    /// The same boundary point seen from the mirrored arc: the swap
    /// `y₁ ↔ y₂` maps arc 1 at `s` to arc 2 at `1 − s` and arc 3 to itself.
    pub fn mirror(&self) -> Self {
        let arc = match self.arc {
            Arc::First => Arc::Second,
            Arc::Second => Arc::First,
            Arc::Third => Arc::Third,
        };
        Self {
            arc,
            s: 1.0 - self.s,
        }
    }
}

fn denom(s: f64, p: f64) -> f64 {
    s.powf(p) + (1.0 - s).powf(p) + 1.0
}

// (γ₁, γ₂, γ₃, F) for a parameter already known to be in [0, 1].
fn arc_point(arc: Arc, s: f64, p: f64) -> (f64, f64, f64, f64) {
    let d = denom(s, p);
    let a = s.powf(p) / d;
    let b = (1.0 - s).powf(p) / d;
    let one = 1.0 / d;
    match arc {
        Arc::First => (one, a, b, (1.0 + s).powf(p) / d),
        Arc::Second => (b, one, a, (2.0 - s).powf(p) / d),
        Arc::Third => (a, b, one, (1.0 - 2.0 * s).abs().powf(p) / d),
    }
}

/// The boundary point `γ^{[arc]}(s)`.
pub fn gamma(b: &BoundaryParam, e: &Exponent) -> Result<SectionPoint> {
    b.check()?;
    let (y1, y2, y3, _) = arc_point(b.arc, b.s, e.p());
    Ok(SectionPoint::from_parts(y1, y2, y3))
}

/// The boundary value `F(γ^{[arc]}(s))`.
pub fn boundary_value(b: &BoundaryParam, e: &Exponent) -> Result<f64> {
    b.check()?;
    Ok(arc_point(b.arc, b.s, e.p()).3)
}

/// `B₃` on `∂Ω₃`, where one of the triangle inequalities is an equality.
///
/// Cases 1 and 2 (`x₁` or `x₂` root is the sum of the other two) give
/// `(x₁^{1/p} + x₂^{1/p})^p`; case 3 gives `|x₁^{1/p} − x₂^{1/p}|^p`. When
/// several cases are tight at once the values coincide.
pub fn cone_boundary_value(x: &ConePoint, e: &Exponent) -> Result<f64> {
    if let Some(msg) = x.violation(e) {
        return Err(Error::domain(format!("{x:?} is not in the cone: {msg}")));
    }
    let (gaps, scale) = x.gaps(e);
    let tol = CONE_TOL * scale;
    let (k, g) = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("three gaps");
    if *g > tol {
        return Err(Error::precondition(format!(
            "{x:?} is interior to the cone"
        )));
    }
    let [r1, r2, _] = x.roots(e);
    Ok(if k == 2 {
        (r1 - r2).abs().powf(e.p())
    } else {
        (r1 + r2).powf(e.p())
    })
}

/// Signed torsion of a lifted boundary curve `(γ, F∘γ)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct TorsionValue(pub f64);

impl TorsionValue {
    pub fn value(&self) -> f64 {
        self.0
    }

    /// `-1`, `0` or `1`.
    pub fn sign(&self) -> i8 {
        if self.0 > 0.0 {
            1
        } else if self.0 < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// Closed-form torsion of the lifted arc, i.e. the determinant of
/// `(r′, r″, r‴)` for `r = (γ₁, γ₂, F∘γ)`.
///
/// For `p > 2`: negative on arc 1, positive on arc 2, and on arc 3 negative
/// before `s = 1/2` and positive after. Every sign flips for `p < 2`; the
/// torsion vanishes identically at `p = 2`.
pub fn torsion_closed(b: &BoundaryParam, e: &Exponent) -> Result<TorsionValue> {
    b.check()?;
    if e.regime() == Regime::Two {
        return Ok(TorsionValue(0.0));
    }
    if b.arc == Arc::Third && b.s == 0.5 {
        return Err(Error::domain("arc 3 torsion is undefined at s = 1/2"));
    }
    let p = e.p();
    let s = b.s.clamp(TORSION_CLAMP, 1.0 - TORSION_CLAMP);
    let c = 2.0 * (p - 2.0) * (p - 1.0).powi(2) * p.powi(3) / denom(s, p).powi(4);
    let base = (1.0 - s) * s;
    let v = match b.arc {
        Arc::First => -c * (base * (1.0 + s)).powf(p - 3.0),
        Arc::Second => c * (base * (2.0 - s)).powf(p - 3.0),
        Arc::Third => {
            let m = 1.0 - 2.0 * s;
            -m.signum() * c * (base * m.abs()).powf(p - 3.0)
        }
    };
    Ok(TorsionValue(v))
}

// Fourth-order central stencils for the first three derivatives.
fn derivatives(f: impl Fn(f64) -> f64, s: f64, h: f64) -> [f64; 3] {
    let v = |k: f64| f(s + k * h);
    let (m3, m2, m1, z, p1, p2, p3) = (v(-3.0), v(-2.0), v(-1.0), v(0.0), v(1.0), v(2.0), v(3.0));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h);
    let d3 = (m3 - 8.0 * m2 + 13.0 * m1 - 13.0 * p1 + 8.0 * p2 - p3) / (8.0 * h * h * h);
    [d1, d2, d3]
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Torsion determinant of the lifted arc by finite differences.
///
/// Rows are the first, second and third derivatives of `(γ₁, γ₂, F∘γ)`,
/// each from a 4th-order central stencil of step `h`. The stencil must fit
/// in `(0, 1)` and, on arc 3, stay clear of the kink at `s = 1/2`.
pub fn torsion_numeric(b: &BoundaryParam, e: &Exponent, h: f64) -> Result<TorsionValue> {
    b.check()?;
    let reach = 3.0 * h;
    if !(h > 0.0) || b.s - reach <= 0.0 || b.s + reach >= 1.0 {
        return Err(Error::precondition(format!(
            "step h = {h} does not fit around s = {} inside (0, 1)",
            b.s
        )));
    }
    if b.arc == Arc::Third && (b.s - 0.5).abs() < reach {
        return Err(Error::precondition(format!(
            "step h = {h} straddles the arc 3 midpoint from s = {}",
            b.s
        )));
    }
    let p = e.p();
    let comp = |k: usize| {
        move |s: f64| {
            let (y1, y2, _, f) = arc_point(b.arc, s, p);
            [y1, y2, f][k]
        }
    };
    let cols = [
        derivatives(comp(0), b.s, h),
        derivatives(comp(1), b.s, h),
        derivatives(comp(2), b.s, h),
    ];
    let rows = [
        [cols[0][0], cols[1][0], cols[2][0]],
        [cols[0][1], cols[1][1], cols[2][1]],
        [cols[0][2], cols[1][2], cols[2][2]],
    ];
    Ok(TorsionValue(det3(rows)))
}

/// Result of re-running [`torsion_numeric`] at half the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorsionConvergence {
    pub coarse: f64,
    pub fine: f64,
    pub rel_change: f64,
}

impl TorsionConvergence {
    /// Halving the step moved the value by less than 1%.
    pub fn converged(&self) -> bool {
        self.rel_change < 1e-2
    }
}

pub fn torsion_convergence(b: &BoundaryParam, e: &Exponent, h: f64) -> Result<TorsionConvergence> {
    let coarse = torsion_numeric(b, e, h)?.value();
    let fine = torsion_numeric(b, e, h / 2.0)?.value();
    let rel_change = (coarse - fine).abs() / fine.abs().max(f64::MIN_POSITIVE);
    Ok(TorsionConvergence {
        coarse,
        fine,
        rel_change,
    })
}
