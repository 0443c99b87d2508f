//! Chord structure of the graph of `B` away from `p = 2`.
//!
//! For `p > 2` the only chord known in closed form is the symmetry axis,
//! on which `B` is linear. For `p < 2` every chord is perpendicular to the
//! axis, so `B` is a function of `y₁ + y₂` alone; its value on the chord
//! through `(t, t)` is the boundary value at either endpoint.

use std::io::Write;

use serde::Serialize;

use crate::boundary::{self, Arc, BoundaryParam};
use crate::error::{Error, Result};
use crate::lp_domain::{Exponent, Regime, SectionPoint};

/// Slack on the branch ranges for `2t`.
const RANGE_TOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 200;
const MONOTONE_PROBES: usize = 64;

/// The axis interval `[1/(2 + 2^p), 1/2]`, from `γ^{[3]}(½)` to the corner.
pub fn axis_range(e: &Exponent) -> (f64, f64) {
    (1.0 / (2.0 + e.two_pow_p()), 0.5)
}

fn require_below_two(e: &Exponent) -> Result<()> {
    e.require_bellman()?;
    if e.regime() != Regime::BelowTwo {
        return Err(Error::precondition(format!(
            "branch solving needs p < 2, got {e}"
        )));
    }
    Ok(())
}

// Smallest x in [0, 1] with f(x) >= target for f increasing on [0, 1].
// The monotonicity is checked on a probe grid first.
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64) -> Result<f64> {
    let probes: Vec<f64> = (0..MONOTONE_PROBES)
        .map(|k| f(k as f64 / (MONOTONE_PROBES - 1) as f64))
        .collect();
    if probes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Internal(
            "branch equation is not monotone on its bracket".into(),
        ));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// Which chord family passes through the level `y₁ + y₂ = sum`, and the
// solved branch unknown: `u = 1 − s` on arc 1, `w = 2s − 1` on arc 3.
#[derive(Debug, Clone, Copy)]
enum Branch {
    First { u: f64 },
    Third { w: f64 },
}

fn branch_bounds(e: &Exponent) -> (f64, f64) {
    (1.0 / (2f64.powf(e.p() - 1.0) + 1.0), 0.5)
}

// (1−s)^p / D(s) = y₃ on arc 1, increasing in u = 1 − s.
fn solve_first(third: f64, p: f64) -> Result<f64> {
    let g = |u: f64| {
        let a = u.powf(p);
        a / (a + (1.0 - u).powf(p) + 1.0)
    };
    bisect_increasing(g, third)
}

/// A level line `y₁ + y₂ = sum` of the section, `sum + third = 1`.
///
/// `excess = 2^p·sum − 2·third` vanishes at the lowest level, where the
/// branch-3 equation has a square-root singularity; constructors compute it
/// without cancellation from whatever the caller knows exactly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Level {
    sum: f64,
    third: f64,
    excess: f64,
}

impl Level {
    pub(crate) fn section(sum: f64, third: f64, e: &Exponent) -> Self {
        Self {
            sum,
            third,
            excess: e.two_pow_p().mul_add(sum, -2.0 * third),
        }
    }

    /// Through the axis point `(t, t)`.
    pub(crate) fn axis(t: f64, e: &Exponent) -> Self {
        Self {
            sum: 2.0 * t,
            third: 1.0 - 2.0 * t,
            excess: 2.0 * t.mul_add(2.0 + e.two_pow_p(), -1.0),
        }
    }

    /// Through the projection of `(1, 1, t)`.
    pub(crate) fn unit(t: f64, e: &Exponent) -> Self {
        Self {
            sum: 2.0 / (t + 2.0),
            third: t / (t + 2.0),
            excess: 2.0 * (e.two_pow_p() - t) / (t + 2.0),
        }
    }
}

// (1+w)^p + (1−w)^p − 2 = 2^p·sum/third − 2 on arc 3, increasing in
// w = 2s − 1. The left side is formed without cancellation near w = 0.
fn solve_third(level: &Level, p: f64) -> Result<f64> {
    let h = |w: f64| (p * w.ln_1p()).exp_m1() + (p * (-w).ln_1p()).exp_m1();
    let rhs = (level.excess / level.third).max(0.0);
    bisect_increasing(h, rhs)
}

fn solve_level(level: &Level, e: &Exponent) -> Result<Branch> {
    let (lo3, _) = branch_bounds(e);
    let Level { sum, third, .. } = *level;
    if !(sum >= lo3 - RANGE_TOL && sum <= 1.0 + RANGE_TOL) {
        return Err(Error::domain(format!(
            "2t = {sum} outside [{lo3}, 1] for {e}"
        )));
    }
    if third <= 0.5 {
        Ok(Branch::First {
            u: solve_first(third.max(0.0), e.p())?,
        })
    } else {
        Ok(Branch::Third {
            w: solve_third(level, e.p())?,
        })
    }
}

fn level_value(branch: Branch, third: f64, e: &Exponent) -> f64 {
    let p = e.p();
    match branch {
        Branch::First { u } => {
            let s = 1.0 - u;
            (1.0 + s).powf(p) / (s.powf(p) + u.powf(p) + 1.0)
        }
        Branch::Third { w } => w.powf(p) * third.clamp(0.0, 1.0),
    }
}

/// `B` for `p < 2` on a level line.
pub(crate) fn b_below_two(level: &Level, e: &Exponent) -> Result<f64> {
    require_below_two(e)?;
    let branch = solve_level(level, e)?;
    Ok(level_value(branch, level.third, e))
}

/// Parameter `s` of the chord endpoint on `branch` over the axis point
/// `(t, t)`, for `p < 2`.
///
/// Branch 1 covers `2t ∈ [1/2, 1]`; branch 3 covers
/// `2t ∈ [1/(2^{p−1}+1), 1/2]` with `s ∈ [1/2, 1]`.
pub fn solve_branch_param(t: f64, branch: Arc, e: &Exponent) -> Result<f64> {
    require_below_two(e)?;
    let (lo3, seam) = branch_bounds(e);
    let two_t = 2.0 * t;
    let (lo, hi) = match branch {
        Arc::First => (seam, 1.0),
        Arc::Third => (lo3, seam),
        Arc::Second => {
            return Err(Error::domain(
                "arc 2 is the mirror of arc 1; solve on branch 1",
            ))
        }
    };
    if !(two_t >= lo - RANGE_TOL && two_t <= hi + RANGE_TOL) {
        return Err(Error::domain(format!(
            "2t = {two_t} outside branch {} range [{lo}, {hi}]",
            branch.id()
        )));
    }
    let level = Level::axis(0.5 * two_t.clamp(lo, hi), e);
    match branch {
        Arc::First => Ok(1.0 - solve_first(level.third, e.p())?),
        _ => Ok(0.5 * (1.0 + solve_third(&level, e.p())?)),
    }
}

/// `B(t, t)` on the axis range.
pub fn b_on_axis(t: f64, e: &Exponent) -> Result<f64> {
    e.require_bellman()?;
    let (lo, hi) = axis_range(e);
    if !(t >= lo - RANGE_TOL && t <= hi + RANGE_TOL) {
        return Err(Error::domain(format!(
            "t = {t} outside the axis range [{lo}, {hi}] for {e}"
        )));
    }
    let t = t.clamp(lo, hi);
    match e.regime() {
        Regime::BelowTwo => b_below_two(&Level::axis(t, e), e),
        _ => Ok((2.0 + e.two_pow_p()) * t - 1.0),
    }
}

/// A segment of `Ω` with endpoints on `∂Ω` along which `B` is linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chord {
    pub endpoints: [BoundaryParam; 2],
    /// The chord crosses the symmetry axis at `(axis_t, axis_t)`.
    pub axis_t: f64,
    pub value_at_axis: f64,
}

impl Chord {
    pub fn points(&self, e: &Exponent) -> [SectionPoint; 2] {
        self.endpoints
            .map(|b| boundary::gamma(&b, e).expect("chord endpoints are valid parameters"))
    }

    /// Unit direction from the first endpoint to the second.
    pub fn direction(&self, e: &Exponent) -> [f64; 2] {
        let [a, b] = self.points(e);
        let (dx, dy) = (b.y1 - a.y1, b.y2 - a.y2);
        let len = dx.hypot(dy);
        [dx / len, dy / len]
    }
}

fn perpendicular_chord(level: &Level, e: &Exponent) -> Result<Chord> {
    let branch = solve_level(level, e)?;
    let value = level_value(branch, level.third, e);
    let endpoints = match branch {
        Branch::First { u } => [
            BoundaryParam::on(Arc::First, 1.0 - u),
            BoundaryParam::on(Arc::Second, u),
        ],
        Branch::Third { w } => [
            BoundaryParam::on(Arc::Third, 0.5 * (1.0 + w)),
            BoundaryParam::on(Arc::Third, 0.5 * (1.0 - w)),
        ],
    };
    Ok(Chord {
        endpoints,
        axis_t: 0.5 * level.sum,
        value_at_axis: value,
    })
}

fn axis_chord(e: &Exponent) -> Result<Chord> {
    let (lo, _) = axis_range(e);
    Ok(Chord {
        endpoints: [
            BoundaryParam::on(Arc::Third, 0.5),
            BoundaryParam::on(Arc::First, 1.0),
        ],
        axis_t: lo,
        value_at_axis: b_on_axis(lo, e)?,
    })
}

/// The chord of the foliation through `y`.
///
/// For `p > 2` only points on the symmetry axis are supported; the chord is
/// the axis itself, reported with `axis_t` at its lower end.
pub fn chord_through(y: &SectionPoint, e: &Exponent) -> Result<Chord> {
    e.require_bellman()?;
    if !y.in_section(e) {
        return Err(Error::domain(format!(
            "({}, {}) is not in the section",
            y.y1, y.y2
        )));
    }
    match e.regime() {
        Regime::Two => Err(Error::LinearRegime),
        Regime::BelowTwo => {
            let level = if y.y1 == y.y2 {
                Level::axis(y.y1, e)
            } else {
                Level::section(y.y1 + y.y2, y.y3(), e)
            };
            perpendicular_chord(&level, e)
        }
        Regime::AboveTwo => {
            if (y.y1 - y.y2).abs() <= 1e-12 {
                axis_chord(e)
            } else {
                Err(Error::Unsupported(format!(
                    "exact foliation not available off the symmetry axis for {e}"
                )))
            }
        }
    }
}

/// `count` chords crossing the axis at evenly spaced interior points for
/// `p < 2`; the single axis chord for `p > 2`.
pub fn foliation_chords(e: &Exponent, count: usize) -> Result<Vec<Chord>> {
    e.require_bellman()?;
    match e.regime() {
        Regime::Two => Err(Error::LinearRegime),
        Regime::AboveTwo => Ok(vec![axis_chord(e)?]),
        Regime::BelowTwo => {
            let (lo, hi) = axis_range(e);
            (0..count)
                .map(|k| {
                    let t = lo + (hi - lo) * (k as f64 + 0.5) / count as f64;
                    perpendicular_chord(&Level::axis(t, e), e)
                })
                .collect()
        }
    }
}

/// CSV with columns `t, arc_a, s_a, arc_b, s_b, dir_x, dir_y, value`.
pub fn write_chords_csv<W: Write>(chords: &[Chord], e: &Exponent, out: W) -> Result<()> {
    let io = |err: csv::Error| Error::Internal(format!("csv: {err}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t", "arc_a", "s_a", "arc_b", "s_b", "dir_x", "dir_y", "value",
    ])
    .map_err(io)?;
    for c in chords {
        let [a, b] = c.endpoints;
        let [dx, dy] = c.direction(e);
        w.write_record([
            format!("{:.16e}", c.axis_t),
            a.arc.id().to_string(),
            format!("{:.16e}", a.s),
            b.arc.id().to_string(),
            format!("{:.16e}", b.s),
            format!("{dx:.16e}"),
            format!("{dy:.16e}"),
            format!("{:.16e}", c.value_at_axis),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|err| Error::Internal(format!("csv: {err}")))?;
    Ok(())
}
