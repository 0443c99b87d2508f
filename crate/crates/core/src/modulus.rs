//! Modulus of convexity `δ(ε)` of `L^p`, in closed form and through `B₃`.
//!
//! For unit vectors with `‖φ − ψ‖ = ε` the largest possible `‖φ + ψ‖^p` is
//! `B₃(1, 1, ε^p)` (the supremum over `t ≥ ε^p` is attained at the left end
//! since `B₃(1, 1, ·)` decreases), so `2^p (1 − δ)^p = B₃(1, 1, ε^p)`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::bellman::b3_unit;
use crate::error::{Error, Result};
use crate::lp_domain::{Exponent, Regime};

const MAX_BISECTIONS: usize = 200;
const MONOTONE_PROBES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    ClosedForm,
    ImplicitRoot,
    BellmanPipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusPoint {
    pub eps: f64,
    pub delta: f64,
    pub method: Method,
}

fn check_eps(eps: f64, e: &Exponent) -> Result<()> {
    e.require_bellman()?;
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 2]")));
    }
    Ok(())
}

// Root of (1 − δ + ε/2)^p + |1 − δ − ε/2|^p = 2. With a = ε/2 and
// w = (1 − δ)/a this reads (1 + w)^p + |1 − w|^p − 2 = 2(a^{−p} − 1), whose
// left side increases in w ≥ 0 and is formed without cancellation near the
// double root w = 0 at ε = 2.
fn implicit_root(eps: f64, p: f64) -> Result<f64> {
    let a = 0.5 * eps;
    let lhs = |w: f64| {
        let gap = if w <= 1.0 {
            (p * (-w).ln_1p()).exp_m1()
        } else {
            (w - 1.0).powf(p) - 1.0
        };
        (p * w.ln_1p()).exp_m1() + gap
    };
    let rhs = 2.0 * (-p * a.ln()).exp_m1();
    let hi_w = 1.0 / a;
    let probes: Vec<f64> = (0..MONOTONE_PROBES)
        .map(|k| lhs(hi_w * k as f64 / (MONOTONE_PROBES - 1) as f64))
        .collect();
    if probes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Internal("modulus equation is not increasing".into()));
    }
    let (mut lo, mut hi) = (0.0f64, hi_w);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lhs(mid) < rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((1.0 - a * 0.5 * (lo + hi)).clamp(0.0, 1.0))
}

/// `δ(ε)` from the explicit formula for `p ≥ 2` and the implicit equation
/// for `p < 2`.
pub fn delta_closed(eps: f64, e: &Exponent) -> Result<ModulusPoint> {
    check_eps(eps, e)?;
    let p = e.p();
    let (delta, method) = match e.regime() {
        Regime::BelowTwo => (implicit_root(eps, p)?, Method::ImplicitRoot),
        _ => {
            let r = (eps / 2.0).powf(p);
            (-((-r).ln_1p() / p).exp_m1(), Method::ClosedForm)
        }
    };
    Ok(ModulusPoint { eps, delta, method })
}

/// `δ(ε) = 1 − (B₃(1, 1, ε^p) / 2^p)^{1/p}`.
pub fn delta_bellman(eps: f64, e: &Exponent) -> Result<ModulusPoint> {
    check_eps(eps, e)?;
    let p = e.p();
    let ratio = b3_unit(eps.powf(p), e)? / e.two_pow_p();
    let delta = if ratio > 0.0 {
        -(ratio.ln() / p).exp_m1()
    } else {
        1.0
    };
    Ok(ModulusPoint {
        eps,
        delta,
        method: Method::BellmanPipeline,
    })
}

/// Grid search of `t ↦ B₃(1, 1, t)` over `[ε^p, 2^p]` with `m + 1` nodes;
/// returns the maximising node. The left end is expected.
pub fn sup_argmax(eps: f64, e: &Exponent, m: usize) -> Result<f64> {
    check_eps(eps, e)?;
    let (lo, hi) = (eps.powf(e.p()), e.two_pow_p());
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..=m.max(1) {
        let t = lo + (hi - lo) * k as f64 / m.max(1) as f64;
        let v = b3_unit(t, e)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    Ok(best.0)
}

/// `ε_k = 2k/n` for `k = 1, …, n`.
pub fn eps_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 2.0 * k as f64 / n as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub eps: f64,
    pub delta_closed: f64,
    pub delta_bellman: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusCurve {
    pub p: f64,
    pub rows: Vec<CurveRow>,
    pub max_discrepancy: f64,
}

/// Both estimates of `δ` at every node of a sorted grid in `(0, 2]`.
pub fn modulus_curve(e: &Exponent, eps_grid: &[f64]) -> Result<ModulusCurve> {
    if eps_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::precondition("eps grid must be sorted"));
    }
    let rows = eps_grid
        .par_iter()
        .map(|&eps| {
            let c = delta_closed(eps, e)?.delta;
            let b = delta_bellman(eps, e)?.delta;
            Ok(CurveRow {
                eps,
                delta_closed: c,
                delta_bellman: b,
                discrepancy: (c - b).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    Ok(ModulusCurve {
        p: e.p(),
        rows,
        max_discrepancy,
    })
}

impl ModulusCurve {
    /// CSV with columns `eps, delta_closed, delta_bellman, discrepancy`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |err: csv::Error| Error::Internal(format!("csv: {err}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eps", "delta_closed", "delta_bellman", "discrepancy"])
            .map_err(io)?;
        for r in &self.rows {
            w.write_record(
                [r.eps, r.delta_closed, r.delta_bellman, r.discrepancy]
                    .map(|v| format!("{v:.16e}")),
            )
            .map_err(io)?;
        }
        w.flush()
            .map_err(|err| Error::Internal(format!("csv: {err}")))?;
        Ok(())
    }
}
