//! Randomized lower bounds for `B₃` from mixtures of scalar configurations.
//!
//! A scalar pair `(a, b) = (cos θ, sin θ)` has norm data
//! `c(θ) = (|a|^p, |b|^p, |a − b|^p)` on the boundary of the cone and value
//! `|a + b|^p`. If `x = Σ wᵢ c(θᵢ)` with `wᵢ ≥ 0`, the step function taking
//! the scaled values `(aᵢ, bᵢ)` on pieces of relative size `wᵢ` realises `x`
//! exactly, so `Σ wᵢ |aᵢ + bᵢ|^p ≤ B₃(x)`. Three angles suffice to reach
//! every point of the concave hull; the search climbs over angle triples.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{norms, sum_norm, FunctionPair};
use crate::error::{Error, Result};
use crate::lp_domain::{ConePoint, Exponent};

/// Random triples drawn before the local search starts.
const WARMUP: u64 = 2000;

/// Feasibility tolerance on the realised norm data, relative to `Σ xᵢ`.
const FEASIBILITY_TOL: f64 = 1e-8;

/// Largest accepted error of a barycentric reconstruction of the target.
const RESIDUAL_TOL: f64 = 1e-13;

const STEP_MAX: f64 = 0.5;
const STEP_MIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    /// A pair with `norms(witness) = x` whose `sum_norm` is `value`.
    pub witness: Option<FunctionPair>,
    pub budget: u64,
    pub seed: u64,
}

#[derive(Clone, Copy)]
struct Atom {
    a: f64,
    b: f64,
    // section coordinates of c(θ) and value divided by Σc(θ)
    y: [f64; 2],
    value: f64,
    mass: f64,
}

fn atom(theta: f64, p: f64) -> Atom {
    let (b, a) = theta.sin_cos();
    let c = [a.abs().powf(p), b.abs().powf(p), (a - b).abs().powf(p)];
    let mass = c[0] + c[1] + c[2];
    Atom {
        a,
        b,
        y: [c[0] / mass, c[1] / mass],
        value: (a + b).abs().powf(p) / mass,
        mass,
    }
}

// Barycentric weights of q in the triangle, if it contains q.
fn weights(t: &[Atom; 3], q: [f64; 2]) -> Option<[f64; 3]> {
    let [a, b, c] = [t[0].y, t[1].y, t[2].y];
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let l1 = ((b[0] - q[0]) * (c[1] - q[1]) - (c[0] - q[0]) * (b[1] - q[1])) / det;
    let l2 = ((c[0] - q[0]) * (a[1] - q[1]) - (a[0] - q[0]) * (c[1] - q[1])) / det;
    let l3 = 1.0 - l1 - l2;
    if !(l1 >= 0.0 && l2 >= 0.0 && l3 >= 0.0) {
        return None;
    }
    // nearly flat triangles give weights that do not reproduce q
    let r = (0..2)
        .map(|i| (l1 * a[i] + l2 * b[i] + l3 * c[i] - q[i]).abs())
        .fold(0.0, f64::max);
    (r <= RESIDUAL_TOL).then_some([l1, l2, l3])
}

fn mixture_value(t: &[Atom; 3], q: [f64; 2]) -> Option<f64> {
    weights(t, q).map(|l| (0..3).map(|k| l[k] * t[k].value).sum())
}

// Step function realising `scale · Σ lᵢ c(θᵢ)/Σc(θᵢ)`.
fn mixture_witness(t: &[Atom; 3], l: [f64; 3], scale: f64, p: f64) -> Option<FunctionPair> {
    let raw: Vec<(f64, &Atom)> = (0..3)
        .filter(|&k| l[k] > 0.0)
        .map(|k| (scale * l[k] / t[k].mass, &t[k]))
        .collect();
    let total: f64 = raw.iter().map(|r| r.0).sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    let k = total.powf(1.0 / p);
    let (mut w, mut phi, mut psi) = (Vec::new(), Vec::new(), Vec::new());
    for (m, a) in raw {
        w.push(m / total);
        phi.push(k * a.a);
        psi.push(k * a.b);
    }
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= sum);
    FunctionPair::new(w, phi, psi).ok()
}

fn feasible(pair: &FunctionPair, x: &ConePoint, e: &Exponent) -> bool {
    let n = norms(pair, e);
    let scale = x.x1 + x.x2 + x.x3;
    n.coords()
        .iter()
        .zip(x.coords())
        .all(|(a, b)| (a - b).abs() <= FEASIBILITY_TOL * scale)
}

// One-atom candidates for points on the boundary of the cone.
fn boundary_candidate(x: &ConePoint, e: &Exponent) -> Option<(f64, FunctionPair)> {
    let p = e.p();
    let (a, b) = (x.x1.powf(1.0 / p), x.x2.powf(1.0 / p));
    [b, -b]
        .into_iter()
        .map(|b| FunctionPair::constant(a, b))
        .filter(|pair| feasible(pair, x, e))
        .map(|pair| (sum_norm(&pair, e), pair))
        .max_by(|u, v| u.0.total_cmp(&v.0))
}

/// Best lower bound for `B₃(x)` found among `budget` candidate mixtures.
///
/// The candidate sequence depends only on `x`, `p` and `seed`, so a larger
/// budget never gives a smaller bound.
pub fn search_lower_bound(
    x: &ConePoint,
    e: &Exponent,
    budget: u64,
    seed: u64,
) -> Result<LowerBound> {
    if let Some(msg) = x.violation(e) {
        return Err(Error::domain(format!("{x:?} is not in the cone: {msg}")));
    }
    let mut best = LowerBound {
        value: 0.0,
        witness: None,
        budget,
        seed,
    };
    if x.is_zero() {
        return Ok(best);
    }
    let p = e.p();
    let scale = x.x1 + x.x2 + x.x3;
    let q = [x.x1 / scale, x.x2 / scale];
    let mut best_value = f64::NEG_INFINITY;
    if let Some((v, pair)) = boundary_candidate(x, e) {
        best_value = v / scale;
        best.witness = Some(pair);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| rng.random_range(0.0..PI);
    let mut current: Option<([f64; 3], f64)> = None;
    let mut best_triple: Option<[f64; 3]> = None;
    let mut step = STEP_MAX;
    for k in 0..budget {
        let angles = match current {
            Some((c, _)) if k >= WARMUP => {
                let mut next = c;
                if rng.random_bool(0.5) {
                    let i = rng.random_range(0..3);
                    next[i] += step * rng.sample::<f64, _>(StandardNormal);
                } else {
                    for a in next.iter_mut() {
                        *a += step * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                next
            }
            _ => [draw(&mut rng), draw(&mut rng), draw(&mut rng)],
        };
        let triple = angles.map(|t| atom(t, p));
        let value = mixture_value(&triple, q);
        let improved = match (value, current) {
            (Some(v), Some((_, cv))) => v >= cv,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if k >= WARMUP && current.is_some() {
            step = if improved {
                (step * 1.5).min(STEP_MAX)
            } else {
                step * 0.97
            };
            if step < STEP_MIN {
                step = STEP_MAX;
            }
        }
        if improved {
            current = Some((angles, value.unwrap()));
        }
        if let Some(v) = value {
            if v > best_value {
                best_value = v;
                best_triple = Some(angles);
            }
        }
    }

    if let Some(angles) = best_triple {
        let triple = angles.map(|t| atom(t, p));
        let l = weights(&triple, q).expect("best triple contains the target");
        if let Some(pair) = mixture_witness(&triple, l, scale, p) {
            if feasible(&pair, x, e) {
                best.witness = Some(pair);
            }
        }
    }
    best.value = if best_value.is_finite() {
        best_value * scale
    } else {
        0.0
    };
    Ok(best)
}

/// The value of [`search_lower_bound`].
pub fn lower_bound_b3(x: &ConePoint, e: &Exponent, budget: u64, seed: u64) -> Result<f64> {
    Ok(search_lower_bound(x, e, budget, seed)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::eval_b3;
    use crate::lp_domain::in_cone;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn atoms_lie_on_the_cone_boundary() {
        for &p in &[1.5, 3.0] {
            let ep = e(p);
            for k in 0..100 {
                let (b, a) = (PI * k as f64 / 100.0).sin_cos();
                let c = ConePoint::new(a.abs().powf(p), b.abs().powf(p), (a - b).abs().powf(p));
                assert!(in_cone(&c, &ep));
                let (gaps, s) = c.gaps(&ep);
                assert!(gaps.iter().cloned().fold(f64::INFINITY, f64::min) <= 1e-12 * s);
            }
        }
    }

    #[test]
    fn examples() {
        let v = lower_bound_b3(&ConePoint::new(1.0, 0.0, 1.0), &e(3.0), 1000, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = lower_bound_b3(&ConePoint::new(1.0, 1.0, 8.0), &e(3.0), 1000, 1).unwrap();
        assert!(v.abs() < 1e-6);
        let v = lower_bound_b3(&ConePoint::new(1.0, 1.0, 1.0), &e(2.0), 100_000, 1).unwrap();
        assert!((v - 3.0).abs() < 2e-2 && v <= 3.0 + 1e-9, "{v}");
        assert!(lower_bound_b3(&ConePoint::new(1.0, 1.0, 9.0), &e(3.0), 10, 1).is_err());
    }

    #[test]
    fn witness_realises_the_target() {
        let ep = e(1.5);
        let x = ConePoint::new(0.7, 0.4, 0.5);
        let lb = search_lower_bound(&x, &ep, 20_000, 3).unwrap();
        let w = lb.witness.unwrap();
        assert!(feasible(&w, &x, &ep));
        assert!((sum_norm(&w, &ep) - lb.value).abs() < 1e-9);
        assert!(lb.value <= eval_b3(&x, &ep).unwrap().value + 1e-9);
    }

    #[test]
    fn monotone_in_budget_and_deterministic() {
        let ep = e(3.0);
        let x = ConePoint::new(0.3, 0.2, 0.25);
        let mut last = f64::NEG_INFINITY;
        for budget in [100, 1000, 5000, 20_000] {
            let v = lower_bound_b3(&x, &ep, budget, 9).unwrap();
            assert!(v >= last);
            last = v;
        }
        assert_eq!(
            search_lower_bound(&x, &ep, 3000, 5).unwrap(),
            search_lower_bound(&x, &ep, 3000, 5).unwrap()
        );
    }
}
