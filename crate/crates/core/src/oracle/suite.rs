//! Randomized verification batches with deterministic, mergeable reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use super::{hanner_holds, verify_clarkson, verify_hanner, FunctionPair, Slack};
use crate::bellman::{eval_b, BellmanValue};
use crate::error::Result;
use crate::lp_domain::{ConePoint, Exponent, SectionPoint};

/// Trials handled by one generator stream.
const CHUNK: u64 = 4096;

/// Values of random atoms are clipped to `[−CLIP, CLIP]`.
const CLIP: f64 = 10.0;

fn stream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunks(trials: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let n = trials.div_ceil(CHUNK);
    (0..n)
        .into_par_iter()
        .map(move |c| (c, CHUNK.min(trials - c * CHUNK)))
}

/// A pair with `atoms` pieces: exponential weights normalised to one and
/// standard Cauchy values clipped to `[−10, 10]`.
pub fn random_pair<R: Rng>(rng: &mut R, atoms: usize) -> FunctionPair {
    let cauchy = Cauchy::<f64>::new(0.0, 1.0).expect("unit scale");
    let mut weights: Vec<f64> = (0..atoms)
        .map(|_| {
            let w: f64 = Exp1.sample(rng);
            w + f64::MIN_POSITIVE
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut value = || cauchy.sample(rng).clamp(-CLIP, CLIP);
    let phi: Vec<f64> = (0..atoms).map(|_| value()).collect();
    let psi: Vec<f64> = (0..atoms).map(|_| value()).collect();
    FunctionPair { weights, phi, psi }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Inequality {
    Hanner,
    Clarkson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub inequality: Inequality,
    pub p: f64,
    pub seed: u64,
    pub trials: u64,
    pub violations: u64,
    /// Smallest relative margin `±slack/scale`, oriented so that the
    /// contract is `margin ≥ −1e−12`.
    pub worst_margin: f64,
    pub worst_slack: Option<Slack>,
    pub worst_witness: Option<FunctionPair>,
    /// Why the suite did not run, if it did not.
    pub skipped: Option<String>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

// Margin of a slack under the sign contract of the inequality at p.
fn margin(ineq: Inequality, s: &Slack, p: f64) -> f64 {
    let r = s.relative();
    match ineq {
        Inequality::Clarkson => r,
        Inequality::Hanner if p > 2.0 => r,
        Inequality::Hanner if p < 2.0 => -r,
        Inequality::Hanner => -r.abs(),
    }
}

struct Worst {
    violations: u64,
    margin: f64,
    slack: Option<Slack>,
    witness: Option<FunctionPair>,
}

/// Checks one inequality on `trials` random 8-atom pairs.
pub fn run_inequality_suite(
    ineq: Inequality,
    e: &Exponent,
    trials: u64,
    seed: u64,
) -> InequalityReport {
    let p = e.p();
    let mut report = InequalityReport {
        inequality: ineq,
        p,
        seed,
        trials,
        violations: 0,
        worst_margin: f64::INFINITY,
        worst_slack: None,
        worst_witness: None,
        skipped: None,
    };
    if ineq == Inequality::Clarkson && p <= 1.0 {
        report.trials = 0;
        report.skipped = Some("Clarkson's inequality is not defined at p = 1".into());
        return report;
    }
    let parts: Vec<Worst> = chunks(trials)
        .map(|(c, len)| {
            let mut rng = stream(seed, c);
            let mut w = Worst {
                violations: 0,
                margin: f64::INFINITY,
                slack: None,
                witness: None,
            };
            for _ in 0..len {
                let pair = random_pair(&mut rng, 8);
                let (slack, ok) = match ineq {
                    Inequality::Hanner => {
                        let s = verify_hanner(&pair, e);
                        (s, hanner_holds(&s, e))
                    }
                    Inequality::Clarkson => {
                        let s = verify_clarkson(&pair, e).expect("p > 1");
                        (s, s.at_least_zero())
                    }
                };
                if !ok {
                    w.violations += 1;
                }
                let m = margin(ineq, &slack, p);
                if m < w.margin {
                    w.margin = m;
                    w.slack = Some(slack);
                    w.witness = Some(pair);
                }
            }
            w
        })
        .collect();
    for w in parts {
        report.violations += w.violations;
        if w.margin < report.worst_margin {
            report.worst_margin = w.margin;
            report.worst_slack = w.slack;
            report.worst_witness = w.witness;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub p: f64,
    pub seed: u64,
    pub trials: u64,
    /// `max(0, α f(x) + (1−α) f(x′) − f(αx + (1−α)x′))` over all trials.
    pub max_violation: f64,
    pub worst: Option<(ConePoint, ConePoint, f64)>,
    pub evaluation_errors: u64,
}

fn random_section_point(rng: &mut ChaCha8Rng, e: &Exponent) -> SectionPoint {
    loop {
        let y = SectionPoint::new(rng.random(), rng.random());
        if y.in_section(e) {
            return y;
        }
    }
}

fn random_cone_point(rng: &mut ChaCha8Rng, e: &Exponent) -> ConePoint {
    let k = rng.random_range(0.5..2.0);
    random_section_point(rng, e).lift().scale(k)
}

/// Midpoint concavity test of `evaluator` on random triples `(x, x′, α)`
/// in the cone.
pub fn verify_concavity<F>(evaluator: F, e: &Exponent, trials: u64, seed: u64) -> ConcavityReport
where
    F: Fn(&ConePoint) -> Result<f64> + Sync,
{
    type Part = (f64, Option<(ConePoint, ConePoint, f64)>, u64);
    let parts: Vec<Part> = chunks(trials)
        .map(|(c, len)| {
            let mut rng = stream(seed, c);
            let mut part: Part = (0.0, None, 0);
            for _ in 0..len {
                let (a, b) = (
                    random_cone_point(&mut rng, e),
                    random_cone_point(&mut rng, e),
                );
                let alpha: f64 = rng.random();
                let mix = ConePoint::new(
                    alpha * a.x1 + (1.0 - alpha) * b.x1,
                    alpha * a.x2 + (1.0 - alpha) * b.x2,
                    alpha * a.x3 + (1.0 - alpha) * b.x3,
                );
                match (evaluator(&a), evaluator(&b), evaluator(&mix)) {
                    (Ok(fa), Ok(fb), Ok(fm)) => {
                        let v = alpha * fa + (1.0 - alpha) * fb - fm;
                        if v > part.0 || part.1.is_none() {
                            part.0 = part.0.max(v);
                            part.1 = Some((a, b, alpha));
                        }
                    }
                    _ => part.2 += 1,
                }
            }
            part
        })
        .collect();
    let mut report = ConcavityReport {
        p: e.p(),
        seed,
        trials,
        max_violation: 0.0,
        worst: None,
        evaluation_errors: 0,
    };
    for (v, w, errs) in parts {
        report.evaluation_errors += errs;
        if v > report.max_violation || report.worst.is_none() {
            report.max_violation = report.max_violation.max(v);
            report.worst = w;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorantReport {
    pub p: f64,
    pub grid: usize,
    pub points: usize,
    /// Minimum of `2^{p−1}(y₁ + y₂) − B(y)` over exact and numeric values.
    pub min_slack_exact: f64,
    pub min_slack_numeric: f64,
    pub worst: Option<SectionPoint>,
}

impl MajorantReport {
    pub fn passed(&self) -> bool {
        self.min_slack_exact >= -1e-9 && self.min_slack_numeric >= -5e-3
    }
}

/// Compares `B` with the linear majorant `2^{p−1}(y₁ + y₂)` on the lattice
/// points of `[0, m]²` inside the section, `m = 1/(1 + 2^{1−p})`.
pub fn verify_majorant(e: &Exponent, grid: usize) -> Result<MajorantReport> {
    let p = e.p();
    let g = 2f64.powf(p - 1.0);
    let m = 1.0 / (1.0 + 2f64.powf(1.0 - p));
    let step = m / (grid.max(2) - 1) as f64;
    let values: Vec<(SectionPoint, BellmanValue)> = (0..grid * grid)
        .into_par_iter()
        .filter_map(|k| {
            let y = SectionPoint::new((k / grid) as f64 * step, (k % grid) as f64 * step);
            y.in_section(e).then_some(y)
        })
        .map(|y| eval_b(&y, e).map(|v| (y, v)))
        .collect::<Result<_>>()?;
    let mut report = MajorantReport {
        p,
        grid,
        points: values.len(),
        min_slack_exact: f64::INFINITY,
        min_slack_numeric: f64::INFINITY,
        worst: None,
    };
    let mut worst = f64::INFINITY;
    for (y, v) in values {
        let slack = g * (y.y1 + y.y2) - v.value;
        let slot = if v.is_exact() {
            &mut report.min_slack_exact
        } else {
            &mut report.min_slack_numeric
        };
        *slot = slot.min(slack);
        if slack < worst {
            worst = slack;
            report.worst = Some(y);
        }
    }
    Ok(report)
}
