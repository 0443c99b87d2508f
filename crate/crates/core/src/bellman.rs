//! Evaluators for `B` on the section and `B₃` on the cone.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::boundary::cone_boundary_value;
use crate::envelope::{build_envelope, sample_boundary, HullSurface};
use crate::error::{Error, Result};
use crate::foliation::{b_below_two, Level};
use crate::lp_domain::{project_to_section, ConePoint, Exponent, Regime, SectionPoint};

/// Boundary samples per arc of the cached numeric surface.
pub const DEFAULT_SAMPLES: usize = 2048;

/// `|y₁ − y₂|` below which a point counts as lying on the symmetry axis.
pub const AXIS_TOL: f64 = 1e-12;

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    ExactLinear,
    Foliation,
    EnvelopeNumeric,
    Boundary,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ExactLinear => "EXACT_LINEAR",
            Mode::Foliation => "FOLIATION",
            Mode::EnvelopeNumeric => "ENVELOPE_NUMERIC",
            Mode::Boundary => "BOUNDARY",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellmanValue {
    pub value: f64,
    pub mode: Mode,
}

impl BellmanValue {
    /// Numeric values are inscribed approximations; the others are exact up
    /// to rounding.
    pub fn is_exact(&self) -> bool {
        self.mode != Mode::EnvelopeNumeric
    }
}

type SurfaceSlot = OnceLock<Result<HullSurface>>;

/// The envelope surface for `(p, n)`, built on first use and shared.
///
/// Concurrent first calls for the same key build the surface once; other
/// callers block until it is ready.
pub fn envelope_surface(e: &Exponent, n: usize) -> Result<&'static HullSurface> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), &'static SurfaceSlot>>> = OnceLock::new();
    let slot: &'static SurfaceSlot = {
        let mut map = CACHE
            .get_or_init(Default::default)
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner());
        map.entry((e.p().to_bits(), n))
            .or_insert_with(|| Box::leak(Box::new(OnceLock::new())))
    };
    slot.get_or_init(|| build_envelope(&sample_boundary(e, n)?))
        .as_ref()
        .map_err(Clone::clone)
}

/// `B(y)` with the default envelope resolution.
pub fn eval_b(y: &SectionPoint, e: &Exponent) -> Result<BellmanValue> {
    eval_b_with(y, e, DEFAULT_SAMPLES)
}

/// `B(y)`, using `n` boundary samples per arc if the numeric envelope is
/// needed (`p > 2` off the symmetry axis).
pub fn eval_b_with(y: &SectionPoint, e: &Exponent, n: usize) -> Result<BellmanValue> {
    e.require_bellman()?;
    // evaluate on one side of the axis so that the swap symmetry is exact
    let y = if y.y1 < y.y2 { y.swap() } else { *y };
    let x = y.lift();
    if let Some(msg) = x.violation(e) {
        return Err(Error::domain(format!(
            "({}, {}) is not in the section: {msg}",
            y.y1, y.y2
        )));
    }
    let p2 = e.two_pow_p();
    let exact = |value, mode| Ok(BellmanValue { value, mode });
    match e.regime() {
        Regime::Two => return exact(2.0 * y.y1 + 2.0 * y.y2 - y.y3(), Mode::ExactLinear),
        Regime::AboveTwo if (y.y1 - y.y2).abs() <= AXIS_TOL => {
            let t = 0.5 * (y.y1 + y.y2);
            return exact((2.0 + p2) * t - 1.0, Mode::Foliation);
        }
        _ => {}
    }
    if let Ok(v) = cone_boundary_value(&x, e) {
        return exact(v, Mode::Boundary);
    }
    if e.regime() == Regime::BelowTwo {
        return exact(
            b_below_two(&Level::section(y.y1 + y.y2, y.y3(), e), e)?,
            Mode::Foliation,
        );
    }
    let surface = envelope_surface(e, n)?;
    exact(surface.eval_clamped(&y), Mode::EnvelopeNumeric)
}

/// `B₃(x)` by homogeneity from the section value.
pub fn eval_b3(x: &ConePoint, e: &Exponent) -> Result<BellmanValue> {
    eval_b3_with(x, e, DEFAULT_SAMPLES)
}

pub fn eval_b3_with(x: &ConePoint, e: &Exponent, n: usize) -> Result<BellmanValue> {
    e.require_bellman()?;
    if let Some(msg) = x.violation(e) {
        return Err(Error::domain(format!("{x:?} is not in the cone: {msg}")));
    }
    if x.is_zero() {
        return Ok(BellmanValue {
            value: 0.0,
            mode: Mode::Boundary,
        });
    }
    let (y, scale) = project_to_section(x)?;
    let b = eval_b_with(&y, e, n)?;
    Ok(BellmanValue {
        value: scale * b.value,
        mode: b.mode,
    })
}

/// `B₃(1, 1, t)` for `t ∈ [0, 2^p]`.
pub fn b3_unit(t: f64, e: &Exponent) -> Result<f64> {
    e.require_bellman()?;
    let p2 = e.two_pow_p();
    if !(t >= 0.0 && t <= p2 * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("t = {t} outside [0, 2^p = {p2}]")));
    }
    let t = t.min(p2);
    match e.regime() {
        Regime::BelowTwo => Ok((t + 2.0) * b_below_two(&Level::unit(t, e), e)?),
        _ => Ok(p2 - t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    fn b(y1: f64, y2: f64, p: f64) -> BellmanValue {
        eval_b(&SectionPoint::new(y1, y2), &e(p)).unwrap()
    }

    fn b3(x: [f64; 3], p: f64) -> BellmanValue {
        eval_b3(&ConePoint::new(x[0], x[1], x[2]), &e(p)).unwrap()
    }

    #[test]
    fn section_examples() {
        let v = b(0.3, 0.3, 2.0);
        assert!((v.value - 0.8).abs() < 1e-15 && v.mode == Mode::ExactLinear);
        let v = b(0.3, 0.2, 1.5);
        assert!((v.value - 0.5).abs() < 1e-12 && v.mode == Mode::Foliation);
        let v = b(0.2, 0.2, 3.0);
        assert!((v.value - 1.0).abs() < 1e-15 && v.mode == Mode::Foliation);
        assert!(matches!(
            eval_b(&SectionPoint::new(0.6, 0.6), &e(3.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eval_b(&SectionPoint::new(0.3, 0.3), &e(1.005)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cone_examples() {
        let v = b3([1.0, 1.0, 0.0], 3.0);
        assert!((v.value - 8.0).abs() < 1e-12);
        let v = b3([1.0, 1.0, 8.0], 3.0);
        assert!(v.value.abs() < 1e-12 && v.mode == Mode::Foliation);
        for p in [1.5, 2.0, 3.0, 4.0] {
            let v = b3([1.0, 0.0, 1.0], p);
            assert!((v.value - 1.0).abs() < 1e-12, "p={p}: {v:?}");
        }
        assert_eq!(
            b3([0.0, 0.0, 0.0], 3.0),
            BellmanValue {
                value: 0.0,
                mode: Mode::Boundary
            }
        );
        let err = eval_b3(&ConePoint::new(1.0, 1.0, 9.0), &e(3.0)).unwrap_err();
        assert!(err.to_string().contains("triangle inequality"));
    }

    #[test]
    fn unit_examples() {
        assert!((b3_unit(1.0, &e(3.0)).unwrap() - 7.0).abs() < 1e-15);
        assert!((b3_unit(3.0, &e(2.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((b3_unit(0.0, &e(1.5)).unwrap() - 2f64.powf(1.5)).abs() < 1e-12);
        assert!(b3_unit(2f64.powf(1.5), &e(1.5)).unwrap().abs() < 1e-12);
        assert!(b3_unit(9.0, &e(3.0)).is_err());
        assert!(b3_unit(-0.1, &e(1.5)).is_err());
    }

    #[test]
    fn unit_matches_cone_evaluation() {
        for &p in &[1.2, 1.5, 1.9, 2.5, 3.0] {
            let ep = e(p);
            for k in 0..=20 {
                let t = ep.two_pow_p() * k as f64 / 20.0;
                let direct = eval_b3(&ConePoint::new(1.0, 1.0, t), &ep).unwrap().value;
                let unit = b3_unit(t, &ep).unwrap();
                assert!(
                    (direct - unit).abs() < 1e-11 * (1.0 + unit),
                    "p={p} t={t}: {direct} vs {unit}"
                );
            }
        }
    }

    #[test]
    fn boundary_points_take_boundary_values() {
        use crate::boundary::{boundary_value, gamma, Arc, BoundaryParam};
        for &p in &[1.5, 3.0] {
            let ep = e(p);
            for arc in Arc::ALL {
                for k in 1..20 {
                    let bp = BoundaryParam::on(arc, k as f64 / 20.0);
                    let y = gamma(&bp, &ep).unwrap();
                    let v = eval_b(&y, &ep).unwrap();
                    let f = boundary_value(&bp, &ep).unwrap();
                    assert!(
                        (v.value - f).abs() < 1e-10 * f.max(1.0),
                        "p={p} {bp:?}: {v:?} vs {f}"
                    );
                }
            }
        }
    }

    #[test]
    fn numeric_mode_off_axis_above_two() {
        let v = b(0.3, 0.2, 3.0);
        assert_eq!(v.mode, Mode::EnvelopeNumeric);
        let g = 4.0 * 0.5;
        assert!(v.value > 0.0 && v.value <= g);
    }

    #[test]
    fn surface_cache_returns_one_instance() {
        let a = envelope_surface(&e(3.5), 64).unwrap() as *const HullSurface;
        let handles: Vec<_> = (0..4)
            .map(|_| {
                std::thread::spawn(|| envelope_surface(&e(3.5), 64).unwrap() as *const _ as usize)
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), a as usize);
        }
        assert!(envelope_surface(&e(3.5), 8).is_err());
    }

    #[test]
    fn axis_modes_agree_with_the_envelope() {
        for &p in &[1.5, 3.0] {
            let ep = e(p);
            let surf = envelope_surface(&ep, DEFAULT_SAMPLES).unwrap();
            let (lo, hi) = crate::foliation::axis_range(&ep);
            for k in 0..=40 {
                let t = lo + (hi - lo) * k as f64 / 40.0;
                let y = SectionPoint::new(t, t);
                let exact = eval_b(&y, &ep).unwrap().value;
                assert!((surf.eval_clamped(&y) - exact).abs() < 5e-3, "p={p} t={t}");
            }
        }
    }

    #[test]
    fn symmetric_under_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &p in &[1.5, 2.0, 3.0] {
            let ep = e(p);
            let mut n = 0;
            while n < 200 {
                let y = SectionPoint::new(rng.random_range(0.0..0.7), rng.random_range(0.0..0.7));
                let Ok(v) = eval_b(&y, &ep) else { continue };
                assert_eq!(v.value, eval_b(&y.swap(), &ep).unwrap().value);
                n += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn homogeneous_of_degree_one(
            p in prop::sample::select(vec![1.5, 2.0, 3.0]),
            a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, k in 1e-3f64..100.0,
        ) {
            let ep = e(p);
            let x = ConePoint::new(a, b, c);
            prop_assume!(crate::lp_domain::in_cone(&x, &ep) && !x.is_zero());
            let v = eval_b3(&x, &ep).unwrap().value;
            let vk = eval_b3(&x.scale(k), &ep).unwrap().value;
            prop_assert!((vk - k * v).abs() <= 1e-10 * (k * v).abs().max(1e-300));
        }

        #[test]
        fn unit_is_decreasing(p in 1.05f64..4.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let ep = e(p);
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assume!(hi - lo > 1e-9);
            let t = |u: f64| u * ep.two_pow_p();
            prop_assert!(b3_unit(t(hi), &ep).unwrap() < b3_unit(t(lo), &ep).unwrap());
        }

        #[test]
        fn below_majorant(p in prop::sample::select(vec![1.3, 1.5, 2.0, 2.5]), y1 in 0.0f64..0.7, y2 in 0.0f64..0.7) {
            let ep = e(p);
            let y = SectionPoint::new(y1, y2);
            if let Ok(v) = eval_b(&y, &ep) {
                prop_assert!(v.value >= -1e-15);
                prop_assert!(v.value <= 2f64.powf(p - 1.0) * (y1 + y2) + 1e-9);
            }
        }
    }
}
