//! Minimal concave majorant of boundary data on a strictly convex planar set.
//!
//! The subgraph of the minimal concave majorant is the convex hull of the
//! subgraph of the boundary data, so on a finite sample the majorant is the
//! upper surface of the 3-D convex hull of the lifted samples. Since the
//! samples lie on `∂Ω` the discrete envelope is inscribed: it never exceeds
//! the true `B` and increases as the sampling is refined.

mod hull;
mod locate;

use rayon::prelude::*;
use robust::{orient2d, Coord};
use serde::Serialize;

use crate::boundary::{self, Arc, BoundaryParam};
use crate::error::{Error, Result};
use crate::lp_domain::{Exponent, SectionPoint};
use locate::{barycentric, GridIndex, Tri};

/// Seed of the hull insertion order.
const HULL_SEED: u64 = 0x5eed_0f4a11;

/// Barycentric slack accepted when locating a query in a facet.
const LOCATE_TOL: f64 = 1e-12;

/// Snap distance of [`chord_oracle_eval`] relative to the sample diameter.
pub const CHORD_SNAP: f64 = 1e-3;

/// Strength of the parameter warp that densifies arc 3 near `s ∈ {0, ½, 1}`.
const ARC3_WARP: f64 = 0.75;

/// A point of the boundary with its data value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySample {
    pub point: SectionPoint,
    pub value: f64,
    pub tag: Option<BoundaryParam>,
}

fn sample_at(arc: Arc, s: f64, e: &Exponent) -> BoundarySample {
    let b = BoundaryParam::on(arc, s);
    BoundarySample {
        point: boundary::gamma(&b, e).expect("parameter in [0, 1]"),
        value: boundary::boundary_value(&b, e).expect("parameter in [0, 1]"),
        tag: Some(b),
    }
}

fn mirrored(s: &BoundarySample) -> BoundarySample {
    BoundarySample {
        point: s.point.swap(),
        value: s.value,
        tag: s.tag.map(|t| t.mirror()),
    }
}

fn arc3_param(u: f64) -> f64 {
    use std::f64::consts::PI;
    (u - ARC3_WARP * (4.0 * PI * u).sin() / (4.0 * PI)).clamp(0.0, 1.0)
}

/// `n` samples per arc of `∂Ω` in counter-clockwise order, corners counted
/// once (`3n − 3` points).
///
/// Arcs 1 and 2 use uniform parameters `k/(n−1)`; arc 3 uses a warped grid
/// that is twice as dense near its ends and its midpoint. The second half
/// of every mirror pair is produced by the exact coordinate swap, so the
/// sample set is bitwise symmetric under `y₁ ↔ y₂`. Grids for `n` and
/// `2n − 1` are nested.
pub fn sample_boundary(e: &Exponent, n: usize) -> Result<Vec<BoundarySample>> {
    if n < 16 {
        return Err(Error::precondition(format!(
            "at least 16 samples per arc required, got {n}"
        )));
    }
    let m = n - 1;
    let u = |k: usize| k as f64 / m as f64;
    let arc1: Vec<BoundarySample> = (0..=m).map(|k| sample_at(Arc::First, u(k), e)).collect();
    let mut arc3 = Vec::with_capacity(n);
    for k in 0..=m {
        let sample = if 2 * k < m {
            sample_at(Arc::Third, arc3_param(u(k)), e)
        } else if 2 * k == m {
            sample_at(Arc::Third, 0.5, e)
        } else {
            mirrored(&arc3[m - k])
        };
        arc3.push(sample);
    }
    let mut out = Vec::with_capacity(3 * m);
    out.extend_from_slice(&arc1[..m]);
    out.extend((0..m).map(|k| mirrored(&arc1[m - k])));
    out.extend_from_slice(&arc3[..m]);
    Ok(out)
}

/// A facet of the upper hull: vertex ids counter-clockwise in projection and
/// the plane `z = a·y₁ + b·y₂ + c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub plane: [f64; 3],
}

/// Upper surface of the convex hull of lifted samples `(y₁, y₂, value)`.
///
/// Immutable once built; queries are safe from any number of threads.
#[derive(Debug, Clone)]
pub struct HullSurface {
    vertices: Vec<[f64; 3]>,
    facets: Vec<Facet>,
    // (facet id, triangle) for point location; polygonal facets are fanned
    tris: Vec<(usize, [usize; 3])>,
    index: GridIndex,
    rim: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize)]
struct SurfaceExport<'a> {
    vertices: &'a [[f64; 3]],
    facets: Vec<&'a [usize]>,
    planes: Vec<[f64; 3]>,
}

fn plane_through(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [f64; 3] {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let (ga, gb) = (-n[0] / n[2], -n[1] / n[2]);
    [ga, gb, a[2] - ga * a[0] - gb * a[1]]
}

fn coord(p: [f64; 3]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

// Andrew's monotone chain on exact orientation; counter-clockwise, no
// collinear vertices.
fn hull_2d(pts: &[[f64; 3]]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
    });
    let mut chain: Vec<usize> = Vec::with_capacity(2 * idx.len());
    let turn = |a: usize, b: usize, c: usize| orient2d(coord(pts[a]), coord(pts[b]), coord(pts[c]));
    for pass in 0..2 {
        let floor = chain.len();
        let seq: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in seq {
            while chain.len() >= floor + 2
                && turn(chain[chain.len() - 2], chain[chain.len() - 1], i) <= 0.0
            {
                chain.pop();
            }
            chain.push(i);
        }
        chain.pop();
    }
    chain
}

/// Upper surface of the convex hull of the lifted samples.
///
/// If all lifted samples are coplanar the surface is a single polygonal
/// facet over the convex hull of the sample points.
pub fn build_envelope(samples: &[BoundarySample]) -> Result<HullSurface> {
    if samples.len() < 3 {
        return Err(Error::precondition(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if let Some(s) = samples
        .iter()
        .find(|s| !(s.value.is_finite() && s.point.y1.is_finite() && s.point.y2.is_finite()))
    {
        return Err(Error::precondition(format!("non-finite sample {s:?}")));
    }
    let vertices: Vec<[f64; 3]> = samples
        .iter()
        .map(|s| [s.point.y1, s.point.y2, s.value])
        .collect();
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| {
        vertices[a][0]
            .total_cmp(&vertices[b][0])
            .then(vertices[a][1].total_cmp(&vertices[b][1]))
    });
    if order
        .windows(2)
        .any(|w| vertices[w[0]][..2] == vertices[w[1]][..2])
    {
        return Err(Error::precondition(
            "sample points must be pairwise distinct",
        ));
    }

    let outline = hull_2d(&vertices);
    if outline.len() < 3 {
        return Err(Error::precondition("sample points span no area"));
    }

    let facets = match coplanar_plane(&vertices, &outline) {
        Some(plane) => vec![Facet {
            vertices: outline,
            plane,
        }],
        None => upper_facets(&vertices)?,
    };
    Ok(HullSurface::assemble(vertices, facets))
}

// Plane through a well-spread triple of outline vertices if every lifted
// sample lies on it within 1e-12 of the value scale.
fn coplanar_plane(v: &[[f64; 3]], outline: &[usize]) -> Option<[f64; 3]> {
    let a = outline[0];
    let far = |from: usize| {
        *outline
            .iter()
            .max_by(|&&i, &&j| {
                let d = |k: usize| (v[k][0] - v[from][0]).hypot(v[k][1] - v[from][1]);
                d(i).total_cmp(&d(j))
            })
            .unwrap()
    };
    let b = far(a);
    let c = *outline
        .iter()
        .max_by(|&&i, &&j| {
            let area = |k: usize| orient2d(coord(v[a]), coord(v[b]), coord(v[k])).abs();
            area(i).total_cmp(&area(j))
        })
        .unwrap();
    let plane = plane_through(v[a], v[b], v[c]);
    let scale = v.iter().map(|p| p[2].abs()).fold(1.0, f64::max);
    let coplanar = v
        .iter()
        .all(|p| (plane[0] * p[0] + plane[1] * p[1] + plane[2] - p[2]).abs() <= 1e-12 * scale);
    coplanar.then_some(plane)
}

fn upper_facets(v: &[[f64; 3]]) -> Result<Vec<Facet>> {
    let faces = hull::convex_hull(v, HULL_SEED)?;
    Ok(faces
        .into_iter()
        .filter(|f| orient2d(coord(v[f[0]]), coord(v[f[1]]), coord(v[f[2]])) > 0.0)
        .map(|f| Facet {
            vertices: f.to_vec(),
            plane: plane_through(v[f[0]], v[f[1]], v[f[2]]),
        })
        .collect())
}

impl HullSurface {
    fn assemble(vertices: Vec<[f64; 3]>, facets: Vec<Facet>) -> Self {
        let mut tris = Vec::new();
        for (id, f) in facets.iter().enumerate() {
            for k in 1..f.vertices.len() - 1 {
                tris.push((id, [f.vertices[0], f.vertices[k], f.vertices[k + 1]]));
            }
        }
        let flat: Vec<Tri> = tris
            .iter()
            .map(|(_, t)| t.map(|i| [vertices[i][0], vertices[i][1]]))
            .collect();
        let index = GridIndex::build(&flat);

        let mut edges = std::collections::HashSet::new();
        for f in &facets {
            let k = f.vertices.len();
            for i in 0..k {
                edges.insert((f.vertices[i], f.vertices[(i + 1) % k]));
            }
        }
        let mut rim: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        rim.sort_unstable();
        Self {
            vertices,
            facets,
            tris,
            index,
            rim,
        }
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Outer edges of the projected surface (counter-clockwise).
    pub fn rim(&self) -> &[(usize, usize)] {
        &self.rim
    }

    fn tri(&self, t: &[usize; 3]) -> Tri {
        t.map(|i| [self.vertices[i][0], self.vertices[i][1]])
    }

    /// Barycentric interpolation on the facet containing `y`.
    pub fn eval(&self, y: &SectionPoint) -> Result<f64> {
        let q = [y.y1, y.y2];
        let mut best: Option<(f64, [f64; 3], [usize; 3])> = None;
        for &id in self.index.candidates(q) {
            let (_, t) = &self.tris[id as usize];
            let Some(l) = barycentric(&self.tri(t), q) else {
                continue;
            };
            let worst = l[0].min(l[1]).min(l[2]);
            if worst >= -LOCATE_TOL && best.is_none_or(|b| worst > b.0) {
                best = Some((worst, l, *t));
            }
        }
        let (_, l, t) = best.ok_or_else(|| {
            Error::domain(format!(
                "({}, {}) lies outside the projected hull of the samples",
                y.y1, y.y2
            ))
        })?;
        Ok((0..3).map(|k| l[k] * self.vertices[t[k]][2]).sum())
    }

    /// Like [`HullSurface::eval`], but points outside the projected hull get
    /// the value at their nearest point on the rim.
    pub fn eval_clamped(&self, y: &SectionPoint) -> f64 {
        if let Ok(v) = self.eval(y) {
            return v;
        }
        let q = [y.y1, y.y2];
        let mut best = (f64::INFINITY, 0.0);
        for &(a, b) in &self.rim {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let lam = (((q[0] - pa[0]) * d[0] + (q[1] - pa[1]) * d[1]) / len2).clamp(0.0, 1.0);
            let foot = [pa[0] + lam * d[0], pa[1] + lam * d[1]];
            let dist = (q[0] - foot[0]).hypot(q[1] - foot[1]);
            if dist < best.0 {
                best = (dist, (1.0 - lam) * pa[2] + lam * pb[2]);
            }
        }
        best.1
    }

    /// JSON with `vertices` (`[y1, y2, value]`), `facets` (vertex ids) and
    /// per-facet `planes` (`[a, b, c]` for `z = a·y1 + b·y2 + c`).
    pub fn to_json(&self) -> String {
        let export = SurfaceExport {
            vertices: &self.vertices,
            facets: self.facets.iter().map(|f| f.vertices.as_slice()).collect(),
            planes: self.facets.iter().map(|f| f.plane).collect(),
        };
        serde_json::to_string(&export).expect("surface serialises")
    }
}

pub fn eval_envelope(surface: &HullSurface, y: &SectionPoint) -> Result<f64> {
    surface.eval(y)
}

/// Brute-force envelope value: the best linear interpolation over all sample
/// pairs whose segment passes within the snap distance of `y`.
///
/// This is exact in the limit only when the optimal decomposition uses
/// chords rather than triangles, which is the case for the `L^p` data with
/// `p ≠ 2` (and harmless for `p = 2`, where every chord through `y` gives
/// the same linear value).
pub fn chord_oracle_eval(samples: &[BoundarySample], y: &SectionPoint) -> Result<f64> {
    let pts: Vec<[f64; 3]> = samples
        .iter()
        .map(|s| [s.point.y1, s.point.y2, s.value])
        .collect();
    let n = pts.len();
    let diameter = (0..n)
        .into_par_iter()
        .map(|i| {
            pts[i + 1..]
                .iter()
                .map(|q| (q[0] - pts[i][0]).hypot(q[1] - pts[i][1]))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let snap = CHORD_SNAP * diameter;
    let q = [y.y1, y.y2];
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = pts[i];
            let mut best = f64::NEG_INFINITY;
            for b in &pts[i + 1..] {
                let d = [b[0] - a[0], b[1] - a[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                let lam = ((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / len2;
                if !(0.0..=1.0).contains(&lam) {
                    continue;
                }
                let off = (q[0] - a[0] - lam * d[0]).hypot(q[1] - a[1] - lam * d[1]);
                if off <= snap {
                    best = best.max((1.0 - lam) * a[2] + lam * b[2]);
                }
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(Error::InsufficientSampling(format!(
            "no sample chord passes within {snap:e} of ({}, {})",
            y.y1, y.y2
        )));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_domain::in_cone;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    fn point(y1: f64, y2: f64, value: f64) -> BoundarySample {
        BoundarySample {
            point: SectionPoint::new(y1, y2),
            value,
            tag: None,
        }
    }

    fn surface(p: f64, n: usize) -> HullSurface {
        build_envelope(&sample_boundary(&e(p), n).unwrap()).unwrap()
    }

    fn p3_surface() -> &'static HullSurface {
        static S: OnceLock<HullSurface> = OnceLock::new();
        S.get_or_init(|| surface(3.0, 256))
    }

    #[test]
    fn sample_counts_and_symmetry() {
        let s = sample_boundary(&e(3.0), 16).unwrap();
        assert_eq!(s.len(), 45);
        let mut keys: Vec<(u64, u64)> = s
            .iter()
            .map(|x| (x.point.y1.to_bits(), x.point.y2.to_bits()))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), 45);
        let mirrored: Vec<(u64, u64)> = {
            let mut m: Vec<_> = s
                .iter()
                .map(|x| (x.point.y2.to_bits(), x.point.y1.to_bits()))
                .collect();
            m.sort_unstable();
            m
        };
        assert_eq!(keys, mirrored);
        assert!(sample_boundary(&e(3.0), 15).is_err());
    }

    #[test]
    fn samples_are_nested_under_interval_doubling() {
        let coarse = sample_boundary(&e(1.7), 33).unwrap();
        let fine = sample_boundary(&e(1.7), 65).unwrap();
        let keys: std::collections::HashSet<(u64, u64)> = fine
            .iter()
            .map(|x| (x.point.y1.to_bits(), x.point.y2.to_bits()))
            .collect();
        assert!(coarse
            .iter()
            .all(|x| keys.contains(&(x.point.y1.to_bits(), x.point.y2.to_bits()))));
    }

    #[test]
    fn samples_at_p_two_are_linear_and_members() {
        for s in sample_boundary(&e(2.0), 40).unwrap() {
            assert!((s.value - (3.0 * s.point.y1 + 3.0 * s.point.y2 - 1.0)).abs() < 1e-12);
        }
        for s in sample_boundary(&e(1.5), 64).unwrap() {
            assert!(in_cone(&s.point.lift(), &e(1.5)));
        }
    }

    #[test]
    fn p_two_gives_a_single_planar_facet() {
        let surf = surface(2.0, 64);
        assert_eq!(surf.facets().len(), 1);
        let v = surf.eval(&SectionPoint::new(0.3, 0.3)).unwrap();
        assert!((v - 0.8).abs() < 1e-12);
    }

    #[test]
    fn toy_square_domains() {
        let flat = [
            point(0.0, 0.0, 0.0),
            point(1.0, 0.0, 0.0),
            point(1.0, 1.0, 0.0),
            point(0.0, 1.0, 0.0),
        ];
        let s = build_envelope(&flat).unwrap();
        assert_eq!(s.facets().len(), 1);
        assert_eq!(s.eval(&SectionPoint::new(0.5, 0.5)).unwrap(), 0.0);

        // one raised corner: the majorant uses the diagonal through it
        let raised = [
            point(0.0, 0.0, 0.0),
            point(1.0, 0.0, 0.0),
            point(1.0, 1.0, 0.0),
            point(0.0, 1.0, 1.0),
        ];
        let s = build_envelope(&raised).unwrap();
        assert_eq!(s.facets().len(), 2);
        assert!((s.eval(&SectionPoint::new(0.5, 0.5)).unwrap() - 0.5).abs() < 1e-15);
        assert!((s.eval(&SectionPoint::new(0.25, 0.5)).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            s.eval(&SectionPoint::new(1.5, 0.5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn interior_sample_below_envelope_is_dominated() {
        let pts = [
            point(0.0, 0.0, 1.0),
            point(1.0, 0.0, 1.0),
            point(0.0, 1.0, 1.0),
            point(0.2, 0.2, 0.5),
        ];
        let s = build_envelope(&pts).unwrap();
        assert!((s.eval(&SectionPoint::new(0.2, 0.2)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn build_preconditions() {
        assert!(build_envelope(&[point(0.0, 0.0, 0.0), point(1.0, 0.0, 0.0)]).is_err());
        let dup = [
            point(0.0, 0.0, 0.0),
            point(1.0, 0.0, 0.0),
            point(1.0, 0.0, 2.0),
            point(0.0, 1.0, 0.0),
        ];
        assert!(build_envelope(&dup).is_err());
        let line = [
            point(0.0, 0.0, 0.0),
            point(1.0, 1.0, 0.0),
            point(2.0, 2.0, 5.0),
        ];
        assert!(build_envelope(&line).is_err());
    }

    #[test]
    fn upper_facets_point_up_and_tile_the_outline() {
        let surf = p3_surface();
        let v = surf.vertices();
        let mut area = 0.0;
        for f in surf.facets() {
            assert_eq!(f.vertices.len(), 3);
            let [a, b, c] = [v[f.vertices[0]], v[f.vertices[1]], v[f.vertices[2]]];
            let nz = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            assert!(nz > 0.0);
            area += nz / 2.0;
        }
        let outline = hull_2d(v);
        let poly: f64 = (0..outline.len())
            .map(|i| {
                let (a, b) = (v[outline[i]], v[outline[(i + 1) % outline.len()]]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            / 2.0;
        assert!(
            (area - poly).abs() < 1e-12,
            "facets {area} vs outline {poly}"
        );
        assert_eq!(surf.rim().len(), outline.len());
    }

    #[test]
    fn samples_are_reproduced() {
        let samples = sample_boundary(&e(3.0), 256).unwrap();
        let surf = p3_surface();
        for s in &samples {
            let v = surf.eval(&s.point).unwrap();
            assert!(
                (v - s.value).abs() <= 1e-12 * s.value.max(1.0),
                "{s:?}: {v}"
            );
        }
    }

    #[test]
    fn spec_value_examples() {
        let s15 = surface(1.5, 128);
        assert!((s15.eval(&SectionPoint::new(0.25, 0.25)).unwrap() - 0.5).abs() < 5e-3);
        let v = p3_surface().eval(&SectionPoint::new(0.2, 0.2)).unwrap();
        assert!((v - 1.0).abs() < 5e-3, "{v}");
    }

    #[test]
    fn axis_value_for_p3_at_512() {
        let surf = surface(3.0, 512);
        for k in 0..=20 {
            let t = 0.1 + 0.4 * k as f64 / 20.0;
            let v = surf.eval_clamped(&SectionPoint::new(t, t));
            assert!((v - (10.0 * t - 1.0)).abs() < 5e-3, "t={t}: {v}");
        }
    }

    #[test]
    fn chord_oracle_examples() {
        let s2 = sample_boundary(&e(2.0), 64).unwrap();
        let v = chord_oracle_eval(&s2, &SectionPoint::new(0.3, 0.3)).unwrap();
        assert!((v - 0.8).abs() < 1e-2);
        let s15 = sample_boundary(&e(1.5), 64).unwrap();
        let v = chord_oracle_eval(&s15, &SectionPoint::new(0.25, 0.25)).unwrap();
        assert!((v - 0.5).abs() < 1e-2);
        let s3 = sample_boundary(&e(3.0), 256).unwrap();
        let y = SectionPoint::new(0.2, 0.2);
        let v = chord_oracle_eval(&s3, &y).unwrap();
        assert!((v - p3_surface().eval(&y).unwrap()).abs() < 1e-2);
        let y = SectionPoint::new(0.3, 0.18);
        let v = chord_oracle_eval(&s3, &y).unwrap();
        assert!((v - p3_surface().eval(&y).unwrap()).abs() < 1e-2);
    }

    #[test]
    fn chord_oracle_reports_insufficient_sampling() {
        let far = [
            point(0.0, 0.0, 0.0),
            point(1.0, 0.0, 0.0),
            point(0.0, 1.0, 0.0),
        ];
        assert!(matches!(
            chord_oracle_eval(&far, &SectionPoint::new(0.3, 0.3)),
            Err(Error::InsufficientSampling(_))
        ));
    }

    #[test]
    fn majorant_dominates_the_envelope() {
        for &p in &[1.5, 3.0] {
            let surf = surface(p, 256);
            let g = 2f64.powf(p - 1.0);
            let ymax = 1.0 / (1.0 + 2f64.powf(1.0 - p));
            for i in 0..100 {
                for j in 0..100 {
                    let y = SectionPoint::new(ymax * i as f64 / 99.0, ymax * j as f64 / 99.0);
                    if let Ok(v) = surf.eval(&y) {
                        assert!(g * (y.y1 + y.y2) >= v - 1e-12, "p={p} {y:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn refinement_is_monotone_and_converges() {
        let coarse = surface(3.0, 257);
        let fine = surface(3.0, 513);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut tested = 0;
        while tested < 500 {
            let y = SectionPoint::new(rng.random_range(0.0..0.8), rng.random_range(0.0..0.8));
            let Ok(c) = coarse.eval(&y) else { continue };
            let f = fine.eval(&y).unwrap();
            assert!(f >= c - 1e-12, "{y:?}: {f} < {c}");
            assert!(f - c < 1e-2);
            tested += 1;
        }
    }

    #[test]
    fn surface_json_has_planes_per_facet() {
        let json: serde_json::Value = serde_json::from_str(&surface(2.0, 32).to_json()).unwrap();
        assert_eq!(json["facets"].as_array().unwrap().len(), 1);
        assert_eq!(json["planes"].as_array().unwrap().len(), 1);
        assert_eq!(json["vertices"].as_array().unwrap().len(), 93);
        let plane: Vec<f64> = json["planes"][0]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert!(
            (plane[0] - 3.0).abs() < 1e-9
                && (plane[1] - 3.0).abs() < 1e-9
                && (plane[2] + 1.0).abs() < 1e-9
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn envelope_is_concave(
            a1 in 0.0f64..0.8, a2 in 0.0f64..0.8, b1 in 0.0f64..0.8, b2 in 0.0f64..0.8,
            alpha in 0.0f64..1.0,
        ) {
            let surf = p3_surface();
            let (ya, yb) = (SectionPoint::new(a1, a2), SectionPoint::new(b1, b2));
            if let (Ok(va), Ok(vb)) = (surf.eval(&ya), surf.eval(&yb)) {
                let mid = SectionPoint::new(alpha * a1 + (1.0 - alpha) * b1, alpha * a2 + (1.0 - alpha) * b2);
                let vm = surf.eval(&mid).unwrap();
                prop_assert!(vm >= alpha * va + (1.0 - alpha) * vb - 1e-9);
            }
        }
    }
}
