//! Randomized incremental 3-D convex hull on exact orientation predicates.
//!
//! Every face stores its vertices counter-clockwise as seen from outside and
//! the neighbour across each edge (`nbr[i]` is across `v[i] → v[i+1]`). Each
//! pending point sits in the outside list of exactly one face it sees.
//! A point sees a face only when it is strictly above the face plane, so
//! coplanar quadruples never create a face; they leave adjacent coplanar
//! triangles instead.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust::{orient3d, Coord3D};

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

struct Face {
    v: [usize; 3],
    nbr: [usize; 3],
    alive: bool,
    outside: Vec<usize>,
}

struct Builder<'a> {
    pts: &'a [[f64; 3]],
    faces: Vec<Face>,
    conflict: Vec<usize>,
    visible_stamp: Vec<u32>,
    tested_stamp: Vec<u32>,
    stamp: u32,
}

fn c3(p: [f64; 3]) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

/// Orientation of `d` against the plane of `a, b, c`: negative when `d`
/// lies on the side from which `a, b, c` appear counter-clockwise.
pub(crate) fn orient(pts: &[[f64; 3]], a: usize, b: usize, c: usize, d: usize) -> f64 {
    orient3d(c3(pts[a]), c3(pts[b]), c3(pts[c]), c3(pts[d]))
}

impl<'a> Builder<'a> {
    fn sees(&self, f: usize, q: usize) -> bool {
        let [a, b, c] = self.faces[f].v;
        orient(self.pts, a, b, c, q) < 0.0
    }

    fn push_face(&mut self, v: [usize; 3]) -> usize {
        self.faces.push(Face {
            v,
            nbr: [NONE; 3],
            alive: true,
            outside: Vec::new(),
        });
        self.visible_stamp.push(0);
        self.tested_stamp.push(0);
        self.faces.len() - 1
    }

    fn assign(&mut self, q: usize, candidates: &[usize]) {
        self.conflict[q] = NONE;
        for &f in candidates {
            if self.sees(f, q) {
                self.faces[f].outside.push(q);
                self.conflict[q] = f;
                return;
            }
        }
    }

    fn seed_simplex(&mut self) -> Result<[usize; 4]> {
        let pts = self.pts;
        let n = pts.len();
        let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        let norm2 = |v: [f64; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let cross = |a: [f64; 3], b: [f64; 3]| {
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        };
        let argmax = |score: &dyn Fn(usize) -> f64| {
            (0..n)
                .map(|i| (i, score(i)))
                .fold((0, f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                })
        };
        let i0 = (0..n)
            .min_by(|&a, &b| {
                pts[a]
                    .iter()
                    .zip(&pts[b])
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or_else(|| Error::precondition("empty point set"))?;
        let (i1, d1) = argmax(&|i| norm2(sub(pts[i], pts[i0])));
        if d1 <= 0.0 {
            return Err(Error::precondition("all points coincide"));
        }
        let axis = sub(pts[i1], pts[i0]);
        let (i2, d2) = argmax(&|i| norm2(cross(axis, sub(pts[i], pts[i0]))));
        if d2 <= 0.0 {
            return Err(Error::precondition("all points are collinear"));
        }
        let (i3, d3) = argmax(&|i| orient(pts, i0, i1, i2, i).abs());
        if d3 <= 0.0 {
            return Err(Error::precondition("all points are coplanar"));
        }
        Ok([i0, i1, i2, i3])
    }

    fn link_all(&mut self) {
        let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (f, face) in self.faces.iter().enumerate() {
            for i in 0..3 {
                edges.insert((face.v[i], face.v[(i + 1) % 3]), (f, i));
            }
        }
        for f in 0..self.faces.len() {
            for i in 0..3 {
                let (a, b) = (self.faces[f].v[i], self.faces[f].v[(i + 1) % 3]);
                self.faces[f].nbr[i] = edges[&(b, a)].0;
            }
        }
    }

    fn insert(&mut self, p: usize) -> Result<()> {
        let start = self.conflict[p];
        if start == NONE {
            return Ok(());
        }
        self.stamp += 1;
        let stamp = self.stamp;
        let mut visible = vec![start];
        self.visible_stamp[start] = stamp;
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for i in 0..3 {
                let g = self.faces[f].nbr[i];
                if self.visible_stamp[g] == stamp || self.tested_stamp[g] == stamp {
                    continue;
                }
                if self.sees(g, p) {
                    self.visible_stamp[g] = stamp;
                    visible.push(g);
                } else {
                    self.tested_stamp[g] = stamp;
                }
            }
        }

        let mut horizon = Vec::new();
        for &f in &visible {
            for i in 0..3 {
                let g = self.faces[f].nbr[i];
                if self.visible_stamp[g] != stamp {
                    horizon.push((self.faces[f].v[i], self.faces[f].v[(i + 1) % 3], g));
                }
            }
        }

        let mut by_start = HashMap::with_capacity(horizon.len());
        let mut by_end = HashMap::with_capacity(horizon.len());
        let mut created = Vec::with_capacity(horizon.len());
        for &(u, w, g) in &horizon {
            let nf = self.push_face([u, w, p]);
            self.faces[nf].nbr[0] = g;
            let j = (0..3)
                .find(|&j| self.faces[g].v[j] == w && self.faces[g].v[(j + 1) % 3] == u)
                .ok_or_else(|| Error::Internal("horizon edge without twin".into()))?;
            self.faces[g].nbr[j] = nf;
            if by_start.insert(u, nf).is_some() || by_end.insert(w, nf).is_some() {
                return Err(Error::Internal("horizon is not a simple cycle".into()));
            }
            created.push(nf);
        }
        for &nf in &created {
            let [u, w, _] = self.faces[nf].v;
            self.faces[nf].nbr[1] = *by_start
                .get(&w)
                .ok_or_else(|| Error::Internal("open horizon".into()))?;
            self.faces[nf].nbr[2] = *by_end
                .get(&u)
                .ok_or_else(|| Error::Internal("open horizon".into()))?;
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            self.faces[f].alive = false;
            orphans.append(&mut self.faces[f].outside);
        }
        for q in orphans {
            if q != p {
                self.assign(q, &created);
            }
        }
        self.conflict[p] = NONE;
        Ok(())
    }
}

/// Faces of the convex hull of `pts`, each counter-clockwise from outside.
///
/// Points are inserted in an order shuffled by `seed`; the output is fully
/// determined by the input and the seed.
pub(crate) fn convex_hull(pts: &[[f64; 3]], seed: u64) -> Result<Vec<[usize; 3]>> {
    if pts.len() < 4 {
        return Err(Error::precondition("a 3-D hull needs at least four points"));
    }
    let mut b = Builder {
        pts,
        faces: Vec::new(),
        conflict: vec![NONE; pts.len()],
        visible_stamp: Vec::new(),
        tested_stamp: Vec::new(),
        stamp: 0,
    };
    let [a, mut i1, mut i2, d] = b.seed_simplex()?;
    if orient(pts, a, i1, i2, d) < 0.0 {
        std::mem::swap(&mut i1, &mut i2);
    }
    for v in [[a, i1, i2], [i1, a, d], [i2, i1, d], [a, i2, d]] {
        b.push_face(v);
    }
    b.link_all();

    let simplex = [a, i1, i2, d];
    let initial: Vec<usize> = (0..4).collect();
    let mut order: Vec<usize> = (0..pts.len()).filter(|i| !simplex.contains(i)).collect();
    for &q in &order {
        b.assign(q, &initial);
    }
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for p in order {
        b.insert(p)?;
    }
    Ok(b.faces
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| f.v)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn check_closed_and_convex(pts: &[[f64; 3]], faces: &[[usize; 3]]) {
        let mut edges = HashMap::new();
        for f in faces {
            for i in 0..3 {
                *edges.entry((f[i], f[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            assert_eq!(count, 1);
            assert_eq!(edges.get(&(b, a)), Some(&1), "edge {a}-{b} unmatched");
        }
        for f in faces {
            for q in 0..pts.len() {
                assert!(
                    orient(pts, f[0], f[1], f[2], q) >= 0.0,
                    "point {q} above face {f:?}"
                );
            }
        }
    }

    #[test]
    fn cube_with_interior_points() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push([(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            pts.push([rng.random(), rng.random(), rng.random()]);
        }
        let faces = convex_hull(&pts, 1).unwrap();
        check_closed_and_convex(&pts, &faces);
        for f in &faces {
            assert!(f.iter().all(|&v| v < 8), "interior point on hull: {f:?}");
        }
        assert_eq!(faces.len(), 12);
    }

    #[test]
    fn sphere_points_all_on_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<[f64; 3]> = (0..500)
            .map(|_| loop {
                let v: [f64; 3] = [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if n > 0.1 && n <= 1.0 {
                    break [v[0] / n, v[1] / n, v[2] / n];
                }
            })
            .collect();
        let faces = convex_hull(&pts, 5).unwrap();
        check_closed_and_convex(&pts, &faces);
        assert_eq!(faces.len(), 2 * pts.len() - 4);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let flat: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, (i * i) as f64, 0.0]).collect();
        assert!(convex_hull(&flat, 0).is_err());
        let line: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, 2.0 * i as f64, 1.0]).collect();
        assert!(convex_hull(&line, 0).is_err());
    }
}
