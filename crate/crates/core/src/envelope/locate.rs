//! Uniform-grid bucketing of projected triangles.

pub(crate) type Tri = [[f64; 2]; 3];

#[derive(Debug, Clone)]
pub(crate) struct GridIndex {
    origin: [f64; 2],
    cell: [f64; 2],
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl GridIndex {
    pub(crate) fn build(tris: &[Tri]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for t in tris {
            for v in t {
                for k in 0..2 {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
        }
        let side = ((tris.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
        let pad = 1e-9 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
        let origin = [lo[0] - pad, lo[1] - pad];
        let cell = [
            (hi[0] - lo[0] + 2.0 * pad) / side as f64,
            (hi[1] - lo[1] + 2.0 * pad) / side as f64,
        ];
        let mut grid = Self {
            origin,
            cell,
            nx: side,
            ny: side,
            cells: vec![Vec::new(); side * side],
        };
        for (id, t) in tris.iter().enumerate() {
            grid.rasterize(t, id as u32);
        }
        grid
    }

    fn col(&self, x: f64) -> usize {
        (((x - self.origin[0]) / self.cell[0]).floor().max(0.0) as usize).min(self.nx - 1)
    }

    fn row(&self, y: f64) -> usize {
        (((y - self.origin[1]) / self.cell[1]).floor().max(0.0) as usize).min(self.ny - 1)
    }

    // Conservative cover: for each row band, the x-extent of the triangle
    // clipped to the band.
    fn rasterize(&mut self, t: &Tri, id: u32) {
        let ymin = t.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
        let ymax = t.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
        for r in self.row(ymin)..=self.row(ymax) {
            let b0 = (self.origin[1] + r as f64 * self.cell[1]).max(ymin);
            let b1 = (self.origin[1] + (r + 1) as f64 * self.cell[1]).min(ymax);
            let mut xlo = f64::INFINITY;
            let mut xhi = f64::NEG_INFINITY;
            let mut take = |x: f64| {
                xlo = xlo.min(x);
                xhi = xhi.max(x);
            };
            for v in t {
                if v[1] >= b0 && v[1] <= b1 {
                    take(v[0]);
                }
            }
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                if a[1] == b[1] {
                    continue;
                }
                for y in [b0, b1] {
                    let lam = (y - a[1]) / (b[1] - a[1]);
                    if (0.0..=1.0).contains(&lam) {
                        take(a[0] + lam * (b[0] - a[0]));
                    }
                }
            }
            if xlo > xhi {
                continue;
            }
            let slack = 1e-9 * self.cell[0];
            for c in self.col(xlo - slack)..=self.col(xhi + slack) {
                self.cells[r * self.nx + c].push(id);
            }
        }
    }

    pub(crate) fn candidates(&self, q: [f64; 2]) -> &[u32] {
        &self.cells[self.row(q[1]) * self.nx + self.col(q[0])]
    }
}

/// Barycentric coordinates of `q` in `t`; `None` for a degenerate triangle.
pub(crate) fn barycentric(t: &Tri, q: [f64; 2]) -> Option<[f64; 3]> {
    let [a, b, c] = *t;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det == 0.0 {
        return None;
    }
    let l1 = ((b[0] - q[0]) * (c[1] - q[1]) - (c[0] - q[0]) * (b[1] - q[1])) / det;
    let l2 = ((c[0] - q[0]) * (a[1] - q[1]) - (a[0] - q[0]) * (c[1] - q[1])) / det;
    Some([l1, l2, 1.0 - l1 - l2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_inside_query_finds_its_triangle() {
        // a fan of thin slivers across the unit square
        let n = 200;
        let mut tris = Vec::new();
        for i in 0..n {
            let a = i as f64 / n as f64;
            let b = (i + 1) as f64 / n as f64;
            tris.push([[0.0, 0.0], [1.0, a], [1.0, b]]);
            tris.push([[0.0, 0.0], [b, 1.0], [a, 1.0]]);
        }
        let grid = GridIndex::build(&tris);
        for i in 0..97 {
            for j in 0..97 {
                let q = [(i as f64 + 0.5) / 97.0, (j as f64 + 0.5) / 97.0];
                let hit = grid.candidates(q).iter().any(|&id| {
                    barycentric(&tris[id as usize], q)
                        .map(|l| l.iter().all(|&x| x >= -1e-12))
                        .unwrap_or(false)
                });
                assert!(hit, "query {q:?} not located");
            }
        }
    }

    #[test]
    fn barycentric_reproduces_vertices() {
        let t = [[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]];
        assert_eq!(barycentric(&t, [0.0, 0.0]), Some([1.0, 0.0, 0.0]));
        let l = barycentric(&t, [0.5, 0.25]).unwrap();
        assert!((l[0] - 0.5).abs() < 1e-15 && (l[1] - 0.25).abs() < 1e-15);
        assert_eq!(
            barycentric(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], [0.5, 0.5]),
            None
        );
    }
}
