//! Cubical sublevel persistence of a grid (V-construction).
//!
//! Pixels are vertices, 4-neighbours are joined by edges and every 2x2 block
//! spans a square; edges and squares enter at the max of their vertices.
//! Cells are totally ordered by `(value, dimension, row-major index)`.
//!
//! H0 comes from a union-find sweep over the vertices (elder rule). H1 uses
//! duality: sweeping the edges downwards and merging the squares (plus one
//! node for the unbounded outside) on either side pairs every positive edge
//! with the square that kills its cycle.

use super::{PersistenceDiagram, PersistencePoint};
use crate::error::{Error, Result};
use crate::grid::GridSignal;

struct ElderUnionFind {
    parent: Vec<usize>,
}

impl ElderUnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Hangs `young` under `old`. Both must be roots.
    fn attach(&mut self, young: usize, old: usize) {
        self.parent[young] = old;
    }
}

fn h0(w: usize, h: usize, f: &[f64]) -> PersistenceDiagram {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
    // rank[v] = position of v in the filtration
    let mut rank = vec![0usize; f.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }

    let mut uf = ElderUnionFind::new(f.len());
    let mut present = vec![false; f.len()];
    let mut points = Vec::new();
    for &v in &order {
        present[v] = true;
        let (x, y) = (v % w, v / w);
        let mut neighbours = [usize::MAX; 4];
        if y > 0 {
            neighbours[0] = v - w;
        }
        if x > 0 {
            neighbours[1] = v - 1;
        }
        if x + 1 < w {
            neighbours[2] = v + 1;
        }
        if y + 1 < h {
            neighbours[3] = v + w;
        }
        for &n in neighbours.iter().filter(|&&n| n != usize::MAX) {
            if !present[n] {
                continue;
            }
            let a = uf.find(v);
            let b = uf.find(n);
            if a == b {
                continue;
            }
            // roots are the oldest vertex of their component
            let (young, old) = if rank[a] > rank[b] { (a, b) } else { (b, a) };
            let birth = f[young];
            let death = f[v];
            if death > birth {
                points.push(PersistencePoint::finite(birth, death));
            }
            uf.attach(young, old);
        }
    }
    let mut roots: Vec<usize> = (0..f.len()).filter(|&v| uf.find(v) == v).collect();
    roots.sort_unstable();
    for r in roots {
        points.push(PersistencePoint::essential(f[r]));
    }
    PersistenceDiagram::new(0, points)
}

fn h1(w: usize, h: usize, f: &[f64]) -> PersistenceDiagram {
    if w < 2 || h < 2 {
        return PersistenceDiagram::empty(1);
    }
    let sw = w - 1;
    let n_squares = sw * (h - 1);
    let outside = n_squares;
    let square_value = |sx: usize, sy: usize| {
        let i = sy * w + sx;
        f[i].max(f[i + 1]).max(f[i + w]).max(f[i + w + 1])
    };

    // Dual node birth keys in the reversed filtration: larger is older.
    let mut node_value = Vec::with_capacity(n_squares + 1);
    for sy in 0..h - 1 {
        for sx in 0..sw {
            node_value.push(square_value(sx, sy));
        }
    }
    node_value.push(f64::INFINITY);
    let older = |a: usize, b: usize| -> bool {
        // true if a is older than b
        match node_value[a].total_cmp(&node_value[b]) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => a > b,
        }
    };

    // Edges: horizontal ones first (index y * sw + x), then vertical
    // (index n_h + y * w + x). Each is stored with its two dual nodes.
    let n_h = sw * h;
    let n_v = w * (h - 1);
    let mut edges: Vec<(f64, usize, usize, usize)> = Vec::with_capacity(n_h + n_v);
    for y in 0..h {
        for x in 0..sw {
            let i = y * w + x;
            let value = f[i].max(f[i + 1]);
            let above = if y > 0 { (y - 1) * sw + x } else { outside };
            let below = if y + 1 < h { y * sw + x } else { outside };
            edges.push((value, y * sw + x, above, below));
        }
    }
    for y in 0..h - 1 {
        for x in 0..w {
            let i = y * w + x;
            let value = f[i].max(f[i + w]);
            let left = if x > 0 { y * sw + x - 1 } else { outside };
            let right = if x + 1 < w { y * sw + x } else { outside };
            edges.push((value, n_h + y * w + x, left, right));
        }
    }
    edges.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));

    let mut uf = ElderUnionFind::new(n_squares + 1);
    let mut points = Vec::new();
    for &(value, _, a, b) in &edges {
        let ra = uf.find(a);
        let rb = uf.find(b);
        if ra == rb {
            continue;
        }
        let (young, old) = if older(ra, rb) { (rb, ra) } else { (ra, rb) };
        let death = node_value[young];
        if death > value {
            points.push(PersistencePoint::finite(value, death));
        }
        uf.attach(young, old);
    }
    PersistenceDiagram::new(1, points)
}

/// H0 and H1 diagrams of the sublevel filtration of `grid`.
pub fn sublevel_persistence(grid: &GridSignal) -> (PersistenceDiagram, PersistenceDiagram) {
    let (w, h, f) = (grid.width(), grid.height(), grid.values());
    rayon::join(|| h0(w, h, f), || h1(w, h, f))
}

/// Same as [`sublevel_persistence`] for arbitrary finite values (row-major,
/// `width * height` of them), e.g. raw SINR or integer test grids.
pub fn sublevel_persistence_values(
    width: usize,
    height: usize,
    values: &[f64],
) -> Result<(PersistenceDiagram, PersistenceDiagram)> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    if values.len() != width * height {
        return Err(Error::LengthMismatch {
            expected: width * height,
            actual: values.len(),
        });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite value at index {i}"
        )));
    }
    Ok(rayon::join(
        || h0(width, height, values),
        || h1(width, height, values),
    ))
}
