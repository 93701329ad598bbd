//! Slow, direct reference implementations used as test oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use geneo::patterns::{DiskMask, Pattern, PatternLibrary, PatternMeta};
use geneo::{GridSignal, PixelCoord, Sample, SparseSampling};
use rand::seq::index;
use rand::Rng;

pub fn meta() -> PatternMeta {
    PatternMeta {
        area_id: 0,
        center: PixelCoord::new(0, 0),
        rotation_degrees: 0,
    }
}

pub fn random_pattern<R: Rng>(rng: &mut R, radius: usize) -> Pattern {
    let side = 2 * radius + 1;
    let values = (0..side * side).map(|_| rng.gen::<f64>()).collect();
    Pattern::new(radius, values, meta()).unwrap()
}

/// `k` distinct random pixels with random values.
pub fn random_sampling<R: Rng>(rng: &mut R, w: usize, h: usize, k: usize) -> SparseSampling {
    let picks = index::sample(rng, w * h, k.min(w * h));
    let samples = picks
        .iter()
        .map(|i| Sample {
            coord: PixelCoord::new(i % w, i / w),
            value: rng.gen(),
        })
        .collect();
    SparseSampling::new(w, h, samples).unwrap()
}

pub fn random_grid<R: Rng>(rng: &mut R, w: usize, h: usize) -> GridSignal {
    GridSignal::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

/// Disk offsets by direct enumeration.
pub fn disk_offsets(r: usize) -> Vec<(isize, isize)> {
    let r = r as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// `(A, S, c)` at every anchor by a double loop over anchors and disk
/// offsets, reading the sampling as a dense known/value grid.
pub fn brute_fields(s: &SparseSampling, p: &Pattern) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (w, h) = (s.width(), s.height());
    let mut known = vec![None; w * h];
    for smp in s.samples() {
        known[smp.coord.y * w + smp.coord.x] = Some(smp.value);
    }
    let offsets = disk_offsets(p.radius());
    let n = offsets.len() as f64;
    let mut a = vec![0.0; w * h];
    let mut m = vec![0.0; w * h];
    let mut c = vec![0.0; w * h];
    for qy in 0..h as isize {
        for qx in 0..w as isize {
            let mut count = 0usize;
            let mut diff = 0.0;
            for &(dx, dy) in &offsets {
                let (x, y) = (qx + dx, qy + dy);
                if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
                    continue;
                }
                if let Some(f) = known[y as usize * w + x as usize] {
                    count += 1;
                    diff += (f - p.value(dx, dy)).abs();
                }
            }
            let q = qy as usize * w + qx as usize;
            a[q] = count as f64 / n;
            m[q] = diff / n;
            c[q] = a[q] - m[q];
        }
    }
    (a, m, c)
}

/// Reconstruction by exhaustive search over (pattern, anchor) for every
/// pixel: maximise confidence, then minimise pattern index, then the
/// anchor's row-major position.
pub fn brute_reconstruct(
    s: &SparseSampling,
    lib: &PatternLibrary,
) -> (Vec<f64>, Vec<usize>, Vec<PixelCoord>) {
    let (w, h) = (s.width(), s.height());
    let fields: Vec<Vec<f64>> = lib
        .patterns()
        .iter()
        .map(|p| brute_fields(s, p).2)
        .collect();
    let offsets = disk_offsets(lib.radius());
    let mut phi = vec![0.0; w * h];
    let mut idx = vec![0; w * h];
    let mut anchors = vec![PixelCoord::new(0, 0); w * h];
    for py in 0..h as isize {
        for px in 0..w as isize {
            let mut best: Option<(f64, usize, (usize, usize))> = None;
            for (i, field) in fields.iter().enumerate() {
                for &(dx, dy) in &offsets {
                    let (qx, qy) = (px + dx, py + dy);
                    if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                        continue;
                    }
                    let (qx, qy) = (qx as usize, qy as usize);
                    let v = field[qy * w + qx];
                    let better = match best {
                        None => true,
                        Some((bv, bi, (bx, by))) => {
                            v > bv || (v == bv && (i < bi || (i == bi && (qy, qx) < (by, bx))))
                        }
                    };
                    if better {
                        best = Some((v, i, (qx, qy)));
                    }
                }
            }
            let (_, i, (qx, qy)) = best.unwrap();
            let p = py as usize * w + px as usize;
            phi[p] = lib.patterns()[i].value(px - qx as isize, py - qy as isize);
            idx[p] = i;
            anchors[p] = PixelCoord::new(qx, qy);
        }
    }
    (phi, idx, anchors)
}

pub fn disk_count(r: usize) -> usize {
    DiskMask::new(r).count()
}

/// A persistence pair as plain numbers; `f64::INFINITY` marks essentials.
pub type Pair = (f64, f64);

/// Sublevel persistence of the cubical V-complex by reducing the full
/// boundary matrix over Z/2. Returns sorted non-zero-persistence pairs
/// for H0 and H1.
pub fn boundary_matrix_persistence(w: usize, h: usize, f: &[f64]) -> (Vec<Pair>, Vec<Pair>) {
    // cells: (value, dim, boundary as vertex-or-cell ids)
    struct Cell {
        value: f64,
        dim: u8,
        faces: Vec<usize>,
    }
    let mut cells: Vec<Cell> = Vec::new();
    let vid = |x: usize, y: usize| y * w + x;
    for i in 0..w * h {
        cells.push(Cell {
            value: f[i],
            dim: 0,
            faces: vec![],
        });
    }
    let mut hedge = vec![usize::MAX; w * h];
    let mut vedge = vec![usize::MAX; w * h];
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                hedge[vid(x, y)] = cells.len();
                cells.push(Cell {
                    value: f[vid(x, y)].max(f[vid(x + 1, y)]),
                    dim: 1,
                    faces: vec![vid(x, y), vid(x + 1, y)],
                });
            }
            if y + 1 < h {
                vedge[vid(x, y)] = cells.len();
                cells.push(Cell {
                    value: f[vid(x, y)].max(f[vid(x, y + 1)]),
                    dim: 1,
                    faces: vec![vid(x, y), vid(x, y + 1)],
                });
            }
        }
    }
    for y in 0..h.saturating_sub(1) {
        for x in 0..w.saturating_sub(1) {
            let v = [vid(x, y), vid(x + 1, y), vid(x, y + 1), vid(x + 1, y + 1)];
            cells.push(Cell {
                value: v.iter().map(|&i| f[i]).fold(f64::NEG_INFINITY, f64::max),
                dim: 2,
                faces: vec![
                    hedge[vid(x, y)],
                    hedge[vid(x, y + 1)],
                    vedge[vid(x, y)],
                    vedge[vid(x + 1, y)],
                ],
            });
        }
    }
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| {
        cells[a]
            .value
            .total_cmp(&cells[b].value)
            .then(cells[a].dim.cmp(&cells[b].dim))
            .then(a.cmp(&b))
    });
    let mut pos = vec![0; cells.len()];
    for (k, &c) in order.iter().enumerate() {
        pos[c] = k;
    }
    let mut columns: Vec<Vec<usize>> = order
        .iter()
        .map(|&c| {
            let mut col: Vec<usize> = cells[c].faces.iter().map(|&fc| pos[fc]).collect();
            col.sort_unstable();
            col
        })
        .collect();
    let mut low_owner: Vec<Option<usize>> = vec![None; cells.len()];
    let mut paired = vec![false; cells.len()];
    let mut h0 = Vec::new();
    let mut h1 = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match low_owner[low] {
                Some(k) => {
                    let other = columns[k].clone();
                    let mut merged = Vec::new();
                    let (mut a, mut b) = (0, 0);
                    let cur = &columns[j];
                    while a < cur.len() || b < other.len() {
                        if b == other.len() || (a < cur.len() && cur[a] < other[b]) {
                            merged.push(cur[a]);
                            a += 1;
                        } else if a == cur.len() || other[b] < cur[a] {
                            merged.push(other[b]);
                            b += 1;
                        } else {
                            a += 1;
                            b += 1;
                        }
                    }
                    columns[j] = merged;
                }
                None => break,
            }
        }
        if let Some(&low) = columns[j].last() {
            low_owner[low] = Some(j);
            paired[low] = true;
            paired[j] = true;
            let birth = cells[order[low]].value;
            let death = cells[order[j]].value;
            if death > birth {
                match cells[order[low]].dim {
                    0 => h0.push((birth, death)),
                    _ => h1.push((birth, death)),
                }
            }
        }
    }
    for k in 0..columns.len() {
        if !paired[k] {
            let c = &cells[order[k]];
            match c.dim {
                0 => h0.push((c.value, f64::INFINITY)),
                1 => h1.push((c.value, f64::INFINITY)),
                _ => panic!("unpaired square"),
            }
        }
    }
    let key = |a: &Pair, b: &Pair| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1));
    h0.sort_by(key);
    h1.sort_by(key);
    (h0, h1)
}

pub fn pairs(d: &geneo::tda::PersistenceDiagram) -> Vec<Pair> {
    d.points().iter().map(|p| (p.birth, p.death)).collect()
}

/// 4-connected component count of `{f <= t}` by a fresh flood fill.
pub fn components_below(g: &GridSignal, t: f64) -> usize {
    let (w, h) = (g.width(), g.height());
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for start in 0..w * h {
        if seen[start] || g.values()[start] > t {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            let (x, y) = (v % w, v / w);
            let mut nb = Vec::with_capacity(4);
            if x > 0 {
                nb.push(v - 1);
            }
            if x + 1 < w {
                nb.push(v + 1);
            }
            if y > 0 {
                nb.push(v - w);
            }
            if y + 1 < h {
                nb.push(v + w);
            }
            for n in nb {
                if !seen[n] && g.values()[n] <= t {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
    }
    count
}

/// First Betti number of `{f <= t}` from the Euler characteristic
/// `V - E + F = b0 - b1` of the V-complex restricted to the threshold.
pub fn betti1_below(g: &GridSignal, t: f64) -> usize {
    let (w, h) = (g.width(), g.height());
    let f = |x: usize, y: usize| g.get(x, y);
    let mut v = 0i64;
    let mut e = 0i64;
    let mut sq = 0i64;
    for y in 0..h {
        for x in 0..w {
            if f(x, y) <= t {
                v += 1;
            }
            if x + 1 < w && f(x, y).max(f(x + 1, y)) <= t {
                e += 1;
            }
            if y + 1 < h && f(x, y).max(f(x, y + 1)) <= t {
                e += 1;
            }
            if x + 1 < w
                && y + 1 < h
                && f(x, y)
                    .max(f(x + 1, y))
                    .max(f(x, y + 1))
                    .max(f(x + 1, y + 1))
                    <= t
            {
                sq += 1;
            }
        }
    }
    let b0 = components_below(g, t) as i64;
    (b0 - (v - e + sq)) as usize
}

/// Min-cost flow formulation of W_p^p between finite point sets: every
/// point either flows to a point of the other set or through one shared
/// diagonal node. Solved by successive shortest paths (Bellman-Ford).
pub fn flow_wasserstein_pp(a: &[Pair], b: &[Pair], p: i32) -> f64 {
    let linf = |x: &Pair, y: &Pair| (x.0 - y.0).abs().max((x.1 - y.1).abs());
    let diag = |x: &Pair| (x.1 - x.0) / 2.0;
    let (n1, n2) = (a.len(), b.len());
    // nodes: 0 source, 1..=n1 left, n1+1..=n1+n2 right, diag, sink
    let dg = n1 + n2 + 1;
    let sink = dg + 1;
    let n = sink + 1;
    struct Edge {
        to: usize,
        cap: i64,
        cost: f64,
    }
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let add = |edges: &mut Vec<Edge>,
               adj: &mut Vec<Vec<usize>>,
               u: usize,
               v: usize,
               cap: i64,
               cost: f64| {
        adj[u].push(edges.len());
        edges.push(Edge { to: v, cap, cost });
        adj[v].push(edges.len());
        edges.push(Edge {
            to: u,
            cap: 0,
            cost: -cost,
        });
    };
    for i in 0..n1 {
        add(&mut edges, &mut adj, 0, 1 + i, 1, 0.0);
        add(&mut edges, &mut adj, 1 + i, dg, 1, diag(&a[i]).powi(p));
        for j in 0..n2 {
            add(
                &mut edges,
                &mut adj,
                1 + i,
                1 + n1 + j,
                1,
                linf(&a[i], &b[j]).powi(p),
            );
        }
    }
    add(&mut edges, &mut adj, 0, dg, n2 as i64, 0.0);
    for j in 0..n2 {
        add(&mut edges, &mut adj, dg, 1 + n1 + j, 1, diag(&b[j]).powi(p));
        add(&mut edges, &mut adj, 1 + n1 + j, sink, 1, 0.0);
    }
    add(&mut edges, &mut adj, dg, sink, n1 as i64, 0.0);

    let mut total = 0.0;
    let mut flow = 0usize;
    while flow < n1 + n2 {
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        dist[0] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u].is_infinite() {
                    continue;
                }
                for &e in &adj[u] {
                    let ed = &edges[e];
                    if ed.cap > 0 && dist[u] + ed.cost < dist[ed.to] - 1e-15 {
                        dist[ed.to] = dist[u] + ed.cost;
                        prev[ed.to] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        assert!(dist[sink].is_finite(), "network must carry n1 + n2 units");
        let mut v = sink;
        while v != 0 {
            let e = prev[v];
            edges[e].cap -= 1;
            edges[e ^ 1].cap += 1;
            v = edges[e ^ 1].to;
        }
        total += dist[sink];
        flow += 1;
    }
    total
}
