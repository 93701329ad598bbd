//! p-Wasserstein distance between persistence diagrams, L-infinity ground
//! metric, solved exactly as an assignment problem.
//!
//! Finite points may match a point of the other diagram or their own
//! diagonal projection (cost half the persistence). Essential points get
//! their death replaced by a common cap and are matched among themselves;
//! only the surplus on the larger side goes to the diagonal.

use std::cmp::Ordering;

use super::hungarian;
use super::persistence::sublevel_persistence;
use super::{PersistenceDiagram, PersistencePoint};
use crate::error::{Error, Result};
use crate::grid::GridSignal;

fn linf(a: &PersistencePoint, b: &PersistencePoint) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

fn to_diagonal(a: &PersistencePoint) -> f64 {
    (a.death - a.birth) / 2.0
}

/// Sum of p-th powers of the optimal finite-point matching.
fn finite_cost(a: &[PersistencePoint], b: &[PersistencePoint], p: i32) -> f64 {
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    if n == 0 {
        return 0.0;
    }
    let mut cost = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            cost[i * n + j] = match (i < n1, j < n2) {
                (true, true) => linf(&a[i], &b[j]).powi(p),
                (true, false) => to_diagonal(&a[i]).powi(p),
                (false, true) => to_diagonal(&b[j]).powi(p),
                (false, false) => 0.0,
            };
        }
    }
    hungarian::solve(&cost, n).1
}

/// Sum of p-th powers for the essential classes with deaths set to `cap`.
fn essential_cost(a: &[f64], b: &[f64], cap: f64, p: i32) -> f64 {
    let m = a.len().max(b.len());
    if m == 0 {
        return 0.0;
    }
    let diag = |birth: f64| ((cap.max(birth) - birth) / 2.0).powi(p);
    let mut cost = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            cost[i * m + j] = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => {
                    let dx = (cap.max(x) - cap.max(y)).abs();
                    (x - y).abs().max(dx).powi(p)
                }
                (Some(&x), None) => diag(x),
                (None, Some(&y)) => diag(y),
                (None, None) => 0.0,
            };
        }
    }
    hungarian::solve(&cost, m).1
}

fn canonical_cmp(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.points()
            .iter()
            .zip(b.points())
            .map(|(x, y)| {
                x.birth
                    .total_cmp(&y.birth)
                    .then(x.death.total_cmp(&y.death))
            })
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn split(d: &PersistenceDiagram) -> (Vec<PersistencePoint>, Vec<f64>) {
    let finite = d.finite_points().copied().collect();
    let essential = d.essential_points().map(|p| p.birth).collect();
    (finite, essential)
}

/// `W_p` with essential deaths truncated at `cap`.
pub fn wasserstein_with_cap(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    p: u32,
    cap: f64,
) -> Result<f64> {
    if d1.dimension() != d2.dimension() {
        return Err(Error::DiagramDimensionMismatch(
            d1.dimension(),
            d2.dimension(),
        ));
    }
    if p == 0 {
        return Err(Error::InvalidParameter(
            "p must be a positive integer".into(),
        ));
    }
    let p = i32::try_from(p).map_err(|_| Error::InvalidParameter("p too large".into()))?;
    // Solve in a canonical argument order so the result is exactly symmetric.
    let (d1, d2) = if canonical_cmp(d1, d2).is_gt() {
        (d2, d1)
    } else {
        (d1, d2)
    };
    let (f1, e1) = split(d1);
    let (f2, e2) = split(d2);
    let total = finite_cost(&f1, &f2, p) + essential_cost(&e1, &e2, cap, p);
    Ok(total.max(0.0).powf(1.0 / p as f64))
}

/// `W_p` with the cap taken as the largest finite coordinate in either
/// diagram.
pub fn wasserstein(d1: &PersistenceDiagram, d2: &PersistenceDiagram, p: u32) -> Result<f64> {
    let cap = d1
        .points()
        .iter()
        .chain(d2.points())
        .flat_map(|pt| [pt.birth, pt.death])
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let cap = if cap.is_finite() { cap } else { 0.0 };
    wasserstein_with_cap(d1, d2, p, cap)
}

/// Per-dimension and summed 1-Wasserstein distances between two grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopoDistance {
    pub h0: f64,
    pub h1: f64,
    pub total: f64,
}

/// `W_1(H0) + W_1(H1)`; essential deaths are capped at the larger of the
/// two grid maxima.
pub fn topo_distance(g1: &GridSignal, g2: &GridSignal) -> Result<TopoDistance> {
    let cap = g1.max_value().max(g2.max_value());
    let ((a0, a1), (b0, b1)) =
        rayon::join(|| sublevel_persistence(g1), || sublevel_persistence(g2));
    let h0 = wasserstein_with_cap(&a0, &b0, 1, cap)?;
    let h1 = wasserstein_with_cap(&a1, &b1, 1, cap)?;
    Ok(TopoDistance {
        h0,
        h1,
        total: h0 + h1,
    })
}
