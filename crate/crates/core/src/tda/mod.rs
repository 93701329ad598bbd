//! Sublevel-set persistent homology of grids and distances between
//! persistence diagrams.

mod hungarian;
mod persistence;
mod wasserstein;

pub use hungarian::solve as solve_assignment;
pub use persistence::{sublevel_persistence, sublevel_persistence_values};
pub use wasserstein::{topo_distance, wasserstein, wasserstein_with_cap, TopoDistance};

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A `(birth, death)` pair. Essential classes have `death = +inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePoint {
    pub fn finite(birth: f64, death: f64) -> Self {
        debug_assert!(birth <= death);
        Self { birth, death }
    }

    pub fn essential(birth: f64) -> Self {
        Self {
            birth,
            death: f64::INFINITY,
        }
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Multiset of persistence points in one homology dimension. Points are
/// kept sorted by `(birth, death)`; zero-persistence pairs are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    dimension: u8,
    points: Vec<PersistencePoint>,
}

impl PersistenceDiagram {
    pub fn new(dimension: u8, mut points: Vec<PersistencePoint>) -> Self {
        points.retain(|p| p.death > p.birth);
        points.sort_by(|a, b| {
            a.birth
                .total_cmp(&b.birth)
                .then(a.death.total_cmp(&b.death))
        });
        Self { dimension, points }
    }

    pub fn empty(dimension: u8) -> Self {
        Self::new(dimension, Vec::new())
    }

    pub fn dimension(&self) -> u8 {
        self.dimension
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn finite_points(&self) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(|p| !p.is_essential())
    }

    pub fn essential_points(&self) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(|p| p.is_essential())
    }
}

/// CSV with header `dim,birth,death`; essential deaths print as `inf`.
pub fn write_diagrams(diagrams: &[&PersistenceDiagram]) -> String {
    let mut out = String::from("dim,birth,death\n");
    for d in diagrams {
        for p in d.points() {
            if p.is_essential() {
                let _ = writeln!(out, "{},{},inf", d.dimension, p.birth);
            } else {
                let _ = writeln!(out, "{},{},{}", d.dimension, p.birth, p.death);
            }
        }
    }
    out
}

/// Parses diagram CSV into `[H0, H1]`.
pub fn read_diagrams(text: &str) -> Result<[PersistenceDiagram; 2]> {
    let mut points: [Vec<PersistencePoint>; 2] = [Vec::new(), Vec::new()];
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "dim,birth,death" {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected header `dim,birth,death`, found `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let err = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err("expected three fields"));
        }
        let dim: usize = fields[0].parse().map_err(|_| err("bad dim"))?;
        if dim > 1 {
            return Err(err("only dimensions 0 and 1 are supported"));
        }
        let birth: f64 = fields[1].parse().map_err(|_| err("bad birth"))?;
        let death = if fields[2].eq_ignore_ascii_case("inf") {
            f64::INFINITY
        } else {
            fields[2].parse().map_err(|_| err("bad death"))?
        };
        if !birth.is_finite() || death < birth {
            return Err(err("need finite birth <= death"));
        }
        points[dim].push(PersistencePoint { birth, death });
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 0,
            msg: "missing header".into(),
        });
    }
    let [p0, p1] = points;
    Ok([
        PersistenceDiagram::new(0, p0),
        PersistenceDiagram::new(1, p1),
    ])
}
