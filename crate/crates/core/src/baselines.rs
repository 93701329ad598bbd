//! Reference reconstructor (1-nearest neighbour) and the MSE metric.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSignal, SparseSampling};

/// Every pixel takes the value of its nearest sample in Euclidean distance;
/// among equidistant samples the first in row-major order wins.
pub fn knn1_reconstruct(s: &SparseSampling) -> Result<GridSignal> {
    if s.is_empty() {
        return Err(Error::EmptySampling);
    }
    let (w, h) = (s.width(), s.height());
    let samples = s.samples();
    let mut values = vec![0.0; w * h];
    values.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut best = u64::MAX;
            let mut value = 0.0;
            // samples are stored row-major, so strict `<` keeps the first
            for smp in samples {
                let dx = smp.coord.x.abs_diff(x) as u64;
                let dy = smp.coord.y.abs_diff(y) as u64;
                let d2 = dx * dx + dy * dy;
                if d2 < best {
                    best = d2;
                    value = smp.value;
                }
            }
            *out = value;
        }
    });
    GridSignal::new(w, h, values)
}

/// Mean squared error over all pixels.
pub fn mse(a: &GridSignal, b: &GridSignal) -> Result<f64> {
    a.same_shape(b)?;
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / a.len() as f64)
}
