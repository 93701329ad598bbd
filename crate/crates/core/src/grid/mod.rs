//! Dense grids, sparse samplings and the reliability mask.
//!
//! Coordinates are `(x, y) = (column, row)` with the origin at the top-left
//! pixel; storage is row-major. One pixel is one metre.

mod io;

pub use io::{read_grid, read_sampling, write_grid, write_pgm, write_sampling, GRID_MAGIC};

use std::collections::HashSet;

use crate::error::{Error, Result};

/// A pixel position on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub x: usize,
    pub y: usize,
}

impl PixelCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Row-major index on a grid of the given width.
    #[inline]
    pub fn index(self, width: usize) -> usize {
        self.y * width + self.x
    }

    /// Ordering key matching row-major storage.
    #[inline]
    pub fn row_major_key(self) -> (usize, usize) {
        (self.y, self.x)
    }
}

/// A dense `width x height` field with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GridSignal {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !in_unit_interval(value) {
                return Err(Error::ValueOutOfRange { index, value });
            }
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        check_dims(width, height)?;
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds a grid from a per-pixel function `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        check_dims(width, height)?;
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    /// Builds a grid without range checks. Callers must guarantee that all
    /// values are in `[0, 1]`.
    pub(crate) fn from_raw_unchecked(width: usize, height: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        debug_assert!(values.iter().all(|&v| in_unit_interval(v)));
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn at(&self, p: PixelCoord) -> f64 {
        self.get(p.x, p.y)
    }

    pub fn contains(&self, p: PixelCoord) -> bool {
        p.x < self.width && p.y < self.height
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn same_shape(&self, other: &GridSignal) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

/// One observed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub coord: PixelCoord,
    pub value: f64,
}

/// Known measurements on a grid: the delta representation of the sampled
/// signal and its binary reliability.
///
/// Samples are kept in row-major coordinate order, which fixes the
/// accumulation order used by the confidence computation.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSampling {
    width: usize,
    height: usize,
    samples: Vec<Sample>,
}

impl SparseSampling {
    pub fn new(width: usize, height: usize, mut samples: Vec<Sample>) -> Result<Self> {
        check_dims(width, height)?;
        let mut seen = HashSet::with_capacity(samples.len());
        for (index, s) in samples.iter().enumerate() {
            let PixelCoord { x, y } = s.coord;
            if x >= width || y >= height {
                return Err(Error::CoordOutOfBounds {
                    x,
                    y,
                    width,
                    height,
                });
            }
            if !in_unit_interval(s.value) {
                return Err(Error::ValueOutOfRange {
                    index,
                    value: s.value,
                });
            }
            if !seen.insert(s.coord) {
                return Err(Error::DuplicateSample { x, y });
            }
        }
        samples.sort_by_key(|s| s.coord.row_major_key());
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, Vec::new())
    }

    /// Samples every pixel of `grid` listed in `coords`.
    pub fn from_grid(grid: &GridSignal, coords: &[PixelCoord]) -> Result<Self> {
        let samples = coords
            .iter()
            .map(|&coord| {
                if !grid.contains(coord) {
                    return Err(Error::CoordOutOfBounds {
                        x: coord.x,
                        y: coord.y,
                        width: grid.width(),
                        height: grid.height(),
                    });
                }
                Ok(Sample {
                    coord,
                    value: grid.at(coord),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid.width(), grid.height(), samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Replaces sample values in place, keeping coordinates. `values` must be
    /// aligned with [`samples`](Self::samples).
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                expected: self.samples.len(),
                actual: values.len(),
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(values)
            .map(|(s, &value)| Sample {
                coord: s.coord,
                value,
            })
            .collect();
        Self::new(self.width, self.height, samples)
    }

    /// Shifts every sample by `(dx, dy)`, dropping those that leave the grid.
    pub fn translated(&self, dx: isize, dy: isize) -> Self {
        let samples = self
            .samples
            .iter()
            .filter_map(|s| {
                let x = s.coord.x as isize + dx;
                let y = s.coord.y as isize + dy;
                if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
                    return None;
                }
                Some(Sample {
                    coord: PixelCoord::new(x as usize, y as usize),
                    value: s.value,
                })
            })
            .collect();
        Self {
            width: self.width,
            height: self.height,
            samples,
        }
    }
}

/// Binary reliability per pixel: set exactly where a measurement exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilityMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl ReliabilityMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Set coordinates in row-major order.
    pub fn coords(&self) -> Vec<PixelCoord> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| PixelCoord::new(i % self.width, i / self.width))
            .collect()
    }
}

/// The reliability mask induced by a sampling.
pub fn mask_of(sampling: &SparseSampling) -> ReliabilityMask {
    let mut bits = vec![false; sampling.width * sampling.height];
    for s in &sampling.samples {
        bits[s.coord.index(sampling.width)] = true;
    }
    ReliabilityMask {
        width: sampling.width,
        height: sampling.height,
        bits,
    }
}

#[inline]
pub(crate) fn in_unit_interval(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(())
}
