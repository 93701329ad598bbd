//! The pattern-matching operator.
//!
//! For a sampling `S` and pattern `P = (h, disk)` the operator computes, at
//! every anchor `q` of the grid,
//!
//! - reliability `A(q)`: the fraction of the disk around `q` holding a
//!   known sample,
//! - mismatch `S(q)`: the sum of `|f(q + xi) - h(xi)|` over known samples in
//!   the disk, divided by the disk's lattice point count,
//! - confidence `c(q) = A(q) - S(q)`, which satisfies `0 <= c <= A <= 1`.
//!
//! Pixels outside the grid count as unknown. Reconstruction picks, for every
//! pixel `p`, the pattern and anchor with the highest confidence among the
//! anchors whose disk covers `p`, and copies the pattern value found at
//! `p - q`. Ties go to the lower pattern index, then to the row-major first
//! anchor.
//!
//! Sums for a given anchor are always accumulated in row-major sample order,
//! so results do not depend on how patterns are spread over threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSignal, PixelCoord, SparseSampling};
use crate::patterns::{DiskMask, Pattern, PatternLibrary};

/// Confidence of one pattern at every anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceField {
    pub grid: GridSignal,
    pub pattern_index: usize,
}

/// Per-pixel argmax of the operator and the resulting reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub phi_rec: GridSignal,
    /// Winning library index per pixel, row-major.
    pub best_pattern: Vec<usize>,
    /// Winning anchor per pixel, row-major.
    pub best_anchor: Vec<PixelCoord>,
    /// Confidence of the winning (pattern, anchor) pair per pixel.
    pub best_confidence: GridSignal,
}

impl ReconstructionResult {
    /// Pattern indices rescaled to `[0, 1]` by the largest index in use.
    pub fn index_map(&self, library_len: usize) -> GridSignal {
        let denom = library_len.saturating_sub(1).max(1) as f64;
        let values = self
            .best_pattern
            .iter()
            .map(|&i| (i as f64 / denom).min(1.0))
            .collect();
        GridSignal::from_raw_unchecked(self.phi_rec.width(), self.phi_rec.height(), values)
    }
}

/// Known-sample count of the disk around every anchor.
fn scatter_counts(s: &SparseSampling, mask: &DiskMask) -> Vec<u32> {
    let (w, h) = (s.width() as isize, s.height() as isize);
    let r = mask.radius() as isize;
    let mut counts = vec![0u32; (w * h) as usize];
    for sample in s.samples() {
        let (px, py) = (sample.coord.x as isize, sample.coord.y as isize);
        for dy in -r..=r {
            let qy = py - dy;
            if qy < 0 || qy >= h {
                continue;
            }
            let hw = mask.half_width(dy) as isize;
            let lo = (-hw).max(px + 1 - w);
            let hi = hw.min(px);
            if lo > hi {
                continue;
            }
            let row = (qy * w) as usize;
            // dx in [lo, hi]  <=>  qx = px - dx in [px - hi, px - lo]
            let start = row + (px - hi) as usize;
            let end = row + (px - lo) as usize;
            for c in &mut counts[start..=end] {
                *c += 1;
            }
        }
    }
    counts
}

/// Accumulates `sum |f(q + xi) - h(xi)|` over known samples into `out`,
/// which must be zeroed and have one entry per anchor.
fn scatter_mismatch(s: &SparseSampling, p: &Pattern, mask: &DiskMask, out: &mut [f64]) {
    let (w, h) = (s.width() as isize, s.height() as isize);
    let r = mask.radius() as isize;
    let side = mask.side();
    let hv = p.values();
    for sample in s.samples() {
        let (px, py) = (sample.coord.x as isize, sample.coord.y as isize);
        let v = sample.value;
        for dy in -r..=r {
            let qy = py - dy;
            if qy < 0 || qy >= h {
                continue;
            }
            let hw = mask.half_width(dy) as isize;
            let lo = (-hw).max(px + 1 - w);
            let hi = hw.min(px);
            if lo > hi {
                continue;
            }
            let row = (qy * w) as usize;
            let h_row = (dy + r) as usize * side;
            let h_start = h_row + (lo + r) as usize;
            let h_end = h_row + (hi + r) as usize;
            // qx runs downwards while dx runs upwards
            let q_end = row + (px - lo) as usize;
            let q_start = row + (px - hi) as usize;
            let targets = out[q_start..=q_end].iter_mut().rev();
            for (acc, &hval) in targets.zip(&hv[h_start..=h_end]) {
                *acc += (v - hval).abs();
            }
        }
    }
}

fn check_radius(s: &SparseSampling, mask: &DiskMask) -> Result<()> {
    let diag = ((s.width() * s.width() + s.height() * s.height()) as f64).sqrt();
    if mask.radius() as f64 > diag {
        return Err(Error::InvalidParameter(format!(
            "radius {} exceeds the grid diagonal",
            mask.radius()
        )));
    }
    Ok(())
}

/// `A(q)`: fraction of the disk around `q` covered by known samples.
pub fn reliability_field(s: &SparseSampling, mask: &DiskMask) -> Result<GridSignal> {
    check_radius(s, mask)?;
    let n = mask.count() as f64;
    let values = scatter_counts(s, mask)
        .into_iter()
        .map(|c| c as f64 / n)
        .collect();
    Ok(GridSignal::from_raw_unchecked(
        s.width(),
        s.height(),
        values,
    ))
}

/// `S(q)`: mean absolute mismatch between the samples and the pattern placed
/// at `q`, normalised by the disk size.
pub fn mismatch_field(s: &SparseSampling, p: &Pattern) -> Result<GridSignal> {
    let mask = DiskMask::new(p.radius());
    check_radius(s, &mask)?;
    let mut sums = vec![0.0; s.width() * s.height()];
    scatter_mismatch(s, p, &mask, &mut sums);
    let n = mask.count() as f64;
    let values = sums.into_iter().map(|v| v / n).collect();
    Ok(GridSignal::from_raw_unchecked(
        s.width(),
        s.height(),
        values,
    ))
}

/// Reusable state for evaluating many patterns against one sampling.
struct FieldEvaluator<'a> {
    sampling: &'a SparseSampling,
    mask: &'a DiskMask,
    reliability: Vec<f64>,
}

impl<'a> FieldEvaluator<'a> {
    fn new(sampling: &'a SparseSampling, mask: &'a DiskMask) -> Result<Self> {
        let reliability = reliability_field(sampling, mask)?.into_values();
        Ok(Self {
            sampling,
            mask,
            reliability,
        })
    }

    /// Writes `c = A - S` for pattern `p` into `out`, using `scratch` for the
    /// mismatch sums.
    fn confidence_into(&self, p: &Pattern, scratch: &mut Vec<f64>, out: &mut Vec<f64>) {
        let n = self.mask.count() as f64;
        scratch.clear();
        scratch.resize(self.reliability.len(), 0.0);
        scatter_mismatch(self.sampling, p, self.mask, scratch);
        out.clear();
        out.extend(
            self.reliability
                .iter()
                .zip(scratch.iter())
                .map(|(&a, &s)| a - s / n),
        );
    }
}

/// `c(q) = A(q) - S(q)` for one pattern.
pub fn confidence_field(s: &SparseSampling, p: &Pattern) -> Result<ConfidenceField> {
    let mask = DiskMask::new(p.radius());
    let eval = FieldEvaluator::new(s, &mask)?;
    let mut scratch = Vec::new();
    let mut out = Vec::new();
    eval.confidence_into(p, &mut scratch, &mut out);
    Ok(ConfidenceField {
        grid: GridSignal::from_raw_unchecked(s.width(), s.height(), out),
        pattern_index: 0,
    })
}

/// One confidence field per library pattern, in library order.
pub fn confidence_stack(s: &SparseSampling, lib: &PatternLibrary) -> Result<Vec<ConfidenceField>> {
    if lib.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    let eval = FieldEvaluator::new(s, lib.mask())?;
    Ok(lib
        .patterns()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut scratch = Vec::new();
            let mut out = Vec::new();
            eval.confidence_into(p, &mut scratch, &mut out);
            ConfidenceField {
                grid: GridSignal::from_raw_unchecked(s.width(), s.height(), out),
                pattern_index: i,
            }
        })
        .collect())
}

/// Running per-anchor maximum over patterns: best confidence and the lowest
/// pattern index attaining it.
#[derive(Clone)]
struct AnchorBest {
    value: Vec<f64>,
    index: Vec<usize>,
}

impl AnchorBest {
    fn identity(n: usize) -> Self {
        Self {
            value: vec![f64::NEG_INFINITY; n],
            index: vec![usize::MAX; n],
        }
    }

    fn offer(&mut self, pattern_index: usize, field: &[f64]) {
        for ((best, idx), &c) in self.value.iter_mut().zip(&mut self.index).zip(field) {
            if c > *best {
                *best = c;
                *idx = pattern_index;
            }
        }
    }

    /// `self` covers lower pattern indices than `later`.
    fn merge(mut self, later: AnchorBest) -> Self {
        for q in 0..self.value.len() {
            if later.value[q] > self.value[q] {
                self.value[q] = later.value[q];
                self.index[q] = later.index[q];
            }
        }
        self
    }
}

/// Per-pixel argmax over anchors whose disk covers the pixel.
fn select(
    best: &AnchorBest,
    lib: &PatternLibrary,
    width: usize,
    height: usize,
) -> ReconstructionResult {
    let mask = lib.mask();
    let r = mask.radius() as isize;
    let (w, h) = (width as isize, height as isize);
    let rows: Vec<Vec<(f64, usize, PixelCoord, f64)>> = (0..height)
        .into_par_iter()
        .map(|py| {
            let py = py as isize;
            (0..w)
                .map(|px| {
                    let mut winner: Option<(f64, usize, usize)> = None;
                    // q = p + d; scanning d row-major visits q row-major
                    for dy in -r..=r {
                        let qy = py + dy;
                        if qy < 0 || qy >= h {
                            continue;
                        }
                        let hw = mask.half_width(dy) as isize;
                        let lo = (-hw).max(-px);
                        let hi = hw.min(w - 1 - px);
                        for dx in lo..=hi {
                            let q = (qy * w + px + dx) as usize;
                            let (v, i) = (best.value[q], best.index[q]);
                            let better = match winner {
                                None => true,
                                Some((bv, bi, _)) => v > bv || (v == bv && i < bi),
                            };
                            if better {
                                winner = Some((v, i, q));
                            }
                        }
                    }
                    let (v, i, q) = winner.expect("disk always contains the pixel itself");
                    let anchor = PixelCoord::new(q % width, q / width);
                    let pattern = &lib.patterns()[i];
                    let value = pattern.value(px - anchor.x as isize, py - anchor.y as isize);
                    (v, i, anchor, value)
                })
                .collect()
        })
        .collect();

    let n = width * height;
    let mut phi = Vec::with_capacity(n);
    let mut conf = Vec::with_capacity(n);
    let mut best_pattern = Vec::with_capacity(n);
    let mut best_anchor = Vec::with_capacity(n);
    for (v, i, q, value) in rows.into_iter().flatten() {
        conf.push(v);
        best_pattern.push(i);
        best_anchor.push(q);
        phi.push(value);
    }
    ReconstructionResult {
        phi_rec: GridSignal::from_raw_unchecked(width, height, phi),
        best_pattern,
        best_anchor,
        best_confidence: GridSignal::from_raw_unchecked(width, height, conf),
    }
}

/// Reconstruction from a precomputed stack aligned with `lib`.
pub fn reconstruct(
    stack: &[ConfidenceField],
    lib: &PatternLibrary,
) -> Result<ReconstructionResult> {
    if lib.is_empty() || stack.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    if stack.len() != lib.len() {
        return Err(Error::LengthMismatch {
            expected: lib.len(),
            actual: stack.len(),
        });
    }
    let (w, h) = (stack[0].grid.width(), stack[0].grid.height());
    let mut best = AnchorBest::identity(w * h);
    for (i, field) in stack.iter().enumerate() {
        field.grid.same_shape(&stack[0].grid)?;
        best.offer(i, field.grid.values());
    }
    Ok(select(&best, lib, w, h))
}

/// Reconstruction straight from the sampling, streaming over patterns
/// without materialising the stack. Equivalent to
/// `reconstruct(&confidence_stack(s, lib)?, lib)`.
pub fn reconstruct_sampling(
    s: &SparseSampling,
    lib: &PatternLibrary,
) -> Result<ReconstructionResult> {
    if lib.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    let eval = FieldEvaluator::new(s, lib.mask())?;
    let n = s.width() * s.height();
    let best = lib
        .patterns()
        .par_iter()
        .enumerate()
        .fold(
            || (AnchorBest::identity(n), Vec::new(), Vec::new()),
            |(mut acc, mut scratch, mut field), (i, p)| {
                eval.confidence_into(p, &mut scratch, &mut field);
                acc.offer(i, &field);
                (acc, scratch, field)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(|| AnchorBest::identity(n), AnchorBest::merge);
    Ok(select(&best, lib, s.width(), s.height()))
}
