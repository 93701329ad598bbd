//! Sparse observations of a ground-truth grid.
//!
//! Selection and corruption draw from two independent ChaCha8 streams derived
//! from the same seed, so changing the corruption percentage never changes
//! which pixels were selected.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{GridSignal, PixelCoord, SparseSampling};

const SELECTION_STREAM: u64 = 0;
const CORRUPTION_STREAM: u64 = 1;

/// Sampling percentage `fraction_known` (M), corruption percentage
/// `fraction_corrupt` (Q) and the RNG seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub fraction_known: f64,
    pub fraction_corrupt: f64,
    pub seed: u64,
}

impl SamplingSpec {
    pub fn new(fraction_known: f64, fraction_corrupt: f64, seed: u64) -> Result<Self> {
        if !(fraction_known > 0.0 && fraction_known <= 100.0) {
            return Err(Error::InvalidParameter(format!(
                "known percentage {fraction_known} not in (0, 100]"
            )));
        }
        if !(0.0..=100.0).contains(&fraction_corrupt) {
            return Err(Error::InvalidParameter(format!(
                "corrupt percentage {fraction_corrupt} not in [0, 100]"
            )));
        }
        Ok(Self {
            fraction_known,
            fraction_corrupt,
            seed,
        })
    }
}

/// `floor(percent / 100 * n)`, robust to the last-ulp error of the product.
pub fn percent_count(percent: f64, n: usize) -> usize {
    let exact = percent * n as f64 / 100.0;
    (exact + 1e-9).floor().max(0.0) as usize
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Draws `floor(M/100 * W*H)` distinct pixels uniformly without replacement
/// and copies their ground-truth values.
pub fn sample_uniform(gt: &GridSignal, spec: &SamplingSpec) -> Result<SparseSampling> {
    let n = gt.len();
    let k = percent_count(spec.fraction_known, n);
    if k == 0 {
        return Err(Error::EmptySampling);
    }
    let mut rng = stream(spec.seed, SELECTION_STREAM);
    let width = gt.width();
    let coords: Vec<PixelCoord> = index::sample(&mut rng, n, k)
        .into_iter()
        .map(|i| PixelCoord::new(i % width, i / width))
        .collect();
    SparseSampling::from_grid(gt, &coords)
}

/// Replaces `floor(Q/100 * r)` of the `r` sample values, chosen uniformly
/// without replacement, with independent `U(0, 1)` draws.
pub fn corrupt(sampling: &SparseSampling, spec: &SamplingSpec) -> Result<SparseSampling> {
    let r = sampling.len();
    let k = percent_count(spec.fraction_corrupt, r);
    if k == 0 {
        return Ok(sampling.clone());
    }
    let mut rng = stream(spec.seed, CORRUPTION_STREAM);
    let mut chosen: Vec<usize> = index::sample(&mut rng, r, k).into_vec();
    // fixed draw order regardless of how the index sampler returned them
    chosen.sort_unstable();
    let mut values: Vec<f64> = sampling.samples().iter().map(|s| s.value).collect();
    for i in chosen {
        values[i] = rng.gen::<f64>();
    }
    sampling.with_values(&values)
}

/// Sampling followed by corruption: the observation model used by the
/// experiment harness.
pub fn observe(gt: &GridSignal, spec: &SamplingSpec) -> Result<SparseSampling> {
    corrupt(&sample_uniform(gt, spec)?, spec)
}

/// Unclamped Gaussian embedding of the samples evaluated at a real point:
/// `(sum v_i g_i, sum g_i)` with `g_i = exp(-|p - p_i|^2 / (2 sigma^2))`,
/// truncated at `4 sigma`.
pub fn embed_at(sampling: &SparseSampling, x: f64, y: f64, sigma: f64) -> (f64, f64) {
    let cutoff2 = (4.0 * sigma).powi(2);
    let denom = 2.0 * sigma * sigma;
    let mut phi = 0.0;
    let mut psi = 0.0;
    for s in sampling.samples() {
        let dx = x - s.coord.x as f64;
        let dy = y - s.coord.y as f64;
        let d2 = dx * dx + dy * dy;
        if d2 > cutoff2 {
            continue;
        }
        let g = (-d2 / denom).exp();
        phi += s.value * g;
        psi += g;
    }
    (phi, psi)
}

/// Rasterises the Gaussian embedding on the lattice and clamps to `[0, 1]`.
/// Returns `(phi_hat, psi_hat)`.
pub fn gaussian_embed(sampling: &SparseSampling, sigma: f64) -> Result<(GridSignal, GridSignal)> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma {sigma} must be > 0"
        )));
    }
    let (w, h) = (sampling.width(), sampling.height());
    let mut phi = vec![0.0; w * h];
    let mut psi = vec![0.0; w * h];
    let reach = (4.0 * sigma).floor() as isize;
    let cutoff2 = (4.0 * sigma).powi(2);
    let denom = 2.0 * sigma * sigma;
    for s in sampling.samples() {
        let (sx, sy) = (s.coord.x as isize, s.coord.y as isize);
        for dy in -reach..=reach {
            let y = sy + dy;
            if y < 0 || y >= h as isize {
                continue;
            }
            for dx in -reach..=reach {
                let x = sx + dx;
                if x < 0 || x >= w as isize {
                    continue;
                }
                let d2 = (dx * dx + dy * dy) as f64;
                if d2 > cutoff2 {
                    continue;
                }
                let g = (-d2 / denom).exp();
                let i = y as usize * w + x as usize;
                phi[i] += s.value * g;
                psi[i] += g;
            }
        }
    }
    let clamp = |v: Vec<f64>| v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
    Ok((
        GridSignal::from_raw_unchecked(w, h, clamp(phi)),
        GridSignal::from_raw_unchecked(w, h, clamp(psi)),
    ))
}
