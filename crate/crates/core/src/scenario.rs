//! Ground-truth SINR maps: noise and SINR formulas, normalization to
//! `[0, 1]`, a CSV importer and a synthetic urban scene generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSignal;

/// Radio link parameters. Defaults describe a 10 GHz, 50 MHz link with
/// 1 dBm transmitters and a 5 dB noise figure at 290 K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// System temperature, K.
    pub temperature: f64,
    /// Bandwidth, Hz.
    pub bandwidth: f64,
    /// Noise figure, dB.
    pub noise_figure_db: f64,
    /// Carrier frequency, Hz. Not used by the path-loss model.
    pub carrier_hz: f64,
    /// Transmit power, dBm.
    pub tx_power_dbm: f64,
    pub n_tx: usize,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            k_b: 1.38e-23,
            temperature: 290.0,
            bandwidth: 50e6,
            noise_figure_db: 5.0,
            carrier_hz: 10e9,
            tx_power_dbm: 1.0,
            n_tx: 100,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.k_b, self.temperature, self.bandwidth, self.carrier_hz];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || !self.noise_figure_db.is_finite()
            || !self.tx_power_dbm.is_finite()
            || self.n_tx == 0
        {
            return Err(Error::InvalidParameter(format!(
                "radio parameters {self:?}"
            )));
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Thermal noise power `k T B F` in watts, with `F` converted from dB.
pub fn noise_power(params: &RadioParams) -> f64 {
    params.k_b * params.temperature * params.bandwidth * 10f64.powf(params.noise_figure_db / 10.0)
}

/// Received power in watts per (pixel, transmitter), pixel-major:
/// `p_rx[pixel * n_tx + tx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStack {
    width: usize,
    height: usize,
    n_tx: usize,
    p_rx: Vec<f64>,
}

impl PowerStack {
    pub fn new(width: usize, height: usize, n_tx: usize, p_rx: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if n_tx == 0 {
            return Err(Error::InvalidParameter(
                "need at least one transmitter".into(),
            ));
        }
        let expected = width * height * n_tx;
        if p_rx.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: p_rx.len(),
            });
        }
        if let Some(i) = p_rx.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "received power {} at slot {i} must be finite and >= 0",
                p_rx[i]
            )));
        }
        Ok(Self {
            width,
            height,
            n_tx,
            p_rx,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn powers(&self) -> &[f64] {
        &self.p_rx
    }

    /// Received powers at pixel `(x, y)`, one per transmitter.
    pub fn at(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.n_tx;
        &self.p_rx[i..i + self.n_tx]
    }
}

/// Unnormalized, unbounded per-pixel values (raw SINR).
#[derive(Debug, Clone, PartialEq)]
pub struct RawGrid {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl RawGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
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
        Ok(Self {
            width,
            height,
            values,
        })
    }
}

/// Strongest received power over noise plus the sum of all others. The
/// serving transmitter is the first one attaining the maximum.
pub fn sinr(ps: &PowerStack, sigma2: f64) -> Result<RawGrid> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise power {sigma2} must be > 0"
        )));
    }
    let values = ps
        .p_rx
        .par_chunks(ps.n_tx)
        .map(|powers| {
            let mut best = 0;
            for (i, &p) in powers.iter().enumerate() {
                if p > powers[best] {
                    best = i;
                }
            }
            let interference: f64 = powers
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != best)
                .map(|(_, &p)| p)
                .sum();
            powers[best] / (sigma2 + interference)
        })
        .collect();
    RawGrid::new(ps.width, ps.height, values)
}

/// `(max - v) / (max - min)`: the strongest pixel maps to 0 and the weakest
/// to 1.
pub fn normalize_sinr(raw: &RawGrid) -> Result<GridSignal> {
    let max = raw.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = raw.values.iter().copied().fold(f64::INFINITY, f64::min);
    let span = max - min;
    if !span.is_finite() || span <= 0.0 {
        return Err(Error::DegenerateNormalization);
    }
    let values = raw
        .values
        .iter()
        .map(|&v| ((max - v) / span).clamp(0.0, 1.0))
        .collect();
    GridSignal::new(raw.width, raw.height, values)
}

/// Axis-aligned building footprint covering pixels `x0..x1` by `y0..y1`.
/// Its walls lie on the pixel borders, half a pixel outside the centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Building {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Building {
    /// Number of walls crossed by the segment between two pixel centres.
    pub fn walls_crossed(&self, from: (f64, f64), to: (f64, f64)) -> u32 {
        let lo = [self.x0 as f64 - 0.5, self.y0 as f64 - 0.5];
        let hi = [self.x1 as f64 - 0.5, self.y1 as f64 - 0.5];
        let start = [from.0, from.1];
        let dir = [to.0 - from.0, to.1 - from.1];
        let (mut t_in, mut t_out) = (f64::NEG_INFINITY, f64::INFINITY);
        for axis in 0..2 {
            if dir[axis] == 0.0 {
                if start[axis] <= lo[axis] || start[axis] >= hi[axis] {
                    return 0;
                }
            } else {
                let a = (lo[axis] - start[axis]) / dir[axis];
                let b = (hi[axis] - start[axis]) / dir[axis];
                t_in = t_in.max(a.min(b));
                t_out = t_out.min(a.max(b));
            }
        }
        if t_in >= t_out || t_out <= 0.0 || t_in >= 1.0 {
            return 0;
        }
        u32::from(t_in > 0.0) + u32::from(t_out < 1.0)
    }
}

pub const PATH_LOSS_EXPONENT: f64 = 3.0;
pub const WALL_LOSS_DB: f64 = 8.0;

/// A generated scene: transmitter pixels, buildings and the power stack.
#[derive(Debug, Clone)]
pub struct UrbanScene {
    pub transmitters: Vec<(usize, usize)>,
    pub buildings: Vec<Building>,
    pub powers: PowerStack,
}

/// Deterministic synthetic city block. `params.n_tx` transmitters and
/// `n_buildings` rectangles are placed uniformly; received power follows a
/// distance power law (exponent 3, reference distance 1 px, distances
/// clamped to 1 px) with 8 dB lost per wall crossed.
pub fn synth_urban(
    seed: u64,
    width: usize,
    height: usize,
    params: &RadioParams,
    n_buildings: usize,
) -> Result<UrbanScene> {
    params.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let transmitters: Vec<(usize, usize)> = (0..params.n_tx)
        .map(|_| (rng.gen_range(0..width), rng.gen_range(0..height)))
        .collect();
    let max_w = (width / 8).max(1);
    let max_h = (height / 8).max(1);
    let buildings: Vec<Building> = (0..n_buildings)
        .map(|_| {
            let bw = rng.gen_range(1..=max_w);
            let bh = rng.gen_range(1..=max_h);
            let x0 = rng.gen_range(0..=width - bw);
            let y0 = rng.gen_range(0..=height - bh);
            Building {
                x0,
                y0,
                x1: x0 + bw,
                y1: y0 + bh,
            }
        })
        .collect();

    let p_tx = dbm_to_watts(params.tx_power_dbm);
    let n_tx = params.n_tx;
    let mut p_rx = vec![0.0; width * height * n_tx];
    p_rx.par_chunks_mut(n_tx)
        .enumerate()
        .for_each(|(pixel, out)| {
            let rx = ((pixel % width) as f64, (pixel / width) as f64);
            for (slot, &(tx, ty)) in out.iter_mut().zip(&transmitters) {
                let tx = (tx as f64, ty as f64);
                let d = ((rx.0 - tx.0).powi(2) + (rx.1 - tx.1).powi(2))
                    .sqrt()
                    .max(1.0);
                let walls: u32 = buildings.iter().map(|b| b.walls_crossed(tx, rx)).sum();
                *slot = p_tx
                    * d.powf(-PATH_LOSS_EXPONENT)
                    * 10f64.powf(-WALL_LOSS_DB * walls as f64 / 10.0);
            }
        });
    let powers = PowerStack::new(width, height, n_tx, p_rx)?;
    Ok(UrbanScene {
        transmitters,
        buildings,
        powers,
    })
}

/// Synthetic scene straight to a normalized SINR grid.
pub fn synth_normalized(
    seed: u64,
    width: usize,
    height: usize,
    params: &RadioParams,
    n_buildings: usize,
) -> Result<GridSignal> {
    let scene = synth_urban(seed, width, height, params, n_buildings)?;
    normalize_sinr(&sinr(&scene.powers, noise_power(params))?)
}

/// Reads CSV `x,y,gamma` (header required) covering every pixel of a
/// rectangle exactly once. Grid size is inferred from the largest indices.
pub fn read_raw_sinr(text: &str) -> Result<RawGrid> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if !saw_header {
            if line.replace(' ', "") != "x,y,gamma" {
                return Err(err(format!("expected header `x,y,gamma`, found `{line}`")));
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(err("expected three fields".into()));
        }
        let x: usize = f[0].parse().map_err(|_| err(format!("bad x `{}`", f[0])))?;
        let y: usize = f[1].parse().map_err(|_| err(format!("bad y `{}`", f[1])))?;
        let g: f64 = f[2]
            .parse()
            .map_err(|_| err(format!("bad gamma `{}`", f[2])))?;
        if !g.is_finite() {
            return Err(err("gamma must be finite".into()));
        }
        rows.push((x, y, g));
    }
    if rows.is_empty() {
        return Err(Error::EmptySampling);
    }
    let width = rows.iter().map(|r| r.0).max().unwrap_or(0) + 1;
    let height = rows.iter().map(|r| r.1).max().unwrap_or(0) + 1;
    let mut values = vec![f64::NAN; width * height];
    for &(x, y, g) in &rows {
        let slot = &mut values[y * width + x];
        if !slot.is_nan() {
            return Err(Error::DuplicateSample { x, y });
        }
        *slot = g;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::LengthMismatch {
            expected: width * height,
            actual: rows.len(),
        });
    }
    RawGrid::new(width, height, values)
}
