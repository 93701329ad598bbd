//! Pattern library construction: disk tiling of training areas, template
//! extraction, rotational augmentation and the `.plb` file format.

use crate::error::{Error, Result};
use crate::grid::{GridSignal, PixelCoord};

/// Angular step of the rotational augmentation, in degrees.
pub const ROTATION_STEP: u32 = 15;

/// Column and row spacing of the tiling lattice, as multiples of the radius.
/// With r = 22 on a 270 x 270 area this gives 7 rows alternating 10 and 9
/// centres (67 in total).
const TILE_SPACING_X: f64 = 1.25;
const TILE_SPACING_Y: f64 = 2.0;

/// Closed lattice disk `dx^2 + dy^2 <= r^2` inside its `(2r+1)^2` box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiskMask {
    radius: usize,
    bits: Vec<bool>,
    /// Half-width of the disk on each row, indexed by `dy + r`.
    half_widths: Vec<usize>,
    count: usize,
}

impl DiskMask {
    pub fn new(radius: usize) -> Self {
        let side = 2 * radius + 1;
        let r = radius as isize;
        let r2 = r * r;
        let mut bits = vec![false; side * side];
        let mut half_widths = Vec::with_capacity(side);
        for dy in -r..=r {
            let mut hw = 0;
            for dx in -r..=r {
                if dx * dx + dy * dy <= r2 {
                    bits[((dy + r) as usize) * side + (dx + r) as usize] = true;
                    hw = hw.max(dx.unsigned_abs());
                }
            }
            half_widths.push(hw);
        }
        let count = bits.iter().filter(|&&b| b).count();
        Self {
            radius,
            bits,
            half_widths,
            count,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Number of lattice points in the disk, |D|.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Half-width of row `dy` (in `-r..=r`).
    #[inline]
    pub fn half_width(&self, dy: isize) -> usize {
        self.half_widths[(dy + self.radius as isize) as usize]
    }

    #[inline]
    pub fn contains(&self, dx: isize, dy: isize) -> bool {
        let r = self.radius as isize;
        dx * dx + dy * dy <= r * r
    }

    /// Box index of offset `(dx, dy)`.
    #[inline]
    pub fn box_index(&self, dx: isize, dy: isize) -> usize {
        let r = self.radius as isize;
        ((dy + r) as usize) * self.side() + (dx + r) as usize
    }
}

/// Where a pattern came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternMeta {
    pub area_id: u32,
    pub center: PixelCoord,
    pub rotation_degrees: u16,
}

/// A disk-supported template `h`. Values live in a `(2r+1)^2` row-major box;
/// entries off the disk are stored as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    radius: usize,
    values: Vec<f64>,
    pub meta: PatternMeta,
}

impl Pattern {
    pub fn new(radius: usize, values: Vec<f64>, meta: PatternMeta) -> Result<Self> {
        let side = 2 * radius + 1;
        if values.len() != side * side {
            return Err(Error::LengthMismatch {
                expected: side * side,
                actual: values.len(),
            });
        }
        let r = radius as isize;
        let mut values = values;
        for dy in -r..=r {
            for dx in -r..=r {
                let i = ((dy + r) as usize) * side + (dx + r) as usize;
                if dx * dx + dy * dy > r * r {
                    values[i] = 0.0;
                } else if !(0.0..=1.0).contains(&values[i]) {
                    return Err(Error::ValueOutOfRange {
                        index: i,
                        value: values[i],
                    });
                }
            }
        }
        if !meta.rotation_degrees.is_multiple_of(ROTATION_STEP as u16) || meta.rotation_degrees >= 360 {
            return Err(Error::InvalidRotation(meta.rotation_degrees as u32));
        }
        Ok(Self {
            radius,
            values,
            meta,
        })
    }

    /// A pattern that is `value` everywhere on its disk.
    pub fn constant(radius: usize, value: f64, meta: PatternMeta) -> Result<Self> {
        let side = 2 * radius + 1;
        Self::new(radius, vec![value; side * side], meta)
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `h(dx, dy)`; 0 off the disk.
    #[inline]
    pub fn value(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        let side = 2 * self.radius + 1;
        self.values[((dy + r) as usize) * side + (dx + r) as usize]
    }
}

/// An ordered set of patterns sharing one disk mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternLibrary {
    mask: DiskMask,
    patterns: Vec<Pattern>,
}

impl PatternLibrary {
    pub fn new(radius: usize, patterns: Vec<Pattern>) -> Result<Self> {
        if let Some(p) = patterns.iter().find(|p| p.radius != radius) {
            return Err(Error::InvalidParameter(format!(
                "pattern radius {} differs from library radius {radius}",
                p.radius
            )));
        }
        Ok(Self {
            mask: DiskMask::new(radius),
            patterns,
        })
    }

    /// Concatenates libraries in order. All must share a radius.
    pub fn concat(libs: impl IntoIterator<Item = PatternLibrary>) -> Result<Self> {
        let mut iter = libs.into_iter();
        let mut first = iter.next().ok_or(Error::EmptyLibrary)?;
        for lib in iter {
            if lib.radius() != first.radius() {
                return Err(Error::InvalidParameter(format!(
                    "cannot concatenate radius {} with radius {}",
                    first.radius(),
                    lib.radius()
                )));
            }
            first.patterns.extend(lib.patterns);
        }
        Ok(first)
    }

    pub fn radius(&self) -> usize {
        self.mask.radius
    }

    pub fn mask(&self) -> &DiskMask {
        &self.mask
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Hex-like lattice of disk centres covering a `width x height` area.
///
/// Centres are confined to `[r, width-1-r] x [r, height-1-r]` so every disk's
/// bounding box lies inside the area. Row and column counts come from the
/// nominal spacing; positions are then spread evenly over that range and
/// odd rows sit at the midpoints of the even-row columns.
pub fn tile_circles(width: usize, height: usize, radius: usize) -> Result<Vec<PixelCoord>> {
    let side = 2 * radius + 1;
    if width < side || height < side {
        return Err(Error::AreaTooSmall {
            width,
            height,
            radius,
        });
    }
    let lo = radius as f64;
    let span_x = (width - side) as f64;
    let span_y = (height - side) as f64;
    let step_count = |span: f64, spacing: f64| -> usize {
        if span == 0.0 {
            1
        } else {
            (span / spacing.max(1.0)).ceil() as usize + 1
        }
    };
    let n_cols = step_count(span_x, TILE_SPACING_X * radius as f64);
    let n_rows = step_count(span_y, TILE_SPACING_Y * radius as f64);
    let step = |span: f64, n: usize| if n > 1 { span / (n - 1) as f64 } else { 0.0 };
    let step_x = step(span_x, n_cols);
    let step_y = step(span_y, n_rows);

    let mut centers = Vec::new();
    for k in 0..n_rows {
        let y = (lo + k as f64 * step_y).round() as usize;
        if k % 2 == 1 && n_cols > 1 {
            for j in 0..n_cols - 1 {
                let x = (lo + (j as f64 + 0.5) * step_x).round() as usize;
                centers.push(PixelCoord::new(x, y));
            }
        } else {
            for j in 0..n_cols {
                let x = (lo + j as f64 * step_x).round() as usize;
                centers.push(PixelCoord::new(x, y));
            }
        }
    }
    Ok(centers)
}

/// Copies the ground truth under each disk into an unrotated pattern.
pub fn extract_patterns(
    gt: &GridSignal,
    centers: &[PixelCoord],
    radius: usize,
    area_id: u32,
) -> Result<PatternLibrary> {
    let r = radius as isize;
    let side = 2 * radius + 1;
    let mask = DiskMask::new(radius);
    let mut patterns = Vec::with_capacity(centers.len());
    for &c in centers {
        if c.x < radius || c.y < radius || c.x + radius >= gt.width() || c.y + radius >= gt.height()
        {
            return Err(Error::CoordOutOfBounds {
                x: c.x,
                y: c.y,
                width: gt.width(),
                height: gt.height(),
            });
        }
        let mut values = vec![0.0; side * side];
        for dy in -r..=r {
            for dx in -r..=r {
                if mask.contains(dx, dy) {
                    let x = (c.x as isize + dx) as usize;
                    let y = (c.y as isize + dy) as usize;
                    values[mask.box_index(dx, dy)] = gt.get(x, y);
                }
            }
        }
        patterns.push(Pattern {
            radius,
            values,
            meta: PatternMeta {
                area_id,
                center: c,
                rotation_degrees: 0,
            },
        });
    }
    PatternLibrary::new(radius, patterns)
}

fn exact_cos_sin(degrees: u32) -> (f64, f64) {
    match degrees % 360 {
        0 => (1.0, 0.0),
        90 => (0.0, 1.0),
        180 => (-1.0, 0.0),
        270 => (0.0, -1.0),
        d => {
            let t = (d as f64).to_radians();
            (t.cos(), t.sin())
        }
    }
}

/// Rotates a pattern by `theta` degrees: `h'(u) = h(R_{-theta} u)`, sampled
/// bilinearly from the on-disk neighbours (weights renormalised over them)
/// and clamped to `[0, 1]`. Quarter turns are exact index permutations.
pub fn rotate_pattern(p: &Pattern, theta: u32) -> Result<Pattern> {
    if !theta.is_multiple_of(ROTATION_STEP) || theta >= 360 {
        return Err(Error::InvalidRotation(theta));
    }
    let rotation = (p.meta.rotation_degrees as u32 + theta) % 360;
    if theta == 0 {
        return Ok(Pattern {
            meta: PatternMeta {
                rotation_degrees: rotation as u16,
                ..p.meta
            },
            ..p.clone()
        });
    }
    let r = p.radius as isize;
    let side = 2 * p.radius + 1;
    let r2 = r * r;
    let (cos, sin) = exact_cos_sin(theta);
    let on_disk = |x: isize, y: isize| x * x + y * y <= r2;
    let mut values = vec![0.0; side * side];
    for dy in -r..=r {
        for dx in -r..=r {
            if !on_disk(dx, dy) {
                continue;
            }
            let (u, v) = (dx as f64, dy as f64);
            let sx = cos * u + sin * v;
            let sy = -sin * u + cos * v;
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let (x0, y0) = (x0 as isize, y0 as isize);
            let taps = [
                (x0, y0, (1.0 - fx) * (1.0 - fy)),
                (x0 + 1, y0, fx * (1.0 - fy)),
                (x0, y0 + 1, (1.0 - fx) * fy),
                (x0 + 1, y0 + 1, fx * fy),
            ];
            let mut acc = 0.0;
            let mut weight = 0.0;
            for (x, y, w) in taps {
                if w > 0.0 && on_disk(x, y) {
                    acc += w * p.value(x, y);
                    weight += w;
                }
            }
            let value = if weight > 0.0 { acc / weight } else { 0.0 };
            values[((dy + r) as usize) * side + (dx + r) as usize] = value.clamp(0.0, 1.0);
        }
    }
    Ok(Pattern {
        radius: p.radius,
        values,
        meta: PatternMeta {
            rotation_degrees: rotation as u16,
            ..p.meta
        },
    })
}

/// Expands every pattern into its rotations by multiples of `step` degrees
/// (0 included), keeping each base pattern's variants contiguous.
pub fn augment_rotations_with_step(lib: &PatternLibrary, step: u32) -> Result<PatternLibrary> {
    if step == 0 || !step.is_multiple_of(ROTATION_STEP) || !360u32.is_multiple_of(step) {
        return Err(Error::InvalidRotation(step));
    }
    if let Some(p) = lib.patterns.iter().find(|p| p.meta.rotation_degrees != 0) {
        return Err(Error::InvalidParameter(format!(
            "pattern already rotated by {} degrees",
            p.meta.rotation_degrees
        )));
    }
    let variants = 360 / step;
    let mut patterns = Vec::with_capacity(lib.len() * variants as usize);
    for p in &lib.patterns {
        for k in 0..variants {
            patterns.push(rotate_pattern(p, k * step)?);
        }
    }
    Ok(PatternLibrary {
        mask: lib.mask.clone(),
        patterns,
    })
}

/// The 24-fold augmentation in 15 degree steps.
pub fn augment_rotations(lib: &PatternLibrary) -> Result<PatternLibrary> {
    augment_rotations_with_step(lib, ROTATION_STEP)
}

/// Tiles an area, extracts its patterns and augments them.
pub fn area_library(
    gt: &GridSignal,
    radius: usize,
    area_id: u32,
    rotation_step: u32,
) -> Result<PatternLibrary> {
    let centers = tile_circles(gt.width(), gt.height(), radius)?;
    let base = extract_patterns(gt, &centers, radius, area_id)?;
    augment_rotations_with_step(&base, rotation_step)
}

pub const LIBRARY_MAGIC: &[u8; 4] = b"PLB1";

/// `.plb`: `PLB1`, u32 radius, u32 count, then per pattern u32 area id,
/// u32 centre x, u32 centre y, u16 rotation, `(2r+1)^2` binary32 values.
/// All little-endian.
pub fn write_library(lib: &PatternLibrary) -> Vec<u8> {
    let side = lib.mask.side();
    let mut out = Vec::with_capacity(12 + lib.len() * (14 + 4 * side * side));
    out.extend_from_slice(LIBRARY_MAGIC);
    out.extend_from_slice(&(lib.radius() as u32).to_le_bytes());
    out.extend_from_slice(&(lib.len() as u32).to_le_bytes());
    for p in &lib.patterns {
        out.extend_from_slice(&p.meta.area_id.to_le_bytes());
        out.extend_from_slice(&(p.meta.center.x as u32).to_le_bytes());
        out.extend_from_slice(&(p.meta.center.y as u32).to_le_bytes());
        out.extend_from_slice(&p.meta.rotation_degrees.to_le_bytes());
        for &v in &p.values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn read_library(bytes: &[u8]) -> Result<PatternLibrary> {
    if bytes.len() < 4 || &bytes[..4] != LIBRARY_MAGIC {
        return Err(Error::BadMagic { expected: "PLB1" });
    }
    if bytes.len() < 12 {
        return Err(Error::SizeMismatch {
            expected: 12,
            actual: bytes.len(),
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let radius = u32_at(4) as usize;
    let count = u32_at(8) as usize;
    let side = 2 * radius + 1;
    let record = 14 + 4 * side * side;
    let expected = 12 + count * record;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: bytes.len(),
        });
    }
    let mut patterns = Vec::with_capacity(count);
    for k in 0..count {
        let o = 12 + k * record;
        let meta = PatternMeta {
            area_id: u32_at(o),
            center: PixelCoord::new(u32_at(o + 4) as usize, u32_at(o + 8) as usize),
            rotation_degrees: u16::from_le_bytes(bytes[o + 12..o + 14].try_into().unwrap()),
        };
        let values = bytes[o + 14..o + record]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        patterns.push(Pattern::new(radius, values, meta)?);
    }
    PatternLibrary::new(radius, patterns)
}
