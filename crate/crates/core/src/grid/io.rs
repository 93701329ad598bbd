//! `.grd`, `.smp` and `.pgm` encodings.

use std::fmt::Write as _;

use super::{in_unit_interval, GridSignal, PixelCoord, Sample, SparseSampling};
use crate::error::{Error, Result};

pub const GRID_MAGIC: &[u8; 4] = b"GRD1";
const GRID_HEADER_LEN: usize = 12;

/// Encodes a grid as `GRD1`, width and height (u32 LE), then binary32 LE
/// values in row-major order. Values are rounded to the nearest `f32`.
pub fn write_grid(grid: &GridSignal) -> Vec<u8> {
    let mut out = Vec::with_capacity(GRID_HEADER_LEN + 4 * grid.len());
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&(grid.width() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.height() as u32).to_le_bytes());
    for &v in grid.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn read_grid(bytes: &[u8]) -> Result<GridSignal> {
    if bytes.len() < 4 || &bytes[..4] != GRID_MAGIC {
        return Err(Error::BadMagic { expected: "GRD1" });
    }
    if bytes.len() < GRID_HEADER_LEN {
        return Err(Error::SizeMismatch {
            expected: GRID_HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let payload = &bytes[GRID_HEADER_LEN..];
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or(Error::InvalidDimensions { width, height })?;
    if payload.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: payload.len(),
        });
    }
    let mut values = Vec::with_capacity(width * height);
    for (index, chunk) in payload.chunks_exact(4).enumerate() {
        let value = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
        if !in_unit_interval(value) {
            return Err(Error::ValueOutOfRange { index, value });
        }
        values.push(value);
    }
    GridSignal::new(width, height, values)
}

/// Encodes a sampling as CSV with header `x,y,value`, preceded by a
/// `# width=W height=H` comment line carrying the grid size.
pub fn write_sampling(sampling: &SparseSampling) -> String {
    let mut out = String::with_capacity(32 * (sampling.len() + 2));
    let _ = writeln!(
        out,
        "# width={} height={}",
        sampling.width(),
        sampling.height()
    );
    out.push_str("x,y,value\n");
    for s in sampling.samples() {
        // 17 significant digits: exact f64 round trip.
        let _ = writeln!(out, "{},{},{:.16e}", s.coord.x, s.coord.y, s.value);
    }
    out
}

/// Parses a `.smp` file. `dims` overrides (or supplies, when the comment
/// line is absent) the grid size.
pub fn read_sampling(text: &str, dims: Option<(usize, usize)>) -> Result<SparseSampling> {
    let mut header_dims = None;
    let mut saw_header = false;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(d) = parse_dims_comment(comment) {
                header_dims = Some(d);
            }
            continue;
        }
        if !saw_header {
            if line != "x,y,value" {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected header `x,y,value`, found `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let (Some(x), Some(y), Some(v), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::Parse {
                line: line_no,
                msg: "expected three fields".into(),
            });
        };
        let parse_err = |what: &str| Error::Parse {
            line: line_no,
            msg: format!("bad {what}"),
        };
        let x: usize = x.trim().parse().map_err(|_| parse_err("x"))?;
        let y: usize = y.trim().parse().map_err(|_| parse_err("y"))?;
        let value: f64 = v.trim().parse().map_err(|_| parse_err("value"))?;
        samples.push(Sample {
            coord: PixelCoord::new(x, y),
            value,
        });
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 0,
            msg: "missing `x,y,value` header".into(),
        });
    }
    let (width, height) = dims.or(header_dims).ok_or_else(|| Error::Parse {
        line: 0,
        msg: "grid size unknown: no `# width=.. height=..` line and none supplied".into(),
    })?;
    SparseSampling::new(width, height, samples)
}

fn parse_dims_comment(comment: &str) -> Option<(usize, usize)> {
    let mut width = None;
    let mut height = None;
    for token in comment.split_whitespace() {
        if let Some(v) = token.strip_prefix("width=") {
            width = v.parse().ok();
        } else if let Some(v) = token.strip_prefix("height=") {
            height = v.parse().ok();
        }
    }
    Some((width?, height?))
}

/// 16-bit binary PGM (P5). Samples are big-endian as the format requires.
pub fn write_pgm(grid: &GridSignal) -> Vec<u8> {
    let header = format!("P5\n{} {}\n65535\n", grid.width(), grid.height());
    let mut out = Vec::with_capacity(header.len() + 2 * grid.len());
    out.extend_from_slice(header.as_bytes());
    for &v in grid.values() {
        let level = (v * 65535.0).round() as u16;
        out.extend_from_slice(&level.to_be_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_pixel_grid_layout() {
        let g = GridSignal::new(1, 1, vec![0.5]).unwrap();
        let bytes = write_grid(&g);
        assert_eq!(bytes.len(), 16);
        // magic(4) + dims(8) + one f32(4)
        assert_eq!(&bytes[..4], b"GRD1");
        assert_eq!(read_grid(&bytes).unwrap(), g);
    }

    #[test]
    fn zero_grid_round_trips() {
        let g = GridSignal::filled(270, 270, 0.0).unwrap();
        assert_eq!(read_grid(&write_grid(&g)).unwrap(), g);
    }

    #[test]
    fn read_errors_are_distinct() {
        let g = GridSignal::new(2, 1, vec![0.25, 0.75]).unwrap();
        let mut bytes = write_grid(&g);

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(read_grid(&bad_magic), Err(Error::BadMagic { .. })));

        let truncated = &bytes[..bytes.len() - 1];
        assert!(matches!(
            read_grid(truncated),
            Err(Error::SizeMismatch { .. })
        ));

        let n = bytes.len();
        bytes[n - 4..].copy_from_slice(&1.5f32.to_le_bytes());
        assert!(matches!(
            read_grid(&bytes),
            Err(Error::ValueOutOfRange { index: 1, .. })
        ));
    }

    #[test]
    fn sampling_text_round_trip() {
        let s = SparseSampling::new(
            5,
            3,
            vec![
                Sample {
                    coord: PixelCoord::new(4, 2),
                    value: 0.1 + 0.2,
                },
                Sample {
                    coord: PixelCoord::new(0, 0),
                    value: 1.0 / 3.0,
                },
            ],
        )
        .unwrap();
        let text = write_sampling(&s);
        assert!(text.lines().nth(1) == Some("x,y,value"));
        assert_eq!(read_sampling(&text, None).unwrap(), s);
    }

    #[test]
    fn sampling_without_dims_needs_override() {
        let text = "x,y,value\n1,1,0.5\n";
        assert!(read_sampling(text, None).is_err());
        let s = read_sampling(text, Some((3, 3))).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn pgm_scales_to_16_bit() {
        let g = GridSignal::new(2, 1, vec![0.0, 1.0]).unwrap();
        let bytes = write_pgm(&g);
        let header = b"P5\n2 1\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 0, 0xff, 0xff]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn grid_round_trip(values in proptest::collection::vec(0.0f32..=1.0, 32 * 32)) {
            let g = GridSignal::new(32, 32, values.iter().map(|&v| v as f64).collect()).unwrap();
            let bytes = write_grid(&g);
            prop_assert_eq!(read_grid(&bytes).unwrap(), g);
            prop_assert_eq!(write_grid(&read_grid(&bytes).unwrap()), bytes);
        }
    }
}
