use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use geneo::baselines::{knn1_reconstruct, mse};
use geneo::grid::{read_grid, read_sampling, write_grid, write_pgm, write_sampling};
use geneo::harness::{self, ExperimentConfig, RunOptions};
use geneo::operator::reconstruct_sampling;
use geneo::patterns::{area_library, read_library, write_library, PatternLibrary};
use geneo::sampling::{observe, SamplingSpec};
use geneo::scenario::{normalize_sinr, read_raw_sinr, synth_normalized, RadioParams};
use geneo::tda::{
    read_diagrams, sublevel_persistence, wasserstein, wasserstein_with_cap, write_diagrams,
};
use geneo::{Error, GridSignal, Result, SparseSampling};

#[derive(Parser)]
#[command(
    name = "geneo",
    version,
    about = "Sparse signal-map reconstruction and evaluation"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic urban scene as a normalized SINR grid.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 10)]
        ntx: usize,
        #[arg(long, default_value_t = 40)]
        buildings: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalize an external raw SINR CSV (`x,y,gamma`) into a grid.
    Import {
        #[arg(long)]
        raw_sinr: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample and corrupt a ground-truth grid.
    Sample {
        #[arg(long = "in")]
        input: PathBuf,
        /// Known-pixel percentage.
        #[arg(long)]
        m: f64,
        /// Corrupted percentage of the known pixels.
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a rotation-augmented pattern library from training areas.
    ExtractPatterns {
        #[arg(long, value_delimiter = ',', required = true)]
        areas: Vec<PathBuf>,
        #[arg(long, default_value_t = 22)]
        radius: usize,
        #[arg(long, default_value_t = 15)]
        rotation_step: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a grid from observations and a pattern library.
    Reconstruct {
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        lib: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        dims: Dims,
        /// Write the winning pattern index map as `.pgm`, plus a CSV of
        /// per-pixel winners next to it.
        #[arg(long)]
        dump_best_index: Option<PathBuf>,
        /// Write the winning confidence map as `.pgm`.
        #[arg(long)]
        dump_confidence: Option<PathBuf>,
    },
    /// 1-nearest-neighbour reconstruction.
    Knn {
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        dims: Dims,
    },
    /// Mean squared error between two grids.
    Mse {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Sublevel persistence diagrams (H0, H1) of a grid as CSV.
    Persistence {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wasserstein distance between two diagram CSVs, per dimension.
    Wasserstein {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1)]
        p: u32,
        /// Death value substituted for essential classes.
        #[arg(long)]
        cap: Option<f64>,
    },
    /// Convert a grid to a 16-bit PGM image.
    ExportPgm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment config and write the report CSV.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dump_maps: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Dims {
    /// Grid width, when the observation file does not carry it.
    #[arg(long, requires = "height")]
    width: Option<usize>,
    #[arg(long, requires = "width")]
    height: Option<usize>,
}

impl Dims {
    fn get(&self) -> Option<(usize, usize)> {
        self.width.zip(self.height)
    }
}

fn load_grid(path: &Path) -> Result<GridSignal> {
    read_grid(&std::fs::read(path)?)
}

fn load_sampling(path: &Path, dims: Option<(usize, usize)>) -> Result<SparseSampling> {
    read_sampling(&std::fs::read_to_string(path)?, dims)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Synth {
            seed,
            size,
            ntx,
            buildings,
            out,
        } => {
            let params = RadioParams {
                n_tx: ntx,
                ..RadioParams::default()
            };
            let grid = synth_normalized(seed, size, size, &params, buildings)?;
            std::fs::write(out, write_grid(&grid))?;
        }
        Command::Import { raw_sinr, out } => {
            let raw = read_raw_sinr(&std::fs::read_to_string(raw_sinr)?)?;
            std::fs::write(out, write_grid(&normalize_sinr(&raw)?))?;
        }
        Command::Sample {
            input,
            m,
            q,
            seed,
            out,
        } => {
            let gt = load_grid(&input)?;
            let obs = observe(&gt, &SamplingSpec::new(m, q, seed)?)?;
            std::fs::write(out, write_sampling(&obs))?;
        }
        Command::ExtractPatterns {
            areas,
            radius,
            rotation_step,
            out,
        } => {
            let libs = areas
                .iter()
                .enumerate()
                .map(|(id, path)| area_library(&load_grid(path)?, radius, id as u32, rotation_step))
                .collect::<Result<Vec<_>>>()?;
            let lib = PatternLibrary::concat(libs)?;
            std::fs::write(out, write_library(&lib))?;
        }
        Command::Reconstruct {
            obs,
            lib,
            out,
            dims,
            dump_best_index,
            dump_confidence,
        } => {
            let obs = load_sampling(&obs, dims.get())?;
            let lib = read_library(&std::fs::read(lib)?)?;
            let rec = reconstruct_sampling(&obs, &lib)?;
            std::fs::write(out, write_grid(&rec.phi_rec))?;
            if let Some(path) = dump_best_index {
                std::fs::write(&path, write_pgm(&rec.index_map(lib.len())))?;
                let mut csv = String::from("pixel_x,pixel_y,pattern_index,anchor_x,anchor_y\n");
                let w = rec.phi_rec.width();
                for (i, (p, a)) in rec.best_pattern.iter().zip(&rec.best_anchor).enumerate() {
                    let _ = writeln!(csv, "{},{},{},{},{}", i % w, i / w, p, a.x, a.y);
                }
                std::fs::write(path.with_extension("csv"), csv)?;
            }
            if let Some(path) = dump_confidence {
                let clamped = GridSignal::from_fn(
                    rec.best_confidence.width(),
                    rec.best_confidence.height(),
                    |x, y| rec.best_confidence.get(x, y).clamp(0.0, 1.0),
                )?;
                std::fs::write(path, write_pgm(&clamped))?;
            }
        }
        Command::Knn { obs, out, dims } => {
            let obs = load_sampling(&obs, dims.get())?;
            std::fs::write(out, write_grid(&knn1_reconstruct(&obs)?))?;
        }
        Command::Mse { a, b } => {
            println!("{:e}", mse(&load_grid(&a)?, &load_grid(&b)?)?);
        }
        Command::Persistence { input, out } => {
            let (h0, h1) = sublevel_persistence(&load_grid(&input)?);
            std::fs::write(out, write_diagrams(&[&h0, &h1]))?;
        }
        Command::Wasserstein { a, b, p, cap } => {
            let da = read_diagrams(&std::fs::read_to_string(a)?)?;
            let db = read_diagrams(&std::fs::read_to_string(b)?)?;
            let mut total = 0.0;
            for (x, y) in da.iter().zip(&db) {
                let w = match cap {
                    Some(c) => wasserstein_with_cap(x, y, p, c)?,
                    None => wasserstein(x, y, p)?,
                };
                println!("H{}: {w:e}", x.dimension());
                total += w;
            }
            println!("total: {total:e}");
        }
        Command::ExportPgm { input, out } => {
            std::fs::write(out, write_pgm(&load_grid(&input)?))?;
        }
        Command::Evaluate {
            config,
            out,
            dump_maps,
        } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let report = harness::run(&cfg, &RunOptions { dump_maps })?;
            std::fs::write(out, report.to_csv())?;
            for f in &report.failures {
                eprintln!("fold {} failed: {}", f.fold, f.error);
            }
            return Ok(report.succeeded());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Io(_) | Error::Json(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
