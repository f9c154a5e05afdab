mod ops;
mod oracle;
mod out;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use out::{Artifact, Sink};
use scenario::Scenario;

const THREADS_VAR: &str = "CWLAB_THREADS";

#[derive(Parser)]
#[command(name = "cwlab", version, about = "Decompositions, atlases and cw-expansive maps on grids")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run a scenario file and write its artifacts and manifest.
    Run {
        scenario: PathBuf,
        /// Output directory (overrides the scenario's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a cell-set container or PGM raster to PNG with a legend.
    Render {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario file without running it.
    Validate { scenario: PathBuf },
    /// Compare the fast kernels against brute-force oracles on random inputs.
    Oracle {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        resolution: u32,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
    },
}

enum Failure {
    Invalid(Vec<scenario::Invalid>),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn threads() -> Result<usize, Failure> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::Invalid(vec![scenario::Invalid { field: THREADS_VAR.into(), message: format!("expected a positive integer, got {v:?}") }])),
        },
    }
}

fn load(path: &Path) -> Result<(Scenario, Vec<u8>), Failure> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::Invalid(vec![scenario::Invalid { field: "scenario".into(), message: "not UTF-8".into() }]))?;
    let s = scenario::parse(&text).map_err(Failure::Invalid)?;
    Ok((s, bytes))
}

#[derive(Serialize)]
struct Entry {
    index: usize,
    op: &'static str,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    artifacts: Vec<Artifact>,
}

#[derive(Serialize)]
struct Manifest {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    scenario: String,
    scenario_sha256: String,
    threads: usize,
    seed: Option<u64>,
    source_error: Option<String>,
    analyses: Vec<Entry>,
}

fn run(path: &Path, out: Option<PathBuf>) -> Result<bool, Failure> {
    let threads = threads()?;
    let (s, bytes) = load(path)?;
    let dir = out.or(s.output.clone()).unwrap_or_else(|| PathBuf::from("runs").join(&s.name));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().context("thread pool")?;
    let (source_error, entries) = pool.install(|| {
        let built = ops::build(&s.source);
        let entries: Vec<Entry> = s
            .analyses
            .par_iter()
            .enumerate()
            .map(|(i, a)| {
                let mut sink = Sink::new(&dir, format!("{i:02}-{}", a.op()));
                let result = match &built {
                    Ok(b) => ops::run(a, &s.source, b, s.seed, &mut sink),
                    Err(e) => Err(anyhow::anyhow!("source: {e:#}")),
                };
                Entry {
                    index: i,
                    op: a.op(),
                    status: if result.is_ok() { "ok" } else { "failed" },
                    error: result.err().map(|e| format!("{e:#}")),
                    artifacts: sink.artifacts,
                }
            })
            .collect();
        (built.err().map(|e| format!("{e:#}")), entries)
    });
    for e in &entries {
        match &e.error {
            None => println!("[{:02}] {} ok ({} files)", e.index, e.op, e.artifacts.len()),
            Some(msg) => println!("[{:02}] {} failed: {msg}", e.index, e.op),
        }
    }
    let ok = entries.iter().all(|e| e.error.is_none());
    let manifest = Manifest {
        schema: scenario::SCHEMA,
        tool: "cwlab",
        version: env!("CARGO_PKG_VERSION"),
        scenario: s.name.clone(),
        scenario_sha256: out::sha256(&bytes),
        threads,
        seed: s.seed,
        source_error,
        analyses: entries,
    };
    let mut m = serde_json::to_vec_pretty(&manifest).map_err(anyhow::Error::from)?;
    m.push(b'\n');
    out::write_atomic(&dir.join("manifest.json"), &m)?;
    println!("wrote {}", dir.join("manifest.json").display());
    Ok(ok)
}

fn render(input: &Path, out: Option<PathBuf>) -> Result<()> {
    let data = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let png_path = out.unwrap_or_else(|| input.with_extension("png"));
    let (png, legend) = if data.starts_with(b"CWLS") {
        let set = cwlab::raster::read_cellset(&data[..])?;
        let space = set.space();
        let m = set.mask();
        let labels: Vec<u32> = (0..space.height())
            .rev()
            .flat_map(|r| (0..space.width()).map(move |c| space.index(c, r)))
            .map(|i| if m[i] { 0 } else { cwlab::raster::NO_LABEL })
            .collect();
        out::label_png(space.width(), space.height(), &labels)?
    } else if data.starts_with(b"P5") {
        let (w, h, maxval, vals) = cwlab::raster::read_pgm(&data)?;
        // 8-bit rasters are masks, 16-bit ones hold label + 1
        let label = |v: u32| match v {
            0 => cwlab::raster::NO_LABEL,
            _ if maxval < 256 => 0,
            _ => v - 1,
        };
        let labels: Vec<u32> = (0..h).rev().flat_map(|r| vals[r * w..(r + 1) * w].iter().map(|&v| label(v))).collect();
        out::label_png(w, h, &labels)?
    } else {
        bail!("{}: neither a cell-set container nor a binary PGM", input.display());
    };
    out::write_atomic(&png_path, &png)?;
    let mut lj = serde_json::to_vec_pretty(&legend)?;
    lj.push(b'\n');
    let legend_path = png_path.with_extension("legend.json");
    out::write_atomic(&legend_path, &lj)?;
    println!("wrote {} and {}", png_path.display(), legend_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<bool, Failure> = match cli.verb {
        Verb::Run { scenario, out } => run(&scenario, out),
        Verb::Validate { scenario } => load(&scenario).map(|(s, _)| {
            println!("{}: ok ({} analyses)", s.name, s.analyses.len());
            true
        }),
        Verb::Render { input, out } => render(&input, out).map(|_| true).map_err(Failure::Other),
        Verb::Oracle { seed, resolution, pairs } => oracle::run_all(seed, resolution, pairs).map_err(Failure::Other),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Invalid(problems)) => {
            for p in problems {
                eprintln!("invalid scenario: {p}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
