//! `owf`: octonion phase retrieval experiments from the command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use owf_core::baseline::{GdConfig, DEFAULT_GD_STEP_SCALE};
use owf_core::harness::sweep::{write_cells_csv, write_probe_csv, write_trace_csv, write_trials_csv};
use owf_core::harness::{
    algebra_check, ambiguity_probe, convergence_trace, run_image_experiment, success_sweep, ExperimentConfig,
    ImageMethod,
};
use owf_core::imaging::{self, write_signatures};
use owf_core::solver::{InitScale, OwfConfig, StepRule, DEFAULT_MAX_ITERS, DEFAULT_STEP_SCALE};
use owf_core::Exec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod ratios;

#[derive(Parser, Debug)]
#[command(name = "owf", version, about = "Octonion phase retrieval experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the octonion identities on random pairs and the unit table.
    AlgebraCheck {
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Noiseless success rate over a range of sampling ratios.
    Sweep {
        #[command(flatten)]
        exp: Experiment,
        /// Ratios m/n: `2..25`, `2..25:0.5` or `4,8,20`.
        #[arg(long, default_value = "2..25", value_parser = ratios::parse)]
        ratios: ratios::Ratios,
        /// Measurement SNRs in dB; `inf` for noiseless.
        #[arg(long, value_delimiter = ',', default_value = "inf", value_parser = parse_snr)]
        snr: Vec<f64>,
    },
    /// Per-iteration distance and objective of one seeded solve.
    Converge {
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 20.0)]
        ratio: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        common: Common,
        /// Trace CSV (`iter,distance,objective`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance distribution under measurement noise.
    NoisySweep {
        #[command(flatten)]
        exp: Experiment,
        #[arg(long, default_value = "20", value_parser = ratios::parse)]
        ratios: ratios::Ratios,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30", value_parser = parse_snr)]
        snr: Vec<f64>,
    },
    /// Recover an OCT8 image from intensity measurements.
    Image {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        ratio: f64,
        #[arg(long, value_enum, default_value_t = Method::Owf)]
        method: Method,
        /// Step scale of the real-valued baseline.
        #[arg(long, default_value_t = DEFAULT_GD_STEP_SCALE)]
        gd_step_scale: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        common: Common,
        /// Recovered image (OCT8).
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report with `psnr_db`.
        #[arg(long)]
        report: Option<PathBuf>,
        /// CSV of reference and recovered spectral signatures at two pixels.
        #[arg(long)]
        signatures: Option<PathBuf>,
    },
    /// Write a seeded synthetic 8-band image.
    MakeFixture {
        #[arg(long, default_value_t = 16)]
        width: usize,
        #[arg(long, default_value_t = 16)]
        height: usize,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Intensity change under right multiplication of the signal by a unit octonion.
    Probe {
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 20.0)]
        ratio: f64,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = Rule::MeanNormalized)]
    step_rule: Rule,
    /// Defaults to the calibrated value of the chosen rule.
    #[arg(long)]
    step_scale: Option<f64>,
    #[arg(long, value_enum, default_value_t = Scale::Mean)]
    init_scale: Scale,
}

#[derive(Args, Debug)]
struct Experiment {
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = owf_core::harness::sweep::DEFAULT_SUCCESS_TOL)]
    success_tol: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: Common,
    /// Per-trial CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell aggregate CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Record wall-clock milliseconds instead of 0 in the per-trial CSV.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rule {
    /// `alpha = mu m / sum(y)` on the unaveraged gradient.
    Literal,
    /// `alpha = mu / mean(y)` on the gradient averaged over measurements.
    MeanNormalized,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scale {
    Mean,
    Rms,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Owf,
    Gd,
}

fn parse_snr(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("invalid SNR {t:?} (dB value or inf)")),
    }
}

impl SolverArgs {
    fn config(&self) -> OwfConfig {
        let (step_rule, default_scale) = match self.step_rule {
            Rule::Literal => (StepRule::Literal, 5.0),
            Rule::MeanNormalized => (StepRule::MeanNormalized, DEFAULT_STEP_SCALE),
        };
        OwfConfig {
            max_iters: self.iters,
            step_rule,
            step_scale: self.step_scale.unwrap_or(default_scale),
            init_scale: match self.init_scale {
                Scale::Mean => InitScale::Mean,
                Scale::Rms => InitScale::RootMeanSquare,
            },
            ..OwfConfig::default()
        }
    }
}

impl Common {
    fn install<T: Send>(&self, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
        #[cfg(feature = "parallel")]
        if let Some(jobs) = self.jobs {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .context("building worker pool")?;
            return pool.install(f);
        }
        f()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn fmt_snr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn run_sweep(exp: &Experiment, ratios: Vec<f64>, snr: Vec<f64>, noisy: bool) -> Result<()> {
    let cfg = ExperimentConfig {
        n: exp.n,
        ratios,
        trials: exp.trials,
        seed: exp.common.seed,
        snr_db: snr,
        solver: exp.solver.config(),
        success_tol: exp.success_tol,
        ..ExperimentConfig::default()
    };
    let result = exp.common.install(|| Ok(success_sweep(&cfg)?))?;
    if let Some(path) = &exp.out {
        let mut w = create(path)?;
        write_trials_csv(&mut w, &result, exp.timing)?;
        w.flush()?;
    }
    if let Some(path) = &exp.summary {
        let mut w = create(path)?;
        write_cells_csv(&mut w, &result)?;
        w.flush()?;
    }
    let cells: Vec<String> = result
        .cells
        .iter()
        .map(|c| {
            if noisy {
                format!("{}dB:{:.3e}", fmt_snr(c.snr_db), c.median_distance)
            } else {
                format!("{}:{:.2}", c.ratio, c.success_rate)
            }
        })
        .collect();
    let label = if noisy { "median distance" } else { "success rate" };
    println!(
        "{} trials per cell, n={}, {label} {}",
        exp.trials,
        exp.n,
        cells.join(" ")
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::AlgebraCheck { pairs, common } => {
            let c = common.install(|| Ok(algebra_check(pairs, common.seed, Exec::Parallel)))?;
            println!(
                "{} pairs, worst relative deviation {:.2e}, {} non-associative unit triples, table {}",
                c.pairs,
                c.worst(),
                c.non_associative_triples,
                if c.table_matches_gimel {
                    "consistent"
                } else {
                    "INCONSISTENT"
                }
            );
            if !c.passes(1e-12) {
                bail!("algebra identities violated: {c:?}");
            }
        }
        Command::Sweep { exp, ratios, snr } => run_sweep(&exp, ratios.0, snr, false)?,
        Command::NoisySweep { exp, ratios, snr } => run_sweep(&exp, ratios.0, snr, true)?,
        Command::Converge {
            n,
            ratio,
            solver,
            common,
            out,
        } => {
            let cfg = solver.config();
            let trace = common.install(|| Ok(convergence_trace(n, ratio, common.seed, &cfg)?))?;
            if let Some(path) = &out {
                let mut w = create(path)?;
                write_trace_csv(&mut w, &trace)?;
                w.flush()?;
            }
            let last = trace.distance.last().copied().unwrap_or(f64::NAN);
            println!(
                "n={} m={} iterations={} initial distance {:.3e} final distance {:.3e}",
                trace.n,
                trace.m,
                trace.distance.len() - 1,
                trace.distance[0],
                last
            );
        }
        Command::Image {
            input,
            ratio,
            method,
            gd_step_scale,
            solver,
            common,
            out,
            report,
            signatures,
        } => {
            let img = imaging::load(&input).with_context(|| format!("reading {}", input.display()))?;
            let owf = solver.config();
            let gd = GdConfig {
                iters: solver.iters,
                step_scale: gd_step_scale,
                ..GdConfig::default()
            };
            let method = match method {
                Method::Owf => ImageMethod::Owf,
                Method::Gd => ImageMethod::Gd,
            };
            let (rec, rep) =
                common.install(|| Ok(run_image_experiment(&img, ratio, method, common.seed, &owf, &gd)?))?;
            if let Some(path) = &out {
                imaging::save(&rec, path)?;
            }
            if let Some(path) = &report {
                let mut w = create(path)?;
                serde_json::to_writer_pretty(&mut w, &rep)?;
                writeln!(w)?;
                w.flush()?;
            }
            if let Some(path) = &signatures {
                let pixels = [(0, 0), (img.width() / 2, img.height() / 2)];
                let name = match method {
                    ImageMethod::Owf => "owf",
                    ImageMethod::Gd => "gd",
                };
                let mut w = create(path)?;
                write_signatures(&mut w, &pixels, &[("ref", &img), (name, &rec)])?;
                w.flush()?;
            }
            println!(
                "{}x{} image, m={}, {}: PSNR {:.2} dB, relative error {:.3e}",
                rep.width, rep.height, rep.m, rep.method, rep.psnr_db, rep.relative_error
            );
        }
        Command::MakeFixture {
            width,
            height,
            common,
            out,
        } => {
            if width == 0 || height == 0 {
                bail!("image dimensions must be positive");
            }
            let img = imaging::synthetic(width, height, &mut ChaCha8Rng::seed_from_u64(common.seed));
            imaging::save(&img, &out)?;
            println!("wrote {width}x{height}x8 image to {}", out.display());
        }
        Command::Probe {
            n,
            ratio,
            pairs,
            common,
            out,
        } => {
            let recs = common.install(|| Ok(ambiguity_probe(n, ratio, pairs, common.seed, Exec::Parallel)?))?;
            if let Some(path) = &out {
                let mut w = create(path)?;
                write_probe_csv(&mut w, &recs)?;
                w.flush()?;
            }
            let worst = recs.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
            let rel = recs
                .iter()
                .map(|r| r.max_deviation / r.max_measurement)
                .fold(0.0, f64::max);
            println!("{pairs} pairs, n={n}: max intensity deviation {worst:.3e} ({rel:.3e} of the largest intensity)");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
