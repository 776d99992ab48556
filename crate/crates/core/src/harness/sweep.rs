use std::io;
use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::data::{add_noise, gen_sensing, gen_signal, measure, stream_id, trial_rng, UNIT_ENERGY_STD};
use super::metrics::median;
use crate::algebra::Octonion;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::solver::{owf_solve, OwfConfig};

pub const DEFAULT_SUCCESS_TOL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Sampling ratios `m / n`; `m = round(ratio * n)`.
    pub ratios: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Measurement SNRs in dB; `f64::INFINITY` means noiseless.
    pub snr_db: Vec<f64>,
    pub solver: OwfConfig,
    pub success_tol: f64,
    /// Per-coefficient standard deviation of the sensing entries.
    pub sensing_std: f64,
    /// Trial-level parallelism. Solves inside a parallel sweep run sequentially.
    pub exec: Exec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 30,
            ratios: vec![20.0],
            trials: 50,
            seed: 0,
            snr_db: vec![f64::INFINITY],
            solver: OwfConfig::default(),
            success_tol: DEFAULT_SUCCESS_TOL,
            sensing_std: UNIT_ENERGY_STD,
            exec: Exec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidConfig("ratios must be positive".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::InvalidConfig("snr list must hold finite values or +inf".into()));
        }
        self.solver.validate()
    }

    pub fn measurements(&self, ratio: f64) -> usize {
        ((ratio * self.n as f64).round() as usize).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub ratio: f64,
    pub snr_db: f64,
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub iters: usize,
    /// `d(x, x*)`; infinite when the solve diverged.
    pub final_distance: f64,
    pub success: bool,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub ratio: f64,
    pub m: usize,
    pub snr_db: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_distance: f64,
    pub median_distance: f64,
    pub mean_iters: f64,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    /// One entry per `(ratio, snr)` in configuration order, ratios outermost.
    pub cells: Vec<CellSummary>,
}

impl SweepResult {
    pub fn cell(&self, ratio: f64, snr_db: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.ratio == ratio && (c.snr_db == snr_db))
    }
}

fn run_trial(cfg: &ExperimentConfig, ri: usize, si: usize, trial: usize, solver: &OwfConfig) -> TrialRecord {
    let ratio = cfg.ratios[ri];
    let snr = cfg.snr_db[si];
    let m = cfg.measurements(ratio);
    let start = Instant::now();
    let mut rng = trial_rng(cfg.seed, stream_id(ri, si, trial));
    let x = gen_signal(cfg.n, &mut rng);
    let a = gen_sensing(m, cfg.n, cfg.sensing_std, &mut rng);
    let clean = measure(&a, &x).expect("dimensions match by construction");
    let y = add_noise(&clean, snr, &mut rng);
    let (iters, final_distance) = match owf_solve(&a, &y, solver, Some(&x)) {
        Ok(rep) => (rep.iterations, rep.final_distance().expect("truth supplied")),
        Err(Error::Divergence { iteration }) => (iteration, f64::INFINITY),
        Err(_) => (0, f64::INFINITY),
    };
    TrialRecord {
        ratio,
        snr_db: snr,
        trial,
        n: cfg.n,
        m,
        iters,
        final_distance,
        success: final_distance <= cfg.success_tol,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Runs `trials` seeded OWF solves for every `(ratio, snr)` cell.
pub fn success_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut solver = cfg.solver.clone();
    if cfg.exec.is_parallel() {
        solver.exec = Exec::Sequential;
    }
    let mut jobs = Vec::new();
    for ri in 0..cfg.ratios.len() {
        for si in 0..cfg.snr_db.len() {
            for t in 0..cfg.trials {
                jobs.push((ri, si, t));
            }
        }
    }
    let trials = par::map_indices(jobs.len(), cfg.exec, |j| {
        let (ri, si, t) = jobs[j];
        run_trial(cfg, ri, si, t, &solver)
    });
    let cells = trials
        .chunks(cfg.trials)
        .map(|group| {
            let first = &group[0];
            let dists: Vec<f64> = group.iter().map(|t| t.final_distance).collect();
            let successes = group.iter().filter(|t| t.success).count();
            CellSummary {
                ratio: first.ratio,
                m: first.m,
                snr_db: first.snr_db,
                trials: group.len(),
                successes,
                success_rate: successes as f64 / group.len() as f64,
                mean_distance: dists.iter().sum::<f64>() / dists.len() as f64,
                median_distance: median(&dists),
                mean_iters: group.iter().map(|t| t.iters as f64).sum::<f64>() / group.len() as f64,
                runtime_ms: group.iter().map(|t| t.wall_ms).sum(),
            }
        })
        .collect();
    Ok(SweepResult {
        seed: cfg.seed,
        trials,
        cells,
    })
}

fn fmt_db(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

/// Per-trial CSV. `wall_ms` is written as `0` unless `timing` is set, so
/// output files are reproducible byte for byte.
pub fn write_trials_csv<W: io::Write>(out: W, result: &SweepResult, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed",
        "trial",
        "n",
        "m",
        "ratio",
        "snr_db",
        "iters",
        "final_distance",
        "success",
        "wall_ms",
    ])?;
    for t in &result.trials {
        w.write_record([
            result.seed.to_string(),
            t.trial.to_string(),
            t.n.to_string(),
            t.m.to_string(),
            t.ratio.to_string(),
            fmt_db(t.snr_db),
            t.iters.to_string(),
            t.final_distance.to_string(),
            u8::from(t.success).to_string(),
            if timing {
                format!("{:.3}", t.wall_ms)
            } else {
                "0".into()
            },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregate CSV, one row per `(ratio, snr)` cell.
pub fn write_cells_csv<W: io::Write>(out: W, result: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "ratio",
        "m",
        "snr_db",
        "trials",
        "success_rate",
        "mean_distance",
        "median_distance",
        "mean_iters",
    ])?;
    for c in &result.cells {
        w.write_record([
            c.ratio.to_string(),
            c.m.to_string(),
            fmt_db(c.snr_db),
            c.trials.to_string(),
            c.success_rate.to_string(),
            c.mean_distance.to_string(),
            c.median_distance.to_string(),
            c.mean_iters.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTrace {
    pub n: usize,
    pub m: usize,
    pub distance: Vec<f64>,
    pub objective: Vec<f64>,
}

/// A single seeded noiseless solve with per-iteration distance and objective.
pub fn convergence_trace(n: usize, ratio: f64, seed: u64, solver: &OwfConfig) -> Result<ConvergenceTrace> {
    let cfg = ExperimentConfig {
        n,
        ratios: vec![ratio],
        trials: 1,
        seed,
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    let m = cfg.measurements(ratio);
    let mut rng = trial_rng(seed, stream_id(0, 0, 0));
    let x = gen_signal(n, &mut rng);
    let a = gen_sensing(m, n, cfg.sensing_std, &mut rng);
    let y = measure(&a, &x)?;
    let rep = owf_solve(&a, &y, solver, Some(&x))?;
    Ok(ConvergenceTrace {
        n,
        m,
        distance: rep.distance.expect("truth supplied"),
        objective: rep.objective,
    })
}

pub fn write_trace_csv<W: io::Write>(out: W, trace: &ConvergenceTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "distance", "objective"])?;
    for (i, (d, f)) in trace.distance.iter().zip(&trace.objective).enumerate() {
        w.write_record([i.to_string(), d.to_string(), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub pair: usize,
    pub n: usize,
    pub m: usize,
    /// `max_l | |a_l*(x z)|^2 - |a_l* x|^2 |`.
    pub max_deviation: f64,
    /// `max_l |a_l* x|^2`, for scale.
    pub max_measurement: f64,
}

/// Measures how far entrywise right-phase scaling `x -> x z` moves the
/// intensities, for `pairs` seeded `(x, z)` with `m = ratio * n` rows.
pub fn ambiguity_probe(n: usize, ratio: f64, pairs: usize, seed: u64, exec: Exec) -> Result<Vec<ProbeRecord>> {
    if n == 0 || ratio.is_nan() || ratio <= 0.0 {
        return Err(Error::InvalidConfig("probe needs n >= 1 and a positive ratio".into()));
    }
    let m = ((ratio * n as f64).round() as usize).max(1);
    Ok(par::map_indices(pairs, exec, |p| {
        let mut rng = trial_rng(seed, stream_id(0, 0, p));
        let x = gen_signal(n, &mut rng);
        let z = loop {
            let c = Octonion(std::array::from_fn(|_| StandardNormal.sample(&mut rng)));
            if let Ok(u) = c.sign_unit() {
                break u;
            }
        };
        let a = gen_sensing(m, n, UNIT_ENERGY_STD, &mut rng);
        let y = measure(&a, &x).expect("sized above");
        let yz = measure(&a, &x.right_mul(&z)).expect("sized above");
        ProbeRecord {
            pair: p,
            n,
            m,
            max_deviation: y.iter().zip(&yz).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            max_measurement: y.iter().copied().fold(0.0, f64::max),
        }
    }))
}

pub fn write_probe_csv<W: io::Write>(out: W, records: &[ProbeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
