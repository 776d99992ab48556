//! Octonion Wirtinger Flow.
//!
//! The unknown `x in O^n` is handled through its real image `aleph(x)` in
//! `R^{8n}`. For a measurement row `a_l` the map `x -> a_l* x` has the real
//! matrix `gimel(a_l*)`, an `8 x 8n` block row with blocks `gimel(conj(A_lk))`,
//! and the objective
//!
//! ```text
//! f(x) = sum_l ( |gimel(a_l*) aleph(x)|^2 - y_l )^2
//! ```
//!
//! is minimized by plain gradient descent from a spectral initializer. The
//! gradient is evaluated without forming any real matrix: since
//! `gimel(conj a)^T = gimel(a)`, block `k` of `gimel(a_l*)^T u` is `A_lk * u`.

use std::time::{Duration, Instant};

use crate::algebra::Octonion;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    accumulate_spectral_matrix, herm_inner_slice, power_leading_eigvec, OctMatrix, OctVector, DEFAULT_POWER_ITERS,
    DEFAULT_POWER_TOL,
};
use crate::par::{self, Exec};

/// How the step size is derived from the measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `alpha = mu * m / sum(y)` applied to the unaveraged gradient.
    Literal,
    /// `alpha = mu / mean(y)` applied to the gradient averaged over the `m`
    /// measurements.
    #[default]
    MeanNormalized,
}

/// Norm given to the spectral initializer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InitScale {
    /// `sqrt(sum(y^2) / m)`. Scales as `|x|^2`, so it only suits unit-norm signals.
    RootMeanSquare,
    /// `sqrt(sum(y) / m)`, the usual Wirtinger flow estimate of `|x|`.
    #[default]
    Mean,
}

impl InitScale {
    pub fn value(self, y: &[f64]) -> f64 {
        let m = y.len().max(1) as f64;
        match self {
            InitScale::RootMeanSquare => (y.iter().map(|v| v * v).sum::<f64>() / m).sqrt(),
            InitScale::Mean => (y.iter().sum::<f64>() / m).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum Init {
    #[default]
    Spectral,
    /// Start from the given real image (length `8n`).
    Provided(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum StopRule {
    /// Run every iteration.
    #[default]
    Never,
    /// Stop when `|f_prev - f| <= tol * f_prev` or the objective reaches zero.
    RelativeObjective(f64),
    /// Stop once the distance to the supplied ground truth is at most `tol`.
    /// Ignored when no ground truth is given.
    Distance(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OwfConfig {
    pub max_iters: usize,
    pub step_rule: StepRule,
    pub step_scale: f64,
    /// Multiply the gradient by `1/m`. Implied by [`StepRule::MeanNormalized`].
    pub grad_averaging: bool,
    pub stop: StopRule,
    pub init: Init,
    pub init_scale: InitScale,
    pub power_iters: usize,
    pub power_tol: f64,
    pub exec: Exec,
}

/// Step scale that converges on unit-energy Gaussian octonion sensing with
/// the mean-normalized rule.
pub const DEFAULT_STEP_SCALE: f64 = 0.5;
pub const DEFAULT_MAX_ITERS: usize = 2000;

impl Default for OwfConfig {
    fn default() -> Self {
        OwfConfig {
            max_iters: DEFAULT_MAX_ITERS,
            step_rule: StepRule::default(),
            step_scale: DEFAULT_STEP_SCALE,
            grad_averaging: false,
            stop: StopRule::Never,
            init: Init::Spectral,
            init_scale: InitScale::default(),
            power_iters: DEFAULT_POWER_ITERS,
            power_tol: DEFAULT_POWER_TOL,
            exec: Exec::default(),
        }
    }
}

impl OwfConfig {
    /// The literal constants: `alpha = 5 m / sum(y)`, no averaging, and the
    /// `sqrt(sum(y^2) / m)` initial scale. Diverges on typical instances.
    pub fn literal() -> Self {
        OwfConfig {
            step_rule: StepRule::Literal,
            step_scale: 5.0,
            grad_averaging: false,
            init_scale: InitScale::RootMeanSquare,
            ..OwfConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::InvalidConfig("step scale must be positive".into()));
        }
        Ok(())
    }

    fn averages_gradient(&self) -> bool {
        self.grad_averaging || self.step_rule == StepRule::MeanNormalized
    }

    /// Step size `alpha` for measurements `y`.
    pub fn step_size(&self, y: &[f64]) -> Result<f64> {
        let total: f64 = y.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateMeasurements);
        }
        let m = y.len() as f64;
        Ok(match self.step_rule {
            StepRule::Literal => self.step_scale * m / total,
            StepRule::MeanNormalized => self.step_scale / (total / m),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub estimate: OctVector,
    /// Objective at the initial point and after every iteration.
    pub objective: Vec<f64>,
    /// Distance to the ground truth, same indexing as `objective`. Present
    /// only when ground truth was supplied.
    pub distance: Option<Vec<f64>>,
    pub iterations: usize,
    pub step: f64,
    pub elapsed: Duration,
}

impl SolveReport {
    pub fn final_distance(&self) -> Option<f64> {
        self.distance.as_ref().and_then(|d| d.last().copied())
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective.last().expect("trace holds the initial point")
    }
}

fn check_problem(x_len: usize, a: &OctMatrix, y: &[f64]) -> Result<()> {
    check_dim("signal length (8n)", 8 * a.cols(), x_len)?;
    check_dim("measurement count", a.rows(), y.len())
}

fn as_octonions(x: &[f64]) -> Vec<Octonion> {
    x.chunks_exact(8)
        .map(|c| Octonion(c.try_into().expect("chunk of 8")))
        .collect()
}

/// Objective value and the unscaled gradient as octonion blocks, in one pass.
///
/// Residual `r_l = |a_l* x|^2 - y_l`, objective `sum r_l^2`, gradient block
/// `k = sum_l r_l A_lk (a_l* x)`.
fn objective_and_gradient(x: &[Octonion], a: &OctMatrix, y: &[f64], exec: Exec) -> (f64, Vec<Octonion>) {
    let n = a.cols();
    chunked_pair(y.len(), n, exec, |(f, g), l| {
        let row = a.row(l);
        let u = herm_inner_slice(row, x);
        let r = u.norm_sqr() - y[l];
        *f += r * r;
        let ru = u.scale(r);
        for (gk, ak) in g.iter_mut().zip(row) {
            *gk += *ak * ru;
        }
    })
}

fn chunked_pair<F>(m: usize, n: usize, exec: Exec, fold: F) -> (f64, Vec<Octonion>)
where
    F: Fn(&mut (f64, Vec<Octonion>), usize) + Sync + Send,
{
    par::chunked_reduce(
        m,
        exec,
        || (0.0, vec![Octonion::ZERO; n]),
        fold,
        |acc, part| {
            acc.0 += part.0;
            for (a, b) in acc.1.iter_mut().zip(part.1) {
                *a += b;
            }
        },
    )
}

fn objective_oct(x: &[Octonion], a: &OctMatrix, y: &[f64], exec: Exec) -> f64 {
    par::chunked_reduce(
        y.len(),
        exec,
        || 0.0,
        |f, l| {
            let r = herm_inner_slice(a.row(l), x).norm_sqr() - y[l];
            *f += r * r;
        },
        |acc, p| *acc += p,
    )
}

/// `f(x) = sum_l (|a_l* x|^2 - y_l)^2` for the real image `x` of length `8n`.
pub fn objective(x: &[f64], a: &OctMatrix, y: &[f64]) -> Result<f64> {
    check_problem(x.len(), a, y)?;
    Ok(objective_oct(&as_octonions(x), a, y, Exec::Sequential))
}

/// Gradient `sum_l r_l gimel(a_l*)^T gimel(a_l*) x` without the factor 4 of the
/// analytic derivative; with `averaging` it is further divided by `m`.
pub fn gradient(x: &[f64], a: &OctMatrix, y: &[f64], averaging: bool) -> Result<Vec<f64>> {
    gradient_with(x, a, y, averaging, Exec::Sequential)
}

/// [`gradient`] with an explicit execution mode. Results are bit-identical
/// for either mode.
pub fn gradient_with(x: &[f64], a: &OctMatrix, y: &[f64], averaging: bool, exec: Exec) -> Result<Vec<f64>> {
    check_problem(x.len(), a, y)?;
    let (_, g) = objective_and_gradient(&as_octonions(x), a, y, exec);
    let s = if averaging { 1.0 / y.len() as f64 } else { 1.0 };
    Ok(g.iter().flat_map(|v| v.scale(s).0).collect())
}

/// Spectral initializer: leading eigenvector of `(1/m) sum_l y_l a_l a_l*`
/// scaled to `scale.value(y)`. Returns the real image.
pub fn spectral_init(
    a: &OctMatrix,
    y: &[f64],
    scale: InitScale,
    power_iters: usize,
    power_tol: f64,
    exec: Exec,
) -> Result<Vec<f64>> {
    check_dim("measurement count", a.rows(), y.len())?;
    if y.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "measurements must be finite and non-negative".into(),
        ));
    }
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateMeasurements);
    }
    let spectral = accumulate_spectral_matrix(y, a, exec)?;
    let (w, _) = power_leading_eigvec(&spectral, power_iters, power_tol)?;
    Ok(w.scale(scale.value(y)).to_real())
}

/// Runs OWF on measurements `y` of `A`. With `truth`, the distance trace is
/// recorded as well.
pub fn owf_solve(a: &OctMatrix, y: &[f64], cfg: &OwfConfig, truth: Option<&OctVector>) -> Result<SolveReport> {
    cfg.validate()?;
    check_dim("measurement count", a.rows(), y.len())?;
    if let Some(t) = truth {
        check_dim("ground truth length", a.cols(), t.len())?;
    }
    let start = Instant::now();
    let m = y.len();
    let step = cfg.step_size(y)?;
    let grad_scale = if cfg.averages_gradient() { step / m as f64 } else { step };

    let x0 = match &cfg.init {
        Init::Spectral => spectral_init(a, y, cfg.init_scale, cfg.power_iters, cfg.power_tol, cfg.exec)?,
        Init::Provided(v) => {
            check_dim("initial point length (8n)", 8 * a.cols(), v.len())?;
            v.clone()
        }
    };
    let mut x = as_octonions(&x0);

    let dist = |x: &[Octonion]| -> Option<f64> { truth.map(|t| distance_slices(t.as_slice(), x).unwrap_or(f64::NAN)) };

    let (mut f, mut g) = objective_and_gradient(&x, a, y, cfg.exec);
    let mut objective = Vec::with_capacity(cfg.max_iters + 1);
    let mut distances = truth.map(|_| Vec::with_capacity(cfg.max_iters + 1));
    objective.push(f);
    if let Some(d) = distances.as_mut() {
        d.push(dist(&x).expect("truth present"));
    }
    if !f.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }

    let mut iterations = 0;
    for it in 1..=cfg.max_iters {
        for (xk, gk) in x.iter_mut().zip(&g) {
            *xk -= gk.scale(grad_scale);
        }
        let f_prev = f;
        (f, g) = objective_and_gradient(&x, a, y, cfg.exec);
        iterations = it;
        objective.push(f);
        if !f.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        let d = dist(&x);
        if let (Some(trace), Some(d)) = (distances.as_mut(), d) {
            trace.push(d);
        }
        let stop = match cfg.stop {
            StopRule::Never => false,
            StopRule::RelativeObjective(tol) => f == 0.0 || (f_prev - f).abs() <= tol * f_prev,
            StopRule::Distance(tol) => d.is_some_and(|d| d <= tol),
        };
        if stop {
            break;
        }
    }

    Ok(SolveReport {
        estimate: OctVector(x),
        objective,
        distance: distances,
        iterations,
        step,
        elapsed: start.elapsed(),
    })
}

/// Unit octonion `g` minimizing `|x* - x g|`: the sign of `herm_inner(x, x*)`,
/// which equals `gimel(x)^T aleph(x*)` for the stacked representation.
pub fn phase_align(x: &OctVector, x_star: &OctVector) -> Result<Octonion> {
    check_dim("phase_align", x.len(), x_star.len())?;
    phase_align_slices(x.as_slice(), x_star.as_slice())
}

fn phase_align_slices(x: &[Octonion], x_star: &[Octonion]) -> Result<Octonion> {
    if x.iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(Error::ZeroReference);
    }
    herm_inner_slice(x, x_star)
        .sign_unit()
        .map_err(|_| Error::AlignmentUndefined)
}

/// `d(x, x*) = min_{|z| = 1} |x* - x z|`, with `x` the reference.
///
/// When `x*` is orthogonal to every right-phase rotation of `x`, all unit `z`
/// give the same value; `z = 1` is used.
pub fn distance(x: &OctVector, x_star: &OctVector) -> Result<f64> {
    check_dim("distance", x.len(), x_star.len())?;
    distance_slices(x.as_slice(), x_star.as_slice())
}

fn distance_slices(x: &[Octonion], x_star: &[Octonion]) -> Result<f64> {
    let g = match phase_align_slices(x, x_star) {
        Ok(g) => g,
        Err(Error::AlignmentUndefined) => Octonion::ONE,
        Err(e) => return Err(e),
    };
    Ok(x.iter()
        .zip(x_star)
        .map(|(xk, sk)| (*sk - *xk * g).norm_sqr())
        .sum::<f64>()
        .sqrt())
}
