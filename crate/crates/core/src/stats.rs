//! Coupled-ensemble error estimation.
//!
//! Each sample derives one Poisson path per channel, runs the exact
//! simulator and every requested split simulator on those same paths and
//! records the states at the requested times. Strong errors are sample means
//! of `‖Y - X‖²`, weak errors sample means of `f(Y) - f(X)`, both with the
//! spread `S` and half-width `S/√N` of the estimator.
//!
//! Per-sample values are collected in sample order and reduced serially,
//! so results are bit-identical whatever the thread count.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{simulate_exact, SimOptions, Trajectory};
use crate::network::{ReactionNetwork, SplitPartition, State, WeightVector};
use crate::paths::StreamSeedPlan;
use crate::splitstep::{kernel_integral, simulate_split, KernelSpec};

/// Default multiplier applied to `S/√N` when reporting uncertainty.
pub const DEFAULT_UNCERTAINTY_MULTIPLIER: f64 = 2.0;

/// Norm of the state difference in strong errors.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ErrorNorm {
    #[default]
    Euclidean,
    Weighted(WeightVector),
}

impl ErrorNorm {
    /// `‖y - x‖²`.
    pub fn squared_distance(&self, y: &[u64], x: &[u64]) -> f64 {
        match self {
            ErrorNorm::Euclidean => y
                .iter()
                .zip(x)
                .map(|(&a, &b)| {
                    let d = a as f64 - b as f64;
                    d * d
                })
                .sum(),
            ErrorNorm::Weighted(l) => {
                let n: f64 = l
                    .as_slice()
                    .iter()
                    .zip(y.iter().zip(x))
                    .map(|(w, (&a, &b))| w * (a as f64 - b as f64).abs())
                    .sum();
                n * n
            }
        }
    }
}

/// Sample mean `M`, spread `S` and count `N` of a per-sample error value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub mean: f64,
    /// `S²`.
    pub variance: f64,
    pub spread: f64,
    pub samples: usize,
    /// `S / √N`.
    pub half_width: f64,
    pub min: f64,
    pub max: f64,
}

impl ErrorEstimate {
    /// `M = Σv/N`, `S² = Σ(v - M)²/(N - 1)` (zero when `N = 1`).
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let spread = variance.sqrt();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(ErrorEstimate {
            mean,
            variance,
            spread,
            samples: n,
            half_width: spread / (n as f64).sqrt(),
            min,
            max,
        })
    }

    pub fn uncertainty(&self, multiplier: f64) -> f64 {
        multiplier * self.half_width
    }
}

/// Function of the state whose expectation is compared in weak errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    /// `f₁(x) = x_i`.
    FirstFactorial { species: usize },
    /// `f₂(x) = x_i (x_i - 1)`.
    SecondFactorial { species: usize },
}

impl Observable {
    pub fn evaluate(&self, x: &[u64]) -> f64 {
        match *self {
            Observable::FirstFactorial { species } => x[species] as f64,
            Observable::SecondFactorial { species } => {
                let v = x[species] as f64;
                v * (v - 1.0)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Observable::FirstFactorial { .. } => "f1",
            Observable::SecondFactorial { .. } => "f2",
        }
    }
}

/// Estimate of `E f(Y) - E f(X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakEstimate {
    pub estimate: f64,
    pub spread: f64,
    pub samples: usize,
    /// `S / √N`.
    pub half_width: f64,
    pub multiplier: f64,
}

impl WeakEstimate {
    /// False when `|estimate| < multiplier · S/√N`: the sign of the error
    /// cannot be told apart from noise.
    pub fn sign_determined(&self) -> bool {
        self.estimate.abs() >= self.multiplier * self.half_width
    }
}

/// How the exact and split runs of one sample obtain their paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// Both consume the same paths.
    #[default]
    Shared,
    /// The exact run uses the paths of trajectory id `samples + i`.
    Independent,
}

/// Everything a coupled ensemble needs besides kernels, times and seeds.
#[derive(Debug, Clone)]
pub struct CoupledSetup<'a> {
    pub network: &'a ReactionNetwork,
    pub partition: &'a SplitPartition,
    pub x0: &'a State,
    pub options: SimOptions,
    pub norm: ErrorNorm,
    pub coupling: Coupling,
}

impl<'a> CoupledSetup<'a> {
    pub fn new(network: &'a ReactionNetwork, partition: &'a SplitPartition, x0: &'a State) -> Self {
        CoupledSetup {
            network,
            partition,
            x0,
            options: SimOptions::default(),
            norm: ErrorNorm::Euclidean,
            coupling: Coupling::Shared,
        }
    }
}

/// States of every coupled sample at every requested time.
#[derive(Debug, Clone)]
pub struct CoupledEnsemble {
    pub specs: Vec<KernelSpec>,
    pub times: Vec<f64>,
    species: usize,
    // Per sample: exact states `[t][d]` then split states `[spec][t][d]`.
    exact: Vec<Vec<u64>>,
    split: Vec<Vec<u64>>,
}

fn flat_states(
    traj: &Trajectory,
    network: &ReactionNetwork,
    times: &[f64],
    out: &mut Vec<u64>,
) -> Result<()> {
    for s in traj.states_at(network, times)? {
        out.extend_from_slice(&s);
    }
    Ok(())
}

impl CoupledEnsemble {
    /// Runs `samples` coupled samples with ids `0..samples`.
    pub fn run(
        setup: &CoupledSetup<'_>,
        specs: &[KernelSpec],
        times: &[f64],
        samples: usize,
        plan: &StreamSeedPlan,
    ) -> Result<Self> {
        if samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 samples, got {samples}"
            )));
        }
        if specs.is_empty() || times.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one kernel and one time".into(),
            ));
        }
        if times.windows(2).any(|w| w[0] > w[1]) || times[0] < 0.0 {
            return Err(Error::InvalidArgument(
                "evaluation times must be ascending and non-negative".into(),
            ));
        }
        let t_end = *times.last().unwrap();
        let channels = setup.network.channel_count();
        let species = setup.network.species_count();

        let results: Vec<Result<(Vec<u64>, Vec<u64>)>> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut paths = plan.derive_paths(i as u64, channels)?;
                let mut exact = Vec::with_capacity(times.len() * species);
                let mut split = Vec::with_capacity(specs.len() * times.len() * species);
                let x = match setup.coupling {
                    Coupling::Shared => {
                        simulate_exact(setup.network, setup.x0, t_end, &mut paths, &setup.options)?
                    }
                    Coupling::Independent => {
                        let mut own = plan.derive_paths((samples + i) as u64, channels)?;
                        simulate_exact(setup.network, setup.x0, t_end, &mut own, &setup.options)?
                    }
                };
                flat_states(&x, setup.network, times, &mut exact)?;
                for spec in specs {
                    let y = simulate_split(
                        setup.network,
                        setup.partition,
                        spec,
                        setup.x0,
                        t_end,
                        &mut paths,
                        &setup.options,
                    )?;
                    flat_states(&y, setup.network, times, &mut split)?;
                }
                Ok((exact, split))
            })
            .collect();

        let failures = results.iter().filter(|r| r.is_err()).count();
        if failures > 0 {
            let first = results.into_iter().find_map(|r| r.err()).unwrap();
            return Err(Error::EnsembleFailed {
                failures,
                samples,
                first: Box::new(first),
            });
        }
        let (exact, split) = results.into_iter().map(|r| r.unwrap()).unzip();
        Ok(CoupledEnsemble {
            specs: specs.to_vec(),
            times: times.to_vec(),
            species,
            exact,
            split,
        })
    }

    pub fn samples(&self) -> usize {
        self.exact.len()
    }

    /// Exact state of sample `i` at time index `t`.
    pub fn exact_state(&self, i: usize, t: usize) -> &[u64] {
        let d = self.species;
        &self.exact[i][t * d..(t + 1) * d]
    }

    /// Split state of sample `i` under kernel `k` at time index `t`.
    pub fn split_state(&self, i: usize, k: usize, t: usize) -> &[u64] {
        let d = self.species;
        let off = (k * self.times.len() + t) * d;
        &self.split[i][off..off + d]
    }

    pub fn squared_errors(&self, k: usize, t: usize, norm: &ErrorNorm) -> Vec<f64> {
        (0..self.samples())
            .map(|i| norm.squared_distance(self.split_state(i, k, t), self.exact_state(i, t)))
            .collect()
    }

    pub fn strong(&self, k: usize, t: usize, norm: &ErrorNorm) -> ErrorEstimate {
        ErrorEstimate::from_samples(&self.squared_errors(k, t, norm))
            .expect("ensemble is non-empty")
    }

    pub fn weak(&self, k: usize, t: usize, f: Observable, multiplier: f64) -> WeakEstimate {
        let diffs: Vec<f64> = (0..self.samples())
            .map(|i| f.evaluate(self.split_state(i, k, t)) - f.evaluate(self.exact_state(i, t)))
            .collect();
        let e = ErrorEstimate::from_samples(&diffs).expect("ensemble is non-empty");
        WeakEstimate {
            estimate: e.mean,
            spread: e.spread,
            samples: e.samples,
            half_width: e.half_width,
            multiplier,
        }
    }

    /// Strong errors at time index `t` for every kernel.
    pub fn strong_table(&self, t: usize, norm: &ErrorNorm) -> ConvergenceTable {
        ConvergenceTable {
            rows: (0..self.specs.len())
                .map(|k| ConvergenceRow {
                    h: self.specs[k].h(),
                    estimate: self.strong(k, t, norm),
                })
                .collect(),
        }
    }

    /// Sample mean and variance of `g(X_t)` over the exact runs.
    pub fn exact_moments(&self, t: usize, g: impl Fn(&[u64]) -> f64) -> ErrorEstimate {
        let v: Vec<f64> = (0..self.samples())
            .map(|i| g(self.exact_state(i, t)))
            .collect();
        ErrorEstimate::from_samples(&v).expect("ensemble is non-empty")
    }
}

/// `E‖Y_t - X_t‖²` for one kernel at one time.
pub fn strong_error(
    setup: &CoupledSetup<'_>,
    spec: &KernelSpec,
    t_eval: f64,
    samples: usize,
    plan: &StreamSeedPlan,
) -> Result<ErrorEstimate> {
    let ens = CoupledEnsemble::run(setup, &[*spec], &[t_eval], samples, plan)?;
    Ok(ens.strong(0, 0, &setup.norm))
}

/// `E f(Y_t) - E f(X_t)` for one kernel at one time.
pub fn weak_error(
    setup: &CoupledSetup<'_>,
    spec: &KernelSpec,
    t_eval: f64,
    samples: usize,
    plan: &StreamSeedPlan,
    f: Observable,
) -> Result<WeakEstimate> {
    let ens = CoupledEnsemble::run(setup, &[*spec], &[t_eval], samples, plan)?;
    Ok(ens.weak(0, 0, f, DEFAULT_UNCERTAINTY_MULTIPLIER))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub estimate: ErrorEstimate,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Least-squares slope of `log M` against `log h` for rows with
    /// `h_range.0 <= h <= h_range.1`.
    pub fn fitted_order(&self, h_range: (f64, f64)) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.h, r.estimate.mean)).collect();
        fit_order(&pts, h_range)
    }

    /// Strong (root-mean-square) order: half the slope of `log M`.
    pub fn strong_order(&self, h_range: (f64, f64)) -> Result<f64> {
        Ok(self.fitted_order(h_range)? / 2.0)
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "h,M,S,N,half_width")?;
        for r in &self.rows {
            let e = &r.estimate;
            writeln!(
                out,
                "{},{},{},{},{}",
                r.h, e.mean, e.spread, e.samples, e.half_width
            )?;
        }
        Ok(())
    }
}

/// Least-squares slope of `log value` against `log h` over the points with
/// `h` inside `h_range` (inclusive) and a positive, finite value.
pub fn fit_order(points: &[(f64, f64)], h_range: (f64, f64)) -> Result<f64> {
    let (lo, hi) = h_range;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, v)| *h >= lo && *h <= hi && *h > 0.0 && *v > 0.0 && v.is_finite())
        .map(|&(h, v)| (h.ln(), v.ln()))
        .collect();
    if usable.len() < 2 {
        return Err(Error::TooFewRows(usable.len()));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewRows(1));
    }
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// Total and quadratic variation of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variation {
    pub total: f64,
    pub quadratic: f64,
}

/// `V = Σ ‖N_r‖` and `[X] = Σ ‖N_r‖²` over the events of `traj`.
pub fn trajectory_variation(traj: &Trajectory, network: &ReactionNetwork) -> Variation {
    let mut total = 0.0;
    let mut quadratic = 0.0;
    for e in &traj.events {
        let n = network.jump_norm(e.channel as usize);
        total += n;
        quadratic += n * n;
    }
    Variation { total, quadratic }
}

/// Per-channel comparison of `|∫₀ᵗ σ_h(s) w_r(Y_s) ds|` with
/// `(h/2) (|w_r(Y_t)| + L_r V_[0,t](Y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBound {
    pub channel: usize,
    pub integral: f64,
    pub bound: f64,
}

impl KernelBound {
    pub fn holds(&self) -> bool {
        self.integral.abs() <= self.bound * (1.0 + 1e-9) + 1e-12
    }
}

/// Evaluates the kernel-integral estimate on one split trajectory, over
/// its whole time range. `lipschitz[r]` must bound `|Δw_r|/‖Δx‖` on the
/// states the trajectory visits.
pub fn kernel_integral_bounds(
    traj: &Trajectory,
    network: &ReactionNetwork,
    spec: &KernelSpec,
    lipschitz: &[f64],
) -> Result<Vec<KernelBound>> {
    let channels = network.channel_count();
    if lipschitz.len() != channels {
        return Err(Error::DimensionMismatch {
            expected: channels,
            got: lipschitz.len(),
        });
    }
    let mut integrals = vec![0.0; channels];
    let mut x = traj.initial_state.clone().into_inner();
    let mut t = 0.0;
    let mut sigma_t = kernel_integral(spec, 0.0);
    let mut accumulate = |x: &[u64], until: f64, t: &mut f64, sigma_t: &mut f64| {
        let sigma_next = kernel_integral(spec, until);
        for (r, acc) in integrals.iter_mut().enumerate() {
            *acc += network.propensity(r, x) * (sigma_next - *sigma_t);
        }
        *t = until;
        *sigma_t = sigma_next;
    };
    for e in &traj.events {
        accumulate(&x, e.time, &mut t, &mut sigma_t);
        network.fire_in_place(&mut x, e.channel as usize)?;
    }
    accumulate(&x, traj.final_time, &mut t, &mut sigma_t);
    let v = trajectory_variation(traj, network).total;
    let half = spec.h() / 2.0;
    Ok(integrals
        .into_iter()
        .enumerate()
        .map(|(r, integral)| KernelBound {
            channel: r,
            integral,
            bound: half * (network.propensity(r, &x) + lipschitz[r] * v),
        })
        .collect())
}

/// Strong order between two consecutive kernels of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOrder {
    pub h_coarse: f64,
    pub h_fine: f64,
    /// Half the slope of `log M` between the two step sizes, averaged
    /// over the evaluation times inside the window.
    pub order: f64,
}

/// Orders between consecutive kernels `k, k + 1`, each averaged over the
/// ensemble times in `window` (inclusive).
pub fn windowed_pair_orders(
    ens: &CoupledEnsemble,
    norm: &ErrorNorm,
    window: (f64, f64),
) -> Result<Vec<PairOrder>> {
    let idx: Vec<usize> = (0..ens.times.len())
        .filter(|&i| ens.times[i] >= window.0 && ens.times[i] <= window.1)
        .collect();
    if idx.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no evaluation time inside {window:?}"
        )));
    }
    let mut out = Vec::new();
    for k in 0..ens.specs.len().saturating_sub(1) {
        let (hc, hf) = (ens.specs[k].h(), ens.specs[k + 1].h());
        if hc == hf {
            return Err(Error::InvalidArgument(format!("repeated step size {hc}")));
        }
        let mut sum = 0.0;
        for &t in &idx {
            let mc = ens.strong(k, t, norm).mean;
            let mf = ens.strong(k + 1, t, norm).mean;
            sum += (mc / mf).ln() / (hc / hf).ln() / 2.0;
        }
        out.push(PairOrder {
            h_coarse: hc,
            h_fine: hf,
            order: sum / idx.len() as f64,
        });
    }
    Ok(out)
}

pub fn write_pair_orders_csv(orders: &[PairOrder], out: &mut impl Write) -> Result<()> {
    writeln!(out, "h_coarse,h_fine,order")?;
    for o in orders {
        writeln!(out, "{},{},{}", o.h_coarse, o.h_fine, o.order)?;
    }
    Ok(())
}

/// Strong errors on a time grid, one row per `(t, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub h: f64,
    pub estimate: ErrorEstimate,
}

pub fn strong_error_over_time(ens: &CoupledEnsemble, norm: &ErrorNorm) -> Vec<TimeSeriesRow> {
    let mut rows = Vec::with_capacity(ens.specs.len() * ens.times.len());
    for (k, spec) in ens.specs.iter().enumerate() {
        for (ti, &t) in ens.times.iter().enumerate() {
            rows.push(TimeSeriesRow {
                t,
                h: spec.h(),
                estimate: ens.strong(k, ti, norm),
            });
        }
    }
    rows
}

pub fn write_time_series_csv(rows: &[TimeSeriesRow], out: &mut impl Write) -> Result<()> {
    writeln!(out, "t,h,M,S,N,half_width")?;
    for r in rows {
        let e = &r.estimate;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.t, r.h, e.mean, e.spread, e.samples, e.half_width
        )?;
    }
    Ok(())
}
