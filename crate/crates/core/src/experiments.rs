//! Convergence studies on the bundled models.
//!
//! Each `run_*` function builds the model, runs one coupled ensemble and
//! returns a report; [`write_report`] turns a report into CSV files, each
//! starting with `# key=value` metadata lines (experiment, seed, samples,
//! model parameters, library version).

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{builtin, Model};
use crate::paths::StreamSeedPlan;
use crate::splitstep::{KernelSpec, SplitMethod};
use crate::stats::{
    strong_error_over_time, windowed_pair_orders, write_pair_orders_csv, write_time_series_csv,
    ConvergenceTable, CoupledEnsemble, CoupledSetup, ErrorEstimate, ErrorNorm, Observable,
    PairOrder, TimeSeriesRow, WeakEstimate, DEFAULT_UNCERTAINTY_MULTIPLIER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    BirthDeath,
    Dimerization,
    Bimolecular,
    IllPosed,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::BirthDeath,
        Experiment::Dimerization,
        Experiment::Bimolecular,
        Experiment::IllPosed,
    ];

    pub fn model_name(&self) -> &'static str {
        match self {
            Experiment::BirthDeath => "birth_death",
            Experiment::Dimerization => "dimerization",
            Experiment::Bimolecular => "bimolecular",
            Experiment::IllPosed => "illposed",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bd" | "birth_death" => Ok(Experiment::BirthDeath),
            "dim" | "dimerization" => Ok(Experiment::Dimerization),
            "bimol" | "bimolecular" => Ok(Experiment::Bimolecular),
            "illposed" => Ok(Experiment::IllPosed),
            other => Err(Error::InvalidArgument(format!(
                "unknown experiment {other:?}; expected bd, dim, bimol or illposed"
            ))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::BirthDeath => "bd",
            Experiment::Dimerization => "dim",
            Experiment::Bimolecular => "bimol",
            Experiment::IllPosed => "illposed",
        })
    }
}

/// Parameters of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub methods: Vec<SplitMethod>,
    /// Step sizes in decreasing order.
    pub h_list: Vec<f64>,
    /// Evaluation times; the last one is the simulation horizon.
    pub times: Vec<f64>,
    /// Initial sample count.
    pub samples: usize,
    /// Doubling cap while `half_width >= 0.1 M` at the largest `h`.
    pub max_samples: usize,
    pub seed: u64,
    /// Step sizes whose strong order is fitted, as an inclusive range.
    pub fit_range: (f64, f64),
    /// Time window averaged over by pairwise orders.
    pub order_window: Option<(f64, f64)>,
}

fn halvings(start: f64, count: i32) -> Vec<f64> {
    (0..count).map(|k| start * 0.5f64.powi(k)).collect()
}

fn log_spaced(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    let (a, b) = (hi.ln(), lo.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Inclusive range covering the `count` smallest of `hs`.
pub fn smallest_h_range(hs: &[f64], count: usize) -> (f64, f64) {
    let mut sorted = hs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let top = sorted[count.min(sorted.len()) - 1];
    (0.0, top * (1.0 + 1e-9))
}

/// Inclusive range covering the larger half of `hs`.
pub fn larger_half_range(hs: &[f64]) -> (f64, f64) {
    let mut sorted = hs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[sorted.len() / 2];
    (lo * (1.0 - 1e-9), f64::INFINITY)
}

impl ExperimentSpec {
    /// The full-size study.
    pub fn paper(experiment: Experiment) -> Self {
        match experiment {
            Experiment::BirthDeath | Experiment::Dimerization => {
                let h_list = halvings(1.0, 7);
                ExperimentSpec {
                    experiment,
                    methods: vec![SplitMethod::Lie, SplitMethod::Strang],
                    fit_range: smallest_h_range(&h_list, 3),
                    h_list,
                    times: vec![100.0],
                    samples: 10_000,
                    max_samples: 40_000,
                    seed: 1,
                    order_window: None,
                }
            }
            Experiment::Bimolecular => {
                let h_list = halvings(4.0, 6);
                ExperimentSpec {
                    experiment,
                    methods: vec![SplitMethod::Lie],
                    fit_range: smallest_h_range(&h_list, 3),
                    h_list,
                    times: (1..=64).map(|i| 4.0 * i as f64).collect(),
                    samples: 4_000,
                    max_samples: 16_000,
                    seed: 1,
                    order_window: Some((128.0, 256.0)),
                }
            }
            Experiment::IllPosed => {
                let h_list = log_spaced(1e-2, 1e-4, 9);
                ExperimentSpec {
                    experiment,
                    methods: vec![SplitMethod::Lie],
                    fit_range: larger_half_range(&h_list),
                    h_list,
                    times: vec![1.0],
                    samples: 4_000,
                    max_samples: 16_000,
                    seed: 1,
                    order_window: None,
                }
            }
        }
    }

    /// A reduced run for smoke tests.
    pub fn quick(experiment: Experiment) -> Self {
        let mut spec = ExperimentSpec::paper(experiment);
        spec.max_samples = 0;
        match experiment {
            Experiment::BirthDeath | Experiment::Dimerization => {
                spec.h_list = halvings(1.0, 4);
                spec.fit_range = smallest_h_range(&spec.h_list, 3);
                spec.samples = 400;
            }
            Experiment::Bimolecular => {
                spec.h_list = halvings(4.0, 4);
                spec.times = (1..=16).map(|i| 16.0 * i as f64).collect();
                spec.fit_range = smallest_h_range(&spec.h_list, 3);
                spec.samples = 200;
            }
            Experiment::IllPosed => {
                spec.h_list = log_spaced(1e-2, 1e-3, 4);
                spec.fit_range = larger_half_range(&spec.h_list);
                spec.samples = 200;
            }
        }
        spec
    }

    fn validate(&self) -> Result<()> {
        if self.h_list.is_empty() || self.h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidArgument(
                "h values must be positive and finite".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no split method selected".into()));
        }
        if self.times.is_empty() {
            return Err(Error::InvalidArgument("no evaluation time".into()));
        }
        Ok(())
    }

    fn kernels(&self) -> Result<Vec<KernelSpec>> {
        let mut specs = Vec::new();
        for &m in &self.methods {
            for &h in &self.h_list {
                specs.push(KernelSpec::for_method(m, h)?);
            }
        }
        Ok(specs)
    }
}

/// Runs a coupled ensemble, doubling the sample count up to the cap while
/// the half-width at the largest `h` is at least 10% of `M`.
fn sized_ensemble(model: &Model, spec: &ExperimentSpec) -> Result<CoupledEnsemble> {
    spec.validate()?;
    let partition = model.require_partition()?;
    let mut setup = CoupledSetup::new(&model.network, partition, &model.initial_state);
    setup.options = model.sim_options();
    let kernels = spec.kernels()?;
    let plan = StreamSeedPlan::new(spec.seed);
    let mut n = spec.samples;
    loop {
        let ens = CoupledEnsemble::run(&setup, &kernels, &spec.times, n, &plan)?;
        let last = spec.times.len() - 1;
        let e = ens.strong(0, last, &ErrorNorm::Euclidean);
        if e.half_width < 0.1 * e.mean || 2 * n > spec.max_samples {
            return Ok(ens);
        }
        n *= 2;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakRow {
    pub method: SplitMethod,
    pub h: f64,
    pub observable: Observable,
    pub estimate: WeakEstimate,
}

/// Strong and weak errors at one evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub spec: ExperimentSpec,
    pub model: String,
    pub parameters: BTreeMap<String, f64>,
    pub t_eval: f64,
    pub strong: Vec<(SplitMethod, ConvergenceTable)>,
    pub weak: Vec<WeakRow>,
    /// Strong (root-mean-square) order per method over `spec.fit_range`.
    pub orders: Vec<(SplitMethod, f64)>,
}

impl ConvergenceReport {
    pub fn table(&self, method: SplitMethod) -> Option<&ConvergenceTable> {
        self.strong
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, t)| t)
    }

    pub fn order(&self, method: SplitMethod) -> Option<f64> {
        self.orders
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, q)| *q)
    }
}

fn convergence_study(model: &Model, spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    let ens = sized_ensemble(model, spec)?;
    let t = spec.times.len() - 1;
    let per_method = spec.h_list.len();
    let mut strong = Vec::new();
    let mut weak = Vec::new();
    let mut orders = Vec::new();
    for (mi, &method) in spec.methods.iter().enumerate() {
        let rows = ens.strong_table(t, &ErrorNorm::Euclidean).rows
            [mi * per_method..(mi + 1) * per_method]
            .to_vec();
        let table = ConvergenceTable { rows };
        if let Ok(q) = table.strong_order(spec.fit_range) {
            orders.push((method, q));
        }
        strong.push((method, table));
        for hi in 0..per_method {
            let k = mi * per_method + hi;
            for species in 0..model.network.species_count() {
                for observable in [
                    Observable::FirstFactorial { species },
                    Observable::SecondFactorial { species },
                ] {
                    weak.push(WeakRow {
                        method,
                        h: spec.h_list[hi],
                        observable,
                        estimate: ens.weak(k, t, observable, DEFAULT_UNCERTAINTY_MULTIPLIER),
                    });
                }
            }
        }
    }
    Ok(ConvergenceReport {
        spec: spec.clone(),
        model: model.name.clone(),
        parameters: model.parameters.clone(),
        t_eval: spec.times[t],
        strong,
        weak,
        orders,
    })
}

fn check_experiment(spec: &ExperimentSpec, expected: &[Experiment]) -> Result<()> {
    if expected.contains(&spec.experiment) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "spec is for experiment {}",
            spec.experiment
        )))
    }
}

/// Strong Lie/Strang tables and weak `f₁`, `f₂` errors for birth-death.
pub fn run_birth_death(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    check_experiment(spec, &[Experiment::BirthDeath])?;
    convergence_study(&builtin("birth_death")?, spec)
}

/// Same study as [`run_birth_death`] on the dimerization model.
pub fn run_dimerization(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    check_experiment(spec, &[Experiment::Dimerization])?;
    convergence_study(&builtin("dimerization")?, spec)
}

/// Strong and weak errors of an arbitrary model with a split.
pub fn run_convergence(model: &Model, spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    convergence_study(model, spec)
}

/// Moments of `U = X₁ - X₂` over the exact runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceMoments {
    pub t: f64,
    /// Sample mean, variance and half-width of `U_t`.
    pub u: ErrorEstimate,
    /// Standard error of the sample variance.
    pub variance_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BimolecularReport {
    pub spec: ExperimentSpec,
    pub error_vs_time: Vec<TimeSeriesRow>,
    pub pair_orders: Vec<PairOrder>,
    pub difference: Vec<DifferenceMoments>,
    pub k1: f64,
    pub initial_difference: f64,
}

/// Standard error of the unbiased sample variance, from the sample fourth
/// central moment.
fn variance_standard_error(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    ((m4 - (n - 3.0) / (n - 1.0) * m2 * m2) / n).max(0.0).sqrt()
}

/// Mean-square error against time for every `h`, pairwise orders averaged
/// over `spec.order_window` and the law of `X₁ - X₂`.
pub fn run_bimolecular(spec: &ExperimentSpec) -> Result<BimolecularReport> {
    check_experiment(spec, &[Experiment::Bimolecular])?;
    let model = builtin("bimolecular")?;
    let ens = sized_ensemble(&model, spec)?;
    let error_vs_time = strong_error_over_time(&ens, &ErrorNorm::Euclidean);
    let window = spec.order_window.unwrap_or((0.0, f64::INFINITY));
    let pair_orders = windowed_pair_orders(&ens, &ErrorNorm::Euclidean, window)?;
    let difference = (0..spec.times.len())
        .map(|ti| {
            let u: Vec<f64> = (0..ens.samples())
                .map(|i| {
                    let x = ens.exact_state(i, ti);
                    x[0] as f64 - x[1] as f64
                })
                .collect();
            DifferenceMoments {
                t: spec.times[ti],
                u: ErrorEstimate::from_samples(&u).expect("ensemble is non-empty"),
                variance_se: variance_standard_error(&u),
            }
        })
        .collect();
    let x0 = model.initial_state.counts();
    Ok(BimolecularReport {
        spec: spec.clone(),
        error_vs_time,
        pair_orders,
        difference,
        k1: model.parameter("k1")?,
        initial_difference: x0[0] as f64 - x0[1] as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IllPosedReport {
    pub spec: ExperimentSpec,
    pub table: ConvergenceTable,
    /// Strong order over `spec.fit_range`.
    pub order: f64,
    /// Samples whose split run hit the stop threshold, per `h`.
    pub stopped: Vec<usize>,
}

/// Small-`h` sweep on the stopped ill-posed model.
pub fn run_illposed(spec: &ExperimentSpec) -> Result<IllPosedReport> {
    check_experiment(spec, &[Experiment::IllPosed])?;
    let model = builtin("illposed")?;
    let threshold = model.stop_threshold.unwrap_or(f64::INFINITY);
    let ens = sized_ensemble(&model, spec)?;
    let t = spec.times.len() - 1;
    let table = ConvergenceTable {
        rows: ens.strong_table(t, &ErrorNorm::Euclidean).rows[..spec.h_list.len()].to_vec(),
    };
    let order = table.strong_order(spec.fit_range)?;
    let stopped = (0..spec.h_list.len())
        .map(|k| {
            (0..ens.samples())
                .filter(|&i| ens.split_state(i, k, t)[0] as f64 > threshold)
                .count()
        })
        .collect();
    Ok(IllPosedReport {
        spec: spec.clone(),
        table,
        order,
        stopped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Convergence(ConvergenceReport),
    Bimolecular(BimolecularReport),
    IllPosed(IllPosedReport),
}

pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    Ok(match spec.experiment {
        Experiment::BirthDeath => Report::Convergence(run_birth_death(spec)?),
        Experiment::Dimerization => Report::Convergence(run_dimerization(spec)?),
        Experiment::Bimolecular => Report::Bimolecular(run_bimolecular(spec)?),
        Experiment::IllPosed => Report::IllPosed(run_illposed(spec)?),
    })
}

fn write_metadata(
    out: &mut impl Write,
    spec: &ExperimentSpec,
    samples: usize,
    model: &str,
    parameters: &BTreeMap<String, f64>,
) -> Result<()> {
    writeln!(out, "# experiment={}", spec.experiment)?;
    writeln!(out, "# model={model}")?;
    writeln!(out, "# seed={}", spec.seed)?;
    writeln!(out, "# samples={samples}")?;
    for (k, v) in parameters {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

fn csv_file(
    dir: &Path,
    name: &str,
    written: &mut Vec<PathBuf>,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let path = dir.join(name);
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(&path).map_err(io)?);
    body(&mut out)?;
    out.flush().map_err(io)?;
    written.push(path);
    Ok(())
}

/// Writes the CSV files of a report into `dir` and returns their paths.
pub fn write_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    match report {
        Report::Convergence(r) => {
            let samples = r
                .strong
                .first()
                .and_then(|(_, t)| t.rows.first())
                .map_or(0, |row| row.estimate.samples);
            let header = |out: &mut BufWriter<File>| -> Result<()> {
                write_metadata(out, &r.spec, samples, &r.model, &r.parameters)?;
                writeln!(out, "# t_eval={}", r.t_eval)?;
                Ok(())
            };
            for (method, table) in &r.strong {
                csv_file(
                    dir,
                    &format!("{}_strong_{method}.csv", r.model),
                    &mut written,
                    |out| {
                        header(out)?;
                        table.write_csv(out)
                    },
                )?;
            }
            csv_file(dir, &format!("{}_weak.csv", r.model), &mut written, |out| {
                header(out)?;
                writeln!(
                    out,
                    "method,h,observable,species,estimate,half_width,sign_determined"
                )?;
                for w in &r.weak {
                    let species = match w.observable {
                        Observable::FirstFactorial { species }
                        | Observable::SecondFactorial { species } => species,
                    };
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        w.method,
                        w.h,
                        w.observable.name(),
                        species,
                        w.estimate.estimate,
                        w.estimate.half_width,
                        w.estimate.sign_determined()
                    )?;
                }
                Ok(())
            })?;
            csv_file(
                dir,
                &format!("{}_orders.csv", r.model),
                &mut written,
                |out| {
                    header(out)?;
                    writeln!(
                        out,
                        "# h_range={}..{}",
                        r.spec.fit_range.0, r.spec.fit_range.1
                    )?;
                    writeln!(out, "method,strong_order")?;
                    for (m, q) in &r.orders {
                        writeln!(out, "{m},{q}")?;
                    }
                    Ok(())
                },
            )?;
        }
        Report::Bimolecular(r) => {
            let model = builtin("bimolecular")?;
            let samples = r
                .error_vs_time
                .first()
                .map_or(0, |row| row.estimate.samples);
            let header = |out: &mut BufWriter<File>| {
                write_metadata(out, &r.spec, samples, &model.name, &model.parameters)
            };
            csv_file(dir, "bimolecular_error_vs_time.csv", &mut written, |out| {
                header(out)?;
                write_time_series_csv(&r.error_vs_time, out)
            })?;
            csv_file(dir, "bimolecular_pair_orders.csv", &mut written, |out| {
                header(out)?;
                if let Some((a, b)) = r.spec.order_window {
                    writeln!(out, "# window={a}..{b}")?;
                }
                write_pair_orders_csv(&r.pair_orders, out)
            })?;
            csv_file(dir, "bimolecular_difference.csv", &mut written, |out| {
                header(out)?;
                writeln!(out, "t,mean_u,mean_half_width,var_u,var_se,expected_var")?;
                for d in &r.difference {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        d.t,
                        d.u.mean,
                        d.u.half_width,
                        d.u.variance,
                        d.variance_se,
                        2.0 * r.k1 * d.t
                    )?;
                }
                Ok(())
            })?;
        }
        Report::IllPosed(r) => {
            let model = builtin("illposed")?;
            let samples = r.table.rows.first().map_or(0, |row| row.estimate.samples);
            csv_file(dir, "illposed_strong.csv", &mut written, |out| {
                write_metadata(out, &r.spec, samples, &model.name, &model.parameters)?;
                writeln!(out, "# strong_order={}", r.order)?;
                writeln!(out, "h,M,S,N,half_width,stopped")?;
                for (row, stopped) in r.table.rows.iter().zip(&r.stopped) {
                    let e = &row.estimate;
                    writeln!(
                        out,
                        "{},{},{},{},{},{stopped}",
                        row.h, e.mean, e.spread, e.samples, e.half_width
                    )?;
                }
                Ok(())
            })?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_names() {
        for e in Experiment::ALL {
            assert_eq!(e.to_string().parse::<Experiment>().unwrap(), e);
            assert_eq!(e.model_name().parse::<Experiment>().unwrap(), e);
        }
        assert!("fig7".parse::<Experiment>().is_err());
    }

    #[test]
    fn h_ranges() {
        let hs = halvings(1.0, 7);
        let (lo, hi) = smallest_h_range(&hs, 3);
        assert_eq!(hs.iter().filter(|&&h| h >= lo && h <= hi).count(), 3);
        let ill = log_spaced(1e-2, 1e-4, 9);
        assert!((ill[0] - 1e-2).abs() < 1e-15 && (ill[8] - 1e-4).abs() < 1e-17);
        assert!((ill[4] - 1e-3).abs() < 1e-15);
        let (lo, hi) = larger_half_range(&ill);
        assert_eq!(ill.iter().filter(|&&h| h >= lo && h <= hi).count(), 5);
    }

    #[test]
    fn paper_specs_are_on_grid() {
        for e in Experiment::ALL {
            let spec = ExperimentSpec::paper(e);
            spec.validate().unwrap();
            if e != Experiment::IllPosed {
                for &h in &spec.h_list {
                    for &t in &spec.times {
                        assert!(KernelSpec::lie(h).unwrap().is_on_grid(t), "{e} h={h} t={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_experiment_is_rejected() {
        let spec = ExperimentSpec::quick(Experiment::Dimerization);
        assert!(run_birth_death(&spec).is_err());
        assert!(run_illposed(&spec).is_err());
    }

    #[test]
    fn variance_standard_error_of_two_point_law() {
        // ±1 with equal weight: m4 = m2² = 1, so SE² = (1 - (n-3)/(n-1)) / n.
        let v: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let expect = ((1.0 - 97.0 / 99.0) / 100.0f64).sqrt();
        assert!((variance_standard_error(&v) - expect).abs() < 1e-12);
    }
}
