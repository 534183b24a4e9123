use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jumpsplit::experiments::{self, Experiment, ExperimentSpec};
use jumpsplit::paths::dump_arrivals;
use jumpsplit::spatial::{flatten, reaction_diffusion_partition, Mesh};
use jumpsplit::stats::{strong_error_over_time, write_time_series_csv, Coupling};
use jumpsplit::{
    fit_assumption_constants, load_model, simulate_exact, simulate_split, CoupledEnsemble,
    CoupledSetup, ErrorNorm, KernelSpec, Model, Result, SplitMethod, SplitPartition, State,
    StreamSeedPlan,
};

#[derive(Parser)]
#[command(
    name = "jumpsplit",
    version,
    about = "Exact and split-step simulation of reaction networks on shared Poisson paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact trajectory as CSV rows (time, channel, state).
    Simulate(SimulateArgs),
    /// Split-step trajectory as CSV rows (time, channel, state).
    SimulateSplit(SplitArgs),
    /// Strong errors of coupled exact/split pairs.
    Converge(ConvergeArgs),
    /// Reaction-diffusion run on a line of cells.
    SpatialDemo(SpatialArgs),
    /// Benchmark studies on the bundled models.
    PaperExperiments(PaperArgs),
    /// First arrivals of each channel's Poisson path.
    Arrivals(ArrivalArgs),
    /// Channels, propensities at the initial state and fitted growth constants.
    InspectModel(InspectArgs),
}

#[derive(Args)]
struct Common {
    /// Bundled model name (birth_death, dimerization, bimolecular, illposed) or a JSON file.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory id inside the seed's stream plan.
    #[arg(long, default_value_t = 0)]
    trajectory: u64,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    t_end: f64,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    t_end: f64,
    /// Comma-separated channels of the first group; defaults to the model's split.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value = "lie")]
    method: SplitMethod,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    split: Option<String>,
    #[arg(long, default_value = "lie")]
    method: SplitMethod,
    /// Comma-separated step sizes.
    #[arg(long, default_value = "1,0.5,0.25,0.125")]
    h_list: String,
    #[arg(long)]
    t_eval: Option<f64>,
    /// Error-vs-time mode: `start:stop:step`.
    #[arg(long, conflicts_with = "t_eval")]
    t_grid: Option<String>,
    #[arg(long, default_value_t = 1000)]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Measure in the model's weighted norm instead of the Euclidean one.
    #[arg(long)]
    weighted: bool,
    /// Draw the exact runs from independent paths.
    #[arg(long)]
    independent: bool,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SpatialArgs {
    #[arg(long, default_value = "birth_death")]
    model: String,
    #[arg(long, default_value_t = 5)]
    cells: usize,
    /// Per-species diffusion constant (comma-separated); hop rate is `d / dx²`.
    #[arg(long, default_value = "1")]
    diffusion: String,
    #[arg(long, default_value_t = 1.0)]
    dx: f64,
    #[arg(long, default_value_t = 50.0)]
    t_end: f64,
    /// Sampling interval of the output.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    /// Split reactions from diffusion with this step; exact if omitted.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value = "lie")]
    method: SplitMethod,
    /// Put the model's initial state in every cell instead of only the first.
    #[arg(long)]
    spread: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct PaperArgs {
    /// bd, dim, bimol, illposed or all.
    experiment: String,
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ArrivalArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trajectory: u64,
    #[arg(long)]
    channels: usize,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    model: String,
    /// Scan radius in the weighted norm.
    #[arg(long, default_value_t = 1000.0)]
    radius: f64,
}

fn output(path: &str) -> Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(path).map_err(|e| jumpsplit::Error::Io(format!("{path}: {e}")))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| jumpsplit::Error::InvalidArgument(format!("bad {what} entry {s:?}")))
        })
        .collect()
}

fn partition(model: &Model, split: Option<&str>) -> Result<SplitPartition> {
    match split {
        Some(text) => {
            SplitPartition::from_first(model.network.channel_count(), parse_list(text, "split")?)
        }
        None => model.require_partition().cloned(),
    }
}

fn warn_off_grid(spec: &KernelSpec, t: f64) {
    if !spec.is_on_grid(t) {
        eprintln!(
            "warning: t = {t} is not a multiple of h = {}; the split state there is mid-step",
            spec.h()
        );
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let model = load_model(&args.common.model)?;
    let plan = StreamSeedPlan::new(args.common.seed);
    let mut paths = plan.derive_paths(args.common.trajectory, model.network.channel_count())?;
    let traj = simulate_exact(
        &model.network,
        &model.initial_state,
        args.t_end,
        &mut paths,
        &model.sim_options(),
    )?;
    let mut out = output(&args.common.out)?;
    traj.write_csv(&model.network, &mut out)?;
    out.flush()?;
    Ok(())
}

fn simulate_split_cmd(args: SplitArgs) -> Result<()> {
    let model = load_model(&args.common.model)?;
    let part = partition(&model, args.split.as_deref())?;
    let spec = KernelSpec::for_method(args.method, args.h)?;
    warn_off_grid(&spec, args.t_end);
    let plan = StreamSeedPlan::new(args.common.seed);
    let mut paths = plan.derive_paths(args.common.trajectory, model.network.channel_count())?;
    let traj = simulate_split(
        &model.network,
        &part,
        &spec,
        &model.initial_state,
        args.t_end,
        &mut paths,
        &model.sim_options(),
    )?;
    let mut out = output(&args.common.out)?;
    traj.write_csv(&model.network, &mut out)?;
    out.flush()?;
    Ok(())
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| jumpsplit::Error::InvalidArgument(format!("bad time grid {text:?}")))?;
    let [start, stop, step] = parts[..] else {
        return Err(jumpsplit::Error::InvalidArgument(
            "time grid must be start:stop:step".into(),
        ));
    };
    if !(step > 0.0 && start >= 0.0 && stop >= start) {
        return Err(jumpsplit::Error::InvalidArgument(format!(
            "bad time grid {text:?}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

fn converge(args: ConvergeArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let part = partition(&model, args.split.as_deref())?;
    let h_list: Vec<f64> = parse_list(&args.h_list, "h")?;
    let specs = h_list
        .iter()
        .map(|&h| KernelSpec::for_method(args.method, h))
        .collect::<Result<Vec<_>>>()?;
    let times = match (&args.t_grid, args.t_eval) {
        (Some(grid), _) => parse_grid(grid)?,
        (None, Some(t)) => vec![t],
        (None, None) => vec![model.parameter("t_end").unwrap_or(100.0)],
    };
    for spec in &specs {
        for &t in &times {
            warn_off_grid(spec, t);
        }
    }
    let mut setup = CoupledSetup::new(&model.network, &part, &model.initial_state);
    setup.options = model.sim_options();
    if args.weighted {
        setup.norm = ErrorNorm::Weighted(model.weights.clone());
    }
    if args.independent {
        setup.coupling = Coupling::Independent;
    }
    let ens = CoupledEnsemble::run(
        &setup,
        &specs,
        &times,
        args.n_samples,
        &StreamSeedPlan::new(args.seed),
    )?;
    let mut out = output(&args.out)?;
    writeln!(
        out,
        "# model={} method={} seed={} samples={}",
        model.name, args.method, args.seed, args.n_samples
    )?;
    if args.t_grid.is_some() {
        write_time_series_csv(&strong_error_over_time(&ens, &setup.norm), &mut out)?;
    } else {
        let table = ens.strong_table(0, &setup.norm);
        table.write_csv(&mut out)?;
        if let Ok(q) = table.strong_order((0.0, f64::INFINITY)) {
            eprintln!("strong order over all h: {q:.3}");
        }
    }
    out.flush()?;
    Ok(())
}

fn spatial_demo(args: SpatialArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let diffusion: Vec<f64> = parse_list(&args.diffusion, "diffusion")?;
    let diffusion = match diffusion.len() {
        1 => vec![diffusion[0]; model.network.species_count()],
        _ => diffusion,
    };
    let mesh = match &model.mesh {
        Some(m) => m.clone(),
        None => Mesh::line(args.cells, &diffusion, args.dx)?,
    };
    let spatial = flatten(&model.network, &mesh)?;
    let d = model.network.species_count();
    let mut x0 = vec![0u64; d * mesh.cells()];
    for j in 0..mesh.cells() {
        if j == 0 || args.spread {
            for i in 0..d {
                x0[spatial.species_index(i, j)] = model.initial_state[i];
            }
        }
    }
    let x0 = State::new(x0);
    let plan = StreamSeedPlan::new(args.seed);
    let mut paths = plan.derive_paths(0, spatial.flattened.channel_count())?;
    let options = jumpsplit::SimOptions::default();
    let traj = match args.h {
        Some(h) => {
            let spec = KernelSpec::for_method(args.method, h)?;
            let part = reaction_diffusion_partition(&spatial);
            simulate_split(
                &spatial.flattened,
                &part,
                &spec,
                &x0,
                args.t_end,
                &mut paths,
                &options,
            )?
        }
        None => simulate_exact(&spatial.flattened, &x0, args.t_end, &mut paths, &options)?,
    };
    let n = (args.t_end / args.dt + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * args.dt).collect();
    let states = traj.states_at(&spatial.flattened, &times)?;
    let mut out = output(&args.out)?;
    write!(out, "t")?;
    for j in 0..mesh.cells() {
        for i in 0..d {
            let name = model
                .network
                .species_name(i)
                .map_or(format!("x{i}"), str::to_string);
            write!(out, ",{name}@{j}")?;
        }
    }
    writeln!(out)?;
    for (t, s) in times.iter().zip(&states) {
        write!(out, "{t}")?;
        for v in s.iter() {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    eprintln!(
        "{} reaction channels, {} diffusion channels, {} events",
        spatial.reaction_channel_count(),
        spatial.diffusion_channel_count(),
        traj.event_count()
    );
    Ok(())
}

fn paper_experiments(args: PaperArgs) -> Result<()> {
    let selected: Vec<Experiment> = if args.experiment == "all" {
        Experiment::ALL.to_vec()
    } else {
        vec![args.experiment.parse()?]
    };
    for e in selected {
        let mut spec = if args.quick {
            ExperimentSpec::quick(e)
        } else {
            ExperimentSpec::paper(e)
        };
        if let Some(seed) = args.seed {
            spec.seed = seed;
        }
        if let Some(n) = args.samples {
            spec.samples = n;
            spec.max_samples = spec.max_samples.max(n);
        }
        eprintln!("running {e} with {} samples", spec.samples);
        let report = experiments::run(&spec)?;
        match &report {
            experiments::Report::Convergence(r) => {
                for (m, q) in &r.orders {
                    eprintln!("  {m}: strong order {q:.3}");
                }
            }
            experiments::Report::Bimolecular(r) => {
                for p in &r.pair_orders {
                    eprintln!("  h {} -> {}: order {:.3}", p.h_coarse, p.h_fine, p.order);
                }
            }
            experiments::Report::IllPosed(r) => eprintln!("  strong order {:.3}", r.order),
        }
        for path in experiments::write_report(&report, &args.out_dir)? {
            eprintln!("  wrote {}", path.display());
        }
    }
    Ok(())
}

fn arrivals(args: ArrivalArgs) -> Result<()> {
    let mut out = output(&args.out)?;
    dump_arrivals(
        &StreamSeedPlan::new(args.seed),
        args.trajectory,
        args.channels,
        args.count,
        &mut out,
    )?;
    out.flush()?;
    Ok(())
}

fn inspect(args: InspectArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let net = &model.network;
    println!(
        "model {}: {} species, {} channels",
        model.name,
        net.species_count(),
        net.channel_count()
    );
    let w0 = net.propensities(&model.initial_state);
    for (r, w) in w0.iter().enumerate() {
        println!(
            "  {r}: {:<16} stoich {:?}  w(x0) = {w}",
            net.channel_name(r).unwrap_or("-"),
            net.stoich_column(r)
        );
    }
    if let Some(p) = &model.partition {
        println!("split: first {:?}, second {:?}", p.first(), p.second());
    }
    let fit = fit_assumption_constants(net, &model.weights, args.radius)?;
    println!(
        "growth constants on radius {}: A = {}, alpha = {}, B = {}, beta1 = {}, beta2 = {}",
        fit.radius, fit.a, fit.alpha, fit.b, fit.beta1, fit.beta2
    );
    println!("lipschitz: {:?}", fit.lipschitz);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::SimulateSplit(a) => simulate_split_cmd(a),
        Command::Converge(a) => converge(a),
        Command::SpatialDemo(a) => spatial_demo(a),
        Command::PaperExperiments(a) => paper_experiments(a),
        Command::Arrivals(a) => arrivals(a),
        Command::InspectModel(a) => inspect(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
