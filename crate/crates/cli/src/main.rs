mod config;
mod output;
mod pipeline;
mod table;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hvqe::basis::Operator;
use hvqe::hamiltonian::{parse_integrals, HubbardSpec};
use hvqe::optimize::HubbardProblem;
use hvqe::resources::{
    chem_budget, gate_count, hubbard_budget, min_anneal_ratio, AnnealSearchConfig, GateModel,
    DEFAULT_GATE_TIME,
};
use serde::Serialize;

use config::{Noise, Overrides, ProblemConfig};

#[derive(Parser)]
#[command(
    name = "hvqe",
    version,
    about = "Run and tabulate variational simulation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: RunFlags,
    },
    /// Run several configs, each with one or more seeds.
    Sweep {
        /// Config files, or directories whose `*.toml` files are all run.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Runs per config with seeds `seed, seed + 1, ...`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Experiments run concurrently.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        common: RunFlags,
    },
    /// Aggregate the result files of a directory into a table.
    Table {
        #[arg(long)]
        dir: PathBuf,
        /// CSV destination; defaults to `<dir>/table.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample and gate budgets.
    Budget {
        #[command(subcommand)]
        kind: BudgetKind,
        /// Also write the JSON report here.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Smallest T/dt for which a Trotterized anneal reaches a target overlap.
    Anneal(AnnealArgs),
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    noise: Option<Noise>,
    /// Continue from a checkpoint left by an interrupted run.
    #[arg(long)]
    resume: bool,
}

#[derive(Subcommand)]
enum BudgetKind {
    /// Samples per term for a Hubbard energy per site.
    Hubbard {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        epsilon: f64,
        /// Measure one site per run instead of all in parallel.
        #[arg(long)]
        serial: bool,
        /// Ansatz steps, to add gate counts and wall-clock time.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GATE_TIME)]
        gate_time: f64,
    },
    /// Samples for a molecular energy.
    Chem {
        /// Coefficients are taken from the non-diagonal terms of this file.
        #[arg(long, conflicts_with = "norm", required_unless_present = "norm")]
        fcidump: Option<PathBuf>,
        /// Sum of the absolute coefficients.
        #[arg(long)]
        norm: Option<f64>,
        #[arg(long)]
        epsilon: f64,
    },
    /// Gates per run of a ladder circuit.
    Gates {
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        steps: usize,
    },
}

#[derive(Args)]
struct AnnealArgs {
    /// Take the ladder from an experiment config.
    #[arg(long, conflicts_with = "sites", required_unless_present = "sites")]
    config: Option<PathBuf>,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 2.0)]
    u: f64,
    #[arg(long)]
    flux: bool,
    #[arg(long, default_value_t = 0.99)]
    target: f64,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_factor: Option<f64>,
    #[arg(long)]
    t_count: Option<usize>,
    #[arg(long)]
    refinements: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes to stdout, treating a closed pipe as success.
fn print(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
    {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    print(&format!("{text}\n"))?;
    if let Some(path) = out {
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn overrides(flags: &RunFlags) -> Overrides {
    Overrides {
        seed: flags.seed,
        noise: flags.noise,
        out: flags.out.clone(),
        name_suffix: None,
    }
}

fn run_loaded(
    path: &Path,
    cfg: config::ExperimentConfig,
    ov: &Overrides,
    resume: bool,
) -> Result<output::ResultFile> {
    let cfg = cfg
        .resolve(path, ov)
        .with_context(|| format!("config {}", path.display()))?;
    output::execute(&cfg, resume).with_context(|| format!("running {}", path.display()))
}

fn run_one(path: &Path, ov: &Overrides, resume: bool) -> Result<output::ResultFile> {
    run_loaded(path, config::load(path)?, ov, resume)
}

/// Run `k` of a config in a sweep.
fn sweep_job(path: &Path, k: u64, seeds: u64, flags: &RunFlags) -> Result<output::ResultFile> {
    let cfg = config::load(path)?;
    let seed = flags.seed.unwrap_or(cfg.seed) + k;
    let mut ov = overrides(flags);
    ov.seed = Some(seed);
    if seeds > 1 {
        ov.name_suffix = Some(format!("-s{seed}"));
    }
    run_loaded(path, cfg, &ov, flags.resume)
}

fn summary(r: &output::ResultFile) -> String {
    let row = &r.row;
    let mut s = format!(
        "{}: {} S={} ΔE={:.3e} P={:.5} evals={}",
        row.name, row.problem, row.steps, row.error, row.overlap, row.evaluations
    );
    if row.samples > 0 {
        s.push_str(&format!(" samples={:.3e}", row.samples as f64));
    }
    s.push_str(&format!(" ({:.1} s)", row.runtime_s));
    s
}

fn collect_configs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            found.retain(|f| f.extension().is_some_and(|e| e == "toml"));
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        bail!("no config files found");
    }
    Ok(out)
}

fn sweep(configs: &[PathBuf], seeds: u64, workers: usize, flags: &RunFlags) -> Result<()> {
    let files = collect_configs(configs)?;
    let seeds = seeds.max(1);
    let jobs: Vec<(&PathBuf, u64)> = files
        .iter()
        .flat_map(|f| (0..seeds).map(move |k| (f, k)))
        .collect();
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(path, k)) = jobs.get(i) else { break };
                match sweep_job(path, k, seeds, flags) {
                    Ok(r) => println!("{}", summary(&r)),
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        failures
                            .lock()
                            .unwrap_or_else(|p| p.into_inner())
                            .push(path.display().to_string());
                    }
                }
            });
        }
    });
    let failures = failures.into_inner().unwrap_or_else(|p| p.into_inner());
    if !failures.is_empty() {
        bail!(
            "{} of {} runs failed: {}",
            failures.len(),
            jobs.len(),
            failures.join(", ")
        );
    }
    Ok(())
}

fn table(dir: &Path, out: Option<&Path>) -> Result<()> {
    let results = table::load_results(dir)?;
    if results.is_empty() {
        eprintln!("warning: no result files in {}", dir.display());
    }
    let t = table::aggregate(&results)?;
    print(&t.render())?;
    let csv = out.map_or_else(|| dir.join("table.csv"), Path::to_path_buf);
    t.write_csv(&csv)
}

fn budget(kind: &BudgetKind, out: Option<&Path>) -> Result<()> {
    match *kind {
        BudgetKind::Hubbard {
            t,
            u,
            sites,
            epsilon,
            serial,
            steps,
            gate_time,
        } => {
            let mut r = hubbard_budget(t, u, sites, epsilon, !serial)?;
            if let Some(s) = steps {
                r = r.with_runtime(gate_count(sites, s), gate_time);
            }
            emit(&r, out)
        }
        BudgetKind::Chem {
            ref fcidump,
            norm,
            epsilon,
        } => {
            let coefficients = match (fcidump, norm) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let chem = parse_integrals(&text)
                        .with_context(|| format!("parsing {}", path.display()))?;
                    chem.terms()
                        .iter()
                        .filter(|t| {
                            !matches!(t.op, Operator::Number { .. } | Operator::PairDensity { .. })
                        })
                        .map(|t| t.coefficient)
                        .collect()
                }
                (None, Some(n)) => vec![n],
                (None, None) => bail!("give --fcidump or --norm"),
            };
            emit(&chem_budget(&coefficients, epsilon)?, out)
        }
        BudgetKind::Gates { sites, steps } => {
            #[derive(Serialize)]
            struct Gates {
                sites: usize,
                steps: usize,
                gates: f64,
                model: GateModel,
                assumptions: Vec<String>,
            }
            let model = GateModel::default();
            emit(
                &Gates {
                    sites,
                    steps,
                    gates: model.gates(sites, steps),
                    model,
                    assumptions: model.assumptions(),
                },
                out,
            )
        }
    }
}

fn anneal(args: &AnnealArgs) -> Result<()> {
    let (spec, sector) = match (&args.config, args.sites) {
        (Some(path), _) => {
            let cfg = config::load(path)?;
            let spec = cfg.problem.hubbard_spec().with_context(|| {
                format!("{} does not describe a Hubbard ladder", path.display())
            })?;
            let sector = match cfg.problem {
                ProblemConfig::Hubbard { sector, .. } => sector,
                ProblemConfig::Chemistry { .. } => None,
            };
            (spec, sector)
        }
        (None, Some(n)) => (
            HubbardSpec::new(n, args.t, args.u).with_flux(args.flux),
            None,
        ),
        (None, None) => bail!("give --config or --sites"),
    };
    let d = AnnealSearchConfig::default();
    let search = AnnealSearchConfig {
        t_min: args.t_min.unwrap_or(d.t_min),
        t_factor: args.t_factor.unwrap_or(d.t_factor),
        t_count: args.t_count.unwrap_or(d.t_count),
        refinements: args.refinements.unwrap_or(d.refinements),
        max_steps: args.max_steps.unwrap_or(d.max_steps),
    };
    let problem = HubbardProblem::new(spec, sector)?;
    let result = min_anneal_ratio(&problem, args.target, &search)?;
    #[derive(Serialize)]
    struct Report<'a> {
        version: String,
        spec: HubbardSpec,
        search: AnnealSearchConfig,
        #[serde(flatten)]
        result: &'a hvqe::resources::AnnealSearch,
    }
    emit(
        &Report {
            version: output::version(),
            spec,
            search,
            result: &result,
        },
        args.out.as_deref(),
    )?;
    if result.ratio.is_none() {
        eprintln!(
            "warning: no anneal on the grid reached overlap {}",
            args.target
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config, common } => {
            let r = run_one(config, &overrides(common), common.resume)?;
            println!("{}", summary(&r));
            Ok(())
        }
        Command::Sweep {
            configs,
            seeds,
            workers,
            common,
        } => sweep(configs, *seeds, *workers, common),
        Command::Table { dir, out } => table(dir, out.as_deref()),
        Command::Budget { kind, out } => budget(kind, out.as_deref()),
        Command::Anneal(args) => anneal(args),
    }
}
