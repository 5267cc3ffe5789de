use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use subanneal_bench::compare::write_results_csv;
use subanneal_bench::ingest::write_csv;
use subanneal_bench::*;
use subanneal_core::{
    run, run_source, AnnealAction, AnnealSchedule, Budget, HyperGrid, InitialState, MixtureModel, PacedAnneal,
    PitmanYorParams, RunOptions, SeedStreams, Strategy,
};
use subanneal_toys::bimodal::{sweep, SweepConfig};
use subanneal_toys::urns::mixing::final_state_histogram;
use subanneal_toys::urns::{bootstrap_tvd_se, Binning, UrnModel, UrnModelParams, UrnStrategy};

#[derive(Parser)]
#[command(name = "subanneal", version, about = "Subsample-annealed inference for Pitman-Yor mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one chain on a dataset and save the final state.
    Fit(FitArgs),
    /// Compare strategies by crossvalidated held-out score.
    Bench(BenchArgs),
    /// Two-urn toy: exact posterior, final-state histograms and TVDs.
    ToyUrns(ToyUrnsArgs),
    /// Two-mode toy: anneal bound and cold time over a parameter sweep.
    ToyBimodal(ToyBimodalArgs),
    /// Write the action stream of a schedule.
    ScheduleDump(ScheduleDumpArgs),
    /// Sample a dataset from a known Pitman-Yor mixture.
    Synth(SynthArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Headed CSV file.
    #[arg(long)]
    data: PathBuf,
    /// TOML schema; inferred from the data when absent.
    #[arg(long)]
    schema: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self) -> Result<ingest::Ingested> {
        let source = match &self.schema {
            Some(p) => SchemaSource::Declared(read_toml(p)?),
            None => SchemaSource::Infer,
        };
        Ok(ingest_csv(&self.data, &source)?)
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "anneal")]
    strategy: Strategy,
    #[arg(long, conflicts_with = "budget_assigns", required_unless_present = "budget_assigns")]
    budget_secs: Option<f64>,
    #[arg(long)]
    budget_assigns: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip hyperparameter inference.
    #[arg(long)]
    no_hyper: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// TOML benchmark config; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    /// Budgets such as `1s,3s,10s` (seconds) or `50000a` (assignments).
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<BudgetSpec>>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Name used for score normalization; defaults to the file stem.
    #[arg(long)]
    dataset_name: Option<String>,
    /// Results CSV; a JSON summary is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ToyUrnsArgs {
    #[arg(long, default_value_t = 80)]
    red: u32,
    #[arg(long, default_value_t = 120)]
    blue: u32,
    #[arg(long, default_value_t = 0.45)]
    p: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Assignments per ball.
    #[arg(long, default_value_t = 10.0)]
    budget_factor: f64,
    #[arg(long, default_value_t = 10_000)]
    chains: usize,
    /// Intrinsic bins per axis for the binned TVD.
    #[arg(long, default_value_t = 20)]
    bins: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ToyBimodalArgs {
    /// TOML sweep config; the built-in 27-point grid when absent.
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScheduleDumpArgs {
    #[arg(long)]
    strategy: Strategy,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long)]
    hyper: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML generator config; defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct FitOutput {
    strategy: String,
    seed: u64,
    budget: Budget,
    dataset_fingerprint: String,
    assigns: u64,
    completion_assigns: u64,
    hyper_sweeps: u64,
    elapsed_secs: f64,
    joint_log_prob: f64,
    n_clusters: usize,
    labels: Vec<Option<usize>>,
    model: MixtureModel,
}

fn fit(a: FitArgs) -> Result<()> {
    let data = a.data.load()?.dataset;
    if a.strategy == Strategy::Custom {
        bail!("fit needs a built-in strategy");
    }
    let streams = SeedStreams::new(a.seed);
    let mut model = MixtureModel::default_for(&data, PitmanYorParams::crp(1.0)?);
    let grid = HyperGrid::default_for(&data);
    grid.draw_initial(&mut model, &mut streams.stream("hyper-init", 0))?;
    let grid = (!a.no_hyper).then_some(&grid);
    let mut rng = streams.stream("fit", 0);
    let n = data.n_rows();
    let opts = RunOptions::default();
    let (budget, outcome) = match (a.budget_secs, a.budget_assigns) {
        (Some(s), _) => {
            let budget = Budget::secs(s);
            let outcome = if a.strategy == Strategy::AnnealSubsample {
                let mut src = PacedAnneal::new(n, s, 1.0)?.with_hyper(grid.is_some());
                run_source(&mut src, InitialState::Empty, &data, model, grid, &mut rng, budget, &opts)?
            } else {
                let sched = AnnealSchedule::build(a.strategy, n, (1usize << 40) / n.max(1))?.with_hyper(grid.is_some());
                run(&sched, &data, model, grid, &mut rng, budget, &opts)?
            };
            (budget, outcome)
        }
        (None, Some(k)) => {
            let budget = Budget::assigns(k);
            let sched = if a.strategy == Strategy::AnnealSubsample {
                AnnealSchedule::anneal_with_assign_budget(n, k)?
            } else {
                AnnealSchedule::build(a.strategy, n, k.div_ceil(n as u64).max(1) as usize)?
            }
            .with_hyper(grid.is_some());
            (budget, run(&sched, &data, model, grid, &mut rng, budget, &opts)?)
        }
        (None, None) => bail!("give --budget-secs or --budget-assigns"),
    };
    let out = FitOutput {
        strategy: a.strategy.name().into(),
        seed: a.seed,
        budget,
        dataset_fingerprint: fingerprint(&data),
        assigns: outcome.assigns,
        completion_assigns: outcome.completion_assigns,
        hyper_sweeps: outcome.hyper_sweeps,
        elapsed_secs: outcome.elapsed_secs,
        joint_log_prob: outcome.state.joint_log_prob(&outcome.model),
        n_clusters: outcome.state.n_clusters(),
        labels: outcome.state.canonical_labels(),
        model: outcome.model,
    };
    write_json(&a.out, &out)
}

fn bench(a: BenchArgs) -> Result<()> {
    let data = a.data.load()?.dataset;
    let mut cfg: CompareConfig = match &a.config {
        Some(p) => read_toml(p)?,
        None => CompareConfig::default(),
    };
    if let Some(s) = a.strategies {
        cfg.strategies = s;
    }
    if let Some(b) = a.budgets {
        cfg.budgets = b;
    }
    if let Some(c) = a.chains {
        cfg.chains = c;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let name = a.dataset_name.unwrap_or_else(|| {
        a.data
            .data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".into())
    });
    let result = compare_strategies(&data, &name, &cfg)?;
    write_results_csv(&a.out, &result)?;
    write_json(&a.out.with_extension("json"), &result.cells)?;
    for c in &result.cells {
        println!(
            "{:12} {:>8}  mean {:+.3}  var {:.3}  min {:+.3}  max {:+.3}",
            c.strategy, c.budget, c.mean, c.variance, c.min, c.max
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct UrnSummary {
    strategy: String,
    assigns: u64,
    tvd_exact: f64,
    tvd_binned: f64,
    tvd_binned_se: f64,
}

fn toy_urns(a: ToyUrnsArgs) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    let params = UrnModelParams::new(a.p, a.alpha, a.red, a.blue)?;
    let model = UrnModel::new(params);
    let post = model.exact_posterior();
    let mut w = csv::Writer::from_path(a.out.join("posterior.csv"))?;
    w.write_record(["r1", "b1", "prob"])?;
    for (i, p) in post.probs.iter().enumerate() {
        let c = post.counts_at(i);
        w.write_record([c.r1.to_string(), c.b1.to_string(), format!("{p:e}")])?;
    }
    w.flush()?;

    let streams = SeedStreams::new(a.seed);
    let binning = Binning::Intrinsic { bx: a.bins, by: a.bins };
    let binned_ref = binning.bin_posterior(&post, &params);
    let assigns = (a.budget_factor * params.n() as f64).round() as u64;
    let mut hist_out = csv::Writer::from_path(a.out.join("histograms.csv"))?;
    hist_out.write_record(["strategy", "r1", "b1", "count"])?;
    let mut summary = Vec::new();
    for s in UrnStrategy::ALL {
        let h = final_state_histogram(s, &model, assigns, a.chains, Binning::Exact, &streams, s.name())?;
        let mut binned = subanneal_toys::urns::Histogram::new(binned_ref.len());
        for (i, &c) in h.counts.iter().enumerate() {
            let cell = post.counts_at(i);
            if c > 0 {
                hist_out.write_record([s.name().to_string(), cell.r1.to_string(), cell.b1.to_string(), c.to_string()])?;
            }
            binned.counts[binning.bin(cell, &params)] += c;
            binned.total += c;
        }
        let se = bootstrap_tvd_se(&binned, &binned_ref, 200, &mut streams.stream("bootstrap", 0))?;
        let row = UrnSummary {
            strategy: s.name().into(),
            assigns: if s == UrnStrategy::Sequential { params.n() as u64 } else { assigns },
            tvd_exact: h.tvd_to(&post.probs)?,
            tvd_binned: binned.tvd_to(&binned_ref)?,
            tvd_binned_se: se,
        };
        println!(
            "{:18} TVD exact {:.4}  binned {:.4} +- {:.4}",
            row.strategy, row.tvd_exact, row.tvd_binned, row.tvd_binned_se
        );
        summary.push(row);
    }
    hist_out.flush()?;
    write_json(&a.out.join("tvd.json"), &summary)
}

fn toy_bimodal(a: ToyBimodalArgs) -> Result<()> {
    let cfg: SweepConfig = match &a.sweep {
        Some(p) => read_toml(p)?,
        None => SweepConfig::default(),
    };
    let rows = sweep(&cfg)?;
    let mut w = csv::Writer::from_path(&a.out)?;
    w.write_record([
        "gamma", "delta", "n", "eps", "t_anneal", "x_final", "tvd", "within_eps", "cold_time", "log_cold_time",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.gamma.to_string(),
            r.delta.to_string(),
            r.n.to_string(),
            r.eps.to_string(),
            opt(r.t_anneal),
            opt(r.x_final),
            opt(r.tvd),
            r.tvd.map(|t| (t <= r.eps).to_string()).unwrap_or_default(),
            format!("{:e}", r.cold_time),
            r.log_cold_time.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn schedule_dump(a: ScheduleDumpArgs) -> Result<()> {
    if a.strategy == Strategy::Custom {
        bail!("custom schedules have no generator to dump");
    }
    let sched = AnnealSchedule::build(a.strategy, a.n, a.t)?.with_hyper(a.hyper);
    let summary = sched.validate()?;
    let mut w = csv::Writer::from_path(&a.out)?;
    w.write_record(["step", "action", "subsample_size"])?;
    let mut size = sched.initial_size();
    for (i, act) in sched.stream().enumerate() {
        match act {
            AnnealAction::RemoveRandomAssigned => size -= 1,
            AnnealAction::AssignRandomUnassigned => size += 1,
            AnnealAction::HyperSweep => {}
        }
        w.write_record([i.to_string(), act.name().to_string(), size.to_string()])?;
    }
    w.flush()?;
    println!(
        "{} removes, {} assigns, {} hyper sweeps, final size {}",
        summary.removes, summary.assigns, summary.hyper_sweeps, summary.final_size
    );
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg: SynthConfig = match &a.config {
        Some(p) => read_toml(p)?,
        None => SynthConfig::default(),
    };
    let s = synth_dataset(&cfg, a.seed)?;
    write_csv(&a.out, &s.dataset, None)?;
    let mut w = csv::Writer::from_path(a.out.with_extension("labels.csv"))?;
    w.write_record(["row", "cluster"])?;
    for (i, z) in s.labels.iter().enumerate() {
        w.write_record([i.to_string(), z.to_string()])?;
    }
    w.flush()?;
    write_json(&a.out.with_extension("truth.json"), &s.truth)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Fit(a) => fit(a),
        Command::Bench(a) => bench(a),
        Command::ToyUrns(a) => toy_urns(a),
        Command::ToyBimodal(a) => toy_bimodal(a),
        Command::ScheduleDump(a) => schedule_dump(a),
        Command::Synth(a) => synth(a),
    }
}
