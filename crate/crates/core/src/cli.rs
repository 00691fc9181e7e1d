//! `navigo` command line: run, sweep, gen-grid, validate.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{ConfigError, RunError};
use crate::gen::{GridSpec, LanePattern};
use crate::metrics::{write_queue_csv, write_rtt_csv, MetricsReport};
use crate::scenario::Scenario;
use crate::sim::{self, CollisionMode, RunOutput};
use crate::strategy::StrategyKind;

#[derive(Debug, Parser)]
#[command(
    name = "navigo",
    version,
    about = "Geo-guided NDN forwarding simulator for vehicular networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its report.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// One run per axis value, aggregated into a CSV table.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated values, e.g. `0.02,0.1,0.32`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Replicate seeds per cell (ignored for the seed axis).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Parallel runs; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write a Manhattan-grid scenario (roads, trace, config).
    GenGrid {
        /// Output directory.
        dir: PathBuf,
        #[arg(long, default_value_t = 5)]
        rows: usize,
        #[arg(long, default_value_t = 5)]
        cols: usize,
        #[arg(long, default_value_t = 200.0)]
        block_m: f64,
        /// `N`, `uniform:N` or `central:N`.
        #[arg(long, default_value = "2")]
        lanes: LanePattern,
        #[arg(long, default_value_t = 50)]
        cars: usize,
        #[arg(long, default_value_t = 300.0)]
        duration: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Load and check a scenario without running it.
    Validate { config: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Axis {
    ConsumerFraction,
    Seed,
    NSongs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub strategy: Option<StrategyKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub consumer_fraction: Option<f64>,
    #[arg(long)]
    pub n_songs: Option<usize>,
    #[arg(long, value_parser = parse_collision)]
    pub collision: Option<CollisionMode>,
    /// Output directory (the environment override still wins).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the event log.
    #[arg(long)]
    pub log: bool,
}

fn parse_collision(s: &str) -> Result<CollisionMode, String> {
    match s {
        "ideal" => Ok(CollisionMode::Ideal),
        "destructive" => Ok(CollisionMode::Destructive),
        _ => Err(format!(
            "unknown collision mode {s:?} (expected ideal or destructive)"
        )),
    }
}

impl Overrides {
    pub fn apply(&self, sc: &mut Scenario) -> Result<(), ConfigError> {
        let c = &mut sc.config;
        if let Some(k) = self.strategy {
            c.strategy.kind = k;
        }
        if let Some(s) = self.seed {
            c.scenario.seed = s;
        }
        if let Some(d) = self.duration {
            c.scenario.duration_s = d;
        }
        if let Some(f) = self.consumer_fraction {
            c.workload.consumer_fraction = f;
        }
        if let Some(n) = self.n_songs {
            c.workload.n_songs = n;
        }
        if let Some(m) = self.collision {
            c.radio.collision = m;
        }
        if let Some(out) = &self.out {
            c.scenario.output_dir = std::env::current_dir()
                .map(|d| d.join(out))
                .unwrap_or_else(|_| out.clone());
        }
        if self.log {
            c.metrics.write_log = true;
        }
        c.validate_params()
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Run(RunError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Run(e) => write!(f, "runtime error: {e}"),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("navigo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, overrides } => {
            let sc = load(&config, &overrides)?;
            let dir = sc.output_dir();
            let out = sim::run(&sc);
            write_outputs(&dir, &out, sc.config.metrics.write_log)?;
            println!("{}", out.report.to_json());
            eprintln!("report written to {}", dir.display());
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            values,
            seeds,
            jobs,
            overrides,
        } => {
            let base = load(&config, &overrides)?;
            let cells = sweep_cells(&base, axis, &values, seeds)?;
            let jobs =
                jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let reports = run_parallel(&cells, jobs);
            let dir = base.output_dir();
            write_sweep(&dir, axis, &cells, &reports)?;
            eprintln!("sweep of {} runs written to {}", cells.len(), dir.display());
            Ok(())
        }
        Command::GenGrid {
            dir,
            rows,
            cols,
            block_m,
            lanes,
            cars,
            duration,
            seed,
        } => {
            let spec = GridSpec {
                rows,
                cols,
                block_m,
                lanes,
                n_cars: cars,
                duration_s: duration,
                seed,
                ..Default::default()
            };
            let path = spec.write(&dir)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Validate { config } => {
            let sc = Scenario::load(&config)?;
            println!(
                "ok: {} road nodes, {} blocks, {} vehicles, {} RSUs",
                sc.graph.nodes().len(),
                sc.graph.edges().len(),
                sc.trace.len(),
                sc.config.rsu.len()
            );
            Ok(())
        }
    }
}

fn load(config: &Path, overrides: &Overrides) -> Result<Scenario, ConfigError> {
    let mut sc = Scenario::load(config)?;
    overrides.apply(&mut sc)?;
    Ok(sc)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `report.json`, `queue_depth.csv`, `rtt.csv`, and `events.jsonl` if asked.
pub fn write_outputs(dir: &Path, out: &RunOutput, write_log: bool) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let report = dir.join("report.json");
    std::fs::write(&report, out.report.to_json() + "\n").map_err(io_err(&report))?;
    let create = |name: &str| {
        let path = dir.join(name);
        std::fs::File::create(&path)
            .map(std::io::BufWriter::new)
            .map_err(|source| RunError::Io { path, source })
    };
    write_queue_csv(out.log.events(), create("queue_depth.csv")?)
        .map_err(|e| RunError::Serialize(e.to_string()))?;
    write_rtt_csv(out.log.events(), create("rtt.csv")?)
        .map_err(|e| RunError::Serialize(e.to_string()))?;
    if write_log {
        let path = dir.join("events.jsonl");
        let mut w = create("events.jsonl")?;
        out.log.write_jsonl(&mut w).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
    }
    Ok(())
}

/// One sweep run: the axis value label, its seed, and the scenario.
pub struct Cell {
    pub value: String,
    pub seed: u64,
    pub scenario: Scenario,
}

pub fn sweep_cells(
    base: &Scenario,
    axis: Axis,
    values: &[String],
    seeds: u64,
) -> Result<Vec<Cell>, ConfigError> {
    let mut cells = Vec::new();
    for v in values {
        let bad = || ConfigError::Invalid(format!("bad {axis:?} value {v:?}"));
        let mut sc = base.clone();
        match axis {
            Axis::ConsumerFraction => {
                sc.config.workload.consumer_fraction = v.parse().map_err(|_| bad())?
            }
            Axis::NSongs => sc.config.workload.n_songs = v.parse().map_err(|_| bad())?,
            Axis::Seed => sc.config.scenario.seed = v.parse().map_err(|_| bad())?,
        }
        sc.config.validate_params()?;
        let replicas = if axis == Axis::Seed { 1 } else { seeds.max(1) };
        for k in 0..replicas {
            let mut run = sc.clone();
            run.config.scenario.seed = sc.config.scenario.seed + k;
            cells.push(Cell {
                value: v.clone(),
                seed: run.config.scenario.seed,
                scenario: run,
            });
        }
    }
    Ok(cells)
}

/// Runs every cell, `jobs` at a time. Reports come back in cell order.
pub fn run_parallel(cells: &[Cell], jobs: usize) -> Vec<MetricsReport> {
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<MetricsReport>>> =
        cells.iter().map(|_| Default::default()).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(cells.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                let report = sim::run(&cell.scenario).report;
                *slots[i].lock().expect("slot") = Some(report);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot").expect("every cell ran"))
        .collect()
}

type Metric = (&'static str, fn(&MetricsReport) -> Option<f64>);

pub const SWEEP_METRICS: [Metric; 9] = [
    ("success_rate", |r| r.success_rate),
    ("user_satisfaction", |r| r.user_satisfaction),
    ("channel_accesses_per_satisfied", |r| {
        r.channel_accesses_per_satisfied
    }),
    ("infra_load", |r| r.infra_load),
    ("infra_offload", |r| r.infra_offload),
    ("rtt_p50_ms", |r| r.rtt_p50_ms),
    ("rtt_p95_ms", |r| r.rtt_p95_ms),
    ("max_faces_per_prefix", |r| {
        Some(r.max_faces_per_prefix as f64)
    }),
    ("mean_queue_depth", |r| r.mean_queue_depth),
];

/// Mean and sample standard deviation of the defined values.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}

/// Aggregated rows: one per axis value, plus an `all` row for seed sweeps.
pub fn sweep_table(axis: Axis, cells: &[Cell], reports: &[MetricsReport]) -> Vec<Vec<String>> {
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        match groups.iter_mut().find(|(v, _)| *v == c.value) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((c.value.clone(), vec![i])),
        }
    }
    if axis == Axis::Seed {
        groups.push(("all".into(), (0..cells.len()).collect()));
    }
    let fmt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.6}"));
    groups
        .into_iter()
        .map(|(value, idx)| {
            let mut row = vec![value, idx.len().to_string()];
            for (_, get) in SWEEP_METRICS {
                let vals: Vec<f64> = idx.iter().filter_map(|&i| get(&reports[i])).collect();
                let ms = mean_std(&vals);
                row.push(fmt(ms.map(|m| m.0)));
                row.push(fmt(ms.map(|m| m.1)));
            }
            row
        })
        .collect()
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::ConsumerFraction => "consumer_fraction",
        Axis::Seed => "seed",
        Axis::NSongs => "n_songs",
    }
}

/// `sweep.csv` (aggregated) and `runs.csv` (one row per run).
pub fn write_sweep(
    dir: &Path,
    axis: Axis,
    cells: &[Cell],
    reports: &[MetricsReport],
) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let ser = |e: csv::Error| RunError::Serialize(e.to_string());
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(ser)?;
    let mut header = vec![axis_name(axis).to_string(), "runs".to_string()];
    for (m, _) in SWEEP_METRICS {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_std"));
    }
    w.write_record(&header).map_err(ser)?;
    for row in sweep_table(axis, cells, reports) {
        w.write_record(&row).map_err(ser)?;
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("runs.csv");
    let mut w = csv::Writer::from_path(&path).map_err(ser)?;
    let mut header = vec![axis_name(axis).to_string(), "seed".to_string()];
    header.extend(SWEEP_METRICS.iter().map(|(m, _)| m.to_string()));
    w.write_record(&header).map_err(ser)?;
    for (c, r) in cells.iter().zip(reports) {
        let mut row = vec![c.value.clone(), c.seed.to_string()];
        row.extend(
            SWEEP_METRICS
                .iter()
                .map(|(_, get)| get(r).map_or(String::new(), |v| format!("{v:.6}"))),
        );
        w.write_record(&row).map_err(ser)?;
    }
    w.flush().map_err(io_err(&path))?;
    Ok(())
}
