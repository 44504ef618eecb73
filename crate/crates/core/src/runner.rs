//! Experiment orchestration: the T/2T protocol per run, grids of runs,
//! persistence and nearest-rank aggregation.
//!
//! A run samples until the first iteration `T` whose offspring contain an
//! optimum, then continues for `T` more iterations. Every run draws from its
//! own random stream whose seed depends only on `(master_seed, n, run_index)`,
//! so results do not depend on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{assess_model, DistinctOptimaLedger, ModelQualityReport};
use crate::builder::{mimic_iteration, MimicParams};
use crate::error::{Error, Result};
use crate::fitness::Ebom;
use crate::model::{random_source, ChainModel};

const QUALITY_SALT: u64 = 0x9e6c_63d0_676a_9a99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotPolicy {
    None,
    #[default]
    Final,
    #[serde(alias = "all")]
    EveryIteration,
}

impl FromStr for SnapshotPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SnapshotPolicy::None),
            "final" => Ok(SnapshotPolicy::Final),
            "all" | "every_iteration" => Ok(SnapshotPolicy::EveryIteration),
            other => Err(Error::Parse(format!("unknown snapshot policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub runs_per_n: u64,
    pub lambda_factor: f64,
    pub mu_divisor: f64,
    pub iteration_cap: u64,
    pub master_seed: u64,
    pub snapshot_policy: SnapshotPolicy,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_values: (50..=200).step_by(10).collect(),
            runs_per_n: 100,
            lambda_factor: 12.0,
            mu_divisor: 8.0,
            iteration_cap: 50_000,
            master_seed: 0,
            snapshot_policy: SnapshotPolicy::Final,
            workers: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidParams("no values of n given".into()));
        }
        for &n in &self.n_values {
            Ebom::new(n)?;
            self.params(n)?;
        }
        if self.runs_per_n == 0 {
            return Err(Error::InvalidParams("runs per n must be at least 1".into()));
        }
        if self.iteration_cap == 0 {
            return Err(Error::InvalidParams(
                "iteration cap must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn params(&self, n: usize) -> Result<MimicParams> {
        MimicParams::scaled(n, self.lambda_factor, self.mu_divisor)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `run_index` at dimension `n`.
pub fn derive_seed(master_seed: u64, n: usize, run_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(((n as u64) << 32) ^ run_index))
}

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub n: usize,
    pub run_index: u64,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: Option<u64>,
    pub total_iterations: u64,
    pub lambda: usize,
    pub mu: usize,
    pub fitness_evaluations: u64,
    pub total_optima: u64,
    pub distinct_optima: u64,
    pub duplicates: u64,
    pub permutation_correct: Option<bool>,
    pub central_dev_max: Option<f64>,
    pub central_dev_mean: Option<f64>,
    pub central_dev_min: Option<f64>,
    pub border_dev_max: Option<f64>,
    pub aborted: bool,
}

impl RunRow {
    fn apply_quality(&mut self, quality: Option<&ModelQualityReport>) {
        self.permutation_correct = quality.map(|q| q.permutation_correct);
        let central = quality.and_then(|q| q.central);
        self.central_dev_max = central.map(|c| c.max);
        self.central_dev_mean = central.map(|c| c.mean);
        self.central_dev_min = central.map(|c| c.min);
        self.border_dev_max = quality.and_then(|q| q.border).map(|b| b.max);
    }
}

/// One row of `trace.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub run_index: u64,
    pub iteration: u64,
    pub optima_count: u64,
    pub lambda: usize,
    pub optimum_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub row: RunRow,
    /// Optima among the λ offspring of each iteration, iteration 1 first.
    pub optimum_counts: Vec<u64>,
    /// `None` for aborted runs and for records loaded without a snapshot.
    pub quality: Option<ModelQualityReport>,
    /// The model built by iteration `2T`, i.e. the one a further iteration
    /// would sample from.
    pub final_model: Option<ChainModel>,
    /// `(t, model after t iterations)` for `t = 0 ..= 2T`, filled only under
    /// [`SnapshotPolicy::EveryIteration`].
    pub snapshots: Vec<(u64, ChainModel)>,
}

impl RunRecord {
    pub fn key(&self) -> (usize, u64) {
        (self.row.n, self.row.run_index)
    }

    pub fn t(&self) -> Option<u64> {
        self.row.t
    }

    pub fn aborted(&self) -> bool {
        self.row.aborted
    }

    pub fn optimum_fractions(&self) -> impl Iterator<Item = f64> + '_ {
        let lambda = self.row.lambda as f64;
        self.optimum_counts.iter().map(move |&c| c as f64 / lambda)
    }

    /// Optimum fractions of iterations `T+1 ..= 2T`.
    pub fn fractions_after_first(&self) -> Vec<f64> {
        match self.row.t {
            Some(t) if !self.row.aborted => self.optimum_fractions().skip(t as usize).collect(),
            _ => Vec::new(),
        }
    }

    pub fn trace_rows(&self) -> impl Iterator<Item = TraceRow> + '_ {
        self.optimum_counts
            .iter()
            .enumerate()
            .map(|(i, &c)| TraceRow {
                n: self.row.n,
                run_index: self.row.run_index,
                iteration: i as u64 + 1,
                optima_count: c,
                lambda: self.row.lambda,
                optimum_fraction: c as f64 / self.row.lambda as f64,
            })
    }
}

fn quality_for(model: &ChainModel, seed: u64) -> ModelQualityReport {
    assess_model(model, &mut random_source(seed ^ QUALITY_SALT))
}

/// Runs MIMIC on EBOM of dimension `n` under the T/2T protocol.
pub fn run_single(config: &ExperimentConfig, n: usize, run_index: u64) -> Result<RunRecord> {
    let params = config.params(n)?;
    let f = Ebom::new(n)?;
    let seed = derive_seed(config.master_seed, n, run_index);
    let mut rng = random_source(seed);
    let mut model = ChainModel::initial(n)?;
    let mut ledger = DistinctOptimaLedger::new(n)?;
    let mut counts = Vec::new();
    let mut snapshots = Vec::new();
    let mut first: Option<u64> = None;
    let mut final_model = None;
    let mut aborted = false;

    let every = config.snapshot_policy == SnapshotPolicy::EveryIteration;
    if every {
        snapshots.push((0, model.clone()));
    }
    let mut iteration = 0u64;
    loop {
        iteration += 1;
        let it = mimic_iteration(&model, &f, &params, &mut rng)?;
        let found = it.stats.optimum_count() as u64;
        counts.push(found);
        ledger.update(&it.stats.optima)?;
        model = it.model;
        if every {
            snapshots.push((iteration, model.clone()));
        }

        if first.is_none() {
            if found > 0 {
                first = Some(iteration);
            } else if iteration >= config.iteration_cap {
                aborted = true;
                break;
            }
        }
        if first.is_some_and(|t| iteration == 2 * t) {
            final_model = Some(model);
            break;
        }
    }

    let quality = final_model.as_ref().map(|m| quality_for(m, seed));
    let summary = ledger.summary();
    let total_iterations = counts.len() as u64;
    let mut row = RunRow {
        n,
        run_index,
        seed,
        t: first,
        total_iterations,
        lambda: params.lambda,
        mu: params.mu,
        fitness_evaluations: params.lambda as u64 * total_iterations,
        total_optima: summary.total,
        distinct_optima: summary.distinct,
        duplicates: summary.duplicates,
        permutation_correct: None,
        central_dev_max: None,
        central_dev_mean: None,
        central_dev_min: None,
        border_dev_max: None,
        aborted,
    };
    row.apply_quality(quality.as_ref());
    Ok(RunRecord {
        row,
        optimum_counts: counts,
        quality,
        final_model,
        snapshots,
    })
}

fn grid_jobs(config: &ExperimentConfig) -> Vec<(usize, u64)> {
    config
        .n_values
        .iter()
        .flat_map(|&n| (0..config.runs_per_n).map(move |r| (n, r)))
        .collect()
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// All runs of the grid in memory, ordered by `(n, run_index)`.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let jobs = grid_jobs(config);
    let mut records = with_pool(config.workers, || {
        jobs.par_iter()
            .map(|&(n, r)| run_single(config, n, r))
            .collect::<Result<Vec<_>>>()
    })??;
    records.sort_by_key(RunRecord::key);
    Ok(records)
}

fn partial_dir(out: &Path) -> PathBuf {
    out.join("partial")
}

fn partial_stem(n: usize, run_index: u64) -> String {
    format!("n{n}_run{run_index}")
}

fn snapshot_path(out: &Path, n: usize, run_index: u64, tag: &str) -> PathBuf {
    out.join("snapshots")
        .join(format!("{}_{tag}.csv", partial_stem(n, run_index)))
}

fn write_snapshot_file(path: &Path, model: &ChainModel) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    model
        .write_snapshot(&mut w)
        .map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the model snapshots a record carries, according to `policy`.
pub fn write_snapshots(out: &Path, record: &RunRecord, policy: SnapshotPolicy) -> Result<()> {
    if policy == SnapshotPolicy::None {
        return Ok(());
    }
    let dir = out.join("snapshots");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let (n, r) = record.key();
    if let Some(model) = &record.final_model {
        write_snapshot_file(&snapshot_path(out, n, r, "final"), model)?;
    }
    if policy == SnapshotPolicy::EveryIteration {
        for (iteration, model) in &record.snapshots {
            write_snapshot_file(
                &snapshot_path(out, n, r, &format!("iter{iteration}")),
                model,
            )?;
        }
    }
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let mut any = false;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
        any = true;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    if !any {
        return Err(Error::InvalidParams(format!(
            "{}: nothing to write",
            path.display()
        )));
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::csv(path, e))
}

const RUNS_HEADER: &str = "n,run_index,seed,T,total_iterations,lambda,mu,fitness_evaluations,total_optima,distinct_optima,duplicates,permutation_correct,central_dev_max,central_dev_mean,central_dev_min,border_dev_max,aborted\n";
const TRACE_HEADER: &str = "n,run_index,iteration,optima_count,lambda,optimum_fraction\n";
const AGGREGATE_HEADER: &str = "n,metric,q25,median,q75\n";

fn write_partial(out: &Path, record: &RunRecord) -> Result<()> {
    let dir = partial_dir(out);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let stem = partial_stem(record.row.n, record.row.run_index);
    let trace = dir.join(format!("{stem}.trace.csv"));
    if record.optimum_counts.is_empty() {
        write_text(&trace, TRACE_HEADER)?;
    } else {
        write_csv(&trace, record.trace_rows())?;
    }
    // The run file marks completion, so it is moved into place last.
    let tmp = dir.join(format!("{stem}.run.csv.tmp"));
    write_csv(&tmp, [&record.row])?;
    let done = dir.join(format!("{stem}.run.csv"));
    fs::rename(&tmp, &done).map_err(|e| Error::io(&done, e))
}

fn load_partial(out: &Path, n: usize, run_index: u64) -> Result<Option<RunRecord>> {
    let dir = partial_dir(out);
    let stem = partial_stem(n, run_index);
    let run = dir.join(format!("{stem}.run.csv"));
    if !run.exists() {
        return Ok(None);
    }
    let row = read_csv::<RunRow>(&run)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty", run.display())))?;
    let mut trace: Vec<TraceRow> = read_csv(&dir.join(format!("{stem}.trace.csv")))?;
    trace.sort_by_key(|t| t.iteration);
    let final_model = read_snapshot_if_present(&snapshot_path(out, n, run_index, "final"))?;
    Ok(Some(RunRecord {
        row,
        optimum_counts: trace.iter().map(|t| t.optima_count).collect(),
        quality: None,
        final_model,
        snapshots: Vec::new(),
    }))
}

fn read_snapshot_if_present(path: &Path) -> Result<Option<ChainModel>> {
    if !path.exists() {
        return Ok(None);
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ChainModel::read_snapshot(BufReader::new(file)).map(Some)
}

/// Runs the grid while persisting every finished run under `out/partial`, so
/// an interrupted grid resumes where it stopped. Completed runs found there
/// are loaded instead of recomputed. Writes the merged outputs at the end.
pub fn run_grid_to_dir(config: &ExperimentConfig, out: &Path) -> Result<Vec<RunRecord>> {
    config.validate()?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let jobs = grid_jobs(config);
    let mut records = with_pool(config.workers, || {
        jobs.par_iter()
            .map(|&(n, r)| {
                if let Some(done) = load_partial(out, n, r)? {
                    return Ok(done);
                }
                let record = run_single(config, n, r)?;
                write_snapshots(out, &record, config.snapshot_policy)?;
                write_partial(out, &record)?;
                Ok(record)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    records.sort_by_key(RunRecord::key);
    let aggregates = aggregate_all(&records)?;
    emit_outputs(&records, &aggregates, out, SnapshotPolicy::None)?;
    let partial = partial_dir(out);
    fs::remove_dir_all(&partial).map_err(|e| Error::io(&partial, e))?;
    Ok(records)
}

/// Quantities that can be aggregated across runs.
pub const METRICS: &[&str] = &[
    "iterations_to_first_optimum",
    "total_iterations",
    "fitness_evaluations",
    "total_optima",
    "distinct_optima",
    "duplicates",
    "central_dev_max",
    "central_dev_mean",
    "central_dev_min",
    "border_dev_max",
    "optimum_fraction_after_first",
];

fn metric_value(record: &RunRecord, metric: &str) -> Result<Option<f64>> {
    let row = &record.row;
    if row.aborted {
        return Ok(None);
    }
    Ok(match metric {
        "iterations_to_first_optimum" | "T" => row.t.map(|t| t as f64),
        "total_iterations" => Some(row.total_iterations as f64),
        "fitness_evaluations" => Some(row.fitness_evaluations as f64),
        "total_optima" => Some(row.total_optima as f64),
        "distinct_optima" => Some(row.distinct_optima as f64),
        "duplicates" => Some(row.duplicates as f64),
        "central_dev_max" => row.central_dev_max,
        "central_dev_mean" => row.central_dev_mean,
        "central_dev_min" => row.central_dev_min,
        "border_dev_max" => row.border_dev_max,
        "optimum_fraction_after_first" => {
            nearest_rank_quartiles(&record.fractions_after_first()).map(|q| q.1)
        }
        other => return Err(Error::UnknownMetric(other.to_string())),
    })
}

/// `(q25, median, q75)` as the elements of rank `⌈r/4⌉`, `⌈r/2⌉` and `⌈3r/4⌉`.
pub fn nearest_rank_quartiles(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len();
    let at = |num: usize| sorted[(num * r).div_ceil(4).max(1) - 1];
    Some((at(1), at(2), at(3)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub n: usize,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub metric: String,
    pub points: Vec<AggregatePoint>,
}

#[derive(Serialize, Deserialize)]
struct AggregateRow {
    n: usize,
    metric: String,
    q25: f64,
    median: f64,
    q75: f64,
}

/// Per-`n` nearest-rank median and quartiles of `metric`; aborted runs and
/// runs without a value for the metric are left out.
pub fn aggregate(records: &[RunRecord], metric: &str) -> Result<AggregateSeries> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for record in records {
        by_n.entry(record.row.n).or_default();
        if let Some(v) = metric_value(record, metric)? {
            by_n.get_mut(&record.row.n).expect("inserted above").push(v);
        }
    }
    let points = by_n
        .into_iter()
        .filter_map(|(n, values)| {
            nearest_rank_quartiles(&values).map(|(q25, median, q75)| AggregatePoint {
                n,
                q25,
                median,
                q75,
            })
        })
        .collect();
    Ok(AggregateSeries {
        metric: metric.to_string(),
        points,
    })
}

pub fn aggregate_all(records: &[RunRecord]) -> Result<Vec<AggregateSeries>> {
    METRICS.iter().map(|m| aggregate(records, m)).collect()
}

/// Nearest-rank quartiles of the optimum fraction per iteration across the
/// runs at dimension `n`; runs shorter than an iteration do not contribute.
pub fn iteration_series(records: &[RunRecord], n: usize) -> Vec<(u64, f64, f64, f64)> {
    let runs: Vec<Vec<f64>> = records
        .iter()
        .filter(|r| r.row.n == n && !r.row.aborted)
        .map(|r| r.optimum_fractions().collect())
        .collect();
    let longest = runs.iter().map(Vec::len).max().unwrap_or(0);
    (0..longest)
        .filter_map(|i| {
            let column: Vec<f64> = runs.iter().filter_map(|r| r.get(i).copied()).collect();
            nearest_rank_quartiles(&column).map(|(a, b, c)| (i as u64 + 1, a, b, c))
        })
        .collect()
}

fn aggregate_rows(aggregates: &[AggregateSeries]) -> Vec<AggregateRow> {
    let mut rows: Vec<AggregateRow> = aggregates
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |p| AggregateRow {
                n: p.n,
                metric: s.metric.clone(),
                q25: p.q25,
                median: p.median,
                q75: p.q75,
            })
        })
        .collect();
    rows.sort_by_key(|a| a.n);
    rows
}

pub fn write_aggregates(path: &Path, aggregates: &[AggregateSeries]) -> Result<()> {
    let rows = aggregate_rows(aggregates);
    if rows.is_empty() {
        write_text(path, AGGREGATE_HEADER)
    } else {
        write_csv(path, rows)
    }
}

/// Writes `runs.csv`, `trace.csv`, `aggregate.csv` and, per `snapshots`, the
/// model files under `snapshots/`.
pub fn emit_outputs(
    records: &[RunRecord],
    aggregates: &[AggregateSeries],
    out: &Path,
    snapshots: SnapshotPolicy,
) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.key());

    let runs = out.join("runs.csv");
    if sorted.is_empty() {
        write_text(&runs, RUNS_HEADER)?;
    } else {
        write_csv(&runs, sorted.iter().map(|r| &r.row))?;
    }
    let trace = out.join("trace.csv");
    if sorted.iter().all(|r| r.optimum_counts.is_empty()) {
        write_text(&trace, TRACE_HEADER)?;
    } else {
        write_csv(&trace, sorted.iter().flat_map(|r| r.trace_rows()))?;
    }
    write_aggregates(&out.join("aggregate.csv"), aggregates)?;
    for record in sorted {
        write_snapshots(out, record, snapshots)?;
    }
    Ok(())
}

/// Loads `runs.csv`, `trace.csv` and any final snapshots from `dir`.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let rows: Vec<RunRow> = read_csv(&dir.join("runs.csv"))?;
    let trace: Vec<TraceRow> = read_csv(&dir.join("trace.csv"))?;
    let mut counts: BTreeMap<(usize, u64), BTreeMap<u64, u64>> = BTreeMap::new();
    for t in trace {
        counts
            .entry((t.n, t.run_index))
            .or_default()
            .insert(t.iteration, t.optima_count);
    }
    let mut keys = BTreeSet::new();
    let mut records = Vec::with_capacity(rows.len());
    for row in rows {
        let key = (row.n, row.run_index);
        if !keys.insert(key) {
            return Err(Error::Parse(format!(
                "duplicate run n={} run_index={}",
                key.0, key.1
            )));
        }
        let optimum_counts: Vec<u64> = counts
            .remove(&key)
            .unwrap_or_default()
            .into_values()
            .collect();
        let final_model = read_snapshot_if_present(&snapshot_path(dir, key.0, key.1, "final"))?;
        records.push(RunRecord {
            row,
            optimum_counts,
            quality: None,
            final_model,
            snapshots: Vec::new(),
        });
    }
    records.sort_by_key(RunRecord::key);
    Ok(records)
}

/// Recomputes quality reports from stored final snapshots, then rewrites
/// `runs.csv`, `trace.csv` and `aggregate.csv` into `out` (and copies the
/// final snapshots along when `out` differs from `input`).
pub fn analyze(input: &Path, out: &Path) -> Result<Vec<RunRecord>> {
    let mut records = load_records(input)?;
    for record in &mut records {
        if let Some(model) = &record.final_model {
            let quality = quality_for(model, record.row.seed);
            record.row.apply_quality(Some(&quality));
            record.quality = Some(quality);
        }
    }
    let aggregates = aggregate_all(&records)?;
    let copy_snapshots = if input == out {
        SnapshotPolicy::None
    } else {
        SnapshotPolicy::Final
    };
    emit_outputs(&records, &aggregates, out, copy_snapshots)?;
    Ok(records)
}

/// Writes plot-ready quartiles for one metric. The pseudo-metric
/// `optimum_fraction_by_iteration` produces `n,iteration,q25,median,q75`.
pub fn plot_data(input: &Path, metric: &str, out_file: &Path) -> Result<()> {
    let records = load_records(input)?;
    if let Some(parent) = out_file.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    if metric == "optimum_fraction_by_iteration" {
        let mut text = String::from("n,iteration,q25,median,q75\n");
        let ns: BTreeSet<usize> = records.iter().map(|r| r.row.n).collect();
        for n in ns {
            for (it, q25, med, q75) in iteration_series(&records, n) {
                text.push_str(&format!("{n},{it},{q25},{med},{q75}\n"));
            }
        }
        return write_text(out_file, &text);
    }
    let series = aggregate(&records, metric)?;
    write_aggregates(out_file, &[series])
}
