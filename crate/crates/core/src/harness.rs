//! Random instances, an exact brute-force optimum for tiny instances, and
//! the experiment runner that writes one CSV row per solver run.

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::driver::{solve_with, DriverError, SolverConfig};
use crate::model::{
    omega, Allotment, Instance, ModelError, ProcessingTimeModel, Schedule, ScheduledJob,
    MAX_TABLE_MACHINES,
};
use crate::two_shelf::KnapsackBackend;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid generator spec: {0}")]
    BadSpec(String),
    #[error("brute force is limited to n <= {max_n} and m <= {max_m} (got n = {n}, m = {m})")]
    TooLarge {
        n: usize,
        m: u64,
        max_n: usize,
        max_m: u64,
    },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Table,
    PowerLaw,
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(ModelKind::Table),
            "powerlaw" => Ok(ModelKind::PowerLaw),
            other => Err(format!("unknown model `{other}` (table or powerlaw)")),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Table => "table",
            ModelKind::PowerLaw => "powerlaw",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub n: usize,
    pub m: u64,
    pub model: ModelKind,
    /// Range of `t(j, 1)`.
    pub a_min: f64,
    pub a_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    /// TABLE only: each entry is scaled by a factor in `[1, 1 + noise]`
    /// before repair.
    pub noise: f64,
}

impl GeneratorSpec {
    pub fn new(seed: u64, n: usize, m: u64, model: ModelKind) -> Self {
        GeneratorSpec {
            seed,
            n,
            m,
            model,
            a_min: 1.0,
            a_max: 100.0,
            beta_min: 0.0,
            beta_max: 1.0,
            noise: 0.3,
        }
    }

    fn check(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::BadSpec(msg.to_string()));
        if self.n == 0 || self.m == 0 {
            return bad("n and m must be at least 1");
        }
        if self.model == ModelKind::Table && self.m > MAX_TABLE_MACHINES {
            return bad("table instances are limited to 10000 machines");
        }
        if !(self.a_min > 0.0 && self.a_min <= self.a_max && self.a_max.is_finite()) {
            return bad("need 0 < a_min <= a_max");
        }
        if !(0.0 <= self.beta_min && self.beta_min <= self.beta_max && self.beta_max <= 1.0) {
            return bad("need 0 <= beta_min <= beta_max <= 1");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be non-negative");
        }
        Ok(())
    }

    pub fn instance_id(&self) -> String {
        format!("{}-n{}-m{}-s{}", self.model, self.n, self.m, self.seed)
    }
}

/// Makes `times` non-increasing, then raises entries just enough for the
/// work `k·t(k)` to be non-decreasing.
pub fn repair_table(times: &mut [f64]) {
    for k in 1..times.len() {
        times[k] = times[k].min(times[k - 1]);
    }
    for idx in 1..times.len() {
        let (k, prev) = ((idx + 1) as f64, times[idx - 1]);
        let prev_work = idx as f64 * prev;
        if k * times[idx] < prev_work {
            let mut t = prev_work / k;
            while k * t < prev_work {
                t = t.next_up();
            }
            times[idx] = t.min(prev);
        }
    }
}

/// Deterministic in the seed; every instance passes
/// [`crate::model::validate_instance`].
pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance, HarnessError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut jobs = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let a = rng.gen_range(spec.a_min..=spec.a_max);
        let beta = rng.gen_range(spec.beta_min..=spec.beta_max);
        jobs.push(match spec.model {
            ModelKind::PowerLaw => ProcessingTimeModel::PowerLaw { a, beta },
            ModelKind::Table => {
                let mut times: Vec<f64> = (1..=spec.m)
                    .map(|k| {
                        let base = if k == 1 { a } else { a / (k as f64).powf(beta) };
                        base * (1.0 + spec.noise * rng.gen::<f64>())
                    })
                    .collect();
                repair_table(&mut times);
                ProcessingTimeModel::Table(times)
            }
        });
    }
    Ok(Instance::new(spec.m, jobs)?)
}

pub const BRUTE_FORCE_MAX_N: usize = 6;
pub const BRUTE_FORCE_MAX_M: u64 = 8;

struct Search<'a> {
    times: &'a [f64],
    widths: &'a [u64],
    m: u64,
    best: f64,
    best_starts: Option<Vec<f64>>,
    starts: Vec<f64>,
}

impl Search<'_> {
    /// `running` holds `(finish, job)`; `waiting` is a bit set.
    fn explore(&mut self, now: f64, free: u64, running: &[(f64, usize)], waiting: u32) {
        let n = self.times.len();
        let mut finish = now;
        let mut area = 0.0;
        for &(f, j) in running.iter() {
            finish = finish.max(f);
            area += self.widths[j] as f64 * (f - now);
        }
        if waiting == 0 {
            if finish < self.best {
                self.best = finish;
                self.best_starts = Some(self.starts.clone());
            }
            return;
        }
        let mut bound = finish;
        for j in (0..n).filter(|j| waiting >> j & 1 == 1) {
            bound = bound.max(now + self.times[j]);
            area += self.widths[j] as f64 * self.times[j];
        }
        bound = bound.max(now + area / self.m as f64);
        if bound >= self.best {
            return;
        }

        // Every subset of waiting jobs that fits may start now. Larger
        // subsets first tend to find good schedules early.
        let mut subsets: Vec<u32> = Vec::new();
        let mut s = waiting;
        loop {
            let width: u64 = (0..n)
                .filter(|j| s >> j & 1 == 1)
                .map(|j| self.widths[j])
                .sum();
            if width <= free && (s != 0 || !running.is_empty()) {
                subsets.push(s);
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & waiting;
        }
        subsets.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
        for subset in subsets {
            let mut run = running.to_vec();
            let mut free_now = free;
            for j in (0..n).filter(|j| subset >> j & 1 == 1) {
                run.push((now + self.times[j], j));
                free_now -= self.widths[j];
                self.starts[j] = now;
            }
            let rest = waiting & !subset;
            if rest == 0 {
                self.explore(now, free_now, &run, 0);
                continue;
            }
            // Advance to the next finish event.
            let next = run.iter().map(|&(f, _)| f).fold(f64::INFINITY, f64::min);
            let mut freed = free_now;
            run.retain(|&(f, j)| {
                if f == next {
                    freed += self.widths[j];
                    false
                } else {
                    true
                }
            });
            self.explore(next, freed, &run, rest);
        }
    }
}

/// Minimum makespan of rigid jobs with the given widths, with the start
/// times attaining it. Some optimal schedule starts every job at time 0 or
/// at a finish time, so branching over the set of jobs started at each
/// event is exhaustive.
fn best_rigid_schedule(
    times: &[f64],
    widths: &[u64],
    m: u64,
    cutoff: f64,
) -> Option<(f64, Vec<f64>)> {
    let mut search = Search {
        times,
        widths,
        m,
        best: cutoff,
        best_starts: None,
        starts: vec![0.0; times.len()],
    };
    let all = (1u32 << times.len()) - 1;
    search.explore(0.0, m, &[], all);
    search.best_starts.map(|s| (search.best, s))
}

/// Exact optimum over all allotments in `[m]^n` and all start times.
/// Allotments are visited by increasing `ω`, which stops the search once `ω`
/// reaches the best makespan found.
pub fn brute_force_opt(instance: &Instance) -> Result<(f64, Schedule), HarnessError> {
    let (n, m) = (instance.n(), instance.m());
    if n > BRUTE_FORCE_MAX_N || m > BRUTE_FORCE_MAX_M {
        return Err(HarnessError::TooLarge {
            n,
            m,
            max_n: BRUTE_FORCE_MAX_N,
            max_m: BRUTE_FORCE_MAX_M,
        });
    }
    let total = (m as usize).pow(n as u32);
    let mut allotments: Vec<(f64, Vec<u64>)> = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let alloc: Vec<u64> = (0..n)
            .map(|_| {
                let k = (c % m as usize) as u64 + 1;
                c /= m as usize;
                k
            })
            .collect();
        let w = omega(&Allotment(alloc.clone()), instance);
        allotments.push((w, alloc));
    }
    allotments.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = f64::INFINITY;
    let mut best_schedule = None;
    for (w, alloc) in allotments {
        if w >= best {
            break;
        }
        let times: Vec<f64> = (0..n).map(|j| instance.time(j, alloc[j])).collect();
        if let Some((makespan, starts)) = best_rigid_schedule(&times, &alloc, m, best) {
            best = makespan;
            best_schedule = Some(Schedule::new(
                (0..n)
                    .map(|job| ScheduledJob {
                        job,
                        machines: alloc[job],
                        start: starts[job],
                    })
                    .collect(),
            ));
        }
    }
    Ok((best, best_schedule.expect("some allotment is schedulable")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ours,
    BaselineDp,
    Bootstrap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub instance_id: String,
    pub n: usize,
    pub m: u64,
    pub eps: f64,
    pub algorithm: Algorithm,
    pub makespan: f64,
    pub lower_bound: f64,
    pub runtime_ns: u64,
    pub guesses: usize,
}

pub const CSV_HEADER: &str =
    "instance_id,n,m,eps,algorithm,makespan,lower_bound,runtime_ns,guesses";

pub fn write_records<W: std::io::Write>(
    out: W,
    records: &[ExperimentRecord],
) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: std::io::Read>(input: R) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Runs `ours` (convolution knapsack) and `baseline_dp` (dynamic-program
/// knapsack, otherwise identical) on every generated instance and accuracy.
pub fn run_experiment(
    grid: &[GeneratorSpec],
    eps_list: &[f64],
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let mut records = Vec::new();
    for spec in grid {
        let instance = generate_instance(spec)?;
        for &eps in eps_list {
            let config = SolverConfig::for_instance(&instance, eps)?;
            for (algorithm, backend) in [
                (Algorithm::Ours, KnapsackBackend::Convolution),
                (Algorithm::BaselineDp, KnapsackBackend::BellmanDp),
            ] {
                let config = config.clone().with_backend(backend);
                let started = Instant::now();
                let result = solve_with(&instance, &config)?;
                let runtime_ns = started.elapsed().as_nanos() as u64;
                records.push(ExperimentRecord {
                    instance_id: spec.instance_id(),
                    n: spec.n,
                    m: spec.m,
                    eps,
                    algorithm,
                    makespan: result.makespan,
                    lower_bound: result.lower_bound,
                    runtime_ns,
                    guesses: result.stats.estimator_calls(),
                });
            }
        }
    }
    Ok(records)
}

/// [`run_experiment`] followed by writing the CSV to `path`.
pub fn run_experiment_to(
    grid: &[GeneratorSpec],
    eps_list: &[f64],
    path: &Path,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let records = run_experiment(grid, eps_list)?;
    write_records(std::fs::File::create(path)?, &records)?;
    Ok(records)
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || HarnessError::BadGrid(format!("bad value `{part}` for `{key}`"));
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            for v in lo..=hi {
                out.push(v.to_string().parse().map_err(|_| bad())?);
            }
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

/// Parses `n=10,20;m=30..32;seeds=1..3;model=powerlaw` into the cartesian
/// product of generator specs. `model` defaults to powerlaw and `seeds` to
/// `1`; `n` and `m` are required. Empty input gives an empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<GeneratorSpec>, HarnessError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut ns: Option<Vec<usize>> = None;
    let mut ms: Option<Vec<u64>> = None;
    let mut seeds = vec![1u64];
    let mut models = vec![ModelKind::PowerLaw];
    for field in text.split(';').map(str::trim).filter(|f| !f.is_empty()) {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| HarnessError::BadGrid(format!("expected key=value, got `{field}`")))?;
        match key.trim() {
            "n" => ns = Some(parse_list(key, value)?),
            "m" => ms = Some(parse_list(key, value)?),
            "seed" | "seeds" => seeds = parse_list(key, value)?,
            "model" | "models" => {
                models = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(HarnessError::BadGrid))
                    .collect::<Result<_, _>>()?
            }
            other => return Err(HarnessError::BadGrid(format!("unknown key `{other}`"))),
        }
    }
    let ns = ns.ok_or_else(|| HarnessError::BadGrid("missing `n`".into()))?;
    let ms = ms.ok_or_else(|| HarnessError::BadGrid("missing `m`".into()))?;
    let mut grid = Vec::new();
    for &model in &models {
        for &n in &ns {
            for &m in &ms {
                for &seed in &seeds {
                    grid.push(GeneratorSpec::new(seed, n, m, model));
                }
            }
        }
    }
    Ok(grid)
}
