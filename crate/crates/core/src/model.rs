//! Instances, allotments, schedules and the feasibility validator.
//!
//! A moldable job `j` runs on `k ∈ [1, m]` machines for `t(j, k)` time units.
//! Every algorithm in the crate assumes *monotone* jobs: processing times do
//! not increase with `k`, and the work `k · t(j, k)` does not decrease.
//! [`validate_instance`] checks both properties.

use std::cmp::Ordering;
use std::collections::HashSet;

use thiserror::Error;

/// Index of a job inside its [`Instance`].
pub type JobId = usize;

/// TABLE jobs above this machine count are refused; use POWERLAW instead.
pub const MAX_TABLE_MACHINES: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("instance needs at least one job")]
    NoJobs,
    #[error("job {job}: table has {len} entries but the instance has {m} machines")]
    TableLength { job: JobId, len: usize, m: u64 },
    #[error("job {job}: parameters must be finite")]
    NonFinite { job: JobId },
    #[error("job {0} does not exist")]
    UnknownJob(JobId),
    #[error("job {job}: machine count {k} outside [1, {m}]")]
    MachinesOutOfRange { job: JobId, k: u64, m: u64 },
    #[error("job {0} is scheduled more than once")]
    DuplicateJob(JobId),
    #[error("job {0} is not scheduled")]
    MissingJob(JobId),
    #[error("job {job}: start time {start} must be finite and non-negative")]
    BadStart { job: JobId, start: f64 },
    #[error("allotment covers {got} jobs, instance has {n}")]
    AllotmentLength { got: usize, n: usize },
}

/// Processing-time function `k ↦ t(j, k)` of a single job.
#[derive(Clone, Debug, PartialEq)]
pub enum ProcessingTimeModel {
    /// Explicit times for `k = 1..=m` (`times[k - 1] = t(j, k)`).
    Table(Vec<f64>),
    /// `t(j, k) = a · k^(-beta)` with `beta ∈ [0, 1]`.
    PowerLaw { a: f64, beta: f64 },
}

impl ProcessingTimeModel {
    /// `t(j, k)`; `k` must lie in `[1, m]` of the owning instance.
    #[inline]
    pub fn time(&self, k: u64) -> f64 {
        debug_assert!(k >= 1);
        match self {
            ProcessingTimeModel::Table(times) => times[(k - 1) as usize],
            ProcessingTimeModel::PowerLaw { a, beta } => {
                if *beta == 0.0 {
                    *a
                } else if *beta == 1.0 {
                    *a / k as f64
                } else {
                    *a / (k as f64).powf(*beta)
                }
            }
        }
    }
}

/// A moldable scheduling instance with `m` identical machines.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    m: u64,
    jobs: Vec<ProcessingTimeModel>,
}

impl Instance {
    /// Checks the structural invariants (`n ≥ 1`, `m ≥ 1`, table lengths,
    /// finite parameters). Monotonicity is checked by [`validate_instance`].
    pub fn new(m: u64, jobs: Vec<ProcessingTimeModel>) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(ModelError::NoMachines);
        }
        if jobs.is_empty() {
            return Err(ModelError::NoJobs);
        }
        for (job, model) in jobs.iter().enumerate() {
            match model {
                ProcessingTimeModel::Table(times) => {
                    if times.len() as u64 != m {
                        return Err(ModelError::TableLength {
                            job,
                            len: times.len(),
                            m,
                        });
                    }
                    if times.iter().any(|t| !t.is_finite()) {
                        return Err(ModelError::NonFinite { job });
                    }
                }
                ProcessingTimeModel::PowerLaw { a, beta } => {
                    if !a.is_finite() || !beta.is_finite() {
                        return Err(ModelError::NonFinite { job });
                    }
                }
            }
        }
        Ok(Instance { m, jobs })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[ProcessingTimeModel] {
        &self.jobs
    }

    /// `t(j, k)`. Panics in debug builds if `k ∉ [1, m]`.
    #[inline]
    pub fn time(&self, job: JobId, k: u64) -> f64 {
        debug_assert!(k >= 1 && k <= self.m, "k = {k} outside [1, {}]", self.m);
        self.jobs[job].time(k)
    }

    /// `w(j, k) = k · t(j, k)`.
    pub fn work(&self, job: JobId, k: u64) -> Result<f64, ModelError> {
        if job >= self.jobs.len() {
            return Err(ModelError::UnknownJob(job));
        }
        if k == 0 || k > self.m {
            return Err(ModelError::MachinesOutOfRange { job, k, m: self.m });
        }
        Ok(self.work_unchecked(job, k))
    }

    #[inline]
    pub(crate) fn work_unchecked(&self, job: JobId, k: u64) -> f64 {
        k as f64 * self.time(job, k)
    }

    /// `γ(j, d)`: the fewest machines with `t(j, k) ≤ d`, or `None` when even
    /// `m` machines are too slow. Binary search, `O(log m)` time queries.
    pub fn gamma(&self, job: JobId, d: f64) -> Option<u64> {
        let model = &self.jobs[job];
        if model.time(self.m) > d {
            return None;
        }
        let (mut lo, mut hi) = (1u64, self.m);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if model.time(mid) <= d {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }
}

/// Which monotonicity property an instance violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    NonPositiveTime,
    IncreasingTime,
    DecreasingWork,
    /// POWERLAW coefficient `a ≤ 0`.
    BadCoefficient,
    /// POWERLAW exponent outside `[0, 1]`.
    BadExponent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceViolation {
    pub job: JobId,
    /// Machine count at which the property first fails (1-based).
    pub k: u64,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceReport {
    pub valid: bool,
    pub violation: Option<InstanceViolation>,
}

/// Accepts iff every job has positive, non-increasing times and
/// non-decreasing work. Reports the first violating `(job, k)`.
pub fn validate_instance(instance: &Instance) -> InstanceReport {
    let fail = |job, k, kind| InstanceReport {
        valid: false,
        violation: Some(InstanceViolation { job, k, kind }),
    };
    for (job, model) in instance.jobs.iter().enumerate() {
        match model {
            ProcessingTimeModel::Table(times) => {
                for (idx, &t) in times.iter().enumerate() {
                    let k = idx as u64 + 1;
                    if t <= 0.0 {
                        return fail(job, k, ViolationKind::NonPositiveTime);
                    }
                    if idx > 0 {
                        let prev = times[idx - 1];
                        if t > prev {
                            return fail(job, k, ViolationKind::IncreasingTime);
                        }
                        if k as f64 * t < (k - 1) as f64 * prev {
                            return fail(job, k, ViolationKind::DecreasingWork);
                        }
                    }
                }
            }
            ProcessingTimeModel::PowerLaw { a, beta } => {
                if *a <= 0.0 {
                    return fail(job, 1, ViolationKind::BadCoefficient);
                }
                if !(0.0..=1.0).contains(beta) {
                    return fail(job, 1, ViolationKind::BadExponent);
                }
            }
        }
    }
    InstanceReport {
        valid: true,
        violation: None,
    }
}

/// Machine count per job, indexed by [`JobId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allotment(pub Vec<u64>);

impl Allotment {
    pub fn get(&self, job: JobId) -> u64 {
        self.0[job]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self, instance: &Instance) -> Result<(), ModelError> {
        if self.0.len() != instance.n() {
            return Err(ModelError::AllotmentLength {
                got: self.0.len(),
                n: instance.n(),
            });
        }
        for (job, &k) in self.0.iter().enumerate() {
            if k == 0 || k > instance.m() {
                return Err(ModelError::MachinesOutOfRange {
                    job,
                    k,
                    m: instance.m(),
                });
            }
        }
        Ok(())
    }
}

/// `ω_α = max(Σ_j w(j, α_j) / m, max_j t(j, α_j))`, a lower bound on the
/// makespan of every schedule that follows `α`.
pub fn omega(allotment: &Allotment, instance: &Instance) -> f64 {
    let mut work = 0.0;
    let mut longest = 0.0f64;
    for (job, &k) in allotment.0.iter().enumerate() {
        let t = instance.time(job, k);
        work += k as f64 * t;
        longest = longest.max(t);
    }
    (work / instance.m() as f64).max(longest)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduledJob {
    pub job: JobId,
    pub machines: u64,
    pub start: f64,
}

impl ScheduledJob {
    pub fn finish(&self, instance: &Instance) -> f64 {
        self.start + instance.time(self.job, self.machines)
    }
}

/// Start time and machine count per job. Machine identities are not
/// stored; feasibility only bounds the number of busy machines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Schedule {
    pub entries: Vec<ScheduledJob>,
}

impl Schedule {
    pub fn new(entries: Vec<ScheduledJob>) -> Self {
        Schedule { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Latest finish time; `0` for the empty schedule.
    pub fn makespan(&self, instance: &Instance) -> f64 {
        self.entries
            .iter()
            .map(|e| e.finish(instance))
            .fold(0.0, f64::max)
    }

    pub fn allotment(&self, instance: &Instance) -> Result<Allotment, ModelError> {
        let mut alloc = vec![0u64; instance.n()];
        for e in &self.entries {
            if e.job >= instance.n() {
                return Err(ModelError::UnknownJob(e.job));
            }
            alloc[e.job] = e.machines;
        }
        if let Some(job) = alloc.iter().position(|&k| k == 0) {
            return Err(ModelError::MissingJob(job));
        }
        Ok(Allotment(alloc))
    }

    /// Every job of `instance` appears exactly once.
    pub fn check_complete(&self, instance: &Instance) -> Result<(), ModelError> {
        let mut seen = vec![false; instance.n()];
        for e in &self.entries {
            match seen.get_mut(e.job) {
                None => return Err(ModelError::UnknownJob(e.job)),
                Some(true) => return Err(ModelError::DuplicateJob(e.job)),
                Some(s) => *s = true,
            }
        }
        match seen.iter().position(|s| !s) {
            Some(job) => Err(ModelError::MissingJob(job)),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub feasible: bool,
    pub makespan: f64,
    pub peak_usage: u64,
    pub first_violation_time: Option<f64>,
}

/// Event sweep over start/finish times. Jobs occupy the half-open interval
/// `[start, start + t)`, so a job may start exactly when another finishes.
pub fn validate_schedule(
    schedule: &Schedule,
    instance: &Instance,
) -> Result<ValidationReport, ModelError> {
    let mut seen = HashSet::with_capacity(schedule.len());
    let mut events: Vec<(f64, i64)> = Vec::with_capacity(2 * schedule.len());
    let mut makespan = 0.0f64;
    for e in &schedule.entries {
        if e.job >= instance.n() {
            return Err(ModelError::UnknownJob(e.job));
        }
        if e.machines == 0 || e.machines > instance.m() {
            return Err(ModelError::MachinesOutOfRange {
                job: e.job,
                k: e.machines,
                m: instance.m(),
            });
        }
        if !e.start.is_finite() || e.start < 0.0 {
            return Err(ModelError::BadStart {
                job: e.job,
                start: e.start,
            });
        }
        if !seen.insert(e.job) {
            return Err(ModelError::DuplicateJob(e.job));
        }
        let finish = e.finish(instance);
        makespan = makespan.max(finish);
        let width = e.machines as i64;
        events.push((e.start, width));
        events.push((finish, -width));
    }
    // Finishes sort before starts at equal times.
    events.sort_by(|a, b| match a.0.total_cmp(&b.0) {
        Ordering::Equal => a.1.cmp(&b.1),
        other => other,
    });
    let m = instance.m() as i64;
    let mut usage = 0i64;
    let mut peak = 0i64;
    let mut first_violation_time = None;
    for (time, delta) in events {
        usage += delta;
        if usage > peak {
            peak = usage;
        }
        if usage > m && first_violation_time.is_none() {
            first_violation_time = Some(time);
        }
    }
    Ok(ValidationReport {
        feasible: peak <= m,
        makespan,
        peak_usage: peak as u64,
        first_violation_time,
    })
}
