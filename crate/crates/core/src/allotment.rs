//! Lower-bound-optimal allotments, list scheduling and the constant-factor
//! bootstrap used to bracket the optimum.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::compression::{compressed_sizes, CompressionError};
use crate::model::{Allotment, Instance, JobId, ModelError, Schedule, ScheduledJob};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllotmentError {
    #[error("size set is empty")]
    EmptySizes,
    #[error("size set must be strictly increasing and within [1, m]")]
    BadSizes,
    #[error("accuracy {0} outside (0, 1)")]
    BadEps(f64),
    #[error("order is not a permutation of the jobs")]
    BadOrder,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Compression(#[from] CompressionError),
}

/// Per-job window `[lo, hi)` of size indices whose candidate thresholds
/// `t(j, S[i])` still lie strictly between the bracketing values.
#[derive(Clone, Copy)]
struct Window {
    lo: usize,
    hi: usize,
}

struct Evaluation {
    threshold: f64,
    value: f64,
    allotment: Vec<u64>,
}

/// First index `i ∈ [lo, hi)` with `pred(t(j, S[i]))`, or `hi`. The predicate
/// must be monotone along the (non-increasing) candidate sequence.
fn first_index(
    instance: &Instance,
    job: JobId,
    sizes: &[u64],
    mut lo: usize,
    mut hi: usize,
    pred: impl Fn(f64) -> bool,
) -> usize {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(instance.time(job, sizes[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Smallest value whose cumulative weight in sorted order reaches half of
/// `total`, by quickselect.
fn weighted_median(items: &mut [(f64, usize)], total: usize) -> f64 {
    let mut rest = items;
    let mut before = 0usize;
    loop {
        let k = rest.len() / 2;
        rest.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0));
        let left: usize = rest[..k].iter().map(|x| x.1).sum();
        let (value, weight) = rest[k];
        if 2 * (before + left) >= total {
            rest = &mut rest[..k];
        } else if 2 * (before + left + weight) >= total {
            return value;
        } else {
            before += left + weight;
            rest = &mut rest[k + 1..];
        }
    }
}

/// Returns `α: J → S` minimising `ω_α = max(W/m, max t)` over all allotments
/// into `S`, together with that minimum.
///
/// For a threshold `τ` the best allotment gives every job its smallest size
/// meeting `τ` (least work, by monotonicity), and the optimum is attained at
/// one of the `n·|S|` values `t(j, s)`. Those candidates are never
/// materialised: each job keeps an index window, every round probes the
/// weighted median of the per-job window medians, and at least a quarter of
/// the remaining candidates is discarded. `O(n log|S| · log(n|S|))` time.
pub fn optimal_allotment(
    instance: &Instance,
    sizes: &[u64],
) -> Result<(Allotment, f64), AllotmentError> {
    if sizes.is_empty() {
        return Err(AllotmentError::EmptySizes);
    }
    if sizes[0] == 0
        || *sizes.last().unwrap() > instance.m()
        || sizes.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(AllotmentError::BadSizes);
    }
    let n = instance.n();
    let last = sizes.len() - 1;
    let m = instance.m() as f64;

    // Cheapest feasible threshold: every job on the largest size.
    let floor = (0..n)
        .map(|j| instance.time(j, sizes[last]))
        .fold(f64::NEG_INFINITY, f64::max);
    let ceiling = (0..n)
        .map(|j| instance.time(j, sizes[0]))
        .fold(f64::NEG_INFINITY, f64::max);

    // α_τ over the full index range, summed in job order.
    let evaluate = |tau: f64| -> Evaluation {
        let mut work = 0.0;
        let mut longest = 0.0f64;
        let mut alloc = Vec::with_capacity(n);
        for j in 0..n {
            let k = sizes[first_index(instance, j, sizes, 0, last, |t| t <= tau)];
            let t = instance.time(j, k);
            work += k as f64 * t;
            longest = longest.max(t);
            alloc.push(k);
        }
        Evaluation {
            threshold: tau,
            value: (work / m).max(longest),
            allotment: alloc,
        }
    };
    let crosses = |e: &Evaluation| e.value <= e.threshold;

    let at_floor = evaluate(floor);
    if crosses(&at_floor) {
        let value = at_floor.value;
        return Ok((Allotment(at_floor.allotment), value));
    }
    let at_ceiling = evaluate(ceiling);
    if !crosses(&at_ceiling) {
        let value = at_ceiling.value;
        return Ok((Allotment(at_ceiling.allotment), value));
    }

    // Candidates outside a window are ≥ the upper bracket or ≤ the lower one,
    // so α_τ for τ strictly between the brackets is found inside `[lo, hi]`.
    // A job with an empty window is settled: its size no longer depends on τ.
    let mut below = floor;
    let mut above = ceiling;
    let mut windows: Vec<Window> = (0..n)
        .map(|j| {
            let lo = first_index(instance, j, sizes, 0, sizes.len(), |t| t < above);
            let hi = first_index(instance, j, sizes, lo, sizes.len(), |t| t <= below);
            Window { lo, hi }
        })
        .collect();
    let mut settled_work = 0.0;
    let mut settled_longest = 0.0f64;
    let mut active: Vec<JobId> = Vec::with_capacity(n);
    let settle = |j: JobId, w: &Window, work: &mut f64, longest: &mut f64| {
        let k = sizes[w.lo.min(last)];
        let t = instance.time(j, k);
        *work += k as f64 * t;
        *longest = longest.max(t);
    };
    for (j, w) in windows.iter().enumerate() {
        if w.hi > w.lo {
            active.push(j);
        } else {
            settle(j, w, &mut settled_work, &mut settled_longest);
        }
    }

    let mut medians: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut hint: Vec<usize> = Vec::with_capacity(n);
    while !active.is_empty() {
        medians.clear();
        let mut total = 0usize;
        for &j in &active {
            let w = &windows[j];
            let mid = w.lo + (w.hi - w.lo) / 2;
            medians.push((instance.time(j, sizes[mid]), w.hi - w.lo));
            total += w.hi - w.lo;
        }
        let pivot = weighted_median(&mut medians, total);

        hint.clear();
        let mut work = settled_work;
        let mut longest = settled_longest;
        for &j in &active {
            let w = &windows[j];
            let idx = first_index(instance, j, sizes, w.lo, w.hi.min(last), |t| t <= pivot);
            let k = sizes[idx];
            let t = instance.time(j, k);
            work += k as f64 * t;
            longest = longest.max(t);
            hint.push(idx);
        }
        if (work / m).max(longest) <= pivot {
            for &j in &active {
                let w = &mut windows[j];
                w.lo = first_index(instance, j, sizes, w.lo, w.hi, |t| t < pivot);
            }
            above = pivot;
        } else {
            for (&j, &h) in active.iter().zip(&hint) {
                let w = &mut windows[j];
                w.hi = h.clamp(w.lo, w.hi);
            }
            below = pivot;
        }
        active.retain(|&j| {
            let w = &windows[j];
            if w.hi > w.lo {
                return true;
            }
            settle(j, w, &mut settled_work, &mut settled_longest);
            false
        });
    }

    let below = evaluate(below);
    let above = evaluate(above);
    let best = if below.value <= above.value {
        below
    } else {
        above
    };
    let value = best.value;
    Ok((Allotment(best.allotment), value))
}

/// [`optimal_allotment`] over `S_ρ` with `ρ = eps/4`; the result is within
/// `1 + eps` of the best lower bound over all of `[m]`.
pub fn compressed_allotment(
    instance: &Instance,
    eps: f64,
) -> Result<(Allotment, f64), AllotmentError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AllotmentError::BadEps(eps));
    }
    let sizes = compressed_sizes(eps / 4.0, instance.m())?;
    optimal_allotment(instance, sizes.sizes())
}

#[derive(Clone, Copy, PartialEq)]
struct Finish(f64);

impl Eq for Finish {}

impl PartialOrd for Finish {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Finish {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Min-tree over list positions holding the width of each unstarted job.
struct WidthTree {
    size: usize,
    min: Vec<u64>,
}

impl WidthTree {
    fn new(widths: &[u64]) -> Self {
        let size = widths.len().next_power_of_two().max(1);
        let mut min = vec![u64::MAX; 2 * size];
        min[size..size + widths.len()].copy_from_slice(widths);
        for i in (1..size).rev() {
            min[i] = min[2 * i].min(min[2 * i + 1]);
        }
        WidthTree { size, min }
    }

    fn remove(&mut self, pos: usize) {
        let mut i = pos + self.size;
        self.min[i] = u64::MAX;
        while i > 1 {
            i /= 2;
            self.min[i] = self.min[2 * i].min(self.min[2 * i + 1]);
        }
    }

    /// Leftmost position whose width is at most `free`.
    fn first_fitting(&self, free: u64) -> Option<usize> {
        if self.min[1] > free {
            return None;
        }
        let mut i = 1;
        while i < self.size {
            i = if self.min[2 * i] <= free {
                2 * i
            } else {
                2 * i + 1
            };
        }
        Some(i - self.size)
    }
}

/// Greedy list scheduling of the fixed allotment: at time 0 and at every
/// finish event, walk the list and start each waiting job that fits into the
/// currently free machines.
pub fn list_schedule(
    instance: &Instance,
    allotment: &Allotment,
    order: &[JobId],
) -> Result<Schedule, AllotmentError> {
    allotment.check(instance)?;
    let n = instance.n();
    if order.len() != n {
        return Err(AllotmentError::BadOrder);
    }
    let mut seen = vec![false; n];
    for &j in order {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(AllotmentError::BadOrder);
        }
    }

    let widths: Vec<u64> = order.iter().map(|&j| allotment.get(j)).collect();
    let mut waiting = WidthTree::new(&widths);
    let mut running: BinaryHeap<(Reverse<Finish>, u64)> = BinaryHeap::new();
    let mut free = instance.m();
    let mut now = 0.0;
    let mut entries = Vec::with_capacity(n);
    loop {
        while let Some(pos) = waiting.first_fitting(free) {
            let job = order[pos];
            let k = widths[pos];
            waiting.remove(pos);
            free -= k;
            let entry = ScheduledJob {
                job,
                machines: k,
                start: now,
            };
            running.push((Reverse(Finish(entry.finish(instance))), k));
            entries.push(entry);
        }
        let Some((Reverse(Finish(t)), k)) = running.pop() else {
            break;
        };
        now = t;
        free += k;
        while let Some(&(Reverse(Finish(t2)), k2)) = running.peek() {
            if t2 != now {
                break;
            }
            running.pop();
            free += k2;
        }
    }
    debug_assert_eq!(entries.len(), n);
    Ok(Schedule::new(entries))
}

/// Jobs by decreasing processing time under `allotment`, ties by id.
pub fn longest_first(instance: &Instance, allotment: &Allotment) -> Vec<JobId> {
    let mut keyed: Vec<(f64, JobId)> = (0..instance.n())
        .map(|j| (instance.time(j, allotment.get(j)), j))
        .collect();
    keyed.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, j)| j).collect()
}

/// Bootstrap schedule: compressed lower-bound allotment plus list scheduling.
/// Returns the schedule, its makespan `T` and the allotment's `ω`.
pub fn constant_factor_schedule(
    instance: &Instance,
    eps: f64,
) -> Result<(Schedule, f64, f64), AllotmentError> {
    let (allotment, value) = compressed_allotment(instance, eps)?;
    let order = longest_first(instance, &allotment);
    let schedule = list_schedule(instance, &allotment, &order)?;
    let makespan = schedule.makespan(instance);
    Ok((schedule, makespan, value))
}
