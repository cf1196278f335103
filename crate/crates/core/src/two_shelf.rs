//! Estimator for the `3/2 + ε` regime.
//!
//! Big jobs go to one of two shelves: shelf 1 of height `d` with `γ′(j, d)`
//! machines or shelf 2 of height `d/2` with `γ′(j, d/2)` machines. A
//! knapsack over the shelf-1 widths picks the set whose move to shelf 1
//! saves the most work. Profits are rounded so that they are integers in a
//! common unit `u`, which keeps the knapsack exact.

use std::time::Instant;

use thiserror::Error;

use crate::allotment::{list_schedule, longest_first};
use crate::compression::{
    compressed_sizes, snapped_ceil, snapped_floor, CompressedSizes, CompressionError,
};
use crate::driver::{Estimate, Rejection};
use crate::knapsack::{
    bellman_dp_knapsack_with_witness, solve_knapsack_by_sizes, KnapsackError, KnapsackItem,
};
use crate::model::{Allotment, Instance, JobId, Schedule, ScheduledJob};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoShelfError {
    #[error("internal accuracy {0} must be 1/q for an integer q >= 1")]
    BadEpsHat(f64),
    #[error("guess {0} must be positive and finite")]
    BadGuess(f64),
    #[error(transparent)]
    Compression(#[from] CompressionError),
    #[error(transparent)]
    Knapsack(#[from] KnapsackError),
}

/// How the knapsack over shelf-1 widths is solved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum KnapsackBackend {
    /// Size classes folded by concave (max,+)-convolution.
    #[default]
    Convolution,
    /// Textbook dynamic program over all items.
    BellmanDp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub small: Vec<JobId>,
    pub big: Vec<JobId>,
    /// `Σ_small t(j, 1)`.
    pub small_work: f64,
}

/// Small iff `t(j, 1) ≤ d/2`.
pub fn classify_jobs(instance: &Instance, d: f64) -> Classification {
    let mut small = Vec::new();
    let mut big = Vec::new();
    let mut small_work = 0.0;
    for j in 0..instance.n() {
        let t = instance.time(j, 1);
        if t <= d / 2.0 {
            small.push(j);
            small_work += t;
        } else {
            big.push(j);
        }
    }
    Classification {
        small,
        big,
        small_work,
    }
}

/// Whether a job is wide (`≥ b` machines) on each shelf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    /// Narrow on both shelves; profit is the rounded-up work difference.
    NarrowNarrow,
    /// Wide on both shelves; processing times are rounded down to the shelf
    /// height over `1 + 4ρ`.
    WideWide,
    /// Wide on shelf 2 only.
    NarrowWide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModifiedItem {
    pub job: JobId,
    pub category: Category,
    /// `γ′(j, d)`, the knapsack size.
    pub shelf1: u64,
    /// `γ′(j, d/2)`.
    pub shelf2: u64,
    /// Profit in units of `u`.
    pub coefficient: i64,
    /// The rounding index `i` for narrow-narrow and narrow-wide items.
    pub index: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedKnapsack {
    pub d: f64,
    pub d_prime: f64,
    pub rho: f64,
    pub q: u64,
    /// `u = d / (2q(q+1))`.
    pub unit: f64,
    pub items: Vec<ModifiedItem>,
    /// Jobs that cannot meet `d/2`, with their shelf-1 widths.
    pub mandatory: Vec<(JobId, u64)>,
    /// Items whose rounded profit is not positive; they stay on shelf 2.
    pub dropped: Vec<ModifiedItem>,
    pub capacity: u64,
}

impl ModifiedKnapsack {
    pub fn knapsack_items(&self) -> Vec<KnapsackItem> {
        self.items
            .iter()
            .enumerate()
            .map(|(id, it)| KnapsackItem {
                id,
                size: it.shelf1,
                profit: it.coefficient,
            })
            .collect()
    }
}

/// `q` with `eps_hat = 1/q`.
pub fn inverse_accuracy(eps_hat: f64) -> Result<u64, TwoShelfError> {
    let inv = 1.0 / eps_hat;
    let q = snapped_floor(inv);
    if !(eps_hat > 0.0 && inv.is_finite() && q >= 1.0 && q == snapped_ceil(inv)) {
        return Err(TwoShelfError::BadEpsHat(eps_hat));
    }
    Ok(q as u64)
}

/// Builds the rounded knapsack for the big jobs, or the reason why `d` is
/// too small.
pub fn build_modified_knapsack(
    instance: &Instance,
    sizes: &CompressedSizes,
    big: &[JobId],
    d: f64,
    eps_hat: f64,
) -> Result<Result<ModifiedKnapsack, Rejection>, TwoShelfError> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(TwoShelfError::BadGuess(d));
    }
    let q = inverse_accuracy(eps_hat)?;
    let qi = q as i64;
    let b = sizes.b();
    let step = d / q as f64;
    let mut items = Vec::new();
    let mut dropped = Vec::new();
    let mut mandatory = Vec::new();
    let mut mandatory_width = 0u64;
    for &job in big {
        let Some(g1) = sizes.gamma_prime(instance, job, d) else {
            return Ok(Err(Rejection::GammaUndefined { job }));
        };
        let Some(g2) = sizes.gamma_prime(instance, job, d / 2.0) else {
            mandatory.push((job, g1));
            mandatory_width += g1;
            continue;
        };
        let (category, coefficient, index) = if g2 < b {
            let diff = instance.work_unchecked(job, g2) - instance.work_unchecked(job, g1);
            let i = (snapped_ceil(diff / step) as i64).clamp(1, 2 * qi * qi);
            (Category::NarrowNarrow, i * 2 * (qi + 1), i)
        } else if g1 >= b {
            let c = (g2 as i64 - 2 * g1 as i64) * qi * qi;
            (Category::WideWide, c, 0)
        } else {
            let w = instance.work_unchecked(job, g1);
            let i = (snapped_floor(w / step) as i64).clamp(0, 4 * qi * qi);
            (
                Category::NarrowWide,
                g2 as i64 * qi * qi - 2 * i * (qi + 1),
                i,
            )
        };
        let item = ModifiedItem {
            job,
            category,
            shelf1: g1,
            shelf2: g2,
            coefficient,
            index,
        };
        if coefficient > 0 {
            items.push(item);
        } else {
            dropped.push(item);
        }
    }
    let Some(capacity) = instance.m().checked_sub(mandatory_width) else {
        return Ok(Err(Rejection::MandatoryOverflow {
            width: mandatory_width,
            m: instance.m(),
        }));
    };
    Ok(Ok(ModifiedKnapsack {
        d,
        d_prime: (1.0 + 4.0 * eps_hat) * d,
        rho: sizes.rho(),
        q,
        unit: d / (2 * q * (q + 1)) as f64,
        items,
        mandatory,
        dropped,
        capacity,
    }))
}

/// Work of the two-shelf assignment: compressed widths for `d` on shelf 1
/// and for `d/2` on shelf 2.
pub fn total_work_two_shelf(
    instance: &Instance,
    sizes: &CompressedSizes,
    shelf1: &[JobId],
    big: &[JobId],
    d: f64,
) -> Result<f64, Rejection> {
    let mut on_first = vec![false; instance.n()];
    for &j in shelf1 {
        on_first[j] = true;
    }
    let mut total = 0.0;
    for &job in big {
        let s = if on_first[job] { d } else { d / 2.0 };
        let k = sizes
            .gamma_prime(instance, job, s)
            .ok_or(Rejection::GammaUndefined { job })?;
        total += instance.work_unchecked(job, k);
    }
    Ok(total)
}

/// `W_used ≤ m·d′ − W_small`.
pub fn accept_or_reject(w_used: f64, m: u64, d_prime: f64, w_small: f64) -> bool {
    w_used <= m as f64 * d_prime - w_small
}

/// Jobs with their machine counts per region of the two-shelf layout.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShelfAssignment {
    /// Start at 0, finish by `d′`.
    pub shelf1: Vec<(JobId, u64)>,
    /// Start at `d′`, finish by `3d′/2`.
    pub shelf2: Vec<(JobId, u64)>,
    /// Own machines for the whole window `[0, 3d′/2]`.
    pub full_window: Vec<(JobId, u64)>,
    /// One machine each, placed into idle gaps.
    pub small: Vec<JobId>,
}

fn width(list: &[(JobId, u64)]) -> u64 {
    list.iter().map(|&(_, k)| k).sum()
}

/// Moves shelf-2 jobs to the full window until both shelves fit next to it.
fn repair(
    instance: &Instance,
    assignment: &mut ShelfAssignment,
    window: f64,
) -> Result<(), Rejection> {
    let m = instance.m();
    let w1 = width(&assignment.shelf1);
    let mut w2 = width(&assignment.shelf2);
    let mut wa = width(&assignment.full_window);
    if wa + w2 <= m && wa + w1 <= m {
        return Ok(());
    }
    let mut candidates: Vec<(usize, u64, i128, f64)> = Vec::new();
    for (pos, &(job, k)) in assignment.shelf2.iter().enumerate() {
        let Some(g) = instance.gamma(job, window) else {
            return Err(Rejection::RepairFailed);
        };
        let gain = k as i128 - g as i128;
        candidates.push((pos, g, gain, instance.work_unchecked(job, g)));
    }
    candidates.sort_by(|a, b| b.2.cmp(&a.2).then(a.3.total_cmp(&b.3)).then(a.0.cmp(&b.0)));
    let mut moved = vec![false; assignment.shelf2.len()];
    for &(pos, g, _, _) in &candidates {
        if wa + w2 <= m || wa + w1 > m {
            break;
        }
        moved[pos] = true;
        w2 -= assignment.shelf2[pos].1;
        wa += g;
        assignment.full_window.push((assignment.shelf2[pos].0, g));
    }
    if wa + w2 > m || wa + w1 > m {
        return Err(Rejection::RepairFailed);
    }
    let mut keep = moved.iter().map(|&mv| !mv);
    assignment.shelf2.retain(|_| keep.next().unwrap());
    Ok(())
}

/// Max-tree over per-machine gaps for first-fit queries.
struct GapTree {
    size: usize,
    room: Vec<f64>,
}

impl GapTree {
    fn new(rooms: &[f64]) -> Self {
        let size = rooms.len().next_power_of_two().max(1);
        let mut room = vec![f64::NEG_INFINITY; 2 * size];
        room[size..size + rooms.len()].copy_from_slice(rooms);
        for i in (1..size).rev() {
            room[i] = room[2 * i].max(room[2 * i + 1]);
        }
        GapTree { size, room }
    }

    fn set(&mut self, pos: usize, value: f64) {
        let mut i = pos + self.size;
        self.room[i] = value;
        while i > 1 {
            i /= 2;
            self.room[i] = self.room[2 * i].max(self.room[2 * i + 1]);
        }
    }

    fn first_at_least(&self, need: f64) -> Option<usize> {
        if self.room[1] < need || need.is_nan() {
            return None;
        }
        let mut i = 1;
        while i < self.size {
            i = if self.room[2 * i] >= need {
                2 * i
            } else {
                2 * i + 1
            };
        }
        Some(i - self.size)
    }
}

/// Lays out the shelves on concrete machines and inserts the small jobs
/// first-fit decreasing into the idle gaps. The full-window jobs take the
/// lowest machine ids, shelf 1 and shelf 2 both fill the remaining ids from
/// the bottom. Every job finishes by `3d′/2`.
pub fn two_shelf_to_schedule(
    instance: &Instance,
    assignment: &ShelfAssignment,
    d_prime: f64,
) -> Result<Schedule, Rejection> {
    let m = instance.m();
    let horizon = d_prime + d_prime / 2.0;
    let mut assignment = assignment.clone();
    repair(instance, &mut assignment, horizon)?;

    let mut entries = Vec::with_capacity(instance.n());
    // Busy-until per machine and shelf-2 block boundaries, built as runs.
    let wa = width(&assignment.full_window);
    let mut gaps: Vec<(f64, f64)> = Vec::new();
    let mut machine = 0u64;
    for &(job, k) in &assignment.full_window {
        let t = instance.time(job, k);
        if t > horizon {
            return Err(Rejection::RepairFailed);
        }
        entries.push(ScheduledJob {
            job,
            machines: k,
            start: 0.0,
        });
        for _ in 0..k {
            gaps.push((t, horizon));
        }
        machine += k;
    }
    debug_assert_eq!(machine, wa);

    let free = (m - wa) as usize;
    let mut first_end = vec![0.0f64; free];
    let mut second = vec![None::<f64>; free];
    let mut cursor = 0usize;
    for &(job, k) in &assignment.shelf1 {
        let t = instance.time(job, k);
        if t > d_prime {
            return Err(Rejection::ShelfOverrun { job });
        }
        entries.push(ScheduledJob {
            job,
            machines: k,
            start: 0.0,
        });
        first_end[cursor..cursor + k as usize].fill(t);
        cursor += k as usize;
    }
    cursor = 0;
    for &(job, k) in &assignment.shelf2 {
        let t = instance.time(job, k);
        if t > d_prime / 2.0 {
            return Err(Rejection::ShelfOverrun { job });
        }
        entries.push(ScheduledJob {
            job,
            machines: k,
            start: d_prime,
        });
        second[cursor..cursor + k as usize].fill(Some(d_prime + t));
        cursor += k as usize;
    }
    for (&end1, &end2) in first_end.iter().zip(&second) {
        match end2 {
            Some(e) => {
                gaps.push((end1, d_prime));
                gaps.push((e, horizon));
            }
            None => gaps.push((end1, horizon)),
        }
    }

    let mut small = assignment.small.clone();
    small.sort_by(|&a, &b| {
        instance
            .time(b, 1)
            .total_cmp(&instance.time(a, 1))
            .then(a.cmp(&b))
    });
    let rooms: Vec<f64> = gaps.iter().map(|&(s, e)| e - s).collect();
    let mut tree = GapTree::new(&rooms);
    for job in small {
        let t = instance.time(job, 1);
        loop {
            let Some(pos) = tree.first_at_least(t) else {
                return Err(Rejection::InsertionFailed { job });
            };
            let (start, end) = gaps[pos];
            if start + t <= end {
                entries.push(ScheduledJob {
                    job,
                    machines: 1,
                    start,
                });
                gaps[pos].0 = start + t;
                tree.set(pos, end - (start + t));
                break;
            }
            // Subtraction said it fits, addition disagrees: shrink and retry.
            tree.set(pos, rooms_below(t));
        }
    }
    Ok(Schedule::new(entries))
}

#[inline]
fn rooms_below(t: f64) -> f64 {
    t.next_down()
}

/// Outcome details of one two-shelf guess, for telemetry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShelfTrace {
    pub knapsack_profit: Option<i64>,
    pub knapsack_ns: u64,
    /// The shelf layout failed and plain list scheduling of the shelf
    /// allotment met the `3d′/2` bound instead.
    pub used_fallback: bool,
}

/// Reusable two-shelf estimator for one instance and accuracy.
#[derive(Clone, Debug)]
pub struct ThreeHalfEstimator {
    eps_hat: f64,
    sizes: CompressedSizes,
    backend: KnapsackBackend,
}

impl ThreeHalfEstimator {
    pub fn new(
        instance: &Instance,
        eps_hat: f64,
        backend: KnapsackBackend,
    ) -> Result<Self, TwoShelfError> {
        inverse_accuracy(eps_hat)?;
        let sizes = compressed_sizes(eps_hat / 4.0, instance.m())?;
        Ok(ThreeHalfEstimator {
            eps_hat,
            sizes,
            backend,
        })
    }

    pub fn sizes(&self) -> &CompressedSizes {
        &self.sizes
    }

    pub fn eps_hat(&self) -> f64 {
        self.eps_hat
    }

    /// Accepted schedules finish by `(3/2)(1 + 4ε̂)·d`.
    pub fn estimate(
        &self,
        instance: &Instance,
        d: f64,
    ) -> Result<(Estimate, ShelfTrace), TwoShelfError> {
        let mut trace = ShelfTrace::default();
        let classes = classify_jobs(instance, d);
        let kp =
            match build_modified_knapsack(instance, &self.sizes, &classes.big, d, self.eps_hat)? {
                Ok(kp) => kp,
                Err(r) => return Ok((Estimate::Reject(r), trace)),
            };
        let items = kp.knapsack_items();
        let started = Instant::now();
        let solution = match self.backend {
            KnapsackBackend::Convolution => solve_knapsack_by_sizes(&items, kp.capacity)?,
            KnapsackBackend::BellmanDp => bellman_dp_knapsack_with_witness(&items, kp.capacity)?,
        };
        trace.knapsack_ns = started.elapsed().as_nanos() as u64;
        trace.knapsack_profit = Some(solution.profit);

        let mut assignment = ShelfAssignment {
            shelf1: kp.mandatory.clone(),
            small: classes.small.clone(),
            ..ShelfAssignment::default()
        };
        let mut chosen = vec![false; kp.items.len()];
        for &id in &solution.chosen {
            chosen[id] = true;
        }
        for (it, &c) in kp.items.iter().zip(&chosen) {
            if c {
                assignment.shelf1.push((it.job, it.shelf1));
            } else {
                assignment.shelf2.push((it.job, it.shelf2));
            }
        }
        for it in &kp.dropped {
            assignment.shelf2.push((it.job, it.shelf2));
        }
        let w_used: f64 = assignment
            .shelf1
            .iter()
            .chain(&assignment.shelf2)
            .map(|&(j, k)| instance.work_unchecked(j, k))
            .sum();
        if !accept_or_reject(w_used, instance.m(), kp.d_prime, classes.small_work) {
            return Ok((
                Estimate::Reject(Rejection::WorkExceeded {
                    used: w_used + classes.small_work,
                    limit: instance.m() as f64 * kp.d_prime,
                }),
                trace,
            ));
        }
        match two_shelf_to_schedule(instance, &assignment, kp.d_prime) {
            Ok(s) => Ok((Estimate::Accept(s), trace)),
            Err(reason) => match fallback(instance, &assignment, kp.d_prime) {
                Some(s) => {
                    trace.used_fallback = true;
                    Ok((Estimate::Accept(s), trace))
                }
                None => Ok((Estimate::Reject(reason), trace)),
            },
        }
    }
}

/// List scheduling of the shelf allotment, kept only if it meets `3d′/2`.
fn fallback(instance: &Instance, assignment: &ShelfAssignment, d_prime: f64) -> Option<Schedule> {
    let mut alloc = vec![1u64; instance.n()];
    for &(j, k) in assignment.shelf1.iter().chain(&assignment.shelf2) {
        alloc[j] = k;
    }
    let alloc = Allotment(alloc);
    let order = longest_first(instance, &alloc);
    let s = list_schedule(instance, &alloc, &order).ok()?;
    (s.makespan(instance) <= d_prime + d_prime / 2.0).then_some(s)
}

/// One-shot form of [`ThreeHalfEstimator::estimate`] with the convolution
/// backend.
pub fn three_half_estimate(
    instance: &Instance,
    d: f64,
    eps_hat: f64,
) -> Result<Estimate, TwoShelfError> {
    ThreeHalfEstimator::new(instance, eps_hat, KnapsackBackend::Convolution)?
        .estimate(instance, d)
        .map(|(e, _)| e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_schedule, ProcessingTimeModel};

    fn table(times: &[f64]) -> ProcessingTimeModel {
        ProcessingTimeModel::Table(times.to_vec())
    }

    /// Constant time `t` from `k` machines on, proportionally longer below.
    fn rigid(m: u64, k: u64, t: f64) -> ProcessingTimeModel {
        table(
            &(1..=m)
                .map(|i| if i >= k { t } else { t * k as f64 / i as f64 })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn classification_boundary() {
        let inst = Instance::new(1, vec![table(&[5.0]), table(&[5.01])]).unwrap();
        let c = classify_jobs(&inst, 10.0);
        assert_eq!(c.small, vec![0]);
        assert_eq!(c.big, vec![1]);
        assert_eq!(c.small_work, 5.0);
        let c = classify_jobs(&inst, 20.0);
        assert!(c.big.is_empty());
    }

    #[test]
    fn acceptance_inequality() {
        assert!(accept_or_reject(10.0, 4, 3.0, 1.0));
        assert!(!accept_or_reject(12.0, 4, 3.0, 1.0));
        assert!(accept_or_reject(11.0, 4, 3.0, 1.0));
    }

    #[test]
    fn accuracy_must_be_reciprocal_integer() {
        assert_eq!(inverse_accuracy(0.5), Ok(2));
        assert_eq!(inverse_accuracy(1.0 / 30.0), Ok(30));
        assert!(inverse_accuracy(0.3).is_err());
        assert!(inverse_accuracy(0.0).is_err());
    }

    /// `m = 40` with `ε̂ = 1/2`: `ρ = 1/8`, `b = 8`, `u = d/12`.
    fn half_sizes() -> CompressedSizes {
        compressed_sizes(0.125, 40).unwrap()
    }

    #[test]
    fn narrow_item_rounds_up_to_one_step() {
        // t(1) = 7.6, t(2) = 3.8, t(4) = 1.9: work 7.6 on both shelves.
        let times: Vec<f64> = (1..=40).map(|k| 7.6 / (k.min(4) as f64)).collect();
        let inst = Instance::new(40, vec![table(&times)]).unwrap();
        let kp = build_modified_knapsack(&inst, &half_sizes(), &[0], 4.0, 0.5)
            .unwrap()
            .unwrap();
        let it = kp.items[0];
        assert_eq!((it.shelf1, it.shelf2), (2, 4));
        assert_eq!(it.category, Category::NarrowNarrow);
        assert_eq!(it.coefficient, 6);
        assert_eq!(it.coefficient as f64 * kp.unit, 2.0);
        assert_eq!(kp.capacity, 40);
    }

    fn speedup_table(m: u64, f: impl Fn(f64) -> f64) -> ProcessingTimeModel {
        table(&(1..=m).map(|k| f(k as f64)).collect::<Vec<_>>())
    }

    #[test]
    fn wide_items_use_width_difference() {
        let sizes = half_sizes();
        // Work 40 up to 10 machines, 44 beyond: the first size meeting 4 is
        // 10 and the first meeting 2 is 23, so γ′ is 9 and 20.
        let job = speedup_table(40, |k| if k <= 10.0 { 40.0 / k } else { 44.0 / k });
        let inst = Instance::new(40, vec![job]).unwrap();
        assert!(crate::model::validate_instance(&inst).valid);
        assert_eq!(sizes.gamma_prime(&inst, 0, 4.0), Some(9));
        assert_eq!(sizes.gamma_prime(&inst, 0, 2.0), Some(20));
        let kp = build_modified_knapsack(&inst, &sizes, &[0], 4.0, 0.5)
            .unwrap()
            .unwrap();
        assert_eq!(kp.items[0].category, Category::WideWide);
        assert_eq!(kp.items[0].coefficient, 8);
        assert!((8.0 * kp.unit - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn non_positive_wide_profit_is_dropped() {
        let sizes = half_sizes();
        // Constant work 40: γ′(4) = 9 and γ′(2) = 18, coefficient (18 − 18)·4.
        let inst = Instance::new(40, vec![speedup_table(40, |k| 40.0 / k)]).unwrap();
        let kp = build_modified_knapsack(&inst, &sizes, &[0], 4.0, 0.5)
            .unwrap()
            .unwrap();
        assert!(kp.items.is_empty());
        let it = kp.dropped[0];
        assert_eq!((it.shelf1, it.shelf2), (9, 18));
        assert_eq!(it.coefficient, 0);
    }

    #[test]
    fn job_missing_half_guess_is_mandatory() {
        let sizes = half_sizes();
        let inst = Instance::new(40, vec![speedup_table(40, |k| 4.0f64.max(40.0 / k))]).unwrap();
        let kp = build_modified_knapsack(&inst, &sizes, &[0], 4.0, 0.5)
            .unwrap()
            .unwrap();
        assert_eq!(kp.mandatory, vec![(0, 9)]);
        assert_eq!(kp.capacity, 31);
        let inst = Instance::new(40, vec![speedup_table(40, |k| 5.0f64.max(40.0 / k))]).unwrap();
        assert_eq!(
            build_modified_knapsack(&inst, &sizes, &[0], 4.0, 0.5).unwrap(),
            Err(Rejection::GammaUndefined { job: 0 })
        );
    }

    #[test]
    fn work_of_shelves() {
        let inst = Instance::new(
            4,
            vec![
                table(&[6.0, 3.0, 2.0, 1.5]),
                table(&[10.0, 5.0, 10.0 / 3.0, 2.5]),
            ],
        )
        .unwrap();
        let sizes = compressed_sizes(0.25, 4).unwrap();
        // a on shelf 1 at d = 6 (one machine, work 6); b on shelf 2 at 3.
        assert_eq!(
            total_work_two_shelf(&inst, &sizes, &[0], &[0, 1], 6.0),
            Ok(6.0 + 10.0)
        );
        assert_eq!(total_work_two_shelf(&inst, &sizes, &[], &[], 6.0), Ok(0.0));
    }

    #[test]
    fn conversion_places_small_job_in_idle_machine() {
        let inst = Instance::new(
            4,
            vec![rigid(4, 2, 1.8), rigid(4, 2, 0.9), table(&[0.8; 4])],
        )
        .unwrap();
        let a = ShelfAssignment {
            shelf1: vec![(0, 2)],
            shelf2: vec![(1, 2)],
            full_window: vec![],
            small: vec![2],
        };
        let s = two_shelf_to_schedule(&inst, &a, 2.0).unwrap();
        let get = |j| *s.entries.iter().find(|e| e.job == j).unwrap();
        assert_eq!((get(0).start, get(0).machines), (0.0, 2));
        assert_eq!((get(1).start, get(1).machines), (2.0, 2));
        assert_eq!((get(2).start, get(2).machines), (0.0, 1));
        let report = validate_schedule(&s, &inst).unwrap();
        assert!(report.feasible);
        assert!((report.makespan - 2.9).abs() < 1e-12);
    }

    #[test]
    fn conversion_repairs_overfull_second_shelf() {
        // All shelf-2 jobs fit the full window on one machine; z and v have
        // the least work there and move first.
        let inst = Instance::new(
            4,
            vec![
                rigid(4, 2, 1.8),
                rigid(4, 2, 0.9),
                table(&[1.0, 0.5, 0.5, 0.5]),
                table(&[1.2, 0.6, 0.6, 0.6]),
            ],
        )
        .unwrap();
        let a = ShelfAssignment {
            shelf1: vec![(0, 2)],
            shelf2: vec![(1, 2), (2, 2), (3, 2)],
            full_window: vec![],
            small: vec![],
        };
        let s = two_shelf_to_schedule(&inst, &a, 2.0).unwrap();
        let get = |j| *s.entries.iter().find(|e| e.job == j).unwrap();
        assert_eq!((get(2).start, get(2).machines), (0.0, 1));
        assert_eq!((get(3).start, get(3).machines), (0.0, 1));
        assert_eq!((get(1).start, get(1).machines), (2.0, 2));
        let report = validate_schedule(&s, &inst).unwrap();
        assert!(report.feasible);
        assert!(report.makespan <= 3.0);
    }

    #[test]
    fn empty_second_shelf() {
        let inst = Instance::new(4, vec![rigid(4, 3, 1.5)]).unwrap();
        let a = ShelfAssignment {
            shelf1: vec![(0, 3)],
            ..ShelfAssignment::default()
        };
        let s = two_shelf_to_schedule(&inst, &a, 2.0).unwrap();
        assert_eq!(s.makespan(&inst), 1.5);
    }

    #[test]
    fn estimate_rejects_tiny_guess_and_accepts_generous_one() {
        let inst = Instance::new(
            4,
            vec![
                table(&[4.0, 2.5, 2.0, 1.5]),
                table(&[3.0, 2.0, 2.0, 2.0]),
                table(&[1.0, 1.0, 1.0, 1.0]),
            ],
        )
        .unwrap();
        assert!(matches!(
            three_half_estimate(&inst, 0.5, 0.25).unwrap(),
            Estimate::Reject(_)
        ));
        match three_half_estimate(&inst, 8.0, 0.25).unwrap() {
            Estimate::Accept(s) => {
                let r = validate_schedule(&s, &inst).unwrap();
                assert!(r.feasible);
                assert!(r.makespan <= 1.5 * 2.0 * 8.0);
            }
            Estimate::Reject(r) => panic!("rejected {r:?}"),
        }
    }
}
