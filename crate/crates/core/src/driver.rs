//! Dual approximation: bootstrap a constant-factor makespan `T`, then bisect
//! a geometric grid of guesses in `[T/4, T]` with an estimator that either
//! builds a schedule or certifies that the guess is below the optimum.

use thiserror::Error;

use crate::allotment::{constant_factor_schedule, AllotmentError};
use crate::compression::snapped_ceil;
use crate::fptas::{largest_regime_q, FptasError, FptasEstimator};
use crate::model::{validate_instance, Instance, InstanceViolation, Schedule};
use crate::two_shelf::{KnapsackBackend, ThreeHalfEstimator, TwoShelfError};

/// Why an estimator refused a guess.
#[derive(Clone, Debug, PartialEq)]
pub enum Rejection {
    /// Even `m` machines cannot finish the job within the guess.
    GammaUndefined { job: usize },
    /// The compressed widths add up to more than `m`.
    CapacityExceeded { used: u64, m: u64 },
    /// Jobs that only fit shelf 1 are already wider than `m`.
    MandatoryOverflow { width: u64, m: u64 },
    /// Total work of the shelf assignment plus small jobs exceeds `m·d′`.
    WorkExceeded { used: f64, limit: f64 },
    /// Shelf 2 could not be made to fit next to the full-window jobs.
    RepairFailed,
    /// A shelf job is longer than its shelf.
    ShelfOverrun { job: usize },
    /// No idle gap is left for a small job.
    InsertionFailed { job: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    Accept(Schedule),
    Reject(Rejection),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("accuracy {0} outside (0, 1)")]
    BadEps(f64),
    #[error("invalid instance: job {} fails at k = {} ({:?})", .0.job, .0.k, .0.kind)]
    InvalidInstance(InstanceViolation),
    #[error("upper bound {0} must be positive and finite")]
    BadUpperBound(f64),
    #[error("estimator rejected the upper bound: {0:?}")]
    TopRejected(Rejection),
    #[error("instance is outside the many-machine regime")]
    WrongRegime,
    #[error(transparent)]
    Allotment(#[from] AllotmentError),
    #[error(transparent)]
    Fptas(#[from] FptasError),
    #[error(transparent)]
    TwoShelf(#[from] TwoShelfError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Fptas,
    ThreeHalf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Requested accuracy.
    pub eps: f64,
    /// Grid ratio `1 + eps_hat`; always `1/q` for an integer `q ≥ 4`.
    pub eps_hat: f64,
    /// Accuracy handed to the estimator (equals `eps_hat` for two-shelf).
    pub estimator_eps: f64,
    pub regime: Regime,
    /// Ratio of the bootstrap schedule.
    pub c: f64,
    pub backend: KnapsackBackend,
}

fn check_eps(eps: f64) -> Result<(), DriverError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(DriverError::BadEps(eps))
    }
}

fn reciprocal_ceil(x: f64) -> u64 {
    snapped_ceil(x) as u64
}

impl SolverConfig {
    /// Two-shelf configuration: `eps_hat = 1/⌈9/eps⌉`, which keeps
    /// `(3/2)(1 + 4ε̂)(1 + ε̂) ≤ 3/2 + eps`.
    pub fn three_half(eps: f64) -> Result<Self, DriverError> {
        check_eps(eps)?;
        let eps_hat = 1.0 / reciprocal_ceil(9.0 / eps) as f64;
        Ok(SolverConfig {
            eps,
            eps_hat,
            estimator_eps: eps_hat,
            regime: Regime::ThreeHalf,
            c: 4.0,
            backend: KnapsackBackend::Convolution,
        })
    }

    /// Many-machine configuration. The grid uses `1/⌈5/eps⌉`; the estimator
    /// uses the same accuracy when `m` is large enough for it and otherwise
    /// the finest `1/q` with `m > 8nq`. `None` when `m ≤ 8n`.
    pub fn fptas(instance: &Instance, eps: f64) -> Result<Option<Self>, DriverError> {
        check_eps(eps)?;
        let q_grid = reciprocal_ceil(5.0 / eps);
        let Some(q_max) = largest_regime_q(instance.m(), instance.n()) else {
            return Ok(None);
        };
        let q = q_grid.min(q_max);
        Ok(Some(SolverConfig {
            eps,
            eps_hat: 1.0 / q_grid as f64,
            estimator_eps: 1.0 / q as f64,
            regime: Regime::Fptas,
            c: 4.0,
            backend: KnapsackBackend::Convolution,
        }))
    }

    /// Picks whichever applicable regime proves the smaller ratio.
    pub fn for_instance(instance: &Instance, eps: f64) -> Result<Self, DriverError> {
        let half = Self::three_half(eps)?;
        match Self::fptas(instance, eps)? {
            Some(f) if f.guarantee() < half.guarantee() => Ok(f),
            _ => Ok(half),
        }
    }

    pub fn with_backend(mut self, backend: KnapsackBackend) -> Self {
        self.backend = backend;
        self
    }

    /// Proven worst-case ratio of the final makespan to the optimum.
    pub fn guarantee(&self) -> f64 {
        match self.regime {
            Regime::Fptas => (1.0 + 3.0 * self.estimator_eps) * (1.0 + self.eps_hat),
            Regime::ThreeHalf => 1.5 * (1.0 + 4.0 * self.eps_hat) * (1.0 + self.eps_hat),
        }
    }
}

/// One estimator call.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub d: f64,
    pub accepted: bool,
    pub rejection: Option<Rejection>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub grid: Vec<f64>,
    /// Grid index of the returned guess.
    pub index: usize,
    pub d: f64,
    pub schedule: Schedule,
    /// `d_{index − 1}`, rejected; `None` when `index = 0`.
    pub last_rejected: Option<f64>,
    pub probes: Vec<Probe>,
}

/// `d_i = (T/4)(1 + ε̂)^i` for `i = 0..=⌈log_{1+ε̂} 4⌉`, last point set to `T`.
pub fn guess_grid(t: f64, eps_hat: f64) -> Vec<f64> {
    let growth = 1.0 + eps_hat;
    let mut steps = 0i32;
    while growth.powi(steps) < 4.0 * (1.0 - 1e-12) {
        steps += 1;
    }
    let mut grid: Vec<f64> = (0..=steps).map(|i| t / 4.0 * growth.powi(i)).collect();
    *grid.last_mut().unwrap() = t;
    grid
}

/// Bisection over [`guess_grid`]. The upper end is probed first and must be
/// accepted. The result is accepted and its predecessor (if any) rejected,
/// so `d ≤ (1 + ε̂)·OPT` whenever rejections are sound; acceptance need not
/// be monotone.
pub fn dual_approx_search<F>(
    t: f64,
    eps_hat: f64,
    mut estimator: F,
) -> Result<SearchOutcome, DriverError>
where
    F: FnMut(f64) -> Result<Estimate, DriverError>,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(DriverError::BadUpperBound(t));
    }
    let grid = guess_grid(t, eps_hat);
    let mut probes = Vec::new();
    let mut probe = |d: f64, probes: &mut Vec<Probe>| -> Result<Option<Schedule>, DriverError> {
        let e = estimator(d)?;
        let (accepted, rejection, schedule) = match e {
            Estimate::Accept(s) => (true, None, Some(s)),
            Estimate::Reject(r) => (false, Some(r), None),
        };
        probes.push(Probe {
            d,
            accepted,
            rejection,
        });
        Ok(schedule)
    };

    let mut hi = grid.len() - 1;
    let mut best = match probe(grid[hi], &mut probes)? {
        Some(s) => s,
        None => {
            let r = probes.last().unwrap().rejection.clone().unwrap();
            return Err(DriverError::TopRejected(r));
        }
    };
    let mut lo: Option<usize> = None;
    loop {
        let low = lo.map_or(0, |l| l + 1);
        if low >= hi {
            break;
        }
        let mid = low + (hi - low) / 2;
        match probe(grid[mid], &mut probes)? {
            Some(s) => {
                hi = mid;
                best = s;
            }
            None => lo = Some(mid),
        }
    }
    Ok(SearchOutcome {
        index: hi,
        d: grid[hi],
        schedule: best,
        last_rejected: hi.checked_sub(1).map(|i| grid[i]),
        probes,
        grid,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub bootstrap_makespan: f64,
    /// Lower bound `ω` of the bootstrap allotment.
    pub bootstrap_omega: f64,
    pub grid_len: usize,
    pub probes: Vec<Probe>,
    /// Knapsack optimum per two-shelf guess, in probe order.
    pub knapsack_profits: Vec<(f64, i64)>,
    pub knapsack_ns: u64,
    /// Guesses where the shelf layout failed and list scheduling was used.
    pub shelf_fallbacks: usize,
    /// The estimator refused the bootstrap makespan itself.
    pub top_rejected: bool,
}

impl SolveStats {
    pub fn estimator_calls(&self) -> usize {
        self.probes.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub schedule: Schedule,
    pub makespan: f64,
    /// Certified: the largest rejected guess below the result, or the
    /// compressed lower bound scaled back by `1 + eps`.
    pub lower_bound: f64,
    /// Proven ratio of `makespan` to the optimum.
    pub guarantee: f64,
    pub label: String,
    pub regime: Regime,
    pub c: f64,
    pub stats: SolveStats,
}

/// Runs the full pipeline with the regime proving the better ratio.
pub fn solve(instance: &Instance, eps: f64) -> Result<SolveResult, DriverError> {
    let config = SolverConfig::for_instance(instance, eps)?;
    solve_with(instance, &config)
}

pub fn solve_with(instance: &Instance, config: &SolverConfig) -> Result<SolveResult, DriverError> {
    check_eps(config.eps)?;
    let report = validate_instance(instance);
    if let Some(v) = report.violation {
        return Err(DriverError::InvalidInstance(v));
    }
    let (boot, t, omega) = constant_factor_schedule(instance, config.eps)?;
    let mut stats = SolveStats {
        bootstrap_makespan: t,
        bootstrap_omega: omega,
        ..SolveStats::default()
    };
    let omega_bound = omega / (1.0 + config.eps);

    let outcome = match config.regime {
        Regime::Fptas => {
            let est = FptasEstimator::new(instance, config.estimator_eps)?;
            dual_approx_search(t, config.eps_hat, |d| Ok(est.estimate(instance, d)?))
        }
        Regime::ThreeHalf => {
            let est = ThreeHalfEstimator::new(instance, config.estimator_eps, config.backend)?;
            let stats = &mut stats;
            dual_approx_search(t, config.eps_hat, |d| {
                let (e, trace) = est.estimate(instance, d)?;
                if let Some(p) = trace.knapsack_profit {
                    stats.knapsack_profits.push((d, p));
                }
                stats.knapsack_ns += trace.knapsack_ns;
                stats.shelf_fallbacks += trace.used_fallback as usize;
                Ok(e)
            })
        }
    };

    let label_for = |regime: Regime, g: f64| match regime {
        Regime::Fptas => format!("fptas (ratio <= {g:.4})"),
        Regime::ThreeHalf => format!("three-half (ratio <= {g:.4})"),
    };
    let (schedule, lower_bound, guarantee, label) = match outcome {
        Ok(found) => {
            stats.grid_len = found.grid.len();
            stats.probes = found.probes;
            let lb = found.last_rejected.unwrap_or(0.0).max(omega_bound);
            let g = config.guarantee();
            let chosen = if found.schedule.makespan(instance) <= t {
                found.schedule
            } else {
                boot
            };
            (chosen, lb, g, label_for(config.regime, g))
        }
        Err(DriverError::TopRejected(r)) => {
            stats.top_rejected = true;
            stats.probes = vec![Probe {
                d: t,
                accepted: false,
                rejection: Some(r),
            }];
            (
                boot,
                omega_bound,
                config.c,
                format!("bootstrap (ratio <= {})", config.c),
            )
        }
        Err(e) => return Err(e),
    };
    let makespan = schedule.makespan(instance);
    Ok(SolveResult {
        schedule,
        makespan,
        lower_bound,
        guarantee,
        label,
        regime: config.regime,
        c: config.c,
        stats,
    })
}
