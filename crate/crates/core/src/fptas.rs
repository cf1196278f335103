//! Estimator and solver for instances with many machines (`m > 8n/ε`).

use thiserror::Error;

use crate::compression::{
    compress_count, compressed_sizes, snapped_ceil, snapped_floor, CompressedSizes,
    CompressionError,
};
use crate::driver::{solve_with, DriverError, Estimate, Rejection, SolveResult, SolverConfig};
use crate::model::{Instance, Schedule, ScheduledJob};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FptasError {
    #[error("accuracy {0} outside (0, 1]")]
    BadEps(f64),
    #[error("guess {0} must be positive and finite")]
    BadGuess(f64),
    #[error("wrong regime: needs m > 8n/eps (m = {m}, n = {n}, eps = {eps})")]
    WrongRegime { m: u64, n: usize, eps: f64 },
    #[error(transparent)]
    Compression(#[from] CompressionError),
}

/// Largest `q ≥ 1` with `m > 8nq`, if any.
pub fn largest_regime_q(m: u64, n: usize) -> Option<u64> {
    let unit = 8u128 * n as u128;
    let q = (m as u128).saturating_sub(1) / unit;
    (q >= 1).then(|| q.min(u64::MAX as u128) as u64)
}

/// `m > 8n/eps`; exact in integers when `1/eps` is (up to rounding) an
/// integer.
pub fn in_regime(m: u64, n: usize, eps: f64) -> bool {
    let inv = 1.0 / eps;
    let q = snapped_floor(inv);
    if q == snapped_ceil(inv) && q < 1e18 {
        m as u128 > 8 * n as u128 * q as u128
    } else {
        m as f64 * eps > 8.0 * n as f64
    }
}

/// Pre-built state for repeated [`fptas_estimate`] calls at one accuracy.
#[derive(Clone, Debug)]
pub struct FptasEstimator {
    eps: f64,
    sizes: CompressedSizes,
}

impl FptasEstimator {
    pub fn new(instance: &Instance, eps: f64) -> Result<Self, FptasError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(FptasError::BadEps(eps));
        }
        if !in_regime(instance.m(), instance.n(), eps) {
            return Err(FptasError::WrongRegime {
                m: instance.m(),
                n: instance.n(),
                eps,
            });
        }
        let sizes = compressed_sizes(eps / 4.0, instance.m())?;
        Ok(FptasEstimator { eps, sizes })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sizes(&self) -> &CompressedSizes {
        &self.sizes
    }

    /// Every job gets its compressed γ; counts above `b` are compressed once
    /// more. All jobs start at 0. Rejects when some job cannot meet `d` on
    /// `m` machines or the counts do not fit, both of which imply `d < OPT`.
    pub fn estimate(&self, instance: &Instance, d: f64) -> Result<Estimate, FptasError> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(FptasError::BadGuess(d));
        }
        let rho = self.sizes.rho();
        let b = self.sizes.b();
        let m = instance.m();
        let mut used = 0u64;
        let mut entries = Vec::with_capacity(instance.n());
        for job in 0..instance.n() {
            let Some(k) = self.sizes.gamma_prime(instance, job, d) else {
                return Ok(Estimate::Reject(Rejection::GammaUndefined { job }));
            };
            let machines = if k > b { compress_count(k, rho)? } else { k };
            used += machines;
            if used > m {
                return Ok(Estimate::Reject(Rejection::CapacityExceeded { used, m }));
            }
            entries.push(ScheduledJob {
                job,
                machines,
                start: 0.0,
            });
        }
        Ok(Estimate::Accept(Schedule::new(entries)))
    }
}

/// One-shot form of [`FptasEstimator::estimate`]. Accepted schedules have
/// makespan at most `(1 + 3eps)·d`.
pub fn fptas_estimate(instance: &Instance, d: f64, eps: f64) -> Result<Estimate, FptasError> {
    FptasEstimator::new(instance, eps)?.estimate(instance, d)
}

/// Dual approximation with [`FptasEstimator`]. Requires `m > 8n/eps`. The
/// ratio is `(1 + eps)` once `m > 8n⌈5/eps⌉`; below that the estimator runs
/// at the finest accuracy `m` allows and the result reports the weaker
/// proven ratio.
pub fn fptas_solve(instance: &Instance, eps: f64) -> Result<SolveResult, DriverError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(DriverError::BadEps(eps));
    }
    if !in_regime(instance.m(), instance.n(), eps) {
        return Err(DriverError::WrongRegime);
    }
    let config = SolverConfig::fptas(instance, eps)?.ok_or(DriverError::WrongRegime)?;
    solve_with(instance, &config)
}
