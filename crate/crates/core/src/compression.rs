//! ρ-compressed machine counts.
//!
//! Taking `⌊(1 − ρ)k⌋` machines instead of `k ≥ 1/ρ` makes a monotone job at
//! most `1 + 4ρ` times slower. The set of compressed sizes keeps every count
//! up to `b = ⌈1/ρ⌉` and a geometric grid `⌊(1 + ρ)^i · b⌋` above it, so that
//! rounding any count down to the previous size is such a compression.

use thiserror::Error;

use crate::model::{Instance, JobId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompressionError {
    #[error("compression factor {0} outside (0, 1/4]")]
    BadRho(f64),
    #[error("machine count {k} is not compressible with rho = {rho} (needs k >= 1/rho)")]
    NotCompressible { k: u64, rho: f64 },
    #[error("machine count must be at least 1")]
    ZeroCount,
    #[error("instance needs at least one machine")]
    NoMachines,
}

fn check_rho(rho: f64) -> Result<(), CompressionError> {
    if rho > 0.0 && rho <= 0.25 {
        Ok(())
    } else {
        Err(CompressionError::BadRho(rho))
    }
}

/// Slack for treating a product that should be an integer as one. Compression
/// factors are usually `1/q` for integer `q`, which binary64 cannot represent.
#[inline]
fn snap_tolerance(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}

#[inline]
pub(crate) fn snapped_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= snap_tolerance(x) {
        r
    } else {
        x.floor()
    }
}

#[inline]
pub(crate) fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= snap_tolerance(x) {
        r
    } else {
        x.ceil()
    }
}

/// `b = ⌈1/ρ⌉`.
pub fn threshold(rho: f64) -> u64 {
    snapped_ceil(1.0 / rho) as u64
}

/// `⌊(1 − ρ)k⌋`, computed as `k − ⌈ρk⌉`.
pub fn compress_count(k: u64, rho: f64) -> Result<u64, CompressionError> {
    check_rho(rho)?;
    if k < threshold(rho) {
        return Err(CompressionError::NotCompressible { k, rho });
    }
    let freed = snapped_ceil(rho * k as f64) as u64;
    Ok(k - freed)
}

/// The sorted set `S_ρ ⊆ [1, m]` of ρ-compressed sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedSizes {
    rho: f64,
    b: u64,
    m: u64,
    sizes: Vec<u64>,
    exponents: usize,
}

/// Builds `[b] ∪ {⌊(1+ρ)^i · b⌋ : 1 ≤ i ≤ ⌈log_{1+ρ}(m/b)⌉}` with values above
/// `m` clamped to `m`. For `m ≤ b` every count `1..=m` is a size.
pub fn compressed_sizes(rho: f64, m: u64) -> Result<CompressedSizes, CompressionError> {
    check_rho(rho)?;
    if m == 0 {
        return Err(CompressionError::NoMachines);
    }
    let b = threshold(rho);
    if m <= b {
        return Ok(CompressedSizes {
            rho,
            b,
            m,
            sizes: (1..=m).collect(),
            exponents: 0,
        });
    }
    let mut sizes: Vec<u64> = (1..=b).collect();
    let growth = 1.0 + rho;
    let mut exponents = 0usize;
    loop {
        exponents += 1;
        let raw = snapped_floor(growth.powi(exponents as i32) * b as f64);
        if raw >= m as f64 {
            break;
        }
        let value = raw as u64;
        if value > *sizes.last().unwrap() {
            sizes.push(value);
        }
    }
    sizes.push(m);
    Ok(CompressedSizes {
        rho,
        b,
        m,
        sizes,
        exponents,
    })
}

impl CompressedSizes {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `b = ⌈1/ρ⌉`; every count up to `min(b, m)` is a size.
    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn contains(&self, k: u64) -> bool {
        self.sizes.binary_search(&k).is_ok()
    }

    /// Number of geometric exponents `⌈log_{1+ρ}(m/b)⌉` (zero when `m ≤ b`).
    pub fn exponent_count(&self) -> usize {
        self.exponents
    }

    /// Entries produced by the defining formula before clamping and
    /// deduplication: `b + ⌈log_{1+ρ}(m/b)⌉`, or `m` when `m ≤ b`.
    pub fn formula_len(&self) -> usize {
        if self.m <= self.b {
            self.m as usize
        } else {
            self.b as usize + self.exponents
        }
    }

    /// Largest size `≤ k`; counts above `m` round to `m`.
    pub fn round_down(&self, k: u64) -> Result<u64, CompressionError> {
        if k == 0 {
            return Err(CompressionError::ZeroCount);
        }
        let idx = self.sizes.partition_point(|&s| s <= k);
        Ok(self.sizes[idx - 1])
    }

    /// Compressed γ using `O(log |S|)` time queries.
    ///
    /// Finds the smallest size `s⁺` with `t(j, s⁺) ≤ d`. Counts up to `b` are
    /// returned as is; above `b` the predecessor of `s⁺` is returned. The
    /// result never exceeds `γ(j, d)` and its time is at most `(1 + 4ρ)·d`.
    pub fn gamma_prime(&self, instance: &Instance, job: JobId, d: f64) -> Option<u64> {
        let model = &instance.jobs()[job];
        let last = *self.sizes.last()?;
        if model.time(last) > d {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.sizes.len() - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if model.time(self.sizes[mid]) <= d {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let upper = self.sizes[lo];
        if upper <= self.b {
            Some(upper)
        } else {
            Some(self.sizes[lo - 1])
        }
    }

    /// Index of `k` in the size list.
    pub fn index_of(&self, k: u64) -> Option<usize> {
        self.sizes.binary_search(&k).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProcessingTimeModel;

    #[test]
    fn compress_count_examples() {
        assert_eq!(compress_count(8, 0.25), Ok(6));
        assert_eq!(compress_count(4, 0.25), Ok(3));
        assert_eq!(
            compress_count(2, 0.25),
            Err(CompressionError::NotCompressible { k: 2, rho: 0.25 })
        );
        assert_eq!(compress_count(77, 1.0 / 16.0), Ok(72));
        assert_eq!(compress_count(12, 1.0 / 12.0), Ok(11));
        assert!(matches!(
            compress_count(8, 0.3),
            Err(CompressionError::BadRho(_))
        ));
    }

    #[test]
    fn sizes_for_small_m() {
        let s = compressed_sizes(0.25, 8).unwrap();
        assert_eq!(s.sizes(), &[1, 2, 3, 4, 5, 6, 7, 8]);
        let s = compressed_sizes(0.25, 3).unwrap();
        assert_eq!(s.sizes(), &[1, 2, 3]);
        assert_eq!(s.exponent_count(), 0);
    }

    #[test]
    fn sizes_for_hundred_machines() {
        let s = compressed_sizes(0.25, 100).unwrap();
        assert_eq!(
            s.sizes(),
            &[1, 2, 3, 4, 5, 6, 7, 9, 12, 15, 19, 23, 29, 37, 46, 58, 72, 90, 100]
        );
        assert_eq!(s.len(), 19);
        assert_eq!(s.exponent_count(), 15);
    }

    #[test]
    fn sixteenth_sizes_around_eighty() {
        let s = compressed_sizes(1.0 / 16.0, 100).unwrap();
        let idx = s.index_of(82).expect("82 is a size");
        assert_eq!(s.sizes()[idx - 1], 77);
    }

    #[test]
    fn round_down_examples() {
        let s = compressed_sizes(0.25, 100).unwrap();
        assert_eq!(s.round_down(8), Ok(7));
        assert_eq!(s.round_down(9), Ok(9));
        assert_eq!(s.round_down(3), Ok(3));
        assert_eq!(s.round_down(1000), Ok(100));
        assert_eq!(s.round_down(0), Err(CompressionError::ZeroCount));
    }

    fn powerlaw16() -> Instance {
        Instance::new(
            100,
            vec![ProcessingTimeModel::PowerLaw { a: 16.0, beta: 1.0 }],
        )
        .unwrap()
    }

    #[test]
    fn gamma_prime_examples() {
        let inst = powerlaw16();
        let s = compressed_sizes(0.25, 100).unwrap();
        assert_eq!(s.gamma_prime(&inst, 0, 2.0), Some(7));
        assert_eq!(s.gamma_prime(&inst, 0, 16.0 / 9.0), Some(7));
        assert_eq!(s.gamma_prime(&inst, 0, 0.1), None);
        // narrow counts are exact
        assert_eq!(s.gamma_prime(&inst, 0, 4.0), Some(4));
        assert_eq!(s.gamma_prime(&inst, 0, 16.0), Some(1));
    }

    #[test]
    fn sizes_are_not_gap_bounded_for_an_eighth() {
        // Consecutive sizes 12 and 14 violate s⁺ − s⁻ ≤ ρ·s⁺ (2 > 1.75) but
        // still satisfy s⁻ ≥ ⌊(1 − ρ)s⁺⌋ = 12.
        let s = compressed_sizes(0.125, 100).unwrap();
        let idx = s.index_of(14).unwrap();
        assert_eq!(s.sizes()[idx - 1], 12);
        assert!(12 >= compress_count(14, 0.125).unwrap());
    }
}
