//! 0/1 knapsack for items with few distinct sizes.
//!
//! Items of one size `h` form an `h`-step concave profit array (best `⌊c/h⌋`
//! items for capacity `c`). Such an array can be (max,+)-convolved with an
//! arbitrary array in linear time, so folding all size classes costs
//! `O(D·t)` for `D` distinct sizes and capacity `t`.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnapsackError {
    #[error("profits must be sorted in descending order")]
    Unsorted,
    #[error("item {id} has size {size}, expected {expected}")]
    WrongSize { id: usize, size: u64, expected: u64 },
    #[error("item {id} needs size >= 1 and profit >= 1")]
    BadItem { id: usize },
    #[error("step must be at least 1")]
    ZeroStep,
    #[error("operand lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("capacity {0} is too large for traceback storage")]
    CapacityTooLarge(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KnapsackItem {
    pub id: usize,
    pub size: u64,
    pub profit: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnapsackSolution {
    pub profit: i64,
    /// Ids of the chosen items, in no particular order.
    pub chosen: Vec<usize>,
}

/// Best profit per capacity when only items of size `step` are available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepConcaveArray {
    pub step: u64,
    pub values: Vec<i64>,
    /// Items used at index `c`: `min(⌊c/step⌋, class size)`.
    pub counts: Vec<usize>,
}

impl StepConcaveArray {
    /// Checks block flatness, concavity of block values, monotonicity and
    /// `values[0] = 0`.
    pub fn is_well_formed(&self) -> bool {
        let h = self.step as usize;
        let v = &self.values;
        if h == 0 || v.first() != Some(&0) || v.windows(2).any(|w| w[1] < w[0]) {
            return false;
        }
        if (0..v.len()).any(|c| v[c] != v[c - c % h]) {
            return false;
        }
        let blocks: Vec<i64> = v.iter().step_by(h).copied().collect();
        blocks.windows(3).all(|w| w[1] - w[0] >= w[2] - w[1])
    }
}

/// Prefix sums of the top profits, spread over capacities `0..=t`.
/// Items must all have size `h` and be sorted by descending profit.
pub fn build_size_class_array(
    items: &[KnapsackItem],
    h: u64,
    t: u64,
) -> Result<StepConcaveArray, KnapsackError> {
    if h == 0 {
        return Err(KnapsackError::ZeroStep);
    }
    for it in items {
        if it.size != h {
            return Err(KnapsackError::WrongSize {
                id: it.id,
                size: it.size,
                expected: h,
            });
        }
    }
    if items.windows(2).any(|w| w[0].profit < w[1].profit) {
        return Err(KnapsackError::Unsorted);
    }
    let len = t as usize + 1;
    let mut values = Vec::with_capacity(len);
    let mut counts = Vec::with_capacity(len);
    let mut prefix = 0i64;
    let mut used = 0usize;
    for c in 0..len {
        if c > 0 && (c as u64).is_multiple_of(h) && used < items.len() {
            prefix += items[used].profit;
            used += 1;
        }
        values.push(prefix);
        counts.push(used);
    }
    Ok(StepConcaveArray {
        step: h,
        values,
        counts,
    })
}

/// Row maxima of an implicit matrix whose leftmost row-argmax is
/// non-decreasing in the row index (inverse Monge). Writes one maximising
/// column per row into `out`, indexed by row.
fn smawk<F: Fn(usize, usize) -> i128>(rows: &[usize], cols: &[usize], f: &F, out: &mut [usize]) {
    if rows.is_empty() {
        return;
    }
    let mut stack: Vec<usize> = Vec::with_capacity(rows.len());
    for &c in cols {
        while let Some(&top) = stack.last() {
            let r = rows[stack.len() - 1];
            if f(r, top) >= f(r, c) {
                break;
            }
            stack.pop();
        }
        if stack.len() < rows.len() {
            stack.push(c);
        }
    }
    let odd: Vec<usize> = rows.iter().skip(1).step_by(2).copied().collect();
    smawk(&odd, &stack, f, out);

    let mut c = 0usize;
    for r in (0..rows.len()).step_by(2) {
        let row = rows[r];
        let last = if r + 1 < rows.len() {
            out[rows[r + 1]]
        } else {
            *stack.last().unwrap()
        };
        let mut best = (f(row, stack[c]), stack[c]);
        while stack[c] != last {
            c += 1;
            let v = f(row, stack[c]);
            if v >= best.0 {
                best = (v, stack[c]);
            }
        }
        out[row] = best.1;
    }
}

/// `c[i] = max_{j ≤ i} A[j] + R[i − j]` together with a maximising `j` per
/// `i`.
fn convolve_with_splits(
    a: &[i64],
    r: &StepConcaveArray,
) -> Result<(Vec<i64>, Vec<usize>), KnapsackError> {
    if a.len() != r.values.len() {
        return Err(KnapsackError::LengthMismatch {
            left: a.len(),
            right: r.values.len(),
        });
    }
    if r.step == 0 {
        return Err(KnapsackError::ZeroStep);
    }
    let len = a.len();
    let h = (r.step as usize).min(len.max(1));

    // Sliding maximum of A over (x − h, x], remembering where it sits.
    let mut best_at = vec![0usize; len];
    let mut window: VecDeque<usize> = VecDeque::new();
    for x in 0..len {
        while window.back().is_some_and(|&j| a[j] <= a[x]) {
            window.pop_back();
        }
        window.push_back(x);
        while window.front().is_some_and(|&j| j + h <= x) {
            window.pop_front();
        }
        best_at[x] = *window.front().unwrap();
    }

    // Block values P(k) of R, constant once the class is exhausted.
    let block: Vec<i64> = r.values.iter().step_by(r.step as usize).copied().collect();
    let max_step = block.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);

    let mut out = vec![0i64; len];
    let mut split = vec![0usize; len];
    let mut argmax = Vec::new();
    for residue in 0..h.min(len) {
        let xs: Vec<i128> = (residue..len)
            .step_by(h)
            .map(|x| a[best_at[x]] as i128)
            .collect();
        let rows: Vec<usize> = (0..xs.len()).collect();
        let lo = xs.iter().copied().min().unwrap();
        let hi = xs.iter().copied().max().unwrap();
        // Extending P linearly with a steep slope below 0 keeps it concave
        // and makes entries above the diagonal lose every comparison.
        let slope = (hi - lo) + max_step as i128 + 1;
        let f = |row: usize, col: usize| -> i128 {
            if col <= row {
                xs[col] + block[row - col] as i128
            } else {
                xs[col] - slope * (col - row) as i128
            }
        };
        argmax.clear();
        argmax.resize(xs.len(), 0);
        smawk(&rows, &rows, &f, &mut argmax);
        for (row, &col) in argmax.iter().enumerate() {
            let i = residue + row * h;
            let j = best_at[residue + col * h];
            out[i] = a[j] + r.values[i - j];
            split[i] = j;
        }
    }
    Ok((out, split))
}

/// (max,+)-convolution of an arbitrary array with a step-concave one in
/// `O(t)`: a sliding window maximum folds the flat blocks of `R`, and each
/// residue class modulo the step is a row-maxima problem on a totally
/// monotone matrix.
pub fn concave_maxplus_convolve(
    a: &[i64],
    r: &StepConcaveArray,
) -> Result<Vec<i64>, KnapsackError> {
    convolve_with_splits(a, r).map(|(c, _)| c)
}

/// The quadratic textbook convolution `c[i] = max_{j ≤ i} A[j] + B[i − j]`.
pub fn naive_maxplus_convolve(a: &[i64], b: &[i64]) -> Result<Vec<i64>, KnapsackError> {
    if a.len() != b.len() {
        return Err(KnapsackError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok((0..a.len())
        .map(|i| (0..=i).map(|j| a[j] + b[i - j]).max().unwrap())
        .collect())
}

/// Stable LSD radix sort of indices by descending key.
pub fn radix_sort_desc(keys: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    let max = keys.iter().copied().max().unwrap_or(0);
    let mut scratch = vec![0usize; keys.len()];
    let mut shift = 0u32;
    while shift < 64 && (max >> shift) != 0 {
        let digit = |i: usize| 0xFFFF - ((keys[i] >> shift) & 0xFFFF) as usize;
        let mut count = vec![0usize; 1 << 16 | 1];
        for &i in &order {
            count[digit(i) + 1] += 1;
        }
        for d in 0..1 << 16 {
            count[d + 1] += count[d];
        }
        for &i in &order {
            let slot = &mut count[digit(i)];
            scratch[*slot] = i;
            *slot += 1;
        }
        std::mem::swap(&mut order, &mut scratch);
        shift += 16;
    }
    order
}

/// Items grouped by ascending size, each group by descending profit.
pub fn group_by_size(items: &[KnapsackItem]) -> Vec<(u64, Vec<KnapsackItem>)> {
    let keys: Vec<u64> = items.iter().map(|it| it.profit.max(0) as u64).collect();
    let order = radix_sort_desc(&keys);
    let mut sizes: Vec<u64> = items.iter().map(|it| it.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut groups: Vec<(u64, Vec<KnapsackItem>)> =
        sizes.iter().map(|&s| (s, Vec::new())).collect();
    for i in order {
        let g = sizes.binary_search(&items[i].size).unwrap();
        groups[g].1.push(items[i]);
    }
    groups
}

fn check_items(items: &[KnapsackItem]) -> Result<(), KnapsackError> {
    match items.iter().find(|it| it.size == 0 || it.profit < 1) {
        Some(it) => Err(KnapsackError::BadItem { id: it.id }),
        None => Ok(()),
    }
}

/// Exact 0/1 knapsack by folding per-size arrays in ascending size order.
/// Keeps one split point per fold and capacity for the witness.
pub fn solve_knapsack_by_sizes(
    items: &[KnapsackItem],
    t: u64,
) -> Result<KnapsackSolution, KnapsackError> {
    check_items(items)?;
    if t > u32::MAX as u64 {
        return Err(KnapsackError::CapacityTooLarge(t));
    }
    let fitting: Vec<KnapsackItem> = items.iter().copied().filter(|it| it.size <= t).collect();
    let groups = group_by_size(&fitting);
    let Some((first, rest)) = groups.split_first() else {
        return Ok(KnapsackSolution::default());
    };

    let mut arrays = Vec::with_capacity(groups.len());
    arrays.push(build_size_class_array(&first.1, first.0, t)?);
    let mut current = arrays[0].values.clone();
    let mut splits: Vec<Vec<u32>> = Vec::with_capacity(rest.len());
    for (h, class) in rest {
        let r = build_size_class_array(class, *h, t)?;
        let (next, split) = convolve_with_splits(&current, &r)?;
        splits.push(split.into_iter().map(|j| j as u32).collect());
        arrays.push(r);
        current = next;
    }

    let profit = current[t as usize];
    let mut chosen = Vec::new();
    let mut cap = t as usize;
    for f in (0..groups.len()).rev() {
        let j = if f == 0 {
            0
        } else {
            splits[f - 1][cap] as usize
        };
        let used = arrays[f].counts[cap - j];
        chosen.extend(groups[f].1[..used].iter().map(|it| it.id));
        cap = j;
    }
    Ok(KnapsackSolution { profit, chosen })
}

/// Classic `O(n·t)` dynamic program; profit only.
pub fn bellman_dp_knapsack(items: &[KnapsackItem], t: u64) -> i64 {
    let cap = t as usize;
    let mut best = vec![0i64; cap + 1];
    for it in items {
        if it.size > t {
            continue;
        }
        let s = it.size as usize;
        for c in (s..=cap).rev() {
            best[c] = best[c].max(best[c - s] + it.profit);
        }
    }
    best[cap]
}

/// [`bellman_dp_knapsack`] with a witness, using `n·(t+1)` decision bits.
pub fn bellman_dp_knapsack_with_witness(
    items: &[KnapsackItem],
    t: u64,
) -> Result<KnapsackSolution, KnapsackError> {
    check_items(items)?;
    let cap = t as usize;
    let width = cap + 1;
    let mut best = vec![0i64; width];
    let mut take = vec![false; items.len() * width];
    for (i, it) in items.iter().enumerate() {
        if it.size > t {
            continue;
        }
        let s = it.size as usize;
        for c in (s..=cap).rev() {
            let with = best[c - s] + it.profit;
            if with > best[c] {
                best[c] = with;
                take[i * width + c] = true;
            }
        }
    }
    let mut chosen = Vec::new();
    let mut c = cap;
    for (i, it) in items.iter().enumerate().rev() {
        if take[i * width + c] {
            chosen.push(it.id);
            c -= it.size as usize;
        }
    }
    Ok(KnapsackSolution {
        profit: best[cap],
        chosen,
    })
}
