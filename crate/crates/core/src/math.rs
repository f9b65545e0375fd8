//! Small numeric helpers: binomials, combinatorial (un)ranking, Gaussian
//! tail and binomial confidence intervals.

use statrs::function::erf::erfc;

/// `C(n, k)`, or `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `log2 C(n, k)` via log-gamma-free summation; valid far beyond `u128`.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if let Some(c) = binomial(n, k) {
        return (c as f64).log2();
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2())
        .sum()
}

/// Floor of `log2 x`, for `x ≥ 1`.
pub fn floor_log2(x: u128) -> usize {
    assert!(x >= 1, "log2 of zero");
    127 - x.leading_zeros() as usize
}

/// Unranks the `rank`-th `k`-subset of `{0..n}` in lexicographic order.
pub fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0usize;
    for slot in 0..k {
        let remaining = k - slot - 1;
        let mut c = next;
        loop {
            let block = binomial((n - c - 1) as u64, remaining as u64).expect("binomial overflow");
            if rank < block {
                break;
            }
            rank -= block;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    out
}

/// Inverse of [`unrank_combination`]. `combo` must be strictly increasing.
pub fn rank_combination(n: usize, combo: &[usize]) -> u128 {
    let k = combo.len();
    let mut rank = 0u128;
    let mut next = 0usize;
    for (slot, &c) in combo.iter().enumerate() {
        let remaining = k - slot - 1;
        for skipped in next..c {
            rank += binomial((n - skipped - 1) as u64, remaining as u64).expect("binomial overflow");
        }
        next = c + 1;
    }
    rank
}

/// Unranks the `rank`-th size-`k` multiset over `{0..n}` (lexicographic,
/// non-decreasing). There are `C(n+k−1, k)` of them.
pub fn unrank_multiset(n: usize, k: usize, rank: u128) -> Vec<usize> {
    unrank_combination(n + k - 1, k, rank)
        .into_iter()
        .enumerate()
        .map(|(i, c)| c - i)
        .collect()
}

pub fn rank_multiset(n: usize, multiset: &[usize]) -> u128 {
    let combo: Vec<usize> = multiset.iter().enumerate().map(|(i, &c)| c + i).collect();
    rank_combination(n + multiset.len() - 1, &combo)
}

/// Gaussian upper tail `Q(x) = P(N(0,1) > x)`.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `n` at 95%.
pub fn wilson95(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Natural-binary value of a bit slice, most significant bit first.
pub fn bits_to_index(bits: &[bool]) -> u128 {
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128)
}

pub fn index_to_bits(index: u128, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (index >> i) & 1 == 1).collect()
}
