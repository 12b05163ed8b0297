use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Largest `n_a · n_b` for which tie-free samples get an exact p-value.
pub const EXACT_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MannWhitney {
    /// `U` of the first sample: pairs with `a > b`, ties counting one half.
    pub u: f64,
    pub p_two_sided: f64,
    pub method: PValueMethod,
}

struct Ranked {
    u_a: f64,
    tie_term: f64,
    has_ties: bool,
}

fn rank(a: &[f64], b: &[f64]) -> Result<Ranked> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("Mann-Whitney sample"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("Mann-Whitney samples contain NaN".into()));
    }
    let mut all: Vec<(f64, bool)> = a
        .iter()
        .map(|v| (*v, true))
        .chain(b.iter().map(|v| (*v, false)))
        .collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut has_ties = false;
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        // ranks i+1 ..= j
        let midrank = (i + 1 + j) as f64 / 2.0;
        rank_sum_a += midrank * all[i..j].iter().filter(|(_, from_a)| *from_a).count() as f64;
        if j - i > 1 {
            has_ties = true;
            tie_term += t * t * t - t;
        }
        i = j;
    }
    let na = a.len() as f64;
    Ok(Ranked {
        u_a: rank_sum_a - na * (na + 1.0) / 2.0,
        tie_term,
        has_ties,
    })
}

/// Null distribution counts of `U` for sample sizes `m`, `n`: the
/// coefficients of the Gaussian binomial `[m+n choose m]_q`.
fn u_counts(m: usize, n: usize) -> Vec<f64> {
    let len = m * n + 1;
    let mut c = vec![0.0; len];
    c[0] = 1.0;
    for i in 1..=m {
        // multiply by (1 − q^{n+i})
        let shift = n + i;
        for k in (shift..len).rev() {
            c[k] -= c[k - shift];
        }
        // divide by (1 − q^i)
        for k in i..len {
            c[k] += c[k - i];
        }
    }
    c
}

/// Exact two-sided p-value `min(1, 2·min(P(U ≤ u), P(U ≥ u)))` for tie-free data.
pub fn mann_whitney_exact_p(u: f64, na: usize, nb: usize) -> f64 {
    let counts = u_counts(na, nb);
    let total: f64 = counts.iter().sum();
    let u_idx = u.round() as usize;
    let lower: f64 = counts[..=u_idx.min(counts.len() - 1)].iter().sum();
    let upper: f64 = counts[u_idx.min(counts.len() - 1)..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn mann_whitney_normal_p(u: f64, na: usize, nb: usize, tie_term: f64) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    let n = na + nb;
    let mean = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    (libm::erfc(z / core::f64::consts::SQRT_2)).min(1.0)
}

/// Two-sided Mann-Whitney U test.
///
/// Uses the exact null distribution when `n_a · n_b ≤ 400` and there are no
/// ties, otherwise the normal approximation.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let r = rank(a, b)?;
    let (na, nb) = (a.len(), b.len());
    if !r.has_ties && na * nb <= EXACT_LIMIT {
        Ok(MannWhitney {
            u: r.u_a,
            p_two_sided: mann_whitney_exact_p(r.u_a, na, nb),
            method: PValueMethod::Exact,
        })
    } else {
        Ok(MannWhitney {
            u: r.u_a,
            p_two_sided: mann_whitney_normal_p(r.u_a, na, nb, r.tie_term),
            method: PValueMethod::Normal,
        })
    }
}
