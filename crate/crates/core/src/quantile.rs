//! Empirical quantiles with the infimum convention `inf { y : F_n(y) >= tau }`.

/// 0-based rank of the empirical `tau`-quantile among `n` sorted values:
/// the smallest `k` with `(k + 1) / n >= tau`.
pub fn lower_rank(n: usize, tau: f64) -> usize {
    debug_assert!(n > 0);
    let nf = n as f64;
    let mut k = (tau * nf).ceil() as usize;
    while k > 1 && (k - 1) as f64 / nf >= tau {
        k -= 1;
    }
    while k < n && (k as f64) / nf < tau {
        k += 1;
    }
    k.clamp(1, n) - 1
}

/// Empirical `tau`-quantile; reorders `values`.
pub fn select_quantile(values: &mut [f64], tau: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let k = lower_rank(values.len(), tau);
    let (_, v, _) = values.select_nth_unstable_by(k, f64::total_cmp);
    Some(*v)
}

pub fn empirical_quantile(values: &[f64], tau: f64) -> Option<f64> {
    select_quantile(&mut values.to_vec(), tau)
}
