//! Proximal maps used by the splitting.

/// `sign(v) · max(|v| − tau, 0)`, the prox of `tau·|·|`.
#[inline]
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Nucleus sparsity weights `w_i = exp(−x_H,i)`.
pub fn update_weights(x_h: &[f64], out: &mut [f64]) {
    #[allow(unused_imports)]
    use num_traits::Float;
    for (w, x) in out.iter_mut().zip(x_h) {
        *w = (-x).exp();
    }
}
