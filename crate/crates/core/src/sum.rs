//! Fixed-tree summation for norms and inner products.

const LEAF: usize = 32;

/// Pairwise sum with a fixed split (halves, leaves of 32 summed left to right), so the
/// result depends only on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
