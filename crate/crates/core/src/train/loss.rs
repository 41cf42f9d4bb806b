/// `ln(1 + e^t)` with the large-|t| linear branch to avoid overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Pairwise ranking loss `sum -ln sigma(pos - neg)` plus `l2_reg` times the
/// squared norm of the parameter rows touched by the batch.
pub fn bpr_loss<'a>(
    pos_scores: &[f64],
    neg_scores: &[f64],
    params_in_batch: impl IntoIterator<Item = &'a [f64]>,
    l2_reg: f64,
) -> f64 {
    assert_eq!(pos_scores.len(), neg_scores.len());
    let rank: f64 = pos_scores
        .iter()
        .zip(neg_scores)
        .map(|(&p, &n)| softplus(-(p - n)))
        .sum();
    let reg: f64 = params_in_batch
        .into_iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>())
        .sum();
    rank + l2_reg * reg
}
