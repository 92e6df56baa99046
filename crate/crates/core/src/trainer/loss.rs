/// Negative log-likelihood of a bipolar score read as a probability.
///
/// `p = clamp((t + 1) / 2, c, 1 - c)`; returns `(loss, d loss / d t)`. The
/// derivative is zero wherever the clamp is active.
pub fn nll_loss(t_score: f64, label: bool, prob_clamp: f64) -> (f64, f64) {
    // Probability of the observed class, computed directly from t so both
    // classes share the same clamp bound.
    let (raw, sign) = if label {
        ((1.0 + t_score) / 2.0, -1.0)
    } else {
        ((1.0 - t_score) / 2.0, 1.0)
    };
    let p = raw.clamp(prob_clamp, 1.0 - prob_clamp);
    let grad = if p == raw { sign * 0.5 / p } else { 0.0 };
    (-p.ln(), grad)
}
