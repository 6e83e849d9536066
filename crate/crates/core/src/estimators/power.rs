use std::f64::consts::PI;

use statrs::distribution::{ContinuousCDF, Normal};

use super::EstimError;

/// Sample sizes `(n_large, n_small)` for a two-sample location test with
/// standardized effect `d`, two-sided level `alpha`, and `ratio = n_large / n_small`.
/// With `wilcoxon_are` the normal-theory size is inflated by π/3, the
/// rank-sum test's efficiency loss relative to the t-test under normality.
pub fn power_two_sample(
    d: f64,
    alpha: f64,
    power: f64,
    ratio: f64,
    wilcoxon_are: bool,
) -> Result<(u64, u64), EstimError> {
    if d.is_nan() || d <= 0.0 {
        return Err(EstimError::InvalidParams(format!("effect size must be positive, got {d}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EstimError::InvalidParams(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(power > 0.5 && power < 1.0) {
        return Err(EstimError::InvalidParams(format!("power must lie in (0.5, 1), got {power}")));
    }
    if !(ratio >= 1.0 && ratio.is_finite()) {
        return Err(EstimError::InvalidParams(format!("ratio must be at least 1, got {ratio}")));
    }
    let z = Normal::standard();
    let za = z.inverse_cdf(1.0 - alpha / 2.0);
    let zb = z.inverse_cdf(power);
    let inflation = if wilcoxon_are { PI / 3.0 } else { 1.0 };
    let raw = (1.0 + 1.0 / ratio) * (za + zb).powi(2) / (d * d) * inflation;
    let n_small = (raw.ceil() as u64).max(1);
    let n_large = ((ratio * raw).ceil() as u64).max(1);
    Ok((n_large, n_small))
}
