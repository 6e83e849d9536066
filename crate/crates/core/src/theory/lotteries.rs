use super::TheoryError;
use crate::prefs::{certainty_equivalent, Lottery, UtilityModel};

/// Largest spread of CE(L, w) across the wealth grid.
pub fn cara_shift_invariance(model: &UtilityModel, lottery: &Lottery, wealth_grid: &[f64]) -> Result<f64, TheoryError> {
    let ces = wealth_grid
        .iter()
        .map(|&w| certainty_equivalent(model, lottery, w))
        .collect::<Result<Vec<f64>, _>>()?;
    let lo = ces.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ces.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if ces.is_empty() { 0.0 } else { hi - lo })
}

/// Largest |M(p∘L) − p·M(L)| over `p_grid`, where p∘L is L with probability
/// p and the zero bundle otherwise, and M is the certainty equivalent at zero
/// wealth.
pub fn mixture_linearity(model: &UtilityModel, lottery: &Lottery, p_grid: &[f64]) -> Result<f64, TheoryError> {
    let m = certainty_equivalent(model, lottery, 0.0)?;
    let mut worst: f64 = 0.0;
    for &p in p_grid {
        let mixed = certainty_equivalent(model, &lottery.mix_with_zero(p)?, 0.0)?;
        worst = worst.max((mixed - p * m).abs());
    }
    Ok(worst)
}
