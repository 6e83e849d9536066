//! Plain least squares, used for Tobit starting values and as a
//! convenience pooled regression.

use nalgebra::{DMatrix, DVector};

use super::EstimError;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    /// Homoskedastic standard errors.
    pub se: Vec<f64>,
    pub ssr: f64,
    pub n: usize,
}

/// Relative singular-value cutoff below which a design is rank deficient.
pub(crate) const RANK_TOLERANCE: f64 = 1e-10;

pub(crate) fn full_rank(x: &DMatrix<f64>) -> bool {
    if x.nrows() < x.ncols() || x.ncols() == 0 {
        return false;
    }
    let sv = x.clone().svd(false, false).singular_values;
    let max = sv.max();
    max > 0.0 && sv.iter().all(|&s| s > RANK_TOLERANCE * max)
}

pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<OlsFit, EstimError> {
    if y.is_empty() {
        return Err(EstimError::EmptySample);
    }
    if x.nrows() != y.len() {
        return Err(EstimError::InvalidParams(format!(
            "{} responses but {} design rows",
            y.len(),
            x.nrows()
        )));
    }
    if !full_rank(x) {
        return Err(EstimError::RankDeficient);
    }
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * x;
    let xtx_inv = xtx.try_inverse().ok_or(EstimError::RankDeficient)?;
    let beta = &xtx_inv * x.transpose() * &yv;
    let resid = &yv - x * &beta;
    let ssr = resid.norm_squared();
    let dof = (y.len() as f64 - x.ncols() as f64).max(1.0);
    let s2 = ssr / dof;
    Ok(OlsFit {
        coef: beta.iter().copied().collect(),
        se: (0..x.ncols()).map(|i| (s2 * xtx_inv[(i, i)]).max(0.0).sqrt()).collect(),
        ssr,
        n: y.len(),
    })
}
