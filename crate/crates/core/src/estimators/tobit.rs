//! Right-censored Tobit by maximum likelihood.
//!
//! Parameters are (β, log σ). The log-likelihood is maximized by BFGS with an
//! analytic gradient; standard errors come from a central-difference Hessian
//! of that gradient.

use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc;

use super::ols::{full_rank, ols};
use super::EstimError;
use crate::experiment::{Dataset, Gender, Scenario, Treatment};

const CENSOR_SLACK: f64 = 1e-9;
const MAX_ITERATIONS: usize = 1000;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TobitFit {
    pub coefficients: Vec<Coefficient>,
    pub sigma: f64,
    /// Delta-method standard error of σ.
    pub sigma_se: f64,
    pub log_likelihood: f64,
    pub start_log_likelihood: f64,
    pub n_censored: usize,
    pub n_uncensored: usize,
    pub iterations: usize,
}

/// log Φ(x), accurate far into the lower tail.
pub(crate) fn log_norm_cdf(x: f64) -> f64 {
    if x > -30.0 {
        (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
    } else {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) + 105.0 / (x2 * x2 * x2 * x2);
        -0.5 * x2 - (-x).ln() - LN_SQRT_2PI + series.ln()
    }
}

/// φ(c) / (1 − Φ(c)).
fn inverse_mills_upper(c: f64) -> f64 {
    (-0.5 * c * c - LN_SQRT_2PI - log_norm_cdf(-c)).exp()
}

struct Problem<'a> {
    y: &'a [f64],
    x: &'a DMatrix<f64>,
    censored: Vec<bool>,
    limit: f64,
}

impl Problem<'_> {
    fn k(&self) -> usize {
        self.x.ncols()
    }

    fn xb(&self, theta: &DVector<f64>, i: usize) -> f64 {
        (0..self.k()).map(|j| self.x[(i, j)] * theta[j]).sum()
    }

    fn log_likelihood(&self, theta: &DVector<f64>) -> f64 {
        let tau = theta[self.k()];
        let sigma = tau.exp();
        (0..self.y.len())
            .map(|i| {
                let mu = self.xb(theta, i);
                if self.censored[i] {
                    log_norm_cdf(-(self.limit - mu) / sigma)
                } else {
                    let z = (self.y[i] - mu) / sigma;
                    -LN_SQRT_2PI - 0.5 * z * z - tau
                }
            })
            .sum()
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        let k = self.k();
        let sigma = theta[k].exp();
        let mut g = DVector::zeros(k + 1);
        for i in 0..self.y.len() {
            let mu = self.xb(theta, i);
            let (db, dt) = if self.censored[i] {
                let c = (self.limit - mu) / sigma;
                let lambda = inverse_mills_upper(c);
                (lambda / sigma, lambda * c)
            } else {
                let z = (self.y[i] - mu) / sigma;
                (z / sigma, z * z - 1.0)
            };
            for j in 0..k {
                g[j] += db * self.x[(i, j)];
            }
            g[k] += dt;
        }
        g
    }
}

/// Log-likelihood of a right-censored Tobit at (β, σ).
pub fn tobit_log_likelihood(y: &[f64], x: &DMatrix<f64>, limit: f64, beta: &[f64], sigma: f64) -> f64 {
    let p = Problem {
        y,
        x,
        censored: y.iter().map(|&v| v >= limit - CENSOR_SLACK).collect(),
        limit,
    };
    let theta = DVector::from_column_slice(beta).push(sigma.ln());
    p.log_likelihood(&theta)
}

pub fn tobit_right(y: &[f64], x: &DMatrix<f64>, limit: f64) -> Result<TobitFit, EstimError> {
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
    let censored: Vec<bool> = y.iter().map(|&v| v >= limit - CENSOR_SLACK).collect();
    let n_censored = censored.iter().filter(|&&c| c).count();
    let n_uncensored = y.len() - n_censored;
    if n_uncensored == 0 {
        return Err(EstimError::AllCensored);
    }
    if !full_rank(x) {
        return Err(EstimError::RankDeficient);
    }
    let k = x.ncols();
    let problem = Problem { y, x, censored, limit };

    let theta0 = start(&problem)?;
    let start_ll = problem.log_likelihood(&theta0);
    let (theta, iterations) = bfgs(&problem, theta0)?;
    let ll = problem.log_likelihood(&theta);

    let info = negative_hessian(&problem, &theta);
    let cov = info.try_inverse().ok_or_else(|| EstimError::NotConverged {
        iterations,
        detail: "information matrix is singular at the optimum".into(),
    })?;
    let sigma = theta[k].exp();
    let coefficients = (0..k)
        .map(|j| Coefficient {
            value: theta[j],
            se: cov[(j, j)].max(0.0).sqrt(),
        })
        .collect();
    Ok(TobitFit {
        coefficients,
        sigma,
        sigma_se: sigma * cov[(k, k)].max(0.0).sqrt(),
        log_likelihood: ll,
        start_log_likelihood: start_ll,
        n_censored,
        n_uncensored,
        iterations,
    })
}

/// Least squares on the uncensored rows, falling back to all rows when
/// those alone do not identify β.
fn start(p: &Problem) -> Result<DVector<f64>, EstimError> {
    let rows: Vec<usize> = (0..p.y.len()).filter(|&i| !p.censored[i]).collect();
    let sub_x = p.x.select_rows(&rows);
    let sub_y: Vec<f64> = rows.iter().map(|&i| p.y[i]).collect();
    let (coef, resid_rows) = match ols(&sub_y, &sub_x) {
        Ok(fit) => (fit.coef, rows),
        Err(_) => (ols(p.y, p.x)?.coef, (0..p.y.len()).collect()),
    };
    let beta = DVector::from_vec(coef);
    let ss: f64 = resid_rows
        .iter()
        .map(|&i| (p.y[i] - (p.x.row(i) * &beta)[0]).powi(2))
        .sum();
    let sigma = (ss / resid_rows.len() as f64).sqrt().max(1e-2);
    Ok(beta.push(sigma.ln()))
}

/// Minimizes −ℓ by BFGS with backtracking line search.
fn bfgs(p: &Problem, mut theta: DVector<f64>) -> Result<(DVector<f64>, usize), EstimError> {
    let n = theta.len();
    let f = |t: &DVector<f64>| -p.log_likelihood(t);
    let grad = |t: &DVector<f64>| -p.gradient(t);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fx = f(&theta);
    let mut g = grad(&theta);
    let tol = |fx: f64| 1e-9 * (1.0 + fx.abs());

    for it in 0..MAX_ITERATIONS {
        if g.amax() < tol(fx) {
            return Ok((theta, it));
        }
        let mut dir = -(&h * &g);
        if dir.dot(&g) >= 0.0 {
            h = DMatrix::identity(n, n);
            dir = -g.clone();
        }
        let slope = dir.dot(&g);
        let mut step = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let cand = &theta + &dir * step;
            let fc = f(&cand);
            if fc.is_finite() {
                if fc <= fx + 1e-4 * step * slope {
                    next = Some((cand, fc, None));
                    break;
                }
                // near the optimum the decrease drops below rounding in f;
                // fall back on the gradient shrinking
                if fc <= fx + 1e-13 * (1.0 + fx.abs()) {
                    let gc = grad(&cand);
                    if gc.amax() < g.amax() {
                        next = Some((cand, fc, Some(gc)));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let Some((cand, fc, gc)) = next else {
            return if g.amax() < 1e-5 * (1.0 + fx.abs()) {
                Ok((theta, it))
            } else {
                Err(EstimError::NotConverged {
                    iterations: it,
                    detail: format!("line search stalled with gradient {:.3e}", g.amax()),
                })
            };
        };
        let gc = gc.unwrap_or_else(|| grad(&cand));
        let s = &cand - &theta;
        let yv = &gc - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            if it == 0 {
                // scale the initial inverse Hessian to the curvature seen
                h *= sy / yv.norm_squared();
            }
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - &s * yv.transpose() * rho;
            let right = &eye - &yv * s.transpose() * rho;
            h = &left * &h * &right + &s * s.transpose() * rho;
        }
        theta = cand;
        fx = fc;
        g = gc;
    }
    Err(EstimError::NotConverged {
        iterations: MAX_ITERATIONS,
        detail: format!("gradient {:.3e}", g.amax()),
    })
}

fn negative_hessian(p: &Problem, theta: &DVector<f64>) -> DMatrix<f64> {
    let n = theta.len();
    let mut hess = DMatrix::zeros(n, n);
    for j in 0..n {
        let h = 1e-5 * theta[j].abs().max(1.0);
        let mut up = theta.clone();
        let mut down = theta.clone();
        up[j] += h;
        down[j] -= h;
        let col = (p.gradient(&down) - p.gradient(&up)) / (2.0 * h);
        hess.set_column(j, &col);
    }
    (&hess + hess.transpose()) * 0.5
}

/// Regression inputs for one treatment.
#[derive(Debug, Clone, PartialEq)]
pub struct TobitDesign {
    pub names: Vec<&'static str>,
    pub y: Vec<f64>,
    pub x: DMatrix<f64>,
}

/// Columns: Constant, Scenario 2, Male, Age, Tediousness.
pub fn tobit_design(d: &Dataset, treatment: Treatment, drop_inconsistent: bool) -> TobitDesign {
    let obs: Vec<_> = d
        .observations(drop_inconsistent)
        .into_iter()
        .filter(|o| o.treatment == treatment)
        .collect();
    let mut x = DMatrix::zeros(obs.len(), 5);
    for (i, o) in obs.iter().enumerate() {
        x[(i, 0)] = 1.0;
        x[(i, 1)] = f64::from(u8::from(o.scenario == Scenario::S2));
        x[(i, 2)] = f64::from(u8::from(o.covariates.gender == Gender::Male));
        x[(i, 3)] = f64::from(o.covariates.age);
        x[(i, 4)] = f64::from(o.covariates.tediousness);
    }
    TobitDesign {
        names: vec!["Constant", "Scenario 2", "Male", "Age", "Tediousness"],
        y: obs.iter().map(|o| o.wage).collect(),
        x,
    }
}
