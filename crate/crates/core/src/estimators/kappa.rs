//! Degree of narrow bracketing.
//!
//! Responses are fitted to
//!
//! ```text
//! y = B_s                     in the broader treatment
//! y = N_s                     in the narrow-frame treatment (LOW)
//! y = (1 − κ)·B_s + κ·N_s     in the mid treatment (NARROW)
//! ```
//!
//! with one (B_s, N_s) pair per scenario, by damped Gauss–Newton on the
//! unweighted residuals. [`kappa_profile_oracle`] solves the same problem by
//! brute force over κ with the scenario effects profiled out in closed form.

use nalgebra::{SMatrix, SVector};

use super::EstimError;
use crate::experiment::{Dataset, Scenario, Treatment};
use crate::par::{self, Execution};

const N_PARAMS: usize = 5;
type Mat5 = SMatrix<f64, N_PARAMS, N_PARAMS>;
type Vec5 = SVector<f64, N_PARAMS>;

pub const GRADIENT_TOLERANCE: f64 = 1e-8;
pub const STEP_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 500;
const START_KAPPA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellRole {
    Broader,
    Narrow,
    Mid,
}

/// Which treatments play which role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KappaLabels {
    pub broader: Treatment,
    pub narrow: Treatment,
    pub mid: Treatment,
}

impl KappaLabels {
    /// BROAD vs LOW with NARROW in between.
    pub const BROAD: KappaLabels = KappaLabels {
        broader: Treatment::Broad,
        narrow: Treatment::Low,
        mid: Treatment::Narrow,
    };
    /// PARTIAL vs LOW with NARROW in between.
    pub const PARTIAL: KappaLabels = KappaLabels {
        broader: Treatment::Partial,
        narrow: Treatment::Low,
        mid: Treatment::Narrow,
    };

    fn role(&self, t: Treatment) -> Option<CellRole> {
        if t == self.broader {
            Some(CellRole::Broader)
        } else if t == self.narrow {
            Some(CellRole::Narrow)
        } else if t == self.mid {
            Some(CellRole::Mid)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaObs {
    pub role: CellRole,
    pub scenario: Scenario,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Heteroskedasticity-consistent (HC0 sandwich) standard error.
    pub robust_se: f64,
    /// Homoskedastic standard error, s²·(JᵀJ)⁻¹.
    pub model_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaFit {
    /// Broader-treatment effects, indexed by scenario.
    pub broader: [Estimate; 2],
    /// Narrow-treatment effects, indexed by scenario.
    pub narrow: [Estimate; 2],
    pub kappa: Estimate,
    pub iterations: usize,
    /// Gradient norm fell below [`GRADIENT_TOLERANCE`]. A fit can also end on a
    /// vanishing step, leaving this unset.
    pub converged: bool,
    pub gradient_norm: f64,
    pub ssr: f64,
    pub n_obs: usize,
}

impl KappaFit {
    /// Fitted mean of the mid treatment in `scenario`.
    pub fn mid_fitted(&self, scenario: Scenario) -> f64 {
        let s = scenario.index();
        let k = self.kappa.value;
        (1.0 - k) * self.broader[s].value + k * self.narrow[s].value
    }
}

/// Consistent observations of the three labelled treatments.
pub fn kappa_observations(d: &Dataset, labels: KappaLabels, drop_inconsistent: bool) -> Vec<KappaObs> {
    d.observations(drop_inconsistent)
        .into_iter()
        .filter_map(|o| {
            labels.role(o.treatment).map(|role| KappaObs {
                role,
                scenario: o.scenario,
                y: o.wage,
            })
        })
        .collect()
}

pub fn nls_kappa(d: &Dataset, broader: Treatment, narrow: Treatment, mid: Treatment) -> Result<KappaFit, EstimError> {
    nls_kappa_obs(&kappa_observations(d, KappaLabels { broader, narrow, mid }, true))
}

#[derive(Debug, Clone, Copy, Default)]
struct CellStats {
    n: f64,
    sum: f64,
    sumsq: f64,
}

impl CellStats {
    fn mean(&self) -> f64 {
        self.sum / self.n
    }
}

/// Sufficient statistics indexed [scenario][role].
fn cell_stats(obs: &[KappaObs]) -> [[CellStats; 3]; 2] {
    let mut cells = [[CellStats::default(); 3]; 2];
    for o in obs {
        let c = &mut cells[o.scenario.index()][o.role as usize];
        c.n += 1.0;
        c.sum += o.y;
        c.sumsq += o.y * o.y;
    }
    cells
}

/// Checks every cell has data and the broader and narrow means differ somewhere.
fn check_identified(cells: &[[CellStats; 3]; 2]) -> Result<(), EstimError> {
    let names = ["broader", "narrow", "mid"];
    for (s, row) in cells.iter().enumerate() {
        for (r, c) in row.iter().enumerate() {
            if c.n == 0.0 {
                return Err(EstimError::Degenerate(format!(
                    "no {} observations in scenario {}; the estimator needs the broader, narrow and mid treatments in both scenarios",
                    names[r],
                    s + 1
                )));
            }
        }
    }
    let separated = cells.iter().any(|row| {
        let (b, n) = (row[0].mean(), row[1].mean());
        (b - n).abs() > 1e-9 * (1.0 + b.abs())
    });
    if separated {
        Ok(())
    } else {
        Err(EstimError::Degenerate(
            "broader and narrow cell means coincide in every scenario, so kappa is not identified".into(),
        ))
    }
}

fn model_and_jacobian(theta: &Vec5, o: &KappaObs) -> (f64, Vec5) {
    let s = o.scenario.index();
    let (b, n, k) = (theta[s], theta[2 + s], theta[4]);
    let mut j = Vec5::zeros();
    let f = match o.role {
        CellRole::Broader => {
            j[s] = 1.0;
            b
        }
        CellRole::Narrow => {
            j[2 + s] = 1.0;
            n
        }
        CellRole::Mid => {
            j[s] = 1.0 - k;
            j[2 + s] = k;
            j[4] = n - b;
            (1.0 - k) * b + k * n
        }
    };
    (f, j)
}

fn ssr(theta: &Vec5, obs: &[KappaObs]) -> f64 {
    obs.iter()
        .map(|o| {
            let (f, _) = model_and_jacobian(theta, o);
            (o.y - f).powi(2)
        })
        .sum()
}

/// Returns (JᵀJ, Jᵀr).
fn normal_equations(theta: &Vec5, obs: &[KappaObs]) -> (Mat5, Vec5) {
    let mut jtj = Mat5::zeros();
    let mut jtr = Vec5::zeros();
    for o in obs {
        let (f, j) = model_and_jacobian(theta, o);
        jtj += j * j.transpose();
        jtr += j * (o.y - f);
    }
    (jtj, jtr)
}

pub fn nls_kappa_obs(obs: &[KappaObs]) -> Result<KappaFit, EstimError> {
    let cells = cell_stats(obs);
    check_identified(&cells)?;
    let mut theta = Vec5::new(
        cells[0][0].mean(),
        cells[1][0].mean(),
        cells[0][1].mean(),
        cells[1][1].mean(),
        START_KAPPA,
    );
    let mut current = ssr(&theta, obs);
    let mut iterations = 0;
    let mut converged = false;
    let mut gradient_norm = f64::INFINITY;
    let mut stalled = false;

    while iterations < MAX_ITERATIONS {
        let (jtj, jtr) = normal_equations(&theta, obs);
        gradient_norm = jtr.norm();
        if gradient_norm < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;
        let step = jtj
            .lu()
            .solve(&jtr)
            .ok_or_else(|| EstimError::Degenerate("singular Gauss-Newton system".into()))?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = theta + step * scale;
            let value = ssr(&trial, obs);
            if value <= current {
                theta = trial;
                current = value;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted || (step * scale).norm() < STEP_TOLERANCE {
            let (_, jtr) = normal_equations(&theta, obs);
            gradient_norm = jtr.norm();
            converged = gradient_norm < GRADIENT_TOLERANCE;
            stalled = !accepted && step.norm() >= STEP_TOLERANCE.sqrt();
            break;
        }
    }
    // A vanishing Gauss-Newton step also ends the search; `converged` then
    // records whether the gradient test was met as well.
    if stalled || (!converged && iterations >= MAX_ITERATIONS) {
        return Err(EstimError::NotConverged {
            iterations,
            detail: format!("gradient norm {gradient_norm:.3e}"),
        });
    }

    let (jtj, _) = normal_equations(&theta, obs);
    let bread = jtj
        .try_inverse()
        .ok_or_else(|| EstimError::Degenerate("singular information matrix at the solution".into()))?;
    let mut meat = Mat5::zeros();
    for o in obs {
        let (f, j) = model_and_jacobian(&theta, o);
        let r = o.y - f;
        meat += j * j.transpose() * (r * r);
    }
    let robust = bread * meat * bread;
    let dof = (obs.len() as f64 - N_PARAMS as f64).max(1.0);
    let model = bread * (current / dof);
    let est = |i: usize| Estimate {
        value: theta[i],
        robust_se: robust[(i, i)].max(0.0).sqrt(),
        model_se: model[(i, i)].max(0.0).sqrt(),
    };
    Ok(KappaFit {
        broader: [est(0), est(1)],
        narrow: [est(2), est(3)],
        kappa: est(4),
        iterations,
        converged,
        gradient_norm,
        ssr: current,
        n_obs: obs.len(),
    })
}

/// How the oracle weights residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellWeighting {
    /// Every observation counts once, as in [`nls_kappa`].
    #[default]
    Observations,
    /// Every cell counts once, each observation weighted by 1/n_cell.
    EqualCells,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for ProfileGrid {
    fn default() -> Self {
        Self {
            lo: -1.0,
            hi: 3.0,
            step: 1e-4,
        }
    }
}

pub fn kappa_profile_oracle(d: &Dataset, labels: KappaLabels) -> Result<f64, EstimError> {
    kappa_profile_oracle_obs(
        &kappa_observations(d, labels, true),
        ProfileGrid::default(),
        CellWeighting::Observations,
    )
}

/// Grid search over κ; for each κ the scenario effects solve a 2×2 weighted
/// least-squares system per scenario.
pub fn kappa_profile_oracle_obs(
    obs: &[KappaObs],
    grid: ProfileGrid,
    weighting: CellWeighting,
) -> Result<f64, EstimError> {
    let cells = cell_stats(obs);
    check_identified(&cells)?;
    let weighted = cells.map(|row| {
        row.map(|c| {
            let w = match weighting {
                CellWeighting::Observations => 1.0,
                CellWeighting::EqualCells => 1.0 / c.n,
            };
            CellStats {
                n: c.n * w,
                sum: c.sum * w,
                sumsq: c.sumsq * w,
            }
        })
    });
    let points = ((grid.hi - grid.lo) / grid.step).round() as usize + 1;
    let values = par::map_range(Execution::Parallel, points, |i| {
        let k = grid.lo + grid.step * i as f64;
        (k, profile_ssr(&weighted, k))
    });
    let best = values
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    Ok(best.0)
}

fn profile_ssr(cells: &[[CellStats; 3]; 2], k: f64) -> f64 {
    let sse = |c: &CellStats, f: f64| c.sumsq - 2.0 * f * c.sum + c.n * f * f;
    cells
        .iter()
        .map(|[b, n, m]| {
            // minimize over (B, N):
            // Σ_b (y − B)² + Σ_n (y − N)² + Σ_m (y − (1−k)B − kN)²
            let a11 = b.n + m.n * (1.0 - k) * (1.0 - k);
            let a12 = m.n * k * (1.0 - k);
            let a22 = n.n + m.n * k * k;
            let r1 = b.sum + (1.0 - k) * m.sum;
            let r2 = n.sum + k * m.sum;
            let det = a11 * a22 - a12 * a12;
            let bb = (r1 * a22 - r2 * a12) / det;
            let nn = (a11 * r2 - a12 * r1) / det;
            sse(b, bb) + sse(n, nn) + sse(m, (1.0 - k) * bb + k * nn)
        })
        .sum()
}
