//! Deterministic markdown and CSV renderings of estimation results.
//! Every estimate is printed with four decimals.

use std::fmt::Write;

use bracketlab_core::estimators::{CellSummary, Estimate, KappaFit, MwuResult, TobitFit};
use bracketlab_core::theory::CheckOutcome;
use bracketlab_core::{Scenario, Treatment};

/// A rendered report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub markdown: String,
    pub csv: String,
}

/// Four decimals, never "-0.0000".
pub fn fmt4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

fn coef_se(value: f64, se: f64) -> String {
    format!("{} ({})", fmt4(value), fmt4(se))
}

macro_rules! emit {
    ($dst:expr) => {
        writeln!($dst).expect("writing to a string")
    };
    ($dst:expr, $($arg:tt)*) => {
        writeln!($dst, $($arg)*).expect("writing to a string")
    };
}

pub fn means(cells: &[CellSummary]) -> Report {
    let mut md = String::new();
    emit!(md, "# Means by treatment and scenario\n");
    emit!(md, "| Scenario | Treatment | Res. Wage | Std Dev | % upper bound | N |");
    emit!(md, "|---|---|---:|---:|---:|---:|");
    let mut csv = String::from("scenario,treatment,mean,sd,share_upper,n\n");
    for c in cells {
        emit!(
            md,
            "| {} | {} | {} | {} | {:.2}% | {} |",
            c.scenario.number(),
            c.treatment.label(),
            fmt4(c.mean),
            fmt4(c.sd),
            100.0 * c.share_upper,
            c.n
        );
        emit!(
            csv,
            "{},{},{},{},{},{}",
            c.scenario.number(),
            c.treatment.label(),
            fmt4(c.mean),
            fmt4(c.sd),
            fmt4(c.share_upper),
            c.n
        );
    }
    Report { markdown: md, csv }
}

/// One pairwise comparison within a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTest {
    pub scenario: Scenario,
    pub first: Treatment,
    pub second: Treatment,
    pub n_first: usize,
    pub n_second: usize,
    pub result: MwuResult,
}

/// Lower-triangular p-value tables, one per scenario, over `treatments`.
pub fn mwu(treatments: &[Treatment], tests: &[PairTest], continuity: bool) -> Report {
    let mut md = String::new();
    emit!(md, "# Two-sided rank-sum tests\n");
    emit!(
        md,
        "Normal approximation with tie correction; continuity correction {}.\n",
        if continuity { "on" } else { "off" }
    );
    for s in Scenario::ALL {
        let in_scenario: Vec<&PairTest> = tests.iter().filter(|t| t.scenario == s).collect();
        if in_scenario.is_empty() {
            continue;
        }
        emit!(md, "## Scenario {}\n", s.number());
        let cols = &treatments[..treatments.len().saturating_sub(1)];
        let header: Vec<&str> = cols.iter().map(|t| t.label()).collect();
        emit!(md, "| | {} |", header.join(" | "));
        emit!(md, "|---|{}", "---:|".repeat(cols.len()));
        for (i, row) in treatments.iter().enumerate().skip(1) {
            let cells: Vec<String> = cols
                .iter()
                .enumerate()
                .map(|(j, col)| {
                    if j >= i {
                        return String::new();
                    }
                    in_scenario
                        .iter()
                        .find(|t| t.first == *col && t.second == *row)
                        .map(|t| fmt4(t.result.p_value))
                        .unwrap_or_else(|| "n/a".to_string())
                })
                .collect();
            emit!(md, "| {} | {} |", row.label(), cells.join(" | "));
        }
        emit!(md);
    }
    let mut csv = String::from("scenario,first,second,n_first,n_second,w,z,p_value,tie_corrected,continuity\n");
    for t in tests {
        emit!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            t.scenario.number(),
            t.first.label(),
            t.second.label(),
            t.n_first,
            t.n_second,
            fmt4(t.result.w),
            fmt4(t.result.z),
            fmt4(t.result.p_value),
            u8::from(t.result.tie_corrected),
            u8::from(t.result.continuity)
        );
    }
    Report { markdown: md, csv }
}

type Term = fn(&KappaFit) -> Estimate;

/// κ fits keyed by the broader treatment they compare against LOW.
pub fn kappa(fits: &[(Treatment, KappaFit)]) -> Report {
    let mut md = String::new();
    emit!(md, "# Degree of narrow bracketing\n");
    let header: Vec<&str> = fits.iter().map(|(t, _)| t.label()).collect();
    emit!(md, "| | {} |", header.join(" | "));
    emit!(md, "|---|{}", "---:|".repeat(fits.len()));
    let rows: [(&str, Term); 5] = [
        ("S1 broader (B_1)", |f| f.broader[0]),
        ("S2 broader (B_2)", |f| f.broader[1]),
        ("S1 narrow (N_1)", |f| f.narrow[0]),
        ("S2 narrow (N_2)", |f| f.narrow[1]),
        ("kappa", |f| f.kappa),
    ];
    for (name, get) in rows {
        let cells: Vec<String> = fits
            .iter()
            .map(|(_, f)| {
                let e = get(f);
                coef_se(e.value, e.robust_se)
            })
            .collect();
        emit!(md, "| {name} | {} |", cells.join(" | "));
    }
    let n: Vec<String> = fits.iter().map(|(_, f)| f.n_obs.to_string()).collect();
    emit!(md, "| Observations | {} |", n.join(" | "));
    emit!(md, "\nRobust standard errors in parentheses.");

    let mut csv = String::from("broader,term,estimate,robust_se,model_se\n");
    for (t, f) in fits {
        let terms = [
            ("B_1", f.broader[0]),
            ("B_2", f.broader[1]),
            ("N_1", f.narrow[0]),
            ("N_2", f.narrow[1]),
            ("kappa", f.kappa),
        ];
        for (name, e) in terms {
            emit!(
                csv,
                "{},{},{},{},{}",
                t.label(),
                name,
                fmt4(e.value),
                fmt4(e.robust_se),
                fmt4(e.model_se)
            );
        }
    }
    Report { markdown: md, csv }
}

pub fn tobit(limit: f64, names: &[&str], fits: &[(Treatment, TobitFit)]) -> Report {
    let mut md = String::new();
    emit!(md, "# Tobit regressions (right censored at ${limit:.2})\n");
    let header: Vec<&str> = fits.iter().map(|(t, _)| t.label()).collect();
    emit!(md, "| | {} |", header.join(" | "));
    emit!(md, "|---|{}", "---:|".repeat(fits.len()));
    for (j, name) in names.iter().enumerate() {
        let cells: Vec<String> = fits
            .iter()
            .map(|(_, f)| coef_se(f.coefficients[j].value, f.coefficients[j].se))
            .collect();
        emit!(md, "| {name} | {} |", cells.join(" | "));
    }
    let sigma: Vec<String> = fits.iter().map(|(_, f)| coef_se(f.sigma, f.sigma_se)).collect();
    emit!(md, "| Sigma | {} |", sigma.join(" | "));
    let ll: Vec<String> = fits.iter().map(|(_, f)| fmt4(f.log_likelihood)).collect();
    emit!(md, "| Log-likelihood | {} |", ll.join(" | "));
    let n: Vec<String> = fits
        .iter()
        .map(|(_, f)| (f.n_censored + f.n_uncensored).to_string())
        .collect();
    emit!(md, "| Observations | {} |", n.join(" | "));
    let c: Vec<String> = fits.iter().map(|(_, f)| f.n_censored.to_string()).collect();
    emit!(md, "| Censored | {} |", c.join(" | "));
    emit!(md, "\nStandard errors in parentheses.");

    let mut csv = String::from("treatment,term,coef,se\n");
    for (t, f) in fits {
        for (j, name) in names.iter().enumerate() {
            emit!(
                csv,
                "{},{},{},{}",
                t.label(),
                name,
                fmt4(f.coefficients[j].value),
                fmt4(f.coefficients[j].se)
            );
        }
        emit!(csv, "{},Sigma,{},{}", t.label(), fmt4(f.sigma), fmt4(f.sigma_se));
    }
    Report { markdown: md, csv }
}

pub fn verify(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let measured = match &o.error {
            Some(e) => format!("error: {e}"),
            None => format!("{:.6e}", o.measured),
        };
        emit!(
            out,
            "{status}  {:<17} {:<11} {:<48} {} (want {})",
            o.suite.name(),
            o.expectation.label(),
            o.name,
            measured,
            o.criterion
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let expected = outcomes
        .iter()
        .filter(|o| o.passed && o.expectation == bracketlab_core::theory::Expectation::Violated)
        .count();
    emit!(
        out,
        "{} checks, {} failed, {} expected violations confirmed",
        outcomes.len(),
        failed,
        expected
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_decimals_without_negative_zero() {
        assert_eq!(fmt4(-0.00001), "0.0000");
        assert_eq!(fmt4(2.87999), "2.8800");
        assert_eq!(coef_se(1.0, 0.25), "1.0000 (0.2500)");
    }

    #[test]
    fn means_table_rows() {
        let cells = [CellSummary {
            treatment: Treatment::Broad,
            scenario: Scenario::S1,
            mean: 2.88,
            sd: 1.24,
            share_upper: 0.24,
            n: 137,
        }];
        let r = means(&cells);
        assert!(r.markdown.contains("| 1 | BROAD | 2.8800 | 1.2400 | 24.00% | 137 |"));
        assert_eq!(r.csv.lines().nth(1), Some("1,BROAD,2.8800,1.2400,0.2400,137"));
    }
}
