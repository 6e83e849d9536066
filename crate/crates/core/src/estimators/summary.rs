use crate::experiment::{Dataset, Scenario, Treatment, CENSOR_CODE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub treatment: Treatment,
    pub scenario: Scenario,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single observation.
    pub sd: f64,
    /// Share of observations at the censor code.
    pub share_upper: f64,
    pub n: usize,
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// One row per treatment × scenario cell with data, scenario-major.
/// Censored answers enter at the censor code.
pub fn summarize_means(d: &Dataset, drop_inconsistent: bool) -> Vec<CellSummary> {
    let mut out = Vec::new();
    for s in Scenario::ALL {
        for t in Treatment::ALL {
            let w = d.wages(t, s, drop_inconsistent);
            if w.is_empty() {
                continue;
            }
            let (mean, sd) = mean_sd(&w);
            let upper = w.iter().filter(|&&x| x >= CENSOR_CODE).count();
            out.push(CellSummary {
                treatment: t,
                scenario: s,
                mean,
                sd,
                share_upper: upper as f64 / w.len() as f64,
                n: w.len(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{Covariates, Gender, ScenarioResponse, SubjectRecord, PRICE_LIST_ROWS};

    fn record(id: u32, t: Treatment, switch_row: Option<usize>) -> SubjectRecord {
        let mut flags = [false; PRICE_LIST_ROWS];
        if let Some(r) = switch_row {
            for f in flags.iter_mut().skip(r) {
                *f = true;
            }
        }
        SubjectRecord {
            subject_id: id,
            treatment: t,
            responses: [Some(ScenarioResponse::from_flags(flags)), None],
            covariates: Covariates { gender: Gender::Male, age: 40, tediousness: 5 },
        }
    }

    #[test]
    fn single_record() {
        let d = Dataset::new(vec![record(1, Treatment::Broad, Some(10))]);
        let s = summarize_means(&d, true);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean, s[0].sd, s[0].share_upper, s[0].n), (2.75, 0.0, 0.0, 1));
    }

    #[test]
    fn censored_enters_at_code() {
        let d = Dataset::new(vec![record(1, Treatment::Low, None), record(2, Treatment::Low, Some(8))]);
        let s = summarize_means(&d, true);
        assert_eq!(s[0].mean, 3.25);
        assert_eq!(s[0].share_upper, 0.5);
        assert_eq!(s[0].n, 2);
    }

    #[test]
    fn inconsistent_dropped_on_request() {
        let mut r = record(3, Treatment::Narrow, Some(12));
        let resp = r.responses[0].as_mut().unwrap();
        resp.accepts[2] = true;
        *resp = ScenarioResponse::from_flags(resp.accepts);
        let d = Dataset::new(vec![r, record(4, Treatment::Narrow, Some(4))]);
        assert_eq!(summarize_means(&d, true)[0].n, 1);
        let kept = summarize_means(&d, false);
        assert_eq!(kept[0].n, 2);
        assert_eq!(kept[0].mean, (0.75 + 1.25) / 2.0);
    }
}
