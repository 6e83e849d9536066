//! Dataset CSV: one row per subject × scenario.
//!
//! Money is written with two decimals; every recorded wage is a multiple of
//! $0.25, so reading a file back reproduces the records exactly.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::record::{classify_consistency, ChoiceFlags, Covariates, Dataset, Gender, ScenarioResponse, SubjectRecord};
use super::treatment::{Scenario, Treatment, PRICE_LIST_ROWS};
use super::DataError;

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["subject_id", "treatment", "scenario"].iter().map(|s| s.to_string()).collect();
    h.extend((1..=PRICE_LIST_ROWS).map(|i| format!("c{i:02}")));
    h.extend(
        ["res_wage", "censored", "consistent", "gender", "age", "tediousness"]
            .iter()
            .map(|s| s.to_string()),
    );
    h
}

pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<(), DataError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(csv_header())?;
    for r in &dataset.records {
        for s in Scenario::ALL {
            let Some(resp) = r.response(s) else { continue };
            let mut row = Vec::with_capacity(PRICE_LIST_ROWS + 9);
            row.push(r.subject_id.to_string());
            row.push(r.treatment.label().to_string());
            row.push(s.number().to_string());
            row.extend(resp.accepts.iter().map(|&a| bit(a).to_string()));
            row.push(resp.res_wage.map(|x| format!("{x:.2}")).unwrap_or_default());
            row.push(bit(resp.censored).to_string());
            row.push(bit(resp.consistent).to_string());
            row.push(r.covariates.gender.code().to_string());
            row.push(r.covariates.age.to_string());
            row.push(r.covariates.tediousness.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(dataset: &Dataset) -> String {
    let mut buf = Vec::new();
    write_csv(dataset, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn bit(b: bool) -> u8 {
    u8::from(b)
}

/// Parses a dataset, rejecting anything that does not match the schema.
/// Rows sharing a subject id are merged into one record.
pub fn read_csv<R: Read>(input: R) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header != csv_header() {
        return Err(DataError::Schema {
            line: 1,
            message: format!("header must be `{}`", csv_header().join(",")),
        });
    }
    let mut by_id: BTreeMap<u32, (usize, SubjectRecord)> = BTreeMap::new();
    let mut order = 0usize;
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let err = |message: String| DataError::Schema { line, message };
        if row.len() != PRICE_LIST_ROWS + 9 {
            return Err(err(format!("expected {} fields, found {}", PRICE_LIST_ROWS + 9, row.len())));
        }
        let field = |i: usize| row.get(i).unwrap_or("").trim();
        let subject_id: u32 = field(0).parse().map_err(|_| err(format!("bad subject_id `{}`", field(0))))?;
        let treatment = Treatment::from_label(field(1)).ok_or_else(|| err(format!("unknown treatment `{}`", field(1))))?;
        let scenario = field(2)
            .parse::<u8>()
            .ok()
            .and_then(Scenario::from_number)
            .ok_or_else(|| err(format!("scenario must be 1 or 2, got `{}`", field(2))))?;
        let mut accepts: ChoiceFlags = [false; PRICE_LIST_ROWS];
        for (i, a) in accepts.iter_mut().enumerate() {
            *a = parse_bit(field(3 + i)).ok_or_else(|| err(format!("c{:02} must be 0 or 1", i + 1)))?;
        }
        let base = 3 + PRICE_LIST_ROWS;
        let res_wage = match field(base) {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|_| err(format!("bad res_wage `{s}`")))?),
        };
        let censored = parse_bit(field(base + 1)).ok_or_else(|| err("censored must be 0 or 1".into()))?;
        let consistent = parse_bit(field(base + 2)).ok_or_else(|| err("consistent must be 0 or 1".into()))?;
        let gender = Gender::from_code(field(base + 3)).ok_or_else(|| err(format!("gender must be F or M, got `{}`", field(base + 3))))?;
        let age: u32 = field(base + 4).parse().map_err(|_| err(format!("bad age `{}`", field(base + 4))))?;
        let tediousness: u8 = field(base + 5)
            .parse()
            .ok()
            .filter(|t| (1..=10).contains(t))
            .ok_or_else(|| err(format!("tediousness must be 1..10, got `{}`", field(base + 5))))?;

        let derived = ScenarioResponse::from_flags(accepts);
        let c = classify_consistency(&accepts);
        let wage_matches = match (res_wage, c.switch_wage) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() < 1e-9,
            _ => false,
        };
        if consistent != c.consistent || censored != derived.censored || !wage_matches {
            return Err(err("res_wage/censored/consistent disagree with the choice flags".into()));
        }
        let covariates = Covariates { gender, age, tediousness };

        let entry = by_id.entry(subject_id).or_insert_with(|| {
            order += 1;
            (
                order,
                SubjectRecord {
                    subject_id,
                    treatment,
                    responses: [None, None],
                    covariates,
                },
            )
        });
        let rec = &mut entry.1;
        if rec.treatment != treatment || rec.covariates != covariates {
            return Err(err(format!("subject {subject_id} changes treatment or covariates between rows")));
        }
        if rec.responses[scenario.index()].is_some() {
            return Err(err(format!("duplicate scenario {} for subject {subject_id}", scenario.number())));
        }
        rec.responses[scenario.index()] = Some(derived);
    }
    let mut records: Vec<(usize, SubjectRecord)> = by_id.into_values().collect();
    records.sort_by_key(|(o, _)| *o);
    Ok(Dataset::new(records.into_iter().map(|(_, r)| r).collect()))
}

fn parse_bit(s: &str) -> Option<bool> {
    match s {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{simulate_dataset, Composition, PopulationSpec, TreatmentCounts};

    fn sample() -> Dataset {
        let spec = PopulationSpec {
            counts: TreatmentCounts::uniform(&Treatment::ALL, 8),
            tremble: 0.08,
            composition: Composition::NarrowShare(0.5),
            seed: 9,
            ..PopulationSpec::default()
        };
        simulate_dataset(&spec).unwrap()
    }

    #[test]
    fn header_layout() {
        let h = csv_header();
        assert_eq!(h.len(), 25);
        assert_eq!(h[3], "c01");
        assert_eq!(h[18], "c16");
        assert_eq!(h[19], "res_wage");
    }

    #[test]
    fn round_trip_keeps_records() {
        let d = sample();
        let text = to_csv_string(&d);
        assert_eq!(text.lines().count(), 1 + 2 * d.len());
        let back = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.records, d.records);
        assert_eq!(to_csv_string(&back), text);
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let d = sample();
        let text = to_csv_string(&d);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[3] = lines[3].replacen(",1,", ",7,", 1);
        let broken = lines.join("\n");
        match read_csv(broken.as_bytes()) {
            Err(DataError::Schema { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected schema error, got {other:?}"),
        }
        assert!(matches!(
            read_csv("a,b,c\n".as_bytes()),
            Err(DataError::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_wage_that_disagrees_with_flags() {
        let d = sample();
        let text = to_csv_string(&d);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        // consistent rows in a noiseless sample: rewrite the wage field
        let mut fields: Vec<String> = lines[1].split(',').map(String::from).collect();
        fields[19] = if fields[19] == "1.00" { "2.00".into() } else { "1.00".into() };
        fields[21] = "1".into();
        lines[1] = fields.join(",");
        assert!(read_csv(lines.join("\n").as_bytes()).is_err());
    }
}
