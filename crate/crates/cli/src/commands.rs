use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bracketlab_core::estimators::{
    kappa_observations, mwu_test, nls_kappa_obs, power_two_sample, summarize_means, tobit_design, tobit_right,
    EstimError, KappaLabels,
};
use bracketlab_core::experiment::{read_csv, simulate_dataset, write_csv, Dataset};
use bracketlab_core::par::with_threads;
use bracketlab_core::theory::{model_zoo, verify_suite, Suite};
use bracketlab_core::{Scenario, Treatment};

use crate::config::{EstimateOptions, RunConfig};
use crate::report::{self, PairTest, Report};
use crate::{CliError, EstimateKind, SuiteArg};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn say<W: Write>(out: &mut W, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
}

pub fn simulate<W: Write>(
    config: &Path,
    out_path: Option<&Path>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: &mut W,
) -> Result<u8, CliError> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.simulation_spec(seed)?;
    let path: PathBuf = out_path
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::Usage("no output path: pass --out or set `run.out` in the config".into()))?;
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let dataset = match threads {
        Some(n) => with_threads(n, || simulate_dataset(&spec))?,
        None => simulate_dataset(&spec)?,
    };
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    write_csv(&dataset, &mut w)?;
    w.flush().map_err(io_err(&path))?;
    say(
        out,
        &format!(
            "wrote {} subjects to {} (seed {}, spec {})\n",
            dataset.len(),
            path.display(),
            spec.seed,
            &spec.digest()[..12]
        ),
    )?;
    Ok(0)
}

pub fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(read_csv(std::io::BufReader::new(file))?)
}

pub fn estimate<W: Write>(
    kind: EstimateKind,
    data: &Path,
    prefix: Option<&Path>,
    options: &EstimateOptions,
    out: &mut W,
) -> Result<u8, CliError> {
    let d = load_dataset(data)?;
    let rendered = match kind {
        EstimateKind::Means => report::means(&summarize_means(&d, options.drop_inconsistent)),
        EstimateKind::Mwu => mwu_report(&d, options)?,
        EstimateKind::Kappa => kappa_report(&d, options)?,
        EstimateKind::Tobit => tobit_report(&d, options)?,
    };
    match prefix {
        Some(prefix) => {
            let md = with_extension(prefix, "md");
            let csv = with_extension(prefix, "csv");
            std::fs::write(&md, &rendered.markdown).map_err(io_err(&md))?;
            std::fs::write(&csv, &rendered.csv).map_err(io_err(&csv))?;
            say(out, &format!("wrote {} and {}\n", md.display(), csv.display()))?;
        }
        None => say(out, &rendered.markdown)?,
    }
    Ok(0)
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn mwu_report(d: &Dataset, options: &EstimateOptions) -> Result<Report, CliError> {
    let present = d.treatments_present();
    let mut tests = Vec::new();
    for s in Scenario::ALL {
        for (i, &a) in present.iter().enumerate() {
            for &b in &present[i + 1..] {
                let x = d.wages(a, s, options.drop_inconsistent);
                let y = d.wages(b, s, options.drop_inconsistent);
                if x.is_empty() || y.is_empty() {
                    continue;
                }
                let result = mwu_test(&x, &y, options.continuity).map_err(|source| CliError::Estimation {
                    context: format!("rank-sum test {} vs {}", a.label(), b.label()),
                    source,
                })?;
                tests.push(PairTest {
                    scenario: s,
                    first: a,
                    second: b,
                    n_first: x.len(),
                    n_second: y.len(),
                    result,
                });
            }
        }
    }
    Ok(report::mwu(&present, &tests, options.continuity))
}

fn kappa_report(d: &Dataset, options: &EstimateOptions) -> Result<Report, CliError> {
    let present = d.treatments_present();
    let names: Vec<&str> = present.iter().map(|t| t.label()).collect();
    let remedy = |broader: &str| {
        format!(
            "the kappa regression needs {broader}, LOW and NARROW answered in both scenarios, with {broader} and LOW means \
             that differ in at least one scenario (treatments present: {})",
            if names.is_empty() { "none".to_string() } else { names.join(", ") }
        )
    };
    let comparisons: Vec<KappaLabels> = [KappaLabels::BROAD, KappaLabels::PARTIAL]
        .into_iter()
        .filter(|l| present.contains(&l.broader))
        .collect();
    if comparisons.is_empty() {
        return Err(CliError::Estimation {
            context: "kappa".into(),
            source: EstimError::Degenerate(remedy("BROAD or PARTIAL")),
        });
    }
    let mut fits = Vec::new();
    for labels in comparisons {
        let obs = kappa_observations(d, labels, options.drop_inconsistent);
        let fit = nls_kappa_obs(&obs).map_err(|e| CliError::Estimation {
            context: format!("kappa ({} vs LOW)", labels.broader.label()),
            source: match e {
                EstimError::Degenerate(msg) => EstimError::Degenerate(format!("{msg}; {}", remedy(labels.broader.label()))),
                other => other,
            },
        })?;
        fits.push((labels.broader, fit));
    }
    Ok(report::kappa(&fits))
}

fn tobit_report(d: &Dataset, options: &EstimateOptions) -> Result<Report, CliError> {
    let mut fits: Vec<(Treatment, _)> = Vec::new();
    let mut names = Vec::new();
    for t in d.treatments_present() {
        let design = tobit_design(d, t, options.drop_inconsistent);
        let fit = tobit_right(&design.y, &design.x, options.censor_limit).map_err(|source| CliError::Estimation {
            context: format!("tobit for {}", t.label()),
            source,
        })?;
        names = design.names;
        fits.push((t, fit));
    }
    Ok(report::tobit(options.censor_limit, &names, &fits))
}

pub fn power<W: Write>(d: f64, alpha: f64, power: f64, ratio: f64, are: bool, out: &mut W) -> Result<u8, CliError> {
    let (large, small) = power_two_sample(d, alpha, power, ratio, are).map_err(|e| match e {
        EstimError::InvalidParams(m) => CliError::Usage(m),
        other => CliError::Estimation {
            context: "power".into(),
            source: other,
        },
    })?;
    say(out, &format!("n_large: {large}\nn_small: {small}\n"))?;
    Ok(0)
}

pub fn verify<W: Write>(suite: SuiteArg, out: &mut W) -> Result<u8, CliError> {
    let suite = match suite {
        SuiteArg::Additivity => Suite::Additivity,
        SuiteArg::Unidentifiability => Suite::Unidentifiability,
        SuiteArg::Cara => Suite::Cara,
        SuiteArg::Mixture => Suite::Mixture,
        SuiteArg::Warp => Suite::Warp,
        SuiteArg::All => Suite::All,
    };
    let outcomes = verify_suite(suite, &model_zoo());
    say(out, &report::verify(&outcomes))?;
    Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
}
