//! `spectrum`: partition, ratio table, resonance and smoothness report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use ssmfrac::dynamics::testbed;
use ssmfrac::linalg::eig;
use ssmfrac::spectrum::{
    check_nonresonance, partition_eigenvalues, partition_spectrum, read_matrix_csv, slowest_selector, smoothness_class,
    spectral_quotients, spectral_ratio_table, Kind, SpectralPartition,
};

use crate::manifest::{num, OutputDir};
use crate::{CliError, CliResult, Status};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    /// Linearization as a CSV matrix.
    #[arg(long, group = "source")]
    pub matrix: Option<PathBuf>,
    /// Built-in testbed, linearized at the origin.
    #[arg(long, group = "source")]
    pub testbed: Option<String>,
    /// Testbed parameters, `name=value` separated by commas.
    #[arg(long, requires = "testbed")]
    pub params: Option<String>,
    /// Eigenvalues `re` or `re:im`, separated by commas.
    #[arg(long, group = "source", allow_hyphen_values = true)]
    pub eigenvalues: Option<String>,
    /// Eigenvalues are logarithms of map eigenvalues.
    #[arg(long, requires = "eigenvalues")]
    pub log: bool,
    /// `flow` or `map`; inferred as `map` with `--log`.
    #[arg(long)]
    pub kind: Option<String>,
    /// Real dimension of the master subspace (slowest eigenvalues; complex pairs stay together).
    #[arg(long, default_value_t = 1)]
    pub master_dim: usize,
    /// Highest resonance order checked.
    #[arg(long, default_value_t = 5)]
    pub max_order: u32,
    #[arg(long, short)]
    pub out: PathBuf,
}

pub fn parse_params(s: &str) -> CliResult<BTreeMap<String, f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| CliError::input(format!("parameter '{p}' is not name=value")))?;
            let v = v.trim().parse::<f64>().map_err(|e| CliError::input(format!("parameter '{p}': {e}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn parse_eigenvalues(s: &str, log: bool) -> CliResult<Vec<Complex64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| CliError::input(format!("eigenvalue '{p}': {e}")));
            let z = match p.split_once(':') {
                Some((re, im)) => Complex64::new(parse(re)?, parse(im)?),
                None => Complex64::new(parse(p)?, 0.0),
            };
            Ok(if log { z.exp() } else { z })
        })
        .collect()
}

fn partition(args: &SpectrumArgs) -> CliResult<SpectralPartition> {
    let kind: Kind = match &args.kind {
        Some(k) => k.parse()?,
        None if args.log => Kind::Map,
        None => Kind::Flow,
    };
    if let Some(list) = &args.eigenvalues {
        let eigs = parse_eigenvalues(list, args.log)?;
        if eigs.is_empty() {
            return Err(CliError::input("empty eigenvalue list"));
        }
        return Ok(partition_eigenvalues(&eigs, slowest_selector(&eigs, args.master_dim, kind), kind)?);
    }
    let a = if let Some(path) = &args.matrix {
        read_matrix_csv(path)?
    } else if let Some(name) = &args.testbed {
        let params = args.params.as_deref().map(parse_params).transpose()?.unwrap_or_default();
        let sys = testbed(name, &params)?;
        sys.jacobian(0.0, &vec![0.0; sys.dim()])
    } else {
        return Err(CliError::input("one of --matrix, --testbed or --eigenvalues is required"));
    };
    if a.nrows() != a.ncols() {
        return Err(CliError::input(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    let eigs = eig(&a)?.values;
    Ok(partition_spectrum(&a, slowest_selector(&eigs, args.master_dim, kind), kind)?)
}

/// Labels matching the order of `spectral_quotients`.
fn quotient_labels(spec: &SpectralPartition) -> Vec<(String, String)> {
    let names = |prefix: &str, n: usize| (1..=n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    let (lam, alp) = (names("lambda", spec.p), names("alpha", spec.q));
    let (kap, bet) = (names("kappa", spec.r), names("beta", spec.s));
    let mut out = Vec::new();
    for master in [&lam, &alp] {
        for slaved in [&kap, &bet] {
            for s in slaved {
                out.extend(master.iter().map(|m| (s.clone(), m.clone())));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct Report {
    kind: Kind,
    master: Vec<[f64; 2]>,
    slaved: Vec<[f64; 2]>,
    eta: ssmfrac::spectrum::Eta,
    smoothness_ratios: Vec<f64>,
    resonance: ssmfrac::spectrum::ResonanceReport,
}

pub fn run(args: SpectrumArgs) -> CliResult<Status> {
    let spec = partition(&args)?;
    let mut out = OutputDir::create(&args.out)?;
    out.write("spectrum.json", format!("{}\n", spec.to_json()?).as_bytes())?;

    let rows: Vec<Vec<String>> = if spec.kind == Kind::Map && spec.p == 1 {
        spectral_ratio_table(&spec)?
            .into_iter()
            .map(|(i, r)| vec![format!("kappa{i}"), "lambda1".into(), num(r)])
            .collect()
    } else {
        quotient_labels(&spec).into_iter().zip(spectral_quotients(&spec)).map(|((s, m), r)| vec![s, m, num(r)]).collect()
    };
    out.write_csv("ratios.csv", &["slaved", "master", "ratio"], &rows)?;

    let smooth = smoothness_class(&spec);
    let pair = |z: Complex64| [z.re, z.im];
    let report = Report {
        kind: spec.kind,
        master: spec.master_eigenvalues().into_iter().map(pair).collect(),
        slaved: spec.slaved_eigenvalues().into_iter().map(pair).collect(),
        eta: smooth.eta,
        smoothness_ratios: smooth.ratios,
        resonance: check_nonresonance(&spec, args.max_order),
    };
    out.write_json("report.json", &report)?;
    out.finish("spectrum", &args)?;
    println!("eta = {}; {} ratio rows written to {}", smooth.eta, rows.len(), args.out.display());
    Ok(Status::Ok)
}
