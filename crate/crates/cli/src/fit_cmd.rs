//! `fit`: reduced map or flow over a fractional dictionary.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use ssmfrac::dictionary::{
    dictionary_flow_1d_with, dictionary_flow_2d_with, dictionary_map_1d_with, dictionary_map_2d_with, prune_near_integer, Branch,
    DictOptions, Dictionary, NEAR_INTEGER_TOL,
};
use ssmfrac::fit::{fit_reduced_flow, fit_reduced_map, predict, relative_error, DerivativeScheme, Horizon, ReducedFit};
use ssmfrac::spectrum::{Kind, SpectralPartition};
use ssmfrac::trajectory::Trajectory;

use crate::manifest::{num, OutputDir};
use crate::{CliError, CliResult, Status};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Directory of training trajectory CSVs.
    #[arg(long)]
    pub data: PathBuf,
    /// Held-out trajectory CSVs.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Spectrum JSON written by `spectrum`.
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub order: u32,
    /// Near-integer pruning tolerance; 0 disables pruning.
    #[arg(long, default_value_t = NEAR_INTEGER_TOL)]
    pub prune: f64,
    /// `map` or `flow`; must agree with the spectrum.
    #[arg(long)]
    pub kind: Option<String>,
    /// Integer-powered polynomial baseline.
    #[arg(long)]
    pub integer_only: bool,
    /// Master coordinate lies on u ≥ 0 (one fractional column per term).
    #[arg(long)]
    pub positive_only: bool,
    /// Data columns holding the master coordinates (default: the first ones).
    #[arg(long, value_delimiter = ',')]
    pub coords: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

fn read_dir(dir: &Path) -> CliResult<Vec<(String, Trajectory)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::input(format!("no trajectory CSVs in {}", dir.display())));
    }
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let t = Trajectory::read_csv_path(&p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
            Ok((name, t))
        })
        .collect()
}

fn build_dictionary(args: &FitArgs, spec: &SpectralPartition) -> CliResult<Dictionary> {
    let opts = DictOptions {
        branch: if args.positive_only { Branch::PositiveOnly } else { Branch::Signed },
        integer_only: args.integer_only,
        near_integer_tol: args.prune,
        ..Default::default()
    };
    let dict = match (spec.kind, spec.p + 2 * spec.q) {
        (Kind::Map, 1) => dictionary_map_1d_with(spec, args.order, &opts)?,
        (Kind::Map, 2) => dictionary_map_2d_with(spec, args.order, &opts)?,
        (Kind::Flow, 1) => dictionary_flow_1d_with(spec, args.order, &opts)?,
        (Kind::Flow, 2) => dictionary_flow_2d_with(spec, args.order, &opts)?,
        (_, d) => return Err(CliError::input(format!("master dimension {d} not supported (1 or 2)"))),
    };
    Ok(if args.prune > 0.0 { prune_near_integer(&dict, args.prune) } else { dict })
}

#[derive(Serialize)]
struct TrajectoryError {
    file: String,
    set: &'static str,
    mean_relative_error: Option<f64>,
    left_trust_region: bool,
    error: Option<String>,
}

fn evaluate(model: &ReducedFit, set: &'static str, data: &[(String, Trajectory)]) -> Vec<TrajectoryError> {
    data.iter()
        .map(|(file, t)| {
            let horizon = match model.kind {
                Kind::Map => Horizon::Steps(t.len().saturating_sub(1)),
                Kind::Flow => Horizon::Times(t.times().to_vec()),
            };
            let res = predict(model, t.state(0), horizon).and_then(|p| Ok((relative_error(t, &p.trajectory)?, p.left_trust_region())));
            match res {
                Ok((e, left)) => TrajectoryError { file: file.clone(), set, mean_relative_error: Some(e.mean), left_trust_region: left, error: None },
                Err(e) => TrajectoryError { file: file.clone(), set, mean_relative_error: None, left_trust_region: false, error: Some(e.to_string()) },
            }
        })
        .collect()
}

pub fn run(args: FitArgs) -> CliResult<Status> {
    let text = std::fs::read_to_string(&args.spectrum).map_err(|e| CliError::input(format!("{}: {e}", args.spectrum.display())))?;
    let spec = SpectralPartition::from_json(&text)?;
    if let Some(k) = &args.kind {
        let k: Kind = k.parse()?;
        if k != spec.kind {
            return Err(CliError::input(format!("--kind {k} disagrees with the {} spectrum", spec.kind)));
        }
    }
    let dim = spec.p + 2 * spec.q;
    let coords = args.coords.clone().unwrap_or_else(|| (0..dim).collect());
    if coords.len() != dim {
        return Err(CliError::input(format!("{} master coordinates given, spectrum has {dim}", coords.len())));
    }
    let project = |set: Vec<(String, Trajectory)>| -> CliResult<Vec<(String, Trajectory)>> {
        set.into_iter()
            .map(|(n, t)| {
                if t.kind != spec.kind {
                    return Err(CliError::input(format!("{n}: {} data for a {} spectrum", t.kind, spec.kind)));
                }
                Ok((n, t.project(&coords)?))
            })
            .collect()
    };
    let train = project(read_dir(&args.data)?)?;
    let test = args.test.as_deref().map(read_dir).transpose()?.map(project).transpose()?.unwrap_or_default();

    let dict = build_dictionary(&args, &spec)?;
    let series: Vec<Trajectory> = train.iter().map(|(_, t)| t.clone()).collect();
    let model = match spec.kind {
        Kind::Map => fit_reduced_map(&series, &dict, args.ridge)?,
        Kind::Flow => fit_reduced_flow(&series, &dict, DerivativeScheme::Central4, args.ridge)?,
    };

    let mut out = OutputDir::create(&args.out)?;
    out.write("model.json", format!("{}\n", model.to_json()?).as_bytes())?;
    let labels = model.dictionary.column_labels();
    let rows: Vec<Vec<String>> = model
        .coefficients
        .iter()
        .enumerate()
        .flat_map(|(ch, cs)| labels.iter().zip(cs).map(move |(l, c)| vec![ch.to_string(), l.clone(), num(*c)]))
        .collect();
    out.write_csv("coefficients.csv", &["channel", "term", "coefficient"], &rows)?;
    let mut errors = evaluate(&model, "train", &train);
    errors.extend(evaluate(&model, "test", &test));
    out.write_json(
        "report.json",
        &serde_json::json!({ "diagnostics": model.diagnostics, "columns": labels.len(), "trajectories": errors }),
    )?;
    out.finish("fit", &args)?;
    println!(
        "{} columns, training residual {:?}, condition {:.3e}; written to {}",
        labels.len(),
        model.diagnostics.residual,
        model.diagnostics.cond.unwrap_or(f64::NAN),
        args.out.display()
    );
    Ok(Status::Ok)
}
