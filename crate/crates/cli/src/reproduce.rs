//! `reproduce`: end-to-end example pipelines with pass/fail checks and
//! plot-ready CSVs.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;

use clap::Args;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use ssmfrac::dictionary::{
    dictionary_flow_1d_with, dictionary_integer, prune_near_integer, Branch, DictOptions, Dictionary, LinearGraphCoeffs,
    NEAR_INTEGER_TOL,
};
use ssmfrac::dynamics::{
    exact_graph_planar, exact_reduced_planar, floquet, integrate_with, mixed3d, newton_fixed_point, planar, poincare_map,
    shaw_pierre, shaw_pierre_forced_seeds, FlowSystem, IntegrateOptions, IntegrationConstant, NewtonOptions, ShawPierreParams,
};
use ssmfrac::fit::{
    dmd_fit, dmd_predict, fit_graph, fit_reduced_flow, pod_reduced_model_planar, predict, relative_error, DerivativeScheme,
    GraphFit, Horizon, ReducedFit,
};
use ssmfrac::linalg::eig;
use ssmfrac::normalform::{invariance_residual, linearize, shaw_pierre_poly_system};
use ssmfrac::reference::{SHAW_PIERRE_MASTER, SHAW_PIERRE_SADDLE, SHAW_PIERRE_SLAVED};
use ssmfrac::spectrum::{partition_spectrum, slowest_selector, Kind, SpectralPartition};
use ssmfrac::trajectory::Trajectory;

use crate::manifest::{num, OutputDir};
use crate::{thread_budget, CliError, CliResult, Status};

pub const EXAMPLES: [&str; 4] = ["planar", "mixed3d", "shaw_pierre_unforced", "shaw_pierre_forced"];

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReproduceArgs {
    /// planar | mixed3d | shaw_pierre_unforced | shaw_pierre_forced
    pub example: String,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    /// Attainable substitute when the published tolerance cannot be met.
    pub fallback: Option<bool>,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail, fallback: None }
    }

    fn accepted(&self) -> bool {
        self.pass || self.fallback == Some(true)
    }
}

pub fn run(args: ReproduceArgs) -> CliResult<Status> {
    if !EXAMPLES.contains(&args.example.as_str()) {
        return Err(CliError::input(format!("unknown example '{}'; expected one of {}", args.example, EXAMPLES.join(", "))));
    }
    let mut out = OutputDir::create(&args.out)?;
    let checks = match args.example.as_str() {
        "planar" => planar_example(&mut out)?,
        "mixed3d" => mixed3d_example(&mut out)?,
        "shaw_pierre_unforced" => unforced_example(&mut out)?,
        _ => forced_example(&mut out)?,
    };
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            let fb = c.fallback.map_or(String::new(), |f| f.to_string());
            vec![c.name.to_string(), c.pass.to_string(), fb, format!("\"{}\"", c.detail.replace('"', "'"))]
        })
        .collect();
    out.write_csv("checks.csv", &["check", "pass", "fallback", "detail"], &rows)?;
    out.write_json("checks.json", &checks)?;
    out.finish("reproduce", &args)?;
    for c in &checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {}: {}", c.name, c.detail);
        if !c.pass && c.fallback == Some(true) {
            println!("       published tolerance unattainable; attainable property holds");
        }
    }
    Ok(if checks.iter().all(Check::accepted) { Status::Ok } else { Status::AcceptanceFailed })
}

fn traj_bytes(t: &Trajectory) -> CliResult<Vec<u8>> {
    Ok(t.to_csv_string()?.into_bytes())
}

fn grid(t1: f64, dt: f64) -> Vec<f64> {
    (0..=((t1 / dt).round() as usize)).map(|i| i as f64 * dt).collect()
}

fn integrate_grid(sys: &FlowSystem, x0: &[f64], t1: f64, dt: f64) -> CliResult<Trajectory> {
    let opts = IntegrateOptions { tol: 1e-11, t_eval: Some(grid(t1, dt)), ..Default::default() };
    Ok(integrate_with(sys, x0, (0.0, t1), &opts)?)
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let (mx, my) = (logs.iter().map(|p| p.0).sum::<f64>() / n, logs.iter().map(|p| p.1).sum::<f64>() / n);
    logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

fn planar_example(out: &mut OutputDir) -> CliResult<Vec<Check>> {
    let (a, b, c) = (1.0, 1.0, 2.5);
    let dt = 0.05;
    let sys = planar(a, b, c)?;
    // leave the saddle along its unstable direction towards the origin
    let e = eig(&sys.jacobian(0.0, &[a, b]))?;
    let iu = (0..2).max_by(|&i, &j| e.values[i].re.total_cmp(&e.values[j].re)).unwrap_or(0);
    let mut v = [e.vectors[(0, iu)].re, e.vectors[(1, iu)].re];
    if v[0] > 0.0 {
        v = [-v[0], -v[1]];
    }
    let train = integrate_grid(&sys, &[a + 1e-3 * v[0], b + 1e-3 * v[1]], 25.0, dt)?;
    out.write("train.csv", &traj_bytes(&train)?)?;

    let spec = SpectralPartition::new(Kind::Flow, vec![-b], vec![], vec![-a * c], vec![])?;
    let opts = DictOptions { branch: Branch::PositiveOnly, ..Default::default() };
    let frac_dict = prune_near_integer(&dictionary_flow_1d_with(&spec, 5, &opts)?, NEAR_INTEGER_TOL);
    let int_dict = dictionary_integer(1, 5, Kind::Flow, true);
    let fit = |d: &Dictionary| -> CliResult<(GraphFit, ReducedFit)> {
        let graph = fit_graph(std::slice::from_ref(&train), d, &[0], &[1], 0.0)?;
        let red = fit_reduced_flow(&[train.project(&[0])?], d, DerivativeScheme::Central4, 0.0)?;
        Ok((graph, red))
    };
    let (frac, int) = (fit(&frac_dict)?, fit(&int_dict)?);
    out.write("model_fractional.json", format!("{}\n", frac.1.to_json()?).as_bytes())?;
    out.write("model_integer.json", format!("{}\n", int.1.to_json()?).as_bytes())?;

    // baselines: one-step DMD on the full state, POD line through the data
    let dmd = dmd_fit(&Trajectory::from_iterates(train.states().to_vec())?)?;
    let cov = DMatrix::from_fn(2, 2, |i, j| train.states().iter().map(|x| x[i] * x[j]).sum::<f64>());
    let se = SymmetricEigen::new(cov);
    let lead = se.eigenvalues.imax();
    let slope = se.eigenvectors[(1, lead)] / se.eigenvectors[(0, lead)];
    let pod = pod_reduced_model_planar(a, b, c, slope)?;
    let pod_sys = FlowSystem::new("pod", 1, move |_, x, o| o[0] = pod.rhs(x[0]));

    let k = IntegrationConstant::ThroughSaddle;
    let mut rows = Vec::new();
    let (mut frac_errs, mut int_errs) = (Vec::new(), Vec::new());
    for (i, x0) in [0.3, 0.5, 0.7, 0.85, 0.95].into_iter().enumerate() {
        let y0 = exact_graph_planar(a, b, c, k, x0)? * 1.02;
        let truth = integrate_grid(&sys, &[x0, y0], 15.0, dt)?;
        out.write(&format!("test_{i}.csv"), &traj_bytes(&truth)?)?;
        let mut errs = Vec::new();
        for (graph, red) in [&frac, &int] {
            let p = predict(red, &[x0], Horizon::Times(truth.times().to_vec()))?;
            errs.push(relative_error(&truth, &p.trajectory.map_states(|u| graph.lift(u))?)?.mean);
        }
        let d = dmd_predict(&dmd, &[x0, y0], truth.len() - 1)?;
        errs.push(relative_error(&truth, &d)?.mean);
        let p = integrate_grid(&pod_sys, &[x0], 15.0, dt)?.map_states(|u| vec![u[0], slope * u[0]])?;
        errs.push(relative_error(&truth, &p)?.mean);
        frac_errs.push(errs[0]);
        int_errs.push(errs[1]);
        rows.push(std::iter::once(num(x0)).chain(errs.iter().map(|e| num(*e))).collect());
    }
    out.write_csv("errors.csv", &["x0", "fractional", "integer", "dmd", "pod"], &rows)?;

    let xmax = train.component(0).into_iter().fold(0.0, f64::max);
    let mut curve = Vec::new();
    let (mut num_err, mut den) = (0.0f64, 0.0f64);
    for i in 1..=400 {
        let x = xmax * i as f64 / 400.0;
        let exact = exact_reduced_planar(a, b, c, k, x)?;
        let fr = frac.1.eval(&[x])[0];
        num_err = num_err.max((fr - exact).abs());
        den = den.max(exact.abs());
        curve.push(vec![
            num(x),
            num(exact_graph_planar(a, b, c, k, x)?),
            num(frac.0.eval(&[x])[0]),
            num(int.0.eval(&[x])[0]),
            num(exact),
            num(fr),
            num(int.1.eval(&[x])[0]),
        ]);
    }
    out.write_csv(
        "graph_and_field.csv",
        &["x", "graph_exact", "graph_fractional", "graph_integer", "field_exact", "field_fractional", "field_integer"],
        &curve,
    )?;

    let fmt = |v: &[f64]| v.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(" ");
    let vf = num_err / den;
    let frac_max = frac_errs.iter().cloned().fold(0.0, f64::max);
    Ok(vec![
        Check::new(
            "fractional beats integer on every test trajectory",
            frac_errs.iter().zip(&int_errs).all(|(f, i)| f <= i),
            format!("fractional [{}] vs integer [{}]", fmt(&frac_errs), fmt(&int_errs)),
        ),
        Check::new("fractional error within 5%", frac_max <= 0.05, format!("largest mean relative error {frac_max:.2e}")),
        Check::new("vector field matches the exact reduced model", vf < 1e-2, format!("relative error {vf:.2e} on the training range")),
    ])
}

fn mixed3d_example(out: &mut OutputDir) -> CliResult<Vec<Check>> {
    let (k, a, c) = (FRAC_1_SQRT_2, 0.5, 0.2);
    let sys = mixed3d(k, a, c)?;
    let mut data = Vec::new();
    for (i, (x1, x2)) in [(0.2, 0.3), (-1.6, 0.2)].into_iter().enumerate() {
        let t = integrate_grid(&sys, &[x1, x2, a * x1 * x1], 40.0, 0.05)?;
        out.write(&format!("train_{i}.csv"), &traj_bytes(&t)?)?;
        data.push(t);
    }
    let dict = dictionary_integer(2, 3, Kind::Flow, true);
    let g = fit_graph(&data, &dict, &[0, 1], &[2], 0.0)?;
    let mut x1sq = f64::NAN;
    let mut other = 0.0f64;
    let mut rows = Vec::new();
    for ((m, label), v) in dict.active().zip(dict.column_labels()).zip(&g.coefficients[0]) {
        if m.multi_index.k1 == [2, 0] {
            x1sq = *v;
        } else {
            other = other.max(v.abs());
        }
        rows.push(vec![label, num(*v)]);
    }
    out.write_csv("graph_coefficients.csv", &["term", "coefficient"], &rows)?;
    Ok(vec![
        Check::new("x1² coefficient recovers a", (x1sq - a).abs() < 1e-3, format!("{x1sq:.8} (a = {a})")),
        Check::new("other coefficients vanish", other < 1e-3, format!("largest |coefficient| {other:.1e}")),
    ])
}

fn unforced_example(out: &mut OutputDir) -> CliResult<Vec<Check>> {
    let params = ShawPierreParams::default();
    let sys = shaw_pierre(params)?;
    let a = sys.jacobian(0.0, &[0.0; 4]);
    let eigs = eig(&a)?.values;
    let spec = partition_spectrum(&a, slowest_selector(&eigs, 2, Kind::Flow), Kind::Flow)?;
    out.write("spectrum.json", format!("{}\n", spec.to_json()?).as_bytes())?;
    let [al, om] = spec.alpha_omega[0];
    let [be, nu] = spec.beta_nu[0];
    let eig_dev = max_abs([
        al - SHAW_PIERRE_MASTER[0],
        om - SHAW_PIERRE_MASTER[1],
        be - SHAW_PIERRE_SLAVED[0],
        nu - SHAW_PIERRE_SLAVED[1],
    ]);
    let ratio = be / al;
    let printed = SHAW_PIERRE_SLAVED[0] / SHAW_PIERRE_MASTER[0];

    let poly = shaw_pierre_poly_system(params)?;
    let t = linearize(&poly, 7)?;
    out.write("linearizing_transform.json", format!("{}\n", t.to_json()?).as_bytes())?;
    let residual = t.conjugacy_residual(&poly);
    let pspec = poly.spec.clone().ok_or_else(|| CliError::input("modal system lacks its partition"))?;
    let coeffs = LinearGraphCoeffs::zeros(&pspec);
    let mut pts = Vec::new();
    for i in 0..=4 {
        let rho = 0.04 * 10f64.powf(i as f64 / 4.0);
        let mut worst = 0.0f64;
        for s in 0..6 {
            let z = [Complex64::from_polar(rho, s as f64 * 0.5)];
            worst = worst.max(invariance_residual(&sys, &t, &pspec, &coeffs, (&[], &z), 0.5, 1e-12)?);
        }
        pts.push((rho, worst));
    }
    out.write_csv("invariance_residual.csv", &["amplitude", "residual"], &pts.iter().map(|(r, w)| vec![num(*r), num(*w)]).collect::<Vec<_>>())?;
    let slope = loglog_slope(&pts);

    let mut ratio_check = Check::new(
        "slaved/master decay ratio",
        (ratio - 5.0729).abs() <= 1e-3,
        format!("β/α = {ratio:.5}; published 5.0729 is the quotient {printed:.5} of the rounded eigenvalues"),
    );
    ratio_check.fallback = Some((printed - 5.0729).abs() <= 1e-3 && (ratio - 5.0729).abs() <= 5e-3);
    Ok(vec![
        Check::new(
            "eigenvalues at the origin",
            eig_dev <= 1e-3,
            format!("{al:.5}±{om:.5}i, {be:.5}±{nu:.5}i, max deviation {eig_dev:.1e}"),
        ),
        ratio_check,
        Check::new("order-7 conjugacy residual", residual < 1e-8, format!("{residual:.1e}")),
        Check::new("invariance residual slope", slope >= 7.5, format!("log-log slope {slope:.2} over amplitude 0.04–0.4")),
    ])
}

struct Orbit {
    location: Vec<f64>,
    multipliers: Vec<Complex64>,
    determinant: f64,
}

fn forced_example(out: &mut OutputDir) -> CliResult<Vec<Check>> {
    let params = ShawPierreParams::forced();
    let sys = shaw_pierre(params)?;
    let period = params.period();
    let seeds = shaw_pierre_forced_seeds();
    let solve = |seed: &[f64; 4]| -> ssmfrac::Result<Orbit> {
        let fp = newton_fixed_point(|x| poincare_map(&sys, x, 1e-12), seed, NewtonOptions { tol: 1e-10, ..Default::default() })?;
        let fl = floquet(&sys, &fp.location, period, 1e-12)?;
        Ok(Orbit { location: fp.location, multipliers: fl.multipliers, determinant: fl.determinant })
    };
    let per = seeds.len().div_ceil(thread_budget().min(seeds.len()));
    let found: Vec<ssmfrac::Result<Orbit>> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds.chunks(per).map(|chunk| s.spawn(|| chunk.iter().map(solve).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut orbits: Vec<Orbit> = Vec::new();
    for o in found {
        let o = o?;
        if !orbits.iter().any(|p| max_abs(p.location.iter().zip(&o.location).map(|(a, b)| a - b)) < 1e-6) {
            orbits.push(o);
        }
    }

    let expected = (params.trace() * period).exp();
    let mut fp_rows = Vec::new();
    let mut fl_rows = Vec::new();
    for (i, o) in orbits.iter().enumerate() {
        let rmax = o.multipliers.iter().map(|m| m.norm()).fold(0.0, f64::max);
        fp_rows.push([vec![i.to_string()], o.location.iter().map(|x| num(*x)).collect(), vec![num(rmax), num(o.determinant)]].concat());
        for (j, m) in o.multipliers.iter().enumerate() {
            fl_rows.push(vec![i.to_string(), j.to_string(), num(m.re), num(m.im), num(m.norm())]);
        }
    }
    out.write_csv("fixed_points.csv", &["orbit", "q1", "p1", "q2", "p2", "max_modulus", "determinant"], &fp_rows)?;
    out.write_csv("floquet.csv", &["orbit", "index", "re", "im", "modulus"], &fl_rows)?;

    let stable = orbits.iter().filter(|o| o.multipliers.iter().all(|m| m.norm() < 1.0)).count();
    let structure = orbits.len() == 3 && stable == 2;
    let liouville = orbits.iter().map(|o| ((o.determinant - expected) / expected).abs()).fold(0.0, f64::max);
    let saddle = orbits.iter().find(|o| o.multipliers.iter().any(|m| m.norm() > 1.0));
    let want = SHAW_PIERRE_SADDLE;
    let published_product = want[0] * want[1] * (want[2] * want[2] + want[3] * want[3]);
    let (dev, detail) = match saddle {
        Some(o) => {
            let mut real: Vec<f64> = o.multipliers.iter().filter(|m| m.im.abs() < 1e-9).map(|m| m.re).collect();
            real.sort_by(|a, b| b.total_cmp(a));
            let cpx = o.multipliers.iter().find(|m| m.im > 1e-9).copied().unwrap_or_default();
            let dev = if real.len() == 2 {
                max_abs([real[0] - want[0], real[1] - want[1], cpx.re - want[2], cpx.im - want[3]])
            } else {
                f64::INFINITY
            };
            let shown: Vec<String> = real.iter().map(|r| format!("{r:.4}")).collect();
            (dev, format!("{}, {:.4}±{:.4}i, max deviation {dev:.3}", shown.join(", "), cpx.re, cpx.im))
        }
        None => (f64::INFINITY, "no saddle found".to_string()),
    };
    let mut saddle_check = Check::new(
        "saddle multipliers match published values",
        dev <= 2e-2,
        format!("{detail}; published product {published_product:.4} vs e^(-3cT) = {expected:.4}"),
    );
    saddle_check.fallback = Some(structure && liouville <= 1e-6 && (published_product - expected).abs() > 2e-2);
    Ok(vec![
        Check::new("three coexisting periodic orbits", orbits.len() == 3, format!("{} distinct fixed points", orbits.len())),
        Check::new("two orbits stable", stable == 2, format!("{stable} with all multipliers inside the unit circle")),
        saddle_check,
        Check::new("Liouville identity", liouville <= 1e-6, format!("largest relative defect {liouville:.1e}")),
    ])
}
