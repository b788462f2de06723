//! Least-squares identification of SSM graphs and reduced dynamics over a
//! dictionary, prediction, error metrics, and the DMD/POD baselines.
//!
//! Real dictionaries are solved as ordinary least squares with one real
//! coefficient per design column. Two-dimensional dictionaries list every
//! complex monomial together with its conjugate, so they are solved as complex
//! least squares: each monomial carries one complex coefficient, stored as the
//! (Re, Im) pair in the slots of its two design columns.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, Shape};
use crate::dynamics::{integrate_with, FlowSystem, IntegrateOptions};
use crate::error::{Error, Result};
use crate::linalg::{cond2, lstsq_colpiv};
use crate::spectrum::Kind;
use crate::trajectory::Trajectory;

/// Condition number of the scaled design matrix above which an
/// unregularized fit is rejected.
pub const RANK_COND: f64 = 1e12;
pub const TRUST_FACTOR: f64 = 1.2;
pub const DIVERGENCE_NORM: f64 = 1e6;
/// Relative size of the estimated derivative error tolerated by flow fits.
pub const DERIVATIVE_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// RMS training residual per output channel.
    pub residual: Vec<f64>,
    /// Condition number of the column-scaled design matrix.
    pub cond: Option<f64>,
    pub samples: usize,
    pub ridge: f64,
    /// Design columns that vanish on the data; their coefficients are zero.
    pub unused_columns: Vec<String>,
    /// Largest master-coordinate norm seen in training; `None` for models
    /// not obtained by regression.
    pub max_amplitude: Option<f64>,
    /// Estimated relative error of finite-difference derivatives (flow fits).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_error: Option<f64>,
}

fn is_complex(dict: &Dictionary) -> bool {
    dict.shape == Shape::TwoD
}

/// Value of each channel at a design row.
fn combine(dict: &Dictionary, coefficients: &[Vec<f64>], row: &[f64]) -> Vec<Complex64> {
    coefficients
        .iter()
        .map(|c| {
            if is_complex(dict) {
                row.chunks(2)
                    .zip(c.chunks(2))
                    .map(|(v, k)| Complex64::new(v[0], v[1]) * Complex64::new(k[0], k[1]))
                    .sum()
            } else {
                Complex64::new(row.iter().zip(c).map(|(a, b)| a * b).sum(), 0.0)
            }
        })
        .collect()
}

/// SSM graph `slaved ≈ h(master)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFit {
    pub dictionary: Dictionary,
    /// `coefficients[channel][column]`.
    pub coefficients: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
    pub master: Vec<usize>,
    pub slaved: Vec<usize>,
}

impl GraphFit {
    /// Slaved coordinates at a master point.
    pub fn eval(&self, master: &[f64]) -> Vec<f64> {
        combine(&self.dictionary, &self.coefficients, &self.dictionary.eval(master)).iter().map(|v| v.re).collect()
    }

    /// Full state with master and slaved coordinates in their original slots.
    pub fn lift(&self, master: &[f64]) -> Vec<f64> {
        let n = self.master.len() + self.slaved.len();
        let mut x = vec![0.0; n];
        for (&i, &v) in self.master.iter().zip(master) {
            x[i] = v;
        }
        for (&i, v) in self.slaved.iter().zip(self.eval(master)) {
            x[i] = v;
        }
        x
    }

    /// Coefficients keyed by column label (complex ones as `re+im·i`).
    pub fn labelled(&self, channel: usize) -> Vec<(String, f64)> {
        self.dictionary.column_labels().into_iter().zip(self.coefficients[channel].iter().copied()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Reduced dynamics in the master coordinates: the next iterate (maps) or the
/// vector field (flows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedFit {
    pub dictionary: Dictionary,
    pub kind: Kind,
    pub coefficients: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

impl ReducedFit {
    /// Build a model from known coefficients.
    pub fn from_coefficients(dictionary: Dictionary, kind: Kind, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        let channels = if is_complex(&dictionary) { 1 } else { dictionary.input_dim() };
        if coefficients.len() != channels {
            return Err(Error::LengthMismatch(coefficients.len(), channels));
        }
        if let Some(c) = coefficients.iter().find(|c| c.len() != dictionary.n_columns()) {
            return Err(Error::LengthMismatch(c.len(), dictionary.n_columns()));
        }
        let diagnostics = Diagnostics {
            residual: vec![0.0; channels],
            cond: None,
            samples: 0,
            ridge: 0.0,
            unused_columns: Vec::new(),
            max_amplitude: None,
            derivative_error: None,
        };
        Ok(Self { dictionary, kind, coefficients, diagnostics })
    }

    pub fn dim(&self) -> usize {
        self.dictionary.input_dim()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let v = combine(&self.dictionary, &self.coefficients, &self.dictionary.eval(x));
        if is_complex(&self.dictionary) {
            vec![v[0].re, v[0].im]
        } else {
            v.iter().map(|c| c.re).collect()
        }
    }

    /// Complex coefficients of a two-dimensional model, one per monomial.
    pub fn complex_coefficients(&self) -> Option<Vec<Complex64>> {
        is_complex(&self.dictionary)
            .then(|| self.coefficients[0].chunks(2).map(|k| Complex64::new(k[0], k[1])).collect())
    }

    pub fn trust_radius(&self, factor: f64) -> f64 {
        self.diagnostics.max_amplitude.map_or(f64::INFINITY, |a| a * factor)
    }

    /// The fitted vector field as an autonomous system (flow models).
    pub fn to_flow_system(&self) -> FlowSystem {
        let me = self.clone();
        FlowSystem::new("reduced", self.dim(), move |_, x, o| o.copy_from_slice(&me.eval(x)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Regression inputs: master points and (real or complex) targets.
struct Samples {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<Complex64>>,
}

struct Solution {
    coefficients: Vec<Vec<f64>>,
    residual: Vec<f64>,
    cond: f64,
    unused: Vec<String>,
}

fn solve(dict: &Dictionary, s: &Samples, ridge: f64) -> Result<Solution> {
    if !(ridge >= 0.0) {
        return Err(Error::BadParams(format!("ridge must be nonnegative, got {ridge}")));
    }
    let ncol = dict.n_columns();
    let nchan = s.targets.first().map_or(0, Vec::len);
    let complex = is_complex(dict);
    let per_sample = if complex { 2 } else { 1 };
    let rows = s.inputs.len() * per_sample;
    let unknowns = if complex { ncol / 2 } else { ncol };
    if s.inputs.len() < unknowns || ncol == 0 {
        return Err(Error::InsufficientData { samples: s.inputs.len(), unknowns });
    }
    let mut a = DMatrix::zeros(rows, ncol);
    let mut b = DMatrix::zeros(rows, nchan);
    for (i, (x, t)) in s.inputs.iter().zip(&s.targets).enumerate() {
        let row = dict.eval(x);
        if complex {
            for j in (0..ncol).step_by(2) {
                let (re, im) = (row[j], row[j + 1]);
                a[(2 * i, j)] = re;
                a[(2 * i, j + 1)] = -im;
                a[(2 * i + 1, j)] = im;
                a[(2 * i + 1, j + 1)] = re;
            }
            for (c, w) in t.iter().enumerate() {
                b[(2 * i, c)] = w.re;
                b[(2 * i + 1, c)] = w.im;
            }
        } else {
            for (j, v) in row.iter().enumerate() {
                a[(i, j)] = *v;
            }
            for (c, w) in t.iter().enumerate() {
                b[(i, c)] = w.re;
            }
        }
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::DomainError("non-finite value in the design matrix or targets".into()));
    }
    let labels = dict.column_labels();
    let scale: Vec<f64> = (0..ncol).map(|j| (a.column(j).norm_squared() / rows as f64).sqrt()).collect();
    let used: Vec<usize> = (0..ncol).filter(|&j| scale[j] > 0.0).collect();
    let unused: Vec<String> = (0..ncol).filter(|&j| scale[j] == 0.0).map(|j| labels[j].clone()).collect();
    let mut scaled = DMatrix::zeros(rows, used.len());
    for (k, &j) in used.iter().enumerate() {
        scaled.set_column(k, &(a.column(j) / scale[j]));
    }
    let cond = cond2(&scaled);
    if ridge == 0.0 && !(cond <= RANK_COND) {
        return Err(Error::RankDeficient { cond });
    }
    let sol = if ridge > 0.0 {
        let nu = used.len();
        let mut aug = DMatrix::zeros(rows + nu, nu);
        aug.view_mut((0, 0), (rows, nu)).copy_from(&scaled);
        for (k, &j) in used.iter().enumerate() {
            aug[(rows + k, k)] = ridge.sqrt() / scale[j];
        }
        let mut baug = DMatrix::zeros(rows + nu, nchan);
        baug.view_mut((0, 0), (rows, nchan)).copy_from(&b);
        lstsq_colpiv(&aug, &baug)
    } else {
        lstsq_colpiv(&scaled, &b)
    };
    let mut coefficients = vec![vec![0.0; ncol]; nchan];
    for (k, &j) in used.iter().enumerate() {
        for (c, coef) in coefficients.iter_mut().enumerate() {
            coef[j] = sol[(k, c)] / scale[j];
        }
    }
    let mut sq = vec![0.0; nchan];
    for (x, t) in s.inputs.iter().zip(&s.targets) {
        let pred = combine(dict, &coefficients, &dict.eval(x));
        for c in 0..nchan {
            let d = if complex { t[c] - pred[c] } else { Complex64::new(t[c].re - pred[c].re, 0.0) };
            sq[c] += d.norm_sqr();
        }
    }
    let residual = sq.iter().map(|v| (v / s.inputs.len() as f64).sqrt()).collect();
    Ok(Solution { coefficients, residual, cond, unused })
}

fn check_input_dim(dict: &Dictionary, dim: usize) -> Result<()> {
    if dict.input_dim() != dim {
        return Err(Error::WrongShape(format!(
            "dictionary expects {} master coordinates, data provides {}",
            dict.input_dim(),
            dim
        )));
    }
    Ok(())
}

fn diagnostics(sol: &Solution, samples: &Samples, ridge: f64) -> Diagnostics {
    Diagnostics {
        residual: sol.residual.clone(),
        cond: Some(sol.cond),
        samples: samples.inputs.len(),
        ridge,
        unused_columns: sol.unused.clone(),
        max_amplitude: Some(samples.inputs.iter().map(|x| norm(x)).fold(0.0, f64::max)),
        derivative_error: None,
    }
}

/// Fit `x[slaved] ≈ h(x[master])` over all samples of all trajectories.
pub fn fit_graph(data: &[Trajectory], dict: &Dictionary, master: &[usize], slaved: &[usize], ridge: f64) -> Result<GraphFit> {
    if master.iter().any(|m| slaved.contains(m)) {
        return Err(Error::BadParams("master and slaved coordinates overlap".into()));
    }
    check_input_dim(dict, master.len())?;
    let dim = master.len() + slaved.len();
    let mut samples = Samples { inputs: Vec::new(), targets: Vec::new() };
    for tr in data {
        if tr.dim() < dim || master.iter().chain(slaved).any(|&i| i >= tr.dim()) {
            return Err(Error::WrongShape(format!("trajectory of dimension {} lacks requested coordinates", tr.dim())));
        }
        for x in tr.states() {
            samples.inputs.push(master.iter().map(|&i| x[i]).collect());
            samples.targets.push(slaved.iter().map(|&i| Complex64::new(x[i], 0.0)).collect());
        }
    }
    let sol = solve(dict, &samples, ridge)?;
    Ok(GraphFit {
        dictionary: dict.clone(),
        diagnostics: diagnostics(&sol, &samples, ridge),
        coefficients: sol.coefficients,
        master: master.to_vec(),
        slaved: slaved.to_vec(),
    })
}

fn as_target(dict: &Dictionary, x: &[f64]) -> Vec<Complex64> {
    if is_complex(dict) {
        vec![Complex64::new(x[0], x[1])]
    } else {
        x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }
}

/// Regress the next sample on the dictionary evaluated at the current one.
pub fn fit_reduced_map(series: &[Trajectory], dict: &Dictionary, ridge: f64) -> Result<ReducedFit> {
    let mut samples = Samples { inputs: Vec::new(), targets: Vec::new() };
    for tr in series {
        if tr.kind != Kind::Map {
            return Err(Error::WrongShape("reduced-map fits need iteration-indexed series".into()));
        }
        check_input_dim(dict, tr.dim())?;
        for w in tr.states().windows(2) {
            samples.inputs.push(w[0].clone());
            samples.targets.push(as_target(dict, &w[1]));
        }
    }
    let sol = solve(dict, &samples, ridge)?;
    Ok(ReducedFit {
        dictionary: dict.clone(),
        kind: Kind::Map,
        diagnostics: diagnostics(&sol, &samples, ridge),
        coefficients: sol.coefficients,
    })
}

/// How flow fits obtain the time derivative of the samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    /// Fourth-order central differences on a uniform grid; two samples are
    /// dropped at each end.
    #[default]
    Central4,
    /// Derivatives stored with the trajectory.
    Recorded,
}

fn central4(x: &[Vec<f64>], i: usize, h: f64) -> Vec<f64> {
    (0..x[i].len()).map(|c| (-x[i + 2][c] + 8.0 * x[i + 1][c] - 8.0 * x[i - 1][c] + x[i - 2][c]) / (12.0 * h)).collect()
}

fn central6(x: &[Vec<f64>], i: usize, h: f64) -> Vec<f64> {
    (0..x[i].len())
        .map(|c| {
            (x[i + 3][c] - 9.0 * x[i + 2][c] + 45.0 * x[i + 1][c] - 45.0 * x[i - 1][c] + 9.0 * x[i - 2][c] - x[i - 3][c])
                / (60.0 * h)
        })
        .collect()
}

/// Regress the time derivative on the dictionary.
pub fn fit_reduced_flow(data: &[Trajectory], dict: &Dictionary, scheme: DerivativeScheme, ridge: f64) -> Result<ReducedFit> {
    let mut samples = Samples { inputs: Vec::new(), targets: Vec::new() };
    let (mut err_sq, mut deriv_sq) = (0.0, 0.0);
    for tr in data {
        if tr.kind != Kind::Flow {
            return Err(Error::WrongShape("reduced-flow fits need time-indexed trajectories".into()));
        }
        check_input_dim(dict, tr.dim())?;
        let x = tr.states();
        match scheme {
            DerivativeScheme::Recorded => {
                let d = tr.derivatives().ok_or_else(|| Error::BadParams("trajectory carries no derivatives".into()))?;
                for (xi, di) in x.iter().zip(d) {
                    samples.inputs.push(xi.clone());
                    samples.targets.push(as_target(dict, di));
                }
            }
            DerivativeScheme::Central4 => {
                let h = tr
                    .uniform_step()
                    .ok_or_else(|| Error::BadParams("finite differences need uniform sampling".into()))?;
                if x.len() < 5 {
                    return Err(Error::InsufficientData { samples: x.len(), unknowns: 5 });
                }
                for i in 2..x.len() - 2 {
                    let d = central4(x, i, h);
                    if i >= 3 && i + 3 < x.len() {
                        let d6 = central6(x, i, h);
                        err_sq += d.iter().zip(&d6).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                        deriv_sq += d.iter().map(|a| a * a).sum::<f64>();
                    }
                    samples.inputs.push(x[i].clone());
                    samples.targets.push(as_target(dict, &d));
                }
            }
        }
    }
    let sol = solve(dict, &samples, ridge)?;
    let mut diag = diagnostics(&sol, &samples, ridge);
    if scheme == DerivativeScheme::Central4 && deriv_sq > 0.0 {
        let rel = (err_sq / deriv_sq).sqrt();
        diag.derivative_error = Some(rel);
        let n = samples.inputs.len() as f64;
        let bound = (err_sq / n).sqrt();
        let residual = diag.residual.iter().cloned().fold(0.0, f64::max);
        if rel > DERIVATIVE_REL_TOL && bound > residual {
            return Err(Error::StepTooCoarse { bound, residual });
        }
    }
    Ok(ReducedFit { dictionary: dict.clone(), kind: Kind::Flow, diagnostics: diag, coefficients: sol.coefficients })
}

/// Prediction length: iterations for maps, output times for flows.
#[derive(Debug, Clone, PartialEq)]
pub enum Horizon {
    Steps(usize),
    Times(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub trajectory: Trajectory,
    /// First sample outside the trust region, if any.
    pub exit_index: Option<usize>,
}

impl Prediction {
    pub fn left_trust_region(&self) -> bool {
        self.exit_index.is_some()
    }
}

pub fn predict(model: &ReducedFit, ic: &[f64], horizon: Horizon) -> Result<Prediction> {
    predict_with(model, ic, horizon, TRUST_FACTOR, 1e-10)
}

/// Iterate or integrate a reduced model; `tol` is the integrator tolerance.
pub fn predict_with(model: &ReducedFit, ic: &[f64], horizon: Horizon, trust_factor: f64, tol: f64) -> Result<Prediction> {
    if ic.len() != model.dim() {
        return Err(Error::WrongShape(format!("initial condition has {} entries, model {}", ic.len(), model.dim())));
    }
    let radius = model.trust_radius(trust_factor);
    if norm(ic) > radius {
        return Err(Error::OutOfRadius { amplitude: norm(ic), radius });
    }
    let trajectory = match (model.kind, horizon) {
        (Kind::Map, Horizon::Steps(n)) => {
            let mut states = Vec::with_capacity(n + 1);
            states.push(ic.to_vec());
            for step in 1..=n {
                let next = model.eval(&states[step - 1]);
                let nn = norm(&next);
                if !(nn <= DIVERGENCE_NORM) {
                    return Err(Error::Diverged { step, norm: nn });
                }
                states.push(next);
            }
            Trajectory::from_iterates(states)?
        }
        (Kind::Flow, Horizon::Times(times)) => {
            let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else {
                return Err(Error::BadParams("empty prediction horizon".into()));
            };
            if t1 <= t0 {
                let trajectory = Trajectory::new(Kind::Flow, vec![t0], vec![ic.to_vec()])?;
                return Ok(Prediction { trajectory, exit_index: None });
            }
            let cap = model.clone();
            let sys = FlowSystem::new("reduced", model.dim(), move |_, x, o| {
                let v = cap.eval(x);
                // stop growth once the divergence threshold is crossed
                let stop = norm(x) > DIVERGENCE_NORM;
                for (oi, vi) in o.iter_mut().zip(v) {
                    *oi = if stop { 0.0 } else { vi };
                }
            });
            let opts = IntegrateOptions { tol, t_eval: Some(times), ..Default::default() };
            let tr = integrate_with(&sys, ic, (t0, t1), &opts)
                .map_err(|_| Error::Diverged { step: 0, norm: f64::INFINITY })?;
            if let Some((step, x)) = tr.states().iter().enumerate().find(|(_, x)| !(norm(x) <= DIVERGENCE_NORM)) {
                return Err(Error::Diverged { step, norm: norm(x) });
            }
            tr
        }
        (Kind::Map, Horizon::Times(_)) => return Err(Error::BadParams("map models take a step count".into())),
        (Kind::Flow, Horizon::Steps(_)) => return Err(Error::BadParams("flow models take output times".into())),
    };
    let exit_index = trajectory.states().iter().position(|x| norm(x) > radius);
    Ok(Prediction { trajectory, exit_index })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeError {
    pub per_step: Vec<f64>,
    pub mean: f64,
}

/// `‖x_true(ı) − x_pred(ı)‖ / max_ı ‖x_true(ı)‖`.
pub fn relative_error(truth: &Trajectory, pred: &Trajectory) -> Result<RelativeError> {
    if truth.len() != pred.len() {
        return Err(Error::LengthMismatch(truth.len(), pred.len()));
    }
    if truth.dim() != pred.dim() {
        return Err(Error::WrongShape(format!("dimensions {} and {} differ", truth.dim(), pred.dim())));
    }
    let max = truth.states().iter().map(|x| norm(x)).fold(0.0, f64::max);
    let denom = if max > 0.0 { max } else { 1.0 };
    let per_step: Vec<f64> = truth
        .states()
        .iter()
        .zip(pred.states())
        .map(|(a, b)| norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()) / denom)
        .collect();
    let mean = if per_step.is_empty() { 0.0 } else { per_step.iter().sum::<f64>() / per_step.len() as f64 };
    Ok(RelativeError { per_step, mean })
}

/// Least-squares one-step propagator `x(ı+1) ≈ A·x(ı)`.
pub fn dmd_fit(snapshots: &Trajectory) -> Result<DMatrix<f64>> {
    let n = snapshots.dim();
    let m = snapshots.len().saturating_sub(1);
    if m < n || n == 0 {
        return Err(Error::InsufficientData { samples: snapshots.len(), unknowns: n + 1 });
    }
    let x = DMatrix::from_fn(m, n, |i, j| snapshots.state(i)[j]);
    let y = DMatrix::from_fn(m, n, |i, j| snapshots.state(i + 1)[j]);
    let cond = cond2(&x);
    if !(cond <= RANK_COND) {
        return Err(Error::RankDeficient { cond });
    }
    Ok(lstsq_colpiv(&x, &y).transpose())
}

/// Iterate a linear propagator.
pub fn dmd_predict(a: &DMatrix<f64>, ic: &[f64], steps: usize) -> Result<Trajectory> {
    let mut states = vec![ic.to_vec()];
    let mut x = nalgebra::DVector::from_column_slice(ic);
    for _ in 0..steps {
        x = a * x;
        states.push(x.iter().copied().collect());
    }
    Trajectory::from_iterates(states)
}

/// POD-projected planar model `ẋ = g·x·(x − x*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PodModel {
    /// `(K + cK²)/(1 + K²)`.
    pub gain: f64,
    /// `(b + cK²a)/(K + cK²)`.
    pub fixed_point: f64,
    pub slope: f64,
}

impl PodModel {
    pub fn rhs(&self, x: f64) -> f64 {
        self.gain * x * (x - self.fixed_point)
    }

    /// Coefficients `(c₁, c₂)` of `ẋ = c₁x + c₂x²`.
    pub fn coefficients(&self) -> (f64, f64) {
        (-self.gain * self.fixed_point, self.gain)
    }
}

/// Projection of the planar testbed onto the line `y = Kx`.
pub fn pod_reduced_model_planar(a: f64, b: f64, c: f64, k: f64) -> Result<PodModel> {
    let denom = k + c * k * k;
    if k == 0.0 || denom == 0.0 {
        return Err(Error::BadParams(format!("degenerate POD slope K={k}")));
    }
    Ok(PodModel { gain: denom / (1.0 + k * k), fixed_point: (b + c * k * k * a) / denom, slope: k })
}
