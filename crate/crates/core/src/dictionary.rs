//! Fractional-power function libraries for SSM graphs and reduced dynamics,
//! and the invariant graph families 𝒱, ℰ of the linearized system.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{Kind, SpectralPartition};

/// Slack added to the truncation order when deciding membership.
pub const ORDER_TOL: f64 = 1e-9;
/// Default distance-to-integer threshold for near-integer flagging and pruning.
pub const NEAR_INTEGER_TOL: f64 = 0.05;
/// Magnitudes below this evaluate fractional monomials to zero.
pub const UNDERFLOW: f64 = 1e-300;

/// How coefficients of fractional terms depend on the sign of a real master
/// coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// One coefficient for both signs.
    Symmetric,
    /// Separate columns for `u > 0` and `u ≤ 0`.
    #[default]
    Signed,
    /// Data lives on `u ≥ 0`; evaluated like `Symmetric`.
    PositiveOnly,
}

/// Multi-index `(k₁, k₂, k₃, k₄, k₅, k₆)` over real masters, complex masters
/// and their conjugates, real slaved and complex slaved eigenvalues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct MultiIndex {
    pub k1: Vec<u32>,
    pub k2: Vec<u32>,
    pub k3: Vec<u32>,
    pub k4: Vec<u32>,
    pub k5: Vec<u32>,
    pub k6: Vec<u32>,
}

impl MultiIndex {
    pub fn total(&self) -> u32 {
        [&self.k1, &self.k2, &self.k3, &self.k4, &self.k5, &self.k6]
            .iter()
            .flat_map(|v| v.iter())
            .sum()
    }

    /// Integer degree in the master variables.
    pub fn integer_degree(&self) -> u32 {
        self.k1.iter().chain(&self.k2).chain(&self.k3).sum()
    }

    pub fn is_integer(&self) -> bool {
        self.k4.iter().chain(&self.k5).chain(&self.k6).all(|&k| k == 0)
    }

    /// Index of the complex-conjugate monomial (k₂↔k₃, k₅↔k₆).
    pub fn conjugate(&self) -> Self {
        Self {
            k1: self.k1.clone(),
            k2: self.k3.clone(),
            k3: self.k2.clone(),
            k4: self.k4.clone(),
            k5: self.k6.clone(),
            k6: self.k5.clone(),
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        write!(
            f,
            "[{}|{}|{}|{}|{}|{}]",
            join(&self.k1),
            join(&self.k2),
            join(&self.k3),
            join(&self.k4),
            join(&self.k5),
            join(&self.k6)
        )
    }
}

/// One dictionary term `Π u^{k₁} · z^{k₂} z̄^{k₃} · |a|^{ρ} e^{iγ log|a|}` where `a`
/// is the anchor master variable (`u₁` or `z₁`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalMonomial {
    pub multi_index: MultiIndex,
    /// Per master variable: integer degree plus fractional contribution.
    pub amp_exponent: Vec<f64>,
    /// Fractional contribution ρ to the anchor amplitude exponent.
    pub frac_exponent: f64,
    /// Coefficient γ of `log|a|` in the phase.
    pub phase_coeff: f64,
    pub order: f64,
    pub branch: Branch,
    pub near_integer: bool,
    pub pruned: bool,
}

impl FractionalMonomial {
    /// Number of real design columns this monomial contributes.
    fn columns(&self, shape: Shape) -> usize {
        match shape {
            Shape::TwoD => 2,
            _ if self.branch == Branch::Signed && self.frac_exponent > 0.0 => 2,
            _ => 1,
        }
    }
}

/// Master-variable layout of a dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Shape {
    /// One real master coordinate (p = 1, q = 0, s = 0).
    OneD,
    /// One complex master pair given as (Re z, Im z) (p = 0, q = 1, r = 0).
    TwoD,
    /// Plain integer polynomials in `vars` real coordinates.
    Integer { vars: usize },
}

impl Shape {
    /// Number of real coordinates a point must have.
    pub fn input_dim(self) -> usize {
        match self {
            Shape::OneD => 1,
            Shape::TwoD => 2,
            Shape::Integer { vars } => vars,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictOptions {
    /// Keep the bare linear term (needed when coordinates are not modal and
    /// for reduced dynamics).
    pub include_linear: bool,
    pub branch: Branch,
    pub near_integer_tol: f64,
    /// Drop every fractional term.
    pub integer_only: bool,
}

impl Default for DictOptions {
    fn default() -> Self {
        Self { include_linear: true, branch: Branch::Signed, near_integer_tol: NEAR_INTEGER_TOL, integer_only: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictMeta {
    pub order_tol: f64,
    pub near_integer_tol: f64,
    pub include_linear: bool,
    pub integer_only: bool,
    /// Tolerance of the last pruning pass, if any.
    pub prune_tol: Option<f64>,
    /// Slaved spectral ratios removed entirely by pruning, e.g. `kappa1`.
    pub pruned_ratios: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    pub kind: Kind,
    pub shape: Shape,
    pub truncation: u32,
    pub spec: Option<SpectralPartition>,
    pub monomials: Vec<FractionalMonomial>,
    pub meta: DictMeta,
}

/// Positive slaved ratio and phase coefficient used by the dictionary.
#[derive(Debug, Clone, Copy)]
struct SlavedRate {
    ratio: f64,
    phase: f64,
}

impl Dictionary {
    /// Unpruned monomials in canonical order.
    pub fn active(&self) -> impl Iterator<Item = &FractionalMonomial> {
        self.monomials.iter().filter(|m| !m.pruned)
    }

    pub fn len(&self) -> usize {
        self.active().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_columns(&self) -> usize {
        self.active().map(|m| m.columns(self.shape)).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.shape.input_dim()
    }

    pub fn column_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for m in self.active() {
            let base = m.multi_index.to_string();
            match (self.shape, m.columns(self.shape)) {
                (Shape::TwoD, _) => {
                    out.push(format!("{base}:re"));
                    out.push(format!("{base}:im"));
                }
                (_, 2) => {
                    out.push(format!("{base}:+"));
                    out.push(format!("{base}:-"));
                }
                _ => out.push(base),
            }
        }
        out
    }

    /// Complex value of one monomial at a point of the master space.
    pub fn eval_monomial(&self, m: &FractionalMonomial, x: &[f64]) -> Complex64 {
        match self.shape {
            Shape::TwoD => eval_2d(m, Complex64::new(x[0], x[1])),
            _ => Complex64::new(eval_real(m, x), 0.0),
        }
    }

    /// Real design row at `x`: one column per real monomial (two for signed
    /// fractional terms), (Re, Im) pairs for complex monomials.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.n_columns());
        for m in self.active() {
            let v = self.eval_monomial(m, x);
            match (self.shape, m.columns(self.shape)) {
                (Shape::TwoD, _) => {
                    row.push(v.re);
                    row.push(v.im);
                }
                (_, 2) => {
                    let pos = x[0] > 0.0;
                    row.push(if pos { v.re } else { 0.0 });
                    row.push(if pos { 0.0 } else { v.re });
                }
                _ => row.push(v.re),
            }
        }
        row
    }

    /// Complex monomial values at `z` (2D dictionaries).
    pub fn eval_complex(&self, z: Complex64) -> Vec<Complex64> {
        self.active().map(|m| eval_2d(m, z)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Recompute the order of a monomial from its multi-index and the spectrum.
    pub fn recompute_order(&self, m: &FractionalMonomial) -> f64 {
        let deg = m.multi_index.integer_degree() as f64;
        let Some(spec) = &self.spec else { return deg };
        match self.shape {
            Shape::OneD => {
                let l = spec.lambda_rate(0);
                deg + m.multi_index.k4.iter().enumerate().map(|(i, &k)| k as f64 * spec.kappa_rate(i) / l).sum::<f64>()
            }
            Shape::TwoD => {
                let a = spec.alpha_rate(0);
                deg + (0..spec.s)
                    .map(|i| (m.multi_index.k5[i] + m.multi_index.k6[i]) as f64 * spec.beta_rate(i) / a)
                    .sum::<f64>()
            }
            Shape::Integer { .. } => deg,
        }
    }
}

fn eval_real(m: &FractionalMonomial, x: &[f64]) -> f64 {
    let mut v: f64 = m.multi_index.k1.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product();
    if m.frac_exponent > 0.0 {
        let a = x[0].abs();
        v *= if a < UNDERFLOW { 0.0 } else { a.powf(m.frac_exponent) };
    }
    v
}

fn eval_2d(m: &FractionalMonomial, z: Complex64) -> Complex64 {
    let r = z.norm();
    let k2 = m.multi_index.k2[0] as i32;
    let k3 = m.multi_index.k3[0] as i32;
    if r < UNDERFLOW {
        return Complex64::new(0.0, 0.0);
    }
    let mut v = z.powi(k2) * z.conj().powi(k3);
    if m.frac_exponent > 0.0 || m.phase_coeff != 0.0 {
        let lr = r.ln();
        v *= Complex64::from_polar((m.frac_exponent * lr).exp(), m.phase_coeff * lr);
    }
    v
}

fn near_integer(x: f64, tol: f64) -> bool {
    x > 0.0 && (x - x.round()).abs() < tol
}

fn canonical_sort(monos: &mut [FractionalMonomial]) {
    monos.sort_by(|a, b| {
        let ka = (a.order * 1e9).round() as i64;
        let kb = (b.order * 1e9).round() as i64;
        ka.cmp(&kb).then_with(|| a.multi_index.cmp(&b.multi_index))
    });
}

/// Enumerate nonnegative integer vectors `k` with `Σ kᵢ wᵢ ≤ budget`.
fn enumerate_weighted(weights: &[f64], budget: f64, mut f: impl FnMut(&[u32], f64)) {
    fn rec(w: &[f64], k: &mut Vec<u32>, pos: usize, used: f64, budget: f64, f: &mut dyn FnMut(&[u32], f64)) {
        if pos == w.len() {
            f(k, used);
            return;
        }
        let mut c = 0u32;
        loop {
            let u = if c == 0 { used } else { used + c as f64 * w[pos] };
            if u > budget {
                break;
            }
            k[pos] = c;
            rec(w, k, pos + 1, u, budget, f);
            c += 1;
            if w[pos] <= 0.0 {
                break;
            }
        }
        k[pos] = 0;
    }
    let mut k = vec![0; weights.len()];
    rec(weights, &mut k, 0, 0.0, budget, &mut f);
}

fn new_dictionary(kind: Kind, shape: Shape, truncation: u32, spec: Option<SpectralPartition>, opts: &DictOptions) -> Dictionary {
    Dictionary {
        kind,
        shape,
        truncation,
        spec,
        monomials: Vec::new(),
        meta: DictMeta {
            order_tol: ORDER_TOL,
            near_integer_tol: opts.near_integer_tol,
            include_linear: opts.include_linear,
            integer_only: opts.integer_only,
            prune_tol: None,
            pruned_ratios: Vec::new(),
        },
    }
}

fn build_1d(spec: &SpectralPartition, k: u32, kind: Kind, opts: &DictOptions) -> Result<Dictionary> {
    if spec.p != 1 || spec.q != 0 || spec.s != 0 {
        return Err(Error::WrongShape(format!(
            "1D dictionary needs p=1, q=0, s=0; got p={}, q={}, s={}",
            spec.p, spec.q, spec.s
        )));
    }
    if spec.kind != kind {
        return Err(Error::WrongShape(format!("expected a {kind} spectrum")));
    }
    if kind == Kind::Map && spec.kappa.iter().any(|&x| x <= 0.0) {
        return Err(Error::DomainError("map dictionary needs positive real slaved eigenvalues".into()));
    }
    let l = spec.lambda_rate(0);
    let rates: Vec<f64> = (0..spec.r).map(|i| spec.kappa_rate(i) / l).collect();
    // negative-ratio directions are never multiplied in
    let weights: Vec<f64> = rates
        .iter()
        .map(|&x| if x > 0.0 && !opts.integer_only { x } else { f64::INFINITY })
        .collect();
    let budget = k as f64 + ORDER_TOL;
    let mut dict = new_dictionary(kind, Shape::OneD, k, Some(spec.clone()), opts);
    for k1 in 0..=k {
        enumerate_weighted(&weights, budget - k1 as f64, |k4, frac| {
            let order = k1 as f64 + frac;
            let total = k1 + k4.iter().sum::<u32>();
            if total == 0 || order < 1.0 - ORDER_TOL {
                return;
            }
            if total == 1 && k1 == 1 && !opts.include_linear {
                return;
            }
            let branch = if frac > 0.0 { opts.branch } else { Branch::Symmetric };
            dict.monomials.push(FractionalMonomial {
                multi_index: MultiIndex { k1: vec![k1], k4: k4.to_vec(), ..Default::default() },
                amp_exponent: vec![order],
                frac_exponent: frac,
                phase_coeff: 0.0,
                order,
                branch,
                near_integer: near_integer(frac, opts.near_integer_tol),
                pruned: false,
            });
        });
    }
    canonical_sort(&mut dict.monomials);
    Ok(dict)
}

fn build_2d(spec: &SpectralPartition, k: u32, kind: Kind, opts: &DictOptions) -> Result<Dictionary> {
    if spec.p != 0 || spec.q != 1 || spec.r != 0 {
        return Err(Error::WrongShape(format!(
            "2D dictionary needs p=0, q=1, r=0; got p={}, q={}, r={}",
            spec.p, spec.q, spec.r
        )));
    }
    if spec.kind != kind {
        return Err(Error::WrongShape(format!("expected a {kind} spectrum")));
    }
    let a = spec.alpha_rate(0);
    let rates: Vec<SlavedRate> = (0..spec.s)
        .map(|m| SlavedRate { ratio: spec.beta_rate(m) / a, phase: spec.nu_rotation(m) / a })
        .collect();
    let weights: Vec<f64> = rates
        .iter()
        .map(|r| if r.ratio > 0.0 && !opts.integer_only { r.ratio } else { f64::INFINITY })
        .collect();
    let budget = k as f64 + ORDER_TOL;
    let mut dict = new_dictionary(kind, Shape::TwoD, k, Some(spec.clone()), opts);
    for k2 in 0..=k {
        for k3 in 0..=(k - k2) {
            let deg = (k2 + k3) as f64;
            enumerate_weighted(&weights, budget - deg, |k5, f5| {
                enumerate_weighted(&weights, budget - deg - f5, |k6, f6| {
                    let frac = f5 + f6;
                    let order = deg + frac;
                    let total = k2 + k3 + k5.iter().chain(k6).sum::<u32>();
                    if total == 0 || order < 1.0 - ORDER_TOL {
                        return;
                    }
                    if total == 1 && k2 + k3 == 1 && !opts.include_linear {
                        return;
                    }
                    let phase: f64 = rates
                        .iter()
                        .zip(k5.iter().zip(k6))
                        .map(|(r, (&p, &q))| (p as f64 - q as f64) * r.phase)
                        .sum();
                    dict.monomials.push(FractionalMonomial {
                        multi_index: MultiIndex {
                            k2: vec![k2],
                            k3: vec![k3],
                            k5: k5.to_vec(),
                            k6: k6.to_vec(),
                            ..Default::default()
                        },
                        amp_exponent: vec![order],
                        frac_exponent: frac,
                        phase_coeff: if k5 == k6 { 0.0 } else { phase },
                        order,
                        branch: Branch::Symmetric,
                        near_integer: near_integer(frac, opts.near_integer_tol),
                        pruned: false,
                    });
                });
            });
        }
    }
    canonical_sort(&mut dict.monomials);
    Ok(dict)
}

/// Prop. 1 dictionary: `u^{k₁}|u|^{Σ k₄ℓ κℓ/λ₁}` up to order `k`.
pub fn dictionary_flow_1d(spec: &SpectralPartition, k: u32) -> Result<Dictionary> {
    dictionary_flow_1d_with(spec, k, &DictOptions::default())
}

pub fn dictionary_flow_1d_with(spec: &SpectralPartition, k: u32, opts: &DictOptions) -> Result<Dictionary> {
    build_1d(spec, k, Kind::Flow, opts)
}

/// Prop. 2 dictionary: `z^{k₂} z̄^{k₃}|z|^{Σ(k₅+k₆)β/α} e^{iΣ(k₅−k₆)(ν/α) log|z|}`.
pub fn dictionary_flow_2d(spec: &SpectralPartition, k: u32) -> Result<Dictionary> {
    dictionary_flow_2d_with(spec, k, &DictOptions::default())
}

pub fn dictionary_flow_2d_with(spec: &SpectralPartition, k: u32, opts: &DictOptions) -> Result<Dictionary> {
    build_2d(spec, k, Kind::Flow, opts)
}

/// Map analogue of the 1D dictionary with log-ratio exponents.
pub fn dictionary_map_1d(spec: &SpectralPartition, k: u32) -> Result<Dictionary> {
    dictionary_map_1d_with(spec, k, &DictOptions::default())
}

pub fn dictionary_map_1d_with(spec: &SpectralPartition, k: u32, opts: &DictOptions) -> Result<Dictionary> {
    build_1d(spec, k, Kind::Map, opts)
}

/// Map analogue of the 2D dictionary: amplitude `Ξ` and phase `Γ` from log
/// moduli and principal arguments.
pub fn dictionary_map_2d(spec: &SpectralPartition, k: u32) -> Result<Dictionary> {
    dictionary_map_2d_with(spec, k, &DictOptions::default())
}

pub fn dictionary_map_2d_with(spec: &SpectralPartition, k: u32, opts: &DictOptions) -> Result<Dictionary> {
    build_2d(spec, k, Kind::Map, opts)
}

/// All integer monomials of degree `1..=k` in `vars` real coordinates.
pub fn dictionary_integer(vars: usize, k: u32, kind: Kind, include_linear: bool) -> Dictionary {
    let opts = DictOptions { include_linear, integer_only: true, ..Default::default() };
    let mut dict = new_dictionary(kind, Shape::Integer { vars }, k, None, &opts);
    let lo = if include_linear { 1 } else { 2 };
    crate::spectrum::for_each_multi_index(vars, lo, k, |m| {
        let order = m.iter().sum::<u32>() as f64;
        dict.monomials.push(FractionalMonomial {
            multi_index: MultiIndex { k1: m.to_vec(), ..Default::default() },
            amp_exponent: m.iter().map(|&x| x as f64).collect(),
            frac_exponent: 0.0,
            phase_coeff: 0.0,
            order,
            branch: Branch::Symmetric,
            near_integer: false,
            pruned: false,
        });
    });
    canonical_sort(&mut dict.monomials);
    dict
}

/// Remove fractional terms that nearly duplicate integer ones.
///
/// A slaved ratio within `tol` of an integer `n` (with an integer monomial of
/// order `n` present) removes every term that uses it. Any remaining term whose
/// fractional contribution is within `tol` of an integer, and whose order is
/// within `tol` of some integer monomial's order, is removed as well.
pub fn prune_near_integer(dict: &Dictionary, tol: f64) -> Dictionary {
    let mut out = dict.clone();
    out.meta.prune_tol = Some(tol);
    if tol <= 0.0 {
        return out;
    }
    let int_orders: Vec<f64> = out.active().filter(|m| m.multi_index.is_integer()).map(|m| m.order).collect();
    let has_int_order = |o: f64| int_orders.iter().any(|&x| (x - o).abs() < tol);

    let mut bad_k4 = Vec::new();
    let mut bad_k56 = Vec::new();
    if let Some(spec) = &dict.spec {
        match dict.shape {
            Shape::OneD => {
                let l = spec.lambda_rate(0);
                for i in 0..spec.r {
                    let rho = spec.kappa_rate(i) / l;
                    if near_integer(rho, tol) && has_int_order(rho.round()) {
                        bad_k4.push(i);
                        out.meta.pruned_ratios.push(format!("kappa{}", i + 1));
                    }
                }
            }
            Shape::TwoD => {
                let a = spec.alpha_rate(0);
                for i in 0..spec.s {
                    let rho = spec.beta_rate(i) / a;
                    if near_integer(rho, tol) && has_int_order(rho.round()) {
                        bad_k56.push(i);
                        out.meta.pruned_ratios.push(format!("beta{}", i + 1));
                    }
                }
            }
            Shape::Integer { .. } => {}
        }
    }
    for m in out.monomials.iter_mut().filter(|m| !m.pruned) {
        let mi = &m.multi_index;
        let uses_bad = bad_k4.iter().any(|&i| mi.k4[i] > 0) || bad_k56.iter().any(|&i| mi.k5[i] + mi.k6[i] > 0);
        let dup = near_integer(m.frac_exponent, tol) && has_int_order(m.order);
        if uses_bad || (dup && !mi.is_integer()) {
            m.pruned = true;
        }
    }
    out
}

/// Coefficients of the invariant graph families 𝒱 (real slaved) and ℰ
/// (complex slaved) of the linearized system. Row index is the slaved mode,
/// column index the master mode. `*_plus` apply for ζ > 0, `*_minus` for ζ ≤ 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGraphCoeffs {
    pub k_plus: Vec<Vec<f64>>,
    pub k_minus: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    pub o_plus: Vec<Vec<Complex64>>,
    pub o_minus: Vec<Vec<Complex64>>,
    pub q: Vec<Vec<Complex64>>,
}

impl LinearGraphCoeffs {
    /// All-zero coefficients for the given spectrum (the primary member).
    pub fn zeros(spec: &SpectralPartition) -> Self {
        let (p, q, r, s) = (spec.p, spec.q, spec.r, spec.s);
        let z = Complex64::new(0.0, 0.0);
        Self {
            k_plus: vec![vec![0.0; p]; r],
            k_minus: vec![vec![0.0; p]; r],
            l: vec![vec![0.0; q]; r],
            o_plus: vec![vec![z; p]; s],
            o_minus: vec![vec![z; p]; s],
            q: vec![vec![z; q]; s],
        }
    }

    /// Zero every coefficient whose spectral ratio is negative.
    pub fn constrained(mut self, spec: &SpectralPartition) -> Self {
        let z = Complex64::new(0.0, 0.0);
        for l in 0..spec.r {
            for j in 0..spec.p {
                if spec.kappa_rate(l) / spec.lambda_rate(j) < 0.0 {
                    self.k_plus[l][j] = 0.0;
                    self.k_minus[l][j] = 0.0;
                }
            }
            for k in 0..spec.q {
                if spec.kappa_rate(l) / spec.alpha_rate(k) < 0.0 {
                    self.l[l][k] = 0.0;
                }
            }
        }
        for m in 0..spec.s {
            for j in 0..spec.p {
                if spec.beta_rate(m) / spec.lambda_rate(j) < 0.0 {
                    self.o_plus[m][j] = z;
                    self.o_minus[m][j] = z;
                }
            }
            for k in 0..spec.q {
                if spec.beta_rate(m) / spec.alpha_rate(k) < 0.0 {
                    self.q[m][k] = z;
                }
            }
        }
        self
    }

    fn check_shape(&self, spec: &SpectralPartition) -> Result<()> {
        let ok = self.k_plus.len() == spec.r
            && self.k_minus.len() == spec.r
            && self.l.len() == spec.r
            && self.o_plus.len() == spec.s
            && self.o_minus.len() == spec.s
            && self.q.len() == spec.s
            && self.k_plus.iter().chain(&self.k_minus).all(|r| r.len() == spec.p)
            && self.l.iter().all(|r| r.len() == spec.q)
            && self.o_plus.iter().chain(&self.o_minus).all(|r| r.len() == spec.p)
            && self.q.iter().all(|r| r.len() == spec.q);
        if ok {
            Ok(())
        } else {
            Err(Error::WrongShape("coefficient blocks do not match the spectrum".into()))
        }
    }
}

/// `c |x|^e`, zero below the underflow threshold.
fn frac_power(c: f64, x: f64, e: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    let a = x.abs();
    if a < UNDERFLOW {
        if e > 0.0 {
            return Ok(0.0);
        }
        return Err(Error::DomainError("fractional power of zero with nonpositive exponent".into()));
    }
    Ok(c * a.powf(e))
}

/// Evaluate `(𝒱(u, z), ℰ(u, z))` for the linear invariant graph family.
pub fn linear_graph_eval(
    spec: &SpectralPartition,
    coeffs: &LinearGraphCoeffs,
    u: &[f64],
    z: &[Complex64],
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    coeffs.check_shape(spec)?;
    if u.len() != spec.p || z.len() != spec.q {
        return Err(Error::WrongShape("point does not match master dimensions".into()));
    }
    if spec.kind == Kind::Map && spec.kappa.iter().any(|&k| k <= 0.0) {
        return Err(Error::DomainError("map graphs need positive real slaved eigenvalues".into()));
    }
    let c = coeffs.clone().constrained(spec);
    let lam: Vec<f64> = (0..spec.p).map(|j| spec.lambda_rate(j)).collect();
    let alp: Vec<f64> = (0..spec.q).map(|k| spec.alpha_rate(k)).collect();
    let kcoef = |l: usize, j: usize| if u[j] > 0.0 { c.k_plus[l][j] } else { c.k_minus[l][j] };
    let ocoef = |m: usize, j: usize| if u[j] > 0.0 { c.o_plus[m][j] } else { c.o_minus[m][j] };

    let mut v = vec![0.0; spec.r];
    for (l, vl) in v.iter_mut().enumerate() {
        let kap = spec.kappa_rate(l);
        for j in 0..spec.p {
            *vl += frac_power(kcoef(l, j), u[j], kap / lam[j])?;
        }
        for k in 0..spec.q {
            *vl += frac_power(c.l[l][k], z[k].norm(), kap / alp[k])?;
        }
    }

    let mut w = vec![Complex64::new(0.0, 0.0); spec.s];
    for (m, wm) in w.iter_mut().enumerate() {
        let beta = spec.beta_rate(m);
        let mut amp = Complex64::new(0.0, 0.0);
        for j in 0..spec.p {
            let e = beta / lam[j];
            let o = ocoef(m, j);
            amp += Complex64::new(frac_power(o.re, u[j], e)?, frac_power(o.im, u[j], e)?);
        }
        for k in 0..spec.q {
            let e = beta / alp[k];
            let qc = c.q[m][k];
            amp += Complex64::new(frac_power(qc.re, z[k].norm(), e)?, frac_power(qc.im, z[k].norm(), e)?);
        }
        if amp.norm() == 0.0 {
            continue;
        }
        let logs_u = u.iter().map(|x| x.abs().ln());
        let logs_z = z.iter().map(|x| x.norm().ln());
        let phase = match spec.kind {
            Kind::Flow => {
                let nu = spec.beta_nu[m][1];
                logs_u.zip(&lam).map(|(lg, l)| nu / l * lg).sum::<f64>()
                    + logs_z.zip(&alp).map(|(lg, a)| nu / a * lg).sum::<f64>()
            }
            Kind::Map => {
                let arg = spec.nu_rotation(m);
                let sum = logs_u.zip(&lam).map(|(lg, l)| lg / l).sum::<f64>()
                    + logs_z.zip(&alp).map(|(lg, a)| lg / a).sum::<f64>();
                arg / (spec.p + spec.q) as f64 * sum
            }
        };
        *wm = amp * Complex64::from_polar(1.0, phase);
    }
    Ok((v, w))
}
