//! Linear analysis at a hyperbolic fixed point: partitioning of the spectrum
//! into master and slaved real/complex blocks, nonresonance checks,
//! smoothness classes and the Irwin pseudo-unstable test.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

/// Hyperbolicity tolerance, relative to ‖A‖ for flows and absolute for maps.
pub const HYPERBOLICITY_TOL: f64 = 1e-10;
/// Tolerance for resonance relations (absolute for flows, relative for maps).
pub const RESONANCE_TOL: f64 = 1e-9;
/// Eigenvector-matrix condition number above which a matrix is treated as defective.
pub const DEFECTIVE_COND: f64 = 1e8;
/// Eigenvalues closer than this are merged before resonance enumeration.
pub const DEDUP_TOL: f64 = 1e-9;
const REAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Flow,
    Map,
}

impl Kind {
    /// Growth rate of an eigenvalue: real part for flows, log modulus for maps.
    pub fn rate(self, z: Complex64) -> f64 {
        match self {
            Kind::Flow => z.re,
            Kind::Map => z.norm().ln(),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Flow => "flow",
            Kind::Map => "map",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flow" => Ok(Kind::Flow),
            "map" => Ok(Kind::Map),
            other => Err(Error::Parse(format!("unknown kind '{other}'"))),
        }
    }
}

/// Eigenvalues split into master (`lambda`, `alpha_omega`) and slaved
/// (`kappa`, `beta_nu`) blocks. Complex pairs store the member with positive
/// imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition")]
pub struct SpectralPartition {
    pub kind: Kind,
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub s: usize,
    pub lambda: Vec<f64>,
    pub alpha_omega: Vec<[f64; 2]>,
    pub kappa: Vec<f64>,
    pub beta_nu: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct RawPartition {
    kind: Kind,
    p: usize,
    q: usize,
    r: usize,
    s: usize,
    #[serde(default)]
    lambda: Vec<f64>,
    #[serde(default)]
    alpha_omega: Vec<[f64; 2]>,
    #[serde(default)]
    kappa: Vec<f64>,
    #[serde(default)]
    beta_nu: Vec<[f64; 2]>,
}

impl TryFrom<RawPartition> for SpectralPartition {
    type Error = Error;
    fn try_from(raw: RawPartition) -> Result<Self> {
        let counts = [
            (raw.p, raw.lambda.len(), "p"),
            (raw.q, raw.alpha_omega.len(), "q"),
            (raw.r, raw.kappa.len(), "r"),
            (raw.s, raw.beta_nu.len(), "s"),
        ];
        for (n, len, name) in counts {
            if n != len {
                return Err(Error::Parse(format!("{name} = {n} but {len} entries given")));
            }
        }
        SpectralPartition::new(raw.kind, raw.lambda, raw.alpha_omega, raw.kappa, raw.beta_nu)
    }
}

impl SpectralPartition {
    /// Build a partition from its blocks, sorting each block by |rate| and
    /// validating hyperbolicity and the sign convention of complex pairs.
    pub fn new(
        kind: Kind,
        mut lambda: Vec<f64>,
        mut alpha_omega: Vec<[f64; 2]>,
        mut kappa: Vec<f64>,
        mut beta_nu: Vec<[f64; 2]>,
    ) -> Result<Self> {
        for pair in alpha_omega.iter_mut().chain(beta_nu.iter_mut()) {
            if pair[1] == 0.0 {
                return Err(Error::WrongShape("complex pair with zero imaginary part".into()));
            }
            pair[1] = pair[1].abs();
        }
        let all: Vec<Complex64> = lambda
            .iter()
            .chain(kappa.iter())
            .map(|&x| Complex64::new(x, 0.0))
            .chain(alpha_omega.iter().chain(beta_nu.iter()).map(|p| Complex64::new(p[0], p[1])))
            .collect();
        if all.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DomainError("non-finite eigenvalue".into()));
        }
        let scale = all.iter().map(|z| z.norm()).fold(0.0, f64::max);
        check_hyperbolic(kind, &all, scale)?;

        let key_real = |x: &f64| kind.rate(Complex64::new(*x, 0.0)).abs();
        let key_pair = |p: &[f64; 2]| kind.rate(Complex64::new(p[0], p[1])).abs();
        lambda.sort_by(|a, b| key_real(a).total_cmp(&key_real(b)));
        kappa.sort_by(|a, b| key_real(a).total_cmp(&key_real(b)));
        alpha_omega.sort_by(|a, b| key_pair(a).total_cmp(&key_pair(b)));
        beta_nu.sort_by(|a, b| key_pair(a).total_cmp(&key_pair(b)));
        Ok(Self {
            kind,
            p: lambda.len(),
            q: alpha_omega.len(),
            r: kappa.len(),
            s: beta_nu.len(),
            lambda,
            alpha_omega,
            kappa,
            beta_nu,
        })
    }

    /// Ambient dimension `p + 2q + r + 2s`.
    pub fn dim(&self) -> usize {
        self.p + 2 * self.q + self.r + 2 * self.s
    }

    /// Master eigenvalues (conjugates included).
    pub fn master_eigenvalues(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.lambda.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for p in &self.alpha_omega {
            v.push(Complex64::new(p[0], p[1]));
            v.push(Complex64::new(p[0], -p[1]));
        }
        v
    }

    /// Slaved eigenvalues (conjugates included).
    pub fn slaved_eigenvalues(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.kappa.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        for p in &self.beta_nu {
            v.push(Complex64::new(p[0], p[1]));
            v.push(Complex64::new(p[0], -p[1]));
        }
        v
    }

    /// All eigenvalues, master first.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut v = self.master_eigenvalues();
        v.extend(self.slaved_eigenvalues());
        v
    }

    /// Rate of the real master eigenvalue `j`.
    pub fn lambda_rate(&self, j: usize) -> f64 {
        self.kind.rate(Complex64::new(self.lambda[j], 0.0))
    }

    pub fn alpha_rate(&self, k: usize) -> f64 {
        let [a, w] = self.alpha_omega[k];
        self.kind.rate(Complex64::new(a, w))
    }

    pub fn kappa_rate(&self, l: usize) -> f64 {
        self.kind.rate(Complex64::new(self.kappa[l], 0.0))
    }

    pub fn beta_rate(&self, m: usize) -> f64 {
        let [b, n] = self.beta_nu[m];
        self.kind.rate(Complex64::new(b, n))
    }

    /// Rotation of the slaved pair `m` per unit time (flow: ν) or per
    /// iteration (map: principal argument of β+iν).
    pub fn nu_rotation(&self, m: usize) -> f64 {
        let [b, n] = self.beta_nu[m];
        match self.kind {
            Kind::Flow => n,
            Kind::Map => n.atan2(b),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_hyperbolic(kind: Kind, eigs: &[Complex64], scale: f64) -> Result<()> {
    for z in eigs {
        let bad = match kind {
            Kind::Flow => z.re.abs() <= HYPERBOLICITY_TOL * scale.max(f64::MIN_POSITIVE),
            Kind::Map => (z.norm() - 1.0).abs() <= HYPERBOLICITY_TOL,
        };
        if bad {
            return Err(Error::NotHyperbolic { re: z.re, im: z.im });
        }
    }
    Ok(())
}

/// Partition a raw list of eigenvalues (conjugate pairs may be given once or
/// twice) according to `master`.
pub fn partition_eigenvalues(
    eigs: &[Complex64],
    master: impl Fn(Complex64) -> bool,
    kind: Kind,
) -> Result<SpectralPartition> {
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    check_hyperbolic(kind, eigs, scale)?;
    let tol = REAL_TOL * scale.max(1.0);
    let (mut lambda, mut ao, mut kappa, mut bn) = (vec![], vec![], vec![], vec![]);
    let mut used = vec![false; eigs.len()];
    for (i, &z) in eigs.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let is_master = master(z);
        if z.im.abs() <= tol {
            if is_master {
                lambda.push(z.re);
            } else {
                kappa.push(z.re);
            }
            continue;
        }
        // consume the conjugate partner if present
        if let Some(j) = (i + 1..eigs.len())
            .find(|&j| !used[j] && (eigs[j] - z.conj()).norm() <= 1e3 * tol)
        {
            used[j] = true;
        }
        let pair = [z.re, z.im.abs()];
        if is_master {
            ao.push(pair);
        } else {
            bn.push(pair);
        }
    }
    SpectralPartition::new(kind, lambda, ao, kappa, bn)
}

/// Partition the spectrum of `a` into master and slaved blocks.
pub fn partition_spectrum(
    a: &DMatrix<f64>,
    master: impl Fn(Complex64) -> bool,
    kind: Kind,
) -> Result<SpectralPartition> {
    let e = linalg::eig(a)?;
    if e.cond > DEFECTIVE_COND {
        return Err(Error::DefectiveMatrix { cond: e.cond });
    }
    let scale = a.norm();
    if let Kind::Flow = kind {
        if let Some(z) = e.values.iter().find(|z| z.re.abs() <= HYPERBOLICITY_TOL * scale) {
            return Err(Error::NotHyperbolic { re: z.re, im: z.im });
        }
    }
    partition_eigenvalues(&e.values, master, kind)
}

/// Selector picking the `dim` slowest real dimensions (|rate| ascending),
/// keeping complex pairs together.
pub fn slowest_selector(eigs: &[Complex64], dim: usize, kind: Kind) -> impl Fn(Complex64) -> bool {
    let mut sorted: Vec<Complex64> = eigs.to_vec();
    sorted.sort_by(|a, b| kind.rate(*a).abs().total_cmp(&kind.rate(*b).abs()));
    let mut chosen: Vec<Complex64> = Vec::new();
    let mut count = 0;
    for z in sorted {
        if count >= dim {
            break;
        }
        if chosen.iter().any(|c| (c - z).norm() < 1e-12 || (c - z.conj()).norm() < 1e-12) {
            continue;
        }
        chosen.push(z);
        count += if z.im.abs() > 1e-12 { 2 } else { 1 };
    }
    move |z: Complex64| {
        chosen
            .iter()
            .any(|c| (c - z).norm() < 1e-9 * (1.0 + c.norm()) || (c.conj() - z).norm() < 1e-9 * (1.0 + c.norm()))
    }
}

/// A resonance relation found during enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Index into `ResonanceReport::eigenvalues` of the resonant eigenvalue.
    pub j: usize,
    /// Multi-index over `ResonanceReport::eigenvalues`.
    pub m: Vec<u32>,
    /// Gap |λ_j − ⟨m,λ⟩| (flow) or |λ_j − Πλ^m| / |λ_j| (map).
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub resonant: bool,
    pub violations: Vec<Violation>,
    pub checked_order: u32,
    /// Deduplicated eigenvalues the multi-indices refer to, as (re, im).
    pub eigenvalues: Vec<[f64; 2]>,
}

/// Visit all multi-indices of length `n` with `lo ≤ |m| ≤ hi`.
pub(crate) fn for_each_multi_index(n: usize, lo: u32, hi: u32, mut f: impl FnMut(&[u32])) {
    fn rec(m: &mut Vec<u32>, pos: usize, left: u32, lo: u32, total: u32, f: &mut dyn FnMut(&[u32])) {
        if pos == m.len() {
            if total >= lo {
                f(m);
            }
            return;
        }
        for v in 0..=left {
            m[pos] = v;
            rec(m, pos + 1, left - v, lo, total + v, f);
        }
        m[pos] = 0;
    }
    if n == 0 {
        return;
    }
    let mut m = vec![0; n];
    rec(&mut m, 0, hi, lo, 0, &mut f);
}

/// Dedupe eigenvalues within `DEDUP_TOL`, preserving first occurrences.
pub fn dedup_eigenvalues(eigs: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for &z in eigs {
        if !out.iter().any(|w| (w - z).norm() <= DEDUP_TOL) {
            out.push(z);
        }
    }
    out
}

/// Enumerate all multi-indices with `2 ≤ |m| ≤ max_order` and report every
/// relation λ_j = ⟨m,λ⟩ (flow) or λ_j = Π λ_k^{m_k} (map).
pub fn check_nonresonance(spec: &SpectralPartition, max_order: u32) -> ResonanceReport {
    let eigs = dedup_eigenvalues(&spec.eigenvalues());
    let n = eigs.len();
    let mut violations = Vec::new();
    let max_order = max_order.max(2);
    for_each_multi_index(n, 2, max_order, |m| {
        let combo = match spec.kind {
            Kind::Flow => m.iter().zip(&eigs).map(|(&k, z)| z * k as f64).sum::<Complex64>(),
            Kind::Map => m.iter().zip(&eigs).map(|(&k, z)| z.powu(k)).product::<Complex64>(),
        };
        for (j, lj) in eigs.iter().enumerate() {
            let gap = match spec.kind {
                Kind::Flow => (lj - combo).norm(),
                Kind::Map => (lj - combo).norm() / lj.norm(),
            };
            if gap <= RESONANCE_TOL {
                violations.push(Violation { j, m: m.to_vec(), gap });
            }
        }
    });
    ResonanceReport {
        resonant: !violations.is_empty(),
        violations,
        checked_order: max_order,
        eigenvalues: eigs.iter().map(|z| [z.re, z.im]).collect(),
    }
}

/// Smoothness class η: a nonnegative integer or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eta {
    Finite(u64),
    Infinity,
}

impl Serialize for Eta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Eta::Finite(n) => s.serialize_u64(*n),
            Eta::Infinity => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for Eta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            N(u64),
            S(String),
        }
        match Repr::deserialize(d)? {
            Repr::N(n) => Ok(Eta::Finite(n)),
            Repr::S(s) if s == "infinity" => Ok(Eta::Infinity),
            Repr::S(s) => Err(serde::de::Error::custom(format!("invalid eta '{s}'"))),
        }
    }
}

impl fmt::Display for Eta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eta::Finite(n) => write!(f, "{n}"),
            Eta::Infinity => f.write_str("infinity"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub eta: Eta,
    /// Positive spectral quotients entering the minimum.
    pub ratios: Vec<f64>,
}

/// All slaved/master rate quotients {κ/λ, β/λ, κ/α, β/α} (log-modulus
/// quotients for maps), in that order.
pub fn spectral_quotients(spec: &SpectralPartition) -> Vec<f64> {
    let lam: Vec<f64> = (0..spec.p).map(|j| spec.lambda_rate(j)).collect();
    let alp: Vec<f64> = (0..spec.q).map(|k| spec.alpha_rate(k)).collect();
    let kap: Vec<f64> = (0..spec.r).map(|l| spec.kappa_rate(l)).collect();
    let bet: Vec<f64> = (0..spec.s).map(|m| spec.beta_rate(m)).collect();
    let mut out = Vec::new();
    for master in [&lam, &alp] {
        for slaved in [&kap, &bet] {
            for rho in slaved.iter() {
                out.extend(master.iter().map(|mu| rho / mu));
            }
        }
    }
    out
}

/// Smoothness class of a generic member of the SSM family.
pub fn smoothness_class(spec: &SpectralPartition) -> SmoothnessReport {
    let ratios: Vec<f64> = spectral_quotients(spec).into_iter().filter(|&x| x > 0.0).collect();
    let eta = ratios
        .iter()
        .cloned()
        .reduce(f64::min)
        .map_or(Eta::Infinity, |m| Eta::Finite(m.floor() as u64));
    SmoothnessReport { eta, ratios }
}

/// `log κ_ℓ / log |λ₁|` for every slaved real eigenvalue, in order.
pub fn spectral_ratio_table(spec: &SpectralPartition) -> Result<Vec<(usize, f64)>> {
    if spec.kind != Kind::Map || spec.p != 1 {
        return Err(Error::WrongShape("ratio table needs a map spectrum with p = 1".into()));
    }
    let l = spec.lambda_rate(0);
    Ok((0..spec.r).map(|i| (i + 1, spec.kappa_rate(i) / l)).collect())
}

/// Outcome of the Irwin pseudo-unstable test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrwinReport {
    pub holds: bool,
    /// Open interval of admissible `a`, if nonempty.
    pub admissible_a: Option<(f64, f64)>,
    /// ‖Df⁻¹|_U‖ and ‖Df|_S‖.
    pub norm_inv_u: f64,
    pub norm_s: f64,
}

/// Irwin's conditions `‖Df⁻¹(0)|_U‖ < a < 1` and `‖Df(0)|_S‖ < a^{−r}`.
///
/// `s_basis` and `u_basis` hold basis vectors as columns; norms are 2-norms of
/// the restrictions in orthonormal bases.
pub fn pseudo_unstable_check(
    df0: &DMatrix<f64>,
    s_basis: &DMatrix<f64>,
    u_basis: &DMatrix<f64>,
    r: u32,
) -> Result<IrwinReport> {
    let n = df0.nrows();
    if df0.ncols() != n || s_basis.nrows() != n || u_basis.nrows() != n {
        return Err(Error::WrongShape("dimension mismatch in split".into()));
    }
    if s_basis.ncols() + u_basis.ncols() != n {
        return Err(Error::WrongShape("split does not span the space".into()));
    }
    let mut both = DMatrix::zeros(n, n);
    both.columns_mut(0, s_basis.ncols()).copy_from(s_basis);
    both.columns_mut(s_basis.ncols(), u_basis.ncols()).copy_from(u_basis);
    if linalg::cond2(&both) > 1e12 {
        return Err(Error::WrongShape("split does not span the space".into()));
    }
    let restrict = |basis: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        if basis.ncols() == 0 {
            return Ok(DMatrix::zeros(0, 0));
        }
        let qmat = basis.clone().qr().q();
        let image = df0 * &qmat;
        let coords = qmat.transpose() * &image;
        let defect = (&image - &qmat * &coords).norm() / df0.norm().max(f64::MIN_POSITIVE);
        if defect > 1e-8 {
            return Err(Error::NonInvariantSplit { defect });
        }
        Ok(coords)
    };
    let ds = restrict(s_basis)?;
    let du = restrict(u_basis)?;
    let spectral_norm = |m: &DMatrix<f64>| m.clone().singular_values().iter().cloned().fold(0.0, f64::max);
    let norm_s = if ds.nrows() == 0 { 0.0 } else { spectral_norm(&ds) };
    let norm_inv_u = if du.nrows() == 0 {
        0.0
    } else {
        match du.clone().try_inverse() {
            Some(inv) => spectral_norm(&inv),
            None => f64::INFINITY,
        }
    };
    let upper = if r == 0 {
        if norm_s < 1.0 { 1.0 } else { 0.0 }
    } else if norm_s == 0.0 {
        1.0
    } else {
        norm_s.powf(-1.0 / r as f64).min(1.0)
    };
    let admissible_a = (norm_inv_u < upper).then_some((norm_inv_u, upper));
    Ok(IrwinReport { holds: admissible_a.is_some(), admissible_a, norm_inv_u, norm_s })
}

/// Read a real matrix from CSV (row-major). A header row is skipped when its
/// first field does not parse as a number.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_csv(&text)
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", i + 1))),
        }
    }
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Parse("matrix rows are empty or ragged".into()));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}
