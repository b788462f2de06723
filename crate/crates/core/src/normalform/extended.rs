//! Extended normal forms of 2D reduced dynamics on fractional SSMs, and the
//! backbone and damping curves of their polar truncation.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dictionary::{Shape, ORDER_TOL, UNDERFLOW};
use crate::error::{Error, Result};
use crate::fit::ReducedFit;
use crate::spectrum::{Kind, SpectralPartition};

use super::linearize::SMALL_DIVISOR_REL;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Generalized monomial `ξ^z ξ̄^zbar |ξ|^{Σ(wₘ+w̄ₘ)ρₘ} e^{iΣ(wₘ−w̄ₘ)τₘ log|ξ|}`.
///
/// Integer powers may be negative: division by `ξ` keeps the family closed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenIndex {
    pub z: i32,
    pub zbar: i32,
    pub w: Vec<i32>,
    pub wbar: Vec<i32>,
}

impl GenIndex {
    pub fn integer(z: i32, zbar: i32, s: usize) -> Self {
        Self { z, zbar, w: vec![0; s], wbar: vec![0; s] }
    }

    fn add(&self, o: &Self) -> Self {
        Self {
            z: self.z + o.z,
            zbar: self.zbar + o.zbar,
            w: self.w.iter().zip(&o.w).map(|(a, b)| a + b).collect(),
            wbar: self.wbar.iter().zip(&o.wbar).map(|(a, b)| a + b).collect(),
        }
    }

    fn conj(&self) -> Self {
        Self { z: self.zbar, zbar: self.z, w: self.wbar.clone(), wbar: self.w.clone() }
    }

    pub fn is_fractional(&self) -> bool {
        self.w.iter().chain(&self.wbar).any(|&k| k != 0)
    }
}

/// Exponents `ρₘ = βₘ/α₁` and `τₘ = νₘ/α₁` shared by every monomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracExponents {
    pub rho: Vec<f64>,
    pub tau: Vec<f64>,
}

impl FracExponents {
    pub fn from_spec(spec: &SpectralPartition) -> Result<Self> {
        if spec.kind != Kind::Flow || spec.p != 0 || spec.q != 1 || spec.r != 0 {
            return Err(Error::WrongShape("normal form needs a flow spectrum with p = 0, q = 1, r = 0".into()));
        }
        let a = spec.alpha_rate(0);
        Ok(Self {
            rho: (0..spec.s).map(|m| spec.beta_rate(m) / a).collect(),
            tau: (0..spec.s).map(|m| spec.nu_rotation(m) / a).collect(),
        })
    }

    fn sigma(&self, k: &GenIndex) -> f64 {
        k.w.iter().zip(&k.wbar).zip(&self.rho).map(|((a, b), r)| (a + b) as f64 * r).sum()
    }

    fn tau_of(&self, k: &GenIndex) -> f64 {
        k.w.iter().zip(&k.wbar).zip(&self.tau).map(|((a, b), t)| (a - b) as f64 * t).sum()
    }

    pub fn order(&self, k: &GenIndex) -> f64 {
        (k.z + k.zbar) as f64 + self.sigma(k)
    }

    /// Half of the complex exponent of `|ξ|`: `(σ + iτ)/2`.
    fn half_exponent(&self, k: &GenIndex) -> Complex64 {
        Complex64::new(self.sigma(k), self.tau_of(k)) / 2.0
    }

    pub fn eval(&self, k: &GenIndex, xi: Complex64) -> Complex64 {
        let r = xi.norm();
        if r < UNDERFLOW {
            return ZERO;
        }
        let lr = r.ln();
        xi.powi(k.z) * xi.conj().powi(k.zbar) * Complex64::from_polar((self.sigma(k) * lr).exp(), self.tau_of(k) * lr)
    }

    /// Eigenvalue of `R ↦ γR − (∂_ξR γξ + ∂_ξ̄R γ̄ξ̄)` on the monomial `k`.
    pub fn homological_eigenvalue(&self, k: &GenIndex, gamma: Complex64) -> Complex64 {
        let c = self.half_exponent(k);
        gamma - (c + k.z as f64) * gamma - (c + k.zbar as f64) * gamma.conj()
    }
}

/// `k₁ = k₂ + 1`: the kernel of the homological operator with `γ = iω`.
/// The fractional indices never matter.
pub fn resonance_test_2d(k1: i32, k2: i32, _k5: &[u32], _k6: &[u32]) -> bool {
    k1 == k2 + 1
}

fn is_resonant(k: &GenIndex) -> bool {
    k.z == k.zbar + 1
}

type Series = BTreeMap<GenIndex, Complex64>;

struct Algebra<'a> {
    ex: &'a FracExponents,
    max_order: f64,
}

impl Algebra<'_> {
    fn fits(&self, k: &GenIndex) -> bool {
        self.ex.order(k) <= self.max_order + ORDER_TOL
    }

    fn add_into(&self, s: &mut Series, k: GenIndex, c: Complex64) {
        if c != ZERO && self.fits(&k) {
            *s.entry(k).or_insert(ZERO) += c;
        }
    }

    fn mul(&self, a: &Series, b: &Series, budget: f64) -> Series {
        let mut out = Series::new();
        for (ka, ca) in a {
            for (kb, cb) in b {
                let k = ka.add(kb);
                if self.ex.order(&k) <= budget + ORDER_TOL {
                    *out.entry(k).or_insert(ZERO) += ca * cb;
                }
            }
        }
        out
    }

    /// `(1 + u)^e` with terms of order above `budget` dropped.
    fn binomial(&self, u: &Series, e: Complex64, budget: f64, s: usize) -> Result<Series> {
        let mut out = Series::new();
        out.insert(GenIndex::integer(0, 0, s), ONE);
        if u.is_empty() {
            return Ok(out);
        }
        let min = u.keys().map(|k| self.ex.order(k)).fold(f64::INFINITY, f64::min);
        if min <= ORDER_TOL {
            return Err(Error::WrongShape("near-identity transform has a term of order ≤ 1".into()));
        }
        let mut power = u.clone();
        let mut binom = e;
        let mut j = 1.0;
        while !power.is_empty() {
            for (k, c) in &power {
                *out.entry(k.clone()).or_insert(ZERO) += binom * c;
            }
            power = self.mul(&power, u, budget);
            binom *= (e - j) / (j + 1.0);
            j += 1.0;
        }
        Ok(out)
    }

    /// `Σ cₖ Mₖ(ξ + R(ξ))`, with `u = R/ξ` and `v = R̄/ξ̄`.
    fn substitute(&self, f: &Series, u: &Series, v: &Series, s: usize) -> Result<Series> {
        let mut out = Series::new();
        for (k, c) in f {
            let budget = self.max_order - self.ex.order(k);
            if budget < -ORDER_TOL {
                continue;
            }
            let h = self.ex.half_exponent(k);
            let pu = self.binomial(u, h + k.z as f64, budget, s)?;
            let pv = self.binomial(v, h + k.zbar as f64, budget, s)?;
            for (kk, cc) in self.mul(&pu, &pv, budget) {
                self.add_into(&mut out, k.add(&kk), c * cc);
            }
        }
        Ok(out)
    }
}

fn shift(s: &Series, dz: i32, dzbar: i32) -> Series {
    s.iter()
        .map(|(k, c)| {
            let mut k = k.clone();
            k.z += dz;
            k.zbar += dzbar;
            (k, *c)
        })
        .collect()
}

fn conj_series(s: &Series) -> Series {
    s.iter().map(|(k, c)| (k.conj(), c.conj())).collect()
}

/// One term of a normal form or of its near-identity transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormTerm {
    pub index: GenIndex,
    pub coefficient: Complex64,
    pub order: f64,
}

/// `ξ̇ = γξ + Σ Sₖ Mₖ(ξ)` together with the transformation `z = ξ + Σ Fₖ Mₖ(ξ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedNormalForm {
    pub gamma: Complex64,
    pub truncation: u32,
    pub exponents: FracExponents,
    /// Resonant survivors `Sₖ`.
    pub kept: Vec<NormalFormTerm>,
    /// Removed terms: coefficients `Fₖ` of the transformation.
    pub transform: Vec<NormalFormTerm>,
}

fn to_terms(s: &Series, ex: &FracExponents, floor: f64) -> Vec<NormalFormTerm> {
    let mut v: Vec<NormalFormTerm> = s
        .iter()
        .filter(|(_, c)| c.norm() > floor)
        .map(|(k, c)| NormalFormTerm { index: k.clone(), coefficient: *c, order: ex.order(k) })
        .collect();
    v.sort_by(|a, b| a.order.total_cmp(&b.order).then_with(|| a.index.cmp(&b.index)));
    v
}

/// Normal form of `ż = γz + Σ Eₖ Mₖ(z)` up to order `truncation`.
///
/// Every term with `k₁ = k₂ + 1` is kept; all others are removed by the
/// homological equations using the full `γ`.
pub fn normalize_series(
    gamma: Complex64,
    terms: &[(GenIndex, Complex64)],
    ex: &FracExponents,
    truncation: u32,
) -> Result<ExtendedNormalForm> {
    let s = ex.rho.len();
    let alg = Algebra { ex, max_order: truncation as f64 };
    let mut f = Series::new();
    f.insert(GenIndex::integer(1, 0, s), gamma);
    for (k, c) in terms {
        if k.w.len() != s || k.wbar.len() != s {
            return Err(Error::WrongShape(format!("monomial {k:?} does not match {s} slaved modes")));
        }
        alg.add_into(&mut f, k.clone(), *c);
    }
    let scale = f.values().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = 1e-15 * scale;
    let linear = GenIndex::integer(1, 0, s);

    let mut kept = Series::new();
    let mut tr = Series::new();
    let mut level = f64::NEG_INFINITY;
    loop {
        let res = residual(&alg, &f, &kept, &tr, gamma, s)?;
        let next = res
            .iter()
            .filter(|(k, c)| c.norm() > floor && **k != linear && ex.order(k) > level + ORDER_TOL)
            .map(|(k, _)| ex.order(k))
            .fold(f64::INFINITY, f64::min);
        if !next.is_finite() {
            break;
        }
        for (k, c) in res.iter().filter(|(k, c)| c.norm() > floor && (ex.order(k) - next).abs() <= ORDER_TOL) {
            if is_resonant(k) {
                *kept.entry(k.clone()).or_insert(ZERO) += c;
                continue;
            }
            if ex.order(k) <= 1.0 + ORDER_TOL {
                return Err(Error::WrongShape(format!("cannot remove the order-{:.3} term {k:?}", ex.order(k))));
            }
            let d = ex.homological_eigenvalue(k, gamma);
            if d.norm() < SMALL_DIVISOR_REL * gamma.norm() {
                let index = [k.z, k.zbar].iter().chain(&k.w).chain(&k.wbar).map(|&x| x.max(0) as u32).collect();
                return Err(Error::SmallDivisor { component: 0, index, value: d.norm() });
            }
            *tr.entry(k.clone()).or_insert(ZERO) -= c / d;
        }
        level = next;
    }
    Ok(ExtendedNormalForm {
        gamma,
        truncation,
        exponents: ex.clone(),
        kept: to_terms(&kept, ex, 0.0),
        transform: to_terms(&tr, ex, 0.0),
    })
}

/// `f(ξ + R) − (1 + ∂_ξR)(γξ + S) − ∂_ξ̄R (γ̄ξ̄ + S̄)`.
fn residual(alg: &Algebra, f: &Series, kept: &Series, tr: &Series, gamma: Complex64, s: usize) -> Result<Series> {
    let u = shift(tr, -1, 0);
    let v = shift(&conj_series(tr), 0, -1);
    let mut res = alg.substitute(f, &u, &v, s)?;
    let mut xidot = kept.clone();
    *xidot.entry(GenIndex::integer(1, 0, s)).or_insert(ZERO) += gamma;
    let xibardot = conj_series(&xidot);
    for (k, c) in &xidot {
        alg.add_into(&mut res, k.clone(), -c);
    }
    let mut dxi = Series::new();
    let mut dxibar = Series::new();
    for (k, c) in tr {
        let h = alg.ex.half_exponent(k);
        let mut a = k.clone();
        a.z -= 1;
        *dxi.entry(a).or_insert(ZERO) += c * (h + k.z as f64);
        let mut b = k.clone();
        b.zbar -= 1;
        *dxibar.entry(b).or_insert(ZERO) += c * (h + k.zbar as f64);
    }
    let max = alg.max_order;
    for (k, c) in alg.mul(&dxi, &xidot, max).into_iter().chain(alg.mul(&dxibar, &xibardot, max)) {
        alg.add_into(&mut res, k, -c);
    }
    Ok(res)
}

/// Normal form of a reduced model fitted on a 2D fractional dictionary.
pub fn extended_normalform_2d(reduced: &ReducedFit, spec: &SpectralPartition) -> Result<ExtendedNormalForm> {
    let dict = &reduced.dictionary;
    if dict.shape != Shape::TwoD || reduced.kind != Kind::Flow {
        return Err(Error::WrongShape("normal form needs a 2D flow model".into()));
    }
    let ex = FracExponents::from_spec(spec)?;
    let coefs = reduced
        .complex_coefficients()
        .ok_or_else(|| Error::WrongShape("model has no complex coefficients".into()))?;
    let s = ex.rho.len();
    let mut gamma = Complex64::new(spec.alpha_omega[0][0], spec.alpha_omega[0][1]);
    let mut terms = Vec::new();
    for (m, c) in dict.active().zip(coefs) {
        let mi = &m.multi_index;
        let pad = |v: &[u32]| (0..s).map(|i| v.get(i).copied().unwrap_or(0) as i32).collect::<Vec<_>>();
        let k = GenIndex { z: mi.k2[0] as i32, zbar: mi.k3[0] as i32, w: pad(&mi.k5), wbar: pad(&mi.k6) };
        if k == GenIndex::integer(1, 0, s) {
            gamma = c;
        } else if k == GenIndex::integer(0, 1, s) {
            if c.norm() > 1e-6 * gamma.norm().max(c.norm()) {
                return Err(Error::WrongShape(format!("linear part is not diagonal (z̄ coefficient {c})")));
            }
        } else {
            terms.push((k, c));
        }
    }
    normalize_series(gamma, &terms, &ex, dict.truncation)
}

impl ExtendedNormalForm {
    /// `ξ̇` at `ξ`.
    pub fn eval(&self, xi: Complex64) -> Complex64 {
        self.gamma * xi + self.kept.iter().map(|t| t.coefficient * self.exponents.eval(&t.index, xi)).sum::<Complex64>()
    }

    /// `z = ξ + R(ξ)`.
    pub fn to_original(&self, xi: Complex64) -> Complex64 {
        xi + self.transform.iter().map(|t| t.coefficient * self.exponents.eval(&t.index, xi)).sum::<Complex64>()
    }

    /// `ṙ/r + iφ̇` at amplitude `r` from every kept term.
    fn polar_rate(&self, r: f64) -> Complex64 {
        let lr = r.ln();
        self.gamma
            + self
                .kept
                .iter()
                .map(|t| {
                    let e = (2 * t.index.zbar) as f64 + self.exponents.sigma(&t.index);
                    t.coefficient * Complex64::from_polar((e * lr).exp(), self.exponents.tau_of(&t.index) * lr)
                })
                .sum::<Complex64>()
    }

    /// Instantaneous frequency from all kept terms.
    pub fn backbone_exact(&self, r: &[f64]) -> Vec<(f64, f64)> {
        r.iter().map(|&x| (x, self.polar_rate(x).im)).collect()
    }

    /// Instantaneous damping `ṙ/r` from all kept terms.
    pub fn damping_exact(&self, r: &[f64]) -> Vec<(f64, f64)> {
        r.iter().map(|&x| (x, self.polar_rate(x).re)).collect()
    }

    fn coef(&self, k: &GenIndex) -> Complex64 {
        self.kept.iter().find(|t| &t.index == k).map_or(ZERO, |t| t.coefficient)
    }

    /// Polar constants of the cubic truncation (single slaved mode,
    /// `½ < β₁/α₁ < 2`).
    pub fn polar(&self) -> Result<NormalForm2D> {
        if self.exponents.rho.len() != 1 {
            return Err(Error::WrongShape("polar truncation needs exactly one slaved pair".into()));
        }
        let rho = self.exponents.rho[0];
        if !(0.5 < rho && rho < 2.0) {
            return Err(Error::RatioOutOfRange(rho));
        }
        let k = |z: i32, zbar: i32, w: i32, wbar: i32| GenIndex { z, zbar, w: vec![w], wbar: vec![wbar] };
        let cubic = self.coef(&k(2, 1, 0, 0));
        let (p1, q_p1, r1, q_r1) = harmonic(self.coef(&k(1, 0, 1, 0)), self.coef(&k(1, 0, 0, 1)));
        let d = self.coef(&k(1, 0, 1, 1));
        let (p3, q_p3, r3, q_r3) = harmonic(self.coef(&k(1, 0, 2, 0)), self.coef(&k(1, 0, 0, 2)));
        Ok(NormalForm2D {
            alpha1: self.gamma.re,
            omega1: self.gamma.im,
            a: cubic.re,
            b: cubic.im,
            p: [p1, d.re, p3],
            r: [r1, d.im, r3],
            q: [q_p1, q_p3, q_r1, q_r3],
            beta_over_alpha: rho,
            nu_over_alpha: self.exponents.tau[0],
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Amplitude/phase of `Re` and `Im` of `b e^{inθ} + c e^{−inθ}` as
/// `P sin(nθ + q)`.
fn harmonic(b: Complex64, c: Complex64) -> (f64, f64, f64, f64) {
    let (xr, yr) = (b.re + c.re, c.im - b.im);
    let (xi, yi) = (b.im + c.im, b.re - c.re);
    (xr.hypot(yr), xr.atan2(yr), xi.hypot(yi), xi.atan2(yi))
}

/// Real polar normal form
/// `ṙ/r = α₁ + Ar² + P₁r^ρ sin(θ+q₁) + P₂r^{2ρ} + P₃r^{2ρ} sin(2θ+q₂)`,
/// `φ̇ = ω₁ + Br² + R₁r^ρ sin(θ+q₃) + R₂r^{2ρ} + R₃r^{2ρ} sin(2θ+q₄)`,
/// with `ρ = β₁/α₁` and `θ = (ν₁/α₁) log r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalForm2D {
    pub alpha1: f64,
    pub omega1: f64,
    pub a: f64,
    pub b: f64,
    pub p: [f64; 3],
    pub r: [f64; 3],
    /// Phases of the P₁, P₃, R₁, R₃ harmonics.
    pub q: [f64; 4],
    pub beta_over_alpha: f64,
    pub nu_over_alpha: f64,
}

impl NormalForm2D {
    /// Primary-SSM form: no fractional terms.
    pub fn primary(alpha1: f64, omega1: f64, a: f64, b: f64, beta_over_alpha: f64, nu_over_alpha: f64) -> Self {
        Self { alpha1, omega1, a, b, p: [0.0; 3], r: [0.0; 3], q: [0.0; 4], beta_over_alpha, nu_over_alpha }
    }

    fn terms(&self, r: f64, base: f64, cubic: f64, c: [f64; 3], q1: f64, q2: f64) -> f64 {
        let rho = self.beta_over_alpha;
        let th = self.nu_over_alpha * r.ln();
        base + cubic * r * r
            + c[0] * r.powf(rho) * (th + q1).sin()
            + c[1] * r.powf(2.0 * rho)
            + c[2] * r.powf(2.0 * rho) * (2.0 * th + q2).sin()
    }

    pub fn frequency(&self, r: f64) -> f64 {
        self.terms(r, self.omega1, self.b, self.r, self.q[2], self.q[3])
    }

    pub fn damping_rate(&self, r: f64) -> f64 {
        self.terms(r, self.alpha1, self.a, self.p, self.q[0], self.q[1])
    }
}

fn check_grid(r: &[f64]) -> Result<()> {
    match r.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        Some(bad) => Err(Error::DomainError(format!("amplitude grid must be positive, got {bad}"))),
        None => Ok(()),
    }
}

/// `Ω(r)` on a positive amplitude grid.
pub fn backbone(nf: &NormalForm2D, r: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_grid(r)?;
    Ok(r.iter().map(|&x| (x, nf.frequency(x))).collect())
}

/// `κ(r)` on a positive amplitude grid.
pub fn damping(nf: &NormalForm2D, r: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_grid(r)?;
    Ok(r.iter().map(|&x| (x, nf.damping_rate(x))).collect())
}

/// Two-column `r,<name>` CSV.
pub fn write_curve_csv<W: Write>(w: W, name: &str, curve: &[(f64, f64)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["r", name])?;
    for (r, v) in curve {
        wr.write_record([format!("{r:e}"), format!("{v:e}")])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ex(rho: f64, tau: f64) -> FracExponents {
        FracExponents { rho: vec![rho], tau: vec![tau] }
    }

    fn k(z: i32, zbar: i32, w: i32, wbar: i32) -> GenIndex {
        GenIndex { z, zbar, w: vec![w], wbar: vec![wbar] }
    }

    #[test]
    fn resonance_examples() {
        assert!(resonance_test_2d(2, 1, &[0], &[0]));
        assert!(resonance_test_2d(1, 0, &[1], &[0]));
        assert!(!resonance_test_2d(2, 0, &[0], &[0]));
    }

    #[test]
    fn already_normal_cubic() {
        let e = ex(1.3, -4.0);
        let gamma = c(-0.1, 1.0);
        let a = c(-0.2, 0.35);
        let nf = normalize_series(gamma, &[(k(2, 1, 0, 0), a)], &e, 3).unwrap();
        assert!(nf.transform.is_empty());
        assert_eq!(nf.kept.len(), 1);
        let p = nf.polar().unwrap();
        assert!((p.a - a.re).abs() < 1e-15 && (p.b - a.im).abs() < 1e-15);
        assert_eq!(p.p, [0.0; 3]);
        assert_eq!(p.r, [0.0; 3]);
    }

    #[test]
    fn quadratic_term_removed_with_hand_computed_cubic() {
        // ż = γz + e z²: by hand F₂ = e/γ, F₃ = (e/γ)², no resonant cubic
        let gamma = c(-0.05, 1.0);
        let e = c(0.3, -0.2);
        let x = ex(10.0, 0.0);
        let nf = normalize_series(gamma, &[(k(2, 0, 0, 0), e)], &x, 3).unwrap();
        let f2 = nf.transform.iter().find(|t| t.index == k(2, 0, 0, 0)).unwrap().coefficient;
        assert!((f2 - e / gamma).norm() < 1e-14);
        let f3 = nf.transform.iter().find(|t| t.index == k(3, 0, 0, 0)).unwrap().coefficient;
        assert!((f3 - (e / gamma).powi(2)).norm() < 1e-13);
        assert!(nf.kept.is_empty());
    }

    #[test]
    fn mixed_quadratics_produce_known_cubic_coefficient() {
        let gamma = c(-0.02, 1.1);
        let terms = [(k(2, 0, 0, 0), c(0.3, 0.1)), (k(1, 1, 0, 0), c(-0.2, 0.4)), (k(0, 2, 0, 0), c(0.15, -0.05))];
        let nf = normalize_series(gamma, &terms, &ex(10.0, 0.0), 3).unwrap();
        assert!(nf.kept.iter().all(|t| t.index == k(2, 1, 0, 0)));
        conjugacy_scaling(&nf, gamma, &terms, 3.0);
    }

    /// `d/dt z(ξ)` along the normal form minus `f(z(ξ))` must be o(|ξ|^K).
    fn conjugacy_scaling(nf: &ExtendedNormalForm, gamma: Complex64, terms: &[(GenIndex, Complex64)], k: f64) {
        let f = |z: Complex64| gamma * z + terms.iter().map(|(i, c)| c * nf.exponents.eval(i, z)).sum::<Complex64>();
        let defect = |r: f64| {
            let mut worst = 0.0f64;
            for s in 0..12 {
                let xi = Complex64::from_polar(r, 0.3 + s as f64 * 0.5);
                let xidot = nf.eval(xi);
                let h = 1e-4 * r;
                let dz = (nf.to_original(xi + xidot * h) - nf.to_original(xi - xidot * h)) / (2.0 * h);
                worst = worst.max((dz - f(nf.to_original(xi))).norm());
            }
            worst
        };
        let (r1, r2) = (0.05, 0.005);
        let slope = (defect(r1) / defect(r2)).log10();
        assert!(slope > k + 0.2, "slope {slope}");
    }

    #[test]
    fn fractional_terms_follow_the_structural_rule() {
        let e = ex(1.37, -6.2);
        let gamma = c(-0.08, 1.0);
        let mut terms = Vec::new();
        let mut seed = 7u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64 / (1u64 << 31) as f64) - 0.5
        };
        for z in 0..=3 {
            for zbar in 0..=3 {
                for w in 0..=2 {
                    for wbar in 0..=2 {
                        let idx = k(z, zbar, w, wbar);
                        let o = e.order(&idx);
                        if o > 1.0 + 1e-9 && o <= 3.0 + 1e-9 {
                            terms.push((idx, c(next(), next())));
                        }
                    }
                }
            }
        }
        let nf = normalize_series(gamma, &terms, &e, 3).unwrap();
        assert!(nf.kept.iter().all(|t| is_resonant(&t.index)));
        assert!(nf.transform.iter().all(|t| !is_resonant(&t.index)));
        for (idx, _) in terms.iter().filter(|(i, _)| is_resonant(i) && e.order(i) < 2.0) {
            assert!(nf.kept.iter().any(|t| &t.index == idx), "{idx:?} missing");
        }
        conjugacy_scaling(&nf, gamma, &terms, 3.0);
    }

    #[test]
    fn backbone_reduces_without_fractional_terms() {
        let nf = NormalForm2D::primary(-0.1, 1.2, -0.3, 0.7, 1.5, -3.0);
        let r = [0.1, 0.5, 1.0, 2.0];
        for ((x, om), (_, ka)) in backbone(&nf, &r).unwrap().iter().zip(damping(&nf, &r).unwrap()) {
            assert!((om - (1.2 + 0.7 * x * x)).abs() < 1e-15);
            assert!((ka - (-0.1 - 0.3 * x * x)).abs() < 1e-15);
        }
        assert!(backbone(&nf, &[0.0]).is_err());
    }

    #[test]
    fn backbone_at_unit_amplitude() {
        let mut nf = NormalForm2D::primary(-0.1, 1.2, -0.3, 0.7, 1.5, -3.0);
        nf.r = [0.2, 0.05, -0.1];
        nf.q = [0.0, 0.0, 0.4, 0.9];
        let v = nf.frequency(1.0);
        assert!((v - (1.2 + 0.7 + 0.2 * 0.4f64.sin() + 0.05 - 0.1 * 0.9f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn fractional_backbone_oscillates_log_periodically() {
        let mut nf = NormalForm2D::primary(-0.1, 1.0, 0.0, 0.0, 1.5, -3.0);
        nf.r[0] = 1.0;
        let r: Vec<f64> = (0..400).map(|i| 10f64.powf(-4.0 + 3.0 * i as f64 / 399.0)).collect();
        let dev: Vec<f64> = backbone(&nf, &r).unwrap().iter().map(|(_, v)| v - 1.0).collect();
        let changes = dev.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        // θ = −3 log r sweeps 3·3·ln10 ≈ 20.7 rad: about six sign changes
        assert!((5..=8).contains(&changes), "{changes}");
        for (x, d) in r.iter().zip(&dev) {
            assert!(d.abs() <= x.powf(1.5) + 1e-15);
        }
    }

    #[test]
    fn polar_constants_match_direct_rate() {
        let e = ex(1.2, -5.0);
        let gamma = c(-0.1, 1.0);
        let terms = [
            (k(2, 1, 0, 0), c(-0.3, 0.2)),
            (k(1, 0, 1, 0), c(0.1, -0.05)),
            (k(1, 0, 0, 1), c(0.04, 0.07)),
            (k(1, 0, 1, 1), c(0.02, 0.01)),
        ];
        let nf = normalize_series(gamma, &terms, &e, 3).unwrap();
        let p = nf.polar().unwrap();
        for r in [0.05, 0.2, 0.7] {
            let exact = nf.backbone_exact(&[r])[0].1;
            assert!((p.frequency(r) - exact).abs() < 1e-14);
            assert!((p.damping_rate(r) - nf.damping_exact(&[r])[0].1).abs() < 1e-14);
        }
        assert!(matches!(
            normalize_series(gamma, &terms, &ex(5.07, -4.0), 3).unwrap().polar(),
            Err(Error::RatioOutOfRange(_))
        ));
    }

    #[test]
    fn curve_csv_has_two_columns() {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, "omega", &[(0.1, 1.0), (0.2, 1.01)]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("r,omega\n"));
        assert_eq!(s.lines().count(), 3);
    }
}
