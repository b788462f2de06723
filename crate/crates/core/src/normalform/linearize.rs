//! Formal linearizing transformations `x = y + h(y)` and the SSM family they
//! carry over from the linear system.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{compose, degree, Index, Poly, VecPoly};
use crate::dictionary::{linear_graph_eval, LinearGraphCoeffs};
use crate::dynamics::{flow_map, FlowSystem, ShawPierreParams};
use crate::error::{Error, Result};
use crate::linalg::eig;
use crate::spectrum::{partition_spectrum, Kind, SpectralPartition};

/// Denominators below this fraction of `max|λ|` are treated as resonant.
pub const SMALL_DIVISOR_REL: f64 = 1e-8;
/// Denominators below this fraction of `max|λ|` are logged.
pub const NEAR_RESONANCE_REL: f64 = 1e-3;
/// Relative gap between consecutive truncations that bounds the validity radius.
pub const RADIUS_GAP: f64 = 0.05;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `ẏ = Λy + f(y)` in (complex) modal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySystem {
    pub eigenvalues: Vec<Complex64>,
    /// Nonlinear terms, degree ≥ 2.
    pub terms: VecPoly,
    /// Columns are the modal directions: `x_phys = V y`.
    pub modes: DMatrix<Complex64>,
    /// Master/slaved partition when the modal order follows a spectrum.
    pub spec: Option<SpectralPartition>,
}

impl PolySystem {
    /// System already in diagonal coordinates.
    pub fn new(eigenvalues: Vec<Complex64>, terms: VecPoly) -> Result<Self> {
        let n = eigenvalues.len();
        if terms.dim != n && !terms.terms.is_empty() {
            return Err(Error::WrongShape(format!("{} eigenvalues but {}-dimensional nonlinearity", n, terms.dim)));
        }
        if let Some(k) = terms.terms.keys().find(|k| k.len() != n || degree(k) < 2) {
            return Err(Error::WrongShape(format!("nonlinear term {k:?} has wrong length or degree")));
        }
        let terms = VecPoly { dim: n, nvars: n, terms: terms.terms };
        Ok(Self { eigenvalues, terms, modes: DMatrix::identity(n, n), spec: None })
    }

    /// Diagonalize `ẋ = Ax + f(x)` with the modal coordinates ordered as
    /// `(u, z, z̄, v, w, w̄)` following the master/slaved partition.
    pub fn modal(a: &DMatrix<f64>, f: &VecPoly, master: impl Fn(Complex64) -> bool) -> Result<Self> {
        let n = a.nrows();
        if f.nvars != n || (f.dim != n && !f.terms.is_empty()) {
            return Err(Error::WrongShape("nonlinearity does not match the matrix".into()));
        }
        let spec = partition_spectrum(a, master, Kind::Flow)?;
        let target = spec_layout(&spec);
        let e = eig(a)?;
        let mut used = vec![false; n];
        let mut modes = DMatrix::<Complex64>::zeros(n, n);
        let mut col = 0;
        while col < n {
            let lam = target[col];
            let idx = (0..n)
                .filter(|&i| !used[i])
                .min_by(|&i, &j| (e.values[i] - lam).norm().total_cmp(&(e.values[j] - lam).norm()))
                .ok_or_else(|| Error::WrongShape("eigenvector matching failed".into()))?;
            used[idx] = true;
            let v = e.vectors.column(idx).into_owned();
            modes.set_column(col, &v);
            if lam.im != 0.0 {
                let partner = (0..n)
                    .filter(|&i| !used[i])
                    .min_by(|&i, &j| (e.values[i] - lam.conj()).norm().total_cmp(&(e.values[j] - lam.conj()).norm()))
                    .ok_or_else(|| Error::WrongShape("conjugate eigenvector missing".into()))?;
                used[partner] = true;
                modes.set_column(col + 1, &v.map(|c| c.conj()));
                col += 2;
            } else {
                modes.set_column(col, &v.map(|c| Complex64::new(c.re, 0.0)));
                col += 1;
            }
        }
        let inv = modes.clone().try_inverse().ok_or(Error::DefectiveMatrix { cond: f64::INFINITY })?;
        let maxdeg = f.max_degree();
        let subs: Vec<Poly> = (0..n)
            .map(|i| {
                let mut p = Poly::zero(n);
                for j in 0..n {
                    let mut k = vec![0; n];
                    k[j] = 1;
                    p.add_term(k, modes[(i, j)]);
                }
                p
            })
            .collect();
        let phys = compose(f, &subs, maxdeg);
        let mut terms = VecPoly::zero(n, n);
        for (k, v) in phys.terms {
            let w = &inv * DVector::from_vec(v);
            if w.iter().any(|c| c.norm() > 0.0) {
                terms.terms.insert(k, w.iter().cloned().collect());
            }
        }
        Ok(Self { eigenvalues: target, terms, modes, spec: Some(spec) })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Index of the coordinate carrying the conjugate eigenvalue.
    pub fn conjugate_map(&self) -> Vec<usize> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let target = self.eigenvalues[i].conj();
                (0..n)
                    .min_by(|&a, &b| {
                        let da = (self.eigenvalues[a] - target).norm() + if a == i && target.im != 0.0 { 1e300 } else { 0.0 };
                        let db = (self.eigenvalues[b] - target).norm() + if b == i && target.im != 0.0 { 1e300 } else { 0.0 };
                        da.total_cmp(&db)
                    })
                    .unwrap_or(i)
            })
            .collect()
    }

    /// Largest violation of `f_{σ(j)}(σ(k)) = conj f_j(k)`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        conjugate_defect(&self.terms, &self.conjugate_map())
    }
}

fn conjugate_defect(p: &VecPoly, sigma: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for (k, v) in &p.terms {
        let mut kc = vec![0; k.len()];
        for (i, &e) in k.iter().enumerate() {
            kc[sigma[i]] = e;
        }
        let other = p.terms.get(&kc);
        for (j, c) in v.iter().enumerate() {
            let o = other.map_or(ZERO, |w| w[sigma[j]]);
            worst = worst.max((o - c.conj()).norm());
        }
    }
    worst
}

/// Eigenvalues in the `(λ, α±iω, κ, β±iν)` coordinate order.
pub fn spec_layout(spec: &SpectralPartition) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = spec.lambda.iter().map(|&l| Complex64::new(l, 0.0)).collect();
    for &[a, w] in &spec.alpha_omega {
        out.push(Complex64::new(a, w));
        out.push(Complex64::new(a, -w));
    }
    out.extend(spec.kappa.iter().map(|&k| Complex64::new(k, 0.0)));
    for &[b, v] in &spec.beta_nu {
        out.push(Complex64::new(b, v));
        out.push(Complex64::new(b, -v));
    }
    out
}

/// Shaw–Pierre `ẋ = Ax − (γ/m) q₁³ e₂` with the slow pair as master.
pub fn shaw_pierre_poly_system(params: ShawPierreParams) -> Result<PolySystem> {
    if params.amp != 0.0 {
        return Err(Error::BadParams("polynomial form needs the unforced system".into()));
    }
    let a = params.linear_part();
    let mut f = VecPoly::zero(4, 4);
    f.terms.insert(vec![3, 0, 0, 0], vec![ZERO, Complex64::new(-params.gamma / params.m, 0.0), ZERO, ZERO]);
    let eigs = eig(&a)?.values;
    let slowest = eigs.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    PolySystem::modal(&a, &f, move |z| (z.re.abs() - slowest).abs() < 1e-9 * (1.0 + slowest))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDivisorEntry {
    pub component: usize,
    pub index: Index,
    pub value: f64,
}

/// Truncated Taylor series of the linearizing diffeomorphism `x = y + h(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizingTransform {
    pub order: u32,
    pub eigenvalues: Vec<Complex64>,
    /// `H_𝐤` for `2 ≤ |𝐤| ≤ order`.
    pub coefficients: VecPoly,
    pub modes: DMatrix<Complex64>,
    pub min_divisor: f64,
    /// Near-resonant denominators, and any dropped as resonant.
    pub small_divisors: Vec<SmallDivisorEntry>,
    pub dropped: Vec<SmallDivisorEntry>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LinearizeOptions {
    /// Skip resonant terms instead of failing; the result is then an
    /// approximate conjugacy.
    pub drop_small_divisors: bool,
}

pub fn linearize(sys: &PolySystem, order: u32) -> Result<LinearizingTransform> {
    linearize_with(sys, order, LinearizeOptions::default())
}

/// Solve `Dh(y)Λy − Λh(y) = f(y + h(y))` degree by degree.
pub fn linearize_with(sys: &PolySystem, order: u32, opts: LinearizeOptions) -> Result<LinearizingTransform> {
    if order < 2 {
        return Err(Error::BadParams("linearization order must be at least 2".into()));
    }
    let n = sys.dim();
    let lam = &sys.eigenvalues;
    let scale = lam.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut h = VecPoly::zero(n, n);
    let mut min_div = f64::INFINITY;
    let mut small = Vec::new();
    let mut dropped = Vec::new();
    for d in 2..=order {
        let g = compose(&sys.terms, &shifted_identity(&h), d);
        for (k, v) in g.terms.iter().filter(|(k, _)| degree(k) == d) {
            let kl: Complex64 = k.iter().zip(lam).map(|(&e, l)| l * e as f64).sum();
            let mut coef = vec![ZERO; n];
            for j in 0..n {
                if v[j] == ZERO {
                    continue;
                }
                let den = kl - lam[j];
                let mag = den.norm();
                min_div = min_div.min(mag);
                let entry = SmallDivisorEntry { component: j, index: k.clone(), value: mag };
                if mag < SMALL_DIVISOR_REL * scale {
                    if !opts.drop_small_divisors {
                        return Err(Error::SmallDivisor { component: j, index: k.clone(), value: mag });
                    }
                    dropped.push(entry);
                    continue;
                }
                if mag < NEAR_RESONANCE_REL * scale {
                    small.push(entry);
                }
                coef[j] = v[j] / den;
            }
            if coef.iter().any(|c| *c != ZERO) {
                h.terms.insert(k.clone(), coef);
            }
        }
    }
    Ok(LinearizingTransform {
        order,
        eigenvalues: lam.clone(),
        coefficients: h,
        modes: sys.modes.clone(),
        min_divisor: min_div,
        small_divisors: small,
        dropped,
    })
}

/// Components of `y + h(y)`.
fn shifted_identity(h: &VecPoly) -> Vec<Poly> {
    (0..h.dim)
        .map(|i| {
            let mut p = h.component(i);
            p.add_assign(&Poly::var(h.nvars, i));
            p
        })
        .collect()
}

impl LinearizingTransform {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// The same transform cut at a lower order.
    pub fn truncated(&self, order: u32) -> Self {
        let mut t = self.clone();
        t.order = order.min(self.order);
        t.coefficients.terms.retain(|k, _| degree(k) <= t.order);
        t
    }

    /// `x = y + h(y)` in modal coordinates.
    pub fn apply(&self, y: &[Complex64]) -> Vec<Complex64> {
        let hy = self.coefficients.eval(y);
        y.iter().zip(hy).map(|(a, b)| a + b).collect()
    }

    /// Physical state `V x` (imaginary parts discarded).
    pub fn to_physical(&self, x: &[Complex64]) -> Vec<f64> {
        let v = &self.modes * DVector::from_column_slice(x);
        v.iter().map(|c| c.re).collect()
    }

    /// Modal coordinates of a physical state.
    pub fn to_modal(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let inv = self.modes.clone().try_inverse().ok_or(Error::DefectiveMatrix { cond: f64::INFINITY })?;
        let v = inv * DVector::from_iterator(x.len(), x.iter().map(|&r| Complex64::new(r, 0.0)));
        Ok(v.iter().cloned().collect())
    }

    /// Coefficients `g` of the inverse map `y = x + g(x)`, to the same order.
    pub fn inverse(&self) -> VecPoly {
        let n = self.dim();
        let mut g = VecPoly::zero(n, n);
        for _ in 1..self.order {
            let comp = compose(&self.coefficients, &shifted_identity(&g), self.order);
            let mut next = VecPoly::zero(n, n);
            for (k, v) in comp.terms {
                next.terms.insert(k, v.into_iter().map(|c| -c).collect());
            }
            g = next;
        }
        g
    }

    /// Largest coefficient of `Dh(y)Λy − Λh(y) − f(y + h(y))` over degrees
    /// `2..=order`.
    pub fn conjugacy_residual(&self, sys: &PolySystem) -> f64 {
        let n = self.dim();
        let lam = &self.eigenvalues;
        let fh = compose(&sys.terms, &shifted_identity(&self.coefficients), self.order);
        let mut res: BTreeMap<Index, Vec<Complex64>> = BTreeMap::new();
        for (k, v) in &self.coefficients.terms {
            let kl: Complex64 = k.iter().zip(lam).map(|(&e, l)| l * e as f64).sum();
            res.insert(k.clone(), v.iter().zip(lam).map(|(c, l)| c * (kl - l)).collect());
        }
        for (k, v) in fh.terms {
            let e = res.entry(k).or_insert_with(|| vec![ZERO; n]);
            for (a, b) in e.iter_mut().zip(v) {
                *a -= b;
            }
        }
        VecPoly { dim: n, nvars: n, terms: res }.max_abs_in(2, self.order)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Point `(u, z, z̄, 𝒱, ℰ, ℰ̄)` on a linear invariant graph, in modal order.
pub fn linear_point(spec: &SpectralPartition, coeffs: &LinearGraphCoeffs, u: &[f64], z: &[Complex64]) -> Result<Vec<Complex64>> {
    let (v, w) = linear_graph_eval(spec, coeffs, u, z)?;
    let mut y: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for zk in z {
        y.push(*zk);
        y.push(zk.conj());
    }
    y.extend(v.iter().map(|&x| Complex64::new(x, 0.0)));
    for wm in w {
        y.push(wm);
        y.push(wm.conj());
    }
    Ok(y)
}

fn check_layout(t: &LinearizingTransform, spec: &SpectralPartition) -> Result<()> {
    let layout = spec_layout(spec);
    let ok = layout.len() == t.dim()
        && layout.iter().zip(&t.eigenvalues).all(|(a, b)| (a - b).norm() <= 1e-9 * (1.0 + a.norm()));
    if ok {
        Ok(())
    } else {
        Err(Error::WrongShape("transform coordinates do not follow the spectral partition".into()))
    }
}

fn amplitude(u: &[f64], z: &[Complex64]) -> f64 {
    (u.iter().map(|x| x * x).sum::<f64>() + z.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Physical points of the SSM obtained by mapping the linear invariant graph
/// through `x = y + h(y)`.
pub fn pullback_graph(
    t: &LinearizingTransform,
    spec: &SpectralPartition,
    coeffs: &LinearGraphCoeffs,
    points: &[(Vec<f64>, Vec<Complex64>)],
    radius: f64,
) -> Result<Vec<Vec<f64>>> {
    check_layout(t, spec)?;
    points
        .iter()
        .map(|(u, z)| {
            let a = amplitude(u, z);
            if a > radius {
                return Err(Error::OutOfRadius { amplitude: a, radius });
            }
            let y = linear_point(spec, coeffs, u, z)?;
            Ok(t.to_physical(&t.apply(&y)))
        })
        .collect()
}

fn probe_directions(spec: &SpectralPartition) -> Vec<(Vec<f64>, Vec<Complex64>)> {
    let dim = spec.p + spec.q;
    let mut out = Vec::new();
    for i in 0..dim {
        for s in 0..8 {
            let th = s as f64 * std::f64::consts::PI / 4.0;
            let mut u = vec![0.0; spec.p];
            let mut z = vec![Complex64::new(0.0, 0.0); spec.q];
            if i < spec.p {
                u[i] = if s % 2 == 0 { 1.0 } else { -1.0 };
            } else {
                z[i - spec.p] = Complex64::from_polar(1.0, th);
            }
            out.push((u, z));
        }
    }
    out
}

/// Largest amplitude (on a geometric grid up to `r_max`) at which the order-𝒦
/// and order-(𝒦−1) surfaces still agree to 5% relative.
pub fn validity_radius(t: &LinearizingTransform, spec: &SpectralPartition, coeffs: &LinearGraphCoeffs, r_max: f64) -> Result<f64> {
    check_layout(t, spec)?;
    let lower = t.truncated(t.order - 1);
    let dirs = probe_directions(spec);
    let mut best = 0.0;
    let steps = 240;
    for i in 0..=steps {
        let r = r_max * 10f64.powf(-6.0 * (1.0 - i as f64 / steps as f64));
        for (u, z) in &dirs {
            let u: Vec<f64> = u.iter().map(|x| x * r).collect();
            let z: Vec<Complex64> = z.iter().map(|x| x * r).collect();
            let y = linear_point(spec, coeffs, &u, &z)?;
            let a = t.to_physical(&t.apply(&y));
            let b = lower.to_physical(&lower.apply(&y));
            let gap = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let size = a.iter().map(|p| p * p).sum::<f64>().sqrt();
            if gap > RADIUS_GAP * size {
                return Ok(best);
            }
        }
        best = r;
    }
    Ok(best)
}

/// Distance after time `dt` between the flowed surface point and the image of
/// the linearly flowed parameter point.
pub fn invariance_residual(
    sys: &FlowSystem,
    t: &LinearizingTransform,
    spec: &SpectralPartition,
    coeffs: &LinearGraphCoeffs,
    point: (&[f64], &[Complex64]),
    dt: f64,
    tol: f64,
) -> Result<f64> {
    check_layout(t, spec)?;
    let (u, z) = point;
    let y0 = linear_point(spec, coeffs, u, z)?;
    let x0 = t.to_physical(&t.apply(&y0));
    let x1 = flow_map(sys, &x0, 0.0, dt, tol)?;
    let u1: Vec<f64> = u.iter().zip(&spec.lambda).map(|(x, l)| x * (l * dt).exp()).collect();
    let z1: Vec<Complex64> = z
        .iter()
        .zip(&spec.alpha_omega)
        .map(|(x, &[a, w])| x * (Complex64::new(a, w) * dt).exp())
        .collect();
    let y1 = linear_point(spec, coeffs, &u1, &z1)?;
    let pred = t.to_physical(&t.apply(&y1));
    Ok(x1.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::shaw_pierre;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_quadratic() {
        let lam = -0.7;
        let mut f = VecPoly::zero(1, 1);
        f.terms.insert(vec![2], vec![c(1.0, 0.0)]);
        let sys = PolySystem::new(vec![c(lam, 0.0)], f).unwrap();
        let t = linearize(&sys, 2).unwrap();
        // x = y + y²/λ
        assert!((t.coefficients.terms[&vec![2]][0] - c(1.0 / lam, 0.0)).norm() < 1e-15);
        // y = x − x²/λ + …
        let g = t.inverse();
        assert!((g.terms[&vec![2]][0] - c(-1.0 / lam, 0.0)).norm() < 1e-15);
        assert!(t.conjugacy_residual(&sys) < 1e-15);
    }

    #[test]
    fn scalar_quadratic_matches_closed_form() {
        // ẋ = λx + x² is conjugate to ẏ = λy via x = λy/(λ − y)
        let lam = -0.7;
        let mut f = VecPoly::zero(1, 1);
        f.terms.insert(vec![2], vec![c(1.0, 0.0)]);
        let t = linearize(&PolySystem::new(vec![c(lam, 0.0)], f).unwrap(), 8).unwrap();
        for k in 2..=8u32 {
            let want = lam.powi(1 - k as i32);
            assert!((t.coefficients.terms[&vec![k]][0].re - want).abs() < 1e-12 * want.abs());
        }
    }

    #[test]
    fn linear_system_gives_identity() {
        let sys = PolySystem::new(vec![c(-1.0, 2.0), c(-1.0, -2.0)], VecPoly::zero(2, 2)).unwrap();
        let t = linearize(&sys, 5).unwrap();
        assert!(t.coefficients.terms.is_empty());
    }

    #[test]
    fn resonance_is_reported() {
        // λ₂ = 2λ₁ with the y₁² term in the second equation
        let mut f = VecPoly::zero(2, 2);
        f.terms.insert(vec![2, 0], vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let sys = PolySystem::new(vec![c(-1.0, 0.0), c(-2.0, 0.0)], f).unwrap();
        assert!(matches!(linearize(&sys, 3), Err(Error::SmallDivisor { component: 1, .. })));
        let t = linearize_with(&sys, 3, LinearizeOptions { drop_small_divisors: true }).unwrap();
        assert_eq!(t.dropped.len(), 1);
    }

    #[test]
    fn inverse_composes_to_identity() {
        let sys = shaw_pierre_poly_system(ShawPierreParams::default()).unwrap();
        let t = linearize(&sys, 7).unwrap();
        let g = t.inverse();
        let y = [c(0.01, 0.02), c(0.01, -0.02), c(-0.015, 0.005), c(-0.015, -0.005)];
        let x = t.apply(&y);
        let gx = g.eval(&x);
        let back: Vec<Complex64> = x.iter().zip(gx).map(|(a, b)| a + b).collect();
        let err = back.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn shaw_pierre_modal_form_is_real() {
        let sys = shaw_pierre_poly_system(ShawPierreParams::default()).unwrap();
        assert!(sys.conjugate_symmetry_defect() < 1e-12);
        // cubic only
        assert!(sys.terms.terms.keys().all(|k| degree(k) == 3));
        let spec = sys.spec.as_ref().unwrap();
        assert_eq!((spec.p, spec.q, spec.r, spec.s), (0, 1, 0, 1));
        // modal vector field agrees with the physical one
        let phys = shaw_pierre(ShawPierreParams::default()).unwrap();
        let t = linearize(&sys, 2).unwrap();
        let y = [c(0.3, 0.1), c(0.3, -0.1), c(-0.2, 0.25), c(-0.2, -0.25)];
        let x = t.to_physical(&y);
        let fx = phys.eval(0.0, &x);
        let lin: Vec<Complex64> = y.iter().zip(&sys.eigenvalues).map(|(a, l)| a * l).collect();
        let nl = sys.terms.eval(&y);
        let ydot: Vec<Complex64> = lin.iter().zip(nl).map(|(a, b)| a + b).collect();
        let xdot = t.to_physical(&ydot);
        for (a, b) in fx.iter().zip(&xdot) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shaw_pierre_transform_is_conjugate_symmetric_and_odd() {
        let sys = shaw_pierre_poly_system(ShawPierreParams::default()).unwrap();
        let t = linearize(&sys, 7).unwrap();
        assert!(t.conjugacy_residual(&sys) < 1e-8);
        assert!(conjugate_defect(&t.coefficients, &sys.conjugate_map()) < 1e-10);
        assert!(t.coefficients.terms.keys().all(|k| degree(k) % 2 == 1));
    }

    #[test]
    fn zero_coefficients_give_a_tangent_surface() {
        let sys = shaw_pierre_poly_system(ShawPierreParams::default()).unwrap();
        let spec = sys.spec.clone().unwrap();
        let t = linearize(&sys, 7).unwrap();
        let coeffs = LinearGraphCoeffs::zeros(&spec);
        let r = 1e-4;
        let pts = vec![(vec![], vec![c(r, 0.0)])];
        let x = pullback_graph(&t, &spec, &coeffs, &pts, 1.0).unwrap();
        let lin = t.to_physical(&[c(r, 0.0), c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let dev = x[0].iter().zip(&lin).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-6 * r, "{dev}");
        assert!(matches!(
            pullback_graph(&t, &spec, &coeffs, &[(vec![], vec![c(2.0, 0.0)])], 1.0),
            Err(Error::OutOfRadius { .. })
        ));
    }

    #[test]
    fn validity_radius_is_positive_and_finite() {
        let sys = shaw_pierre_poly_system(ShawPierreParams::default()).unwrap();
        let spec = sys.spec.clone().unwrap();
        let t = linearize(&sys, 7).unwrap();
        let r = validity_radius(&t, &spec, &LinearGraphCoeffs::zeros(&spec), 100.0).unwrap();
        assert!(r > 1e-2 && r < 100.0, "{r}");
    }

    #[test]
    fn transform_json_round_trip() {
        let sys = shaw_pierre_poly_system(ShawPierreParams::default()).unwrap();
        let t = linearize(&sys, 5).unwrap();
        let back = LinearizingTransform::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back.coefficients.terms.len(), t.coefficients.terms.len());
        assert!(t.to_json().unwrap().contains("\"3,0,0,0\""));
    }
}
