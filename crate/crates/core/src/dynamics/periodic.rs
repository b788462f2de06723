//! Time-T maps, their fixed points, and Floquet analysis of periodic orbits.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{flow_map, FlowSystem};
use crate::error::{Error, Result};

/// Time-`T` flow map starting at `t = 0`.
pub fn poincare_map(sys: &FlowSystem, x: &[f64], tol: f64) -> Result<Vec<f64>> {
    let period = sys.period.ok_or_else(|| Error::BadParams(format!("system '{}' has no period", sys.name)))?;
    flow_map(sys, x, 0.0, period, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    StableNode,
    StableSpiral,
    UnstableNode,
    UnstableSpiral,
    Saddle,
    NonHyperbolic,
}

impl Classification {
    /// Classify a fixed point of a map from its multipliers.
    pub fn of_multipliers(mu: &[Complex64]) -> Self {
        let tol = 1e-9;
        if mu.iter().any(|m| (m.norm() - 1.0).abs() < tol) {
            return Self::NonHyperbolic;
        }
        let inside = mu.iter().filter(|m| m.norm() < 1.0).count();
        let spiral = mu.iter().any(|m| m.im.abs() > tol * m.norm().max(1.0));
        match (inside, spiral) {
            (n, false) if n == mu.len() => Self::StableNode,
            (n, true) if n == mu.len() => Self::StableSpiral,
            (0, false) => Self::UnstableNode,
            (0, true) => Self::UnstableSpiral,
            _ => Self::Saddle,
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, Self::StableNode | Self::StableSpiral)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::StableNode => "stable node",
            Self::StableSpiral => "stable spiral",
            Self::UnstableNode => "unstable node",
            Self::UnstableSpiral => "unstable spiral",
            Self::Saddle => "saddle",
            Self::NonHyperbolic => "non-hyperbolic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub location: Vec<f64>,
    pub residual: f64,
    /// Eigenvalues of the map jacobian, by decreasing modulus.
    pub multipliers: Vec<Complex64>,
    pub jacobian: DMatrix<f64>,
    pub classification: Classification,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 50, max_halvings: 30 }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual<F>(map: &F, x: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let y = map(x)?;
    if y.len() != x.len() {
        return Err(Error::LengthMismatch(y.len(), x.len()));
    }
    Ok(y.iter().zip(x).map(|(a, b)| a - b).collect())
}

/// Central-difference jacobian of `map` with step `1e-6·(1 + ‖x‖)`.
pub fn map_jacobian<F>(map: &F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let h = 1e-6 * (1.0 + norm(x));
    let mut j = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for c in 0..n {
        xp[c] = x[c] + h;
        let fp = map(&xp)?;
        xp[c] = x[c] - h;
        let fm = map(&xp)?;
        xp[c] = x[c];
        for r in 0..n {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let mut mu: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    mu.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
    mu
}

/// Damped Newton iteration on `map(x) − x`.
pub fn newton_fixed_point<F>(map: F, guess: &[f64], opts: NewtonOptions) -> Result<FixedPointResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = guess.len();
    let mut x = guess.to_vec();
    let mut g = residual(&map, &x)?;
    let mut gn = norm(&g);
    let mut it = 0;
    while gn >= opts.tol {
        if it >= opts.max_iter {
            return Err(Error::NoConvergence { iterations: it, residual: gn });
        }
        it += 1;
        let jg = map_jacobian(&map, &x)? - DMatrix::identity(n, n);
        let rhs = DVector::from_iterator(n, g.iter().map(|v| -v));
        let dx = jg
            .lu()
            .solve(&rhs)
            .ok_or(Error::NoConvergence { iterations: it, residual: gn })?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let xt: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + step * d).collect();
            if let Ok(gt) = residual(&map, &xt) {
                let gtn = norm(&gt);
                if gtn.is_finite() && gtn < gn {
                    x = xt;
                    g = gt;
                    gn = gtn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations: it, residual: gn });
        }
    }
    let jacobian = map_jacobian(&map, &x)?;
    let multipliers = sorted_eigenvalues(&jacobian);
    Ok(FixedPointResult {
        location: x,
        residual: gn,
        classification: Classification::of_multipliers(&multipliers),
        multipliers,
        jacobian,
        iterations: it,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetResult {
    pub multipliers: Vec<Complex64>,
    pub monodromy: DMatrix<f64>,
    /// `det(M)`.
    pub determinant: f64,
    /// `exp(∫₀ᵀ tr Df(x(t)) dt)`.
    pub liouville: f64,
    pub classification: Classification,
}

impl FloquetResult {
    pub fn liouville_defect(&self) -> f64 {
        ((self.determinant - self.liouville) / self.liouville).abs()
    }
}

/// Monodromy matrix of the orbit through `x0` by integrating the variational
/// equation and the trace of the jacobian alongside the flow.
pub fn floquet(sys: &FlowSystem, x0: &[f64], period: f64, tol: f64) -> Result<FloquetResult> {
    let n = sys.dim();
    if x0.len() != n {
        return Err(Error::WrongShape(format!("point has {} entries, system {}", x0.len(), n)));
    }
    let inner = sys.clone();
    let aug = FlowSystem::new(format!("{}-variational", sys.name), n + n * n + 1, move |t, y, o| {
        let x = &y[..n];
        inner.eval_into(t, x, &mut o[..n]);
        let j = inner.jacobian(t, x);
        // Φ stored column-major after the state
        let phi = &y[n..n + n * n];
        for c in 0..n {
            for r in 0..n {
                o[n + c * n + r] = (0..n).map(|k| j[(r, k)] * phi[c * n + k]).sum();
            }
        }
        o[n + n * n] = j.trace();
    });
    let mut y0 = x0.to_vec();
    y0.extend(DMatrix::<f64>::identity(n, n).iter());
    y0.push(0.0);
    let y = flow_map(&aug, &y0, 0.0, period, tol)?;
    let defect = norm(&y[..n].iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
    if defect > 1e-6 * (1.0 + norm(x0)) {
        return Err(Error::NotPeriodic { defect });
    }
    let monodromy = DMatrix::from_column_slice(n, n, &y[n..n + n * n]);
    let multipliers = sorted_eigenvalues(&monodromy);
    Ok(FloquetResult {
        determinant: monodromy.clone().lu().determinant(),
        liouville: y[n + n * n].exp(),
        classification: Classification::of_multipliers(&multipliers),
        multipliers,
        monodromy,
    })
}

/// Seeds for the three coexisting orbits of the forced Shaw–Pierre system at
/// `c = 0.03, Ω = 1.07, A = 0.11`: the forced response continued from the
/// origin, and two larger-amplitude points from a frequency sweep.
pub fn shaw_pierre_forced_seeds() -> [[f64; 4]; 3] {
    [[0.0, 0.0, 0.0, 0.0], [-0.57, 0.16, -0.67, 0.14], [0.94, 0.53, 1.07, 0.59]]
}
