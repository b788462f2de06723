//! Built-in testbed systems.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FlowSystem;
use crate::error::{Error, Result};

/// `ẋ = x(y − b)`, `ẏ = c·y(x − a)`.
pub fn planar(a: f64, b: f64, c: f64) -> Result<FlowSystem> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::BadParams(format!("planar requires a, b, c > 0 (got {a}, {b}, {c})")));
    }
    Ok(FlowSystem::new("planar", 2, move |_, x, o| {
        o[0] = x[0] * (x[1] - b);
        o[1] = c * x[1] * (x[0] - a);
    })
    .with_jacobian(move |_, x| DMatrix::from_row_slice(2, 2, &[x[1] - b, x[0], c * x[1], c * (x[0] - a)])))
}

/// Saddle-type Duffing oscillator with a slaved coordinate;
/// `x₃ = a·x₁²` is invariant.
pub fn mixed3d(k: f64, a: f64, c: f64) -> Result<FlowSystem> {
    if !(k > 0.0 && c >= 0.0 && a.is_finite()) {
        return Err(Error::BadParams(format!("mixed3d requires k > 0, c ≥ 0 (got k={k}, c={c})")));
    }
    Ok(FlowSystem::new("mixed3d", 3, move |_, x, o| {
        o[0] = x[1];
        o[1] = x[0] - c * x[1] - x[0].powi(3);
        o[2] = -k * x[2] + k * a * x[0] * x[0] + 2.0 * a * x[0] * x[1];
    })
    .with_jacobian(move |_, x| {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0,
                1.0,
                0.0,
                1.0 - 3.0 * x[0] * x[0],
                -c,
                0.0,
                2.0 * k * a * x[0] + 2.0 * a * x[1],
                2.0 * a * x[0],
                -k,
            ],
        )
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShawPierreParams {
    pub m: f64,
    pub c: f64,
    pub k: f64,
    pub gamma: f64,
    /// Forcing amplitude on the first mass.
    pub amp: f64,
    pub omega: f64,
}

impl Default for ShawPierreParams {
    fn default() -> Self {
        Self { m: 1.0, c: 0.3, k: 1.0, gamma: 0.5, amp: 0.0, omega: 1.07 }
    }
}

impl ShawPierreParams {
    /// The forced configuration with three coexisting periodic orbits.
    pub fn forced() -> Self {
        Self { c: 0.03, amp: 0.11, ..Self::default() }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Constant trace of the jacobian, `−3c/m`.
    pub fn trace(&self) -> f64 {
        -3.0 * self.c / self.m
    }

    pub fn linear_part(&self) -> DMatrix<f64> {
        let (m, c, k) = (self.m, self.c, self.k);
        DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                -2.0 * k / m, -c / m, k / m, c / m, //
                0.0, 0.0, 0.0, 1.0, //
                k / m, c / m, -2.0 * k / m, -2.0 * c / m,
            ],
        )
    }

    /// Mechanical energy; conserved when `c = 0` and `amp = 0`.
    pub fn energy(&self, x: &[f64]) -> f64 {
        let (q1, p1, q2, p2) = (x[0], x[1], x[2], x[3]);
        0.5 * self.m * (p1 * p1 + p2 * p2) + self.k * (q1 * q1 - q1 * q2 + q2 * q2) + 0.25 * self.gamma * q1.powi(4)
    }
}

/// Two-mass chain in `(q₁, p₁, q₂, p₂)`; periodic when `amp > 0`.
pub fn shaw_pierre(params: ShawPierreParams) -> Result<FlowSystem> {
    let ShawPierreParams { m, c, k, gamma, amp, omega } = params;
    if !(m > 0.0 && c >= 0.0 && k > 0.0 && gamma > 0.0 && amp >= 0.0) {
        return Err(Error::BadParams(format!("shaw_pierre requires m, k, γ > 0 and c, A ≥ 0 (got {params:?})")));
    }
    if amp > 0.0 && !(omega > 0.0) {
        return Err(Error::BadParams("forcing frequency must be positive".into()));
    }
    let lin = params.linear_part();
    let lin_j = lin.clone();
    let sys = FlowSystem::new("shaw_pierre", 4, move |t, x, o| {
        for i in 0..4 {
            o[i] = (0..4).map(|j| lin[(i, j)] * x[j]).sum();
        }
        o[1] += amp * (omega * t).cos() - gamma / m * x[0].powi(3);
    })
    .with_jacobian(move |_, x| {
        let mut j = lin_j.clone();
        j[(1, 0)] -= 3.0 * gamma / m * x[0] * x[0];
        j
    });
    Ok(if amp > 0.0 { sys.with_period(params.period()) } else { sys })
}

fn take(params: &BTreeMap<String, f64>, allowed: &[(&str, f64)]) -> Result<Vec<f64>> {
    if let Some(bad) = params.keys().find(|k| !allowed.iter().any(|(n, _)| n == k)) {
        return Err(Error::BadParams(format!("unknown parameter '{bad}'")));
    }
    Ok(allowed.iter().map(|(n, d)| params.get(*n).copied().unwrap_or(*d)).collect())
}

/// Look up a testbed by name; missing parameters take the reference values.
pub fn testbed(name: &str, params: &BTreeMap<String, f64>) -> Result<FlowSystem> {
    match name {
        "planar" => {
            let v = take(params, &[("a", 1.0), ("b", 1.0), ("c", 2.5)])?;
            planar(v[0], v[1], v[2])
        }
        "mixed3d" => {
            let v = take(params, &[("k", std::f64::consts::FRAC_1_SQRT_2), ("a", 0.5), ("c", 0.2)])?;
            mixed3d(v[0], v[1], v[2])
        }
        "shaw_pierre" => {
            let d = ShawPierreParams::default();
            let v = take(
                params,
                &[("m", d.m), ("c", d.c), ("k", d.k), ("gamma", d.gamma), ("A", d.amp), ("omega", d.omega)],
            )?;
            if !(v[1] > 0.0) {
                return Err(Error::BadParams(format!("shaw_pierre damping must be positive, got {}", v[1])));
            }
            shaw_pierre(ShawPierreParams { m: v[0], c: v[1], k: v[2], gamma: v[3], amp: v[4], omega: v[5] })
        }
        other => Err(Error::UnknownTestbed(other.to_string())),
    }
}
