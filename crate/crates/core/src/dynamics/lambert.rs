//! Principal-branch Lambert W and the exact invariant graph family of the planar testbed.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BRANCH_TOL: f64 = 1e-14;

/// Principal branch `W₀(z)`, `z ≥ −1/e`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if !z.is_finite() || z < branch - BRANCH_TOL {
        return Err(Error::OutOfDomain(z));
    }
    if z <= branch + BRANCH_TOL {
        return Ok(-1.0);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let mut w = if z < -0.25 {
        let p = (2.0 * (E * z + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if z.abs() <= 0.25 {
        z - z * z + 1.5 * z * z * z
    } else if z > E {
        let l = z.ln();
        l - l.ln()
    } else {
        (1.0 + z).ln()
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Integration constant `C` of the exact graph family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationConstant {
    Value(f64),
    /// The member containing both the origin and the saddle `(a, b)`.
    ThroughSaddle,
}

/// `C*` selecting the heteroclinic member.
pub fn through_saddle_constant(a: f64, b: f64, c: f64) -> f64 {
    b * (b / E * a.powf(-c * a / b)).ln() + c * a / b
}

fn check_params(a: f64, b: f64, c: f64) -> Result<()> {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        Ok(())
    } else {
        Err(Error::BadParams(format!("planar parameters must be positive, got a={a}, b={b}, c={c}")))
    }
}

fn w_argument(a: f64, b: f64, c: f64, constant: IntegrationConstant, x: f64) -> Result<f64> {
    check_params(a, b, c)?;
    if !(x >= 0.0) {
        return Err(Error::OutOfDomain(x));
    }
    let cc = match constant {
        IntegrationConstant::Value(v) => v,
        IntegrationConstant::ThroughSaddle => through_saddle_constant(a, b, c),
    };
    let z = -(1.0 / b) * (-c * x / b + cc / b).exp() * x.powf(c * a / b);
    // rounding at the saddle, where the argument touches the branch point
    let branch = -1.0 / E;
    Ok(if z < branch && z > branch - 1e-12 { branch } else { z })
}

/// `h(x) = −b·W₀(−(1/b)·e^{−cx/b + C/b}·x^{ca/b})`.
pub fn exact_graph_planar(a: f64, b: f64, c: f64, constant: IntegrationConstant, x: f64) -> Result<f64> {
    let z = w_argument(a, b, c, constant, x)?;
    Ok(-b * lambert_w0(z)?)
}

/// Reduced vector field `ẋ = x·(h(x) − b)` on the graph.
pub fn exact_reduced_planar(a: f64, b: f64, c: f64, constant: IntegrationConstant, x: f64) -> Result<f64> {
    Ok(x * (exact_graph_planar(a, b, c, constant, x)? - b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{flow_map, planar};
    use approx::assert_abs_diff_eq;

    #[test]
    fn special_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(lambert_w0(E).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lambert_w0(-1.0 / E).unwrap(), -1.0, epsilon = 1e-15);
        assert!(matches!(lambert_w0(-0.5), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn residual_across_range() {
        let zs = [-0.367879, -0.36, -0.3, -0.1, -1e-8, 1e-8, 0.3, 1.0, 2.0, 10.0, 1e3, 1e10, 1e100];
        for z in zs {
            let w = lambert_w0(z).unwrap();
            assert!(w >= -1.0);
            assert!((w * w.exp() - z).abs() < 1e-13 * z.abs().max(1.0), "z={z}");
        }
    }

    #[test]
    fn heteroclinic_member_hits_both_fixed_points() {
        let c = IntegrationConstant::ThroughSaddle;
        assert_abs_diff_eq!(through_saddle_constant(1.0, 1.0, 2.5), 1.5, epsilon = 1e-14);
        assert_eq!(exact_graph_planar(1.0, 1.0, 2.5, c, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(exact_graph_planar(1.0, 1.0, 2.5, c, 1.0).unwrap(), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(exact_reduced_planar(1.0, 1.0, 2.5, c, 1.0).unwrap(), 0.0, epsilon = 1e-6);
        assert!(exact_graph_planar(1.0, 1.0, 2.5, c, -0.1).is_err());
        // a finite constant never yields the singular h ≡ 0
        let h = exact_graph_planar(1.0, 1.0, 2.5, IntegrationConstant::Value(-5.0), 0.3).unwrap();
        assert!(h > 0.0);
    }

    #[test]
    fn graph_is_invariant_under_the_flow() {
        // start on the graph, flow, and land back on it
        let c = IntegrationConstant::ThroughSaddle;
        let sys = planar(1.0, 1.0, 2.5).unwrap();
        for x0 in [0.2, 0.5, 0.9] {
            let y0 = exact_graph_planar(1.0, 1.0, 2.5, c, x0).unwrap();
            let x1 = flow_map(&sys, &[x0, y0], 0.0, 1.5, 1e-12).unwrap();
            let h = exact_graph_planar(1.0, 1.0, 2.5, c, x1[0]).unwrap();
            assert_abs_diff_eq!(x1[1], h, epsilon = 1e-8);
        }
    }

    #[test]
    fn graph_satisfies_its_invariance_ode() {
        // h'(x)·x(h − b) = c·h·(x − a), integrated from just below the saddle
        let (a, b, c) = (1.0, 1.0, 2.5);
        let k = IntegrationConstant::ThroughSaddle;
        let x0 = 0.95;
        let y0 = exact_graph_planar(a, b, c, k, x0).unwrap();
        let ode = crate::dynamics::FlowSystem::new("graph", 1, move |x, y, o| o[0] = c * y[0] * (x - a) / (x * (y[0] - b)));
        let y = flow_map(&ode, &[y0], x0, 0.5, 1e-12).unwrap();
        assert_abs_diff_eq!(y[0], exact_graph_planar(a, b, c, k, 0.5).unwrap(), epsilon = 1e-8);
    }
}
