//! ODE integration, stroboscopic sampling, Poincaré maps, fixed points of maps,
//! Floquet analysis, the built-in testbeds and the Lambert-W oracle.

mod integrator;
mod lambert;
mod periodic;
mod testbeds;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use integrator::{flow_map, integrate, integrate_with, sample_as_map, IntegrateOptions};
pub use lambert::{exact_graph_planar, exact_reduced_planar, lambert_w0, through_saddle_constant, IntegrationConstant};
pub use periodic::{
    floquet, map_jacobian, newton_fixed_point, poincare_map, shaw_pierre_forced_seeds, Classification,
    FixedPointResult, FloquetResult, NewtonOptions,
};
pub use testbeds::{mixed3d, planar, shaw_pierre, testbed, ShawPierreParams};

type Rhs = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type Jac = dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync;

/// A (possibly time-periodic) vector field `ẋ = f(t, x)`.
#[derive(Clone)]
pub struct FlowSystem {
    pub name: String,
    dim: usize,
    rhs: Arc<Rhs>,
    jac: Option<Arc<Jac>>,
    /// Forcing period, if any.
    pub period: Option<f64>,
}

impl fmt::Debug for FlowSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jac.is_some())
            .field("period", &self.period)
            .finish()
    }
}

impl FlowSystem {
    pub fn new(name: impl Into<String>, dim: usize, rhs: impl Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Self { name: name.into(), dim, rhs: Arc::new(rhs), jac: None, period: None }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jac.is_some()
    }

    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.rhs)(t, x, out)
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.rhs)(t, x, &mut out);
        out
    }

    /// Analytic jacobian when available, forward differences otherwise.
    pub fn jacobian(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        match &self.jac {
            Some(j) => j(t, x),
            None => self.jacobian_forward(t, x),
        }
    }

    pub fn jacobian_forward(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let f0 = self.eval(t, x);
        let mut jm = DMatrix::zeros(self.dim, self.dim);
        let mut xp = x.to_vec();
        for j in 0..self.dim {
            let h = 1e-7 * (1.0 + x[j].abs());
            xp[j] = x[j] + h;
            let f1 = self.eval(t, &xp);
            xp[j] = x[j];
            for i in 0..self.dim {
                jm[(i, j)] = (f1[i] - f0[i]) / h;
            }
        }
        jm
    }

    pub fn jacobian_central(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let mut jm = DMatrix::zeros(self.dim, self.dim);
        let mut xp = x.to_vec();
        for j in 0..self.dim {
            let h = 1e-5 * (1.0 + x[j].abs());
            xp[j] = x[j] + h;
            let fp = self.eval(t, &xp);
            xp[j] = x[j] - h;
            let fm = self.eval(t, &xp);
            xp[j] = x[j];
            for i in 0..self.dim {
                jm[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jm
    }
}
