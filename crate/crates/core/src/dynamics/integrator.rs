//! Dormand–Prince 5(4) with its native continuous extension.

use super::FlowSystem;
use crate::error::{Error, Result};
use crate::spectrum::Kind;
use crate::trajectory::Trajectory;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    /// Absolute and relative local error tolerance, in `[1e-12, 1e-3]`.
    pub tol: f64,
    /// Output times; when `None`, every accepted step is recorded.
    pub t_eval: Option<Vec<f64>>,
    pub max_steps: usize,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    /// Largest allowed step.
    pub h_max: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { tol: 1e-9, t_eval: None, max_steps: 2_000_000, h0: None, h_max: f64::INFINITY }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Default::default() }
    }
}

struct Step {
    t: f64,
    h: f64,
    y1: Vec<f64>,
    f1: Vec<f64>,
    cont: [Vec<f64>; 5],
}

impl Step {
    fn dense(&self, t: f64) -> Vec<f64> {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.cont;
        (0..r1.len())
            .map(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
            .collect()
    }
}

struct Stepper<'a> {
    sys: &'a FlowSystem,
    tol: f64,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(sys: &'a FlowSystem, tol: f64) -> Self {
        let n = sys.dim();
        Self { sys, tol, k: std::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n] }
    }

    fn err_scale(&self, a: f64, b: f64) -> f64 {
        self.tol + self.tol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self, t: f64, y: &[f64], f0: &[f64], dir: f64) -> f64 {
        let n = y.len() as f64;
        let rms = |v: &mut dyn Iterator<Item = f64>| (v.map(|x| x * x).sum::<f64>() / n).sqrt();
        let d0 = rms(&mut y.iter().map(|&v| v / self.err_scale(v, v)));
        let d1 = rms(&mut y.iter().zip(f0).map(|(&v, &f)| f / self.err_scale(v, v)));
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: Vec<f64> = y.iter().zip(f0).map(|(&v, &f)| v + dir * h0 * f).collect();
        self.sys.eval_into(t + dir * h0, &y1, &mut self.tmp);
        let d2 = rms(&mut y.iter().zip(f0).zip(&self.tmp).map(|((&v, &a), &b)| (b - a) / self.err_scale(v, v))) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1)
    }

    /// One trial step from `(t, y)` with first stage `f0`; returns the error norm.
    fn attempt(&mut self, t: f64, y: &[f64], f0: &[f64], h: f64) -> (f64, Vec<f64>) {
        let n = y.len();
        self.k[0].copy_from_slice(f0);
        let stage = |k: &[Vec<f64>; 7], coeffs: &[f64], out: &mut Vec<f64>| {
            for i in 0..n {
                let mut s = 0.0;
                for (j, c) in coeffs.iter().enumerate() {
                    s += c * k[j][i];
                }
                out[i] = y[i] + h * s;
            }
        };
        let rows: [(&[f64], f64); 6] = [
            (&[A21], C2),
            (&[A31, A32], C3),
            (&[A41, A42, A43], C4),
            (&[A51, A52, A53, A54], C5),
            (&[A61, A62, A63, A64, A65], 1.0),
            (&[A71, 0.0, A73, A74, A75, A76], 1.0),
        ];
        let mut ynew = vec![0.0; n];
        for (s, (coeffs, c)) in rows.iter().enumerate() {
            stage(&self.k, coeffs, &mut self.tmp);
            if s == 5 {
                ynew.copy_from_slice(&self.tmp);
            }
            self.sys.eval_into(t + c * h, &self.tmp, &mut self.k[s + 1]);
        }
        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * self.k[0][i] + E3 * self.k[2][i] + E4 * self.k[3][i] + E5 * self.k[4][i] + E6 * self.k[5][i]
                    + E7 * self.k[6][i]);
            let sc = self.err_scale(y[i], ynew[i]);
            err += (e / sc) * (e / sc);
        }
        ((err / n as f64).sqrt(), ynew)
    }

    fn continuation(&self, y0: &[f64], y1: &[f64], h: f64) -> [Vec<f64>; 5] {
        let n = y0.len();
        let k = &self.k;
        let mut c: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
        for i in 0..n {
            let ydiff = y1[i] - y0[i];
            let bspl = h * k[0][i] - ydiff;
            c[0][i] = y0[i];
            c[1][i] = ydiff;
            c[2][i] = bspl;
            c[3][i] = ydiff - h * k[6][i] - bspl;
            c[4][i] = h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
        c
    }
}

/// Drive the stepper from `t0` to `t1` (either direction), calling `on_step`
/// after every accepted step.
fn drive(
    sys: &FlowSystem,
    ic: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegrateOptions,
    mut on_step: impl FnMut(&Step) -> Result<()>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if ic.len() != sys.dim() {
        return Err(Error::WrongShape(format!("initial condition has {} entries, system {}", ic.len(), sys.dim())));
    }
    if !(1e-13..=1e-3 + 1e-15).contains(&opts.tol) {
        return Err(Error::BadParams(format!("tolerance {} outside [1e-12, 1e-3]", opts.tol)));
    }
    if ic.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: t0 });
    }
    let mut y = ic.to_vec();
    let mut f = sys.eval(t0, &y);
    if t1 == t0 {
        return Ok((y, f));
    }
    let dir = (t1 - t0).signum();
    let mut st = Stepper::new(sys, opts.tol);
    let mut h = opts.h0.unwrap_or_else(|| st.initial_step(t0, &y, &f, dir)).abs().min(opts.h_max);
    let mut t = t0;
    let mut steps = 0;
    let mut last_rejected = false;
    while dir * (t1 - t) > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        steps += 1;
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let (err, ynew) = st.attempt(t, &y, &f, dir * h);
        if !err.is_finite() || ynew.iter().any(|v| !v.is_finite()) {
            h *= FAC_MIN;
            last_rejected = true;
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::NonFinite { t });
            }
            continue;
        }
        if err <= 1.0 {
            let tn = if last { t1 } else { t + dir * h };
            let cont = st.continuation(&y, &ynew, dir * h);
            let fnew = st.k[6].clone();
            let step = Step { t, h: dir * h, y1: ynew.clone(), f1: fnew.clone(), cont };
            on_step(&step)?;
            t = tn;
            y = ynew;
            f = fnew;
            let mut fac = if err == 0.0 { FAC_MAX } else { SAFETY * err.powf(-0.2) };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(opts.h_max);
            last_rejected = false;
        } else {
            h *= (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            last_rejected = true;
        }
    }
    Ok((y, f))
}

/// Integrate `sys` from `ic` over `t_span = (t0, t1)` with `t1 > t0`.
pub fn integrate(sys: &FlowSystem, ic: &[f64], t_span: (f64, f64), tol: f64) -> Result<Trajectory> {
    integrate_with(sys, ic, t_span, &IntegrateOptions::with_tol(tol))
}

pub fn integrate_with(sys: &FlowSystem, ic: &[f64], t_span: (f64, f64), opts: &IntegrateOptions) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::BadParams("integration span must satisfy t1 > t0".into()));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut derivs = Vec::new();
    match &opts.t_eval {
        None => {
            times.push(t0);
            states.push(ic.to_vec());
            derivs.push(sys.eval(t0, ic));
            drive(sys, ic, t0, t1, opts, |s| {
                times.push(s.t + s.h);
                states.push(s.y1.clone());
                derivs.push(s.f1.clone());
                Ok(())
            })?;
            if let Some(last) = times.last_mut() {
                *last = t1;
            }
        }
        Some(te) => {
            if te.windows(2).any(|w| !(w[1] > w[0])) || te.iter().any(|&t| t < t0 || t > t1) {
                return Err(Error::BadParams("t_eval must be increasing and inside the span".into()));
            }
            let mut next = 0;
            while next < te.len() && te[next] <= t0 {
                times.push(te[next]);
                states.push(ic.to_vec());
                derivs.push(sys.eval(te[next], ic));
                next += 1;
            }
            drive(sys, ic, t0, t1, opts, |s| {
                let tend = s.t + s.h;
                while next < te.len() && te[next] <= tend {
                    let y = if (te[next] - tend).abs() <= 1e-14 * tend.abs().max(1.0) { s.y1.clone() } else { s.dense(te[next]) };
                    derivs.push(sys.eval(te[next], &y));
                    times.push(te[next]);
                    states.push(y);
                    next += 1;
                }
                Ok(())
            })?;
            // points that coincide with t1 up to rounding
            if next < te.len() {
                let (y, _) = drive(sys, ic, t0, t1, opts, |_| Ok(()))?;
                while next < te.len() {
                    derivs.push(sys.eval(te[next], &y));
                    times.push(te[next]);
                    states.push(y.clone());
                    next += 1;
                }
            }
        }
    }
    if states.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: t1 });
    }
    Trajectory::with_derivatives(Kind::Flow, times, states, derivs)
}

/// State at `t1` starting from `ic` at `t0`; `t1 < t0` integrates backwards.
pub fn flow_map(sys: &FlowSystem, ic: &[f64], t0: f64, t1: f64, tol: f64) -> Result<Vec<f64>> {
    Ok(drive(sys, ic, t0, t1, &IntegrateOptions::with_tol(tol), |_| Ok(()))?.0)
}

/// Stroboscopic resampling at `t₀ + ıΔ` for every grid time inside the span.
pub fn sample_as_map(traj: &Trajectory, delta: f64) -> Result<Trajectory> {
    if !(delta > 0.0) {
        return Err(Error::BadParams("sampling interval must be positive".into()));
    }
    let times = traj.times();
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::OutOfRange { t: delta, t0: f64::NAN, t1: f64::NAN }),
    };
    if delta > t1 - t0 {
        return Err(Error::OutOfRange { t: t0 + delta, t0, t1 });
    }
    let n = ((t1 - t0) / delta * (1.0 + 1e-12)).floor() as usize;
    let states = (0..=n)
        .map(|i| traj.interpolate((t0 + i as f64 * delta).min(t1)))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_iterates(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn decay() -> FlowSystem {
        FlowSystem::new("decay", 1, |_, x, out| out[0] = -x[0])
    }

    #[test]
    fn exponential_decay() {
        for tol in [1e-6, 1e-9, 1e-12] {
            let tr = integrate(&decay(), &[1.0], (0.0, 1.0), tol).unwrap();
            assert_abs_diff_eq!(tr.last().unwrap()[0], (-1.0f64).exp(), epsilon = 20.0 * tol);
        }
    }

    #[test]
    fn convergence_order() {
        // global error vs number of steps for fixed steps (adaptivity disabled)
        let err = |h: f64| {
            let opts = IntegrateOptions { tol: 1e-3, h0: Some(h), h_max: h, ..Default::default() };
            let tr = integrate_with(&decay(), &[1.0], (0.0, 2.0), &opts).unwrap();
            (tr.last().unwrap()[0] - (-2.0f64).exp()).abs()
        };
        let e1 = err(0.2);
        let e2 = err(0.1);
        let slope = (e1 / e2).log2();
        assert!(slope >= 4.5, "observed order {slope}");
    }

    #[test]
    fn tolerance_halving_reduces_error_like_fifth_order() {
        let err = |tol: f64| {
            let tr = integrate(&decay(), &[1.0], (0.0, 5.0), tol).unwrap();
            (tr.last().unwrap()[0] - (-5.0f64).exp()).abs()
        };
        // error ~ tol^{p/(p+1)}: ratio of errors over a decade of tol
        let e1 = err(1e-6);
        let e2 = err(1e-8);
        assert!(e2 < e1 / 10.0);
    }

    #[test]
    fn dense_output_matches_analytic() {
        let te: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let opts = IntegrateOptions { tol: 1e-10, t_eval: Some(te.clone()), ..Default::default() };
        let tr = integrate_with(&decay(), &[1.0], (0.0, 5.0), &opts).unwrap();
        assert_eq!(tr.len(), te.len());
        for (t, x) in tr.times().iter().zip(tr.states()) {
            assert_abs_diff_eq!(x[0], (-t).exp(), epsilon = 1e-9);
        }
    }

    #[test]
    fn backward_flow_inverts_forward() {
        let osc = FlowSystem::new("osc", 2, |_, x, o| {
            o[0] = x[1];
            o[1] = -x[0] - 0.1 * x[1];
        });
        let y = flow_map(&osc, &[1.0, 0.0], 0.0, 3.0, 1e-11).unwrap();
        let back = flow_map(&osc, &y, 3.0, 0.0, 1e-11).unwrap();
        assert_abs_diff_eq!(back[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(back[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn blow_up_reported() {
        let sys = FlowSystem::new("blowup", 1, |_, x, o| o[0] = x[0] * x[0]);
        let r = integrate(&sys, &[1.0], (0.0, 2.0), 1e-8);
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFinite { .. })));
    }

    #[test]
    fn bad_tolerance_rejected() {
        assert!(integrate(&decay(), &[1.0], (0.0, 1.0), 1e-2).is_err());
    }

    #[test]
    fn stroboscopic_sampling_of_linear_flow() {
        let te: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let opts = IntegrateOptions { tol: 1e-12, t_eval: Some(te), ..Default::default() };
        let tr = integrate_with(&decay(), &[1.0], (0.0, 5.0), &opts).unwrap();
        let m = sample_as_map(&tr, 1.0).unwrap();
        assert_eq!(m.len(), 6);
        for w in m.states().windows(2) {
            assert_abs_diff_eq!(w[1][0] / w[0][0], (-1.0f64).exp(), epsilon = 1e-9);
        }
        assert!(matches!(sample_as_map(&tr, 10.0), Err(Error::OutOfRange { .. })));
        // off-grid sampling goes through the Hermite interpolant
        let fine = integrate(&decay(), &[1.0], (0.0, 5.0), 1e-12).unwrap();
        let m = sample_as_map(&fine, 0.7).unwrap();
        for (i, x) in m.states().iter().enumerate() {
            assert_abs_diff_eq!(x[0], (-0.7 * i as f64).exp(), epsilon = 1e-7);
        }
    }
}
