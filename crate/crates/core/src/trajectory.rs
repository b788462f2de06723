//! Time- or iteration-indexed state samples.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Kind;

/// Ordered samples `(t, x)` of a flow (`t` continuous) or a map (`t` the
/// iteration index). Flow trajectories produced by the integrator also carry
/// the vector field at each sample, which enables Hermite interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: Kind,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    derivs: Option<Vec<Vec<f64>>>,
}

const UNIFORM_TOL: f64 = 1e-9;

impl Trajectory {
    pub fn new(kind: Kind, times: Vec<f64>, states: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(kind, times, states, None)
    }

    pub fn with_derivatives(
        kind: Kind,
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
        derivs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if derivs.len() != states.len() {
            return Err(Error::LengthMismatch(derivs.len(), states.len()));
        }
        Self::build(kind, times, states, Some(derivs))
    }

    /// Map trajectory indexed `0, 1, 2, ...`.
    pub fn from_iterates(states: Vec<Vec<f64>>) -> Result<Self> {
        let times = (0..states.len()).map(|i| i as f64).collect();
        Self::new(Kind::Map, times, states)
    }

    /// Map trajectory of a scalar series.
    pub fn from_scalar_series(series: &[f64]) -> Result<Self> {
        Self::from_iterates(series.iter().map(|&x| vec![x]).collect())
    }

    fn build(kind: Kind, times: Vec<f64>, states: Vec<Vec<f64>>, derivs: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::LengthMismatch(times.len(), states.len()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("sample index must be strictly increasing".into()));
        }
        if let Some(d) = states.first().map(Vec::len) {
            if states.iter().any(|s| s.len() != d) {
                return Err(Error::Parse("state dimension varies between samples".into()));
            }
            if let Some(dv) = &derivs {
                if dv.iter().any(|s| s.len() != d) {
                    return Err(Error::Parse("derivative dimension differs from state".into()));
                }
            }
        }
        Ok(Self { kind, times, states, derivs })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn derivatives(&self) -> Option<&[Vec<f64>]> {
        self.derivs.as_deref()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i]
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    /// Time series of one coordinate.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// Constant sample spacing, if the index is uniform.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let h = self.times[1] - self.times[0];
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= UNIFORM_TOL * h.abs().max(1.0))
            .then_some(h)
    }

    /// Keep only the selected coordinates.
    pub fn project(&self, coords: &[usize]) -> Result<Self> {
        if let Some(&bad) = coords.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::WrongShape(format!("coordinate {bad} out of range")));
        }
        let pick = |v: &Vec<f64>| coords.iter().map(|&c| v[c]).collect::<Vec<f64>>();
        Ok(Self {
            kind: self.kind,
            times: self.times.clone(),
            states: self.states.iter().map(pick).collect(),
            derivs: self.derivs.as_ref().map(|d| d.iter().map(pick).collect()),
        })
    }

    /// Apply a pointwise transformation to every state (derivatives dropped).
    pub fn map_states(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        Self::new(self.kind, self.times.clone(), self.states.iter().map(|s| f(s)).collect())
    }

    /// First `n` samples.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            kind: self.kind,
            times: self.times[..n].to_vec(),
            states: self.states[..n].to_vec(),
            derivs: self.derivs.as_ref().map(|d| d[..n].to_vec()),
        }
    }

    /// State at time `t` by cubic Hermite interpolation when derivatives are
    /// stored, otherwise by cubic Lagrange interpolation on the nearest four
    /// samples.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        let (t0, t1) = match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::OutOfRange { t, t0: f64::NAN, t1: f64::NAN }),
        };
        let slack = 1e-12 * (t1 - t0).abs().max(1.0);
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::OutOfRange { t, t0, t1 });
        }
        let n = self.len();
        if n == 1 {
            return Ok(self.states[0].clone());
        }
        let i = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return Ok(self.states[i].clone()),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        if let Some(d) = &self.derivs {
            let h = self.times[i + 1] - self.times[i];
            let s = (t - self.times[i]) / h;
            let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            let (y0, y1, f0, f1) = (&self.states[i], &self.states[i + 1], &d[i], &d[i + 1]);
            return Ok((0..self.dim())
                .map(|k| h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k])
                .collect());
        }
        let lo = i.saturating_sub(1).min(n.saturating_sub(4));
        let idx: Vec<usize> = (lo..(lo + 4).min(n)).collect();
        let mut out = vec![0.0; self.dim()];
        for &a in &idx {
            let w: f64 = idx
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| (t - self.times[b]) / (self.times[a] - self.times[b]))
                .product();
            for (o, y) in out.iter_mut().zip(&self.states[a]) {
                *o += w * y;
            }
        }
        Ok(out)
    }

    /// Write as CSV with header `t,x1,..,xn` (flow) or `idx,x1,..,xn` (map).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let first = match self.kind {
            Kind::Flow => "t".to_string(),
            Kind::Map => "idx".to_string(),
        };
        let header: Vec<String> = std::iter::once(first).chain((1..=self.dim()).map(|i| format!("x{i}"))).collect();
        wtr.write_record(&header)?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let mut rec = Vec::with_capacity(x.len() + 1);
            rec.push(match self.kind {
                Kind::Map if t.fract() == 0.0 => format!("{}", *t as i64),
                _ => format!("{t:e}"),
            });
            rec.extend(x.iter().map(|v| format!("{v:e}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Read the CSV schema written by [`Trajectory::write_csv`]; the kind is
    /// taken from the first header field.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers()?.clone();
        let kind = match headers.get(0) {
            Some("t") => Kind::Flow,
            Some("idx") => Kind::Map,
            other => return Err(Error::Parse(format!("unexpected first column {other:?}; want 't' or 'idx'"))),
        };
        for (i, h) in headers.iter().enumerate().skip(1) {
            if h != format!("x{i}") {
                return Err(Error::Parse(format!("unexpected column '{h}'")));
            }
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
            if vals.len() != headers.len() {
                return Err(Error::Parse(format!("row {} has {} fields", line + 2, vals.len())));
            }
            times.push(vals[0]);
            states.push(vals[1..].to_vec());
        }
        Self::new(kind, times, states)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_non_increasing_index() {
        assert!(Trajectory::new(Kind::Flow, vec![0.0, 0.0], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(Trajectory::new(Kind::Flow, vec![0.0, 1.0], vec![vec![1.0], vec![2.0, 3.0]]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let tr = Trajectory::new(Kind::Flow, vec![0.0, 0.5, 1.0], vec![vec![1.0, 2.0], vec![0.5, 1.0], vec![0.25, 0.125]]).unwrap();
        let s = tr.to_csv_string().unwrap();
        assert!(s.starts_with("t,x1,x2\n"));
        let back = Trajectory::read_csv(s.as_bytes()).unwrap();
        assert_eq!(back, tr);
        let m = Trajectory::from_scalar_series(&[0.1, 0.05]).unwrap();
        let s = m.to_csv_string().unwrap();
        assert!(s.starts_with("idx,x1\n0,"));
        assert_eq!(Trajectory::read_csv(s.as_bytes()).unwrap(), m);
        assert!(Trajectory::read_csv("time,x1\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn lagrange_interpolation_is_exact_for_cubics() {
        let times: Vec<f64> = (0..8).map(|i| i as f64 * 0.3).collect();
        let states = times.iter().map(|t| vec![t * t * t - 2.0 * t]).collect();
        let tr = Trajectory::new(Kind::Flow, times, states).unwrap();
        let t = 1.37;
        assert_abs_diff_eq!(tr.interpolate(t).unwrap()[0], t * t * t - 2.0 * t, epsilon = 1e-12);
        assert!(matches!(tr.interpolate(5.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn hermite_interpolation_is_exact_for_cubics() {
        let times = vec![0.0, 1.0, 2.5];
        let states = times.iter().map(|t| vec![t * t * t]).collect();
        let derivs = times.iter().map(|t| vec![3.0 * t * t]).collect();
        let tr = Trajectory::with_derivatives(Kind::Flow, times, states, derivs).unwrap();
        assert_abs_diff_eq!(tr.interpolate(1.7).unwrap()[0], 1.7f64.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn uniform_step_detection() {
        let tr = Trajectory::from_scalar_series(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(tr.uniform_step(), Some(1.0));
        let tr = Trajectory::new(Kind::Flow, vec![0.0, 1.0, 3.0], vec![vec![0.0]; 3]).unwrap();
        assert_eq!(tr.uniform_step(), None);
    }
}
