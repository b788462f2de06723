//! Sparse multivariate polynomials with complex coefficients, truncated by
//! total degree.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exponent vector `k` of the monomial `yᵏ = y₁^{k₁} ⋯ yₙ^{kₙ}`.
pub type Index = Vec<u32>;

pub fn degree(k: &[u32]) -> u32 {
    k.iter().sum()
}

/// `"2,0,1,0"` form used as a JSON key.
pub fn index_key(k: &[u32]) -> String {
    k.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_index_key(s: &str) -> Result<Index> {
    s.split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| Error::Parse(format!("multi-index '{s}': {e}"))))
        .collect()
}

/// Scalar polynomial in `n` variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Index, Complex64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function `yᵢ`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut k = vec![0; nvars];
        k[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(k, Complex64::new(1.0, 0.0));
        p
    }

    pub fn add_term(&mut self, k: Index, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        *self.terms.entry(k).or_default() += c;
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), *c);
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect() }
    }

    /// Product with all terms of degree above `max` discarded.
    pub fn mul_trunc(&self, other: &Poly, max: u32) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ka, ca) in &self.terms {
            let da = degree(ka);
            for (kb, cb) in &other.terms {
                if da + degree(kb) > max {
                    continue;
                }
                let k: Index = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                out.add_term(k, ca * cb);
            }
        }
        out
    }

    /// Terms of exactly degree `d`.
    pub fn homogeneous(&self, d: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(k, _)| degree(k) == d).map(|(k, c)| (k.clone(), *c)).collect(),
        }
    }

    pub fn eval(&self, y: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| k.iter().zip(y).fold(*c, |acc, (&e, &yi)| acc * yi.powu(e)))
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Vector-valued polynomial: multi-index ↦ coefficient vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VecPoly {
    pub dim: usize,
    pub nvars: usize,
    pub terms: BTreeMap<Index, Vec<Complex64>>,
}

impl VecPoly {
    pub fn zero(dim: usize, nvars: usize) -> Self {
        Self { dim, nvars, terms: BTreeMap::new() }
    }

    pub fn from_components(comps: &[Poly]) -> Self {
        let nvars = comps.first().map_or(0, |p| p.nvars);
        let mut out = Self::zero(comps.len(), nvars);
        for (j, p) in comps.iter().enumerate() {
            for (k, c) in &p.terms {
                out.terms.entry(k.clone()).or_insert_with(|| vec![Complex64::new(0.0, 0.0); comps.len()])[j] += c;
            }
        }
        out
    }

    pub fn component(&self, j: usize) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (k, v) in &self.terms {
            p.add_term(k.clone(), v[j]);
        }
        p
    }

    pub fn components(&self) -> Vec<Poly> {
        (0..self.dim).map(|j| self.component(j)).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|k| degree(k)).max().unwrap_or(0)
    }

    pub fn eval(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (k, v) in &self.terms {
            let m = k.iter().zip(y).fold(Complex64::new(1.0, 0.0), |acc, (&e, &yi)| acc * yi.powu(e));
            for (o, c) in out.iter_mut().zip(v) {
                *o += c * m;
            }
        }
        out
    }

    /// Largest coefficient modulus over terms with degree in `lo..=hi`.
    pub fn max_abs_in(&self, lo: u32, hi: u32) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| (lo..=hi).contains(&degree(k)))
            .flat_map(|(_, v)| v.iter().map(|c| c.norm()))
            .fold(0.0, f64::max)
    }
}

impl Serialize for VecPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, &Vec<Complex64>> = self.terms.iter().map(|(k, v)| (index_key(k), v)).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for VecPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<String, Vec<Complex64>>::deserialize(d)?;
        let mut terms = BTreeMap::new();
        let (mut dim, mut nvars) = (0, 0);
        for (k, v) in m {
            let idx = parse_index_key(&k).map_err(serde::de::Error::custom)?;
            nvars = idx.len();
            dim = v.len();
            terms.insert(idx, v);
        }
        Ok(Self { dim, nvars, terms })
    }
}

/// Substitute `yᵢ ↦ pᵢ` into `f`, keeping degrees up to `max`.
///
/// The substituted polynomials must have no constant term.
pub fn compose(f: &VecPoly, p: &[Poly], max: u32) -> VecPoly {
    let nvars = p.first().map_or(0, |q| q.nvars);
    let maxexp: Vec<u32> = (0..f.nvars).map(|i| f.terms.keys().map(|k| k[i]).max().unwrap_or(0)).collect();
    // powers[i][e] = pᵢ^e
    let powers: Vec<Vec<Poly>> = p
        .iter()
        .zip(&maxexp)
        .map(|(pi, &me)| {
            let mut v = vec![Poly::constant(nvars, Complex64::new(1.0, 0.0))];
            for e in 1..=me {
                let next = v[e as usize - 1].mul_trunc(pi, max);
                v.push(next);
            }
            v
        })
        .collect();
    let mut comps = vec![Poly::zero(nvars); f.dim];
    for (k, coef) in &f.terms {
        let mut m = Poly::constant(nvars, Complex64::new(1.0, 0.0));
        for (i, &e) in k.iter().enumerate() {
            if e > 0 {
                m = m.mul_trunc(&powers[i][e as usize], max);
            }
        }
        for (c, comp) in coef.iter().zip(comps.iter_mut()) {
            if *c != Complex64::new(0.0, 0.0) {
                comp.add_assign(&m.scale(*c));
            }
        }
    }
    VecPoly::from_components(&comps)
}
