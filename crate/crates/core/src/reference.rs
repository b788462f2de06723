//! Published reference data: the plane Couette spectrum and reduced maps, and
//! the Shaw–Pierre spectra.

use crate::dictionary::{dictionary_integer, dictionary_map_1d_with, prune_near_integer, Branch, DictOptions, Dictionary, NEAR_INTEGER_TOL};
use crate::error::{Error, Result};
use crate::fit::ReducedFit;
use crate::spectrum::{Kind, SpectralPartition};

/// `log|λ₁|` of the base state.
pub const COUETTE_LOG_LAMBDA: f64 = -0.035068;
/// `log κ₁ … log κ₄`.
pub const COUETTE_LOG_KAPPA: [f64; 4] = [-0.069776, -0.073369, -0.140274, -0.168877];
/// Published `log κⱼ / log|λ₁|`.
pub const COUETTE_RATIOS: [f64; 4] = [1.989703, 2.092178, 4.000013, 4.815674];

/// Reduced-map coefficients `R` keyed by `(k₁, k₄₂, k₄₄)`.
pub const COUETTE_FRACTIONAL: [((u32, u32, u32), f64); 10] = [
    ((1, 0, 0), 0.96182),
    ((2, 0, 0), 0.82616),
    ((0, 1, 0), -1.03809),
    ((3, 0, 0), 0.43671),
    ((1, 1, 0), 0.35338),
    ((2, 1, 0), -0.61552),
    ((4, 0, 0), -1.65568),
    ((0, 2, 0), 0.67765),
    ((0, 0, 1), 4.52449),
    ((5, 0, 0), -3.47146),
];

/// Integer-power quintic map, coefficients of `J, J², …, J⁵`.
pub const COUETTE_INTEGER: [f64; 5] = [0.96262, 0.04265, -0.10282, 0.24485, -0.14738];

/// Shaw–Pierre origin eigenvalues at `m = 1, c = 0.3, k = 1, γ = 0.5`:
/// `(α, ω)` and `(β, ν)`.
pub const SHAW_PIERRE_MASTER: [f64; 2] = [-0.0741, 1.0027];
pub const SHAW_PIERRE_SLAVED: [f64; 2] = [-0.3759, 1.6812];
/// Multipliers `λ₁, λ₂, β ± iν` reported for the forced saddle orbit.
pub const SHAW_PIERRE_SADDLE: [f64; 4] = [1.0835, 0.7726, -0.4132, 0.6474];

pub fn couette_spectrum() -> SpectralPartition {
    SpectralPartition::new(
        Kind::Map,
        vec![COUETTE_LOG_LAMBDA.exp()],
        vec![],
        COUETTE_LOG_KAPPA.iter().map(|l| l.exp()).collect(),
        vec![],
    )
    .expect("reference spectrum is hyperbolic")
}

/// Quintic positive-branch dictionary with the near-integer ratios pruned.
pub fn couette_dictionary() -> Result<Dictionary> {
    let opts = DictOptions { branch: Branch::PositiveOnly, ..Default::default() };
    Ok(prune_near_integer(&dictionary_map_1d_with(&couette_spectrum(), 5, &opts)?, NEAR_INTEGER_TOL))
}

/// The fractional quintic reduced map on [`couette_dictionary`].
pub fn couette_fractional_model() -> Result<ReducedFit> {
    let dict = couette_dictionary()?;
    let coef = dict
        .active()
        .map(|m| {
            let mi = &m.multi_index;
            let key = (mi.k1[0], mi.k4[1], mi.k4[3]);
            COUETTE_FRACTIONAL
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::WrongShape(format!("no reference coefficient for {mi}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    ReducedFit::from_coefficients(dict, Kind::Map, vec![coef])
}

pub fn couette_integer_model() -> Result<ReducedFit> {
    ReducedFit::from_coefficients(dictionary_integer(1, 5, Kind::Map, true), Kind::Map, vec![COUETTE_INTEGER.to_vec()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{predict, Horizon};

    #[test]
    fn fractional_model_covers_every_term() {
        let m = couette_fractional_model().unwrap();
        assert_eq!(m.coefficients[0].len(), 10);
        // J ↦ R(J) fixes the origin
        assert_eq!(m.eval(&[0.0]), vec![0.0]);
    }

    #[test]
    fn small_amplitudes_decay() {
        let m = couette_fractional_model().unwrap();
        let p = predict(&m, &[0.05], Horizon::Steps(200)).unwrap();
        let j: Vec<f64> = p.trajectory.component(0);
        assert!(j.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn integer_model_gives_a_different_trajectory() {
        let f = couette_fractional_model().unwrap();
        let i = couette_integer_model().unwrap();
        for j0 in [0.05, 0.1, 0.2] {
            let a = predict(&f, &[j0], Horizon::Steps(40)).unwrap().trajectory.component(0);
            let b = predict(&i, &[j0], Horizon::Steps(40)).unwrap().trajectory.component(0);
            let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(gap > 1e-4);
        }
    }
}
