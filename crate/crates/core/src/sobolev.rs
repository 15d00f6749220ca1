//! Fractional Sobolev norms on the torus.
//!
//! `‖f‖_{L^p_s}` is the discrete `L^p` norm (pointwise Euclidean magnitude,
//! cell-volume weights) of `(1 + |ξ|²)^{s/2} f̂` transformed back. The graph
//! norm on `H^{s,p}(curl)` combines `u` and `curl u` in the `p`-power form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficient::{holder_seminorm, scalar_holder_seminorm, CoefficientField, PairStrategy};
use crate::error::{Error, Result};
use crate::grid::{Grid3, ScalarField, Topology, VectorField};
use crate::operators::curl;
use crate::random::{random_scalar_field, random_vector_field, rng};
use crate::spectral::SpectralGrid;
use crate::table::IndexTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormIndex {
    pub s: f64,
    pub p: f64,
}

impl NormIndex {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) || !s.is_finite() {
            return Err(Error::InvalidIndices {
                s,
                p,
                reason: "need finite s and 1 < p < ∞".into(),
            });
        }
        Ok(Self { s, p })
    }

    /// Conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn invp(&self) -> f64 {
        1.0 / self.p
    }

    /// Range where the duality `(L^p_s)' = L^q_{-s}` is used: `-1 + 1/p < s < 1/p`.
    pub fn require_dual_range(&self) -> Result<()> {
        let ip = self.invp();
        if -1.0 + ip < self.s && self.s < ip {
            Ok(())
        } else {
            Err(Error::InvalidIndices {
                s: self.s,
                p: self.p,
                reason: "need -1 + 1/p < s < 1/p".into(),
            })
        }
    }
}

/// `(w Σ |vᵢ|^p)^{1/p}`
pub fn weighted_lp(values: &[f64], p: f64, weight: f64) -> f64 {
    let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    // scale out the maximum to keep large p finite
    let sum: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * (weight * sum).powf(1.0 / p)
}

/// Applies the Bessel potential `(1 + |ξ|²)^{s/2}` componentwise.
pub fn bessel_potential(f: &VectorField, s: f64) -> Result<VectorField> {
    let sg = SpectralGrid::new(f.grid())?;
    sg.check(f)?;
    if s == 0.0 {
        return Ok(f.clone());
    }
    sg.map_modes(f, |_, full2, v| {
        let m = (1.0 + full2).powf(0.5 * s);
        v.map(|z| z * m)
    })
}

pub fn bessel_norm(f: &VectorField, idx: NormIndex) -> Result<f64> {
    f.grid().require(Topology::Torus)?;
    let j = bessel_potential(f, idx.s)?;
    Ok(weighted_lp(&j.magnitude()?, idx.p, f.grid().cell_volume()))
}

pub fn scalar_bessel_norm(g: &ScalarField, idx: NormIndex) -> Result<f64> {
    let sg = SpectralGrid::new(g.grid())?;
    let vals = if idx.s == 0.0 {
        g.values().to_vec()
    } else {
        let mut hat = sg.forward_scalar(g.values());
        sg.for_each_mode(|i, _, full2| hat[i] *= (1.0 + full2).powf(0.5 * idx.s));
        sg.inverse_scalar(hat)
    };
    Ok(weighted_lp(&vals, idx.p, g.grid().cell_volume()))
}

/// `(‖u‖_{L^p_s}^p + ‖curl u‖_{L^p_s}^p)^{1/p}`
pub fn curl_graph_norm(u: &VectorField, idx: NormIndex) -> Result<f64> {
    let a = bessel_norm(u, idx)?;
    let b = bessel_norm(&curl(u)?, idx)?;
    Ok(p_combine(a, b, idx.p))
}

pub(crate) fn p_combine(a: f64, b: f64, p: f64) -> f64 {
    let m = a.max(b);
    if m == 0.0 {
        return 0.0;
    }
    m * ((a / m).powf(p) + (b / m).powf(p)).powf(1.0 / p)
}

fn check_winf_exponent(s: f64) -> Result<()> {
    if (0.0..1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::InvalidExponent(s))
    }
}

/// `‖g‖_∞ + |g|_{C^{0,s}}` for a scalar field (semi-norm omitted at `s = 0`).
pub fn winf_norm(g: &ScalarField, s: f64) -> Result<f64> {
    winf_norm_with(g, s, PairStrategy::default())
}

pub fn winf_norm_with(g: &ScalarField, s: f64, strategy: PairStrategy) -> Result<f64> {
    check_winf_exponent(s)?;
    let semi = if s == 0.0 {
        0.0
    } else {
        scalar_holder_seminorm(g, s, strategy)?.value
    };
    Ok(g.sup_norm() + semi)
}

/// Matrix version with the spectral norm pointwise.
pub fn winf_norm_coefficient(a: &CoefficientField, s: f64) -> Result<f64> {
    check_winf_exponent(s)?;
    let semi = if s == 0.0 {
        0.0
    } else {
        holder_seminorm(a, s)?.value
    };
    Ok(a.sup_norm() + semi)
}

/// Source of the Kato-Ponce constant `C(s, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
#[derive(Default)]
pub enum KatoPonceModel {
    /// Only `C(0, p) = 1` is known.
    #[default]
    UnitAtSZero,
    UserTable {
        table: IndexTable,
    },
    /// Maxima of sampled ratios; discrete lower bounds of the constant.
    Empirical {
        seed: u64,
        trials: usize,
        table: IndexTable,
    },
}

impl KatoPonceModel {
    /// `C(s, p)`; exactly 1 at `s = 0`, never below 1 for `s > 0`.
    pub fn constant(&self, s: f64, p: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        let missing = || Error::ModelMissing {
            missing: vec![(s, p)],
        };
        let table = match self {
            KatoPonceModel::UnitAtSZero => return Err(missing()),
            KatoPonceModel::UserTable { table } | KatoPonceModel::Empirical { table, .. } => table,
        };
        table.lookup(s, p).map(|c| c.max(1.0)).ok_or_else(missing)
    }

    pub fn provenance(&self) -> String {
        match self {
            KatoPonceModel::UnitAtSZero => "C(s,p): unit at s = 0, no values for s > 0".into(),
            KatoPonceModel::UserTable { table } => {
                format!("C(s,p): user table with {} entries", table.entries.len())
            }
            KatoPonceModel::Empirical {
                seed,
                trials,
                table,
            } => format!(
                "C(s,p): empirical lower bounds from {trials} trials, seed {seed}, {} entries",
                table.entries.len()
            ),
        }
    }

    /// Persistable table form of a user or empirical model.
    pub fn table(&self) -> Option<&IndexTable> {
        match self {
            KatoPonceModel::UnitAtSZero => None,
            KatoPonceModel::UserTable { table } | KatoPonceModel::Empirical { table, .. } => {
                Some(table)
            }
        }
    }
}

/// `‖f g‖_{L^p_s} / (‖f‖_{L^p_s} ‖g‖_{W^{s,∞}})`
pub fn katoponce_ratio(f: &VectorField, g: &ScalarField, idx: NormIndex) -> Result<f64> {
    let num = bessel_norm(&g.multiply(f)?, idx)?;
    let den = bessel_norm(f, idx)? * winf_norm(g, idx.s)?;
    if den == 0.0 {
        return Err(Error::InvalidParameter("degenerate Kato-Ponce pair".into()));
    }
    Ok(num / den)
}

/// Default Fourier bandwidth of random trial fields.
pub const TRIAL_BANDWIDTH: usize = 3;

/// Trial `t` uses seed `seed + t`; results do not depend on scheduling.
pub fn katoponce_ratios(
    grid: &Grid3,
    idx: NormIndex,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    grid.require(Topology::Torus)?;
    if idx.s < 0.0 {
        return Err(Error::InvalidIndices {
            s: idx.s,
            p: idx.p,
            reason: "Kato-Ponce estimate needs s >= 0".into(),
        });
    }
    let band = TRIAL_BANDWIDTH
        .min(grid.n().iter().min().unwrap() / 2 - 1)
        .max(1);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng(seed.wrapping_add(t as u64));
            use rand::Rng;
            let f = random_vector_field(grid, band, r.gen())?;
            let g0 = random_scalar_field(grid, band, r.gen())?;
            let offset: f64 = r.gen_range(-1.0..1.0);
            let g = ScalarField::from_vec(*grid, g0.values().iter().map(|v| v + offset).collect())?;
            katoponce_ratio(&f, &g, idx)
        })
        .collect()
}

/// Largest sampled ratio, recorded as an empirical model entry.
pub fn katoponce_estimate(
    grid: &Grid3,
    idx: NormIndex,
    trials: usize,
    seed: u64,
) -> Result<KatoPonceModel> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let ratios = katoponce_ratios(grid, idx, trials, seed)?;
    let max = ratios.iter().cloned().fold(0.0_f64, f64::max);
    Ok(KatoPonceModel::Empirical {
        seed,
        trials,
        table: IndexTable::new(vec![crate::table::TableEntry {
            s: idx.s,
            p: idx.p,
            value: max,
        }]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Placement;
    use std::f64::consts::PI;

    fn idx(s: f64, p: f64) -> NormIndex {
        NormIndex::new(s, p).unwrap()
    }

    #[test]
    fn constant_field_has_plain_norm() {
        let g = Grid3::unit_torus(8).unwrap();
        let f = VectorField::from_fn(g, Placement::Collocated, |_| [3.0, 0.0, 4.0]).unwrap();
        for s in [-0.4, 0.0, 0.7] {
            assert!((bessel_norm(&f, idx(s, 3.0)).unwrap() - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_mode_closed_form() {
        let g = Grid3::unit_torus(16).unwrap();
        let f = VectorField::from_fn(g, Placement::Collocated, |x| {
            let v = (2.0 * PI * x[0]).sin();
            [0.6 * v, 0.0, 0.8 * v]
        })
        .unwrap();
        // p = 2: ‖sin(2πx)‖ = 1/√2 exactly on the grid
        for s in [0.0, 0.3, -0.5] {
            let expect = (1.0 + 4.0 * PI * PI).powf(s / 2.0) / 2f64.sqrt();
            let got = bessel_norm(&f, idx(s, 2.0)).unwrap();
            assert!((got - expect).abs() <= 1e-10 * expect);
        }
    }

    #[test]
    fn graph_norm_of_curl_free_field() {
        let g = Grid3::unit_torus(8).unwrap();
        let u = VectorField::from_fn(g, Placement::Collocated, |x| {
            [(2.0 * PI * x[0]).cos(), 0.0, 0.0]
        })
        .unwrap();
        let i = idx(0.25, 3.0);
        let a = curl_graph_norm(&u, i).unwrap();
        let b = bessel_norm(&u, i).unwrap();
        assert!((a - b).abs() < 1e-12 * b);
        let z = VectorField::zeros(g, Placement::Collocated).unwrap();
        assert_eq!(curl_graph_norm(&z, i).unwrap(), 0.0);
    }

    #[test]
    fn winf_constant_and_exponent_checks() {
        let g = Grid3::unit_torus(4).unwrap();
        let c = ScalarField::from_fn(g, |_| -2.5);
        assert_eq!(winf_norm(&c, 0.5).unwrap(), 2.5);
        assert_eq!(winf_norm(&c, 0.0).unwrap(), 2.5);
        assert_eq!(winf_norm(&c, 1.0).unwrap_err(), Error::InvalidExponent(1.0));
    }

    #[test]
    fn winf_of_ramp() {
        let g = Grid3::new(Topology::PecBox, [2, 2, 2], [1.0; 3]).unwrap();
        let ramp = ScalarField::from_fn(g, |x| x[0]);
        assert!((winf_norm(&ramp, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(winf_norm(&ramp, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn kp_unit_multiplier_gives_one() {
        let g = Grid3::unit_torus(8).unwrap();
        let f = random_vector_field(&g, 2, 11).unwrap();
        let one = ScalarField::from_fn(g, |_| 1.0);
        assert!((katoponce_ratio(&f, &one, idx(0.0, 2.5)).unwrap() - 1.0).abs() < 1e-14);
        let cf = VectorField::from_fn(g, Placement::Collocated, |_| [1.0, 2.0, 2.0]).unwrap();
        let cg = ScalarField::from_fn(g, |_| -3.0);
        assert!((katoponce_ratio(&cf, &cg, idx(0.5, 2.0)).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn kp_model_lookup_rules() {
        let m = KatoPonceModel::UnitAtSZero;
        assert_eq!(m.constant(0.0, 3.0).unwrap(), 1.0);
        assert!(matches!(
            m.constant(0.2, 3.0),
            Err(Error::ModelMissing { .. })
        ));
        let t = KatoPonceModel::UserTable {
            table: IndexTable::new(vec![crate::table::TableEntry {
                s: 0.5,
                p: 2.0,
                value: 0.8,
            }]),
        };
        assert_eq!(t.constant(0.5, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn kp_estimate_is_deterministic() {
        let g = Grid3::unit_torus(8).unwrap();
        let a = katoponce_estimate(&g, idx(0.5, 2.0), 6, 3).unwrap();
        let b = katoponce_estimate(&g, idx(0.5, 2.0), 6, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.constant(0.5, 2.0).unwrap() >= 1.0);
    }
}
