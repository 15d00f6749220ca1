//! Inversion of the unperturbed operator `K = curl curl + I` and discrete
//! estimates of `M_{s,p} = ‖K⁻¹‖`.
//!
//! On the torus `K̂(ξ) = (1 + |ξ|²) I − ξξᵀ`, whose inverse is
//! `(I + ξξᵀ) / (1 + |ξ|²)`: gradients are left unchanged and transverse
//! modes are damped by `1 / (1 + |ξ|²)`. In the PEC box `K = CᵀC + I` is
//! symmetric positive definite with spectrum in `[1, 1 + O(h⁻²)]` and is
//! inverted by plain conjugate gradients.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid3, Topology, VectorField};
use crate::operators::{apply_k, check_pec, curl};
use crate::random::{random_vector_field, rng};
use crate::sobolev::{bessel_norm, curl_graph_norm, p_combine, NormIndex, TRIAL_BANDWIDTH};
use crate::spectral::SpectralGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum KInverse {
    SpectralExact,
    Cg { tol: f64, max_iter: usize },
}

impl KInverse {
    pub fn for_grid(grid: &Grid3) -> Self {
        match grid.topology() {
            Topology::Torus => KInverse::SpectralExact,
            Topology::PecBox => KInverse::Cg {
                tol: 1e-12,
                max_iter: 10_000,
            },
        }
    }

    pub fn validate(&self, grid: &Grid3) -> Result<()> {
        match *self {
            KInverse::SpectralExact => grid.require(Topology::Torus),
            KInverse::Cg { tol, max_iter } => {
                if !(tol > 0.0 && tol <= 1e-2) {
                    return Err(Error::InvalidParameter(format!(
                        "CG tolerance must lie in (0, 1e-2], got {tol}"
                    )));
                }
                if max_iter == 0 {
                    return Err(Error::InvalidParameter("CG needs max_iter >= 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn solve(&self, f: &VectorField) -> Result<VectorField> {
        self.validate(f.grid())?;
        match *self {
            KInverse::SpectralExact => solve_k_spectral(f),
            KInverse::Cg { tol, max_iter } => Ok(solve_k_cg(f, tol, max_iter)?.0),
        }
    }
}

/// `K̂⁻¹ = (I + ξξᵀ) / (1 + |ξ|²)`
fn k_inverse_symbol(xi: [f64; 3], _full2: f64, v: [Complex64; 3]) -> [Complex64; 3] {
    let x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    let dot = xi[0] * v[0] + xi[1] * v[1] + xi[2] * v[2];
    let d = 1.0 / (1.0 + x2);
    std::array::from_fn(|c| (v[c] + dot * xi[c]) * d)
}

pub fn solve_k_spectral(f: &VectorField) -> Result<VectorField> {
    let sg = SpectralGrid::new(f.grid())?;
    sg.check(f)?;
    sg.map_modes(f, k_inverse_symbol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Unpreconditioned CG on `(CᵀC + I) u = f` over the PEC-constrained edges.
pub fn solve_k_cg(f: &VectorField, tol: f64, max_iter: usize) -> Result<(VectorField, CgStats)> {
    f.grid().require(Topology::PecBox)?;
    KInverse::Cg { tol, max_iter }.validate(f.grid())?;
    check_pec(f)?;
    let fnorm = f.norm_l2();
    let mut u = VectorField::zeros(*f.grid(), f.placement())?;
    if fnorm == 0.0 {
        return Ok((
            u,
            CgStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut r = f.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r)?;
    for it in 1..=max_iter {
        let kp = apply_k(&p)?;
        let alpha = rr / p.dot(&kp)?;
        u.axpy(alpha, &p)?;
        r.axpy(-alpha, &kp)?;
        let rr_new = r.dot(&r)?;
        let rel = rr_new.sqrt() / fnorm;
        if rel <= tol {
            return Ok((
                u,
                CgStats {
                    iterations: it,
                    relative_residual: rel,
                },
            ));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        let mut next = r.clone();
        next.axpy(beta, &p)?;
        p = next;
    }
    Err(Error::NoConvergence {
        max_iter,
        residual: rr.sqrt() / fnorm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    RandomTrial,
    PowerIteration,
}

/// Discrete stand-in for `M_{s,p}` on the torus. Random-trial values are
/// lower bounds of the discrete operator norm under the splitting surrogate
/// for the dual norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormEstimate {
    pub s: f64,
    pub p: f64,
    pub value: f64,
    pub trials: usize,
    pub mode: EstimateMode,
}

/// `‖K⁻¹(g₁ + curl g₂)‖_{H^{s,p}(curl)} / (‖g₁‖^p_{L^p_s} + ‖g₂‖^p_{L^p_s})^{1/p}`
pub fn msp_ratio(g1: &VectorField, g2: &VectorField, idx: NormIndex) -> Result<f64> {
    let f = g1.add(&curl(g2)?)?;
    let u = solve_k_spectral(&f)?;
    let num = curl_graph_norm(&u, idx)?;
    let den = p_combine(bessel_norm(g1, idx)?, bessel_norm(g2, idx)?, idx.p);
    if den == 0.0 {
        return Err(Error::InvalidParameter("zero trial pair".into()));
    }
    Ok(num / den)
}

pub fn estimate_msp(
    s: f64,
    p: f64,
    grid: &Grid3,
    trials: usize,
    seed: u64,
) -> Result<OperatorNormEstimate> {
    grid.require(Topology::Torus)?;
    let idx = NormIndex::new(s, p)?;
    idx.require_dual_range()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let band = trial_band(grid);
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng(seed.wrapping_add(t as u64));
            let g1 = random_vector_field(grid, band, r.gen())?;
            let g2 = random_vector_field(grid, band, r.gen())?;
            // vary the mix so both halves of the pair get exercised
            let w: f64 = r.gen_range(0.0..1.0);
            msp_ratio(&g1.scaled(w), &g2.scaled(1.0 - w), idx)
        })
        .collect::<Result<_>>()?;
    Ok(OperatorNormEstimate {
        s,
        p,
        value: ratios.into_iter().fold(0.0, f64::max),
        trials,
        mode: EstimateMode::RandomTrial,
    })
}

fn trial_band(grid: &Grid3) -> usize {
    TRIAL_BANDWIDTH
        .min(grid.n().iter().min().unwrap() / 2 - 1)
        .max(1)
}

/// Power iteration for `(s, p) = (0, 2)` on the symmetric map
/// `(g₁, g₂) ↦ (u, curl u)`, `u = K⁻¹(g₁ + curl g₂)`, in `L² × L²`.
pub fn power_iteration_m02(
    grid: &Grid3,
    iterations: usize,
    seed: u64,
) -> Result<OperatorNormEstimate> {
    grid.require(Topology::Torus)?;
    if iterations == 0 {
        return Err(Error::InvalidParameter(
            "need at least one iteration".into(),
        ));
    }
    let band = trial_band(grid);
    let mut r = rng(seed);
    let mut x1 = random_vector_field(grid, band, r.gen())?;
    let mut x2 = random_vector_field(grid, band, r.gen())?;
    let mut value = 0.0;
    for _ in 0..iterations {
        let norm = (x1.norm_l2().powi(2) + x2.norm_l2().powi(2)).sqrt();
        x1.scale(1.0 / norm);
        x2.scale(1.0 / norm);
        let u = solve_k_spectral(&x1.add(&curl(&x2)?)?)?;
        let cu = curl(&u)?;
        // Rayleigh quotient of a positive semi-definite map
        value = u.dot(&x1)? + cu.dot(&x2)?;
        x1 = u;
        x2 = cu;
    }
    Ok(OperatorNormEstimate {
        s: 0.0,
        p: 2.0,
        value,
        trials: iterations,
        mode: EstimateMode::PowerIteration,
    })
}
