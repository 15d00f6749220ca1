//! Preconditioned fixed-point iteration for `curl(a curl u) + k² u = f`.
//!
//! The map `Q_f(u) = u − t K⁻¹(A u − f)` with `K = curl curl + I` is a
//! contraction with Lipschitz constant `M_{s,p} · k₀(s, p)`, where
//!
//! ```text
//! k₀(s, p) = max{ |1 − t k²|, C(s, p) (|1 − t m| + t M̃) }
//! ```
//!
//! and the step `t = m / M²`. At `(s, p) = (0, 2)` the discrete iteration is
//! self-adjoint in the `H(curl)` energy inner product, so every step shrinks
//! the error in that norm by at least `k₀(0, 2)`.

use serde::{Deserialize, Serialize};

use crate::coefficient::{CoefficientField, EllipticityBounds};
use crate::error::{Error, Result};
use crate::grid::VectorField;
use crate::operators::{hcurl_norm, MaxwellOperator};
use crate::sobolev::KatoPonceModel;
use crate::unperturbed::KInverse;

/// `t = m / M²`
pub fn step_size(m: f64, big_m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::NonElliptic { min_eigenvalue: m });
    }
    if !(big_m >= m) {
        return Err(Error::InvalidParameter(format!(
            "need m <= M, got m = {m}, M = {big_m}"
        )));
    }
    Ok(m / (big_m * big_m))
}

/// Contraction budget `max{|1 − t k²|, C (|1 − t m| + t M̃)}`. At `s = 0` the
/// Hoelder term is dropped.
pub fn k0(s: f64, _p: f64, bounds: &EllipticityBounds, k2: f64, t: f64, c: f64) -> f64 {
    let holder = if s == 0.0 { 0.0 } else { bounds.holder };
    let zeroth = (1.0 - t * k2).abs();
    let perturbation = (1.0 - t * bounds.m).abs() + t * holder;
    // C multiplies a vanishing bracket to zero whatever its value
    let first = if perturbation == 0.0 {
        0.0
    } else {
        c * perturbation
    };
    zeroth.max(first)
}

/// `(m / M²) M_{s,p} / (1 − M_{s,p} k₀)`
pub fn stability_constant(msp: f64, k0: f64, m: f64, big_m: f64) -> Result<f64> {
    let product = msp * k0;
    if product >= 1.0 {
        return Err(Error::NoContraction { product });
    }
    Ok(m / (big_m * big_m) * msp / (1.0 - product))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub k2: f64,
    /// Step size; `None` selects `m / M²`.
    pub step: Option<f64>,
    /// Relative `H(curl)` increment at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Smoothness index the budget is evaluated at.
    pub s: f64,
    pub p: f64,
    pub c_model: KatoPonceModel,
}

impl SolverParams {
    pub fn new(k2: f64) -> Self {
        Self {
            k2,
            step: None,
            tol: 1e-10,
            max_iter: 500,
            s: 0.0,
            p: 2.0,
            c_model: KatoPonceModel::UnitAtSZero,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k2 > 0.0 && self.k2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "k² must be positive, got {}",
                self.k2
            )));
        }
        if let Some(t) = self.step {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "step must be positive, got {t}"
                )));
            }
        }
        if !(self.tol > 0.0 && self.tol <= 1e-1) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must lie in (0, 0.1], got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based step number; the step produces `u_n` from `u_{n−1}`.
    pub iteration: usize,
    /// `‖u_n − u_{n−1}‖_{H(curl)}`
    pub increment: f64,
    pub relative_increment: f64,
    /// `‖A u_{n−1} − f‖_{L²}`
    pub residual: f64,
    /// `‖u_n − u*‖_{H(curl)}` in manufactured mode.
    pub error: Option<f64>,
    /// `error_n / error_{n−1}` while the previous error is above the noise floor.
    pub ratio: Option<f64>,
}

/// Errors below this fraction of `‖u*‖` are rounding noise; no ratio is
/// formed against them.
pub const RATIO_NOISE_FLOOR: f64 = 1e-12;

/// Consecutive growing increments that end a run as diverged.
pub const DIVERGENCE_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub warnings: Vec<String>,
    pub final_relative_residual: Option<f64>,
    /// `tol (1 + k₀) / (1 − k₀)`, infinite when `k₀ >= 1`.
    pub residual_bound: Option<f64>,
}

impl IterationTrace {
    /// A trace holding only the given records, e.g. for offline analysis.
    pub fn from_records(records: Vec<IterationRecord>, status: SolveStatus) -> Self {
        Self {
            records,
            status,
            warnings: Vec::new(),
            final_relative_residual: None,
            residual_bound: None,
        }
    }

    pub fn steps(&self) -> usize {
        self.records.len()
    }

    /// Number of iterates needed: on convergence the last step only confirms
    /// that its predecessor had already settled.
    pub fn iterations(&self) -> usize {
        match self.status {
            SolveStatus::Converged => self.records.len().saturating_sub(1),
            _ => self.records.len(),
        }
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.ratio)
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))))
    }

    pub fn residual_within_bound(&self) -> Option<bool> {
        Some(self.final_relative_residual? <= self.residual_bound?)
    }
}

/// Constants that fix the iteration, reported alongside every solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConstants {
    pub bounds: EllipticityBounds,
    pub k2: f64,
    pub t: f64,
    pub c: f64,
    pub k0: f64,
}

#[derive(Debug, Clone)]
pub struct GroegerSolver {
    op: MaxwellOperator,
    params: SolverParams,
    kinv: KInverse,
    constants: SolverConstants,
}

impl GroegerSolver {
    pub fn new(a: CoefficientField, params: SolverParams, kinv: KInverse) -> Result<Self> {
        params.validate()?;
        kinv.validate(a.grid())?;
        let bounds = EllipticityBounds::from_field(&a, params.s)?;
        let t = match params.step {
            Some(t) => t,
            None => step_size(bounds.m, bounds.big_m)?,
        };
        let c = params.c_model.constant(params.s, params.p)?;
        let k0 = k0(params.s, params.p, &bounds, params.k2, t, c);
        let op = MaxwellOperator::new(a, params.k2)?;
        Ok(Self {
            op,
            constants: SolverConstants {
                bounds,
                k2: params.k2,
                t,
                c,
                k0,
            },
            params,
            kinv,
        })
    }

    pub fn constants(&self) -> &SolverConstants {
        &self.constants
    }

    pub fn operator(&self) -> &MaxwellOperator {
        &self.op
    }

    pub fn solve(&self, f: &VectorField) -> Result<(VectorField, IterationTrace)> {
        self.run(f, None)
    }

    /// Solve with a known exact solution, recording errors and their ratios.
    pub fn solve_manufactured(
        &self,
        f: &VectorField,
        reference: &VectorField,
    ) -> Result<(VectorField, IterationTrace)> {
        self.run(f, Some(reference))
    }

    fn run(
        &self,
        f: &VectorField,
        reference: Option<&VectorField>,
    ) -> Result<(VectorField, IterationTrace)> {
        let t = self.constants.t;
        let k0 = self.constants.k0;
        let mut warnings = Vec::new();
        if k0 >= 1.0 {
            warnings.push(format!(
                "NoContraction: k0 = {k0} >= 1, convergence is not guaranteed"
            ));
        }
        let ref_norm = match reference {
            Some(r) => Some(hcurl_norm(r)?),
            None => None,
        };
        let mut u = VectorField::zeros(*f.grid(), f.placement())?;
        let mut prev_error = ref_norm;
        let mut prev_increment: Option<f64> = None;
        let mut growing = 0usize;
        let mut records = Vec::new();
        let mut status = SolveStatus::MaxIter;

        for n in 1..=self.params.max_iter {
            let residual = self.op.apply(&u)?.sub(f)?;
            let correction = self.kinv.solve(&residual)?.scaled(t);
            let next = u.sub(&correction)?;
            if !next.is_finite() {
                status = SolveStatus::Diverged;
                break;
            }
            let increment = hcurl_norm(&correction)?;
            let size = hcurl_norm(&next)?;
            let relative_increment = if size > 0.0 {
                increment / size
            } else {
                increment
            };
            let (error, ratio) = match (reference, ref_norm) {
                (Some(r), Some(rn)) => {
                    let e = hcurl_norm(&next.sub(r)?)?;
                    let ratio = prev_error
                        .filter(|&pe| pe > RATIO_NOISE_FLOOR * rn)
                        .map(|pe| e / pe);
                    prev_error = Some(e);
                    (Some(e), ratio)
                }
                _ => (None, None),
            };
            records.push(IterationRecord {
                iteration: n,
                increment,
                relative_increment,
                residual: residual.norm_l2(),
                error,
                ratio,
            });
            u = next;

            if let Some(pi) = prev_increment {
                growing = if increment > pi { growing + 1 } else { 0 };
            }
            prev_increment = Some(increment);
            if relative_increment <= self.params.tol {
                status = SolveStatus::Converged;
                break;
            }
            if growing >= DIVERGENCE_WINDOW {
                status = SolveStatus::Diverged;
                break;
            }
        }

        let fnorm = f.norm_l2();
        let final_relative_residual = if u.is_finite() && fnorm > 0.0 {
            Some(self.op.apply(&u)?.sub(f)?.norm_l2() / fnorm)
        } else {
            None
        };
        let residual_bound = Some(if k0 < 1.0 {
            self.params.tol * (1.0 + k0) / (1.0 - k0)
        } else {
            f64::INFINITY
        });
        Ok((
            u,
            IterationTrace {
                records,
                status,
                warnings,
                final_relative_residual,
                residual_bound,
            },
        ))
    }
}

pub fn groeger_solve(
    a: CoefficientField,
    f: &VectorField,
    params: SolverParams,
    kinv: KInverse,
) -> Result<(VectorField, IterationTrace)> {
    GroegerSolver::new(a, params, kinv)?.solve(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionMeasure {
    pub geometric_mean: f64,
    pub max_ratio: f64,
    pub count: usize,
}

/// Geometric mean and maximum of the error ratios at iterations
/// `start..=end` (1-based, inclusive).
pub fn measure_contraction(
    trace: &IterationTrace,
    window: (usize, usize),
) -> Result<ContractionMeasure> {
    let (start, end) = window;
    if start == 0 || start > end {
        return Err(Error::InvalidParameter(format!(
            "window must satisfy 1 <= start <= end, got {window:?}"
        )));
    }
    if trace.records.len() < end {
        return Err(Error::InsufficientData(format!(
            "trace has {} steps, window ends at {end}",
            trace.records.len()
        )));
    }
    let ratios: Vec<f64> = trace.records[start - 1..end]
        .iter()
        .map(|r| r.ratio)
        .collect::<Option<_>>()
        .ok_or_else(|| {
            Error::InsufficientData(format!(
                "no error ratios available over iterations {start}..={end}"
            ))
        })?;
    let log_mean = ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
    Ok(ContractionMeasure {
        geometric_mean: log_mean.exp(),
        max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        count: ratios.len(),
    })
}
