//! The `(s, 1/p)` well-posedness region calculus.
//!
//! `R_Ω` is the open hexagon
//!
//! ```text
//! 0 < 1/p < 1,   −1 + 1/p < s < 1/p,
//! (2/3)(1 − 1/p_Ω) < 1/p − s/3 < (1/3)(2/p_Ω + 1)
//! ```
//!
//! split into `R⁺` (`s ≥ 0`) and `R⁻` (`s < 0`). A point of `R⁺` lies in `S⁺`
//! when, on the segment from `(0, 1/2)` through it, some farther point
//! `(s₀, 1/p₀) ∈ R⁺` with `s = (1 − θ)s₀`, `1/p = (1 − θ)/p₀ + θ/2` satisfies
//! `(1 − θ) log M_{s₀,p₀} + log k₀(s, p) < 0`. `S⁻` is the mirror image of
//! `S⁺` under `(s, 1/p) ↦ (−s, 1 − 1/p)`.
//!
//! Membership in `S⁺` is decided by a finite search over `θ`, so the sampled
//! set is an inner approximation.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficient::EllipticityBounds;
use crate::error::{Error, Result};
use crate::grid::Grid3;
use crate::sobolev::KatoPonceModel;
use crate::table::{IndexTable, TableEntry};
use crate::unperturbed::estimate_msp;

pub fn in_r_omega(s: f64, invp: f64, p_omega: f64) -> bool {
    let lo = 2.0 / 3.0 * (1.0 - 1.0 / p_omega);
    let hi = (2.0 / p_omega + 1.0) / 3.0;
    let mid = invp - s / 3.0;
    0.0 < invp && invp < 1.0 && -1.0 + invp < s && s < invp && lo < mid && mid < hi
}

pub fn in_r_plus(s: f64, invp: f64, p_omega: f64) -> bool {
    s >= 0.0 && in_r_omega(s, invp, p_omega)
}

pub fn in_r_minus(s: f64, invp: f64, p_omega: f64) -> bool {
    s < 0.0 && in_r_omega(s, invp, p_omega)
}

/// Source of the values `M_{s₀,p₀}`. `M_{0,2} = 1` is always known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MspModel {
    /// Anchors `(s_a, p_a, M_a)`; a point on the segment from `(0, 1/2)` to an
    /// anchor is bounded by interpolation, `M ≤ M_a^{1−φ} M_{0,2}^{φ}`.
    InterpolationOnly {
        #[serde(default)]
        anchors: Vec<TableEntry>,
    },
    UserTable {
        table: IndexTable,
    },
    /// Random-trial estimates on an `n³` torus, evaluated at the nearest
    /// point of a lattice with spacing `lattice` in `(s, 1/p)`.
    DiscreteEstimate {
        n: usize,
        trials: usize,
        seed: u64,
        #[serde(default = "default_lattice")]
        lattice: f64,
    },
}

fn default_lattice() -> f64 {
    0.0625
}

impl Default for MspModel {
    fn default() -> Self {
        MspModel::InterpolationOnly {
            anchors: Vec::new(),
        }
    }
}

impl MspModel {
    pub fn provenance(&self) -> String {
        match self {
            MspModel::InterpolationOnly { anchors } => format!(
                "M_sp: M_02 = 1 plus interpolation towards {} user anchors",
                anchors.len()
            ),
            MspModel::UserTable { table } => {
                format!("M_sp: user table with {} entries", table.entries.len())
            }
            MspModel::DiscreteEstimate {
                n,
                trials,
                seed,
                lattice,
            } => format!(
                "M_sp: discrete torus estimates (lower bounds), n = {n}, {trials} trials, seed {seed}, lattice {lattice}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub p_omega: f64,
    pub bounds: EllipticityBounds,
    pub k2: f64,
    #[serde(default)]
    pub c_model: KatoPonceModel,
    #[serde(default)]
    pub msp_model: MspModel,
    #[serde(default = "default_theta_steps")]
    pub theta_steps: usize,
}

fn default_theta_steps() -> usize {
    512
}

impl RegionParams {
    pub fn new(p_omega: f64, bounds: EllipticityBounds, k2: f64) -> Self {
        Self {
            p_omega,
            bounds,
            k2,
            c_model: KatoPonceModel::UnitAtSZero,
            msp_model: MspModel::default(),
            theta_steps: default_theta_steps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..2.0).contains(&self.p_omega) {
            return Err(Error::InvalidParameter(format!(
                "p_Omega must lie in [1, 2), got {}",
                self.p_omega
            )));
        }
        EllipticityBounds::new(
            self.bounds.m,
            self.bounds.big_m,
            self.bounds.holder,
            self.bounds.s,
        )?;
        if !(self.k2 > 0.0 && self.k2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "k² must be positive, got {}",
                self.k2
            )));
        }
        if self.theta_steps < 2 {
            return Err(Error::InvalidParameter("theta_steps must be >= 2".into()));
        }
        Ok(())
    }

    /// `k₀(s, p)` at the step `t = m/M²`:
    /// `max{|1 − m k²/M²|, C(s,p)(1 − m²/M² + m M̃/M²)}`.
    pub fn k0(&self, s: f64, p: f64) -> Result<f64> {
        let EllipticityBounds {
            m, big_m, holder, ..
        } = self.bounds;
        let holder = if s == 0.0 { 0.0 } else { holder };
        let ratio = m / big_m;
        let zeroth = (1.0 - m * self.k2 / (big_m * big_m)).abs();
        let bracket = 1.0 - ratio * ratio + m * holder / (big_m * big_m);
        let first = if bracket == 0.0 {
            0.0
        } else {
            self.c_model.constant(s, p)? * bracket
        };
        Ok(zeroth.max(first))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub theta: f64,
    pub s0: f64,
    pub invp0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub s: f64,
    pub invp: f64,
    pub in_r: bool,
    pub in_r_plus: bool,
    pub in_r_minus: bool,
    pub in_s_plus: bool,
    pub in_s_minus: bool,
    pub witness: Option<Witness>,
}

struct MspResolver<'a> {
    model: &'a MspModel,
    cache: Mutex<HashMap<(u64, u64), f64>>,
}

const SAME_POINT: f64 = 1e-12;

impl<'a> MspResolver<'a> {
    fn new(model: &'a MspModel) -> Self {
        Self {
            model,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn get(&self, s0: f64, invp0: f64) -> Result<f64> {
        if s0.abs() <= SAME_POINT && (invp0 - 0.5).abs() <= SAME_POINT {
            return Ok(1.0);
        }
        let missing = || Error::ModelMissing {
            missing: vec![(s0, 1.0 / invp0)],
        };
        match self.model {
            MspModel::InterpolationOnly { anchors } => {
                let v = [s0, invp0 - 0.5];
                let vn = v[0].hypot(v[1]);
                anchors
                    .iter()
                    .filter_map(|a| {
                        let w = [a.s, 1.0 / a.p - 0.5];
                        let wn = w[0].hypot(w[1]);
                        let cross = v[0] * w[1] - v[1] * w[0];
                        let dot = v[0] * w[0] + v[1] * w[1];
                        let lambda = wn / vn;
                        (cross.abs() <= 1e-9 * vn * wn && dot > 0.0 && lambda >= 1.0 - SAME_POINT)
                            .then(|| a.value.powf(1.0 / lambda))
                    })
                    .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
                    .ok_or_else(missing)
            }
            MspModel::UserTable { table } => table.lookup(s0, 1.0 / invp0).ok_or_else(missing),
            MspModel::DiscreteEstimate {
                n,
                trials,
                seed,
                lattice,
            } => {
                let snap = |x: f64| (x / lattice).round() * lattice;
                let (mut s, mut ip) = (snap(s0), snap(invp0));
                if !(0.0 < ip && ip < 1.0 && -1.0 + ip < s && s < ip) {
                    s = s0;
                    ip = invp0;
                }
                let key = (s.to_bits(), ip.to_bits());
                if let Some(v) = self.cache.lock().unwrap().get(&key) {
                    return Ok(*v);
                }
                let grid = Grid3::unit_torus(*n)?;
                let v = estimate_msp(s, 1.0 / ip, &grid, *trials, *seed)?.value;
                self.cache.lock().unwrap().insert(key, v);
                Ok(v)
            }
        }
    }
}

/// Further refinements towards `θ = 0` tried after the uniform grid, halving
/// the smallest grid step each time.
const THETA_REFINEMENTS: i32 = 40;

fn search_s_plus(
    s: f64,
    invp: f64,
    params: &RegionParams,
    resolver: &MspResolver,
) -> Result<Option<Witness>> {
    let p_omega = params.p_omega;
    if !in_r_plus(s, invp, p_omega) {
        return Ok(None);
    }
    let k0 = params.k0(s, 1.0 / invp)?;
    if !(k0 < 1.0) {
        return Ok(None);
    }
    let log_k0 = k0.ln();
    let try_theta = |theta: f64| -> Result<Option<Option<Witness>>> {
        let s0 = s / (1.0 - theta);
        let invp0 = (invp - 0.5 * theta) / (1.0 - theta);
        if !in_r_plus(s0, invp0, p_omega) {
            // the back-solved point only moves outward as θ grows
            return Ok(None);
        }
        let accept = k0 == 0.0 || (1.0 - theta) * resolver.get(s0, invp0)?.ln() + log_k0 < 0.0;
        Ok(Some(accept.then_some(Witness { theta, s0, invp0 })))
    };
    let steps = params.theta_steps;
    for i in 1..steps {
        match try_theta(i as f64 / steps as f64)? {
            None => break,
            Some(Some(w)) => return Ok(Some(w)),
            Some(None) => {}
        }
    }
    for j in 1..=THETA_REFINEMENTS {
        let theta = 1.0 / (steps as f64 * 2f64.powi(j));
        if let Some(Some(w)) = try_theta(theta)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

pub fn in_s_plus(s: f64, invp: f64, params: &RegionParams) -> Result<(bool, Option<Witness>)> {
    params.validate()?;
    let resolver = MspResolver::new(&params.msp_model);
    let w = search_s_plus(s, invp, params, &resolver)?;
    Ok((w.is_some(), w))
}

pub fn in_s_minus(s: f64, invp: f64, params: &RegionParams) -> Result<bool> {
    params.validate()?;
    if !in_r_minus(s, invp, params.p_omega) {
        return Ok(false);
    }
    Ok(in_s_plus(-s, 1.0 - invp, params)?.0)
}

fn classify(
    s: f64,
    invp: f64,
    params: &RegionParams,
    resolver: &MspResolver,
) -> Result<RegionPoint> {
    let p_omega = params.p_omega;
    let in_r = in_r_omega(s, invp, p_omega);
    let in_r_plus = in_r && s >= 0.0;
    let in_r_minus = in_r && s < 0.0;
    let witness = if in_r_plus {
        search_s_plus(s, invp, params, resolver)?
    } else {
        None
    };
    let in_s_minus = in_r_minus && search_s_plus(-s, 1.0 - invp, params, resolver)?.is_some();
    Ok(RegionPoint {
        s,
        invp,
        in_r,
        in_r_plus,
        in_r_minus,
        in_s_plus: witness.is_some(),
        in_s_minus,
        witness,
    })
}

/// Classifies the `resolution × resolution` grid `s ∈ [−1, 1]`,
/// `1/p = (j + 1)/(resolution + 1)`, rows ordered by `1/p` then `s`.
pub fn region_sample(params: &RegionParams, resolution: usize) -> Result<Vec<RegionPoint>> {
    params.validate()?;
    if resolution < 2 {
        return Err(Error::InvalidParameter("resolution must be >= 2".into()));
    }
    let resolver = MspResolver::new(&params.msp_model);
    let results: Vec<Result<RegionPoint>> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % resolution, idx / resolution);
            let s = -1.0 + 2.0 * i as f64 / (resolution - 1) as f64;
            let invp = (j + 1) as f64 / (resolution + 1) as f64;
            classify(s, invp, params, &resolver)
        })
        .collect();
    let mut points = Vec::with_capacity(results.len());
    let mut missing: Vec<(f64, f64)> = Vec::new();
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(Error::ModelMissing { missing: m }) => {
                for pt in m {
                    if missing.len() < 20 && !missing.contains(&pt) {
                        missing.push(pt);
                    }
                }
            }
            Err(e) => return Err(e),
        }
    }
    if missing.is_empty() {
        Ok(points)
    } else {
        Err(Error::ModelMissing { missing })
    }
}

/// Vertices of the closure of `R_Ω`, counter-clockwise in the `(s, 1/p)`
/// plane. Requires `p_Ω ∈ [1, 2)`.
pub fn region_geometry(p_omega: f64) -> Vec<[f64; 2]> {
    let lo = 2.0 / 3.0 * (1.0 - 1.0 / p_omega);
    let hi = (2.0 / p_omega + 1.0) / 3.0;
    // a·s + b·(1/p) = c
    let lines: [[f64; 3]; 6] = [
        [0.0, 1.0, 0.0],
        [0.0, 1.0, 1.0],
        [1.0, -1.0, 0.0],
        [1.0, -1.0, -1.0],
        [-1.0 / 3.0, 1.0, lo],
        [-1.0 / 3.0, 1.0, hi],
    ];
    const EPS: f64 = 1e-12;
    let feasible = |s: f64, ip: f64| {
        let mid = ip - s / 3.0;
        (-EPS..=1.0 + EPS).contains(&ip)
            && s <= ip + EPS
            && s >= ip - 1.0 - EPS
            && mid >= lo - EPS
            && mid <= hi + EPS
    };
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for a in 0..lines.len() {
        for b in a + 1..lines.len() {
            let [a1, b1, c1] = lines[a];
            let [a2, b2, c2] = lines[b];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < EPS {
                continue;
            }
            let s = (c1 * b2 - c2 * b1) / det;
            let ip = (a1 * c2 - a2 * c1) / det;
            if feasible(s, ip)
                && !pts
                    .iter()
                    .any(|q| (q[0] - s).abs() < 1e-9 && (q[1] - ip).abs() < 1e-9)
            {
                pts.push([s, ip]);
            }
        }
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    pts.sort_by(|p, q| {
        let ap = (p[1] - cy).atan2(p[0] - cx);
        let aq = (q[1] - cy).atan2(q[0] - cx);
        ap.total_cmp(&aq)
    });
    // drop points interior to an edge
    let mut out: Vec<[f64; 2]> = Vec::new();
    for i in 0..pts.len() {
        let prev = pts[(i + pts.len() - 1) % pts.len()];
        let cur = pts[i];
        let next = pts[(i + 1) % pts.len()];
        let cross =
            (cur[0] - prev[0]) * (next[1] - cur[1]) - (cur[1] - prev[1]) * (next[0] - cur[0]);
        if cross.abs() > EPS {
            out.push(cur);
        }
    }
    out
}
