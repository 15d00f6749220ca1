//! Coefficient fields `a(x)` and the hypothesis constants extracted from them.
//!
//! A coefficient is a symmetric 3×3 matrix per node of the grid's node
//! lattice. From a concrete field we extract the ellipticity bounds `m`, `M`
//! (extreme eigenvalues over all nodes) and the Hoelder semi-norm `M̃` of
//! order `s`, measured with the matrix spectral norm.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eig::Sym3;
use crate::error::{Error, Result};
use crate::grid::{linear_index, Grid3, ScalarField, Topology};

/// Symmetric matrix field on the node lattice of a grid.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    grid: Grid3,
    entries: Vec<Sym3>,
    bounds: OnceLock<(f64, f64)>,
}

impl PartialEq for CoefficientField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.entries == other.entries
    }
}

impl CoefficientField {
    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> Sym3) -> Self {
        let d = grid.node_dims();
        let mut entries = Vec::with_capacity(grid.node_count());
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    entries.push(f(grid.node_position(i, j, k)));
                }
            }
        }
        Self::from_entries(grid, entries).expect("lattice-sized by construction")
    }

    pub fn from_entries(grid: Grid3, entries: Vec<Sym3>) -> Result<Self> {
        if entries.len() != grid.node_count() {
            return Err(Error::InvalidSpec(format!(
                "coefficient has {} entries, grid needs {}",
                entries.len(),
                grid.node_count()
            )));
        }
        if let Some(bad) = entries.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "non-finite coefficient entry at node {bad}"
            )));
        }
        Ok(Self {
            grid,
            entries,
            bounds: OnceLock::new(),
        })
    }

    pub fn constant(grid: Grid3, a: Sym3) -> Self {
        Self::from_fn(grid, |_| a)
    }

    pub fn identity(grid: Grid3) -> Self {
        Self::constant(grid, Sym3::IDENTITY)
    }

    /// Embeds a scalar field as `g(x)·I`.
    pub fn isotropic(g: &ScalarField) -> Self {
        let entries = g.values().iter().map(|&v| Sym3::diag(v, v, v)).collect();
        Self::from_entries(*g.grid(), entries).expect("sizes agree")
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn entries(&self) -> &[Sym3] {
        &self.entries
    }

    pub fn at(&self, node: usize) -> Sym3 {
        self.entries[node]
    }

    pub fn shifted(&self, beta: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| Sym3 {
                xx: e.xx + beta,
                yy: e.yy + beta,
                zz: e.zz + beta,
                ..*e
            })
            .collect();
        Self::from_entries(self.grid, entries).expect("sizes agree")
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let entries = self.entries.iter().map(|e| e.scaled(alpha)).collect();
        Self::from_entries(self.grid, entries).expect("sizes agree")
    }

    /// Adds a constant matrix at every node.
    pub fn plus_constant(&self, c: Sym3) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| Sym3 {
                xx: e.xx + c.xx,
                yy: e.yy + c.yy,
                zz: e.zz + c.zz,
                xy: e.xy + c.xy,
                xz: e.xz + c.xz,
                yz: e.yz + c.yz,
            })
            .collect();
        Self::from_entries(self.grid, entries).expect("sizes agree")
    }

    /// Whether every node holds a multiple of the identity.
    pub fn is_isotropic(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.xy == 0.0 && e.xz == 0.0 && e.yz == 0.0 && e.xx == e.yy && e.yy == e.zz)
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries
            .par_iter()
            .map(|e| e.spectral_norm())
            .reduce(|| 0.0, f64::max)
    }

    /// Extreme eigenvalues over the lattice, computed once and cached.
    pub fn eigen_range(&self) -> (f64, f64) {
        *self.bounds.get_or_init(|| {
            self.entries
                .par_iter()
                .map(|e| {
                    let ev = e.eigenvalues();
                    (ev[0], ev[2])
                })
                .reduce(
                    || (f64::INFINITY, f64::NEG_INFINITY),
                    |a, b| (a.0.min(b.0), a.1.max(b.1)),
                )
        })
    }
}

/// Returns `(m, M)`: the smallest and the largest eigenvalue of `a(x)` over
/// the grid. Fails with `NonElliptic` unless `m > 0`.
pub fn ellipticity_bounds(a: &CoefficientField) -> Result<(f64, f64)> {
    let (m, big_m) = a.eigen_range();
    if m > 0.0 {
        Ok((m, big_m))
    } else {
        Err(Error::NonElliptic { min_eigenvalue: m })
    }
}

/// The constants `m`, `M`, `M̃` and the smoothness index `s` they refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityBounds {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub holder: f64,
    pub s: f64,
}

impl EllipticityBounds {
    /// Validates `0 < m <= M`, `M̃ >= 0`, `s ∈ [0, 1)`. At `s = 0` the Hoelder
    /// bound is replaced by zero.
    pub fn new(m: f64, big_m: f64, holder: f64, s: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::NonElliptic { min_eigenvalue: m });
        }
        if !(big_m >= m && big_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < m <= M, got m = {m}, M = {big_m}"
            )));
        }
        if !(holder >= 0.0 && holder.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Hoelder bound must be >= 0, got {holder}"
            )));
        }
        if !(0.0..1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!(
                "smoothness index must lie in [0, 1), got {s}"
            )));
        }
        let holder = if s == 0.0 { 0.0 } else { holder };
        Ok(Self {
            m,
            big_m,
            holder,
            s,
        })
    }

    /// Measures all constants on a concrete field.
    pub fn from_field(a: &CoefficientField, s: f64) -> Result<Self> {
        let (m, big_m) = ellipticity_bounds(a)?;
        let holder = if s == 0.0 {
            0.0
        } else {
            holder_seminorm(a, s)?.value
        };
        Self::new(m, big_m, holder, s)
    }
}

/// How point pairs are visited when computing a Hoelder quotient supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairStrategy {
    /// Every pair when the lattice has at most `max_exhaustive` nodes,
    /// `pairs` seeded random pairs otherwise.
    Auto {
        max_exhaustive: usize,
        pairs: usize,
        seed: u64,
    },
    Exhaustive,
    Sampled {
        pairs: usize,
        seed: u64,
    },
}

impl Default for PairStrategy {
    fn default() -> Self {
        PairStrategy::Auto {
            max_exhaustive: 4096,
            pairs: 1_000_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub value: f64,
    /// `true` when only random pairs were visited; the value is then a lower
    /// bound of the lattice supremum.
    pub sampled: bool,
    pub pairs: u64,
}

pub fn holder_seminorm(a: &CoefficientField, s: f64) -> Result<HolderEstimate> {
    holder_seminorm_with(a, s, PairStrategy::default())
}

pub fn holder_seminorm_with(
    a: &CoefficientField,
    s: f64,
    strategy: PairStrategy,
) -> Result<HolderEstimate> {
    if a.is_isotropic() {
        let diag: Vec<f64> = a.entries().iter().map(|e| e.xx).collect();
        return holder_quotient_sup(a.grid(), s, strategy, |i, j| (diag[i] - diag[j]).abs());
    }
    let e = a.entries();
    holder_quotient_sup(a.grid(), s, strategy, |i, j| {
        e[i].sub(&e[j]).spectral_norm()
    })
}

/// Hoelder semi-norm of a scalar field.
pub fn scalar_holder_seminorm(
    g: &ScalarField,
    s: f64,
    strategy: PairStrategy,
) -> Result<HolderEstimate> {
    let v = g.values();
    holder_quotient_sup(g.grid(), s, strategy, |i, j| (v[i] - v[j]).abs())
}

fn holder_quotient_sup(
    grid: &Grid3,
    s: f64,
    strategy: PairStrategy,
    diff: impl Fn(usize, usize) -> f64 + Sync,
) -> Result<HolderEstimate> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidExponent(s));
    }
    let count = grid.node_count();
    let dims = grid.node_dims();
    let exhaustive = match strategy {
        PairStrategy::Auto { max_exhaustive, .. } => count <= max_exhaustive,
        PairStrategy::Exhaustive => true,
        PairStrategy::Sampled { .. } => false,
    };
    let unravel = |idx: usize| {
        let i = idx % dims[0];
        let j = (idx / dims[0]) % dims[1];
        let k = idx / (dims[0] * dims[1]);
        [i, j, k]
    };
    // d^{-s} for every lattice offset
    let offset_of = |a: [usize; 3], b: [usize; 3]| -> [usize; 3] {
        std::array::from_fn(|ax| match grid.topology() {
            Topology::Torus => (b[ax] + dims[ax] - a[ax]) % dims[ax],
            Topology::PecBox => a[ax].abs_diff(b[ax]),
        })
    };
    let mut inv_dist = vec![0.0; count];
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let d = grid.node_distance(i, j, k);
                inv_dist[linear_index(dims, i, j, k)] = if d > 0.0 { d.powf(-s) } else { 0.0 };
            }
        }
    }
    let quotient = |p: usize, q: usize| {
        let o = offset_of(unravel(p), unravel(q));
        diff(p, q) * inv_dist[linear_index(dims, o[0], o[1], o[2])]
    };

    if exhaustive {
        let value = (0..count)
            .into_par_iter()
            .map(|p| (p + 1..count).map(|q| quotient(p, q)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        Ok(HolderEstimate {
            value,
            sampled: false,
            pairs: (count as u64) * (count as u64 - 1) / 2,
        })
    } else {
        let (pairs, seed) = match strategy {
            PairStrategy::Auto { pairs, seed, .. } | PairStrategy::Sampled { pairs, seed } => {
                (pairs, seed)
            }
            PairStrategy::Exhaustive => unreachable!(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut value = 0.0_f64;
        let mut visited = 0u64;
        while (visited as usize) < pairs {
            let p = rng.gen_range(0..count);
            let q = rng.gen_range(0..count);
            if p == q {
                continue;
            }
            value = value.max(quotient(p, q));
            visited += 1;
        }
        Ok(HolderEstimate {
            value,
            sampled: true,
            pairs: visited,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wave {
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    /// Integer mode numbers; the phase is `2π Σ kᵢ xᵢ / Lᵢ`.
    pub wavenumber: [i64; 3],
    pub kind: Wave,
}

/// `offset + Σ amplitude · sin|cos(2π k·x/L)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        Self {
            offset: c,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, x: [f64; 3], extent: [f64; 3]) -> f64 {
        self.terms.iter().fold(self.offset, |acc, t| {
            let frac: f64 = (0..3)
                .map(|d| t.wavenumber[d] as f64 * x[d] / extent[d])
                .sum();
            let phase = 2.0 * std::f64::consts::PI * frac;
            acc + t.amplitude
                * match t.kind {
                    Wave::Sin => phase.sin(),
                    Wave::Cos => phase.cos(),
                }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigEntries {
    pub xx: TrigPoly,
    pub yy: TrigPoly,
    pub zz: TrigPoly,
    #[serde(default)]
    pub xy: TrigPoly,
    #[serde(default)]
    pub xz: TrigPoly,
    #[serde(default)]
    pub yz: TrigPoly,
}

/// Built-in coefficient families, as written in run configurations.
///
/// * `identity`
/// * `constant` with `matrix` (3×3, symmetric) or `diag`
/// * `scalar_profile`: `profile(x)` times `matrix`/`diag` (identity if absent)
/// * `trig`: one trigonometric polynomial per stored entry
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<TrigPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<TrigEntries>,
}

impl CoefficientSpec {
    pub fn identity() -> Self {
        Self {
            family: "identity".into(),
            ..Default::default()
        }
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        Self {
            family: "constant".into(),
            diag: Some(d),
            ..Default::default()
        }
    }

    /// `(offset + amplitude·sin(2π x₁)) I`
    pub fn sine_profile(offset: f64, amplitude: f64) -> Self {
        Self {
            family: "scalar_profile".into(),
            profile: Some(TrigPoly {
                offset,
                terms: vec![TrigTerm {
                    amplitude,
                    wavenumber: [1, 0, 0],
                    kind: Wave::Sin,
                }],
            }),
            ..Default::default()
        }
    }

    fn base_matrix(&self) -> Result<Sym3> {
        match (self.matrix, self.diag) {
            (Some(_), Some(_)) => Err(Error::InvalidSpec(
                "give either `matrix` or `diag`, not both".into(),
            )),
            (Some(m), None) => Sym3::from_rows(m)
                .ok_or_else(|| Error::InvalidSpec("`matrix` must be symmetric".into())),
            (None, Some(d)) => Ok(Sym3::diag(d[0], d[1], d[2])),
            (None, None) => Ok(Sym3::IDENTITY),
        }
    }
}

pub fn sample_coefficient(spec: &CoefficientSpec, grid: &Grid3) -> Result<CoefficientField> {
    let extent = grid.extent();
    let field = match spec.family.as_str() {
        "identity" => CoefficientField::identity(*grid),
        "constant" => {
            if spec.matrix.is_none() && spec.diag.is_none() {
                return Err(Error::InvalidSpec(
                    "`constant` needs `matrix` or `diag`".into(),
                ));
            }
            CoefficientField::constant(*grid, spec.base_matrix()?)
        }
        "scalar_profile" => {
            let profile = spec
                .profile
                .as_ref()
                .ok_or_else(|| Error::InvalidSpec("`scalar_profile` needs `profile`".into()))?;
            let base = spec.base_matrix()?;
            CoefficientField::from_fn(*grid, |x| base.scaled(profile.eval(x, extent)))
        }
        "trig" => {
            let e = spec
                .entries
                .as_ref()
                .ok_or_else(|| Error::InvalidSpec("`trig` needs `entries`".into()))?;
            CoefficientField::from_fn(*grid, |x| Sym3 {
                xx: e.xx.eval(x, extent),
                yy: e.yy.eval(x, extent),
                zz: e.zz.eval(x, extent),
                xy: e.xy.eval(x, extent),
                xz: e.xz.eval(x, extent),
                yz: e.yz.eval(x, extent),
            })
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    if !field.entries().iter().all(Sym3::is_finite) {
        return Err(Error::InvalidSpec(
            "coefficient evaluates to non-finite values".into(),
        ));
    }
    Ok(field)
}
