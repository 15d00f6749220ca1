//! Discrete curl, the Maxwell operator `A u = curl(a curl u) + k² u`, the
//! unperturbed operator `K = curl curl + I`, and the split `f = g₁ + curl g₂`.
//!
//! On the torus the curl is the exact spectral multiplier `iξ×`. In the PEC
//! box it is the Yee difference operator `C` from edges to faces; its
//! transpose maps faces back to edges, and the boundary edges of the result
//! are zeroed so that `A` acts on the PEC-constrained subspace.

use num_complex::Complex64;

use crate::coefficient::{ellipticity_bounds, CoefficientField};
use crate::eig::Sym3;
use crate::error::{Error, Result};
use crate::grid::{linear_index, Grid3, Placement, ScalarField, Topology, VectorField};
use crate::spectral::{i_cross, SpectralGrid};

/// Edges in boundary faces must be zero to within this before `A` or `K`
/// is applied on the PEC box.
pub const PEC_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurlScheme {
    Spectral,
    Staggered,
}

#[derive(Debug, Clone)]
pub struct CurlOperator {
    grid: Grid3,
    spectral: Option<SpectralGrid>,
}

impl CurlOperator {
    pub fn new(grid: &Grid3) -> Result<Self> {
        let spectral = match grid.topology() {
            Topology::Torus => Some(SpectralGrid::new(grid)?),
            Topology::PecBox => None,
        };
        Ok(Self {
            grid: *grid,
            spectral,
        })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn scheme(&self) -> CurlScheme {
        if self.spectral.is_some() {
            CurlScheme::Spectral
        } else {
            CurlScheme::Staggered
        }
    }

    pub fn spectral(&self) -> Option<&SpectralGrid> {
        self.spectral.as_ref()
    }

    fn expect(&self, u: &VectorField, placement: Placement) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if u.placement() != placement {
            return Err(Error::PlacementMismatch {
                expected: placement,
                got: u.placement(),
            });
        }
        Ok(())
    }

    /// Torus: collocated to collocated. Box: edges to faces.
    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        match &self.spectral {
            Some(sg) => {
                self.expect(u, Placement::Collocated)?;
                sg.map_modes(u, |xi, _, v| i_cross(xi, v))
            }
            None => {
                self.expect(u, Placement::Edge)?;
                let mut out = VectorField::zeros(self.grid, Placement::Face)?;
                staggered_stencil(&self.grid, |e, ei, b, bi, w| {
                    out.component_mut(b)[bi] += w * u.component(e)[ei];
                });
                Ok(out)
            }
        }
    }

    /// Adjoint of [`CurlOperator::apply`] in the volume-weighted inner
    /// product. The spectral curl is self-adjoint.
    pub fn apply_transpose(&self, w: &VectorField) -> Result<VectorField> {
        match &self.spectral {
            Some(_) => self.apply(w),
            None => {
                self.expect(w, Placement::Face)?;
                let mut out = VectorField::zeros(self.grid, Placement::Edge)?;
                staggered_stencil(&self.grid, |e, ei, b, bi, c| {
                    out.component_mut(e)[ei] += c * w.component(b)[bi];
                });
                Ok(out)
            }
        }
    }
}

/// Visits every nonzero of the Yee curl matrix as
/// `(edge component, edge index, face component, face index, weight)`.
fn staggered_stencil(grid: &Grid3, mut visit: impl FnMut(usize, usize, usize, usize, f64)) {
    let h = grid.spacing();
    let ed: [[usize; 3]; 3] = std::array::from_fn(|c| grid.component_dims(Placement::Edge, c));
    let fd: [[usize; 3]; 3] = std::array::from_fn(|c| grid.component_dims(Placement::Face, c));
    // face component b = (c + 1) x (c + 2) cross structure:
    // (curl E)_b = ∂_{b+1} E_{b+2} − ∂_{b+2} E_{b+1}
    for b in 0..3 {
        let d = fd[b];
        let p = (b + 1) % 3;
        let q = (b + 2) % 3;
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let f = [i, j, k];
                    let bi = linear_index(d, i, j, k);
                    // + ∂_p E_q
                    let mut hi = f;
                    hi[p] += 1;
                    visit(
                        q,
                        linear_index(ed[q], hi[0], hi[1], hi[2]),
                        b,
                        bi,
                        1.0 / h[p],
                    );
                    visit(q, linear_index(ed[q], f[0], f[1], f[2]), b, bi, -1.0 / h[p]);
                    // − ∂_q E_p
                    let mut hi = f;
                    hi[q] += 1;
                    visit(
                        p,
                        linear_index(ed[p], hi[0], hi[1], hi[2]),
                        b,
                        bi,
                        -1.0 / h[q],
                    );
                    visit(p, linear_index(ed[p], f[0], f[1], f[2]), b, bi, 1.0 / h[q]);
                }
            }
        }
    }
}

pub fn curl(u: &VectorField) -> Result<VectorField> {
    CurlOperator::new(u.grid())?.apply(u)
}

/// Spectral gradient of a periodic scalar field.
pub fn gradient(phi: &ScalarField) -> Result<VectorField> {
    let sg = SpectralGrid::new(phi.grid())?;
    let hat = sg.forward_scalar(phi.values());
    let mut spec: [Vec<Complex64>; 3] =
        std::array::from_fn(|_| vec![Complex64::default(); hat.len()]);
    let i = Complex64::new(0.0, 1.0);
    sg.for_each_mode(|idx, xi, _| {
        for c in 0..3 {
            spec[c][idx] = i * xi[c] * hat[idx];
        }
    });
    Ok(sg.inverse(spec))
}

/// Spectral divergence of a collocated periodic field.
pub fn divergence(u: &VectorField) -> Result<ScalarField> {
    let sg = SpectralGrid::new(u.grid())?;
    let spec = sg.forward(u)?;
    let mut out = vec![Complex64::default(); sg.len()];
    let i = Complex64::new(0.0, 1.0);
    sg.for_each_mode(|idx, xi, _| {
        out[idx] = i * (xi[0] * spec[0][idx] + xi[1] * spec[1][idx] + xi[2] * spec[2][idx]);
    });
    ScalarField::from_vec(*u.grid(), sg.inverse_scalar(out))
}

/// `(‖u‖² + ‖curl u‖²)^{1/2}` with volume-weighted discrete L² norms.
pub fn hcurl_norm(u: &VectorField) -> Result<f64> {
    let c = curl(u)?;
    Ok((u.norm_l2().powi(2) + c.norm_l2().powi(2)).sqrt())
}

pub(crate) fn check_pec(u: &VectorField) -> Result<()> {
    if u.grid().topology() == Topology::PecBox {
        let t = u.tangential_boundary_max();
        if t > PEC_TOLERANCE {
            return Err(Error::BoundaryViolation { max_abs: t });
        }
    }
    Ok(())
}

/// The variable-coefficient operator `u ↦ curl(a curl u) + k² u`.
#[derive(Debug, Clone)]
pub struct MaxwellOperator {
    a: CoefficientField,
    k2: f64,
    curl: CurlOperator,
    /// Coefficient averaged onto the faces of each orientation (box only).
    face_coeff: Option<[Vec<Sym3>; 3]>,
}

impl MaxwellOperator {
    pub fn new(a: CoefficientField, k2: f64) -> Result<Self> {
        ellipticity_bounds(&a)?;
        if !(k2 > 0.0 && k2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "k² must be positive, got {k2}"
            )));
        }
        let grid = *a.grid();
        let curl = CurlOperator::new(&grid)?;
        let face_coeff = match grid.topology() {
            Topology::Torus => None,
            Topology::PecBox => Some(face_average(&a)),
        };
        Ok(Self {
            a,
            k2,
            curl,
            face_coeff,
        })
    }

    pub fn coefficient(&self) -> &CoefficientField {
        &self.a
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn grid(&self) -> &Grid3 {
        self.curl.grid()
    }

    pub fn curl_operator(&self) -> &CurlOperator {
        &self.curl
    }

    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        check_pec(u)?;
        let w = self.curl.apply(u)?;
        let aw = match &self.face_coeff {
            None => multiply_collocated(&self.a, &w)?,
            Some(fc) => multiply_faces(self.grid(), fc, &w)?,
        };
        let mut out = self.curl.apply_transpose(&aw)?;
        out.enforce_pec();
        out.axpy(self.k2, u)?;
        Ok(out)
    }
}

fn multiply_collocated(a: &CoefficientField, w: &VectorField) -> Result<VectorField> {
    let n = w.component(0).len();
    let mut comps: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
    for idx in 0..n {
        let v = a.at(idx).apply([
            w.component(0)[idx],
            w.component(1)[idx],
            w.component(2)[idx],
        ]);
        for c in 0..3 {
            comps[c].push(v[c]);
        }
    }
    VectorField::from_components(*w.grid(), Placement::Collocated, comps)
}

fn face_average(a: &CoefficientField) -> [Vec<Sym3>; 3] {
    let grid = *a.grid();
    let nd = grid.node_dims();
    std::array::from_fn(|b| {
        let d = grid.component_dims(Placement::Face, b);
        let mut out = Vec::with_capacity(d[0] * d[1] * d[2]);
        let (p, q) = ((b + 1) % 3, (b + 2) % 3);
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let base = [i, j, k];
                    let mut acc = Sym3::diag(0.0, 0.0, 0.0);
                    for (dp, dq) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                        let mut node = base;
                        node[p] += dp;
                        node[q] += dq;
                        let e = a.at(linear_index(nd, node[0], node[1], node[2]));
                        acc = Sym3 {
                            xx: acc.xx + e.xx,
                            yy: acc.yy + e.yy,
                            zz: acc.zz + e.zz,
                            xy: acc.xy + e.xy,
                            xz: acc.xz + e.xz,
                            yz: acc.yz + e.yz,
                        };
                    }
                    out.push(acc.scaled(0.25));
                }
            }
        }
        out
    })
}

fn off_diagonal(e: &Sym3, b: usize, c: usize) -> f64 {
    match (b.min(c), b.max(c)) {
        (0, 1) => e.xy,
        (0, 2) => e.xz,
        (1, 2) => e.yz,
        _ => unreachable!(),
    }
}

/// Face-located `a·w`: diagonal entries act on the face's own component;
/// each off-diagonal couples the four nearest faces of the other orientation
/// with weight ¼ and the coefficient averaged between the two faces, which
/// keeps the discrete operator symmetric.
fn multiply_faces(grid: &Grid3, fc: &[Vec<Sym3>; 3], w: &VectorField) -> Result<VectorField> {
    let mut out = VectorField::zeros(*grid, Placement::Face)?;
    for b in 0..3 {
        let diag: Vec<f64> = fc[b]
            .iter()
            .zip(w.component(b))
            .map(|(e, v)| {
                let a_bb = [e.xx, e.yy, e.zz][b];
                a_bb * v
            })
            .collect();
        out.component_mut(b).copy_from_slice(&diag);
    }
    for (b, c) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let db = grid.component_dims(Placement::Face, b);
        let dc = grid.component_dims(Placement::Face, c);
        for k in 0..db[2] {
            for j in 0..db[1] {
                for i in 0..db[0] {
                    let f = [i, j, k];
                    let fi = linear_index(db, i, j, k);
                    // faces of orientation c touching face f: shift axis b down by
                    // 0 or 1 and axis c up by 0 or 1
                    for sb in 0..2usize {
                        for sc in 0..2usize {
                            if f[b] < sb {
                                continue;
                            }
                            let mut g = f;
                            g[b] -= sb;
                            g[c] += sc;
                            if g[b] >= dc[b] || g[c] >= dc[c] {
                                continue;
                            }
                            let gi = linear_index(dc, g[0], g[1], g[2]);
                            let coef = 0.125
                                * (off_diagonal(&fc[b][fi], b, c) + off_diagonal(&fc[c][gi], b, c));
                            if coef == 0.0 {
                                continue;
                            }
                            let wb = w.component(b)[fi];
                            let wc = w.component(c)[gi];
                            out.component_mut(b)[fi] += coef * wc;
                            out.component_mut(c)[gi] += coef * wb;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `u ↦ curl curl u + u`.
pub fn apply_k(u: &VectorField) -> Result<VectorField> {
    match u.grid().topology() {
        Topology::Torus => {
            let sg = SpectralGrid::new(u.grid())?;
            sg.check(u)?;
            sg.map_modes(u, k_symbol)
        }
        Topology::PecBox => {
            check_pec(u)?;
            let c = CurlOperator::new(u.grid())?;
            let mut out = c.apply_transpose(&c.apply(u)?)?;
            out.enforce_pec();
            out.axpy(1.0, u)?;
            Ok(out)
        }
    }
}

/// `K̂ v = (1 + |ξ|²) v − ξ (ξ·v)`
pub(crate) fn k_symbol(xi: [f64; 3], _full2: f64, v: [Complex64; 3]) -> [Complex64; 3] {
    let x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    let dot = xi[0] * v[0] + xi[1] * v[1] + xi[2] * v[2];
    std::array::from_fn(|c| v[c] * (1.0 + x2) - dot * xi[c])
}

/// Relative size, against the largest transformed coefficient of `f`, below
/// which a mode's divergence-free part is treated as rounding noise and left
/// in `g₁`.
pub const SPLIT_NOISE_FLOOR: f64 = 1e-13;

/// Splits a periodic field as `f = g₁ + curl g₂` with `g₂` divergence-free
/// and mean-free (Coulomb gauge). `g₁` carries the curl-free part and the
/// mean.
pub fn dual_split(f: &VectorField) -> Result<(VectorField, VectorField)> {
    let sg = SpectralGrid::new(f.grid())?;
    let spec = sg.forward(f)?;
    let scale = spec
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0_f64, |m, v| m.max(v.norm()));
    let floor = SPLIT_NOISE_FLOOR * scale;
    let zero = Complex64::default();
    let mut g1: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![zero; sg.len()]);
    let mut g2: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![zero; sg.len()]);
    sg.for_each_mode(|idx, xi, _| {
        let v = [spec[0][idx], spec[1][idx], spec[2][idx]];
        let x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if x2 == 0.0 {
            for c in 0..3 {
                g1[c][idx] = v[c];
            }
            return;
        }
        // ĝ₂ = iξ × f̂ / |ξ|², then ĝ₁ = f̂ − iξ × ĝ₂ (the longitudinal part)
        let w = i_cross(xi, v);
        let wn = (w[0].norm_sqr() + w[1].norm_sqr() + w[2].norm_sqr()).sqrt();
        if wn / x2.sqrt() <= floor {
            for c in 0..3 {
                g1[c][idx] = v[c];
            }
            return;
        }
        let h = w.map(|z| z / x2);
        let ch = i_cross(xi, h);
        for c in 0..3 {
            g2[c][idx] = h[c];
            g1[c][idx] = v[c] - ch[c];
        }
    });
    Ok((sg.inverse(g1), sg.inverse(g2)))
}
