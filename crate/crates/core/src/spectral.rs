//! Three-dimensional FFTs and wavevector tables for the periodic grid.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{linear_index, Grid3, Placement, Topology, VectorField};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub type Spectrum = [Vec<Complex64>; 3];

/// FFT plans plus per-axis wavenumbers for one torus grid.
pub struct SpectralGrid {
    grid: Grid3,
    dims: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    /// Angular wavenumbers used for differentiation; the Nyquist entry is zero
    /// so that derivatives of real fields stay real.
    deriv: [Vec<f64>; 3],
    /// Angular wavenumbers including the Nyquist magnitude.
    full: [Vec<f64>; 3],
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Clone for SpectralGrid {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid,
            dims: self.dims,
            fwd: self.fwd.clone(),
            inv: self.inv.clone(),
            deriv: self.deriv.clone(),
            full: self.full.clone(),
        }
    }
}

/// Signed integer frequency of FFT bin `i` out of `n`.
pub fn signed_frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl SpectralGrid {
    pub fn new(grid: &Grid3) -> Result<Self> {
        grid.require(Topology::Torus)?;
        let dims = grid.n();
        let extent = grid.extent();
        let (fwd, inv) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (
                std::array::from_fn(|ax| p.plan_fft_forward(dims[ax])),
                std::array::from_fn(|ax| p.plan_fft_inverse(dims[ax])),
            )
        });
        let full: [Vec<f64>; 3] = std::array::from_fn(|ax| {
            (0..dims[ax])
                .map(|i| 2.0 * PI * signed_frequency(i, dims[ax]) as f64 / extent[ax])
                .collect()
        });
        let deriv = std::array::from_fn(|ax| {
            let n = dims[ax];
            let mut v = full[ax].clone();
            if n.is_multiple_of(2) {
                v[n / 2] = 0.0;
            }
            v
        });
        Ok(Self {
            grid: *grid,
            dims,
            fwd,
            inv,
            deriv,
            full,
        })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(index, ξ, |ξ_full|²)` for every mode, where `ξ` is the
    /// differentiation wavevector.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, [f64; 3], f64)) {
        let d = self.dims;
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let xi = [self.deriv[0][i], self.deriv[1][j], self.deriv[2][k]];
                    let full2 =
                        self.full[0][i].powi(2) + self.full[1][j].powi(2) + self.full[2][k].powi(2);
                    f(linear_index(d, i, j, k), xi, full2);
                }
            }
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let d = self.dims;
        let plans = if inverse { &self.inv } else { &self.fwd };
        // axis 0 is contiguous
        plans[0].process(data);
        // axes 1 and 2: gather lines, transform, scatter
        for ax in 1..3 {
            let len = d[ax];
            let lines = data.len() / len;
            let mut buf = vec![Complex64::new(0.0, 0.0); data.len()];
            let stride = if ax == 1 { d[0] } else { d[0] * d[1] };
            let mut line = 0;
            for outer in 0..(data.len() / (stride * len)) {
                for inner in 0..stride {
                    let base = outer * stride * len + inner;
                    for t in 0..len {
                        buf[line * len + t] = data[base + t * stride];
                    }
                    line += 1;
                }
            }
            debug_assert_eq!(line, lines);
            plans[ax].process(&mut buf);
            let mut line = 0;
            for outer in 0..(data.len() / (stride * len)) {
                for inner in 0..stride {
                    let base = outer * stride * len + inner;
                    for t in 0..len {
                        data[base + t * stride] = buf[line * len + t];
                    }
                    line += 1;
                }
            }
        }
        if inverse {
            let scale = 1.0 / data.len() as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }

    pub fn forward_scalar(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_scalar(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut data, true);
        data.into_iter().map(|c| c.re).collect()
    }

    pub fn forward(&self, u: &VectorField) -> Result<Spectrum> {
        self.check(u)?;
        Ok(std::array::from_fn(|c| self.forward_scalar(u.component(c))))
    }

    pub fn inverse(&self, spec: Spectrum) -> VectorField {
        let comps = spec.map(|c| self.inverse_scalar(c));
        VectorField::from_components(self.grid, Placement::Collocated, comps)
            .expect("spectrum sized by this grid")
    }

    pub fn check(&self, u: &VectorField) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if u.placement() != Placement::Collocated {
            return Err(Error::PlacementMismatch {
                expected: Placement::Collocated,
                got: u.placement(),
            });
        }
        Ok(())
    }

    /// Applies a per-mode 3-vector map in transform space.
    pub fn map_modes(
        &self,
        u: &VectorField,
        f: impl Fn([f64; 3], f64, [Complex64; 3]) -> [Complex64; 3],
    ) -> Result<VectorField> {
        let mut spec = self.forward(u)?;
        self.for_each_mode(|idx, xi, full2| {
            let v = [spec[0][idx], spec[1][idx], spec[2][idx]];
            let w = f(xi, full2, v);
            for c in 0..3 {
                spec[c][idx] = w[c];
            }
        });
        Ok(self.inverse(spec))
    }
}

#[inline]
pub(crate) fn i_cross(xi: [f64; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    // i ξ × v
    let i = Complex64::new(0.0, 1.0);
    [
        i * (xi[1] * v[2] - xi[2] * v[1]),
        i * (xi[2] * v[0] - xi[0] * v[2]),
        i * (xi[0] * v[1] - xi[1] * v[0]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_identity() {
        let g = Grid3::new(Topology::Torus, [4, 6, 5], [1.0, 2.0, 3.0]).unwrap();
        let sg = SpectralGrid::new(&g).unwrap();
        let vals: Vec<f64> = (0..sg.len())
            .map(|i| ((i * 37) % 11) as f64 - 5.0)
            .collect();
        let back = sg.inverse_scalar(sg.forward_scalar(&vals));
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_in_its_bin() {
        let g = Grid3::new(Topology::Torus, [8, 4, 4], [1.0; 3]).unwrap();
        let sg = SpectralGrid::new(&g).unwrap();
        let u = VectorField::from_fn(g, Placement::Collocated, |x| {
            [(2.0 * PI * 2.0 * x[0]).cos(), 0.0, 0.0]
        })
        .unwrap();
        let s = sg.forward(&u).unwrap();
        let n = sg.len() as f64;
        assert!((s[0][2].re - n / 2.0).abs() < 1e-10);
        assert!((s[0][6].re - n / 2.0).abs() < 1e-10);
        assert!(s[0][1].norm() < 1e-10);
    }

    #[test]
    fn nyquist_derivative_is_zeroed() {
        assert_eq!(signed_frequency(3, 4), -1);
        let g = Grid3::unit_torus(4).unwrap();
        let sg = SpectralGrid::new(&g).unwrap();
        assert_eq!(sg.deriv[0][2], 0.0);
        assert!((sg.full[0][2] - 4.0 * PI).abs() < 1e-14);
    }
}
