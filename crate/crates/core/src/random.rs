//! Seeded random fields for trials and manufactured solutions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid3, ScalarField, Topology, VectorField};
use crate::spectral::{signed_frequency, SpectralGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_bandwidth(grid: &Grid3, bandwidth: usize) -> Result<()> {
    let n_min = *grid.n().iter().min().unwrap();
    if bandwidth == 0 || 2 * bandwidth >= n_min {
        return Err(Error::InvalidParameter(format!(
            "bandwidth {bandwidth} must satisfy 1 <= B < n/2 = {}",
            n_min as f64 / 2.0
        )));
    }
    Ok(())
}

fn band_limited(sg: &SpectralGrid, bandwidth: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = sg.grid().n();
    let mut spec = vec![Complex64::default(); sg.len()];
    let b = bandwidth as i64;
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let f = [
                    signed_frequency(i, n[0]),
                    signed_frequency(j, n[1]),
                    signed_frequency(k, n[2]),
                ];
                if f.iter().any(|v| v.abs() > b) {
                    continue;
                }
                let k2 = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) as f64;
                let amp = 1.0 / (1.0 + k2);
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                spec[i + n[0] * (j + n[1] * k)] = z * amp;
            }
        }
    }
    let mut v = sg.inverse_scalar(spec);
    // unit-ish amplitude independent of resolution
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max > 0.0 {
        v.iter_mut().for_each(|x| *x /= max);
    }
    v
}

/// Random field with Fourier support `|kᵢ| <= bandwidth` on the torus, or
/// independent uniform values on the interior edges of the PEC box.
pub fn random_vector_field(grid: &Grid3, bandwidth: usize, seed: u64) -> Result<VectorField> {
    let mut rng = rng(seed);
    match grid.topology() {
        Topology::Torus => {
            check_bandwidth(grid, bandwidth)?;
            let sg = SpectralGrid::new(grid)?;
            let comps = std::array::from_fn(|_| band_limited(&sg, bandwidth, &mut rng));
            VectorField::from_components(*grid, grid.default_placement(), comps)
        }
        Topology::PecBox => {
            let mut u = VectorField::zeros(*grid, grid.default_placement())?;
            for c in 0..3 {
                u.component_mut(c)
                    .iter_mut()
                    .for_each(|v| *v = rng.gen_range(-1.0..1.0));
            }
            u.enforce_pec();
            Ok(u)
        }
    }
}

/// Band-limited periodic scalar field.
pub fn random_scalar_field(grid: &Grid3, bandwidth: usize, seed: u64) -> Result<ScalarField> {
    grid.require(Topology::Torus)?;
    check_bandwidth(grid, bandwidth)?;
    let sg = SpectralGrid::new(grid)?;
    let mut rng = rng(seed);
    ScalarField::from_vec(*grid, band_limited(&sg, bandwidth, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let g = Grid3::unit_torus(8).unwrap();
        let a = random_vector_field(&g, 2, 7).unwrap();
        let b = random_vector_field(&g, 2, 7).unwrap();
        let c = random_vector_field(&g, 2, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bandwidth_validated() {
        let g = Grid3::unit_torus(8).unwrap();
        assert!(random_vector_field(&g, 4, 0).is_err());
        assert!(random_vector_field(&g, 0, 0).is_err());
    }

    #[test]
    fn box_fields_respect_pec() {
        let g = Grid3::unit_box(4).unwrap();
        let u = random_vector_field(&g, 1, 3).unwrap();
        assert_eq!(u.tangential_boundary_max(), 0.0);
        assert!(u.max_abs() > 0.0);
    }
}
