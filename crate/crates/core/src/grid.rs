//! Discrete domains and the field containers that live on them.
//!
//! Two topologies are supported. On the [`Topology::Torus`] every field is
//! collocated on the `n₁ × n₂ × n₃` node lattice and differentiated
//! spectrally. On the [`Topology::PecBox`] vector fields are staggered in the
//! Yee fashion: primal unknowns live on cell edges, curls on cell faces, and
//! the perfect-conductor condition `ν ∧ u = 0` pins the edges lying in the
//! boundary faces to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Torus,
    PecBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Collocated,
    Edge,
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    topology: Topology,
    n: [usize; 3],
    extent: [f64; 3],
}

impl Grid3 {
    pub fn new(topology: Topology, n: [usize; 3], extent: [f64; 3]) -> Result<Self> {
        if n.iter().any(|&ni| ni < 2) {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 2 cells, got {n:?}"
            )));
        }
        if extent.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "side lengths must be positive and finite, got {extent:?}"
            )));
        }
        Ok(Self {
            topology,
            n,
            extent,
        })
    }

    /// Torus with unit side lengths.
    pub fn unit_torus(n: usize) -> Result<Self> {
        Self::new(Topology::Torus, [n; 3], [1.0; 3])
    }

    pub fn unit_box(n: usize) -> Result<Self> {
        Self::new(Topology::PecBox, [n; 3], [1.0; 3])
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn extent(&self) -> [f64; 3] {
        self.extent
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            self.extent[0] / self.n[0] as f64,
            self.extent[1] / self.n[1] as f64,
            self.extent[2] / self.n[2] as f64,
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    /// Dimensions of the node lattice carrying coefficients and scalar fields.
    /// Periodic nodes wrap, so the torus has `n` per axis and the box `n + 1`.
    pub fn node_dims(&self) -> [usize; 3] {
        match self.topology {
            Topology::Torus => self.n,
            Topology::PecBox => [self.n[0] + 1, self.n[1] + 1, self.n[2] + 1],
        }
    }

    pub fn node_count(&self) -> usize {
        let d = self.node_dims();
        d[0] * d[1] * d[2]
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.spacing();
        [i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]
    }

    /// Distance used by Hoelder quotients: componentwise periodic geodesic on
    /// the torus, Euclidean in the box. Arguments are node index offsets.
    pub fn node_distance(&self, di: usize, dj: usize, dk: usize) -> f64 {
        let h = self.spacing();
        let d = [di, dj, dk];
        let mut acc = 0.0;
        for ax in 0..3 {
            let steps = match self.topology {
                Topology::Torus => d[ax].min(self.n[ax] - d[ax]),
                Topology::PecBox => d[ax],
            };
            let x = steps as f64 * h[ax];
            acc += x * x;
        }
        acc.sqrt()
    }

    pub fn default_placement(&self) -> Placement {
        match self.topology {
            Topology::Torus => Placement::Collocated,
            Topology::PecBox => Placement::Edge,
        }
    }

    pub fn check_placement(&self, placement: Placement) -> Result<()> {
        let ok = matches!(
            (self.topology, placement),
            (Topology::Torus, Placement::Collocated)
                | (Topology::PecBox, Placement::Edge)
                | (Topology::PecBox, Placement::Face)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::PlacementMismatch {
                expected: self.default_placement(),
                got: placement,
            })
        }
    }

    pub fn require(&self, topology: Topology) -> Result<()> {
        if self.topology == topology {
            Ok(())
        } else {
            Err(Error::UnsupportedTopology {
                required: topology,
                actual: self.topology,
            })
        }
    }

    /// Array dimensions of component `c` of a field with the given placement.
    pub fn component_dims(&self, placement: Placement, c: usize) -> [usize; 3] {
        let n = self.n;
        match placement {
            Placement::Collocated => n,
            Placement::Edge => {
                let mut d = [n[0] + 1, n[1] + 1, n[2] + 1];
                d[c] = n[c];
                d
            }
            Placement::Face => {
                let mut d = n;
                d[c] = n[c] + 1;
                d
            }
        }
    }

    /// Physical location of entry `(i, j, k)` of component `c`.
    pub fn component_position(&self, placement: Placement, c: usize, idx: [usize; 3]) -> [f64; 3] {
        let h = self.spacing();
        let mut x = [
            idx[0] as f64 * h[0],
            idx[1] as f64 * h[1],
            idx[2] as f64 * h[2],
        ];
        match placement {
            Placement::Collocated => {}
            Placement::Edge => x[c] += 0.5 * h[c],
            Placement::Face => {
                for (ax, xa) in x.iter_mut().enumerate() {
                    if ax != c {
                        *xa += 0.5 * h[ax];
                    }
                }
            }
        }
        x
    }
}

#[inline]
pub(crate) fn linear_index(dims: [usize; 3], i: usize, j: usize, k: usize) -> usize {
    i + dims[0] * (j + dims[1] * k)
}

/// Three scalar arrays sampled on a [`Grid3`] with a fixed placement.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid3,
    placement: Placement,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid3, placement: Placement) -> Result<Self> {
        grid.check_placement(placement)?;
        let comps = std::array::from_fn(|c| {
            let d = grid.component_dims(placement, c);
            vec![0.0; d[0] * d[1] * d[2]]
        });
        Ok(Self {
            grid,
            placement,
            comps,
        })
    }

    /// Samples `f(x)` at the location of every entry. Component `c` of the
    /// returned triple is stored for component `c`.
    pub fn from_fn(
        grid: Grid3,
        placement: Placement,
        f: impl Fn([f64; 3]) -> [f64; 3],
    ) -> Result<Self> {
        let mut out = Self::zeros(grid, placement)?;
        for c in 0..3 {
            let d = grid.component_dims(placement, c);
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let x = grid.component_position(placement, c, [i, j, k]);
                        out.comps[c][linear_index(d, i, j, k)] = f(x)[c];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn from_components(
        grid: Grid3,
        placement: Placement,
        comps: [Vec<f64>; 3],
    ) -> Result<Self> {
        grid.check_placement(placement)?;
        for (c, data) in comps.iter().enumerate() {
            let d = grid.component_dims(placement, c);
            if data.len() != d[0] * d[1] * d[2] {
                return Err(Error::InvalidSpec(format!(
                    "component {c} has {} entries, expected {}",
                    data.len(),
                    d[0] * d[1] * d[2]
                )));
            }
        }
        Ok(Self {
            grid,
            placement,
            comps,
        })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.comps
    }

    pub fn dims(&self, c: usize) -> [usize; 3] {
        self.grid.component_dims(self.placement, c)
    }

    pub(crate) fn check_compatible(&self, other: &VectorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.placement != other.placement {
            return Err(Error::PlacementMismatch {
                expected: self.placement,
                got: other.placement,
            });
        }
        Ok(())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &VectorField) -> Result<()> {
        self.check_compatible(other)?;
        for c in 0..3 {
            for (a, b) in self.comps[c].iter_mut().zip(&other.comps[c]) {
                *a += alpha * b;
            }
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> VectorField {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn scale(&mut self, alpha: f64) {
        for comp in &mut self.comps {
            comp.iter_mut().for_each(|v| *v *= alpha);
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Cell-volume weighted inner product.
    pub fn dot(&self, other: &VectorField) -> Result<f64> {
        self.check_compatible(other)?;
        let raw: f64 = (0..3)
            .map(|c| {
                self.comps[c]
                    .iter()
                    .zip(&other.comps[c])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .sum();
        Ok(raw * self.grid.cell_volume())
    }

    pub fn norm_l2(&self) -> f64 {
        let raw: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum();
        (raw * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|v| v.is_finite())
    }

    /// Pointwise Euclidean magnitude; collocated fields only.
    pub fn magnitude(&self) -> Result<Vec<f64>> {
        if self.placement != Placement::Collocated {
            return Err(Error::PlacementMismatch {
                expected: Placement::Collocated,
                got: self.placement,
            });
        }
        Ok((0..self.comps[0].len())
            .map(|i| {
                let (x, y, z) = (self.comps[0][i], self.comps[1][i], self.comps[2][i]);
                (x * x + y * y + z * z).sqrt()
            })
            .collect())
    }

    fn for_each_tangential_edge(&self, mut visit: impl FnMut(usize, usize)) {
        for c in 0..3 {
            let d = self.dims(c);
            let n = self.grid.n();
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let idx = [i, j, k];
                        let on_boundary = (0..3)
                            .filter(|&ax| ax != c)
                            .any(|ax| idx[ax] == 0 || idx[ax] == n[ax]);
                        if on_boundary {
                            visit(c, linear_index(d, i, j, k));
                        }
                    }
                }
            }
        }
    }

    /// Largest magnitude among edges lying in a boundary face.
    pub fn tangential_boundary_max(&self) -> f64 {
        if self.placement != Placement::Edge {
            return 0.0;
        }
        let mut m = 0.0_f64;
        self.for_each_tangential_edge(|c, i| m = m.max(self.comps[c][i].abs()));
        m
    }

    /// Zeroes every edge lying in a boundary face (`ν ∧ u = 0`).
    pub fn enforce_pec(&mut self) {
        if self.placement != Placement::Edge {
            return;
        }
        let mut hits = Vec::new();
        self.for_each_tangential_edge(|c, i| hits.push((c, i)));
        for (c, i) in hits {
            self.comps[c][i] = 0.0;
        }
    }

    pub fn with_pec(mut self) -> Self {
        self.enforce_pec();
        self
    }
}

/// A scalar sampled on the node lattice of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid3,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> f64) -> Self {
        let d = grid.node_dims();
        let mut data = Vec::with_capacity(grid.node_count());
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    data.push(f(grid.node_position(i, j, k)));
                }
            }
        }
        Self { grid, data }
    }

    pub fn from_vec(grid: Grid3, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.node_count() {
            return Err(Error::InvalidSpec(format!(
                "scalar field has {} entries, expected {}",
                data.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise product with a collocated vector field.
    pub fn multiply(&self, v: &VectorField) -> Result<VectorField> {
        if self.grid != *v.grid() {
            return Err(Error::GridMismatch);
        }
        if v.placement() != Placement::Collocated {
            return Err(Error::PlacementMismatch {
                expected: Placement::Collocated,
                got: v.placement(),
            });
        }
        let comps = std::array::from_fn(|c| {
            v.component(c)
                .iter()
                .zip(&self.data)
                .map(|(a, g)| a * g)
                .collect()
        });
        VectorField::from_components(self.grid, Placement::Collocated, comps)
    }
}
