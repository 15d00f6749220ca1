//! Eigenvalues of real symmetric 3×3 matrices.

use serde::{Deserialize, Serialize};

/// Symmetric 3×3 matrix stored by its six distinct entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl Sym3 {
    pub const IDENTITY: Sym3 = Sym3::diag(1.0, 1.0, 1.0);

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Self {
            xx: a,
            yy: b,
            zz: c,
            xy: 0.0,
            xz: 0.0,
            yz: 0.0,
        }
    }

    pub fn from_rows(m: [[f64; 3]; 3]) -> Option<Self> {
        let sym = m[0][1] == m[1][0] && m[0][2] == m[2][0] && m[1][2] == m[2][1];
        sym.then_some(Self {
            xx: m[0][0],
            yy: m[1][1],
            zz: m[2][2],
            xy: m[0][1],
            xz: m[0][2],
            yz: m[1][2],
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            xx: self.xx * s,
            yy: self.yy * s,
            zz: self.zz * s,
            xy: self.xy * s,
            xz: self.xz * s,
            yz: self.yz * s,
        }
    }

    pub fn sub(&self, o: &Sym3) -> Self {
        Self {
            xx: self.xx - o.xx,
            yy: self.yy - o.yy,
            zz: self.zz - o.zz,
            xy: self.xy - o.xy,
            xz: self.xz - o.xz,
            yz: self.yz - o.yz,
        }
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        [
            self.xx * v[0] + self.xy * v[1] + self.xz * v[2],
            self.xy * v[0] + self.yy * v[1] + self.yz * v[2],
            self.xz * v[0] + self.yz * v[1] + self.zz * v[2],
        ]
    }

    pub fn is_finite(&self) -> bool {
        [self.xx, self.yy, self.zz, self.xy, self.xz, self.yz]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        sym3_eigenvalues(self)
    }

    /// Spectral norm, i.e. the largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        let e = self.eigenvalues();
        e[0].abs().max(e[2].abs())
    }
}

/// Exact for diagonal input; otherwise cyclic Jacobi rotations, which stay
/// accurate at repeated eigenvalues where the closed-form cubic does not.
pub fn sym3_eigenvalues(a: &Sym3) -> [f64; 3] {
    let off = a.xy * a.xy + a.xz * a.xz + a.yz * a.yz;
    if off == 0.0 {
        let mut d = [a.xx, a.yy, a.zz];
        d.sort_by(f64::total_cmp);
        return d;
    }
    jacobi_eigenvalues(a)
}

fn jacobi_eigenvalues(a: &Sym3) -> [f64; 3] {
    let mut m = [[a.xx, a.xy, a.xz], [a.xy, a.yy, a.yz], [a.xz, a.yz, a.zz]];
    for _sweep in 0..64 {
        let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        let diag = m[0][0] * m[0][0] + m[1][1] * m[1][1] + m[2][2] * m[2][2];
        if off <= f64::EPSILON * f64::EPSILON * 1e-4 * diag || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if m[p][q] == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // M <- Jᵀ M J
            for row in m.iter_mut() {
                let (mp, mq) = (row[p], row[q]);
                row[p] = c * mp - s * mq;
                row[q] = s * mp + c * mq;
            }
            for col in 0..3 {
                let (mp, mq) = (m[p][col], m[q][col]);
                m[p][col] = c * mp - s * mq;
                m[q][col] = s * mp + c * mq;
            }
        }
    }
    let mut d = [m[0][0], m[1][1], m[2][2]];
    d.sort_by(f64::total_cmp);
    d
}
