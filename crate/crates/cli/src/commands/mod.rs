use std::path::Path;

use curlcurl::coefficient::Wave;
use curlcurl::random::random_vector_field;
use curlcurl::{Grid3, Topology, VectorField};

use crate::config::{FieldSpec, RunConfig};
use crate::report::{Output, RunReport};
use crate::CliError;

mod contraction;
mod msp;
mod norms;
mod region;
mod solve;

pub use contraction::run as contraction;
pub use msp::run as msp;
pub use norms::run as norms;
pub use region::run as region;
pub use solve::run as solve;

/// Exit status a command asks for after its outputs are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Config,
    Hypothesis,
    Numerical,
}

pub struct Finished {
    pub report: RunReport,
    pub out: Output,
    pub status: Status,
}

pub struct Context<'a> {
    pub config: RunConfig,
    pub base: &'a Path,
    pub out_dir: &'a Path,
}

impl Context<'_> {
    pub fn seed(&self, field: &str) -> Result<u64, CliError> {
        crate::config::require_seed(self.config.seed, field)
    }
}

pub fn build_field(
    spec: &FieldSpec,
    grid: &Grid3,
    seed: Option<u64>,
    field: &str,
) -> Result<VectorField, CliError> {
    match spec {
        FieldSpec::Random { bandwidth } => {
            let seed = crate::config::require_seed(seed, field)?;
            random_vector_field(grid, *bandwidth, seed).map_err(|e| CliError::field(field, e))
        }
        FieldSpec::Mode {
            amplitude,
            wavenumber,
            wave,
        } => {
            let ext = grid.extent();
            let u = VectorField::from_fn(*grid, grid.default_placement(), |x| {
                let frac: f64 = (0..3).map(|d| wavenumber[d] as f64 * x[d] / ext[d]).sum();
                let phase = 2.0 * std::f64::consts::PI * frac;
                let v = match wave {
                    Wave::Sin => phase.sin(),
                    Wave::Cos => phase.cos(),
                };
                amplitude.map(|a| a * v)
            })
            .map_err(|e| CliError::field(field, e))?;
            Ok(match grid.topology() {
                Topology::Torus => u,
                Topology::PecBox => u.with_pec(),
            })
        }
    }
}
