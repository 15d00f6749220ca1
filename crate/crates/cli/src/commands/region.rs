use curlcurl::{
    region_geometry, region_sample, sample_coefficient, EllipticityBounds, Error, RegionParams,
};
use serde::Serialize;
use serde_json::json;

use super::{Context, Finished, Status};
use crate::plot;
use crate::report::{Output, RunReport};
use crate::CliError;

#[derive(Serialize)]
struct CsvRow {
    s: f64,
    inv_p: f64,
    #[serde(rename = "in_R")]
    in_r: bool,
    #[serde(rename = "in_Splus")]
    in_s_plus: bool,
    #[serde(rename = "in_Sminus")]
    in_s_minus: bool,
    theta: Option<f64>,
    s0: Option<f64>,
    invp0: Option<f64>,
}

#[derive(Serialize)]
struct Vertex {
    s: f64,
    inv_p: f64,
}

pub fn run(ctx: Context) -> Result<Finished, CliError> {
    let sec = ctx
        .config
        .region
        .clone()
        .ok_or_else(|| CliError::Config("missing [region] section".into()))?;
    let mut report = RunReport::new("region", ctx.config.clone());

    let bounds = match &sec.bounds {
        Some(b) => {
            report.note("m, M, M~: user supplied");
            b.build()?
        }
        None => {
            let grid = ctx.config.grid.build()?;
            let a = sample_coefficient(&ctx.config.coefficient, &grid)
                .map_err(|e| CliError::field("coefficient", e))?;
            let b = EllipticityBounds::from_field(&a, sec.holder_s).map_err(CliError::Core)?;
            report.note(format!(
                "m, M, M~: measured on the configured grid, Hoelder exponent {}",
                sec.holder_s
            ));
            b
        }
    };
    let params = RegionParams {
        p_omega: sec.p_omega,
        bounds,
        k2: sec.k2,
        c_model: sec.c_model.build(ctx.base)?,
        msp_model: sec.msp_model.build(ctx.base, ctx.config.seed)?,
        theta_steps: sec.theta_steps,
    };
    params
        .validate()
        .map_err(|e| CliError::field("region", e))?;
    report.note(params.c_model.provenance());
    report.note(params.msp_model.provenance());
    report.note(format!(
        "sample grid: s = -1 + 2i/(n-1), 1/p = (j+1)/(n+1), n = {}; theta search with {} steps",
        sec.resolution, sec.theta_steps
    ));

    let points = match region_sample(&params, sec.resolution) {
        Ok(p) => p,
        Err(e @ Error::ModelMissing { .. }) => {
            return Err(CliError::Config(format!("region: {e}")));
        }
        Err(e) => return Err(CliError::field("region", e)),
    };
    let vertices = region_geometry(sec.p_omega);

    let count = |f: &dyn Fn(&curlcurl::RegionPoint) -> bool| points.iter().filter(|p| f(p)).count();
    let n_r = count(&|p| p.in_r);
    let n_rp = count(&|p| p.in_r_plus);
    let n_rm = count(&|p| p.in_r_minus);
    let n_sp = count(&|p| p.in_s_plus);
    let n_sm = count(&|p| p.in_s_minus);
    report.put("bounds", "ellipticity_bounds", bounds);
    report.put(
        "k0_at_0_2",
        "k0",
        params.k0(0.0, 2.0).map_err(CliError::Core)?,
    );
    report.put("vertices", "region_geometry", &vertices);
    report.put(
        "counts",
        "region_sample",
        json!({
            "points": points.len(),
            "R": n_r,
            "R_plus": n_rp,
            "R_minus": n_rm,
            "S_plus": n_sp,
            "S_minus": n_sm,
        }),
    );
    report.put(
        "s_plus_equals_r_plus",
        "region_sample",
        points.iter().all(|p| p.in_s_plus == p.in_r_plus),
    );
    report.put(
        "s_minus_equals_r_minus",
        "region_sample",
        points.iter().all(|p| p.in_s_minus == p.in_r_minus),
    );
    report.put(
        "s_equals_r",
        "region_sample",
        points
            .iter()
            .all(|p| (p.in_s_plus || p.in_s_minus) == p.in_r),
    );

    let rows: Vec<CsvRow> = points
        .iter()
        .map(|p| CsvRow {
            s: p.s,
            inv_p: p.invp,
            in_r: p.in_r,
            in_s_plus: p.in_s_plus,
            in_s_minus: p.in_s_minus,
            theta: p.witness.map(|w| w.theta),
            s0: p.witness.map(|w| w.s0),
            invp0: p.witness.map(|w| w.invp0),
        })
        .collect();
    let verts: Vec<Vertex> = vertices
        .iter()
        .map(|v| Vertex {
            s: v[0],
            inv_p: v[1],
        })
        .collect();

    let mut out = Output::new(ctx.out_dir)?;
    out.csv("region.csv", &rows)?;
    out.csv("polygon.csv", &verts)?;
    let legend = [
        format!("p_Omega = {}, k^2 = {}", sec.p_omega, sec.k2),
        format!(
            "m = {}, M = {}, M~ = {}",
            bounds.m, bounds.big_m, bounds.holder
        ),
        params.c_model.provenance(),
        params.msp_model.provenance(),
    ];
    out.write(
        "region.svg",
        plot::region_svg(&points, &vertices, sec.resolution, &legend).as_bytes(),
    )?;
    Ok(Finished {
        report,
        out,
        status: Status::Ok,
    })
}
