use curlcurl::unperturbed::power_iteration_m02;
use curlcurl::{estimate_msp, IndexTable, OperatorNormEstimate, Topology};
use serde::Serialize;

use super::{Context, Finished, Status};
use crate::report::{estimate, Output, RunReport};
use crate::CliError;

#[derive(Serialize)]
struct CsvRow {
    s: f64,
    p: f64,
    value: f64,
    trials: usize,
    mode: &'static str,
}

fn row(e: &OperatorNormEstimate, mode: &'static str) -> CsvRow {
    CsvRow {
        s: e.s,
        p: e.p,
        value: e.value,
        trials: e.trials,
        mode,
    }
}

pub fn run(ctx: Context) -> Result<Finished, CliError> {
    let sec = ctx
        .config
        .msp
        .clone()
        .ok_or_else(|| CliError::Config("missing [msp] section".into()))?;
    if sec.indices.is_empty() && sec.power_iterations == 0 {
        return Err(CliError::Config("msp.indices: nothing to estimate".into()));
    }
    let grid = ctx.config.grid.build()?;
    if grid.topology() != Topology::Torus {
        return Err(CliError::Config("msp: estimates need a torus grid".into()));
    }
    let seed = ctx.seed("msp")?;
    let mut report = RunReport::new("msp", ctx.config.clone());
    report.note("random-trial values are lower bounds of the discrete operator norm");
    report.note("M_sp at (0, 2) = 1 (exact)");

    let mut rows = Vec::new();
    let mut table = IndexTable::default();
    let mut values = Vec::new();
    for (k, spec) in sec.indices.iter().enumerate() {
        let trials = spec.trials.unwrap_or(sec.trials);
        let s = seed.wrapping_add(k as u64 * 1_000_003);
        let est = estimate_msp(spec.s, spec.p, &grid, trials, s)
            .map_err(|e| CliError::field("msp.indices", e))?;
        report.randomized(&format!("M_sp({}, {})", spec.s, spec.p), s, trials);
        values.push(serde_json::json!({
            "s": spec.s,
            "p": spec.p,
            "estimate": estimate(est.value, s, trials, true),
        }));
        table.push(est.s, est.p, est.value);
        rows.push(row(&est, "random_trial"));
    }
    report.put("estimates", "estimate_msp", &values);

    if sec.power_iterations > 0 {
        let est = power_iteration_m02(&grid, sec.power_iterations, seed)
            .map_err(|e| CliError::field("msp", e))?;
        report.randomized("power iteration at (0, 2)", seed, sec.power_iterations);
        report.put("power_iteration_m02", "power_iteration_m02", est.value);
        rows.push(row(&est, "power_iteration"));
    }

    let mut out = Output::new(ctx.out_dir)?;
    out.csv("msp.csv", &rows)?;
    if !table.is_empty() {
        out.write("msp_table.txt", table.to_text("M").as_bytes())?;
    }
    Ok(Finished {
        report,
        out,
        status: Status::Ok,
    })
}
