use curlcurl::{
    ellipticity_bounds, holder_seminorm, k0, sample_coefficient, step_size, EllipticityBounds,
    Error, ErrorClass, Grid3, GroegerSolver, KInverse, SolveStatus, SolverParams, VectorField,
};
use rayon::prelude::*;
use serde::Serialize;

use super::{build_field, Context, Finished, Status};
use crate::config::{ContractionRow, ContractionSection};
use crate::report::{Output, RunReport};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
struct Row {
    label: String,
    m: Option<f64>,
    #[serde(rename = "M")]
    big_m: Option<f64>,
    holder_estimate: Option<f64>,
    holder_sampled: Option<bool>,
    t: Option<f64>,
    k0: Option<f64>,
    measured_rate: Option<f64>,
    margin: Option<f64>,
    exceeds_budget: Option<bool>,
    iterations: Option<usize>,
    status: Option<SolveStatus>,
    error: Option<String>,
}

fn run_row(
    idx: usize,
    row: &ContractionRow,
    sec: &ContractionSection,
    grid: &Grid3,
    field: &VectorField,
) -> (Row, Option<Error>) {
    let mut out = Row {
        label: row.label.clone().unwrap_or_else(|| format!("row {idx}")),
        m: None,
        big_m: None,
        holder_estimate: None,
        holder_sampled: None,
        t: None,
        k0: None,
        measured_rate: None,
        margin: None,
        exceeds_budget: None,
        iterations: None,
        status: None,
        error: None,
    };
    let result = (|| -> Result<(), Error> {
        let a = sample_coefficient(&row.coefficient, grid)?;
        let (m, big_m) = ellipticity_bounds(&a)?;
        out.m = Some(m);
        out.big_m = Some(big_m);
        let h = holder_seminorm(&a, sec.holder_s)?;
        out.holder_estimate = Some(h.value);
        out.holder_sampled = Some(h.sampled);
        let t = step_size(m, big_m)?;
        out.t = Some(t);
        let budget = k0(
            0.0,
            2.0,
            &EllipticityBounds::new(m, big_m, 0.0, 0.0)?,
            row.k2,
            t,
            1.0,
        );
        out.k0 = Some(budget);
        let params = SolverParams {
            tol: sec.tol,
            max_iter: sec.max_iter,
            ..SolverParams::new(row.k2)
        };
        let solver = GroegerSolver::new(a, params, KInverse::for_grid(grid))?;
        let f = solver.operator().apply(field)?;
        let (_, trace) = solver.solve_manufactured(&f, field)?;
        out.iterations = Some(trace.iterations());
        out.status = Some(trace.status);
        if let Some(rate) = trace.max_ratio() {
            out.measured_rate = Some(rate);
            out.margin = Some(budget + sec.slack - rate);
            out.exceeds_budget = Some(rate > budget + sec.slack);
        }
        Ok(())
    })();
    match result {
        Ok(()) => (out, None),
        Err(e) => {
            out.error = Some(e.to_string());
            (out, Some(e))
        }
    }
}

pub fn run(ctx: Context) -> Result<Finished, CliError> {
    let sec = ctx
        .config
        .contraction
        .clone()
        .ok_or_else(|| CliError::Config("missing [contraction] section".into()))?;
    if sec.rows.is_empty() {
        return Err(CliError::Config(
            "contraction.rows: sweep list is empty".into(),
        ));
    }
    if !(sec.holder_s > 0.0 && sec.holder_s < 1.0) {
        return Err(CliError::Config(format!(
            "contraction.holder_s: must lie in (0, 1), got {}",
            sec.holder_s
        )));
    }
    let grid = ctx.config.grid.build()?;
    let field = build_field(&sec.field, &grid, ctx.config.seed, "contraction.field")?;

    let results: Vec<(Row, Option<Error>)> = sec
        .rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| run_row(i, row, &sec, &grid, &field))
        .collect();

    let mut report = RunReport::new("contraction", ctx.config.clone());
    report.note("k0 evaluated at (s, p) = (0, 2) with t = m/M^2; M~ is reported but does not enter at s = 0");
    report.note(
        "measured rate: largest per-step ratio of H(curl) errors against the manufactured solution",
    );
    if let (crate::config::FieldSpec::Random { bandwidth }, Some(seed)) =
        (&sec.field, ctx.config.seed)
    {
        report.note(format!(
            "manufactured solution: random field, seed {seed}, bandwidth {bandwidth}"
        ));
    }
    let mut status = Status::Ok;
    for (row, err) in &results {
        if row.exceeds_budget == Some(true) {
            report.warn(format!(
                "{}: measured rate exceeds k0 + {}",
                row.label, sec.slack
            ));
        }
        if let Some(e) = err {
            report.warn(format!("{}: {e}", row.label));
            let s = match e.class() {
                ErrorClass::Input => Status::Config,
                ErrorClass::Hypothesis => Status::Hypothesis,
                ErrorClass::Numerical => Status::Numerical,
            };
            if status == Status::Ok {
                status = s;
            }
        }
        if row.status.is_some_and(|s| s != SolveStatus::Converged) && status == Status::Ok {
            status = Status::Numerical;
        }
    }
    let rows: Vec<Row> = results.into_iter().map(|(r, _)| r).collect();
    report.put("rows", "cmd_contraction", &rows);
    report.put(
        "all_within_budget",
        "cmd_contraction",
        rows.iter().all(|r| r.exceeds_budget != Some(true)),
    );

    let mut out = Output::new(ctx.out_dir)?;
    out.csv("contraction.csv", &rows)?;
    Ok(Finished {
        report,
        out,
        status,
    })
}
