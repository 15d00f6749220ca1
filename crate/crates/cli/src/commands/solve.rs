use curlcurl::operators::hcurl_norm;
use curlcurl::{
    measure_contraction, sample_coefficient, stability_constant, Error, GroegerSolver, KInverse,
    SolveStatus, SolverParams,
};
use serde::Serialize;
use serde_json::json;

use super::{build_field, Context, Finished, Status};
use crate::config::SolveMode;
use crate::report::{Output, RunReport};
use crate::CliError;

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    increment: f64,
    relative_increment: f64,
    residual: f64,
    error: Option<f64>,
    ratio: Option<f64>,
}

pub fn run(ctx: Context) -> Result<Finished, CliError> {
    let sec = ctx
        .config
        .solve
        .clone()
        .ok_or_else(|| CliError::Config("missing [solve] section".into()))?;
    let grid = ctx.config.grid.build()?;
    let a = sample_coefficient(&ctx.config.coefficient, &grid)
        .map_err(|e| CliError::field("coefficient", e))?;
    let params = SolverParams {
        step: sec.step,
        tol: sec.tol,
        max_iter: sec.max_iter,
        ..SolverParams::new(sec.k2)
    };
    params.validate().map_err(|e| CliError::field("solve", e))?;
    let kinv = sec.kinv.unwrap_or_else(|| KInverse::for_grid(&grid));
    kinv.validate(&grid)
        .map_err(|e| CliError::field("solve.kinv", e))?;
    let solver = GroegerSolver::new(a, params, kinv).map_err(CliError::Core)?;
    let field = build_field(&sec.field, &grid, ctx.config.seed, "solve.field")?;

    let mut report = RunReport::new("solve", ctx.config.clone());
    let c = *solver.constants();
    report.put("m", "ellipticity_bounds", c.bounds.m);
    report.put("M", "ellipticity_bounds", c.bounds.big_m);
    report.put("t", "step_size", c.t);
    report.put("k0", "k0", json!({ "s": 0.0, "p": 2.0, "value": c.k0 }));
    match stability_constant(1.0, c.k0, c.bounds.m, c.bounds.big_m) {
        Ok(v) => report.put("stability_constant", "stability_constant", v),
        Err(e @ Error::NoContraction { .. }) => report.warn(e.to_string()),
        Err(e) => return Err(CliError::Core(e)),
    }
    report.note("M_sp at (0, 2) = 1 (exact)");
    report.note(format!("K inverse: {kinv:?}"));
    if let (crate::config::FieldSpec::Random { bandwidth }, Some(seed)) =
        (&sec.field, ctx.config.seed)
    {
        report.note(format!("random field: seed {seed}, bandwidth {bandwidth}"));
    }

    let (u, trace) = match sec.mode {
        SolveMode::Manufactured => {
            let f = solver.operator().apply(&field).map_err(CliError::Core)?;
            let out = solver
                .solve_manufactured(&f, &field)
                .map_err(CliError::Core)?;
            let err = out.0.sub(&field).map_err(CliError::Core)?;
            let rel = hcurl_norm(&err).map_err(CliError::Core)?
                / hcurl_norm(&field).map_err(CliError::Core)?;
            report.put("relative_error_hcurl", "groeger_solve", rel);
            out
        }
        SolveMode::Direct => solver.solve(&field).map_err(CliError::Core)?,
    };
    for w in &trace.warnings {
        report.warn(w.clone());
    }
    report.put("status", "groeger_solve", trace.status);
    report.put("iterations", "groeger_solve", trace.iterations());
    report.put("steps", "groeger_solve", trace.steps());
    report.put(
        "final_relative_increment",
        "groeger_solve",
        trace.records.last().map(|r| r.relative_increment),
    );
    report.put(
        "final_relative_residual",
        "groeger_solve",
        trace.final_relative_residual,
    );
    report.put("residual_bound", "groeger_solve", trace.residual_bound);
    report.put(
        "solution_hcurl_norm",
        "hcurl_norm",
        hcurl_norm(&u).map_err(CliError::Core)?,
    );
    if sec.mode == SolveMode::Manufactured {
        let max_ratio = trace.max_ratio();
        report.put("max_error_ratio", "groeger_solve", max_ratio);
        report.put(
            "budget_respected",
            "groeger_solve",
            max_ratio.map(|r| r <= c.k0 + 0.02),
        );
        let window = (sec.window[0], sec.window[1]);
        match measure_contraction(&trace, window) {
            Ok(m) => report.put(
                "measured_contraction",
                "measure_contraction",
                json!({ "window": sec.window, "geometric_mean": m.geometric_mean, "max_ratio": m.max_ratio, "count": m.count }),
            ),
            Err(e) => report.note(format!("measured contraction over {window:?}: {e}")),
        }
    }

    let rows: Vec<TraceRow> = trace
        .records
        .iter()
        .map(|r| TraceRow {
            iteration: r.iteration,
            increment: r.increment,
            relative_increment: r.relative_increment,
            residual: r.residual,
            error: r.error,
            ratio: r.ratio,
        })
        .collect();
    let mut out = Output::new(ctx.out_dir)?;
    out.csv("trace.csv", &rows)?;

    let status = match trace.status {
        SolveStatus::Converged => Status::Ok,
        _ if c.k0 >= 1.0 => Status::Hypothesis,
        _ => Status::Numerical,
    };
    Ok(Finished {
        report,
        out,
        status,
    })
}
