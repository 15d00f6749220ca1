//! Acceptance checks. Each criterion prints one `PASS`/`FAIL` line; the
//! process exits non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use curlcurl::operators::gradient;
use curlcurl::random::{random_scalar_field, random_vector_field};
use curlcurl::region::in_r_omega;
use curlcurl::sobolev::katoponce_ratios;
use curlcurl::unperturbed::power_iteration_m02;
use curlcurl::{
    apply_k, bessel_norm, curl, dual_split, estimate_msp, region_geometry, region_sample,
    sample_coefficient, solve_k_cg, solve_k_spectral, CoefficientSpec, EllipticityBounds, Grid3,
    GroegerSolver, KInverse, MaxwellOperator, NormIndex, Placement, RegionParams, SolveStatus,
    SolverParams, VectorField,
};

type Outcome = Result<String, String>;

fn rel(a: &VectorField, b: &VectorField) -> f64 {
    a.sub(b).unwrap().norm_l2() / b.norm_l2()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn one_step_convergence() -> Outcome {
    let start = Instant::now();
    let g = Grid3::unit_torus(16).unwrap();
    let a = sample_coefficient(&CoefficientSpec::identity(), &g).unwrap();
    let f = random_vector_field(&g, 4, 1).unwrap();
    let solver = GroegerSolver::new(a, SolverParams::new(1.0), KInverse::SpectralExact).unwrap();
    let (u, trace) = solver.solve(&f).unwrap();
    let elapsed = start.elapsed();
    let incr = trace
        .records
        .get(1)
        .map_or(f64::INFINITY, |r| r.relative_increment);
    let reference = solve_k_spectral(&f).unwrap();
    let err = rel(&u, &reference);
    check(
        incr <= 1e-12 && err <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("increment after step 1 {incr:.3e}, error vs K^-1 f {err:.3e}, {elapsed:.2?}"),
    )
}

fn contraction_budget() -> Outcome {
    let start = Instant::now();
    let g = Grid3::unit_torus(32).unwrap();
    let a = sample_coefficient(&CoefficientSpec::sine_profile(1.5, 0.5), &g).unwrap();
    let u_star = random_vector_field(&g, 4, 2).unwrap();
    let f = MaxwellOperator::new(a.clone(), 1.0)
        .unwrap()
        .apply(&u_star)
        .unwrap();
    let params = SolverParams {
        tol: 1e-8,
        max_iter: 80,
        ..SolverParams::new(1.0)
    };
    let solver = GroegerSolver::new(a, params, KInverse::SpectralExact).unwrap();
    let c = *solver.constants();
    let (_, trace) = solver.solve_manufactured(&f, &u_star).unwrap();
    let elapsed = start.elapsed();
    // k0 = max{|1 - t k^2|, |1 - t m|} with m = 1, M = 2, t = m/M^2
    let t_expect = 1.0 / 4.0;
    let k_expect = f64::max(
        (1.0 - t_expect * 1.0_f64).abs(),
        (1.0 - t_expect * 1.0_f64).abs(),
    );
    let worst = trace.max_ratio().unwrap_or(f64::INFINITY);
    check(
        c.t == t_expect
            && c.k0 == k_expect
            && k_expect == 0.75
            && worst <= c.k0 + 0.02
            && trace.status == SolveStatus::Converged
            && trace.iterations() <= 80
            && elapsed < Duration::from_secs(30),
        format!(
            "t {}, k0 {}, max ratio {worst:.4}, {:?} after {} iterations, {elapsed:.2?}",
            c.t,
            c.k0,
            trace.status,
            trace.iterations()
        ),
    )
}

fn run_cli(cmd: &str, config: &Path, out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_curlcurl"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--reproducible")
        .output()
        .expect("binary runs")
}

const SWEEP: &str = r#"
schema_version = 1
seed = 3

[grid]
topology = "torus"
n = 16

[contraction]
field = { kind = "random", bandwidth = 4 }

[[contraction.rows]]
label = "M/m = 1"
k2 = 1.0
coefficient = { family = "identity" }

[[contraction.rows]]
label = "M/m = 2"
k2 = 1.0
coefficient = { family = "scalar_profile", profile = { offset = 1.5, terms = [{ amplitude = 0.5, wavenumber = [1, 0, 0], kind = "sin" }] } }

[[contraction.rows]]
label = "M/m = 4"
k2 = 1.0
coefficient = { family = "scalar_profile", profile = { offset = 2.5, terms = [{ amplitude = 1.5, wavenumber = [1, 0, 0], kind = "sin" }] } }
"#;

fn contrast_sweep() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    fs::write(&config, SWEEP).unwrap();
    let out = dir.path().join("out");
    let status = run_cli("contraction", &config, &out);
    if !status.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            status.status.code(),
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    let mut reader = csv::Reader::from_path(out.join("contraction.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (k0_col, rate_col) = (col("k0"), col("measured_rate"));
    let mut k0s = Vec::new();
    let mut within = true;
    let mut detail = Vec::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let k: f64 = rec[k0_col].parse().unwrap();
        let r: f64 = rec[rate_col].parse().unwrap();
        within &= r <= k + 0.02;
        detail.push(format!("k0 {k} rate {r:.4}"));
        k0s.push(k);
    }
    check(k0s == [0.0, 0.75, 0.9375] && within, detail.join("; "))
}

fn msp_at_zero_two() -> Outcome {
    let g = Grid3::unit_torus(16).unwrap();
    let est = estimate_msp(0.0, 2.0, &g, 500, 4).unwrap();
    let power = power_iteration_m02(&g, 50, 4).unwrap();
    check(
        est.value <= 1.0 + 1e-9 && (0.9..=1.0).contains(&power.value),
        format!(
            "random-trial max {:.15}, power iteration {:.17}",
            est.value, power.value
        ),
    )
}

fn k_inverse_roundtrips() -> Outcome {
    let g = Grid3::unit_torus(16).unwrap();
    let mut spectral: f64 = 0.0;
    for seed in 0..100 {
        let f = random_vector_field(&g, 6, 500 + seed).unwrap();
        let u = solve_k_spectral(&f).unwrap();
        spectral = spectral.max(rel(&apply_k(&u).unwrap(), &f));
    }
    let mut cg: f64 = 0.0;
    for n in [8, 12] {
        let b = Grid3::unit_box(n).unwrap();
        for seed in 0..5 {
            let u_star = random_vector_field(&b, 1, 900 + seed).unwrap();
            let f = apply_k(&u_star).unwrap();
            let (u, _) = solve_k_cg(&f, 1e-10, 10_000).unwrap();
            cg = cg.max(rel(&u, &u_star));
        }
    }
    check(
        spectral <= 1e-10 && cg <= 1e-9,
        format!("spectral roundtrip {spectral:.3e}, CG error {cg:.3e}"),
    )
}

fn dual_representation() -> Outcome {
    let g = Grid3::unit_torus(16).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let f = random_vector_field(&g, 6, 700 + seed).unwrap();
        let (g1, g2) = dual_split(&f).unwrap();
        worst = worst.max(rel(&g1.add(&curl(&g2).unwrap()).unwrap(), &f));
    }
    let mut exact = true;
    for seed in 0..20 {
        let phi = random_scalar_field(&g, 5, 800 + seed).unwrap();
        let (_, g2) = dual_split(&gradient(&phi).unwrap()).unwrap();
        exact &= g2.components().iter().all(|c| c.iter().all(|v| *v == 0.0));
    }
    check(
        worst <= 1e-12 && exact,
        format!("reconstruction {worst:.3e}, curl-free g2 identically zero: {exact}"),
    )
}

fn region_degeneration() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for p_omega in [1.0, 1.25, 1.5, 1.75] {
        let start = Instant::now();
        let params = RegionParams::new(
            p_omega,
            EllipticityBounds::new(1.0, 1.0, 0.0, 0.0).unwrap(),
            1.0,
        );
        let points = region_sample(&params, 200).unwrap();
        let elapsed = start.elapsed();
        let mismatched = points
            .iter()
            .filter(|p| (p.in_s_plus || p.in_s_minus) != in_r_omega(p.s, p.invp, p_omega))
            .count();
        ok &= mismatched == 0 && points.len() == 40_000 && elapsed < Duration::from_secs(10);
        detail.push(format!(
            "p {p_omega}: {mismatched} mismatches, {elapsed:.2?}"
        ));
    }
    check(ok, detail.join("; "))
}

fn inside_convex(poly: &[[f64; 2]], q: [f64; 2], tol: f64) -> bool {
    (0..poly.len()).all(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        ex * (q[1] - a[1]) - ey * (q[0] - a[0]) >= -tol * ex.hypot(ey)
    })
}

/// Every sampled member lies in the polygon and every vertex is approached
/// by sampled members.
fn brute_force_agrees(poly: &[[f64; 2]], p_omega: f64) -> bool {
    let res = 400;
    let tol = 2.0 / res as f64;
    let mut interior = Vec::new();
    for j in 0..=res {
        for i in 0..=2 * res {
            let q = [-1.0 + i as f64 / res as f64, j as f64 / res as f64];
            if in_r_omega(q[0], q[1], p_omega) {
                if !inside_convex(poly, q, tol) {
                    return false;
                }
                interior.push(q);
            }
        }
    }
    poly.iter().all(|v| {
        interior
            .iter()
            .any(|q| (q[0] - v[0]).hypot(q[1] - v[1]) <= 2.0 * tol)
    })
}

fn same_vertices(got: &[[f64; 2]], expect: &[[f64; 2]]) -> f64 {
    if got.len() != expect.len() {
        return f64::INFINITY;
    }
    expect
        .iter()
        .map(|e| {
            got.iter()
                .map(|g| (g[0] - e[0]).abs().max((g[1] - e[1]).abs()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

fn region_geometry_check() -> Outcome {
    let hexagon = [
        [-1.0, 0.0],
        [-2.0 / 3.0, 0.0],
        [1.0 / 3.0, 1.0 / 3.0],
        [1.0, 1.0],
        [2.0 / 3.0, 1.0],
        [-1.0 / 3.0, 2.0 / 3.0],
    ];
    let parallelogram = [[-1.0, 0.0], [0.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let h = region_geometry(1.5);
    let p = region_geometry(1.0);
    let dh = same_vertices(&h, &hexagon);
    let dp = same_vertices(&p, &parallelogram);
    let oracle = brute_force_agrees(&h, 1.5) && brute_force_agrees(&p, 1.0);
    check(
        dh <= 1e-12 && dp <= 1e-12 && oracle,
        format!("hexagon deviation {dh:.1e}, parallelogram deviation {dp:.1e}, brute-force scan agrees: {oracle}"),
    )
}

fn norm_identities() -> Outcome {
    let g = Grid3::unit_torus(16).unwrap();
    let mut quad: f64 = 0.0;
    for seed in 0..10 {
        let f = random_vector_field(&g, 5, 300 + seed).unwrap();
        for p in [1.2, 2.0, 3.5] {
            let h3 = g.cell_volume();
            let sum: f64 = (0..f.component(0).len())
                .map(|i| {
                    let m2: f64 = (0..3).map(|c| f.component(c)[i].powi(2)).sum();
                    m2.sqrt().powf(p)
                })
                .sum();
            let direct = (h3 * sum).powf(1.0 / p);
            let a = bessel_norm(&f, NormIndex::new(0.0, p).unwrap()).unwrap();
            quad = quad.max((a - direct).abs() / direct);
        }
    }

    let pi = std::f64::consts::PI;
    let mode = VectorField::from_fn(g, Placement::Collocated, |x| {
        let v = (2.0 * pi * x[1]).cos() / 3f64.sqrt();
        [v, v, v]
    })
    .unwrap();
    let cos_lp = |p: f64| {
        ((0..16)
            .map(|i| (2.0 * pi * i as f64 / 16.0).cos().abs().powf(p))
            .sum::<f64>()
            / 16.0)
            .powf(1.0 / p)
    };
    let mut single: f64 = 0.0;
    for (s, p) in [(0.5, 2.0), (-0.4, 1.5), (0.9, 3.0), (0.2, 6.0)] {
        let expect = (1.0 + 4.0 * pi * pi).powf(0.5 * s) * cos_lp(p);
        let got = bessel_norm(&mode, NormIndex::new(s, p).unwrap()).unwrap();
        single = single.max((got - expect).abs() / expect);
    }

    let ratios = katoponce_ratios(&g, NormIndex::new(0.0, 2.0).unwrap(), 1000, 6).unwrap();
    let kp = ratios.iter().cloned().fold(0.0, f64::max);
    check(
        quad <= 1e-12 && single <= 1e-10 && kp <= 1.0 + 1e-12 && ratios.len() == 1000,
        format!("s = 0 quadrature {quad:.2e}, single mode {single:.2e}, Kato-Ponce max {kp:.6}"),
    )
}

const DETERMINISM: &[(&str, &str)] = &[
    (
        "solve",
        r#"
schema_version = 1
seed = 9
[grid]
topology = "torus"
n = 8
[coefficient]
family = "scalar_profile"
profile = { offset = 1.5, terms = [{ amplitude = 0.5, wavenumber = [1, 0, 0], kind = "sin" }] }
[solve]
k2 = 1.0
tol = 1e-8
field = { kind = "random", bandwidth = 2 }
"#,
    ),
    (
        "contraction",
        r#"
schema_version = 1
seed = 9
[grid]
topology = "torus"
n = 8
[contraction]
tol = 1e-6
field = { kind = "random", bandwidth = 2 }
[[contraction.rows]]
k2 = 1.0
coefficient = { family = "identity" }
[[contraction.rows]]
k2 = 1.0
coefficient = { family = "scalar_profile", profile = { offset = 1.5, terms = [{ amplitude = 0.5, wavenumber = [1, 0, 0], kind = "sin" }] } }
"#,
    ),
    (
        "region",
        r#"
schema_version = 1
seed = 9
[region]
p_omega = 1.5
k2 = 1.0
resolution = 40
bounds = { m = 1.0, M = 1.0 }
msp_model = { mode = "discrete_estimate", n = 8, trials = 20 }
"#,
    ),
    (
        "norms",
        r#"
schema_version = 1
seed = 9
[grid]
topology = "torus"
n = 8
[norms]
monotone_fields = 5
kp_pairs = 50
kp_estimates = [{ s = 0.5, p = 2.0, trials = 50 }]
"#,
    ),
    (
        "msp",
        r#"
schema_version = 1
seed = 9
[grid]
topology = "torus"
n = 8
[msp]
indices = [{ s = 0.0, p = 2.0 }, { s = 0.2, p = 1.8 }]
trials = 50
power_iterations = 10
"#,
    ),
];

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for (cmd, text) in DETERMINISM {
        let config = dir.path().join(format!("{cmd}.toml"));
        fs::write(&config, text).unwrap();
        let runs: Vec<_> = (0..2)
            .map(|k| {
                let out = dir.path().join(format!("{cmd}-{k}"));
                let r = run_cli(cmd, &config, &out);
                if !r.status.success() {
                    detail.push(format!(
                        "{cmd}: {}",
                        String::from_utf8_lossy(&r.stderr).trim()
                    ));
                }
                (out, r.status.code())
            })
            .collect();
        let mut names: Vec<_> = fs::read_dir(&runs[0].0)
            .map(|d| d.map(|e| e.unwrap().file_name()).collect())
            .unwrap_or_default();
        names.sort();
        let identical = runs[0].1 == runs[1].1
            && names
                .iter()
                .all(|n| fs::read(runs[0].0.join(n)).ok() == fs::read(runs[1].0.join(n)).ok());
        ok &= identical && runs[0].1 == Some(0) && names.len() >= 2;
        detail.push(format!(
            "{cmd}: {} files, exit {:?}, identical {identical}",
            names.len(),
            runs[0].1
        ));
    }
    check(ok, detail.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 one-step convergence for a = I", one_step_convergence),
        ("2 contraction within k0(0,2) on 32^3", contraction_budget),
        ("3 contrast sweep budgets", contrast_sweep),
        ("4 M_02 = 1", msp_at_zero_two),
        ("5 K-inverse roundtrips", k_inverse_roundtrips),
        ("6 dual representation", dual_representation),
        ("7 region degeneration at k0 = 0", region_degeneration),
        ("8 region geometry", region_geometry_check),
        ("9 norm identities", norm_identities),
        ("10 reproducible outputs", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
}
