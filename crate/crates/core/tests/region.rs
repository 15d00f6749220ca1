use curlcurl::coefficient::EllipticityBounds;
use curlcurl::region::{in_r_omega, in_s_minus, in_s_plus};
use curlcurl::table::TableEntry;
use curlcurl::{
    region_geometry, region_sample, IndexTable, KatoPonceModel, MspModel, RegionParams,
};

/// Table over s ∈ [−1, 1] and 1/p ∈ (0, 1) with values `f(s, 1/p)`.
fn table(f: impl Fn(f64, f64) -> f64) -> IndexTable {
    let mut invps = vec![1e-9];
    invps.extend((1..10).map(|j| j as f64 / 10.0));
    invps.push(1.0 - 1e-9);
    let mut entries = Vec::new();
    for ip in invps {
        for i in 0..=20 {
            let s = -1.0 + i as f64 / 10.0;
            entries.push(TableEntry {
                s,
                p: 1.0 / ip,
                value: f(s, ip),
            });
        }
    }
    IndexTable::new(entries)
}

fn contrast_params(p_omega: f64, holder: f64) -> RegionParams {
    let mut params = RegionParams::new(
        p_omega,
        EllipticityBounds::new(1.0, 2.0, holder, 0.5).unwrap(),
        1.0,
    );
    params.c_model = KatoPonceModel::UserTable {
        table: table(|_, _| 1.0),
    };
    params.msp_model = MspModel::UserTable {
        table: table(|s, ip| 1.0 + 0.8 * (s * s + (ip - 0.5).powi(2))),
    };
    params
}

fn inside_convex(poly: &[[f64; 2]], q: [f64; 2], tol: f64) -> bool {
    (0..poly.len()).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let cross = ex * (q[1] - a[1]) - ey * (q[0] - a[0]);
        cross >= -tol * ex.hypot(ey)
    })
}

#[test]
fn geometry_matches_fine_grid_scan() {
    let res = 400;
    let tol = 2.0 / res as f64;
    for p_omega in [1.0, 1.25, 1.5, 1.75, 1.99] {
        let poly = region_geometry(p_omega);
        assert!(poly.len() >= 3);
        let mut interior = Vec::new();
        for j in 0..=res {
            for i in 0..=2 * res {
                let q = [-1.0 + i as f64 / res as f64, j as f64 / res as f64];
                if in_r_omega(q[0], q[1], p_omega) {
                    assert!(
                        inside_convex(&poly, q, tol),
                        "p_Ω {p_omega}: {q:?} outside polygon"
                    );
                    interior.push(q);
                }
            }
        }
        for v in &poly {
            let near = interior
                .iter()
                .any(|q| (q[0] - v[0]).hypot(q[1] - v[1]) <= 2.0 * tol);
            assert!(
                near,
                "p_Ω {p_omega}: vertex {v:?} is not a limit of interior points"
            );
        }
        // counter-clockwise
        let area: f64 = (0..poly.len())
            .map(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        assert!(area > 0.0);
    }
}

#[test]
fn degenerate_parallelogram() {
    let poly = region_geometry(1.0);
    let expect = [[-1.0, 0.0], [0.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    assert_eq!(poly.len(), 4);
    for e in expect {
        assert!(poly
            .iter()
            .any(|v| (v[0] - e[0]).abs() < 1e-12 && (v[1] - e[1]).abs() < 1e-12));
    }
}

#[test]
fn s_sets_sit_inside_r_sets() {
    for p_omega in [1.0, 1.5] {
        let pts = region_sample(&contrast_params(p_omega, 0.2), 41).unwrap();
        let mut plus = 0;
        for pt in &pts {
            assert!(!pt.in_s_plus || pt.in_r_plus);
            assert!(!pt.in_s_minus || pt.in_r_minus);
            assert_eq!(pt.witness.is_some(), pt.in_s_plus);
            if let Some(w) = pt.witness {
                assert!(in_r_omega(w.s0, w.invp0, p_omega) && w.s0 >= 0.0);
                assert!(w.theta > 0.0 && w.theta < 1.0);
            }
            plus += pt.in_s_plus as usize;
        }
        // a strict, nonempty inner part
        assert!(plus > 0);
        assert!(pts.iter().any(|p| p.in_r_plus && !p.in_s_plus));
    }
}

#[test]
fn duality_is_an_involution() {
    let params = contrast_params(1.5, 0.1);
    let pts = region_sample(&params, 31).unwrap();
    for pt in pts {
        let mirrored = in_s_plus(-pt.s, 1.0 - pt.invp, &params);
        let expect = pt.in_r_minus && matches!(mirrored, Ok((true, _)));
        assert_eq!(pt.in_s_minus, expect, "({}, {})", pt.s, pt.invp);
        assert_eq!(in_s_minus(pt.s, pt.invp, &params).unwrap(), pt.in_s_minus);
    }
}

#[test]
fn smaller_hoelder_bound_never_shrinks_s_plus() {
    let holders = [0.6, 0.3, 0.1, 0.0];
    let samples: Vec<_> = holders
        .iter()
        .map(|&h| region_sample(&contrast_params(1.5, h), 41).unwrap())
        .collect();
    for w in samples.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            assert!(!a.in_s_plus || b.in_s_plus, "({}, {})", a.s, a.invp);
        }
    }
    let count = |v: &Vec<curlcurl::RegionPoint>| v.iter().filter(|p| p.in_s_plus).count();
    assert!(count(&samples[0]) < count(&samples[3]));
}

#[test]
fn zero_budget_makes_s_equal_r() {
    for p_omega in [1.0, 1.25, 1.5, 1.75] {
        let params = RegionParams::new(
            p_omega,
            EllipticityBounds::new(1.0, 1.0, 0.0, 0.0).unwrap(),
            1.0,
        );
        let pts = region_sample(&params, 80).unwrap();
        for pt in pts {
            assert_eq!(pt.in_s_plus, pt.in_r_plus, "({}, {})", pt.s, pt.invp);
            assert_eq!(pt.in_s_minus, pt.in_r_minus, "({}, {})", pt.s, pt.invp);
        }
    }
}

#[test]
fn sample_is_deterministic() {
    let params = contrast_params(1.25, 0.2);
    let a = region_sample(&params, 25).unwrap();
    let b = region_sample(&params, 25).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_model_names_the_points() {
    let params = RegionParams::new(
        1.5,
        EllipticityBounds::new(1.0, 2.0, 0.0, 0.0).unwrap(),
        1.0,
    );
    match region_sample(&params, 11) {
        Err(curlcurl::Error::ModelMissing { missing }) => {
            assert!(!missing.is_empty() && missing.len() <= 20);
        }
        other => panic!("expected ModelMissing, got {other:?}"),
    }
}

#[test]
fn discrete_estimates_feed_the_region() {
    let mut params = RegionParams::new(
        1.5,
        EllipticityBounds::new(1.0, 1.1, 0.0, 0.0).unwrap(),
        1.0,
    );
    params.c_model = KatoPonceModel::UserTable {
        table: table(|_, _| 1.0),
    };
    params.msp_model = MspModel::DiscreteEstimate {
        n: 8,
        trials: 4,
        seed: 1,
        lattice: 0.25,
    };
    let pts = region_sample(&params, 9).unwrap();
    assert!(pts.iter().any(|p| p.in_s_plus));
    assert!(pts.iter().all(|p| !p.in_s_plus || p.in_r_plus));
}
