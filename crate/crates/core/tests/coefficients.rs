use curlcurl::coefficient::{holder_seminorm_with, PairStrategy};
use curlcurl::{
    ellipticity_bounds, holder_seminorm, sample_coefficient, CoefficientField, CoefficientSpec,
    Grid3, Sym3, Topology,
};
use proptest::prelude::*;

/// Roots of det(λI − a) by bisection on the characteristic cubic between
/// Gershgorin bounds and the cubic's critical points.
fn charpoly_eigenvalues(a: &Sym3) -> [f64; 3] {
    let tr = a.xx + a.yy + a.zz;
    let minors = a.xx * a.yy - a.xy * a.xy + a.xx * a.zz - a.xz * a.xz + a.yy * a.zz - a.yz * a.yz;
    let det = a.xx * (a.yy * a.zz - a.yz * a.yz) - a.xy * (a.xy * a.zz - a.yz * a.xz)
        + a.xz * (a.xy * a.yz - a.yy * a.xz);
    let chi = |l: f64| ((l - tr) * l + minors) * l - det;
    let r = [
        a.xy.abs() + a.xz.abs(),
        a.xy.abs() + a.yz.abs(),
        a.xz.abs() + a.yz.abs(),
    ];
    let lo = (a.xx - r[0]).min(a.yy - r[1]).min(a.zz - r[2]) - 1.0;
    let hi = (a.xx + r[0]).max(a.yy + r[1]).max(a.zz + r[2]) + 1.0;
    // critical points of the cubic split the roots
    let disc = (tr * tr - 3.0 * minors).max(0.0).sqrt();
    let c1 = (tr - disc) / 3.0;
    let c2 = (tr + disc) / 3.0;
    let bisect = |mut x0: f64, mut x1: f64| {
        let (f0, f1) = (chi(x0), chi(x1));
        if f0 == 0.0 || f1 == 0.0 || f0.signum() == f1.signum() {
            // a repeated root sits on the critical point
            return if f0.abs() <= f1.abs() { x0 } else { x1 };
        }
        let s0 = f0.signum();
        for _ in 0..200 {
            let mid = 0.5 * (x0 + x1);
            if chi(mid).signum() == s0 {
                x0 = mid;
            } else {
                x1 = mid;
            }
        }
        0.5 * (x0 + x1)
    };
    let mut e = [bisect(lo, c1), bisect(c1, c2), bisect(c2, hi)];
    e.sort_by(f64::total_cmp);
    e
}

fn sym_strategy() -> impl Strategy<Value = Sym3> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        -3.0..3.0f64,
        -1.5..1.5f64,
        -1.5..1.5f64,
        -1.5..1.5f64,
    )
        .prop_map(|(xx, yy, zz, xy, xz, yz)| Sym3 {
            xx,
            yy,
            zz,
            xy,
            xz,
            yz,
        })
}

fn random_field(n: usize, seed: u64) -> CoefficientField {
    use rand::{Rng, SeedableRng};
    let grid = Grid3::unit_torus(n).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..grid.node_count())
        .map(|_| {
            let d = rng.gen_range(2.0..4.0);
            Sym3 {
                xx: d + rng.gen_range(0.0..1.0),
                yy: d + rng.gen_range(0.0..1.0),
                zz: d + rng.gen_range(0.0..1.0),
                xy: rng.gen_range(-0.5..0.5),
                xz: rng.gen_range(-0.5..0.5),
                yz: rng.gen_range(-0.5..0.5),
            }
        })
        .collect();
    CoefficientField::from_entries(grid, entries).unwrap()
}

proptest! {
    #[test]
    fn eigenvalues_match_characteristic_polynomial(a in sym_strategy()) {
        let e = a.eigenvalues();
        let o = charpoly_eigenvalues(&a);
        for (x, y) in e.iter().zip(&o) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()), "{e:?} vs {o:?}");
        }
    }

    #[test]
    fn shift_equivariance(seed in 0u64..1000, frac in -0.95..2.0f64) {
        let a = random_field(4, seed);
        let (m, big_m) = ellipticity_bounds(&a).unwrap();
        let beta = frac * m;
        let (ms, bigs) = ellipticity_bounds(&a.shifted(beta)).unwrap();
        prop_assert!((ms - (m + beta)).abs() < 1e-12 * (1.0 + m.abs()));
        prop_assert!((bigs - (big_m + beta)).abs() < 1e-12 * (1.0 + big_m.abs()));
    }
}

#[test]
fn bounds_match_brute_force_scan() {
    for n in [2, 4, 8] {
        let a = random_field(n, n as u64);
        let (m, big_m) = ellipticity_bounds(&a).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for e in a.entries() {
            let ev = charpoly_eigenvalues(e);
            lo = lo.min(ev[0]);
            hi = hi.max(ev[2]);
        }
        assert!((m - lo).abs() < 1e-9, "n = {n}");
        assert!((big_m - hi).abs() < 1e-9, "n = {n}");
    }
}

#[test]
fn identity_and_diagonal() {
    let g = Grid3::unit_torus(4).unwrap();
    let a = sample_coefficient(&CoefficientSpec::identity(), &g).unwrap();
    assert_eq!(ellipticity_bounds(&a).unwrap(), (1.0, 1.0));
    let d = sample_coefficient(&CoefficientSpec::diagonal([2.0, 3.0, 5.0]), &g).unwrap();
    assert_eq!(ellipticity_bounds(&d).unwrap(), (2.0, 5.0));
    assert_eq!(holder_seminorm(&d, 0.3).unwrap().value, 0.0);
}

#[test]
fn sine_profile_bounds_match_pointwise_scan() {
    let g = Grid3::unit_torus(16).unwrap();
    let a = sample_coefficient(&CoefficientSpec::sine_profile(1.5, 0.5), &g).unwrap();
    let (m, big_m) = ellipticity_bounds(&a).unwrap();
    let vals: Vec<f64> = (0..16)
        .map(|i| 1.5 + 0.5 * (2.0 * std::f64::consts::PI * i as f64 / 16.0).sin())
        .collect();
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((m - lo).abs() < 1e-15 && (big_m - hi).abs() < 1e-15);
}

#[test]
fn negative_eigenvalue_is_rejected() {
    let g = Grid3::unit_torus(2).unwrap();
    let a = CoefficientField::constant(g, Sym3::diag(1.0, -0.5, 2.0));
    assert!(matches!(
        ellipticity_bounds(&a),
        Err(curlcurl::Error::NonElliptic { .. })
    ));
}

/// Exhaustive pair maximum of ‖a(x) − a(y)‖₂ / |x − y|^s written out directly.
fn holder_oracle(a: &CoefficientField, s: f64) -> f64 {
    let g = a.grid();
    let d = g.node_dims();
    let h = g.spacing();
    let ext = g.extent();
    let pos = |idx: usize| {
        let (i, j, k) = (idx % d[0], (idx / d[0]) % d[1], idx / (d[0] * d[1]));
        [i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]
    };
    let mut best: f64 = 0.0;
    for x in 0..g.node_count() {
        for y in 0..x {
            let (px, py) = (pos(x), pos(y));
            let mut dist2 = 0.0;
            for c in 0..3 {
                let mut dc = (px[c] - py[c]).abs();
                if g.topology() == Topology::Torus {
                    dc = dc.min(ext[c] - dc);
                }
                dist2 += dc * dc;
            }
            let diff = a.at(x).sub(&a.at(y));
            let norm = charpoly_eigenvalues(&diff)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            best = best.max(norm / dist2.sqrt().powf(s));
        }
    }
    best
}

#[test]
fn holder_matches_exhaustive_oracle() {
    for (seed, s) in [(1u64, 0.25), (2, 0.5), (3, 0.9)] {
        let a = random_field(4, seed);
        let got = holder_seminorm_with(&a, s, PairStrategy::Exhaustive).unwrap();
        let expect = holder_oracle(&a, s);
        assert!(!got.sampled);
        assert!(
            (got.value - expect).abs() <= 1e-9 * expect,
            "{} vs {expect}",
            got.value
        );
    }
}

#[test]
fn holder_of_ramp_on_two_planes() {
    let g = Grid3::new(Topology::PecBox, [1, 1, 1], [1.0, 1.0, 1.0]);
    // a one-cell box is below the minimum resolution
    assert!(g.is_err());
    let g = Grid3::new(Topology::PecBox, [2, 2, 2], [1.0, 1.0, 1.0]).unwrap();
    let a = CoefficientField::from_fn(g, |x| Sym3::IDENTITY.scaled(x[0]));
    let h = holder_seminorm(&a, 0.5).unwrap();
    assert!((h.value - 1.0).abs() < 1e-12);
    let o = holder_oracle(&a, 0.5);
    assert!((o - 1.0).abs() < 1e-12, "{o}");
}

#[test]
fn holder_invariant_under_constant_shift_and_homogeneous() {
    let a = random_field(4, 11);
    let base = holder_seminorm(&a, 0.4).unwrap().value;
    let shifted = holder_seminorm(&a.plus_constant(Sym3::diag(3.0, -1.0, 0.5)), 0.4)
        .unwrap()
        .value;
    assert!((base - shifted).abs() < 1e-12 * base);
    for alpha in [-2.5, 0.1, 7.0] {
        let scaled = holder_seminorm(&a.scaled(alpha), 0.4).unwrap().value;
        assert!((scaled - alpha.abs() * base).abs() < 1e-12 * scaled.abs().max(1.0));
    }
}

#[test]
fn sampled_holder_is_a_lower_bound() {
    let a = random_field(8, 5);
    let exact = holder_seminorm_with(&a, 0.5, PairStrategy::Exhaustive).unwrap();
    let sampled = holder_seminorm_with(
        &a,
        0.5,
        PairStrategy::Sampled {
            pairs: 20_000,
            seed: 3,
        },
    )
    .unwrap();
    assert!(sampled.sampled);
    assert!(sampled.value <= exact.value * (1.0 + 1e-12));
}

#[test]
fn holder_rejects_exponent_outside_unit_interval() {
    let a = random_field(2, 0);
    assert!(holder_seminorm(&a, 0.0).is_err());
    assert!(holder_seminorm(&a, 1.0).is_err());
}
