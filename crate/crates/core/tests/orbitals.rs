use cisparse::orbitals::{certify, derive_bounds, dist, BasisBounds, Primitive, Spin, SpinOrbital};
use cisparse::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn orbital(center: [f64; 3], prims: &[(f64, f64)], powers: [u32; 3]) -> SpinOrbital {
    SpinOrbital::new(
        center,
        prims
            .iter()
            .map(|&(exponent, coefficient)| Primitive {
                exponent,
                coefficient,
            })
            .collect(),
        powers,
        Spin::Up,
    )
    .unwrap()
}

fn mixed_basis() -> Vec<SpinOrbital> {
    vec![
        orbital([0.0, 0.0, 0.0], &[(1.0, 1.0)], [0, 0, 0]),
        orbital([0.5, 0.0, 0.0], &[(0.8, 0.6), (2.5, 0.3)], [1, 0, 0]),
        orbital([0.0, -0.4, 0.2], &[(1.2, 1.0)], [0, 1, 1]),
        orbital([0.1, 0.1, 0.1], &[(0.7, 0.5), (1.9, -0.2)], [0, 0, 2]),
    ]
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-4;
    for orb in mixed_basis() {
        for _ in 0..100 {
            let r = [0, 1, 2].map(|k| orb.center[k] + rng.gen_range(-2.0..2.0));
            let (_, g, lap) = orb.eval_all(r);
            let mut fd_lap = 0.0;
            for k in 0..3 {
                let mut rp = r;
                let mut rm = r;
                rp[k] += h;
                rm[k] -= h;
                let (vp, vm, v0) = (orb.value(rp), orb.value(rm), orb.value(r));
                let fd = (vp - vm) / (2.0 * h);
                let scale = g[k].abs().max(1e-3);
                assert!((fd - g[k]).abs() / scale < 1e-5, "gradient");
                fd_lap += (vp - 2.0 * v0 + vm) / (h * h);
            }
            let scale = lap.abs().max(1e-2);
            assert!((fd_lap - lap).abs() / scale < 1e-5, "laplacian {fd_lap} vs {lap}");
        }
    }
}

#[test]
fn laplacian_fd_example() {
    let g = orbital([0.0; 3], &[(1.0, 1.0)], [0, 0, 0]);
    let r = [1.0, 0.0, 0.0];
    let h = 1e-4;
    let mut fd = 0.0;
    for k in 0..3 {
        let mut rp = r;
        let mut rm = r;
        rp[k] += h;
        rm[k] -= h;
        fd += (g.value(rp) - 2.0 * g.value(r) + g.value(rm)) / (h * h);
    }
    assert!((g.laplacian(r) - fd).abs() < 1e-6);
}

#[test]
fn normalized_s_bounds() {
    let g = orbital([0.0; 3], &[(1.0, 1.0)], [0, 0, 0]).normalized();
    let b = derive_bounds(&[g], 1.0).unwrap();
    let want = (2.0 / std::f64::consts::PI).powf(0.75);
    assert!((b.phi_max - want).abs() < 1e-12);
    // exp(-s²) ≤ exp(-s/x) for s ≥ x exactly when x ≥ 1
    assert!((b.x_max - 1.0).abs() < 1e-6, "x_max = {}", b.x_max);
    // max |∇ e^{-r²}| = √2 e^{-1/2} at r = 1/√2; max |∇²| = 6 at the centre
    assert!((b.gamma1 - 2f64.sqrt() * (-0.5f64).exp() * b.x_max).abs() < 1e-6);
    assert!((b.gamma2 - 6.0 * b.x_max * b.x_max).abs() < 1e-6);
}

#[test]
fn identical_far_gaussians_share_phi_max() {
    let a = orbital([0.0; 3], &[(1.0, 1.0)], [0, 0, 0]);
    let b = orbital([10.0, 0.0, 0.0], &[(1.0, 1.0)], [0, 0, 0]);
    let one = derive_bounds(&[a.clone()], 1.0).unwrap();
    let two = derive_bounds(&[a, b], 1.0).unwrap();
    assert!((one.phi_max - two.phi_max).abs() < 1e-14);
}

#[test]
fn p_type_phi_max_grid_search() {
    let p = orbital([0.0; 3], &[(1.0, 1.0)], [1, 0, 0]);
    let b = derive_bounds(&[p.clone()], 1.0).unwrap();
    // dense grid search oracle: coarse 3D sweep, then a fine line search
    // through the best coarse cell
    let mut best: f64 = 0.0;
    let mut arg = [0.0; 3];
    let n = 81;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let r = [i, j, k].map(|t| -2.0 + 4.0 * t as f64 / (n - 1) as f64);
                let v = p.value(r).abs();
                if v > best {
                    best = v;
                    arg = r;
                }
            }
        }
    }
    for t in 0..=20_000 {
        let x = arg[0] - 0.05 + 0.1 * t as f64 / 20_000.0;
        best = best.max(p.value([x, arg[1], arg[2]]).abs());
    }
    assert!((b.phi_max - best).abs() < 1e-6);
    assert!((b.phi_max - (0.5f64).sqrt() * (-0.5f64).exp()).abs() < 1e-10);
}

#[test]
fn decay_holds_at_random_points() {
    let basis = mixed_basis();
    let b = derive_bounds(&basis, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for orb in &basis {
        for _ in 0..10_000 {
            let s = rng.gen_range(b.x_max..10.0 * b.x_max);
            let mut d = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0f64));
            let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            d = d.map(|x| x / norm * s);
            let r = [0, 1, 2].map(|k| orb.center[k] + d[k]);
            let bound = b.phi_max * (-b.alpha_decay * dist(r, orb.center) / b.x_max).exp();
            assert!(orb.value(r).abs() <= bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn larger_alpha_needs_larger_radius() {
    let basis = mixed_basis();
    let b1 = derive_bounds(&basis, 1.0).unwrap();
    let b2 = derive_bounds(&basis, 2.0).unwrap();
    assert!(b2.x_max > b1.x_max);
}

#[test]
fn certification_reports_violations() {
    let g = orbital([0.0; 3], &[(1.0, 1.0)], [0, 0, 0]);
    let good = derive_bounds(&[g.clone()], 1.0).unwrap();
    let bad = BasisBounds {
        phi_max: 0.5,
        ..good
    };
    match certify(&[g], &bad) {
        Err(Error::BoundViolated { orbital, .. }) => assert_eq!(orbital, 0),
        other => panic!("expected violation, got {other:?}"),
    }
}
