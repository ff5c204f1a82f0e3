use cisparse::integrals::{
    boys, build_table, kinetic_gradient_form, reference_integral, spatial, Nucleus, ReferenceKind,
};
use cisparse::orbitals::{Primitive, Spin, SpinOrbital};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prim(center: [f64; 3], a: f64, powers: [u32; 3]) -> SpinOrbital {
    SpinOrbital::new(
        center,
        vec![Primitive {
            exponent: a,
            coefficient: 1.0,
        }],
        powers,
        Spin::Up,
    )
    .unwrap()
}

/// Composite Simpson on [0, 1] for the Boys integrand.
fn boys_quadrature(n: usize, t: f64) -> f64 {
    let m = 20_000;
    let h = 1.0 / m as f64;
    let f = |x: f64| x.powi(2 * n as i32) * (-t * x * x).exp();
    let mut s = f(0.0) + f(1.0);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn boys_against_quadrature() {
    for &t in &[0.0, 1e-8, 0.3, 2.0, 11.0, 24.9, 25.0, 26.0, 40.0, 90.0] {
        let f = boys(8, t);
        for n in 0..=8 {
            let q = boys_quadrature(n, t);
            assert!((f[n] - q).abs() < 1e-13, "T={t} n={n}: {} vs {q}", f[n]);
        }
    }
}

/// Midpoint rule over a cube; spectrally accurate for Gaussians.
fn grid_integral<F: Fn([f64; 3]) -> f64 + Sync>(c: [f64; 3], half: f64, n: usize, f: F) -> f64 {
    let h = 2.0 * half / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let x = c[0] - half + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = c[1] - half + (j as f64 + 0.5) * h;
            for k in 0..n {
                let z = c[2] - half + (k as f64 + 0.5) * h;
                total += f([x, y, z]);
            }
        }
    }
    total * h * h * h
}

fn sample_orbitals() -> Vec<SpinOrbital> {
    vec![
        prim([0.0, 0.0, 0.0], 1.0, [0, 0, 0]),
        prim([0.3, -0.2, 0.1], 0.8, [1, 0, 0]),
        prim([-0.2, 0.1, 0.4], 1.3, [0, 1, 1]),
        prim([0.1, 0.2, -0.3], 0.9, [2, 0, 0]),
        SpinOrbital::new(
            [0.0, 0.4, 0.0],
            vec![
                Primitive {
                    exponent: 0.6,
                    coefficient: 0.7,
                },
                Primitive {
                    exponent: 2.0,
                    coefficient: 0.4,
                },
            ],
            [0, 0, 1],
            Spin::Up,
        )
        .unwrap(),
    ]
}

#[test]
fn one_electron_against_grid() {
    let orbs = sample_orbitals();
    for a in &orbs {
        for b in &orbs {
            let s = grid_integral([0.0; 3], 7.0, 90, |r| a.value(r) * b.value(r));
            assert!((spatial::overlap(a, b) - s).abs() < 1e-9, "overlap");
            let t = grid_integral([0.0; 3], 7.0, 90, |r| -0.5 * a.value(r) * b.laplacian(r));
            assert!((spatial::kinetic(a, b) - t).abs() < 1e-9, "kinetic");
            let tg = grid_integral([0.0; 3], 7.0, 90, |r| {
                let (ga, gb) = (a.gradient(r), b.gradient(r));
                0.5 * (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2])
            });
            assert!((spatial::kinetic_gradient_form(a, b) - tg).abs() < 1e-9, "gradient form");
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫ f(r) / |r − C|` in spherical coordinates about C (the 1/r cancels).
fn coulomb_quadrature<F: Fn([f64; 3]) -> f64>(c: [f64; 3], rmax: f64, f: F) -> f64 {
    let gr = gauss_legendre(120);
    let gt = gauss_legendre(60);
    let nphi = 120;
    let mut total = 0.0;
    for &(xr, wr) in &gr {
        let r = 0.5 * rmax * (xr + 1.0);
        for &(ct, wt) in &gt {
            let st = (1.0 - ct * ct).sqrt();
            for k in 0..nphi {
                let ph = 2.0 * std::f64::consts::PI * k as f64 / nphi as f64;
                let p = [
                    c[0] + r * st * ph.cos(),
                    c[1] + r * st * ph.sin(),
                    c[2] + r * ct,
                ];
                total += wr * wt * r * f(p);
            }
        }
    }
    total * 0.5 * rmax * 2.0 * std::f64::consts::PI / nphi as f64
}

#[test]
fn nuclear_against_spherical_quadrature() {
    let orbs = sample_orbitals();
    let nuc = Nucleus {
        charge: 1.7,
        position: [0.25, -0.1, 0.05],
    };
    for a in &orbs[..3] {
        for b in &orbs[..3] {
            let q = -nuc.charge * coulomb_quadrature(nuc.position, 9.0, |r| a.value(r) * b.value(r));
            let v = spatial::nuclear(a, b, &nuc);
            assert!((v - q).abs() < 1e-8, "{v} vs {q}");
        }
    }
}

/// STO-3G hydrogen 1s (ζ = 1.24) with normalized primitives.
fn sto3g_h(center: [f64; 3]) -> SpinOrbital {
    let ex = [3.425_250_91, 0.623_913_73, 0.168_855_40];
    let co = [0.154_328_97, 0.535_328_14, 0.444_634_54];
    let prims = ex
        .iter()
        .zip(co)
        .map(|(&a, c)| Primitive {
            exponent: a,
            coefficient: c * (2.0 * a / std::f64::consts::PI).powf(0.75),
        })
        .collect();
    SpinOrbital::new(center, prims, [0, 0, 0], Spin::Up).unwrap()
}

#[test]
fn h2_sto3g_literature_values() {
    // Szabo & Ostlund, R = 1.4 bohr
    let a = sto3g_h([0.0, 0.0, 0.0]);
    let b = sto3g_h([0.0, 0.0, 1.4]);
    let na = Nucleus {
        charge: 1.0,
        position: a.center,
    };
    let nb = Nucleus {
        charge: 1.0,
        position: b.center,
    };
    let close = |x: f64, y: f64| (x - y).abs() < 1.5e-4;
    assert!(close(spatial::overlap(&a, &b), 0.6593));
    assert!(close(spatial::kinetic(&a, &a), 0.7600));
    assert!(close(spatial::kinetic(&a, &b), 0.2365));
    assert!(close(spatial::nuclear(&a, &a, &na), -1.2266));
    assert!(close(spatial::nuclear(&a, &a, &nb), -0.6538));
    assert!(close(spatial::nuclear(&a, &b, &na), -0.5974));
    assert!(close(spatial::eri(&a, &a, &a, &a), 0.7746));
    assert!(close(spatial::eri(&a, &a, &b, &b), 0.5697));
    assert!(close(spatial::eri(&b, &a, &a, &a), 0.4441));
    assert!(close(spatial::eri(&b, &a, &b, &a), 0.2970));
}

#[test]
fn eri_same_centre_s() {
    // four normalized unit-exponent s functions at one point: 2 sqrt(a/π)
    let g = prim([0.0; 3], 1.0, [0, 0, 0]).normalized();
    let v = spatial::eri(&g, &g, &g, &g);
    assert!((v - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-13);
}

/// Higher shells from centre derivatives of s functions:
/// ∂/∂A_x e^{-a|r-A|²} = 2a (x - A_x) e^{-a|r-A|²}.
#[test]
fn p_and_d_from_centre_derivatives() {
    let a = 0.9;
    let ca = [0.2, -0.1, 0.3];
    let others = [
        prim([0.5, 0.1, -0.2], 1.1, [0, 0, 0]),
        prim([-0.3, 0.2, 0.1], 0.7, [0, 0, 0]),
        prim([0.0, -0.4, 0.2], 1.4, [0, 0, 0]),
    ];
    let nuc = Nucleus {
        charge: 1.0,
        position: [0.1, 0.3, -0.2],
    };
    let h = 1e-4;
    let shifted = |dx: f64, dy: f64| prim([ca[0] + dx, ca[1] + dy, ca[2]], a, [0, 0, 0]);
    let eri = |s: &SpinOrbital| spatial::eri(s, &others[0], &others[1], &others[2]);
    let nucl = |s: &SpinOrbital| spatial::nuclear(s, &others[0], &nuc);
    let kin = |s: &SpinOrbital| spatial::kinetic(s, &others[0]);
    type F<'a> = &'a dyn Fn(&SpinOrbital) -> f64;
    let funcs: [F; 3] = [&eri, &nucl, &kin];
    for f in funcs {
        let s0 = f(&shifted(0.0, 0.0));
        let dx = (f(&shifted(h, 0.0)) - f(&shifted(-h, 0.0))) / (2.0 * h);
        let px = f(&prim(ca, a, [1, 0, 0]));
        assert!((px - dx / (2.0 * a)).abs() < 1e-7, "p: {px} vs {}", dx / (2.0 * a));
        let dxx = (f(&shifted(h, 0.0)) - 2.0 * s0 + f(&shifted(-h, 0.0))) / (h * h);
        let dxx_fn = f(&prim(ca, a, [2, 0, 0]));
        let want = (dxx + 2.0 * a * s0) / (4.0 * a * a);
        assert!((dxx_fn - want).abs() < 1e-5, "dxx: {dxx_fn} vs {want}");
        let dxy = (f(&shifted(h, h)) - f(&shifted(h, -h)) - f(&shifted(-h, h)) + f(&shifted(-h, -h)))
            / (4.0 * h * h);
        let dxy_fn = f(&prim(ca, a, [1, 1, 0]));
        assert!((dxy_fn - dxy / (4.0 * a * a)).abs() < 1e-5, "dxy");
    }
}

#[test]
fn table_symmetries() {
    let orbs = sample_orbitals();
    let mut basis = Vec::new();
    for o in orbs.iter().take(3) {
        for spin in [Spin::Up, Spin::Down] {
            let mut o = o.clone();
            o.spin = spin;
            basis.push(o.normalized());
        }
    }
    let nuclei = [Nucleus {
        charge: 1.0,
        position: [0.0, 0.0, 0.7],
    }];
    let table = build_table(&basis, &nuclei).unwrap();
    assert!(table.symmetry_defect() < 1e-12);
    let n = basis.len();
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                for l in 1..=n {
                    let r = reference_integral(ReferenceKind::Coulomb, &[i, j, k, l], &basis, &nuclei)
                        .unwrap();
                    assert!((r - table.h2(i, j, k, l)).norm() < 1e-13);
                }
            }
            let t = reference_integral(ReferenceKind::Kinetic, &[i, j], &basis, &nuclei).unwrap();
            let v = reference_integral(ReferenceKind::Nuclear(0), &[i, j], &basis, &nuclei).unwrap();
            assert!((t + v - table.h1(i, j)).norm() < 1e-13);
            let tg = kinetic_gradient_form(i, j, &basis).unwrap();
            assert!((tg - t).norm() < 1e-9);
        }
    }
}

#[test]
fn gradient_form_special_cases() {
    let g = prim([0.0; 3], 1.0, [0, 0, 0]);
    let px = prim([0.0; 3], 1.0, [1, 0, 0]);
    let py = prim([0.0; 3], 1.0, [0, 1, 0]);
    assert!(spatial::kinetic_gradient_form(&px, &py).abs() < 1e-15);
    let far = prim([20.0, 0.0, 0.0], 1.0, [0, 0, 0]);
    assert!(spatial::kinetic_gradient_form(&g, &far).abs() < 1e-20);
}

#[test]
fn random_pairs_green_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut basis = Vec::new();
    for _ in 0..8 {
        let mut powers = [0u32; 3];
        let l = rng.gen_range(0..=2);
        for _ in 0..l {
            powers[rng.gen_range(0..3)] += 1;
        }
        let c = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
        basis.push(prim(c, rng.gen_range(0.4..2.0), powers));
    }
    for a in &basis {
        for b in &basis {
            let d = spatial::kinetic(a, b) - spatial::kinetic_gradient_form(a, b);
            assert!(d.abs() < 1e-9);
            assert!((spatial::kinetic(a, b) - spatial::kinetic(b, a)).abs() < 1e-12);
        }
    }
}
