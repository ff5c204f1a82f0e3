//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use cisparse::determinants::Determinant;
use cisparse::integrals::{IntegralTable, Nucleus};
use cisparse::orbitals::{Primitive, Spin, SpinOrbital};
use nalgebra::DMatrix;
use num_complex::Complex64;
use cisparse::selfinverse::AlephSet;
use rand::seq::SliceRandom;
use rand::Rng;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// All permutations of `0..n` with their signs (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn heap(k: usize, a: &mut Vec<usize>, sign: &mut f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if k <= 1 {
            out.push((a.clone(), *sign));
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, sign, out);
            let j = if k % 2 == 0 { i } else { 0 };
            a.swap(j, k - 1);
            *sign = -*sign;
        }
        heap(k - 1, a, sign, out);
    }
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    heap(n, &mut a, &mut sign, &mut out);
    out
}

/// `⟨α|H|β⟩` from the first-quantized antisymmetrized product states. Uses
/// only the defining layout `h_ijkℓ = ∫∫ φ_i*(1) φ_j*(2) φ_ℓ(1) φ_k(2) / r12`.
pub fn brute_entry(alpha: &Determinant, beta: &Determinant, t: &IntegralTable) -> Complex64 {
    let a: Vec<usize> = alpha.occ().iter().map(|&o| o as usize).collect();
    let b: Vec<usize> = beta.occ().iter().map(|&o| o as usize).collect();
    let eta = a.len();
    let mut total = ZERO;
    for (perm, sign) in permutations(eta) {
        let bp: Vec<usize> = perm.iter().map(|&p| b[p]).collect();
        let mismatch: Vec<usize> = (0..eta).filter(|&e| a[e] != bp[e]).collect();
        let mut v = ZERO;
        for e in 0..eta {
            if mismatch.iter().all(|&m| m == e) {
                v += t.h1(a[e], bp[e]);
            }
            for f in e + 1..eta {
                if mismatch.iter().all(|&m| m == e || m == f) {
                    // ⟨a_e a_f | b_e b_f⟩: electron 1 in a_e/b_e, electron 2 in a_f/b_f
                    v += t.h2(a[e], a[f], bp[f], bp[e]);
                }
            }
        }
        total += v * sign;
    }
    total
}

pub fn brute_matrix(dets: &[Determinant], t: &IntegralTable) -> DMatrix<Complex64> {
    let n = dets.len();
    DMatrix::from_fn(n, n, |r, c| brute_entry(&dets[r], &dets[c], t))
}

fn rc<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random complex table with Hermitian `h1` and the particle-exchange and
/// conjugation symmetries of a genuine two-electron integral.
pub fn random_table<R: Rng>(n: usize, rng: &mut R) -> IntegralTable {
    let mut h1 = vec![ZERO; n * n];
    for i in 0..n {
        h1[i * n + i] = Complex64::new(rng.gen_range(-2.0..2.0), 0.0);
        for j in i + 1..n {
            let v = rc(rng);
            h1[i * n + j] = v;
            h1[j * n + i] = v.conj();
        }
    }
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    let x: Vec<Complex64> = (0..n * n * n * n).map(|_| rc(rng)).collect();
    // physicists' P(a,b,c,d) = ⟨ab|cd⟩ averaged over its symmetry group
    let mut h2 = vec![ZERO; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let p = (x[idx(a, b, c, d)]
                        + x[idx(b, a, d, c)]
                        + x[idx(c, d, a, b)].conj()
                        + x[idx(d, c, b, a)].conj())
                        / 4.0;
                    // h_ijkℓ with (i,j,ℓ,k) = (a,b,c,d)
                    h2[idx(a, b, d, c)] = p;
                }
            }
        }
    }
    IntegralTable::from_arrays(n, h1, h2, vec![])
}

/// `n_spatial` normalized Gaussians on a line, each in both spins
/// (spin-orbitals ordered spatial-major).
pub fn gaussian_basis(n_spatial: usize) -> (Vec<SpinOrbital>, Vec<Nucleus>) {
    let mut basis = Vec::new();
    let mut nuclei = Vec::new();
    for s in 0..n_spatial {
        let center = [0.0, 0.3 * s as f64, 0.9 * s as f64 - 0.6];
        let powers = if s == 2 { [0, 0, 1] } else { [0, 0, 0] };
        for spin in [Spin::Up, Spin::Down] {
            let orb = SpinOrbital::new(
                center,
                vec![
                    Primitive {
                        exponent: 0.8 + 0.4 * s as f64,
                        coefficient: 0.7,
                    },
                    Primitive {
                        exponent: 2.5,
                        coefficient: 0.3,
                    },
                ],
                powers,
                spin,
            )
            .unwrap()
            .normalized();
            basis.push(orb);
        }
        nuclei.push(Nucleus {
            charge: 1.0,
            position: center,
        });
    }
    (basis, nuclei)
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Random 1-sparse Hermitian pieces: a random partial matching with
/// real diagonal fixed points.
pub fn random_pieces<R: Rng>(dim: usize, pieces: usize, mu: u64, complex: bool, rng: &mut R) -> AlephSet {
    let mut partners = Vec::new();
    let mut values = Vec::new();
    for _ in 0..pieces {
        let mut order: Vec<usize> = (0..dim).collect();
        order.shuffle(rng);
        let mut p: Vec<u32> = (0..dim as u32).collect();
        let mut pairs = Vec::new();
        let mut i = 0;
        while i + 1 < dim {
            if rng.gen_bool(0.8) {
                let (a, b) = (order[i], order[i + 1]);
                p[a] = b as u32;
                p[b] = a as u32;
                pairs.push((a, b));
                i += 2;
            } else {
                i += 1;
            }
        }
        let mut v = vec![ZERO; dim * mu as usize];
        for rho in 0..mu as usize {
            for x in 0..dim {
                if p[x] as usize == x && rng.gen_bool(0.7) {
                    v[rho * dim + x] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
                }
            }
            for &(a, b) in &pairs {
                let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
                let z = Complex64::new(rng.gen_range(-1.0..1.0), im);
                v[rho * dim + a] = z;
                v[rho * dim + b] = z.conj();
            }
        }
        partners.push(p);
        values.push(v);
    }
    AlephSet::new(dim, mu, partners, values).unwrap()
}

/// `e^{−iHt}` by scaling and squaring of a long Taylor series.
pub fn expm_oracle(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let d = h.nrows();
    let norm: f64 = h.iter().map(|v| v.norm()).sum::<f64>() * t.abs();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = h * Complex64::new(0.0, -t / 2f64.powi(s));
    let mut sum = DMatrix::<Complex64>::identity(d, d);
    let mut term = DMatrix::<Complex64>::identity(d, d);
    for j in 1..=30 {
        term = &a * term / Complex64::new(j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

pub fn vec_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
