//! Riemann-sum discretization of the one- and two-electron integrals.
//!
//! Each integral is truncated to a finite domain and sampled at cell centres
//! on a grid whose size depends only on `δ` and the basis bounds. Every term
//! of a sum carries an a-priori magnitude bound. Grid indices `ρ` are
//! row-major over the grid axes.
//!
//! * `S0(i, j)`: `½ ∫ ∇φ_i*·∇φ_j` over the cube `C_{x0}(c_i)`.
//! * `S1(i, j, q)`: `−Z_q ∫ φ_i* φ_j / |R_q − r|`, either over `C_{x1}(c_i)`
//!   (orbital far from the nucleus) or in spherical polar coordinates over
//!   the ball `B_{4x1}(R_q)`.
//! * `S2(i, j, k, ℓ)`: `∫∫ φ_i*(r1) φ_j*(r2) φ_k(r2) φ_ℓ(r1) / |r1 − r2|`,
//!   either over `C_{x2}(c_i) × C_{x2}(c_j)` (i and j far apart) or with
//!   `r2 = r1 − ζ′x2 t û(θ, φ)` around `r1 ∈ C_{x2}(c_i)`.

use crate::error::{Error, Result};
use crate::integrals::Nucleus;
use crate::orbitals::{dist, BasisBounds, SpinOrbital};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default per-axis grid cap.
pub const GRID_CAP: u64 = 256;

/// `ζ′ = 2√3 + 3`, the relative radius of the nearby-branch ball.
pub fn zeta_prime() -> f64 {
    2.0 * 3f64.sqrt() + 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralKind {
    S0,
    /// Nuclear attraction to nucleus `q` (0-based).
    S1 { q: usize },
    S2,
}

impl IntegralKind {
    fn arity(self) -> usize {
        match self {
            IntegralKind::S2 => 4,
            _ => 2,
        }
    }

    fn dims(self) -> u32 {
        match self {
            IntegralKind::S2 => 6,
            _ => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateSystem {
    Cartesian,
    SphericalPolar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub delta: f64,
    pub bounds: BasisBounds,
    pub kind: IntegralKind,
    /// 1-based orbital labels: `(i, j)` or `(i, j, k, ℓ)`.
    pub orbitals: Vec<usize>,
    /// Nuclear charge for `S1`, otherwise 0.
    pub charge: f64,
    pub x_trunc: f64,
    pub grid_n: u64,
    pub mu: u64,
    pub coordinate_system: CoordinateSystem,
    pub zeta_prime: f64,
    /// `log(K φ^a x^b / δ)`.
    pub log_factor: f64,
    /// Per-term magnitude bound.
    pub term_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiemannTerm {
    pub rho: u64,
    pub value: Complex64,
    pub bound: f64,
}

/// Error-bound constant `K` and the prefactor `A = K φ_max^a x_max^b (Z)`.
fn prefactor(kind: IntegralKind, b: &BasisBounds, charge: f64) -> (f64, f64) {
    let (al, g1, g2) = (b.alpha_decay, b.gamma1, b.gamma2);
    let (phi, x) = (b.phi_max, b.x_max);
    match kind {
        IntegralKind::S0 => {
            let k = 26.0 * g1 / (al * al) + 8.0 * PI * g2 / al.powi(3) + 32.0 * 3f64.sqrt() * g1 * g2;
            (k, k * phi * phi * x)
        }
        IntegralKind::S1 { .. } => {
            let k = 8.0 * PI * PI / al.powi(3) * (al + 2.0) + 1121.0 * (8.0 * g1 + 2f64.sqrt());
            (k, k * charge * phi * phi * x * x)
        }
        IntegralKind::S2 => {
            let k = 128.0 * PI / al.powi(6) * (al + 2.0)
                + 2161.0 * PI * PI * (20.0 * g1 + 2f64.sqrt());
            (k, k * phi.powi(4) * x.powi(5))
        }
    }
}

/// `(c, p)` in `x_trunc = (c/α) x_max u` and `N = ⌈(A/δ)(c u/α)^p⌉`, plus the
/// admissibility exponent `e` in `δ ≤ e^{−α e} A`.
fn shape(kind: IntegralKind) -> (f64, i32, f64) {
    match kind {
        IntegralKind::S2 => (1.0, 7, 1.0),
        _ => (2.0, 4, 0.5),
    }
}

/// Per-term bound for a given `u = log(A/δ)` and `μ`.
fn term_bound(kind: IntegralKind, b: &BasisBounds, charge: f64, u: f64, mu: f64) -> f64 {
    let (al, phi, x) = (b.alpha_decay, b.phi_max, b.x_max);
    match kind {
        IntegralKind::S0 => 32.0 * b.gamma1 * b.gamma1 / al.powi(3) * phi * phi * x * u.powi(3) / mu,
        IntegralKind::S1 { .. } => {
            256.0 * PI * PI / al.powi(3) * charge * phi * phi * x * x * u.powi(3) / mu
        }
        IntegralKind::S2 => 672.0 * PI * PI / al.powi(6) * phi.powi(4) * x.powi(5) * u.powi(6) / mu,
    }
}

fn check_orbitals(kind: IntegralKind, orbitals: &[usize], n: usize) -> Result<()> {
    if orbitals.len() != kind.arity() {
        return Err(Error::SpecMismatch(format!(
            "{kind:?} takes {} orbitals, got {}",
            kind.arity(),
            orbitals.len()
        )));
    }
    for &o in orbitals {
        if o < 1 || o > n {
            return Err(Error::IndexOutOfRange { index: o, n });
        }
    }
    Ok(())
}

/// Chooses the truncation domain, grid and branch for one integral.
pub fn plan_quadrature(
    kind: IntegralKind,
    orbitals: &[usize],
    delta: f64,
    bounds: &BasisBounds,
    basis: &[SpinOrbital],
    nuclei: &[Nucleus],
    grid_cap: u64,
) -> Result<QuadratureSpec> {
    check_orbitals(kind, orbitals, basis.len())?;
    let charge = match kind {
        IntegralKind::S1 { q } => {
            nuclei
                .get(q)
                .ok_or(Error::IndexOutOfRange {
                    index: q,
                    n: nuclei.len(),
                })?
                .charge
        }
        _ => 0.0,
    };
    let zp = zeta_prime();
    if matches!(kind, IntegralKind::S1 { .. }) && charge == 0.0 {
        // no potential: a single zero term
        return Ok(QuadratureSpec {
            delta,
            bounds: *bounds,
            kind,
            orbitals: orbitals.to_vec(),
            charge,
            x_trunc: bounds.x_max,
            grid_n: 1,
            mu: 1,
            coordinate_system: CoordinateSystem::Cartesian,
            zeta_prime: zp,
            log_factor: 0.0,
            term_bound: 0.0,
        });
    }
    let (_, a) = prefactor(kind, bounds, charge);
    let (c, p, e) = shape(kind);
    let al = bounds.alpha_decay;
    let limit = (-al * e).exp() * a;
    if !(delta > 0.0 && delta <= limit) {
        return Err(Error::DeltaTooLarge { delta, limit });
    }
    let u = (a / delta).ln();
    let x_trunc = c / al * bounds.x_max * u;
    let n_real = a / delta * (c * u / al).powi(p);
    if !(n_real <= grid_cap as f64) {
        let grid_n = if n_real.is_finite() && n_real < u64::MAX as f64 {
            n_real.ceil() as u64
        } else {
            u64::MAX
        };
        return Err(Error::DeltaTooSmall {
            delta,
            grid_n,
            cap: grid_cap,
        });
    }
    let grid_n = n_real.ceil() as u64;
    let mu = grid_n.pow(kind.dims());
    let coordinate_system = match kind {
        IntegralKind::S0 => CoordinateSystem::Cartesian,
        IntegralKind::S1 { q } => {
            let d = dist(nuclei[q].position, basis[orbitals[0] - 1].center);
            if d >= 3f64.sqrt() * x_trunc + bounds.x_max {
                CoordinateSystem::Cartesian
            } else {
                CoordinateSystem::SphericalPolar
            }
        }
        IntegralKind::S2 => {
            let d = dist(basis[orbitals[0] - 1].center, basis[orbitals[1] - 1].center);
            if d >= 2.0 * 3f64.sqrt() * x_trunc + bounds.x_max {
                CoordinateSystem::Cartesian
            } else {
                CoordinateSystem::SphericalPolar
            }
        }
    };
    Ok(QuadratureSpec {
        delta,
        bounds: *bounds,
        kind,
        orbitals: orbitals.to_vec(),
        charge,
        x_trunc,
        grid_n,
        mu,
        coordinate_system,
        zeta_prime: zp,
        log_factor: u,
        term_bound: term_bound(kind, bounds, charge, u, mu as f64),
    })
}

/// The `δ` whose plan has exactly `grid_n` points per axis (for tests and
/// the CLI). Errors if `grid_n` is below the smallest admissible grid.
pub fn delta_for_grid(kind: IntegralKind, bounds: &BasisBounds, charge: f64, grid_n: u64) -> Result<f64> {
    let (_, a) = prefactor(kind, bounds, charge);
    let (c, p, e) = shape(kind);
    let al = bounds.alpha_decay;
    let f = |u: f64| u.exp() * (c * u / al).powi(p);
    let target = grid_n as f64 - 0.5;
    let (mut lo, mut hi) = (al * e, al * e + 1.0);
    if f(lo) > target {
        return Err(Error::DeltaTooLarge {
            delta: a * (-lo).exp(),
            limit: a * (-lo).exp(),
        });
    }
    while f(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(a * (-0.5 * (lo + hi)).exp())
}

/// Midpoint of cell `k` of `n` on `[-1, 1]`.
#[inline]
fn cell(k: u64, n: u64) -> f64 {
    (2 * k + 1) as f64 / n as f64 - 1.0
}

#[inline]
fn unravel<const D: usize>(mut rho: u64, n: u64) -> [u64; D] {
    let mut k = [0u64; D];
    for d in (0..D).rev() {
        k[d] = rho % n;
        rho /= n;
    }
    k
}

fn orbital(basis: &[SpinOrbital], label: usize) -> &SpinOrbital {
    &basis[label - 1]
}

/// Value of term `ρ` of the Riemann sum described by `spec`.
pub fn term_value(spec: &QuadratureSpec, basis: &[SpinOrbital], nuclei: &[Nucleus], rho: u64) -> f64 {
    let n = spec.grid_n;
    let x = spec.x_trunc;
    let o = &spec.orbitals;
    match spec.kind {
        IntegralKind::S0 => {
            let (a, b) = (orbital(basis, o[0]), orbital(basis, o[1]));
            if a.spin != b.spin {
                return 0.0;
            }
            let k = unravel::<3>(rho, n);
            let r = [0, 1, 2].map(|d| a.center[d] + x * cell(k[d], n));
            let (ga, gb) = (a.gradient(r), b.gradient(r));
            let vol = (2.0 * x / n as f64).powi(3);
            0.5 * (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2]) * vol
        }
        IntegralKind::S1 { q } => {
            let (a, b) = (orbital(basis, o[0]), orbital(basis, o[1]));
            if a.spin != b.spin || spec.charge == 0.0 {
                return 0.0;
            }
            let rq = nuclei[q].position;
            let z = spec.charge;
            let k = unravel::<3>(rho, n);
            match spec.coordinate_system {
                CoordinateSystem::Cartesian => {
                    let r = [0, 1, 2].map(|d| a.center[d] + x * cell(k[d], n));
                    let vol = (2.0 * x / n as f64).powi(3);
                    -z * a.value(r) * b.value(r) / dist(rq, r) * vol
                }
                CoordinateSystem::SphericalPolar => {
                    let nf = n as f64;
                    let s = (k[0] as f64 + 0.5) / nf;
                    let th = PI * (k[1] as f64 + 0.5) / nf;
                    let ph = 2.0 * PI * (k[2] as f64 + 0.5) / nf;
                    let rad = 4.0 * x * s;
                    let u = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    let r = [0, 1, 2].map(|d| rq[d] + rad * u[d]);
                    let f1 = a.value(r) * b.value(r) * s * th.sin();
                    -16.0 * x * x * z * f1 * 2.0 * PI * PI / (nf * nf * nf)
                }
            }
        }
        IntegralKind::S2 => {
            let (oi, oj, ok, ol) = (
                orbital(basis, o[0]),
                orbital(basis, o[1]),
                orbital(basis, o[2]),
                orbital(basis, o[3]),
            );
            if oi.spin != ol.spin || oj.spin != ok.spin {
                return 0.0;
            }
            let k = unravel::<6>(rho, n);
            let nf = n as f64;
            match spec.coordinate_system {
                CoordinateSystem::Cartesian => {
                    let r1 = [0, 1, 2].map(|d| oi.center[d] + x * cell(k[d], n));
                    let r2 = [0, 1, 2].map(|d| oj.center[d] + x * cell(k[3 + d], n));
                    let vol = (2.0 * x / nf).powi(6);
                    oi.value(r1) * ol.value(r1) * oj.value(r2) * ok.value(r2) / dist(r1, r2) * vol
                }
                CoordinateSystem::SphericalPolar => {
                    let zp = spec.zeta_prime;
                    let r1 = [0, 1, 2].map(|d| oi.center[d] + x * cell(k[d], n));
                    let t = (k[3] as f64 + 0.5) / nf;
                    let th = PI * (k[4] as f64 + 0.5) / nf;
                    let ph = 2.0 * PI * (k[5] as f64 + 0.5) / nf;
                    let u = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    let r2 = [0, 1, 2].map(|d| r1[d] - zp * x * t * u[d]);
                    let f2 = oi.value(r1) * ol.value(r1) * oj.value(r2) * ok.value(r2) * t * th.sin();
                    zp * zp * x.powi(5) * f2 * 16.0 * PI * PI / nf.powi(6)
                }
            }
        }
    }
}

fn riemann(spec: &QuadratureSpec, basis: &[SpinOrbital], nuclei: &[Nucleus]) -> Vec<RiemannTerm> {
    (0..spec.mu)
        .into_par_iter()
        .map(|rho| RiemannTerm {
            rho,
            value: Complex64::new(term_value(spec, basis, nuclei, rho), 0.0),
            bound: spec.term_bound,
        })
        .collect()
}

fn expect_kind(spec: &QuadratureSpec, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::SpecMismatch(format!("unexpected kind {:?}", spec.kind)))
    }
}

pub fn riemann_s0(spec: &QuadratureSpec, basis: &[SpinOrbital]) -> Result<Vec<RiemannTerm>> {
    expect_kind(spec, spec.kind == IntegralKind::S0)?;
    Ok(riemann(spec, basis, &[]))
}

pub fn riemann_s1(spec: &QuadratureSpec, basis: &[SpinOrbital], nuclei: &[Nucleus]) -> Result<Vec<RiemannTerm>> {
    expect_kind(spec, matches!(spec.kind, IntegralKind::S1 { .. }))?;
    Ok(riemann(spec, basis, nuclei))
}

pub fn riemann_s2(spec: &QuadratureSpec, basis: &[SpinOrbital]) -> Result<Vec<RiemannTerm>> {
    expect_kind(spec, spec.kind == IntegralKind::S2)?;
    Ok(riemann(spec, basis, &[]))
}

/// Any kind.
pub fn riemann_terms(spec: &QuadratureSpec, basis: &[SpinOrbital], nuclei: &[Nucleus]) -> Vec<RiemannTerm> {
    riemann(spec, basis, nuclei)
}

/// Orbital labels of the integral whose conjugate pairs with this one.
pub fn hermitian_partner(kind: IntegralKind, orbitals: &[usize]) -> Vec<usize> {
    match kind {
        IntegralKind::S2 => vec![orbitals[3], orbitals[2], orbitals[1], orbitals[0]],
        _ => vec![orbitals[1], orbitals[0]],
    }
}

/// Term-wise `(a + conj b)/2` of an integral and its Hermitian partner.
pub fn hermitize(a: &[RiemannTerm], b: &[RiemannTerm]) -> Result<Vec<RiemannTerm>> {
    if a.len() != b.len() {
        return Err(Error::SpecMismatch(format!(
            "term counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            if x.rho != y.rho {
                return Err(Error::SpecMismatch(format!("grid index {} vs {}", x.rho, y.rho)));
            }
            Ok(RiemannTerm {
                rho: x.rho,
                value: (x.value + y.value.conj()) / 2.0,
                bound: x.bound.max(y.bound),
            })
        })
        .collect()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn sum_terms(terms: &[RiemannTerm]) -> Complex64 {
    Complex64::new(
        compensated_sum(terms.iter().map(|t| t.value.re)),
        compensated_sum(terms.iter().map(|t| t.value.im)),
    )
}

/// `Λ_{μ,x}(c) = ∫_{|r| ≥ x} e^{−μ|r|} / |r − c| dr` in closed form, with the
/// applicable upper bound.
pub fn lambda_exact(mu: f64, x: f64, c: f64) -> (f64, f64) {
    let e = (-mu * x).exp();
    if c <= x {
        let exact = 4.0 * PI * (x / mu + 1.0 / (mu * mu)) * e;
        (exact, 8.0 * PI / (mu * mu) * (-mu * x / 2.0).exp())
    } else {
        let m2 = mu * mu;
        let m3 = m2 * mu;
        let exact = 4.0 * PI / c
            * ((x * x / mu + 2.0 * x / m2 + 2.0 / m3) * e - (c / m2 + 2.0 / m3) * (-mu * c).exp());
        (exact, 16.0 * PI / (m3 * c) * (-mu * x / 2.0).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_bounds() -> BasisBounds {
        BasisBounds {
            phi_max: 1.0,
            x_max: 1.0,
            alpha_decay: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
        }
    }

    #[test]
    fn s0_grid_example() {
        let b = unit_bounds();
        let k0 = 26.0 + 8.0 * PI + 32.0 * 3f64.sqrt();
        let basis = vec![SpinOrbital::s([0.0; 3], 1.0, crate::orbitals::Spin::Up)];
        let spec =
            plan_quadrature(IntegralKind::S0, &[1, 1], k0 / 1f64.exp(), &b, &basis, &[], GRID_CAP).unwrap();
        assert_eq!(spec.grid_n, 44);
        assert_eq!(spec.mu, 44 * 44 * 44);
    }

    #[test]
    fn inadmissible_delta() {
        let b = unit_bounds();
        let basis = vec![SpinOrbital::s([0.0; 3], 1.0, crate::orbitals::Spin::Up)];
        for kind in [IntegralKind::S0, IntegralKind::S2] {
            let o: Vec<usize> = vec![1; kind.arity()];
            let e = plan_quadrature(kind, &o, 1e6, &b, &basis, &[], GRID_CAP).unwrap_err();
            assert!(matches!(e, Error::DeltaTooLarge { .. }));
        }
        let e = plan_quadrature(IntegralKind::S0, &[1, 1], 1e-9, &b, &basis, &[], GRID_CAP).unwrap_err();
        assert!(matches!(e, Error::DeltaTooSmall { .. }));
    }

    #[test]
    fn lambda_example() {
        let (v, b) = lambda_exact(2.0, 1.0, 0.5);
        assert!((v - 3.0 * PI * (-2f64).exp()).abs() < 1e-14);
        assert!((b - 2.0 * PI * (-1f64).exp()).abs() < 1e-14);
        let (v0, _) = lambda_exact(1.5, 1e-12, 0.0);
        assert!((v0 - 4.0 * PI / 2.25).abs() < 1e-9);
        // continuity at c = x
        let (a, _) = lambda_exact(1.3, 0.7, 0.7);
        let (c, _) = lambda_exact(1.3, 0.7, 0.7 + 1e-9);
        assert!((a - c).abs() < 1e-7);
    }

    #[test]
    fn compensated_sum_cancels() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
