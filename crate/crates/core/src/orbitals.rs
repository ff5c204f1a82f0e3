//! Contracted Cartesian Gaussian spin-orbitals and their regularity bounds.
//!
//! Lengths are in bohr. A spin-orbital is `Σ_k c_k x^nx y^ny z^nz exp(-a_k r²)`
//! about its centre, times a spin label. Coefficients are used as given;
//! [`SpinOrbital::normalized`] rescales them to unit norm.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub exponent: f64,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinOrbital {
    pub center: [f64; 3],
    pub primitives: Vec<Primitive>,
    pub powers: [u32; 3],
    pub spin: Spin,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvalOrder {
    Value,
    Gradient,
    Laplacian,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evaluated {
    Scalar(f64),
    Vector([f64; 3]),
}

/// `∫ x^(2n) exp(-p x²) dx` over the real line.
fn gaussian_moment(n: u32, p: f64) -> f64 {
    let mut df = 1.0;
    let mut k = 2 * n as i64 - 1;
    while k > 1 {
        df *= k as f64;
        k -= 2;
    }
    df / (2.0 * p).powi(n as i32) * (std::f64::consts::PI / p).sqrt()
}

/// Monomial `x^n` and its first and second derivatives.
#[inline]
fn mono(x: f64, n: u32) -> (f64, f64, f64) {
    let n_i = n as i32;
    let v = x.powi(n_i);
    let d1 = if n >= 1 { n as f64 * x.powi(n_i - 1) } else { 0.0 };
    let d2 = if n >= 2 {
        (n * (n - 1)) as f64 * x.powi(n_i - 2)
    } else {
        0.0
    };
    (v, d1, d2)
}

impl SpinOrbital {
    pub fn new(
        center: [f64; 3],
        primitives: Vec<Primitive>,
        powers: [u32; 3],
        spin: Spin,
    ) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::InvalidBasis("orbital without primitives".into()));
        }
        if primitives
            .iter()
            .any(|p| !(p.exponent > 0.0) || !p.exponent.is_finite() || !p.coefficient.is_finite())
        {
            return Err(Error::InvalidBasis(
                "exponents must be positive and finite".into(),
            ));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBasis("non-finite centre".into()));
        }
        Ok(SpinOrbital {
            center,
            primitives,
            powers,
            spin,
        })
    }

    /// Single s-type primitive with unit coefficient.
    pub fn s(center: [f64; 3], exponent: f64, spin: Spin) -> Self {
        Self::new(
            center,
            vec![Primitive {
                exponent,
                coefficient: 1.0,
            }],
            [0, 0, 0],
            spin,
        )
        .expect("valid s primitive")
    }

    pub fn angular_momentum(&self) -> u32 {
        self.powers.iter().sum()
    }

    pub fn min_exponent(&self) -> f64 {
        self.primitives
            .iter()
            .map(|p| p.exponent)
            .fold(f64::INFINITY, f64::min)
    }

    /// `⟨φ|φ⟩` from the closed-form same-centre Gaussian moments.
    pub fn self_overlap(&self) -> f64 {
        let [nx, ny, nz] = self.powers;
        let mut s = 0.0;
        for p in &self.primitives {
            for q in &self.primitives {
                let e = p.exponent + q.exponent;
                s += p.coefficient
                    * q.coefficient
                    * gaussian_moment(nx, e)
                    * gaussian_moment(ny, e)
                    * gaussian_moment(nz, e);
            }
        }
        s
    }

    pub fn normalized(mut self) -> Self {
        let scale = 1.0 / self.self_overlap().sqrt();
        for p in &mut self.primitives {
            p.coefficient *= scale;
        }
        self
    }

    /// Value, gradient and Laplacian at `r` in one pass.
    pub fn eval_all(&self, r: [f64; 3]) -> (f64, [f64; 3], f64) {
        let d = [
            r[0] - self.center[0],
            r[1] - self.center[1],
            r[2] - self.center[2],
        ];
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let m = [
            mono(d[0], self.powers[0]),
            mono(d[1], self.powers[1]),
            mono(d[2], self.powers[2]),
        ];
        let mut val = 0.0;
        let mut grad = [0.0; 3];
        let mut lap = 0.0;
        for p in &self.primitives {
            let a = p.exponent;
            let e = p.coefficient * (-a * r2).exp();
            if e == 0.0 {
                continue;
            }
            // per-axis factor f(x) = x^n e^{-a x²}, f' and f'' (without the
            // shared exponential)
            let mut f = [0.0; 3];
            let mut f1 = [0.0; 3];
            let mut f2 = [0.0; 3];
            for k in 0..3 {
                let (v, dv, ddv) = m[k];
                let x = d[k];
                f[k] = v;
                f1[k] = dv - 2.0 * a * x * v;
                f2[k] = ddv - 2.0 * a * v - 4.0 * a * x * dv + 4.0 * a * a * x * x * v;
            }
            val += e * f[0] * f[1] * f[2];
            grad[0] += e * f1[0] * f[1] * f[2];
            grad[1] += e * f[0] * f1[1] * f[2];
            grad[2] += e * f[0] * f[1] * f1[2];
            lap += e * (f2[0] * f[1] * f[2] + f[0] * f2[1] * f[2] + f[0] * f[1] * f2[2]);
        }
        (val, grad, lap)
    }

    pub fn value(&self, r: [f64; 3]) -> f64 {
        let d2 = dist2(r, self.center);
        let [nx, ny, nz] = self.powers;
        let poly = (r[0] - self.center[0]).powi(nx as i32)
            * (r[1] - self.center[1]).powi(ny as i32)
            * (r[2] - self.center[2]).powi(nz as i32);
        let mut s = 0.0;
        for p in &self.primitives {
            s += p.coefficient * (-p.exponent * d2).exp();
        }
        s * poly
    }

    pub fn gradient(&self, r: [f64; 3]) -> [f64; 3] {
        self.eval_all(r).1
    }

    pub fn laplacian(&self, r: [f64; 3]) -> f64 {
        self.eval_all(r).2
    }

    pub fn eval(&self, r: [f64; 3], order: EvalOrder) -> Evaluated {
        match order {
            EvalOrder::Value => Evaluated::Scalar(self.value(r)),
            EvalOrder::Gradient => Evaluated::Vector(self.gradient(r)),
            EvalOrder::Laplacian => Evaluated::Scalar(self.laplacian(r)),
        }
    }

    /// Radial upper bounds at distance `s` from the centre for |φ|, ‖∇φ‖ and
    /// |∇²φ|, using |x^nx y^ny z^nz| ≤ s^L.
    pub fn envelopes(&self, s: f64) -> (f64, f64, f64) {
        let l = self.angular_momentum() as i32;
        let lf = l as f64;
        let (mut v, mut g, mut h) = (0.0, 0.0, 0.0);
        for p in &self.primitives {
            let a = p.exponent;
            let c = p.coefficient.abs() * (-a * s * s).exp();
            let sl = s.powi(l);
            v += c * sl;
            let sl1 = if l >= 1 { lf * s.powi(l - 1) } else { 0.0 };
            g += c * (sl1 + 2.0 * a * s.powi(l + 1));
            let sl2 = if l >= 2 {
                lf * (lf - 1.0) * s.powi(l - 2)
            } else {
                0.0
            };
            // generous: every term of the Laplacian bounded separately
            h += c * (sl2 + 2.0 * a * (2.0 * lf + 3.0) * sl + 4.0 * a * a * s.powi(l + 2));
        }
        (v, g, h)
    }
}

pub fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

pub fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    dist2(a, b).sqrt()
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisBounds {
    pub phi_max: f64,
    pub x_max: f64,
    pub alpha_decay: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

/// Points per axis for maximum search and certification sampling.
pub const SAMPLE_AXIS: usize = 64;
const GAMMA_MARGIN: f64 = 1.0 + 1e-9;
const CERT_TOL: f64 = 1e-12;

/// Maximises `f` by a dense grid over the cube of half-width `half` about
/// `c`, then polishes the best cells with Nelder–Mead.
fn maximize<F: Fn([f64; 3]) -> f64>(f: &F, c: [f64; 3], half: f64) -> f64 {
    let n = SAMPLE_AXIS + 1; // odd so the centre is a sample
    let h = 2.0 * half / (n - 1) as f64;
    let mut best: Vec<(f64, [f64; 3])> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let r = [
                    c[0] - half + i as f64 * h,
                    c[1] - half + j as f64 * h,
                    c[2] - half + k as f64 * h,
                ];
                let v = f(r);
                if best.len() < 8 || v > best[best.len() - 1].0 {
                    best.push((v, r));
                    best.sort_by(|a, b| b.0.total_cmp(&a.0));
                    best.truncate(8);
                }
            }
        }
    }
    best.iter()
        .map(|&(v, r)| v.max(nelder_mead_max(f, r, h)))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn nelder_mead_max<F: Fn([f64; 3]) -> f64>(f: &F, x0: [f64; 3], step: f64) -> f64 {
    let mut pts: Vec<([f64; 3], f64)> = (0..4)
        .map(|k| {
            let mut x = x0;
            if k > 0 {
                x[k - 1] += step;
            }
            (x, -f(x))
        })
        .collect();
    for _ in 0..2000 {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (pts[3].1 - pts[0].1).abs() <= 1e-15 * pts[0].1.abs().max(1e-300) {
            break;
        }
        let mut cen = [0.0; 3];
        for p in &pts[..3] {
            for k in 0..3 {
                cen[k] += p.0[k] / 3.0;
            }
        }
        let worst = pts[3];
        let along = |t: f64| {
            let mut x = [0.0; 3];
            for k in 0..3 {
                x[k] = cen[k] + t * (worst.0[k] - cen[k]);
            }
            (x, -f(x))
        };
        let refl = along(-1.0);
        if refl.1 < pts[0].1 {
            let exp = along(-2.0);
            pts[3] = if exp.1 < refl.1 { exp } else { refl };
        } else if refl.1 < pts[2].1 {
            pts[3] = refl;
        } else {
            let con = along(0.5);
            if con.1 < worst.1 {
                pts[3] = con;
            } else {
                let b = pts[0].0;
                for p in pts.iter_mut().skip(1) {
                    for k in 0..3 {
                        p.0[k] = b[k] + 0.5 * (p.0[k] - b[k]);
                    }
                    p.1 = -f(p.0);
                }
            }
        }
    }
    -pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
}

/// Whether `envelope(s)·exp(α s / x) ≤ φ_max` for all `s ≥ x`.
fn decay_holds(basis: &[SpinOrbital], phi_max: f64, alpha: f64, x: f64) -> bool {
    let ln_phi = phi_max.ln();
    basis.iter().all(|orb| {
        let a = orb.min_exponent();
        let l = orb.angular_momentum() as f64;
        // beyond s_end the Gaussian factor has overtaken the exponential
        let s_end = x + 2.0 * alpha / (a * x) + ((l + 40.0) / a).sqrt() + 1.0;
        let steps = 4000;
        (0..=steps).all(|k| {
            let s = x + (s_end - x) * k as f64 / steps as f64;
            let g = orb.envelopes(s).0;
            g == 0.0 || g.ln() + alpha * s / x <= ln_phi - 1e-9
        })
    })
}

/// Derives and certifies `BasisBounds` for a Gaussian basis.
pub fn derive_bounds(basis: &[SpinOrbital], alpha_decay: f64) -> Result<BasisBounds> {
    if basis.is_empty() {
        return Err(Error::InvalidBasis("empty basis".into()));
    }
    if !(alpha_decay > 0.0) {
        return Err(Error::InvalidBasis("alpha_decay must be positive".into()));
    }
    let mut phi_max: f64 = 0.0;
    let mut grad_max: f64 = 0.0;
    let mut lap_max: f64 = 0.0;
    for orb in basis {
        let a = orb.min_exponent();
        let half = 3.0 * ((orb.angular_momentum() as f64 + 2.0) / (2.0 * a)).sqrt();
        phi_max = phi_max.max(maximize(&|r| orb.value(r).abs(), orb.center, half));
        grad_max = grad_max.max(maximize(&|r| norm3(orb.gradient(r)), orb.center, half));
        lap_max = lap_max.max(maximize(&|r| orb.laplacian(r).abs(), orb.center, half));
    }
    if !(phi_max > 0.0) {
        return Err(Error::InvalidBasis("orbital vanishes identically".into()));
    }

    // smallest x_max for which the exponential decay envelope holds
    let mut hi = 1.0;
    while !decay_holds(basis, phi_max, alpha_decay, hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::InvalidBasis("no decay radius found".into()));
        }
    }
    let mut lo = hi / 2.0;
    while lo > 1e-8 && decay_holds(basis, phi_max, alpha_decay, lo) {
        hi = lo;
        lo /= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if decay_holds(basis, phi_max, alpha_decay, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x_max = hi;
    let bounds = BasisBounds {
        phi_max,
        x_max,
        alpha_decay,
        gamma1: grad_max * x_max / phi_max * GAMMA_MARGIN,
        gamma2: lap_max * x_max * x_max / phi_max * GAMMA_MARGIN,
    };
    certify(basis, &bounds)?;
    Ok(bounds)
}

/// Checks the four regularity inequalities on a dense grid over each
/// orbital's cube of half-width 3·x_max, and on the radial envelopes beyond.
pub fn certify(basis: &[SpinOrbital], b: &BasisBounds) -> Result<()> {
    let grad_bound = b.gamma1 * b.phi_max / b.x_max;
    let lap_bound = b.gamma2 * b.phi_max / (b.x_max * b.x_max);
    let tol = 1.0 + CERT_TOL;
    let n = SAMPLE_AXIS;
    let half = 3.0 * b.x_max;
    let h = 2.0 * half / n as f64;
    for (idx, orb) in basis.iter().enumerate() {
        let c = orb.center;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let r = [
                        c[0] - half + (i as f64 + 0.5) * h,
                        c[1] - half + (j as f64 + 0.5) * h,
                        c[2] - half + (k as f64 + 0.5) * h,
                    ];
                    check_point(idx, orb, r, b, grad_bound, lap_bound, tol)?;
                }
            }
        }
        // analytic tail: radial envelopes bound every direction at once
        let steps = 2000;
        let s_end = half + ((orb.angular_momentum() as f64 + 40.0) / orb.min_exponent()).sqrt();
        for k in 0..=steps {
            let s = half + (s_end - half) * k as f64 / steps as f64;
            let (v, g, l) = orb.envelopes(s);
            let loc = [c[0] + s, c[1], c[2]];
            if v > b.phi_max * (-b.alpha_decay * s / b.x_max).exp() * tol {
                return Err(violation(idx, "decay envelope", loc));
            }
            if g > grad_bound * tol {
                return Err(violation(idx, "gradient envelope", loc));
            }
            if l > lap_bound * tol {
                return Err(violation(idx, "laplacian envelope", loc));
            }
        }
    }
    Ok(())
}

fn violation(orbital: usize, quantity: &'static str, location: [f64; 3]) -> Error {
    Error::BoundViolated {
        orbital,
        quantity,
        location,
    }
}

fn check_point(
    idx: usize,
    orb: &SpinOrbital,
    r: [f64; 3],
    b: &BasisBounds,
    grad_bound: f64,
    lap_bound: f64,
    tol: f64,
) -> Result<()> {
    let (v, g, l) = orb.eval_all(r);
    let v = v.abs();
    if v > b.phi_max * tol {
        return Err(violation(idx, "phi_max", r));
    }
    let d = dist(r, orb.center);
    if d >= b.x_max && v > b.phi_max * (-b.alpha_decay * d / b.x_max).exp() * tol {
        return Err(violation(idx, "decay", r));
    }
    if norm3(g) > grad_bound * tol {
        return Err(violation(idx, "gradient", r));
    }
    if l.abs() > lap_bound * tol {
        return Err(violation(idx, "laplacian", r));
    }
    Ok(())
}
