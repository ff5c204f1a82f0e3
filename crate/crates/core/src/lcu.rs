//! Truncated Taylor series evolution by a linear combination of the
//! self-inverse terms, with oblivious amplitude amplification.
//!
//! One segment implements `Ũ = Σ_{k≤K} (−itζ/r)^k/k! · (Σ_{ℓ,ρ} C_{ℓ,ρ})^k`.
//! Two paths compute it: a dense-block path that forms `Ũ` and the amplified
//! block as matrices, and a register-level state-vector simulation of
//! `B`, `select(V)`, `W` and `G` over the ancilla registers
//! `|k⟩|ℓ₁..ℓ_K⟩|ρ₁..ρ_K⟩`. The register path is meant for tiny sizes only.

use crate::error::{Error, Result};
use crate::selfinverse::{AlephSource, DecompositionMeta, SelfInverseDecomposition};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest requested accuracy the simulation accepts.
pub const EPSILON_FLOOR: f64 = 1e-10;
/// Largest joint register dimension the register path will allocate.
pub const REGISTER_CAP: usize = 1 << 23;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentPlan {
    pub r: u64,
    #[serde(rename = "K")]
    pub k: u32,
    pub zeta: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub mu: u64,
    pub lambda: f64,
    pub t: f64,
    /// `ζLμt/r`, at most `ln 2`.
    pub x: f64,
    pub epsilon: f64,
    /// `(ln 2)^{K+1}/(K+1)!`, at most `ε/(2r)`.
    pub segment_bound: f64,
}

impl SegmentPlan {
    /// Level weights `x^k/k!` for `k = 0..=K`; they sum to `λ`.
    pub fn level_weights(&self) -> Vec<f64> {
        level_weights(self.x, self.k)
    }

    /// `2r·(ln 2)^{K+1}/(K+1)!`: the Taylor layer's share of the error.
    pub fn taylor_budget(&self) -> f64 {
        2.0 * self.r as f64 * self.segment_bound
    }

    /// `3/λ − 4/λ³`: the factor amplification leaves on a unitary block.
    pub fn amplification(&self) -> f64 {
        amplification(self.lambda)
    }
}

fn level_weights(x: f64, k: u32) -> Vec<f64> {
    let mut w = Vec::with_capacity(k as usize + 1);
    let mut term = 1.0;
    for j in 0..=k {
        if j > 0 {
            term *= x / j as f64;
        }
        w.push(term);
    }
    w
}

pub fn amplification(lambda: f64) -> f64 {
    3.0 / lambda - 4.0 / lambda.powi(3)
}

/// `(ln 2)^{k+1}/(k+1)!`.
pub fn taylor_tail(k: u32) -> f64 {
    let mut v = 1.0;
    for j in 1..=k + 1 {
        v *= LN_2 / j as f64;
    }
    v
}

/// Smallest `K` with `(ln 2)^{K+1}/(K+1)! ≤ ε/(2r)`.
pub fn taylor_order(epsilon: f64, r: u64) -> u32 {
    if r == 0 {
        return 0;
    }
    let target = epsilon / (2.0 * r as f64);
    let mut k = 0;
    while taylor_tail(k) > target {
        k += 1;
    }
    k
}

/// `r = ⌈ζLμt/ln 2⌉`, the order `K` and `λ` for total time `t`.
pub fn plan_segments(meta: &DecompositionMeta, t: f64, epsilon: f64) -> Result<SegmentPlan> {
    if !(epsilon > EPSILON_FLOOR && epsilon < 1.0) {
        return Err(Error::BudgetInfeasible(format!(
            "epsilon {epsilon:e} outside ({EPSILON_FLOOR:e}, 1)"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::BudgetInfeasible(format!("time {t} must be finite and non-negative")));
    }
    let y = meta.lambda_weight * t;
    let q = y / LN_2;
    // an exact multiple (up to roundoff) must not pick up an extra segment
    let nearest = q.round();
    let r = if (q - nearest).abs() <= 1e-12 * q.max(1.0) {
        nearest
    } else {
        q.ceil()
    };
    if r > 1e15 {
        return Err(Error::BudgetInfeasible(format!("{r:e} segments")));
    }
    let r = r as u64;
    let x = if r == 0 { 0.0 } else { y / r as f64 };
    let k = taylor_order(epsilon, r);
    let lambda = level_weights(x, k).iter().sum();
    Ok(SegmentPlan {
        r,
        k,
        zeta: meta.zeta,
        l: meta.l,
        mu: meta.mu,
        lambda,
        t,
        x,
        epsilon,
        segment_bound: taylor_tail(k),
    })
}

/// `Ũ = Σ_{k≤K} (−it/r)^k/k! · H̃^k` from the rounded Hamiltonian
/// `H̃ = ζ Σ C_{ℓ,ρ}`.
pub fn taylor_block(rounded: &DMatrix<Complex64>, plan: &SegmentPlan) -> DMatrix<Complex64> {
    let d = rounded.nrows();
    let mut sum = DMatrix::<Complex64>::identity(d, d);
    if plan.r == 0 {
        return sum;
    }
    let c = Complex64::new(0.0, -plan.t / plan.r as f64);
    let mut power = DMatrix::<Complex64>::identity(d, d);
    for j in 1..=plan.k {
        power = rounded * power * (c / j as f64);
        sum += &power;
    }
    sum
}

/// The amplified block `(3/λ)Ũ − (4/λ³)ŨŨ†Ũ`.
pub fn oaa_block(u: &DMatrix<Complex64>, lambda: f64) -> DMatrix<Complex64> {
    u * Complex64::new(3.0 / lambda, 0.0) - u * u.adjoint() * u * Complex64::new(4.0 / lambda.powi(3), 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolvePath {
    Dense,
    Register,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolveOutcome {
    pub plan: SegmentPlan,
    #[serde(skip)]
    pub psi: Vec<Complex64>,
    /// `|1 − ‖Aψ‖/|3/λ − 4/λ³||` for each segment.
    pub per_segment_deviation: Vec<f64>,
}

impl EvolveOutcome {
    pub fn total_deviation(&self) -> f64 {
        self.per_segment_deviation.iter().sum()
    }
}

/// Applies `r` amplified segments to `ψ₀`.
///
/// After each segment the state is projected onto the `|0⟩` ancilla block
/// and rescaled by the known factor `3/λ − 4/λ³` (which is 1 at `λ = 2`),
/// then renormalized; the residual norm deviation is recorded.
pub fn evolve<S: AlephSource>(
    decomp: &SelfInverseDecomposition<S>,
    psi0: &[Complex64],
    t: f64,
    epsilon: f64,
    path: EvolvePath,
) -> Result<EvolveOutcome> {
    let plan = plan_segments(&decomp.meta(), t, epsilon)?;
    if psi0.len() != decomp.dim() {
        return Err(Error::StateLength {
            expected: decomp.dim(),
            got: psi0.len(),
        });
    }
    let f = plan.amplification();
    if plan.r > 0 && f.abs() < 1e-6 {
        return Err(Error::BudgetInfeasible(format!(
            "segment weight {} leaves no amplitude after amplification",
            plan.lambda
        )));
    }
    let mut psi = DVector::from_column_slice(psi0);
    let mut dev = Vec::with_capacity(plan.r as usize);
    let mut step: Box<dyn FnMut(&DVector<Complex64>) -> DVector<Complex64>> = match path {
        EvolvePath::Dense if plan.r > 0 => {
            let a = oaa_block(&taylor_block(&decomp.rounded_dense(), &plan), plan.lambda);
            Box::new(move |v| &a * v)
        }
        EvolvePath::Dense => Box::new(|v| v.clone()),
        EvolvePath::Register => {
            let sim = RegisterSim::new(decomp, &plan)?;
            Box::new(move |v| DVector::from_vec(sim.oaa_segment(v.as_slice()).0))
        }
    };
    for _ in 0..plan.r {
        let next = step(&psi);
        let n = next.norm();
        dev.push((1.0 - n / f.abs()).abs());
        psi = next * Complex64::new(f.signum() / n, 0.0);
    }
    drop(step);
    Ok(EvolveOutcome {
        plan,
        psi: psi.as_slice().to_vec(),
        per_segment_deviation: dev,
    })
}

/// `Q^col`: the partner of `x` under the color of term `ℓ`.
pub fn q_col<S: AlephSource>(d: &SelfInverseDecomposition<S>, l: u64, x: usize) -> usize {
    d.source().partner(d.label(l).gamma)[x] as usize
}

/// `Q^val`: the entry `C_{ℓ,ρ}[x, y]`, zero off the color's pattern.
pub fn q_val<S: AlephSource>(d: &SelfInverseDecomposition<S>, l: u64, rho: u64, x: usize, y: usize) -> Complex64 {
    if x >= d.dim() || y >= d.dim() {
        return ZERO;
    }
    let (col, v) = d.entry(l, rho, x);
    if col == y {
        v
    } else {
        ZERO
    }
}

/// `select(H)` on a system register paired with an equally sized scratch
/// register, by the sequence `Q^col`, `Q^val`, SWAP, `Q^col`.
///
/// Returns `C_{ℓ,ρ}ψ` and the norm left outside the scratch `|0⟩` block.
pub fn select_h<S: AlephSource>(
    d: &SelfInverseDecomposition<S>,
    l: u64,
    rho: u64,
    psi: &[Complex64],
) -> (Vec<Complex64>, f64) {
    let dim = d.dim();
    let w = dim.next_power_of_two();
    let part = |x: usize| if x < dim { q_col(d, l, x) } else { 0 };
    let mut joint = vec![ZERO; w * w];
    for (x, &a) in psi.iter().enumerate() {
        joint[x * w] = a;
    }
    let xor_col = |joint: &Vec<Complex64>| {
        let mut out = vec![ZERO; w * w];
        for x in 0..w {
            let p = part(x);
            for b in 0..w {
                out[x * w + (b ^ p)] = joint[x * w + b];
            }
        }
        out
    };
    joint = xor_col(&joint);
    // Q^val on |x⟩|y⟩ multiplies by C[y, x]; only x = partner(y) can be
    // nonzero, so each row's entry is read once
    let rows: Vec<(usize, Complex64)> = (0..dim).map(|y| d.entry(l, rho, y)).collect();
    for x in 0..w {
        for (y, &(col, v)) in rows.iter().enumerate() {
            if col == x {
                joint[x * w + y] *= v;
            }
        }
    }
    let mut swapped = vec![ZERO; w * w];
    for x in 0..w {
        for y in 0..w {
            swapped[y * w + x] = joint[x * w + y];
        }
    }
    joint = xor_col(&swapped);
    let out: Vec<Complex64> = (0..dim).map(|y| joint[y * w]).collect();
    let leak = (0..w)
        .flat_map(|y| (1..w).map(move |b| (y, b)))
        .map(|(y, b)| joint[y * w + b].norm_sqr())
        .sum::<f64>()
        .sqrt();
    (out, leak)
}

/// Unary rotation angles reproducing the level weights exactly:
/// `θ_k = 2 arcsin √(1 − β_{k−1}/Σ_{s≥k−1} β_s)` for `k = 1..=K`.
pub fn rotation_angles(weights: &[f64]) -> Vec<f64> {
    let k = weights.len() - 1;
    (1..=k)
        .map(|j| {
            let tail: f64 = weights[j - 1..].iter().sum();
            let p = if tail > 0.0 { 1.0 - weights[j - 1] / tail } else { 0.0 };
            2.0 * p.clamp(0.0, 1.0).sqrt().asin()
        })
        .collect()
}

/// Unitary whose first column is uniform.
fn uniform_unitary(n: usize) -> DMatrix<Complex64> {
    let s = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |a, b| Complex64::from_polar(s, 2.0 * PI * (a * b) as f64 / n as f64))
}

fn rotation(theta: f64) -> DMatrix<Complex64> {
    let (s, c) = (theta / 2.0).sin_cos();
    DMatrix::from_row_slice(2, 2, &[ONE * c, -ONE * s, ONE * s, ONE * c])
}

/// Applies `u` to the digit of radix `n` at `stride`, optionally only where
/// the binary digit at `control` is set.
fn apply_digit(state: &mut [Complex64], stride: usize, n: usize, u: &DMatrix<Complex64>, control: Option<usize>) {
    let block = stride * n;
    let mut buf = vec![ZERO; n];
    for base in (0..state.len()).step_by(block) {
        for off in 0..stride {
            let i0 = base + off;
            if let Some(cs) = control {
                if (i0 / cs) % 2 == 0 {
                    continue;
                }
            }
            for (a, slot) in buf.iter_mut().enumerate() {
                *slot = state[i0 + a * stride];
            }
            for a in 0..n {
                let mut acc = ZERO;
                for (b, &v) in buf.iter().enumerate() {
                    acc += u[(a, b)] * v;
                }
                state[i0 + a * stride] = acc;
            }
        }
    }
}

/// State-vector simulation over `|k⟩|ℓ₁..ℓ_K⟩|ρ₁..ρ_K⟩|system⟩`.
///
/// `k` is held in `K` qubits in unary; the system index varies fastest.
pub struct RegisterSim<'a, S> {
    decomp: &'a SelfInverseDecomposition<S>,
    k: usize,
    l: usize,
    mu: usize,
    dim: usize,
    angles: Vec<f64>,
    f_l: DMatrix<Complex64>,
    f_mu: DMatrix<Complex64>,
}

impl<'a, S: AlephSource> RegisterSim<'a, S> {
    pub fn new(decomp: &'a SelfInverseDecomposition<S>, plan: &SegmentPlan) -> Result<Self> {
        let meta = decomp.meta();
        let k = plan.k as usize;
        let size = (meta.l as u128)
            .checked_pow(k as u32)
            .and_then(|v| v.checked_mul((meta.mu as u128).checked_pow(k as u32)?))
            .and_then(|v| v.checked_mul(1u128 << k))
            .and_then(|v| v.checked_mul(decomp.dim() as u128));
        match size {
            Some(s) if s <= REGISTER_CAP as u128 => {}
            _ => {
                return Err(Error::RegisterTooLarge(format!(
                    "K={k}, L={}, mu={}, dim={}",
                    meta.l,
                    meta.mu,
                    decomp.dim()
                )))
            }
        }
        Ok(RegisterSim {
            decomp,
            k,
            l: meta.l as usize,
            mu: meta.mu as usize,
            dim: decomp.dim(),
            angles: rotation_angles(&plan.level_weights()),
            f_l: uniform_unitary(meta.l as usize),
            f_mu: uniform_unitary(meta.mu as usize),
        })
    }

    pub fn ancilla_dim(&self) -> usize {
        (1 << self.k) * self.l.pow(self.k as u32) * self.mu.pow(self.k as u32)
    }

    pub fn len(&self) -> usize {
        self.ancilla_dim() * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn rho_stride(&self, v: usize) -> usize {
        self.dim * self.mu.pow(v as u32 - 1)
    }

    fn ell_stride(&self, v: usize) -> usize {
        self.dim * self.mu.pow(self.k as u32) * self.l.pow(v as u32 - 1)
    }

    /// Stride of unary qubit `v` (1-based).
    fn bit_stride(&self, v: usize) -> usize {
        self.dim * self.mu.pow(self.k as u32) * self.l.pow(self.k as u32) * (1 << (v - 1))
    }

    /// The all-zero ancilla tensored with `ψ`.
    pub fn embed(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut s = vec![ZERO; self.len()];
        s[..self.dim].copy_from_slice(psi);
        s
    }

    /// Amplitudes on the all-zero ancilla block.
    pub fn project(&self, state: &[Complex64]) -> Vec<Complex64> {
        state[..self.dim].to_vec()
    }

    /// `B` (or `B†`) on the ancilla registers.
    pub fn apply_b(&self, state: &mut [Complex64], adjoint: bool) {
        let unary = |state: &mut [Complex64], dagger: bool| {
            let order: Vec<usize> = if dagger {
                (1..=self.k).rev().collect()
            } else {
                (1..=self.k).collect()
            };
            for v in order {
                let th = if dagger { -self.angles[v - 1] } else { self.angles[v - 1] };
                let control = (v > 1).then(|| self.bit_stride(v - 1));
                apply_digit(state, self.bit_stride(v), 2, &rotation(th), control);
            }
        };
        let uniform = |state: &mut [Complex64], dagger: bool| {
            let (fl, fm) = if dagger {
                (self.f_l.adjoint(), self.f_mu.adjoint())
            } else {
                (self.f_l.clone(), self.f_mu.clone())
            };
            for v in 1..=self.k {
                let c = Some(self.bit_stride(v));
                apply_digit(state, self.ell_stride(v), self.l, &fl, c);
                apply_digit(state, self.rho_stride(v), self.mu, &fm, c);
            }
        };
        if adjoint {
            uniform(state, true);
            unary(state, true);
        } else {
            unary(state, false);
            uniform(state, false);
        }
    }

    /// `select(V)`: `(−i)^k C_{ℓ₁ρ₁}⋯C_{ℓ_kρ_k}` on the system, controlled by
    /// the unary bits. Returns the largest scratch leakage seen.
    pub fn apply_select_v(&self, state: &mut [Complex64], adjoint: bool) -> f64 {
        let (k, l, mu, dim) = (self.k, self.l, self.mu, self.dim);
        let phase = if adjoint { I } else { -I };
        state
            .par_chunks_mut(dim)
            .enumerate()
            .map(|(anc, sys)| {
                let rho_part = anc % mu.pow(k as u32);
                let ell_part = (anc / mu.pow(k as u32)) % l.pow(k as u32);
                let bits = anc / (mu.pow(k as u32) * l.pow(k as u32));
                let order: Vec<usize> = if adjoint { (1..=k).collect() } else { (1..=k).rev().collect() };
                let mut leak: f64 = 0.0;
                for v in order {
                    if bits >> (v - 1) & 1 == 0 {
                        continue;
                    }
                    let lv = (ell_part / l.pow(v as u32 - 1)) % l;
                    let rv = (rho_part / mu.pow(v as u32 - 1)) % mu;
                    let (out, lk) = select_h(self.decomp, lv as u64, rv as u64, sys);
                    leak = leak.max(lk);
                    for (s, o) in sys.iter_mut().zip(out) {
                        *s = o * phase;
                    }
                }
                leak
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `W = B† select(V) B` (or its adjoint).
    pub fn apply_w(&self, state: &mut [Complex64], adjoint: bool) -> f64 {
        self.apply_b(state, false);
        let leak = self.apply_select_v(state, adjoint);
        self.apply_b(state, true);
        leak
    }

    /// `1 − 2P` with `P` the projector on the all-zero ancilla.
    pub fn reflect(&self, state: &mut [Complex64]) {
        for a in &mut state[..self.dim] {
            *a = -*a;
        }
    }

    /// `P G |0, ψ⟩` with `G = −W(1−2P)W†(1−2P)W`; also returns the leakage.
    pub fn oaa_segment(&self, psi: &[Complex64]) -> (Vec<Complex64>, f64) {
        let mut s = self.embed(psi);
        let mut leak = self.apply_w(&mut s, false);
        self.reflect(&mut s);
        leak = leak.max(self.apply_w(&mut s, true));
        self.reflect(&mut s);
        leak = leak.max(self.apply_w(&mut s, false));
        (self.project(&s).into_iter().map(|a| -a).collect(), leak)
    }

    /// `⟨0|W|0⟩` as a matrix, column by column.
    pub fn w_block(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for x in 0..self.dim {
            let mut e = vec![ZERO; self.dim];
            e[x] = ONE;
            let mut s = self.embed(&e);
            self.apply_w(&mut s, false);
            for (y, a) in self.project(&s).into_iter().enumerate() {
                m[(y, x)] = a;
            }
        }
        m
    }

    /// `B|0⟩` restricted to the ancilla, indexed as in the joint layout with
    /// the system digit dropped.
    pub fn b_state(&self) -> Vec<Complex64> {
        let mut s = vec![ZERO; self.ancilla_dim()];
        s[0] = ONE;
        let sim = RegisterSim { dim: 1, ..self.shallow() };
        sim.apply_b(&mut s, false);
        s
    }

    /// Index of the ancilla basis state `|k, ℓ, ρ⟩` (0-based `ℓ`, `ρ`;
    /// unused registers at 0) in [`Self::b_state`].
    pub fn ancilla_index(&self, level: usize, ells: &[usize], rhos: &[usize]) -> usize {
        let bits = (1usize << level) - 1;
        let mut ell = 0;
        let mut rho = 0;
        for v in (0..self.k).rev() {
            ell = ell * self.l + ells.get(v).copied().unwrap_or(0);
            rho = rho * self.mu + rhos.get(v).copied().unwrap_or(0);
        }
        (bits * self.l.pow(self.k as u32) + ell) * self.mu.pow(self.k as u32) + rho
    }

    fn shallow(&self) -> RegisterSim<'a, S> {
        RegisterSim {
            decomp: self.decomp,
            k: self.k,
            l: self.l,
            mu: self.mu,
            dim: self.dim,
            angles: self.angles.clone(),
            f_l: self.f_l.clone(),
            f_mu: self.f_mu.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(lambda_weight: f64) -> DecompositionMeta {
        DecompositionMeta {
            zeta: 0.5,
            m: 1,
            l: 2,
            mu: 1,
            gamma: 1,
            lambda_weight,
        }
    }

    #[test]
    fn single_segment_at_ln2() {
        let p = plan_segments(&meta(LN_2), 1.0, 1e-3).unwrap();
        assert_eq!(p.r, 1);
        assert!((p.x - LN_2).abs() < 1e-15);
        assert!(p.lambda > 2.0 - 2.0 * taylor_tail(p.k) && p.lambda <= 2.0);
    }

    #[test]
    fn level_weights_k2() {
        let w = level_weights(LN_2, 2);
        assert!((w[1] - 0.693_147_180_559_945).abs() < 1e-15);
        assert!((w[2] - 0.240_226_506_959_1).abs() < 1e-12);
        assert!((w.iter().sum::<f64>() - 1.933_373_687_519_046).abs() < 1e-12);
    }

    #[test]
    fn order_from_tail() {
        assert_eq!(taylor_order(1e-3, 10), 6);
        assert!(taylor_tail(6) <= 5e-5 && taylor_tail(5) > 5e-5);
    }

    #[test]
    fn zero_time_plan() {
        let p = plan_segments(&meta(3.0), 0.0, 1e-3).unwrap();
        assert_eq!((p.r, p.k), (0, 0));
        assert_eq!(p.lambda, 1.0);
    }

    #[test]
    fn epsilon_floor() {
        assert!(matches!(
            plan_segments(&meta(1.0), 1.0, 1e-11),
            Err(Error::BudgetInfeasible(_))
        ));
    }

    #[test]
    fn angles_reproduce_weights() {
        let w = [1.0, 0.6, 0.2, 0.05];
        let th = rotation_angles(&w);
        let lam: f64 = w.iter().sum();
        let mut reach = 1.0;
        for k in 0..w.len() {
            let stay = if k < th.len() { (th[k] / 2.0).cos().powi(2) } else { 1.0 };
            assert!((reach * stay - w[k] / lam).abs() < 1e-14);
            if k < th.len() {
                reach *= (th[k] / 2.0).sin().powi(2);
            }
        }
    }
}
