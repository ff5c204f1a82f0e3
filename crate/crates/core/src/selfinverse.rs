//! Splitting 1-sparse Hermitian pieces into equally weighted Hermitian
//! involutions.
//!
//! Each piece `ℵ_{γ,ρ}` is rounded entrywise to a multiple of `2ζ`, giving
//! `ζ·C` with `C` even. `C` is split into `M` matrices with entries in
//! `{0, 2e^{iθ}}` and each of those into two matrices with entries of unit
//! modulus, so that `ℵ̃_{γ,ρ} = ζ Σ_{m,s} C_{γ,ρ,m,s}`.
//!
//! Terms are addressed by `ℓ = (γ·M + (m − 1))·2 + (s − 1)` and `ρ`. They are
//! never stored: entries are derived on demand from the source values.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A family of 1-sparse Hermitian matrices `ℵ_{γ,ρ}` on a common space.
///
/// The nonzero pattern of `ℵ_{γ,ρ}` depends on `γ` only: row `x` may be
/// nonzero only in column `partner(γ)[x]`. Patterns are involutions.
pub trait AlephSource: Sync {
    fn dim(&self) -> usize;
    fn gamma_count(&self) -> usize;
    fn mu(&self) -> u64;
    fn partner(&self, gamma: usize) -> &[u32];
    fn value(&self, gamma: usize, rho: u64, x: usize) -> Complex64;

    /// Largest rounded unit count over piece `γ`. Sources with many repeated
    /// entries may override the aggregates below.
    fn max_units(&self, gamma: usize, zeta: f64) -> u64 {
        let mut best = 0;
        for rho in 0..self.mu() {
            for x in 0..self.dim() {
                best = best.max(rounded_units(self.value(gamma, rho, x), zeta).0);
            }
        }
        best
    }

    /// `Σ_ρ` of the rounded entries in row `x` of piece `γ`.
    fn rounded_sum(&self, gamma: usize, x: usize, zeta: f64) -> Complex64 {
        (0..self.mu())
            .map(|rho| {
                let (c, phase) = rounded_units(self.value(gamma, rho, x), zeta);
                phase * (c as f64 * zeta)
            })
            .sum()
    }

    /// `Σ_ρ` of the entries in row `x` of piece `γ`.
    fn exact_sum(&self, gamma: usize, x: usize) -> Complex64 {
        (0..self.mu()).map(|rho| self.value(gamma, rho, x)).sum()
    }

    /// `max |ℵ − ℵ̃|` over piece `γ`.
    fn max_round_error(&self, gamma: usize, zeta: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for rho in 0..self.mu() {
            for x in 0..self.dim() {
                let v = self.value(gamma, rho, x);
                let (c, phase) = rounded_units(v, zeta);
                worst = worst.max((v - phase * (c as f64 * zeta)).norm());
            }
        }
        worst
    }
}

impl<T: AlephSource + ?Sized + Send> AlephSource for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn gamma_count(&self) -> usize {
        (**self).gamma_count()
    }
    fn mu(&self) -> u64 {
        (**self).mu()
    }
    fn partner(&self, gamma: usize) -> &[u32] {
        (**self).partner(gamma)
    }
    fn value(&self, gamma: usize, rho: u64, x: usize) -> Complex64 {
        (**self).value(gamma, rho, x)
    }
    fn max_units(&self, gamma: usize, zeta: f64) -> u64 {
        (**self).max_units(gamma, zeta)
    }
    fn rounded_sum(&self, gamma: usize, x: usize, zeta: f64) -> Complex64 {
        (**self).rounded_sum(gamma, x, zeta)
    }
    fn exact_sum(&self, gamma: usize, x: usize) -> Complex64 {
        (**self).exact_sum(gamma, x)
    }
    fn max_round_error(&self, gamma: usize, zeta: f64) -> f64 {
        (**self).max_round_error(gamma, zeta)
    }
}

/// An explicitly stored [`AlephSource`].
#[derive(Clone, Debug)]
pub struct AlephSet {
    dim: usize,
    mu: u64,
    partners: Vec<Vec<u32>>,
    /// `values[γ][ρ·dim + x]`.
    values: Vec<Vec<Complex64>>,
}

impl AlephSet {
    pub fn new(dim: usize, mu: u64, partners: Vec<Vec<u32>>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if partners.len() != values.len() {
            return Err(Error::PatternMismatch("pattern and value counts differ".into()));
        }
        for (p, v) in partners.iter().zip(&values) {
            if p.len() != dim || v.len() as u64 != mu * dim as u64 {
                return Err(Error::PatternMismatch("wrong term length".into()));
            }
        }
        let set = AlephSet {
            dim,
            mu,
            partners,
            values,
        };
        check_source(&set)?;
        Ok(set)
    }
}

impl AlephSource for AlephSet {
    fn dim(&self) -> usize {
        self.dim
    }
    fn gamma_count(&self) -> usize {
        self.partners.len()
    }
    fn mu(&self) -> u64 {
        self.mu
    }
    fn partner(&self, gamma: usize) -> &[u32] {
        &self.partners[gamma]
    }
    fn value(&self, gamma: usize, rho: u64, x: usize) -> Complex64 {
        self.values[gamma][rho as usize * self.dim + x]
    }
}

/// Checks the involution pattern and Hermiticity of every piece.
pub fn check_source<S: AlephSource + ?Sized>(src: &S) -> Result<()> {
    let dim = src.dim();
    (0..src.gamma_count()).into_par_iter().try_for_each(|g| {
        let p = src.partner(g);
        for x in 0..dim {
            let y = p[x] as usize;
            if y >= dim || p[y] as usize != x {
                return Err(Error::PatternMismatch(format!("term {g}: pattern is not an involution at {x}")));
            }
            for rho in 0..src.mu() {
                let (a, b) = (src.value(g, rho, x), src.value(g, rho, y));
                if a != b.conj() {
                    return Err(Error::PatternMismatch(format!("term {g}, grid {rho}: not Hermitian at {x}")));
                }
            }
        }
        Ok(())
    })
}

/// Nearest multiple of `2ζ`, real and imaginary parts independently, ties to
/// the even multiple.
pub fn round_aleph(value: Complex64, zeta: f64) -> Complex64 {
    let r = |v: f64| 2.0 * zeta * (v / (2.0 * zeta)).round_ties_even();
    Complex64::new(r(value.re), r(value.im))
}

/// Rounded entry in units of `ζ`: an even magnitude `c` and a unit phase.
/// Real values keep an exact `±1` phase.
pub fn rounded_units(value: Complex64, zeta: f64) -> (u64, Complex64) {
    if value.im == 0.0 {
        let c = 2 * (value.re.abs() / (2.0 * zeta)).round_ties_even() as u64;
        let phase = if value.re < 0.0 { -ONE } else { ONE };
        (c, phase)
    } else {
        let m = value.norm();
        (2 * (m / (2.0 * zeta)).round_ties_even() as u64, value / m)
    }
}

/// `C_m` for a real even entry `C`: `±2` while `|C| ≥ 2m`, else 0.
pub fn split_c(c: i64, m: u64) -> i64 {
    if c.unsigned_abs() >= 2 * m {
        2 * c.signum()
    } else {
        0
    }
}

/// Splits a 1-sparse Hermitian matrix with entries in `{0, 2e^{iθ}}` into two
/// with unit-modulus entries and no zero columns. Zero entries become `+1`
/// (s = 1) and `−1` (s = 2) at the parent pattern location.
pub fn remove_zeros(values: &[Complex64], partner: &[u32]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut s1 = Vec::with_capacity(values.len());
    let mut s2 = Vec::with_capacity(values.len());
    for (x, &v) in values.iter().enumerate() {
        let y = *partner
            .get(x)
            .ok_or_else(|| Error::PatternMismatch("pattern shorter than values".into()))? as usize;
        if y >= values.len() || partner[y] as usize != x {
            return Err(Error::PatternMismatch(format!("not an involution at {x}")));
        }
        if v == ZERO {
            s1.push(ONE);
            s2.push(-ONE);
        } else if ((v.norm() - 2.0).abs()) < 1e-12 {
            s1.push(v / 2.0);
            s2.push(v / 2.0);
        } else {
            return Err(Error::PatternMismatch(format!("entry {v} at {x} is not 0 or 2e^(iθ)")));
        }
    }
    Ok((s1, s2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionMeta {
    pub zeta: f64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "L")]
    pub l: u64,
    pub mu: u64,
    #[serde(rename = "Gamma")]
    pub gamma: u64,
    /// `ζ·L·μ`.
    pub lambda_weight: f64,
}

/// Label decoded from `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermLabel {
    pub gamma: usize,
    pub m: u64,
    pub s: u8,
}

pub struct SelfInverseDecomposition<S> {
    source: S,
    meta: DecompositionMeta,
}

/// Rounds every piece and fixes `M`.
pub fn decompose<S: AlephSource>(source: S, zeta: f64) -> Result<SelfInverseDecomposition<S>> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::InvalidZeta(zeta));
    }
    let max_c = (0..source.gamma_count())
        .into_par_iter()
        .map(|g| source.max_units(g, zeta))
        .max()
        .unwrap_or(0);
    let m = (max_c / 2).max(1);
    let gamma = source.gamma_count() as u64;
    let l = 2 * m * gamma;
    let mu = source.mu();
    let meta = DecompositionMeta {
        zeta,
        m,
        l,
        mu,
        gamma,
        lambda_weight: zeta * l as f64 * mu as f64,
    };
    Ok(SelfInverseDecomposition { source, meta })
}

impl<S: AlephSource> SelfInverseDecomposition<S> {
    pub fn meta(&self) -> DecompositionMeta {
        self.meta
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn label(&self, l: u64) -> TermLabel {
        let s = (l % 2) as u8 + 1;
        let rest = l / 2;
        TermLabel {
            gamma: (rest / self.meta.m) as usize,
            m: rest % self.meta.m + 1,
            s,
        }
    }

    pub fn index(&self, label: TermLabel) -> u64 {
        ((label.gamma as u64 * self.meta.m + (label.m - 1)) * 2) + (label.s as u64 - 1)
    }

    /// Column and value of the single nonzero in row `x` of `C_{ℓ,ρ}`.
    pub fn entry(&self, l: u64, rho: u64, x: usize) -> (usize, Complex64) {
        let lab = self.label(l);
        let y = self.source.partner(lab.gamma)[x] as usize;
        let (c, phase) = rounded_units(self.source.value(lab.gamma, rho, x), self.meta.zeta);
        if c >= 2 * lab.m {
            (y, phase)
        } else if lab.s == 1 {
            (y, ONE)
        } else {
            (y, -ONE)
        }
    }

    /// `C_{ℓ,ρ} ψ`.
    pub fn apply_term(&self, l: u64, rho: u64, psi: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim())
            .map(|x| {
                let (y, v) = self.entry(l, rho, x);
                v * psi[y]
            })
            .collect()
    }

    pub fn term_dense(&self, l: u64, rho: u64) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for x in 0..d {
            let (y, v) = self.entry(l, rho, x);
            m[(x, y)] = v;
        }
        m
    }

    fn accumulate<F: Fn(usize, usize) -> Complex64 + Sync>(&self, f: F) -> DMatrix<Complex64> {
        let d = self.dim();
        let rows: Vec<Vec<(usize, Complex64)>> = (0..d)
            .into_par_iter()
            .map(|x| {
                let mut row: Vec<(usize, Complex64)> = Vec::new();
                for g in 0..self.source.gamma_count() {
                    row.push((self.source.partner(g)[x] as usize, f(g, x)));
                }
                row
            })
            .collect();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for (x, row) in rows.into_iter().enumerate() {
            // sequential per-entry accumulation keeps the result independent
            // of the thread count
            for (y, v) in row {
                m[(x, y)] += v;
            }
        }
        m
    }

    /// `Σ_{γ,ρ} ℵ̃_{γ,ρ}`, assembled from the rounded entries.
    pub fn rounded_dense(&self) -> DMatrix<Complex64> {
        let z = self.meta.zeta;
        self.accumulate(|g, x| self.source.rounded_sum(g, x, z))
    }

    /// `Σ_{γ,ρ} ℵ_{γ,ρ}` before rounding.
    pub fn exact_dense(&self) -> DMatrix<Complex64> {
        self.accumulate(|g, x| self.source.exact_sum(g, x))
    }

    /// `ζ Σ_{ℓ,ρ} C_{ℓ,ρ}` summed term by term.
    pub fn reconstruct_dense(&self, max_terms: u64) -> Result<DMatrix<Complex64>> {
        let total = self.meta.l.saturating_mul(self.meta.mu);
        if total > max_terms {
            return Err(Error::RegisterTooLarge(format!("{total} terms exceed {max_terms}")));
        }
        let d = self.dim();
        let mut sum = DMatrix::from_element(d, d, ZERO);
        for l in 0..self.meta.l {
            for rho in 0..self.meta.mu {
                for x in 0..d {
                    let (y, v) = self.entry(l, rho, x);
                    sum[(x, y)] += v;
                }
            }
        }
        Ok(sum * Complex64::new(self.meta.zeta, 0.0))
    }

    /// `max |ℵ − ℵ̃|` over all entries of all pieces.
    pub fn max_round_error(&self) -> f64 {
        let z = self.meta.zeta;
        (0..self.source.gamma_count())
            .into_par_iter()
            .map(|g| self.source.max_round_error(g, z))
            .reduce(|| 0.0, f64::max)
    }
}
