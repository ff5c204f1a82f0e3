//! CI matrix elements and their split into colored 1-sparse pieces.
//!
//! Matrix elements follow the Slater–Condon rules written with physicists'
//! integrals `⟨ij|kℓ⟩` (see [`IntegralTable::phys`]). Each piece `H_γ` carries
//! exactly one integral combination per nonzero entry. The pieces sum to the
//! full matrix.

use crate::coloring::{all_moves, apply_color, ColorTuple, Side};
use crate::determinants::{align_and_diff, binomial, Basis, Determinant};
use crate::error::{Error, Result};
use crate::integrals::IntegralTable;
use crate::selfinverse::AlephSet;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A colored term: the color plus the sum-term selectors.
///
/// * diagonal color: `1 ≤ i ≤ j ≤ η`; `i = j` picks `h_{χ_i χ_i}`, `i < j`
///   the antisymmetrized pair;
/// * single-difference color: `i ∈ 1..=η`, `j = 0`; `i < η` picks the
///   two-electron term with the `i`-th shared orbital, `i = η` the one-electron
///   term;
/// * double-difference color: `i = j = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GammaIndex {
    pub color: ColorTuple,
    pub i: u16,
    pub j: u16,
}

impl GammaIndex {
    pub fn validate(&self, n: usize, eta: usize) -> Result<()> {
        self.color
            .validate(n, eta)
            .map_err(|e| Error::MalformedGamma(e.to_string()))?;
        let (i, j) = (self.i as usize, self.j as usize);
        let ok = if self.color.is_diagonal() {
            1 <= i && i <= j && j <= eta
        } else if self.color.is_single() {
            1 <= i && i <= eta && j == 0
        } else {
            i == 0 && j == 0
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedGamma(format!("{self:?}")))
        }
    }

    /// Whether the entry is a one-electron integral (otherwise it is an
    /// antisymmetrized pair of two-electron integrals).
    pub fn is_one_electron(&self, eta: usize) -> bool {
        self.color.is_diagonal() && self.i == self.j
            || self.color.is_single() && self.i as usize == eta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneSparseEntry {
    pub alpha: Determinant,
    pub beta: Determinant,
    pub value: Complex64,
}

/// `C(η,2)C(N−η,2) + η(N−η) + 1`: the maximum number of nonzeros in a row.
pub fn sparsity_d(n: usize, eta: usize) -> Result<u64> {
    if eta < 1 || eta > n {
        return Err(Error::InvalidCounts { n, eta });
    }
    Ok(binomial(eta, 2) * binomial(n - eta, 2) + (eta * (n - eta)) as u64 + 1)
}

/// `⟨ab|cd⟩ − ⟨ab|dc⟩`.
#[inline]
fn anti(t: &IntegralTable, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
    t.phys(a, b, c, d) - t.phys(a, b, d, c)
}

/// Slater–Condon matrix element `⟨α|H|β⟩`.
pub fn ci_entry(alpha: &Determinant, beta: &Determinant, table: &IntegralTable) -> Complex64 {
    let diff = align_and_diff(alpha, beta);
    let sign = diff.sign as f64;
    match diff.count {
        0 => {
            let occ = alpha.occ();
            let mut v = ZERO;
            for (x, &a) in occ.iter().enumerate() {
                let a = a as usize;
                v += table.h1(a, a);
                for &b in &occ[x + 1..] {
                    v += anti(table, a, b as usize, a, b as usize);
                }
            }
            v
        }
        1 => {
            let k = alpha.at(diff.positions_left[0]);
            let l = beta.at(diff.positions_right[0]);
            let mut v = table.h1(k, l);
            for &c in &diff.common {
                v += anti(table, k, c, l, c);
            }
            v * sign
        }
        2 => {
            let (i, j) = (alpha.at(diff.positions_left[0]), alpha.at(diff.positions_left[1]));
            let (k, l) = (beta.at(diff.positions_right[0]), beta.at(diff.positions_right[1]));
            anti(table, i, j, k, l) * sign
        }
        _ => ZERO,
    }
}

/// Dense CI matrix over `basis`, rows in parallel.
pub fn ci_matrix(basis: &Basis, table: &IntegralTable) -> DMatrix<Complex64> {
    let xi = basis.len();
    let rows: Vec<Vec<Complex64>> = basis
        .dets()
        .par_iter()
        .map(|a| basis.dets().iter().map(|b| ci_entry(a, b, table)).collect())
        .collect();
    DMatrix::from_fn(xi, xi, |r, c| rows[r][c])
}

/// Partner and value of `α` (a left node) under `γ`; `None` is EMPTY.
pub fn gamma_entry(
    gamma: &GammaIndex,
    alpha: &Determinant,
    table: &IntegralTable,
) -> Option<OneSparseEntry> {
    let beta = apply_color(&gamma.color, alpha, Side::Left)?;
    let value = gamma_value(gamma, alpha, &beta, table);
    Some(OneSparseEntry {
        alpha: alpha.clone(),
        beta,
        value,
    })
}

/// `H_γ` as a dense `ξ × ξ` matrix.
pub fn gamma_matrix(gamma: &GammaIndex, basis: &Basis, table: &IntegralTable) -> DMatrix<Complex64> {
    let xi = basis.len();
    let mut m = DMatrix::from_element(xi, xi, ZERO);
    for (r, a) in basis.dets().iter().enumerate() {
        if let Some(e) = gamma_entry(gamma, a, table) {
            m[(r, basis.index_of(&e.beta))] += e.value;
        }
    }
    m
}

/// The integrals one `H_γ` entry combines, in the table layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Recipe {
    /// `sign · h_kℓ`.
    One { k: usize, l: usize, sign: f64 },
    /// `sign · (⟨ab|cd⟩ − ⟨ab|dc⟩) = sign · (h_abdc − h_abcd)`.
    Anti {
        a: usize,
        b: usize,
        c: usize,
        d: usize,
        sign: f64,
    },
}

impl Recipe {
    pub fn eval(&self, table: &IntegralTable) -> Complex64 {
        match *self {
            Recipe::One { k, l, sign } => table.h1(k, l) * sign,
            Recipe::Anti { a, b, c, d, sign } => anti(table, a, b, c, d) * sign,
        }
    }

    /// Number of closed-form integrals the entry draws on, counting one
    /// nuclear-attraction integral per nucleus.
    pub fn integral_count(&self, nuclei: usize) -> u64 {
        match self {
            Recipe::One { .. } => 1 + nuclei as u64,
            Recipe::Anti { .. } => 2,
        }
    }
}

/// The single integral combination `γ` assigns to the pair `(α, β)`.
pub fn gamma_recipe(gamma: &GammaIndex, alpha: &Determinant, beta: &Determinant) -> Recipe {
    let (i, j) = (gamma.i as usize, gamma.j as usize);
    if gamma.color.is_diagonal() {
        let (a, b) = (alpha.at(i), alpha.at(j));
        return if i == j {
            Recipe::One { k: a, l: a, sign: 1.0 }
        } else {
            Recipe::Anti {
                a,
                b,
                c: a,
                d: b,
                sign: 1.0,
            }
        };
    }
    let diff = align_and_diff(alpha, beta);
    let sign = diff.sign as f64;
    if gamma.color.is_single() {
        let k = alpha.at(diff.positions_left[0]);
        let l = beta.at(diff.positions_right[0]);
        return if i == alpha.eta() {
            Recipe::One { k, l, sign }
        } else {
            let c = diff.common[i - 1];
            Recipe::Anti {
                a: k,
                b: c,
                c: l,
                d: c,
                sign,
            }
        };
    }
    Recipe::Anti {
        a: alpha.at(diff.positions_left[0]),
        b: alpha.at(diff.positions_left[1]),
        c: beta.at(diff.positions_right[0]),
        d: beta.at(diff.positions_right[1]),
        sign,
    }
}

pub fn gamma_value(
    gamma: &GammaIndex,
    alpha: &Determinant,
    beta: &Determinant,
    table: &IntegralTable,
) -> Complex64 {
    gamma_recipe(gamma, alpha, beta).eval(table)
}

/// `Γ_pair`: the number of integrals behind each term's entries, summed over
/// terms (one-electron terms count their kinetic and nuclear parts).
pub fn count_gamma_pair(n: usize, eta: usize, nuclei: usize) -> u64 {
    enumerate_gamma(n, eta)
        .iter()
        .map(|g| if g.is_one_electron(eta) { 1 + nuclei as u64 } else { 2 })
        .sum()
}

/// The number of admissible `GammaIndex` values.
pub fn count_gamma(n: usize, eta: usize) -> u64 {
    let (n, eta) = (n as u64, eta as u64);
    let moves = 8 * eta * n.saturating_sub(1);
    eta * (eta + 1) / 2 + moves * eta + moves * moves
}

pub fn enumerate_gamma(n: usize, eta: usize) -> Vec<GammaIndex> {
    let moves = all_moves(n, eta);
    let mut out = Vec::with_capacity(count_gamma(n, eta) as usize);
    for i in 1..=eta as u16 {
        for j in i..=eta as u16 {
            out.push(GammaIndex {
                color: ColorTuple::diagonal(),
                i,
                j,
            });
        }
    }
    for &m in &moves {
        for i in 1..=eta as u16 {
            out.push(GammaIndex {
                color: ColorTuple::single(m),
                i,
                j: 0,
            });
        }
    }
    for &f in &moves {
        for &s in &moves {
            out.push(GammaIndex {
                color: ColorTuple::double(f, s),
                i: 0,
                j: 0,
            });
        }
    }
    out
}

/// Bipartite doubling of the pieces: node `side·ξ + index`. For a left node
/// `α` with partner `β`, `(L, α) ↔ (R, β)` carries `H_γ[α, β]` and its
/// conjugate; nodes without a partner map to themselves with value 0. The
/// pieces sum to `[[0, H], [H, 0]]`.
pub fn doubled_aleph(basis: &Basis, table: &IntegralTable, gammas: &[GammaIndex]) -> Result<AlephSet> {
    let xi = basis.len();
    let dim = 2 * xi;
    let (partners, values): (Vec<Vec<u32>>, Vec<Vec<Complex64>>) = gammas
        .par_iter()
        .map(|g| {
            let mut p: Vec<u32> = (0..dim as u32).collect();
            let mut v = vec![ZERO; dim];
            for (a, alpha) in basis.dets().iter().enumerate() {
                if let Some(e) = gamma_entry(g, alpha, table) {
                    let b = xi + basis.index_of(&e.beta);
                    p[a] = b as u32;
                    p[b] = a as u32;
                    v[a] = e.value;
                    v[b] = e.value.conj();
                }
            }
            (p, v)
        })
        .unzip();
    AlephSet::new(dim, 1, partners, values)
}

/// How many entries each structural family contributes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaCensus {
    pub gamma_total: u64,
    pub diagonal_terms: u64,
    pub single_terms: u64,
    pub double_terms: u64,
    /// Terms with at least one non-EMPTY row.
    pub active_terms: u64,
    /// Total non-EMPTY (γ, α) entries.
    pub entries: u64,
}

pub fn census(basis: &Basis) -> GammaCensus {
    let gammas = enumerate_gamma(basis.n(), basis.eta());
    let per: Vec<(u8, u64)> = gammas
        .par_iter()
        .map(|g| {
            let kind = if g.color.is_diagonal() {
                0
            } else if g.color.is_single() {
                1
            } else {
                2
            };
            let hits = basis
                .dets()
                .iter()
                .filter(|a| apply_color(&g.color, a, Side::Left).is_some())
                .count() as u64;
            (kind, hits)
        })
        .collect();
    let mut c = GammaCensus {
        gamma_total: gammas.len() as u64,
        ..Default::default()
    };
    for (kind, hits) in per {
        match kind {
            0 => c.diagonal_terms += 1,
            1 => c.single_terms += 1,
            _ => c.double_terms += 1,
        }
        if hits > 0 {
            c.active_terms += 1;
        }
        c.entries += hits;
    }
    c
}
