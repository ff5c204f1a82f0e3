//! Doubled 1-sparse pieces whose entries are single Riemann-sum terms.
//!
//! Entry `ρ` of a piece combines the `ρ`-th midpoint term of each integral
//! the entry draws on (zero past an integral's own grid). Grids are shared by
//! all spin-orbital integrals over the same spatial functions, and entries
//! with the same integral combination share their aggregates.

use crate::cimatrix::{gamma_entry, gamma_recipe, GammaIndex, Recipe};
use crate::determinants::Basis;
use crate::error::{Error, Result};
use crate::integrals::{reference_integral, IntegralTable, Nucleus, ReferenceKind};
use crate::orbitals::{BasisBounds, SpinOrbital};
use crate::quadrature::{plan_quadrature, riemann_terms, sum_terms, IntegralKind, QuadratureSpec};
use crate::selfinverse::{rounded_units, AlephSource};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

/// Largest number of stored grid terms.
pub const TERM_CAP: u64 = 50_000_000;

const NONE: u32 = u32::MAX;

/// Summary of one planned integral grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSummary {
    pub kind: IntegralKind,
    pub orbitals: Vec<usize>,
    pub grid_n: u64,
    pub mu: u64,
    pub delta: f64,
    pub riemann_sum: f64,
    pub closed_form: f64,
    pub error: f64,
    pub max_term: f64,
    pub term_bound: f64,
}

#[derive(Clone, Copy, Debug)]
struct Stats {
    max_units: u64,
    rounded: f64,
    exact: f64,
    max_err: f64,
}

pub struct RiemannSource {
    dim: usize,
    mu: u64,
    partners: Vec<Vec<u32>>,
    /// Combination index per (piece, node).
    combo_at: Vec<Vec<u32>>,
    combos: Vec<Vec<(u32, f64)>>,
    grids: Vec<Vec<f64>>,
    pub summaries: Vec<GridSummary>,
    stats: Mutex<Option<(f64, std::sync::Arc<Vec<Stats>>)>>,
}

/// Index of the first orbital with the same spatial part.
fn spatial_classes(basis: &[SpinOrbital]) -> Vec<usize> {
    (0..basis.len())
        .map(|i| {
            (0..=i)
                .find(|&j| {
                    let (a, b) = (&basis[i], &basis[j]);
                    a.center == b.center && a.primitives == b.primitives && a.powers == b.powers
                })
                .unwrap()
        })
        .collect()
}

impl RiemannSource {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        basis: &Basis,
        orbitals: &[SpinOrbital],
        nuclei: &[Nucleus],
        gammas: &[GammaIndex],
        bounds: &BasisBounds,
        delta: &dyn Fn(IntegralKind) -> Result<f64>,
        grid_cap: u64,
    ) -> Result<Self> {
        let xi = basis.len();
        let dim = 2 * xi;
        let class = spatial_classes(orbitals);
        let spin = |i: usize| orbitals[i - 1].spin;

        // integrals needed, keyed by kind and spatial classes
        let mut grid_key: HashMap<(IntegralKind, Vec<usize>), u32> = HashMap::new();
        let mut grid_labels: Vec<(IntegralKind, Vec<usize>)> = Vec::new();
        let mut intern = |kind: IntegralKind, labels: Vec<usize>| -> u32 {
            let key = (kind, labels.iter().map(|&o| class[o - 1]).collect::<Vec<_>>());
            *grid_key.entry(key).or_insert_with(|| {
                grid_labels.push((kind, labels));
                (grid_labels.len() - 1) as u32
            })
        };
        let mut combo_key: HashMap<Vec<(u32, i8)>, u32> = HashMap::new();
        let mut combos: Vec<Vec<(u32, f64)>> = Vec::new();
        let mut partners = Vec::with_capacity(gammas.len());
        let mut combo_at = Vec::with_capacity(gammas.len());
        // a dummy table: only the pattern and recipe are needed here
        let empty = IntegralTable::from_arrays(
            orbitals.len(),
            vec![Complex64::new(0.0, 0.0); orbitals.len().pow(2)],
            vec![Complex64::new(0.0, 0.0); orbitals.len().pow(4)],
            vec![],
        );
        for g in gammas {
            let mut p: Vec<u32> = (0..dim as u32).collect();
            let mut c = vec![NONE; dim];
            for (a, alpha) in basis.dets().iter().enumerate() {
                let Some(e) = gamma_entry(g, alpha, &empty) else {
                    continue;
                };
                let b = xi + basis.index_of(&e.beta);
                p[a] = b as u32;
                p[b] = a as u32;
                let mut parts: Vec<(u32, i8)> = Vec::new();
                match gamma_recipe(g, alpha, &e.beta) {
                    Recipe::One { k, l, sign } => {
                        if spin(k) == spin(l) {
                            let s = sign as i8;
                            parts.push((intern(IntegralKind::S0, vec![k, l]), s));
                            for q in 0..nuclei.len() {
                                parts.push((intern(IntegralKind::S1 { q }, vec![k, l]), s));
                            }
                        }
                    }
                    Recipe::Anti { a: i, b: j, c: k, d: l, sign } => {
                        // ⟨ij|kl⟩ = h_ijlk needs spins (i,k) and (j,l) equal
                        let s = sign as i8;
                        if spin(i) == spin(k) && spin(j) == spin(l) {
                            parts.push((intern(IntegralKind::S2, vec![i, j, l, k]), s));
                        }
                        if spin(i) == spin(l) && spin(j) == spin(k) {
                            parts.push((intern(IntegralKind::S2, vec![i, j, k, l]), -s));
                        }
                    }
                }
                let id = *combo_key.entry(parts.clone()).or_insert_with(|| {
                    combos.push(parts.iter().map(|&(g, s)| (g, s as f64)).collect());
                    (combos.len() - 1) as u32
                });
                c[a] = id;
                c[b] = id;
            }
            partners.push(p);
            combo_at.push(c);
        }

        let specs: Vec<QuadratureSpec> = grid_labels
            .iter()
            .map(|(kind, labels)| plan_quadrature(*kind, labels, delta(*kind)?, bounds, orbitals, nuclei, grid_cap))
            .collect::<Result<_>>()?;
        let total: u64 = specs.iter().map(|s| s.mu).sum();
        if total > TERM_CAP {
            return Err(Error::TooManyTerms {
                terms: total,
                limit: TERM_CAP,
            });
        }
        let computed: Vec<(Vec<f64>, GridSummary)> = specs
            .iter()
            .zip(&grid_labels)
            .map(|(spec, (kind, labels))| {
                let terms = riemann_terms(spec, orbitals, nuclei);
                let sum = sum_terms(&terms).re;
                let rk = match kind {
                    IntegralKind::S0 => ReferenceKind::Kinetic,
                    IntegralKind::S1 { q } => ReferenceKind::Nuclear(*q),
                    IntegralKind::S2 => ReferenceKind::Coulomb,
                };
                let exact = reference_integral(rk, labels, orbitals, nuclei)?.re;
                let values: Vec<f64> = terms.iter().map(|t| t.value.re).collect();
                let max_term = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let summary = GridSummary {
                    kind: *kind,
                    orbitals: labels.clone(),
                    grid_n: spec.grid_n,
                    mu: spec.mu,
                    delta: spec.delta,
                    riemann_sum: sum,
                    closed_form: exact,
                    error: (sum - exact).abs(),
                    max_term,
                    term_bound: spec.term_bound,
                };
                Ok((values, summary))
            })
            .collect::<Result<_>>()?;
        let mu = specs.iter().map(|s| s.mu).max().unwrap_or(1).max(1);
        let (grids, summaries) = computed.into_iter().unzip();
        Ok(RiemannSource {
            dim,
            mu,
            partners,
            combo_at,
            combos,
            grids,
            summaries,
            stats: Mutex::new(None),
        })
    }

    fn combo_value(&self, combo: u32, rho: u64) -> f64 {
        if combo == NONE {
            return 0.0;
        }
        self.combos[combo as usize]
            .iter()
            .map(|&(g, s)| s * self.grids[g as usize].get(rho as usize).copied().unwrap_or(0.0))
            .sum()
    }

    fn stats(&self, zeta: f64) -> std::sync::Arc<Vec<Stats>> {
        let mut guard = self.stats.lock().unwrap();
        if let Some((z, s)) = guard.as_ref() {
            if *z == zeta {
                return s.clone();
            }
        }
        let s: Vec<Stats> = (0..self.combos.len() as u32)
            .into_par_iter()
            .map(|c| {
                let mut st = Stats {
                    max_units: 0,
                    rounded: 0.0,
                    exact: 0.0,
                    max_err: 0.0,
                };
                let (mut rs, mut es) = (Vec::new(), Vec::new());
                for rho in 0..self.mu {
                    let v = self.combo_value(c, rho);
                    let (u, phase) = rounded_units(Complex64::new(v, 0.0), zeta);
                    let r = phase.re * u as f64 * zeta;
                    st.max_units = st.max_units.max(u);
                    st.max_err = st.max_err.max((v - r).abs());
                    rs.push(r);
                    es.push(v);
                }
                st.rounded = crate::quadrature::compensated_sum(rs);
                st.exact = crate::quadrature::compensated_sum(es);
                st
            })
            .collect();
        let s = std::sync::Arc::new(s);
        *guard = Some((zeta, s.clone()));
        s
    }

    /// Largest `|Riemann sum − closed form|` over the planned integrals.
    pub fn max_integral_error(&self) -> f64 {
        self.summaries.iter().map(|s| s.error).fold(0.0, f64::max)
    }

    /// `Σ_γ max_x Σ δ` over the integrals behind each entry: a bound on
    /// `‖H_Riemann − H‖` since each piece is 1-sparse.
    pub fn quadrature_bound(&self) -> f64 {
        let combo_delta: Vec<f64> = self
            .combos
            .iter()
            .map(|c| c.iter().map(|&(g, _)| self.summaries[g as usize].delta).sum())
            .collect();
        self.combo_at
            .iter()
            .map(|row| {
                row.iter()
                    .filter(|&&c| c != NONE)
                    .map(|&c| combo_delta[c as usize])
                    .fold(0.0, f64::max)
            })
            .sum()
    }

    pub fn max_term_excess(&self) -> f64 {
        self.summaries
            .iter()
            .map(|s| s.max_term - s.term_bound)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl AlephSource for RiemannSource {
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
        Complex64::new(self.combo_value(self.combo_at[gamma][x], rho), 0.0)
    }
    fn max_units(&self, gamma: usize, zeta: f64) -> u64 {
        let st = self.stats(zeta);
        self.combo_at[gamma]
            .iter()
            .filter(|&&c| c != NONE)
            .map(|&c| st[c as usize].max_units)
            .max()
            .unwrap_or(0)
    }
    fn rounded_sum(&self, gamma: usize, x: usize, zeta: f64) -> Complex64 {
        let c = self.combo_at[gamma][x];
        if c == NONE {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(self.stats(zeta)[c as usize].rounded, 0.0)
    }
    fn exact_sum(&self, gamma: usize, x: usize) -> Complex64 {
        let c = self.combo_at[gamma][x];
        if c == NONE {
            return Complex64::new(0.0, 0.0);
        }
        // the exact sum does not depend on ζ; any cached pass has it
        let st = self.stats.lock().unwrap().as_ref().map(|(_, s)| s.clone());
        match st {
            Some(s) => Complex64::new(s[c as usize].exact, 0.0),
            None => Complex64::new(
                crate::quadrature::compensated_sum((0..self.mu).map(|rho| self.combo_value(c, rho))),
                0.0,
            ),
        }
    }
    fn max_round_error(&self, gamma: usize, zeta: f64) -> f64 {
        let st = self.stats(zeta);
        self.combo_at[gamma]
            .iter()
            .filter(|&&c| c != NONE)
            .map(|&c| st[c as usize].max_err)
            .fold(0.0, f64::max)
    }
}
