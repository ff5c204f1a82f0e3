//! Configuration ingestion, error budgeting, the exact-evolution oracle and
//! the end-to-end pipeline.

pub mod config;
pub mod riemann;

use crate::cimatrix::{ci_matrix, count_gamma, count_gamma_pair, doubled_aleph, enumerate_gamma, sparsity_d};
use crate::determinants::{enumerate_basis, Basis, Determinant};
use crate::error::{Error, Result};
use crate::integrals::build_table;
use crate::lcu::{evolve, select_h, EvolvePath};
use crate::orbitals::derive_bounds;
use crate::quadrature::{delta_for_grid, IntegralKind};
use crate::selfinverse::{decompose, AlephSource, SelfInverseDecomposition};
pub use config::{Grids, InitialState, Mode, Overrides, ProblemConfig};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use riemann::{GridSummary, RiemannSource};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// Largest determinant-space dimension the dense oracle accepts.
pub const DENSE_LIMIT: usize = 2048;

/// Floating-point allowance when comparing measured error with the ledger,
/// which bounds exact arithmetic only.
pub const ROUNDOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub delta: f64,
    pub zeta: f64,
    pub eps_taylor: f64,
}

/// Equal three-way split of `ε` over the Taylor, rounding and quadrature
/// layers, each accumulating linearly in `t`.
///
/// With `t = 0` the split is taken at `t = 1`.
pub fn budget_errors(epsilon: f64, t: f64, gamma: u64, gamma_pair: u64) -> Result<Budget> {
    if !(epsilon > crate::lcu::EPSILON_FLOOR && epsilon < 1.0) {
        return Err(Error::BudgetInfeasible(format!("epsilon {epsilon:e} outside (1e-10, 1)")));
    }
    if gamma == 0 || gamma_pair == 0 {
        return Err(Error::BudgetInfeasible("no Hamiltonian terms".into()));
    }
    let t = if t > 0.0 { t } else { 1.0 };
    Ok(Budget {
        delta: epsilon / (3.0 * t * gamma_pair as f64),
        zeta: epsilon / (3.0 * t * gamma as f64),
        eps_taylor: epsilon / 3.0,
    })
}

/// `e^{−iHt}ψ₀` through the eigendecomposition of the Hermitian `H`.
pub fn exact_evolve(h: &DMatrix<Complex64>, psi0: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let d = h.nrows();
    if d > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge { dim: d, limit: DENSE_LIMIT });
    }
    if psi0.len() != d {
        return Err(Error::StateLength { expected: d, got: psi0.len() });
    }
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let coeff = v.adjoint() * DVector::from_column_slice(psi0);
    let phased = DVector::from_iterator(
        d,
        coeff
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
    );
    Ok((v * phased).as_slice().to_vec())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    #[serde(rename = "N")]
    pub n: usize,
    pub eta: usize,
    pub xi: usize,
    pub xi_doubled: usize,
    pub d: u64,
    #[serde(rename = "Gamma")]
    pub gamma: u64,
    #[serde(rename = "Gamma_pair")]
    pub gamma_pair: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub mu: u64,
    pub r: u64,
    #[serde(rename = "K")]
    pub k: u32,
    pub lambda: f64,
}

/// Error bounds per approximation layer, as contributions to
/// `‖ψ_final − e^{−iHt}ψ₀‖`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorLedger {
    pub taylor: f64,
    pub rounding: f64,
    pub quadrature: f64,
    pub projection: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub two_norm_error: f64,
    pub fidelity: f64,
    pub norm_error: f64,
    /// `max |Σ pieces − [[0,H],[H,0]]|` before rounding.
    pub source_defect: f64,
    pub max_round_error: f64,
    pub oracle_mismatch: f64,
    pub oracle_leakage: f64,
    pub max_segment_deviation: f64,
    /// Largest `|Riemann sum − closed form|`; zero in exact mode.
    pub quadrature_max_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    /// Ledger within `ε` and measured error within the ledger.
    Ok,
    /// The ledger total exceeds `ε` (e.g. overridden precision).
    BudgetExceeded,
    /// Measured error above the ledger total.
    LedgerViolated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub mode: Mode,
    pub status: Status,
    pub epsilon: f64,
    pub time: f64,
    pub dims: Dims,
    pub budget: Budget,
    pub error_ledger: ErrorLedger,
    pub measured: Measured,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub quadrature: Vec<GridSummary>,
    /// Emitted by the `evolve` command only.
    #[serde(skip)]
    pub per_segment_deviation: Vec<f64>,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

/// Everything up to the Hamiltonian in the determinant basis.
pub struct Representation {
    pub config: ProblemConfig,
    pub orbitals: Vec<crate::orbitals::SpinOrbital>,
    pub basis: Basis,
    pub table: crate::integrals::IntegralTable,
    pub hamiltonian: DMatrix<Complex64>,
}

/// Validates the config and builds the closed-form Hamiltonian.
pub fn represent(config: &ProblemConfig) -> Result<Representation> {
    let orbitals = config.validate().map_err(|e| e.at("ingest"))?;
    let n = orbitals.len();
    let basis = enumerate_basis(n, config.eta).map_err(|e| e.at("ingest"))?;
    if basis.len() > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: basis.len(),
            limit: DENSE_LIMIT,
        }
        .at("representation"));
    }
    let table = build_table(&orbitals, &config.nuclei).map_err(|e| e.at("representation"))?;
    let hamiltonian = ci_matrix(&basis, &table);
    let defect = (&hamiltonian - hamiltonian.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::InvalidBasis(format!("CI matrix not Hermitian ({defect:e})")).at("representation"));
    }
    Ok(Representation {
        config: config.clone(),
        orbitals,
        basis,
        table,
        hamiltonian,
    })
}

pub fn initial_state(state: &InitialState, basis: &Basis) -> Result<Vec<Complex64>> {
    let xi = basis.len();
    let v = match state {
        InitialState::Uniform => vec![Complex64::new(1.0 / (xi as f64).sqrt(), 0.0); xi],
        InitialState::Determinant(occ) => {
            let d = Determinant::new(occ, basis.n())?;
            if d.eta() != basis.eta() {
                return Err(Error::ElectronCountMismatch {
                    expected: basis.eta(),
                    got: d.eta(),
                });
            }
            let mut v = vec![Complex64::new(0.0, 0.0); xi];
            v[basis.index_of(&d)] = Complex64::new(1.0, 0.0);
            v
        }
        InitialState::Amplitudes(a) => {
            if a.len() != xi {
                return Err(Error::StateLength { expected: xi, got: a.len() });
            }
            let v: Vec<Complex64> = a.iter().map(|p| Complex64::new(p[0], p[1])).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::Config("initial amplitudes have zero norm".into()));
            }
            v.into_iter().map(|z| z / n).collect()
        }
    };
    Ok(v)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `|+⟩ ⊗ ψ`.
pub fn double_state(psi: &[Complex64]) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    psi.iter().chain(psi).map(|a| a * s).collect()
}

/// `(ψ_L + ψ_R)/√2`.
pub fn read_out(doubled: &[Complex64]) -> Vec<Complex64> {
    let xi = doubled.len() / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..xi).map(|i| (doubled[i] + doubled[xi + i]) * s).collect()
}

/// Deterministic spot check of `select(H)` against the stored entries on a
/// spread of terms.
fn check_oracles<S: AlephSource>(d: &SelfInverseDecomposition<S>) -> (f64, f64) {
    let meta = d.meta();
    let dim = d.dim();
    let psi: Vec<Complex64> = (0..dim)
        .map(|x| Complex64::new(1.0 + x as f64, 0.5 * x as f64))
        .collect();
    let samples = 16.min(meta.l);
    let (mut mismatch, mut leak): (f64, f64) = (0.0, 0.0);
    for s in 0..samples {
        let l = s * meta.l / samples;
        let rho = s % meta.mu;
        let (out, lk) = select_h(d, l, rho, &psi);
        leak = leak.max(lk);
        let want = d.apply_term(l, rho, &psi);
        for (a, b) in out.iter().zip(&want) {
            mismatch = mismatch.max((a - b).norm());
        }
    }
    (mismatch, leak)
}

/// Runs representation, decomposition, oracle checks and evolution, each
/// compared with its oracle, and assembles the report.
pub fn run_pipeline(config: &ProblemConfig) -> Result<RunReport> {
    let mut timings = BTreeMap::new();
    let clock = Instant::now();
    let rep = represent(config)?;
    let secs = clock.elapsed().as_secs_f64();
    log::info!("representation: {secs:.3}s");
    timings.insert("representation".to_string(), secs);

    let (n, eta) = (rep.orbitals.len(), config.eta);
    let xi = rep.basis.len();
    let t = config.time;
    let gammas = enumerate_gamma(n, eta);
    let gamma = count_gamma(n, eta);
    let gamma_pair = count_gamma_pair(n, eta, config.nuclei.len());
    let mut budget = budget_errors(config.epsilon, t, gamma, gamma_pair).map_err(|e| e.at("ingest"))?;
    if let Some(d) = config.overrides.delta {
        budget.delta = d;
    }

    let clock = Instant::now();
    let mut quadrature_bound = 0.0;
    let (source, summaries): (Box<dyn AlephSource + Send>, Vec<GridSummary>) = match config.mode {
        Mode::Exact => (
            Box::new(doubled_aleph(&rep.basis, &rep.table, &gammas).map_err(|e| e.at("decomposition"))?),
            Vec::new(),
        ),
        Mode::Riemann => {
            let bounds = derive_bounds(&rep.orbitals, config.alpha_decay()).map_err(|e| e.at("quadrature"))?;
            let grids = config.overrides.grids;
            let nuclei = &config.nuclei;
            let delta = budget.delta;
            let delta_for = |kind: IntegralKind| -> Result<f64> {
                let Some(g) = grids else { return Ok(delta) };
                let (n, charge) = match kind {
                    IntegralKind::S0 => (g.s0, 0.0),
                    IntegralKind::S1 { q } => (g.s1, nuclei[q].charge),
                    IntegralKind::S2 => (g.s2, 0.0),
                };
                delta_for_grid(kind, &bounds, charge, n)
            };
            let src = RiemannSource::build(
                &rep.basis,
                &rep.orbitals,
                nuclei,
                &gammas,
                &bounds,
                &delta_for,
                config.grid_cap(),
            )
            .map_err(|e| e.at("quadrature"))?;
            quadrature_bound = src.quadrature_bound();
            let s = src.summaries.clone();
            (Box::new(src), s)
        }
    };
    let mu = source.mu();
    if config.mode == Mode::Riemann {
        // each of the Γμ rounded pieces may contribute ζ
        budget.zeta /= mu as f64;
        let secs = clock.elapsed().as_secs_f64();
        log::info!("quadrature: {secs:.3}s");
        timings.insert("quadrature".to_string(), secs);
    }
    if let Some(z) = config.overrides.zeta {
        budget.zeta = z;
    }

    let clock = Instant::now();
    let decomp = decompose(source, budget.zeta).map_err(|e| e.at("decomposition"))?;
    let meta = decomp.meta();
    let mut target = DMatrix::from_element(2 * xi, 2 * xi, Complex64::new(0.0, 0.0));
    target.view_mut((0, xi), (xi, xi)).copy_from(&rep.hamiltonian);
    target.view_mut((xi, 0), (xi, xi)).copy_from(&rep.hamiltonian);
    let source_defect = max_abs(&(decomp.exact_dense() - &target));
    let max_round_error = decomp.max_round_error();
    if config.mode == Mode::Exact && source_defect > 1e-10 {
        return Err(Error::PatternMismatch(format!("pieces miss the Hamiltonian by {source_defect:e}"))
            .at("decomposition"));
    }
    if max_round_error > meta.zeta * (1.0 + 1e-12) {
        return Err(Error::PatternMismatch(format!("rounding error {max_round_error:e} above zeta")).at("decomposition"));
    }
    let secs = clock.elapsed().as_secs_f64();
    log::info!("decomposition: {secs:.3}s");
    timings.insert("decomposition".to_string(), secs);

    let clock = Instant::now();
    let (oracle_mismatch, oracle_leakage) = check_oracles(&decomp);
    if oracle_mismatch > 1e-10 || oracle_leakage > 1e-12 {
        return Err(Error::PatternMismatch(format!(
            "select(H) mismatch {oracle_mismatch:e}, leakage {oracle_leakage:e}"
        ))
        .at("oracles"));
    }
    let secs = clock.elapsed().as_secs_f64();
    log::info!("oracles: {secs:.3}s");
    timings.insert("oracles".to_string(), secs);

    let clock = Instant::now();
    let psi0 = initial_state(&config.initial_state, &rep.basis).map_err(|e| e.at("ingest"))?;
    let out = evolve(&decomp, &double_state(&psi0), t, budget.eps_taylor, EvolvePath::Dense)
        .map_err(|e| e.at("evolution"))?;
    let psi = read_out(&out.psi);
    let exact = exact_evolve(&rep.hamiltonian, &psi0, t).map_err(|e| e.at("evolution"))?;
    let secs = clock.elapsed().as_secs_f64();
    log::info!("evolution: {secs:.3}s");
    timings.insert("evolution".to_string(), secs);

    let diff: f64 = psi.iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let overlap: Complex64 = exact.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let plan = &out.plan;
    let quadrature = t * quadrature_bound;
    let mut ledger = ErrorLedger {
        taylor: plan.taylor_budget(),
        rounding: t * meta.zeta * meta.gamma as f64 * meta.mu as f64,
        quadrature,
        projection: out.total_deviation(),
        total: 0.0,
    };
    ledger.total = ledger.taylor + ledger.rounding + ledger.quadrature + ledger.projection;
    let status = if diff > ledger.total + ROUNDOFF {
        Status::LedgerViolated
    } else if ledger.total > config.epsilon {
        Status::BudgetExceeded
    } else {
        Status::Ok
    };
    Ok(RunReport {
        schema: 1,
        mode: config.mode,
        status,
        epsilon: config.epsilon,
        time: t,
        dims: Dims {
            n,
            eta,
            xi,
            xi_doubled: 2 * xi,
            d: sparsity_d(n, eta)?,
            gamma,
            gamma_pair,
            l: meta.l,
            m: meta.m,
            mu: meta.mu,
            r: plan.r,
            k: plan.k,
            lambda: plan.lambda,
        },
        budget,
        error_ledger: ledger,
        measured: Measured {
            two_norm_error: diff,
            fidelity: overlap.norm_sqr(),
            norm_error: (1.0 - norm).abs(),
            source_defect,
            max_round_error,
            oracle_mismatch,
            oracle_leakage,
            max_segment_deviation: out.per_segment_deviation.iter().copied().fold(0.0, f64::max),
            quadrature_max_error: summaries.iter().map(|s| s.error).fold(0.0, f64::max),
        },
        quadrature: summaries,
        per_segment_deviation: out.per_segment_deviation,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_example() {
        let b = budget_errors(3e-3, 1.0, 100, 100).unwrap();
        assert!((b.delta - 1e-5).abs() < 1e-18 && (b.zeta - 1e-5).abs() < 1e-18);
        assert!((b.eps_taylor - 1e-3).abs() < 1e-18);
        let b3 = budget_errors(9e-3, 1.0, 100, 100).unwrap();
        assert!((b3.delta / b.delta - 3.0).abs() < 1e-12 && (b3.zeta / b.zeta - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_evolve_diagonal_phases() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.3, 0.0),
            Complex64::new(-1.1, 0.0),
        ]));
        let psi = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let out = exact_evolve(&h, &psi, 2.0).unwrap();
        assert!((out[0] - psi[0] * Complex64::from_polar(1.0, -0.6)).norm() < 1e-14);
        assert!((out[1] - psi[1] * Complex64::from_polar(1.0, 2.2)).norm() < 1e-14);
        assert_eq!(exact_evolve(&h, &psi, 0.0).unwrap().len(), 2);
    }
}
