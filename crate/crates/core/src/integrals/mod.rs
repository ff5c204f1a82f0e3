//! Closed-form Gaussian integrals: the reference values for h_ij and h_ijkℓ.
//!
//! Two-electron integrals use the index order
//! `h_ijkℓ = ∫∫ φ_i*(r1) φ_j*(r2) φ_ℓ(r1) φ_k(r2) / |r1 − r2|`,
//! which is the chemists' `(iℓ|jk)`. Public orbital arguments are 1-based
//! labels, as in determinants.

mod boys;
mod hermite;

pub use boys::boys;

use crate::error::{Error, Result};
use crate::orbitals::SpinOrbital;
use hermite::{HermiteE, HermiteR};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MAX_L: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    pub charge: f64,
    pub position: [f64; 3],
}

fn check_l(o: &SpinOrbital) -> Result<()> {
    let l = o.angular_momentum();
    if l > MAX_L {
        return Err(Error::UnsupportedAngularMomentum(l));
    }
    Ok(())
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Spatial one-electron integrals of two contracted orbitals.
pub mod spatial {
    use super::*;

    /// Shifts the ket powers along one axis by `dj` and weights; used to
    /// apply derivative operators as sums of plain overlaps.
    fn overlap_1d(e: &HermiteE, i: i64, j: i64, p: f64) -> f64 {
        if i < 0 || j < 0 {
            return 0.0;
        }
        e.get(i as usize, j as usize, 0) * (PI / p).sqrt()
    }

    fn for_primitives<F>(a: &SpinOrbital, b: &SpinOrbital, extra: usize, f: F) -> f64
    where
        F: Fn(&[HermiteE; 3], f64, f64, f64) -> f64,
    {
        let q = sub(a.center, b.center);
        let mut sum = 0.0;
        for pa in &a.primitives {
            for pb in &b.primitives {
                let (ea, eb) = (pa.exponent, pb.exponent);
                let e = [0, 1, 2].map(|k| {
                    HermiteE::new(
                        a.powers[k] as usize + extra,
                        b.powers[k] as usize + extra,
                        ea,
                        eb,
                        q[k],
                    )
                });
                sum += pa.coefficient * pb.coefficient * f(&e, ea, eb, ea + eb);
            }
        }
        sum
    }

    pub fn overlap(a: &SpinOrbital, b: &SpinOrbital) -> f64 {
        for_primitives(a, b, 0, |e, _, _, p| {
            (0..3)
                .map(|k| overlap_1d(&e[k], a.powers[k] as i64, b.powers[k] as i64, p))
                .product()
        })
    }

    /// `-½ ∫ a ∇² b`.
    pub fn kinetic(a: &SpinOrbital, b: &SpinOrbital) -> f64 {
        for_primitives(a, b, 2, |e, _, eb, p| {
            let s: [f64; 3] =
                [0, 1, 2].map(|k| overlap_1d(&e[k], a.powers[k] as i64, b.powers[k] as i64, p));
            let mut t = 0.0;
            for k in 0..3 {
                let (i, j) = (a.powers[k] as i64, b.powers[k] as i64);
                let jf = j as f64;
                let d2 = jf * (jf - 1.0) * overlap_1d(&e[k], i, j - 2, p)
                    - 2.0 * eb * (2.0 * jf + 1.0) * overlap_1d(&e[k], i, j, p)
                    + 4.0 * eb * eb * overlap_1d(&e[k], i, j + 2, p);
                t += d2 * s[(k + 1) % 3] * s[(k + 2) % 3];
            }
            -0.5 * t
        })
    }

    /// `½ ∫ ∇a · ∇b`.
    pub fn kinetic_gradient_form(a: &SpinOrbital, b: &SpinOrbital) -> f64 {
        for_primitives(a, b, 1, |e, ea, eb, p| {
            let s: [f64; 3] =
                [0, 1, 2].map(|k| overlap_1d(&e[k], a.powers[k] as i64, b.powers[k] as i64, p));
            let mut t = 0.0;
            for k in 0..3 {
                let (i, j) = (a.powers[k] as i64, b.powers[k] as i64);
                let (fi, fj) = (i as f64, j as f64);
                let dd = fi * fj * overlap_1d(&e[k], i - 1, j - 1, p)
                    - 2.0 * eb * fi * overlap_1d(&e[k], i - 1, j + 1, p)
                    - 2.0 * ea * fj * overlap_1d(&e[k], i + 1, j - 1, p)
                    + 4.0 * ea * eb * overlap_1d(&e[k], i + 1, j + 1, p);
                t += dd * s[(k + 1) % 3] * s[(k + 2) % 3];
            }
            0.5 * t
        })
    }

    /// `-Z ∫ a b / |r − R|`.
    pub fn nuclear(a: &SpinOrbital, b: &SpinOrbital, nucleus: &Nucleus) -> f64 {
        if nucleus.charge == 0.0 {
            return 0.0;
        }
        let q = sub(a.center, b.center);
        let lsum = (a.angular_momentum() + b.angular_momentum()) as usize;
        let mut sum = 0.0;
        for pa in &a.primitives {
            for pb in &b.primitives {
                let (ea, eb) = (pa.exponent, pb.exponent);
                let p = ea + eb;
                let pp = [0, 1, 2].map(|k| (ea * a.center[k] + eb * b.center[k]) / p);
                let e = [0, 1, 2].map(|k| {
                    HermiteE::new(a.powers[k] as usize, b.powers[k] as usize, ea, eb, q[k])
                });
                let r = HermiteR::new(lsum, p, sub(pp, nucleus.position));
                let (ax, ay, az) = (a.powers[0] as usize, a.powers[1] as usize, a.powers[2] as usize);
                let (bx, by, bz) = (b.powers[0] as usize, b.powers[1] as usize, b.powers[2] as usize);
                let mut v = 0.0;
                for t in 0..=(ax + bx) {
                    for u in 0..=(ay + by) {
                        for w in 0..=(az + bz) {
                            v += e[0].get(ax, bx, t) * e[1].get(ay, by, u) * e[2].get(az, bz, w)
                                * r.get(t, u, w);
                        }
                    }
                }
                sum += pa.coefficient * pb.coefficient * 2.0 * PI / p * v;
            }
        }
        -nucleus.charge * sum
    }

    /// Chemists' electron repulsion `(ab|cd) = ∫∫ a(1) b(1) c(2) d(2) / r12`.
    pub fn eri(a: &SpinOrbital, b: &SpinOrbital, c: &SpinOrbital, d: &SpinOrbital) -> f64 {
        let qab = sub(a.center, b.center);
        let qcd = sub(c.center, d.center);
        let la = a.powers.map(|x| x as usize);
        let lb = b.powers.map(|x| x as usize);
        let lc = c.powers.map(|x| x as usize);
        let ld = d.powers.map(|x| x as usize);
        let ltot = (a.angular_momentum()
            + b.angular_momentum()
            + c.angular_momentum()
            + d.angular_momentum()) as usize;
        let mut sum = 0.0;
        for pa in &a.primitives {
            for pb in &b.primitives {
                let p = pa.exponent + pb.exponent;
                let pp = [0, 1, 2]
                    .map(|k| (pa.exponent * a.center[k] + pb.exponent * b.center[k]) / p);
                let e1 = [0, 1, 2]
                    .map(|k| HermiteE::new(la[k], lb[k], pa.exponent, pb.exponent, qab[k]));
                let cab = pa.coefficient * pb.coefficient;
                for pc in &c.primitives {
                    for pd in &d.primitives {
                        let q = pc.exponent + pd.exponent;
                        let qq = [0, 1, 2].map(|k| {
                            (pc.exponent * c.center[k] + pd.exponent * d.center[k]) / q
                        });
                        let e2 = [0, 1, 2].map(|k| {
                            HermiteE::new(lc[k], ld[k], pc.exponent, pd.exponent, qcd[k])
                        });
                        let alpha = p * q / (p + q);
                        let r = HermiteR::new(ltot, alpha, sub(pp, qq));
                        let mut v = 0.0;
                        for t in 0..=(la[0] + lb[0]) {
                            for u in 0..=(la[1] + lb[1]) {
                                for w in 0..=(la[2] + lb[2]) {
                                    let eab = e1[0].get(la[0], lb[0], t)
                                        * e1[1].get(la[1], lb[1], u)
                                        * e1[2].get(la[2], lb[2], w);
                                    if eab == 0.0 {
                                        continue;
                                    }
                                    let mut inner = 0.0;
                                    for tt in 0..=(lc[0] + ld[0]) {
                                        for uu in 0..=(lc[1] + ld[1]) {
                                            for ww in 0..=(lc[2] + ld[2]) {
                                                let ecd = e2[0].get(lc[0], ld[0], tt)
                                                    * e2[1].get(lc[1], ld[1], uu)
                                                    * e2[2].get(lc[2], ld[2], ww);
                                                let sign = if (tt + uu + ww) % 2 == 0 {
                                                    1.0
                                                } else {
                                                    -1.0
                                                };
                                                inner += sign * ecd * r.get(t + tt, u + uu, w + ww);
                                            }
                                        }
                                    }
                                    v += eab * inner;
                                }
                            }
                        }
                        let pref = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt());
                        sum += cab * pc.coefficient * pd.coefficient * pref * v;
                    }
                }
            }
        }
        sum
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceKind {
    Kinetic,
    /// Attraction to one nucleus (0-based index into the nucleus list).
    Nuclear(usize),
    Coulomb,
}

fn orbital(basis: &[SpinOrbital], label: usize) -> Result<&SpinOrbital> {
    if label < 1 || label > basis.len() {
        return Err(Error::IndexOutOfRange {
            index: label,
            n: basis.len(),
        });
    }
    let o = &basis[label - 1];
    check_l(o)?;
    Ok(o)
}

/// Closed-form spin-orbital integral. `indices` holds two labels for the
/// one-electron kinds and four (i, j, k, ℓ) for Coulomb.
pub fn reference_integral(
    kind: ReferenceKind,
    indices: &[usize],
    basis: &[SpinOrbital],
    nuclei: &[Nucleus],
) -> Result<Complex64> {
    let need = if kind == ReferenceKind::Coulomb { 4 } else { 2 };
    if indices.len() != need {
        return Err(Error::InvalidBasis(format!(
            "{kind:?} takes {need} indices, got {}",
            indices.len()
        )));
    }
    let orbs: Vec<&SpinOrbital> = indices
        .iter()
        .map(|&i| orbital(basis, i))
        .collect::<Result<_>>()?;
    let v = match kind {
        ReferenceKind::Kinetic => {
            if orbs[0].spin != orbs[1].spin {
                0.0
            } else {
                spatial::kinetic(orbs[0], orbs[1])
            }
        }
        ReferenceKind::Nuclear(q) => {
            let nuc = nuclei.get(q).ok_or(Error::IndexOutOfRange {
                index: q,
                n: nuclei.len(),
            })?;
            if orbs[0].spin != orbs[1].spin {
                0.0
            } else {
                spatial::nuclear(orbs[0], orbs[1], nuc)
            }
        }
        ReferenceKind::Coulomb => {
            let (i, j, k, l) = (orbs[0], orbs[1], orbs[2], orbs[3]);
            if i.spin != l.spin || j.spin != k.spin {
                0.0
            } else {
                spatial::eri(i, l, j, k)
            }
        }
    };
    Ok(Complex64::new(v, 0.0))
}

pub fn kinetic_gradient_form(i: usize, j: usize, basis: &[SpinOrbital]) -> Result<Complex64> {
    let (a, b) = (orbital(basis, i)?, orbital(basis, j)?);
    let v = if a.spin != b.spin {
        0.0
    } else {
        spatial::kinetic_gradient_form(a, b)
    };
    Ok(Complex64::new(v, 0.0))
}

/// One- and two-electron integrals over a spin-orbital basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralTable {
    n: usize,
    h1: Vec<Complex64>,
    h2: Vec<Complex64>,
    pub nuclei: Vec<Nucleus>,
}

impl IntegralTable {
    /// Builds a table from explicit arrays (row-major, 0-based internally).
    pub fn from_arrays(n: usize, h1: Vec<Complex64>, h2: Vec<Complex64>, nuclei: Vec<Nucleus>) -> Self {
        assert_eq!(h1.len(), n * n);
        assert_eq!(h2.len(), n * n * n * n);
        IntegralTable { n, h1, h2, nuclei }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `h_ij` for 1-based labels.
    #[inline]
    pub fn h1(&self, i: usize, j: usize) -> Complex64 {
        self.h1[(i - 1) * self.n + (j - 1)]
    }

    /// `h_ijkℓ` for 1-based labels.
    #[inline]
    pub fn h2(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        let n = self.n;
        self.h2[(((i - 1) * n + (j - 1)) * n + (k - 1)) * n + (l - 1)]
    }

    /// Physicists' `⟨ij|kℓ⟩ = ∫∫ φ_i*(1) φ_j*(2) φ_k(1) φ_ℓ(2) / r12`.
    #[inline]
    pub fn phys(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.h2(i, j, l, k)
    }

    /// Largest deviation from `h_ij = conj(h_ji)` and `h_ijkℓ = h_jiℓk`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 1..=n {
            for j in 1..=n {
                worst = worst.max((self.h1(i, j) - self.h1(j, i).conj()).norm());
                for k in 1..=n {
                    for l in 1..=n {
                        worst = worst.max((self.h2(i, j, k, l) - self.h2(j, i, l, k)).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Builds the full spin-orbital table from closed-form integrals.
pub fn build_table(basis: &[SpinOrbital], nuclei: &[Nucleus]) -> Result<IntegralTable> {
    for o in basis {
        check_l(o)?;
    }
    let n = basis.len();
    let overlap_defect = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| basis[i].spin == basis[j].spin)
        .map(|(i, j)| {
            let s = spatial::overlap(&basis[i], &basis[j]);
            (s - if i == j { 1.0 } else { 0.0 }).abs()
        })
        .fold(0.0, f64::max);
    if overlap_defect > 1e-6 {
        log::warn!(
            "basis overlap deviates from identity by {overlap_defect:.3e}; treating orbitals as orthonormal"
        );
    }
    let h1: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (a, b) = (&basis[ij / n], &basis[ij % n]);
            if a.spin != b.spin {
                return Complex64::new(0.0, 0.0);
            }
            let v = spatial::kinetic(a, b)
                + nuclei.iter().map(|q| spatial::nuclear(a, b, q)).sum::<f64>();
            Complex64::new(v, 0.0)
        })
        .collect();
    // spatial (ab|cd), computed once per 8-fold symmetry class
    let chem: Vec<f64> = (0..n * n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (a, b, c, d) = (idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n);
            // canonical representative under the 8-fold real symmetry
            let (p, q) = (a.max(b) * n + a.min(b), c.max(d) * n + c.min(d));
            if (a, b) != (a.max(b), a.min(b)) || (c, d) != (c.max(d), c.min(d)) || p < q {
                return f64::NAN;
            }
            spatial::eri(&basis[a], &basis[b], &basis[c], &basis[d])
        })
        .collect();
    let chem_at = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        let (a, b) = (a.max(b), a.min(b));
        let (c, d) = (c.max(d), c.min(d));
        let (p, q) = (a * n + b, c * n + d);
        let ((a, b), (c, d)) = if p >= q { ((a, b), (c, d)) } else { ((c, d), (a, b)) };
        chem[((a * n + b) * n + c) * n + d]
    };
    let mut h2 = vec![Complex64::new(0.0, 0.0); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if basis[i].spin == basis[l].spin && basis[j].spin == basis[k].spin {
                        h2[((i * n + j) * n + k) * n + l] = Complex64::new(chem_at(i, l, j, k), 0.0);
                    }
                }
            }
        }
    }
    Ok(IntegralTable {
        n,
        h1,
        h2,
        nuclei: nuclei.to_vec(),
    })
}
