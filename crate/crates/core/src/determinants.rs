//! Slater determinants as sorted occupied-orbital lists.
//!
//! Orbital labels are 1-based. Every determinant keeps its canonical ascending
//! list together with an occupation mask, so set differences are bit operations.

use crate::error::{Error, Result};

pub const MAX_ORBITALS: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant {
    occ: Vec<u16>,
    mask: u128,
    n: u16,
}

impl Determinant {
    /// Builds a determinant from an already ascending list.
    pub fn new(occ: &[usize], n: usize) -> Result<Self> {
        let (det, sign) = make_determinant(occ, n)?;
        if sign != 1 || det.occ.iter().zip(occ).any(|(&a, &b)| a as usize != b) {
            return Err(Error::InvalidBasis(format!("{occ:?} is not ascending")));
        }
        Ok(det)
    }

    pub fn occ(&self) -> &[u16] {
        &self.occ
    }

    pub fn eta(&self) -> usize {
        self.occ.len()
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn contains(&self, orbital: usize) -> bool {
        orbital >= 1 && orbital <= self.n() && self.mask & (1u128 << (orbital - 1)) != 0
    }

    /// Orbital at 1-based position `pos`, with the sentinels 0 at position 0
    /// and N+1 at position η+1.
    pub fn at(&self, pos: usize) -> usize {
        if pos == 0 {
            0
        } else if pos > self.eta() {
            self.n() + 1
        } else {
            self.occ[pos - 1] as usize
        }
    }

    /// 1-based position of `orbital`, if occupied.
    pub fn position_of(&self, orbital: usize) -> Option<usize> {
        self.occ
            .iter()
            .position(|&o| o as usize == orbital)
            .map(|p| p + 1)
    }

    /// Replaces the orbital at position `pos` with `orbital` and re-sorts.
    /// Returns the new determinant and the position the new orbital lands at,
    /// or `None` if `orbital` is out of range or already occupied elsewhere.
    pub fn replace(&self, pos: usize, orbital: i64) -> Option<(Determinant, usize)> {
        if pos == 0 || pos > self.eta() || orbital < 1 || orbital > self.n() as i64 {
            return None;
        }
        let orbital = orbital as usize;
        let old = self.at(pos);
        if orbital != old && self.contains(orbital) {
            return None;
        }
        let mut occ: Vec<u16> = self.occ.clone();
        occ[pos - 1] = orbital as u16;
        occ.sort_unstable();
        let new_pos = occ.iter().position(|&o| o as usize == orbital).unwrap() + 1;
        let mask = (self.mask & !(1u128 << (old - 1))) | (1u128 << (orbital - 1));
        Some((Determinant { occ, mask, n: self.n }, new_pos))
    }

    /// Orbitals in `self` but not in `other`, ascending.
    pub fn minus(&self, other: &Determinant) -> Vec<usize> {
        mask_to_list(self.mask & !other.mask)
    }
}

fn mask_to_list(mut m: u128) -> Vec<usize> {
    let mut out = Vec::new();
    while m != 0 {
        let b = m.trailing_zeros() as usize;
        out.push(b + 1);
        m &= m - 1;
    }
    out
}

/// Sorts `orbitals` into a determinant and returns the parity of the sort.
pub fn make_determinant(orbitals: &[usize], n: usize) -> Result<(Determinant, i8)> {
    if n > MAX_ORBITALS {
        return Err(Error::BasisTooLarge(n));
    }
    if orbitals.is_empty() || orbitals.len() > n {
        return Err(Error::InvalidCounts {
            n,
            eta: orbitals.len(),
        });
    }
    let mut mask = 0u128;
    for &o in orbitals {
        if o < 1 || o > n {
            return Err(Error::IndexOutOfRange { index: o, n });
        }
        let bit = 1u128 << (o - 1);
        if mask & bit != 0 {
            return Err(Error::DuplicateOrbital(o));
        }
        mask |= bit;
    }
    // parity from the inversion count
    let mut inversions = 0usize;
    for i in 0..orbitals.len() {
        for j in i + 1..orbitals.len() {
            if orbitals[i] > orbitals[j] {
                inversions += 1;
            }
        }
    }
    let occ: Vec<u16> = mask_to_list(mask).into_iter().map(|o| o as u16).collect();
    let sign = if inversions % 2 == 0 { 1 } else { -1 };
    Ok((Determinant { occ, mask, n: n as u16 }, sign))
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// The lexicographically ordered CI basis of all η-electron determinants.
#[derive(Clone, Debug)]
pub struct Basis {
    n: usize,
    eta: usize,
    dets: Vec<Determinant>,
}

pub fn enumerate_basis(n: usize, eta: usize) -> Result<Basis> {
    if eta < 1 || eta > n {
        return Err(Error::InvalidCounts { n, eta });
    }
    if n > MAX_ORBITALS {
        return Err(Error::BasisTooLarge(n));
    }
    let xi = binomial(n, eta) as usize;
    let mut dets = Vec::with_capacity(xi);
    let mut cur: Vec<usize> = (1..=eta).collect();
    loop {
        dets.push(make_determinant(&cur, n)?.0);
        // advance to the next combination in lexicographic order
        let mut i = eta;
        while i > 0 && cur[i - 1] == n - eta + i {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        cur[i - 1] += 1;
        for j in i..eta {
            cur[j] = cur[j - 1] + 1;
        }
    }
    Ok(Basis { n, eta, dets })
}

impl Basis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn determinant_at(&self, index: usize) -> &Determinant {
        &self.dets[index]
    }

    /// Lexicographic rank of `det`.
    pub fn index_of(&self, det: &Determinant) -> usize {
        let (n, eta) = (self.n, self.eta);
        let mut rank = 0u64;
        let mut prev = 0usize;
        for (i, &o) in det.occ().iter().enumerate() {
            let o = o as usize;
            for v in prev + 1..o {
                rank += binomial(n - v, eta - i - 1);
            }
            prev = o;
        }
        rank as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffReport {
    /// Number of orbitals in the left determinant absent from the right one.
    pub count: usize,
    /// 1-based positions (in the left determinant) of the differing orbitals.
    pub positions_left: Vec<usize>,
    /// 1-based positions (in the right determinant) of the differing orbitals.
    pub positions_right: Vec<usize>,
    /// Shared orbitals, ascending.
    pub common: Vec<usize>,
    /// Parity of the permutation that lines up the shared orbitals.
    pub sign: i8,
}

pub fn align_and_diff(alpha: &Determinant, beta: &Determinant) -> DiffReport {
    let common = mask_to_list(alpha.mask & beta.mask);
    let left: Vec<usize> = alpha
        .minus(beta)
        .into_iter()
        .map(|o| alpha.position_of(o).unwrap())
        .collect();
    let right: Vec<usize> = beta
        .minus(alpha)
        .into_iter()
        .map(|o| beta.position_of(o).unwrap())
        .collect();
    // Moving each differing orbital to the front of its list costs (p - k)
    // transpositions for the k-th one; the shared tails then coincide.
    let shifts: usize = left
        .iter()
        .chain(&right)
        .sum::<usize>();
    let sign = if shifts % 2 == 0 { 1 } else { -1 };
    DiffReport {
        count: left.len(),
        positions_left: left,
        positions_right: right,
        common,
        sign,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(o: &[usize], n: usize) -> Determinant {
        Determinant::new(o, n).unwrap()
    }

    #[test]
    fn make_determinant_signs() {
        assert_eq!(make_determinant(&[1, 2, 3], 4).unwrap().1, 1);
        assert_eq!(make_determinant(&[2, 1, 3], 4).unwrap().1, -1);
        let (d, s) = make_determinant(&[3, 1, 2], 4).unwrap();
        assert_eq!(d.occ(), &[1, 2, 3]);
        assert_eq!(s, 1);
    }

    #[test]
    fn make_determinant_errors() {
        assert_eq!(
            make_determinant(&[1, 1], 4).unwrap_err(),
            Error::DuplicateOrbital(1)
        );
        assert_eq!(
            make_determinant(&[0, 1], 4).unwrap_err(),
            Error::IndexOutOfRange { index: 0, n: 4 }
        );
        assert!(make_determinant(&[5], 4).is_err());
        assert!(make_determinant(&[], 4).is_err());
    }

    #[test]
    fn small_bases() {
        let b = enumerate_basis(4, 2).unwrap();
        assert_eq!(b.len(), 6);
        assert_eq!(b.determinant_at(0).occ(), &[1, 2]);
        assert_eq!(b.determinant_at(5).occ(), &[3, 4]);
        assert_eq!(enumerate_basis(3, 3).unwrap().len(), 1);
        let singles = enumerate_basis(4, 1).unwrap();
        let occ: Vec<_> = singles.dets().iter().map(|d| d.occ()[0]).collect();
        assert_eq!(occ, vec![1, 2, 3, 4]);
        assert!(enumerate_basis(3, 4).is_err());
        assert!(enumerate_basis(3, 0).is_err());
    }

    #[test]
    fn sentinels() {
        let d = det(&[2, 4], 6);
        assert_eq!(d.at(0), 0);
        assert_eq!(d.at(1), 2);
        assert_eq!(d.at(3), 7);
    }

    #[test]
    fn replace_resorts() {
        let d = det(&[1, 2, 5], 6);
        let (e, pos) = d.replace(2, 3).unwrap();
        assert_eq!(e.occ(), &[1, 3, 5]);
        assert_eq!(pos, 2);
        let (e, pos) = d.replace(1, 6).unwrap();
        assert_eq!(e.occ(), &[2, 5, 6]);
        assert_eq!(pos, 3);
        assert!(d.replace(1, 5).is_none());
        assert!(d.replace(1, 0).is_none());
        assert!(d.replace(1, 7).is_none());
        assert_eq!(d.replace(2, 2).unwrap().0, d);
    }

    #[test]
    fn diff_examples() {
        let r = align_and_diff(&det(&[1, 2], 4), &det(&[1, 2], 4));
        assert_eq!((r.count, r.sign), (0, 1));
        let r = align_and_diff(&det(&[1, 2, 5], 6), &det(&[1, 3, 5], 6));
        assert_eq!(r.count, 1);
        assert_eq!(r.positions_left, vec![2]);
        assert_eq!(r.positions_right, vec![2]);
        assert_eq!(r.common, vec![1, 5]);
        let r = align_and_diff(&det(&[1, 2], 4), &det(&[3, 4], 4));
        assert_eq!(r.count, 2);
        assert_eq!(r.sign, 1);
        let r = align_and_diff(&det(&[1, 2, 3], 6), &det(&[4, 5, 6], 6));
        assert_eq!(r.count, 3);
    }
}
