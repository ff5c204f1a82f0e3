//! Edge coloring of the CI graph into 1-sparse matchings.
//!
//! A color is two moves `(a, b, l, shift)`. Each move relocates one orbital by
//! a signed shift. `a` says which side has the larger neighbour spacing and
//! so where the position `l` is measured. `b` picks among at most two candidates.
//! The graph is treated as bipartite (left = α, right = β), so a color maps
//! left nodes to right nodes and back.
//!
//! All positions are 1-based and use the sentinels 0 and N+1.

use crate::determinants::{align_and_diff, enumerate_basis, Determinant};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// One orbital move of a color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub a: u8,
    pub b: u8,
    pub l: u16,
    pub shift: i32,
}

impl Move {
    /// The move that leaves a determinant unchanged.
    pub const IDENTITY: Move = Move {
        a: 0,
        b: 0,
        l: 1,
        shift: 0,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColorTuple {
    pub first: Move,
    pub second: Move,
}

impl ColorTuple {
    pub fn diagonal() -> Self {
        ColorTuple {
            first: Move::IDENTITY,
            second: Move::IDENTITY,
        }
    }

    /// Single-difference color: the move lives in the second slot.
    pub fn single(m: Move) -> Self {
        ColorTuple {
            first: Move::IDENTITY,
            second: m,
        }
    }

    pub fn double(first: Move, second: Move) -> Self {
        ColorTuple { first, second }
    }

    pub fn is_diagonal(&self) -> bool {
        self.first.shift == 0 && self.second.shift == 0
    }

    pub fn is_single(&self) -> bool {
        self.first.shift == 0 && self.second.shift != 0
    }

    pub fn is_double(&self) -> bool {
        self.first.shift != 0 && self.second.shift != 0
    }

    /// Checks the structural rules for an (N, η) problem. A zero shift must
    /// use the identity move so that each pair has exactly one color.
    pub fn validate(&self, n: usize, eta: usize) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidColor(format!("{self:?}: {why}")));
        if self.second.shift == 0 && self.first.shift != 0 {
            return bad("q = 0 requires p = 0");
        }
        for m in [self.first, self.second] {
            if m.a > 1 || m.b > 1 {
                return bad("a, b must be bits");
            }
            if m.l < 1 || m.l as usize > eta {
                return bad("position outside 1..eta");
            }
            if m.shift.unsigned_abs() as usize > n.saturating_sub(1) {
                return bad("|shift| > N-1");
            }
            if m.shift == 0 && m != Move::IDENTITY {
                return bad("zero shift must be the identity move");
            }
        }
        Ok(())
    }
}

/// Gap between the neighbours of position `pos` (sentinels included).
fn spacing(d: &Determinant, pos: usize) -> usize {
    d.at(pos + 1) - d.at(pos - 1)
}

/// Candidate α with β_j − p landing at position `l` and β-side spacing at
/// least the α-side spacing, in order of discovery.
pub fn find_alphas(beta: &Determinant, p: i32, l: usize) -> Vec<Determinant> {
    let mut out = Vec::with_capacity(2);
    for j in 1..=beta.eta() {
        let target = beta.at(j) as i64 - p as i64;
        let Some((alpha, i)) = beta.replace(j, target) else {
            continue;
        };
        if i == l && spacing(beta, j) >= spacing(&alpha, i) {
            out.push(alpha);
        }
    }
    out
}

/// Candidate β with α_i + p landing at position `l` and β-side spacing
/// strictly smaller than the α-side spacing.
pub fn find_betas(alpha: &Determinant, p: i32, l: usize) -> Vec<Determinant> {
    let mut out = Vec::with_capacity(2);
    for i in 1..=alpha.eta() {
        let target = alpha.at(i) as i64 + p as i64;
        let Some((beta, j)) = alpha.replace(i, target) else {
            continue;
        };
        if j == l && spacing(&beta, j) < spacing(alpha, i) {
            out.push(beta);
        }
    }
    out
}

fn pick(cands: Vec<Determinant>, b: u8) -> Option<Determinant> {
    match (cands.len(), b) {
        (1, 0) => cands.into_iter().next(),
        (2, _) => cands.into_iter().nth(b as usize),
        _ => None,
    }
}

/// One move of a color applied to `node`. Left nodes are α (returns β),
/// right nodes are β (returns α). `None` is INVALID.
pub fn apply_single(mv: Move, node: &Determinant, side: Side) -> Option<Determinant> {
    let l = mv.l as usize;
    let p = mv.shift;
    if l < 1 || l > node.eta() || mv.a > 1 || mv.b > 1 {
        return None;
    }
    match (side, mv.a) {
        // given β, a = 0
        (Side::Right, 0) => pick(find_alphas(node, p, l), mv.b),
        // given α, a = 1
        (Side::Left, 1) => pick(find_betas(node, p, l), mv.b),
        // given α, a = 0: move α_l, then confirm the reverse lookup lands on α
        (Side::Left, _) => {
            let alpha = node;
            let (beta, j) = alpha.replace(l, alpha.at(l) as i64 + p as i64)?;
            if spacing(&beta, j) < spacing(alpha, l) {
                return None;
            }
            let cands = find_alphas(&beta, p, l);
            let ok = match (cands.len(), mv.b) {
                (1, 0) => &cands[0] == alpha,
                (2, b) => &cands[b as usize] == alpha,
                _ => false,
            };
            ok.then_some(beta)
        }
        // given β, a = 1
        (Side::Right, _) => {
            let beta = node;
            let (alpha, i) = beta.replace(l, beta.at(l) as i64 - p as i64)?;
            if spacing(beta, l) >= spacing(&alpha, i) {
                return None;
            }
            let cands = find_betas(&alpha, p, l);
            let ok = match (cands.len(), mv.b) {
                (1, 0) => &cands[0] == beta,
                (2, b) => &cands[b as usize] == beta,
                _ => false,
            };
            ok.then_some(alpha)
        }
    }
}

/// Partner of `node` under color `gamma`, or `None` (INVALID).
pub fn apply_color(gamma: &ColorTuple, node: &Determinant, side: Side) -> Option<Determinant> {
    if gamma.is_diagonal() {
        return Some(node.clone());
    }
    let (first, second) = (gamma.first, gamma.second);
    let (alpha, chi, beta) = match side {
        Side::Left => {
            let chi = apply_single(first, node, Side::Left)?;
            let beta = apply_single(second, &chi, Side::Left)?;
            (node.clone(), chi, beta)
        }
        Side::Right => {
            let chi = apply_single(second, node, Side::Right)?;
            let alpha = apply_single(first, &chi, Side::Right)?;
            (alpha, chi, node.clone())
        }
    };
    let removed = alpha.minus(&beta);
    let added = beta.minus(&alpha);
    let ok = if gamma.is_single() {
        removed.len() == 1
    } else {
        // double difference: the first move must carry the smaller removed
        // orbital to the smaller added one
        removed.len() == 2 && {
            let pos = alpha.position_of(removed[0]).unwrap();
            alpha.replace(pos, added[0] as i64).map(|(c, _)| c) == Some(chi)
        }
    };
    ok.then(|| match side {
        Side::Left => beta,
        Side::Right => alpha,
    })
}

/// Color of a single move taking `alpha` to `beta` (one orbital differs).
fn single_move(alpha: &Determinant, beta: &Determinant) -> Move {
    let d = align_and_diff(alpha, beta);
    let (i, j) = (d.positions_left[0], d.positions_right[0]);
    let shift = beta.at(j) as i32 - alpha.at(i) as i32;
    if spacing(beta, j) >= spacing(alpha, i) {
        let b = find_alphas(beta, shift, i)
            .iter()
            .position(|c| c == alpha)
            .expect("α is a FindAlphas candidate of its own partner");
        Move {
            a: 0,
            b: b as u8,
            l: i as u16,
            shift,
        }
    } else {
        let b = find_betas(alpha, shift, j)
            .iter()
            .position(|c| c == beta)
            .expect("β is a FindBetas candidate of its own partner");
        Move {
            a: 1,
            b: b as u8,
            l: j as u16,
            shift,
        }
    }
}

/// The unique color with `apply_color(γ, α, Left) = β`.
pub fn color_of(alpha: &Determinant, beta: &Determinant) -> Result<ColorTuple> {
    let removed = alpha.minus(beta);
    let added = beta.minus(alpha);
    match removed.len() {
        0 => Ok(ColorTuple::diagonal()),
        1 => Ok(ColorTuple::single(single_move(alpha, beta))),
        2 => {
            let pos = alpha.position_of(removed[0]).unwrap();
            let chi = alpha.replace(pos, added[0] as i64).unwrap().0;
            Ok(ColorTuple::double(
                single_move(alpha, &chi),
                single_move(&chi, beta),
            ))
        }
        c => Err(Error::InvalidColor(format!(
            "too many differences ({c}) between {:?} and {:?}",
            alpha.occ(),
            beta.occ()
        ))),
    }
}

/// All moves with nonzero shift for an (N, η) problem.
pub fn all_moves(n: usize, eta: usize) -> Vec<Move> {
    let mut out = Vec::with_capacity(8 * eta * n.saturating_sub(1));
    for a in 0..2u8 {
        for b in 0..2u8 {
            for l in 1..=eta as u16 {
                for shift in -(n as i32 - 1)..=(n as i32 - 1) {
                    if shift != 0 {
                        out.push(Move { a, b, l, shift });
                    }
                }
            }
        }
    }
    out
}

/// Every admissible color: diagonal, single and double.
pub fn all_colors(n: usize, eta: usize) -> Vec<ColorTuple> {
    let moves = all_moves(n, eta);
    let mut out = Vec::with_capacity(1 + moves.len() * (1 + moves.len()));
    out.push(ColorTuple::diagonal());
    out.extend(moves.iter().map(|&m| ColorTuple::single(m)));
    for &f in &moves {
        for &s in &moves {
            out.push(ColorTuple::double(f, s));
        }
    }
    out
}

/// Outcome of [`check_coloring`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringCheck {
    pub n: usize,
    pub eta: usize,
    pub colors: u64,
    pub pairs: u64,
    /// Pairs within distance 2 not produced by exactly one color.
    pub coverage_failures: u64,
    /// Left images whose right map does not return, or repeated images.
    pub inverse_failures: u64,
}

impl ColoringCheck {
    pub fn passed(&self) -> bool {
        self.coverage_failures == 0 && self.inverse_failures == 0
    }
}

/// Exhaustive check that each ordered pair at distance ≤ 2 has exactly one
/// color and that left and right maps are mutually inverse.
pub fn check_coloring(n: usize, eta: usize) -> Result<ColoringCheck> {
    let basis = enumerate_basis(n, eta)?;
    let xi = basis.len();
    let colors = all_colors(n, eta);
    let mut hits = vec![0u8; xi * xi];
    let mut out = ColoringCheck {
        n,
        eta,
        colors: colors.len() as u64,
        ..Default::default()
    };
    for gamma in &colors {
        let mut seen = vec![false; xi];
        for (ai, alpha) in basis.dets().iter().enumerate() {
            let Some(beta) = apply_color(gamma, alpha, Side::Left) else {
                continue;
            };
            let bi = basis.index_of(&beta);
            if seen[bi] || apply_color(gamma, &beta, Side::Right).as_ref() != Some(alpha) {
                out.inverse_failures += 1;
            }
            seen[bi] = true;
            hits[ai * xi + bi] = hits[ai * xi + bi].saturating_add(1);
        }
    }
    for (ai, alpha) in basis.dets().iter().enumerate() {
        for (bi, beta) in basis.dets().iter().enumerate() {
            if alpha.minus(beta).len() <= 2 {
                out.pairs += 1;
                if hits[ai * xi + bi] != 1 {
                    out.coverage_failures += 1;
                }
            } else if hits[ai * xi + bi] != 0 {
                out.coverage_failures += 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(o: &[usize], n: usize) -> Determinant {
        Determinant::new(o, n).unwrap()
    }

    fn mv(a: u8, b: u8, l: u16, shift: i32) -> Move {
        Move { a, b, l, shift }
    }

    #[test]
    fn find_alphas_examples() {
        assert_eq!(find_alphas(&det(&[1, 3, 5], 6), 1, 2), vec![det(&[1, 2, 5], 6)]);
        assert_eq!(
            find_alphas(&det(&[1, 5, 7], 8), 3, 2),
            vec![det(&[1, 2, 7], 8), det(&[1, 4, 5], 8)]
        );
        assert!(find_alphas(&det(&[1, 2, 3], 6), 1, 1).is_empty());
        let d = det(&[2, 4], 5);
        assert_eq!(find_alphas(&d, 0, 2), vec![d.clone()]);
    }

    #[test]
    fn find_betas_examples() {
        assert!(find_betas(&det(&[1, 2, 5], 6), 1, 2).is_empty());
        let d = det(&[1, 4, 9], 9);
        for c in find_betas(&d, 1, 2) {
            assert_eq!(c.minus(&d).len(), 1);
        }
        // p = 0 only passes the non-strict branch
        assert!(find_betas(&d, 0, 2).is_empty());
    }

    #[test]
    fn apply_single_examples() {
        assert_eq!(
            apply_single(mv(0, 0, 2, 1), &det(&[1, 2, 5], 6), Side::Left),
            Some(det(&[1, 3, 5], 6))
        );
        assert_eq!(
            apply_single(mv(0, 1, 2, 3), &det(&[1, 5, 7], 8), Side::Right),
            Some(det(&[1, 4, 5], 8))
        );
        assert_eq!(apply_single(mv(0, 0, 3, 2), &det(&[1, 2, 5], 6), Side::Left), None);
    }

    #[test]
    fn color_of_examples() {
        let c = color_of(&det(&[1, 2, 5], 6), &det(&[1, 3, 5], 6)).unwrap();
        assert_eq!(c, ColorTuple::single(mv(0, 0, 2, 1)));
        let a = det(&[1, 2], 4);
        assert_eq!(color_of(&a, &a).unwrap(), ColorTuple::diagonal());
        assert!(color_of(&det(&[1, 2, 3], 6), &det(&[4, 5, 6], 6)).is_err());
    }

    #[test]
    fn validate_rules() {
        let good = ColorTuple::single(mv(1, 0, 2, -3));
        assert!(good.validate(6, 2).is_ok());
        let bad = ColorTuple::double(mv(0, 0, 1, 1), Move::IDENTITY);
        assert!(bad.validate(6, 2).is_err());
        assert!(ColorTuple::single(mv(0, 0, 3, 1)).validate(6, 2).is_err());
        assert!(ColorTuple::single(mv(0, 0, 1, 6)).validate(6, 2).is_err());
    }
}
