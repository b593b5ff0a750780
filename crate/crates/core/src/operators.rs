//! The isometries `S_i` and adjoints `S_i*` on finitely supported sequences, and
//! their compressions to the invariant windows `L` and `M`.
//!
//! Sequences are indexed by `ℤ` in the basis `e_n(z) = z^n`. For a branch with
//! coefficients `b`, `(S ξ)_n = Σ_k b_{n−Nk} ξ_k` and `(S* ξ)_n = Σ_k conj(b_{k−Nn}) ξ_k`.
//!
//! For genus `D` the windows are
//! - `L = span{e_k : −2D+1 ≤ k ≤ 0}` (dimension `2D`),
//! - `M = span{e_k : −2D+2 ≤ k ≤ 0}` (dimension `2D−1`),
//!
//! and both are invariant under every `S_i*` for any `N ≥ 2` as long as each branch
//! has at most `2D` coefficients. Restricted matrices are ordered
//! `e_0, e_{−1}, e_{−2}, …`, so row `r` is basis index `−r`, and the entry at
//! `(r, c)` is `conj(b_{N r − c})`.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::filters::FilterBank;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A finitely supported element of `ℓ²(ℤ)`. Unlisted indices are zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSequence {
    entries: BTreeMap<i64, Complex64>,
}

impl SparseSequence {
    pub fn new() -> Self {
        Self::default()
    }

    /// The basis vector `e_n`.
    pub fn basis(n: i64) -> Self {
        let mut s = Self::new();
        s.entries.insert(n, Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut s = Self::new();
        for (n, v) in entries {
            s.add_at(n, v);
        }
        s
    }

    pub fn get(&self, n: i64) -> Complex64 {
        self.entries.get(&n).copied().unwrap_or(ZERO)
    }

    pub fn add_at(&mut self, n: i64, v: Complex64) {
        if v != ZERO {
            *self.entries.entry(n).or_insert(ZERO) += v;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.entries.iter().map(|(&n, &v)| (n, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest and largest index carrying a nonzero value.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz = || self.entries.iter().filter(|(_, v)| **v != ZERO).map(|(&n, _)| n);
        Some((nz().next()?, nz().next_back()?))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self | other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.entries
            .iter()
            .map(|(n, v)| v.conj() * other.get(*n))
            .sum()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::from_entries(self.iter().map(|(n, v)| (n, v * s)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, v) in other.iter() {
            out.add_at(n, v);
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Drops entries with `|v| < threshold`.
    pub fn pruned(&self, threshold: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(_, v)| v.norm() >= threshold)
                .map(|(&n, &v)| (n, v))
                .collect(),
        }
    }

    /// Random sequence with i.i.d. complex Gaussian-ish entries on `support`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, support: RangeInclusive<i64>) -> Self {
        Self::from_entries(support.map(|n| {
            (
                n,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        }))
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }
}

/// `(S ξ)_n = Σ_k b_{n−Nk} ξ_k` for one branch `b` of an `N`-branch bank.
pub fn apply_s(coeffs: &[Complex64], base: usize, xi: &SparseSequence) -> SparseSequence {
    let base = base as i64;
    let mut out = SparseSequence::new();
    for (k, v) in xi.iter() {
        for (j, b) in coeffs.iter().enumerate() {
            if *b != ZERO {
                out.add_at(j as i64 + base * k, b * v);
            }
        }
    }
    out
}

/// `(S* ξ)_n = Σ_k conj(b_{k−Nn}) ξ_k`.
pub fn apply_s_star(coeffs: &[Complex64], base: usize, xi: &SparseSequence) -> SparseSequence {
    let base = base as i64;
    let mut out = SparseSequence::new();
    for (k, v) in xi.iter() {
        for (j, b) in coeffs.iter().enumerate() {
            let shifted = k - j as i64;
            if *b != ZERO && shifted.rem_euclid(base) == 0 {
                out.add_at(shifted.div_euclid(base), b.conj() * v);
            }
        }
    }
    out
}

/// `S_{i_k}* ⋯ S_{i_1}* ξ`, applying the first digit first.
pub fn apply_word_star(bank: &FilterBank, word: &[u8], xi: &SparseSequence) -> SparseSequence {
    word.iter().fold(xi.clone(), |acc, &d| {
        apply_s_star(&bank.branches()[d as usize], bank.n_branches(), &acc)
    })
}

/// Which finite window a restricted operator lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subspace {
    L,
    M,
}

/// Contiguous basis range `lo ..= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexWindow {
    pub lo: i64,
}

impl IndexWindow {
    pub fn for_genus(genus: usize, subspace: Subspace) -> Self {
        let d = genus as i64;
        let lo = match subspace {
            Subspace::L => -2 * d + 1,
            Subspace::M => -2 * d + 2,
        };
        Self { lo }
    }

    pub fn dim(&self) -> usize {
        (1 - self.lo) as usize
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.lo..=0).contains(&n)
    }

    /// Basis index of vector row `r`.
    pub fn index_of(&self, r: usize) -> i64 {
        -(r as i64)
    }
}

/// Entry table of a compressed adjoint: row `r`, column `c` holds `map(b_{N r − c})`
/// or `zero` when `N r − c` is outside the coefficient range.
pub fn window_entries<T: Clone>(
    coeffs: &[T],
    base: usize,
    dim: usize,
    zero: T,
    map: impl Fn(&T) -> T,
) -> Vec<Vec<T>> {
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|c| {
                    let j = (base * r) as i64 - c as i64;
                    usize::try_from(j)
                        .ok()
                        .and_then(|j| coeffs.get(j))
                        .map_or_else(|| zero.clone(), &map)
                })
                .collect()
        })
        .collect()
}

/// Matrix of a branch adjoint `S_i*` compressed to `L` or `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedOperator {
    matrix: DMatrix<Complex64>,
    window: IndexWindow,
    subspace: Subspace,
    branch: usize,
}

impl RestrictedOperator {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn window(&self) -> IndexWindow {
        self.window
    }

    pub fn subspace(&self) -> Subspace {
        self.subspace
    }

    pub fn branch(&self) -> usize {
        self.branch
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }

    /// Coordinates of a sequence supported in the window; `None` otherwise.
    pub fn coordinates(&self, xi: &SparseSequence) -> Option<DVector<Complex64>> {
        let mut v = DVector::from_element(self.dim(), ZERO);
        for (n, x) in xi.iter() {
            if !self.window.contains(n) {
                return None;
            }
            v[(-n) as usize] = x;
        }
        Some(v)
    }

    pub fn to_sequence(&self, v: &DVector<Complex64>) -> SparseSequence {
        SparseSequence::from_entries(
            v.iter()
                .enumerate()
                .map(|(r, &x)| (self.window.index_of(r), x)),
        )
    }
}

impl Serialize for RestrictedOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            branch: usize,
            subspace: Subspace,
            window: [i64; 2],
            rows: Vec<Vec<[f64; 2]>>,
        }
        let rows = self
            .matrix
            .row_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        Repr {
            branch: self.branch,
            subspace: self.subspace,
            window: [self.window.lo, 0],
            rows,
        }
        .serialize(serializer)
    }
}

pub fn restrict(bank: &FilterBank, branch: usize, subspace: Subspace) -> Result<RestrictedOperator> {
    let Some(coeffs) = bank.branch(branch) else {
        return invalid(format!(
            "branch {branch} out of range for a bank with {} branches",
            bank.n_branches()
        ));
    };
    let window = IndexWindow::for_genus(bank.genus(), subspace);
    let dim = window.dim();
    let entries = window_entries(coeffs, bank.n_branches(), dim, ZERO, |b| b.conj());
    let matrix = DMatrix::from_fn(dim, dim, |r, c| entries[r][c]);
    Ok(RestrictedOperator {
        matrix,
        window,
        subspace,
        branch,
    })
}

/// `F_i = S_i*|_M`.
pub fn restrict_to_m(bank: &FilterBank, branch: usize) -> Result<RestrictedOperator> {
    restrict(bank, branch, Subspace::M)
}

/// `S_i*|_L`.
pub fn restrict_to_l(bank: &FilterBank, branch: usize) -> Result<RestrictedOperator> {
    restrict(bank, branch, Subspace::L)
}

/// All `F_i` on `M`, indexed by branch.
pub fn restricted_family(bank: &FilterBank, subspace: Subspace) -> Vec<RestrictedOperator> {
    (0..bank.n_branches())
        .map(|i| restrict(bank, i, subspace).expect("branch index in range"))
        .collect()
}

/// Smallest `k ≤ max_iter` with `supp(S_0*^k e_n) ⊆ L`, or `None`.
///
/// Supports are tracked on the computed values, so only exact zeros
/// (from vanishing coefficients) shrink them.
pub fn absorption_depth(bank: &FilterBank, n: i64, max_iter: usize) -> Option<usize> {
    let window = IndexWindow::for_genus(bank.genus(), Subspace::L);
    let inside = |s: &SparseSequence| s.iter().all(|(k, v)| v == ZERO || window.contains(k));
    let mut current = SparseSequence::basis(n);
    for k in 0..=max_iter {
        if inside(&current) {
            return Some(k);
        }
        current = apply_s_star(bank.lowpass(), bank.n_branches(), &current);
    }
    None
}

/// Residuals of the Cuntz relations evaluated on concrete sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuntzResidual {
    /// `max ‖S_i* S_j ξ − δ_{ij} ξ‖`.
    pub orthogonality: f64,
    /// `max ‖Σ_i S_i S_i* ξ − ξ‖`.
    pub completeness: f64,
}

impl CuntzResidual {
    pub fn max(&self) -> f64 {
        self.orthogonality.max(self.completeness)
    }
}

pub fn cuntz_residual(bank: &FilterBank, samples: &[SparseSequence]) -> CuntzResidual {
    let n = bank.n_branches();
    let branches = bank.branches();
    let mut orthogonality = 0.0f64;
    let mut completeness = 0.0f64;
    for xi in samples {
        let mut sum = SparseSequence::new();
        for (i, bi) in branches.iter().enumerate() {
            let star = apply_s_star(bi, n, xi);
            sum = sum.plus(&apply_s(bi, n, &star));
            for (j, bj) in branches.iter().enumerate() {
                let sj = apply_s(bj, n, xi);
                let mut r = apply_s_star(bi, n, &sj);
                if i == j {
                    r = r.minus(xi);
                }
                orthogonality = orthogonality.max(r.norm());
            }
        }
        completeness = completeness.max(sum.minus(xi).norm());
    }
    CuntzResidual {
        orthogonality,
        completeness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{beta_family, FilterBank};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn real(m: &DMatrix<Complex64>) -> DMatrix<f64> {
        m.map(|z| z.re)
    }

    fn close(a: &SparseSequence, b: &SparseSequence, eps: f64) -> bool {
        a.minus(b).norm() < eps
    }

    #[test]
    fn s_on_basis_vectors() {
        let h = FRAC_1_SQRT_2;
        let haar = FilterBank::haar();
        let got = apply_s(haar.lowpass(), 2, &SparseSequence::basis(0));
        let want = SparseSequence::from_entries([(0, h.into()), (1, h.into())]);
        assert!(close(&got, &want, 1e-15));

        let db = FilterBank::daubechies();
        let got = apply_s(db.lowpass(), 2, &SparseSequence::basis(0));
        let want = SparseSequence::from_entries((0..4).map(|k| (k as i64, db.a(k))));
        assert!(close(&got, &want, 1e-15));

        assert!(apply_s(db.lowpass(), 2, &SparseSequence::new()).is_empty());
    }

    #[test]
    fn s_star_on_basis_vectors() {
        let bank = FilterBank::from_lowpass(vec![
            Complex64::new(0.1, 0.2),
            Complex64::new(0.3, -0.4),
            Complex64::new(-0.5, 0.6),
            Complex64::new(0.7, 0.8),
        ])
        .unwrap();
        let got = apply_s_star(bank.lowpass(), 2, &SparseSequence::basis(0));
        let want = SparseSequence::from_entries([(0, bank.a(0).conj()), (-1, bank.a(2).conj())]);
        assert!(close(&got, &want, 1e-15));

        let haar = FilterBank::haar();
        let got = apply_s_star(haar.lowpass(), 2, &SparseSequence::basis(1));
        assert!(close(&got, &SparseSequence::from_entries([(0, FRAC_1_SQRT_2.into())]), 1e-15));
    }

    #[test]
    fn adjoint_relation_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let db = FilterBank::daubechies();
        for _ in 0..50 {
            let lo = rng.gen_range(-8..4);
            let width = rng.gen_range(0..8);
            let xi = SparseSequence::random(&mut rng, lo..=lo + width);
            let eta = SparseSequence::random(&mut rng, -6..=6);
            let lhs = apply_s_star(db.lowpass(), 2, &eta).inner(&xi);
            let rhs = eta.inner(&apply_s(db.lowpass(), 2, &xi));
            assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-12);
            let back = apply_s_star(db.lowpass(), 2, &apply_s(db.lowpass(), 2, &xi));
            assert!(close(&back, &xi, 1e-12));
        }
    }

    #[test]
    fn s_output_support_bound() {
        let db = FilterBank::daubechies();
        let xi = SparseSequence::from_entries([(-3, 1.0.into()), (2, 2.0.into())]);
        let (lo, hi) = apply_s(db.lowpass(), 2, &xi).support().unwrap();
        assert!(lo >= -6 && hi <= 4 + 3);
    }

    #[test]
    fn cuntz_relations_hold_for_validated_banks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<_> = (0..50)
            .map(|_| SparseSequence::random(&mut rng, -7..=7))
            .collect();
        for bank in [FilterBank::daubechies(), beta_family(0.4), FilterBank::haar_variant(3).unwrap()] {
            let r = cuntz_residual(&bank, &samples);
            assert!(r.max() < 1e-10, "{r:?}");
            let eta = &samples[0];
            let xi = &samples[1];
            let s0 = apply_s(bank.lowpass(), 2, eta);
            let s1 = apply_s(&bank.branches()[1], 2, xi);
            assert!(s0.inner(&s1).norm() < 1e-12);
        }
    }

    #[test]
    fn f0_on_m_for_genus_two() {
        let db = FilterBank::daubechies();
        let a: Vec<f64> = db.lowpass().iter().map(|z| z.re).collect();
        let f0 = restrict_to_m(&db, 0).unwrap();
        assert_eq!(f0.window().lo, -2);
        let want = DMatrix::from_row_slice(3, 3, &[a[0], 0.0, 0.0, a[2], a[1], a[0], 0.0, a[3], a[2]]);
        assert_eq!(real(f0.matrix()), want);

        let f1 = restrict_to_m(&db, 1).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[a[3], 0.0, 0.0, a[1], -a[2], a[3], 0.0, -a[0], a[1]]);
        assert_eq!(real(f1.matrix()), want);
    }

    #[test]
    fn restricted_entries_are_conjugated() {
        let bank = FilterBank::from_lowpass(vec![
            Complex64::new(0.5, 0.5),
            Complex64::new(0.5, -0.5),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let f0 = restrict_to_m(&bank, 0).unwrap();
        assert_eq!(f0.matrix()[(0, 0)], bank.a(0).conj());
        assert_eq!(f0.matrix()[(1, 1)], bank.a(1).conj());
    }

    #[test]
    fn haar_variant_matrices() {
        let h = FRAC_1_SQRT_2;
        let f0 = [
            [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        ];
        let f1 = [
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 1.0],
            [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0],
        ];
        for v in 1..=4u8 {
            let bank = FilterBank::haar_variant(v).unwrap();
            let got0 = real(restrict_to_m(&bank, 0).unwrap().matrix());
            let got1 = real(restrict_to_m(&bank, 1).unwrap().matrix());
            let want0 = DMatrix::from_row_slice(3, 3, &f0[v as usize - 1]) * h;
            let want1 = DMatrix::from_row_slice(3, 3, &f1[v as usize - 1]) * h;
            assert_eq!(got0, want0, "F0 variant {v}");
            assert_eq!(got1, want1, "F1 variant {v}");
        }
    }

    #[test]
    fn l_restriction_matches_the_genus_two_display() {
        let bank = beta_family(0.2);
        let a: Vec<f64> = bank.lowpass().iter().map(|z| z.re).collect();
        let l = restrict_to_l(&bank, 0).unwrap();
        assert_eq!(l.dim(), 4);
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[
                a[0], 0.0, 0.0, 0.0, //
                a[2], a[1], a[0], 0.0, //
                0.0, a[3], a[2], a[1], //
                0.0, 0.0, 0.0, a[3],
            ],
        );
        assert_eq!(real(l.matrix()), want);
        let e3 = l.coordinates(&SparseSequence::basis(-3)).unwrap();
        assert_abs_diff_eq!((l.apply(&e3)[3] - bank.a(3).conj()).norm(), 0.0, epsilon = 1e-15);

        let stretched = restrict_to_l(&FilterBank::haar_variant(2).unwrap(), 0).unwrap();
        let h = FRAC_1_SQRT_2;
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[h, 0.0, 0.0, 0.0, 0.0, 0.0, h, 0.0, 0.0, h, 0.0, 0.0, 0.0, 0.0, 0.0, h],
        );
        assert_eq!(real(stretched.matrix()), want);
    }

    #[test]
    fn restricted_action_agrees_with_sparse_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for bank in [FilterBank::daubechies(), beta_family(2.0), crate::fractal::cantor_filter()] {
            for sub in [Subspace::L, Subspace::M] {
                for op in restricted_family(&bank, sub) {
                    let lo = op.window().lo;
                    let xi = SparseSequence::random(&mut rng, lo..=0);
                    let via_matrix = op.to_sequence(&op.apply(&op.coordinates(&xi).unwrap()));
                    let via_sparse = apply_s_star(bank.branch(op.branch()).unwrap(), bank.n_branches(), &xi);
                    assert!(close(&via_matrix, &via_sparse, 1e-14));
                    assert!(via_sparse.iter().all(|(n, _)| op.window().contains(n)));
                }
            }
        }
    }

    #[test]
    fn m_matrix_powers_follow_the_sparse_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bank = beta_family(-0.3);
        let ops = restricted_family(&bank, Subspace::M);
        for len in 0..=12 {
            let word: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2)).collect();
            let mut v = ops[0].coordinates(&SparseSequence::basis(0)).unwrap();
            for &d in &word {
                v = ops[d as usize].apply(&v);
            }
            let sparse = apply_word_star(&bank, &word, &SparseSequence::basis(0));
            assert!(close(&ops[0].to_sequence(&v), &sparse, 1e-13));
        }
    }

    #[test]
    fn moment_identity_on_the_extra_basis_vector() {
        for bank in [beta_family(0.9), FilterBank::daubechies(), FilterBank::haar_variant(1).unwrap()] {
            let mut v = SparseSequence::basis(-3);
            for k in 1..=10 {
                v = apply_s_star(bank.lowpass(), 2, &v);
                let got = SparseSequence::basis(-3).inner(&v);
                let want = bank.a(3).conj().powi(k);
                assert_abs_diff_eq!((got - want).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn absorption_examples() {
        let db = FilterBank::daubechies();
        assert_eq!(absorption_depth(&db, 0, 5), Some(0));
        assert_eq!(absorption_depth(&db, 1, 5), Some(1));
        assert_eq!(absorption_depth(&db, 5, 5), Some(3));
        assert_eq!(absorption_depth(&db, 5, 2), None);
        for n in -40..=40 {
            assert!(absorption_depth(&db, n, 10).is_some(), "n = {n}");
        }
    }

    #[test]
    fn brute_force_absorption_oracle() {
        // Structural support only: an index maps to ⌈(k − 2D + 1)/2⌉ ..= ⌊k/2⌋.
        fn oracle(n: i64, d: i64) -> usize {
            let (mut lo, mut hi) = (n, n);
            let mut k = 0;
            while !(lo > -2 * d && hi <= 0) {
                lo = (lo - 2 * d + 1).div_euclid(2) + i64::from((lo - 2 * d + 1).rem_euclid(2) != 0);
                hi = hi.div_euclid(2);
                k += 1;
            }
            k
        }
        let bank = beta_family(0.37);
        for n in -30..=30 {
            assert_eq!(absorption_depth(&bank, n, 20), Some(oracle(n, 2)), "n = {n}");
        }
    }

    #[test]
    fn operator_json_shape() {
        let op = restrict_to_m(&FilterBank::daubechies(), 0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&op).unwrap();
        assert_eq!(v["window"], serde_json::json!([-2, 0]));
        assert_eq!(v["subspace"], "m");
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    }
}
