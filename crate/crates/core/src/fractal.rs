//! The three-branch Cantor representation.
//!
//! `m_0(z) = (1 + z²)/√2`, `m_1(z) = z`, `m_2(z) = (1 − z²)/√2`. Its restricted
//! matrices have entries in `ℚ_2[√2]`, so triadic masses are computed exactly with
//! [`Dyadic`] and [`Sqrt2Dyadic`].

use std::cmp::Ordering;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::filters::{polyphase_matrix, unitarity_residual, Verdict, FilterBank};
use crate::measure::{check_cells, NAdicInterval, DEFAULT_GRID_CAP};
use crate::operators::{window_entries, IndexWindow, Subspace};

/// `ln 2 / ln 3`.
pub const CANTOR_DIMENSION: f64 = std::f64::consts::LN_2 / 1.098_612_288_668_109_8;

/// Deepest grid accepted by [`hutchinson_check`].
pub const MAX_HUTCHINSON_DEPTH: usize = 12;

/// An exact rational `num / 2^exp`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Self = Self { num: 0, exp: 0 };
    pub const ONE: Self = Self { num: 1, exp: 0 };

    pub fn new(num: i128, exp: u32) -> Self {
        Self { num, exp }.normalized()
    }

    pub fn from_int(n: i128) -> Self {
        Self::new(n, 0)
    }

    /// `2^{-k}`.
    pub fn pow2_neg(k: u32) -> Self {
        Self::new(1, k)
    }

    fn normalized(mut self) -> Self {
        if self.num == 0 {
            return Self::ZERO;
        }
        let shift = self.num.trailing_zeros().min(self.exp);
        self.num >>= shift;
        self.exp -= shift;
        self
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn abs(self) -> Self {
        Self {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    pub fn half(self) -> Self {
        Self::new(self.num, self.exp + 1)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 * 2f64.powi(-(self.exp as i32))
    }

    fn aligned(a: Self, b: Self) -> (i128, i128, u32) {
        let exp = a.exp.max(b.exp);
        (a.num << (exp - a.exp), b.num << (exp - b.exp), exp)
    }
}

impl Add for Dyadic {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b, exp) = Self::aligned(self, rhs);
        Self::new(a + b, exp)
    }
}

impl Sub for Dyadic {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl Mul for Dyadic {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.num * rhs.num, self.exp + rhs.exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Self::aligned(*self, *other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u128 << self.exp)
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `r + s√2` with dyadic `r`, `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sqrt2Dyadic {
    pub r: Dyadic,
    pub s: Dyadic,
}

impl Sqrt2Dyadic {
    pub const ZERO: Self = Self {
        r: Dyadic::ZERO,
        s: Dyadic::ZERO,
    };
    pub const ONE: Self = Self {
        r: Dyadic::ONE,
        s: Dyadic::ZERO,
    };

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Self {
            r: Dyadic::ZERO,
            s: Dyadic::pow2_neg(1),
        }
    }

    pub fn rational(r: Dyadic) -> Self {
        Self { r, s: Dyadic::ZERO }
    }

    pub fn is_rational(&self) -> bool {
        self.s.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.r.to_f64() + self.s.to_f64() * std::f64::consts::SQRT_2
    }
}

impl Add for Sqrt2Dyadic {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            r: self.r + rhs.r,
            s: self.s + rhs.s,
        }
    }
}

impl Neg for Sqrt2Dyadic {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            r: -self.r,
            s: -self.s,
        }
    }
}

impl Mul for Sqrt2Dyadic {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let two = Dyadic::from_int(2);
        Self {
            r: self.r * rhs.r + two * self.s * rhs.s,
            s: self.r * rhs.s + self.s * rhs.r,
        }
    }
}

/// The Cantor bank with `m_0 = (1 + z²)/√2`, `m_1 = z`, `m_2 = (1 − z²)/√2`.
pub fn cantor_filter() -> FilterBank {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    FilterBank::from_branches(3, vec![vec![h, o, h], vec![o, one, o], vec![h, o, -h]])
        .expect("static branches")
}

fn exact_branches() -> [Vec<Sqrt2Dyadic>; 3] {
    let h = Sqrt2Dyadic::inv_sqrt2();
    let o = Sqrt2Dyadic::ZERO;
    [vec![h, o, h], vec![o, Sqrt2Dyadic::ONE, o], vec![h, o, -h]]
}

type ExactMatrix = Vec<Vec<Sqrt2Dyadic>>;

/// The three restricted matrices on `M`, from the same rule as the floating-point ones.
/// The coefficients are real, so conjugation is the identity.
pub fn cantor_exact_matrices() -> [ExactMatrix; 3] {
    let dim = IndexWindow::for_genus(cantor_filter().genus(), Subspace::M).dim();
    exact_branches().map(|b| window_entries(&b, 3, dim, Sqrt2Dyadic::ZERO, |x| *x))
}

fn apply_exact(m: &ExactMatrix, v: &[Sqrt2Dyadic]) -> Vec<Sqrt2Dyadic> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Sqrt2Dyadic::ZERO, |acc, (a, b)| acc + *a * *b)
        })
        .collect()
}

fn exact_mass(v: &[Sqrt2Dyadic]) -> Result<Dyadic> {
    let sq = v.iter().fold(Sqrt2Dyadic::ZERO, |acc, x| acc + *x * *x);
    if !sq.is_rational() {
        return Err(Error::Internal(format!(
            "triadic mass has an irrational part {}·√2",
            sq.s
        )));
    }
    Ok(sq.r)
}

fn unit_vector(dim: usize) -> Vec<Sqrt2Dyadic> {
    let mut v = vec![Sqrt2Dyadic::ZERO; dim];
    v[0] = Sqrt2Dyadic::ONE;
    v
}

fn check_triadic(word: &[u8]) -> Result<()> {
    if let Some(d) = word.iter().find(|&&d| d > 2) {
        return invalid(format!("base-3 digit out of range: {d}"));
    }
    Ok(())
}

/// `‖F_{i_k} ⋯ F_{i_1} e_0‖²` for the Cantor bank, exactly.
pub fn triadic_measure(word: &[u8]) -> Result<Dyadic> {
    check_triadic(word)?;
    let ops = cantor_exact_matrices();
    let v = word
        .iter()
        .fold(unit_vector(ops[0].len()), |v, &d| apply_exact(&ops[d as usize], &v));
    exact_mass(&v)
}

/// `0` if the word contains a 1, else `2^{-k}`.
pub fn triadic_closed_form(word: &[u8]) -> Dyadic {
    if word.contains(&1) {
        Dyadic::ZERO
    } else {
        Dyadic::pow2_neg(word.len() as u32)
    }
}

/// Exact masses and self-similarity residuals at one depth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriadicMeasureReport {
    pub depth: usize,
    /// Lexicographic in the base-3 word.
    pub masses: Vec<Dyadic>,
    /// `μ(w) − ½[d_1=0] μ(rest) − ½[d_1=2] μ(rest)` per word.
    pub hutchinson_residuals: Vec<Dyadic>,
}

impl TriadicMeasureReport {
    pub fn max_residual(&self) -> Dyadic {
        self.hutchinson_residuals
            .iter()
            .map(|r| r.abs())
            .max()
            .unwrap_or(Dyadic::ZERO)
    }

    pub fn total(&self) -> Dyadic {
        self.masses.iter().fold(Dyadic::ZERO, |a, &b| a + b)
    }

    pub fn word(&self, index: usize) -> NAdicInterval {
        let mut digits = vec![0u8; self.depth];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % 3) as u8;
            rest /= 3;
        }
        NAdicInterval::new(3, digits).expect("base-3 digits")
    }
}

/// All depth-`k` masses by depth-first products, exactly.
pub fn triadic_masses(depth: usize) -> Result<Vec<Dyadic>> {
    check_cells(3, depth, DEFAULT_GRID_CAP)?;
    let ops = cantor_exact_matrices();
    let mut out = Vec::with_capacity(3usize.pow(depth as u32));
    exact_walk(&ops, unit_vector(ops[0].len()), depth, &mut out)?;
    Ok(out)
}

fn exact_walk(ops: &[ExactMatrix; 3], v: Vec<Sqrt2Dyadic>, levels: usize, out: &mut Vec<Dyadic>) -> Result<()> {
    if levels == 0 {
        out.push(exact_mass(&v)?);
        return Ok(());
    }
    for op in ops {
        exact_walk(ops, apply_exact(op, &v), levels - 1, out)?;
    }
    Ok(())
}

pub fn triadic_report(depth: usize) -> Result<TriadicMeasureReport> {
    let masses = triadic_masses(depth)?;
    let hutchinson_residuals = if depth == 0 {
        vec![Dyadic::ZERO; masses.len()]
    } else {
        let rest = triadic_masses(depth - 1)?;
        let block = rest.len();
        masses
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let first = i / block;
                let tail = rest[i % block];
                match first {
                    1 => m,
                    _ => m - tail.half(),
                }
            })
            .collect()
    };
    Ok(TriadicMeasureReport {
        depth,
        masses,
        hutchinson_residuals,
    })
}

/// Largest `|μ(w) − ½[d_1=0] μ(rest) − ½[d_1=2] μ(rest)|` over depth-`k` words.
pub fn hutchinson_check(depth: usize) -> Result<Dyadic> {
    if depth > MAX_HUTCHINSON_DEPTH {
        return Err(Error::ResourceLimit {
            what: "Hutchinson depth",
            requested: depth as u64,
            cap: MAX_HUTCHINSON_DEPTH as u64,
        });
    }
    Ok(triadic_report(depth)?.max_residual())
}

/// The same residuals for an arbitrary base-3 mass function, in floating point,
/// in lexicographic word order.
pub fn hutchinson_residuals_f64(depth: usize, mass: impl Fn(&[u8]) -> f64) -> Vec<f64> {
    if depth == 0 {
        return vec![0.0];
    }
    let mut word = vec![0u8; depth];
    (0..3usize.pow(depth as u32))
        .map(|index| {
            let mut rest = index;
            for slot in word.iter_mut().rev() {
                *slot = (rest % 3) as u8;
                rest /= 3;
            }
            let weight = if word[0] == 1 { 0.0 } else { 0.5 };
            mass(&word) - weight * mass(&word[1..])
        })
        .collect()
}

/// Outcome of the `N`-branch unitarity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnReport {
    pub max_residual: f64,
    pub samples: usize,
    pub verdict: Verdict,
}

/// Checks that `M_N(z)` is unitary at `samples` equispaced circle points.
pub fn validate_on(bank: &FilterBank, samples: usize, tolerance: f64) -> Result<OnReport> {
    if bank.branches().len() != bank.n_branches() {
        return invalid(format!(
            "bank declares N = {} but has {} branches",
            bank.n_branches(),
            bank.branches().len()
        ));
    }
    if samples == 0 {
        return invalid("at least one circle sample is required");
    }
    let mut max_residual = 0.0f64;
    for j in 0..samples {
        let m = polyphase_matrix(bank, crate::filters::circle_point(j, samples))?;
        max_residual = max_residual.max(unitarity_residual(&m));
    }
    Ok(OnReport {
        max_residual,
        samples,
        verdict: Verdict {
            passed: max_residual < tolerance,
            tolerance,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{beta_family, DEFAULT_TOLERANCE};
    use crate::operators::{cuntz_residual, restrict_to_m, SparseSequence};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dyadic_arithmetic() {
        let a = Dyadic::new(6, 3);
        assert_eq!(a, Dyadic::new(3, 2));
        assert_eq!(a.to_string(), "3/4");
        assert_eq!(Dyadic::new(4, 1).to_string(), "2");
        assert_eq!(Dyadic::pow2_neg(1) + Dyadic::pow2_neg(1), Dyadic::ONE);
        assert_eq!(Dyadic::pow2_neg(2) * Dyadic::from_int(4), Dyadic::ONE);
        assert!(Dyadic::pow2_neg(3) < Dyadic::pow2_neg(2));
        assert_eq!((Dyadic::ONE - Dyadic::ONE), Dyadic::ZERO);
        let h = Sqrt2Dyadic::inv_sqrt2();
        assert_eq!(h * h, Sqrt2Dyadic::rational(Dyadic::pow2_neg(1)));
        assert_abs_diff_eq!(h.to_f64(), FRAC_1_SQRT_2, epsilon = 1e-16);
    }

    #[test]
    fn cantor_matrices() {
        let bank = cantor_filter();
        let h = FRAC_1_SQRT_2;
        let f = |i| restrict_to_m(&bank, i).unwrap().into_matrix().map(|z: Complex64| z.re);
        assert_eq!(f(0), DMatrix::from_row_slice(3, 3, &[h, 0.0, 0.0, 0.0, h, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(f(1), DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]));
        assert_eq!(f(2), DMatrix::from_row_slice(3, 3, &[h, 0.0, 0.0, 0.0, -h, 0.0, 0.0, 0.0, 0.0]));

        let exact = cantor_exact_matrices();
        for (i, m) in exact.iter().enumerate() {
            let float = f(i);
            for r in 0..3 {
                for c in 0..3 {
                    assert_eq!(m[r][c].to_f64(), float[(r, c)]);
                }
            }
        }
    }

    #[test]
    fn triadic_examples() {
        assert_eq!(triadic_measure(&[0]).unwrap(), Dyadic::pow2_neg(1));
        assert_eq!(triadic_measure(&[1]).unwrap(), Dyadic::ZERO);
        assert_eq!(triadic_measure(&[2, 2]).unwrap(), Dyadic::pow2_neg(2));
        assert_eq!(triadic_measure(&[0, 1, 2]).unwrap(), Dyadic::ZERO);
        assert_eq!(triadic_measure(&[]).unwrap(), Dyadic::ONE);
        assert!(triadic_measure(&[3]).is_err());
    }

    #[test]
    fn grid_matches_closed_form() {
        for depth in 0..=7 {
            let report = triadic_report(depth).unwrap();
            assert_eq!(report.total(), Dyadic::ONE);
            for (i, m) in report.masses.iter().enumerate() {
                assert_eq!(*m, triadic_closed_form(report.word(i).digits()));
            }
            assert_eq!(report.max_residual(), Dyadic::ZERO);
        }
    }

    #[test]
    fn hutchinson_examples() {
        assert_eq!(hutchinson_check(4).unwrap(), Dyadic::ZERO);
        assert_eq!(triadic_report(1).unwrap().masses[0], Dyadic::pow2_neg(1));
        assert!(hutchinson_check(13).is_err());

        for k in 1..=5 {
            let uniform = hutchinson_residuals_f64(k, |w| 3f64.powi(-(w.len() as i32)));
            let third = uniform.len() / 3;
            let want = 0.5 * 3f64.powi(-(k as i32 - 1)) - 3f64.powi(-(k as i32));
            assert!(want > 0.0);
            for r in &uniform[..third] {
                assert_abs_diff_eq!(r.abs(), want, epsilon = 1e-15);
            }
            let cantor = hutchinson_residuals_f64(k, |w| triadic_closed_form(w).to_f64());
            assert!(cantor.iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn hausdorff_scaling() {
        for k in 0..=12 {
            let mass = Dyadic::pow2_neg(k).to_f64();
            let len = 3f64.powi(-(k as i32));
            assert_abs_diff_eq!(mass.ln(), CANTOR_DIMENSION * len.ln(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(CANTOR_DIMENSION, 2f64.ln() / 3f64.ln(), epsilon = 1e-16);
    }

    #[test]
    fn on_unitarity_examples() {
        assert!(validate_on(&cantor_filter(), 256, DEFAULT_TOLERANCE).unwrap().verdict.passed);
        assert!(validate_on(&FilterBank::haar(), 256, DEFAULT_TOLERANCE).unwrap().verdict.passed);
        assert!(validate_on(&FilterBank::daubechies(), 256, DEFAULT_TOLERANCE).unwrap().verdict.passed);
        let m0 = cantor_filter().lowpass().to_vec();
        let same = FilterBank::from_branches(3, vec![m0.clone(), m0.clone(), m0]).unwrap();
        assert!(!validate_on(&same, 64, DEFAULT_TOLERANCE).unwrap().verdict.passed);
    }

    #[test]
    fn on_verdict_agrees_with_cuntz_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let samples: Vec<_> = (0..20).map(|_| SparseSequence::random(&mut rng, -6..=6)).collect();
        for trial in 0..20 {
            let base = if trial % 2 == 0 { cantor_filter() } else { beta_family(rng.gen_range(-3.0..3.0)) };
            let n = base.n_branches();
            let branches: Vec<Vec<Complex64>> = base
                .branches()
                .iter()
                .map(|b| {
                    if trial % 4 < 2 {
                        // Unimodular phase times a shift by a multiple of N keeps the relations.
                        let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..6.0));
                        let mut out = vec![Complex64::default(); n * rng.gen_range(0..2)];
                        out.extend(b.iter().map(|c| c * phase));
                        out
                    } else {
                        b.iter()
                            .map(|c| c + Complex64::new(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05)))
                            .collect()
                    }
                })
                .collect();
            let bank = FilterBank::from_branches(n, branches).unwrap();
            let on = validate_on(&bank, 256, 1e-9).unwrap().verdict.passed;
            let cuntz = cuntz_residual(&bank, &samples).max() < 1e-9;
            assert_eq!(on, cuntz, "trial {trial}");
            assert_eq!(on, trial % 4 < 2, "trial {trial}");
        }
    }
}
