//! Quadrature-mirror filter banks.
//!
//! A [`FilterBank`] stores `N` branch coefficient sequences `m_0, …, m_{N-1}`
//! as complex scalars, even when the coefficients are real. Two-branch banks
//! are built from the low-pass sequence `a_0, …, a_{2D-1}` and derive the
//! high-pass branch `b_k = (-1)^k conj(a_{2D-1-k})`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, Error, Result};

/// Absolute tolerance used by [`validate_qmf`] when none is given.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Number of equispaced circle points used for sampled unitarity checks.
pub const DEFAULT_CIRCLE_SAMPLES: usize = 256;

/// Allowed deviation of `|z|` from 1 in [`eval_symbol`].
pub const UNIT_MODULUS_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A finite filter bank with `N` branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FilterBankJson", into = "FilterBankJson")]
pub struct FilterBank {
    n_branches: usize,
    branches: Vec<Vec<Complex64>>,
    genus: usize,
}

impl FilterBank {
    /// Two-branch bank from a low-pass sequence of even length `2D`.
    ///
    /// Trailing zeros are kept, so `(1/√2, 1/√2, 0, 0)` is a genus-2 bank.
    pub fn from_lowpass(lowpass: Vec<Complex64>) -> Result<Self> {
        if lowpass.is_empty() {
            return invalid("empty coefficient sequence");
        }
        if !lowpass.len().is_multiple_of(2) {
            return invalid(format!(
                "two-branch low-pass must have even length 2D, got {}",
                lowpass.len()
            ));
        }
        check_finite(&lowpass)?;
        let highpass = highpass_of(&lowpass);
        let genus = lowpass.len() / 2;
        Ok(Self {
            n_branches: 2,
            branches: vec![lowpass, highpass],
            genus,
        })
    }

    pub fn from_real_lowpass(lowpass: &[f64]) -> Result<Self> {
        Self::from_lowpass(lowpass.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Bank with explicitly supplied branches; `branches.len()` must equal `n_branches`.
    ///
    /// The genus is `ceil(L / 2)` for the longest branch length `L`, which fixes the
    /// windows of the restricted operators (see [`crate::operators`]).
    pub fn from_branches(n_branches: usize, branches: Vec<Vec<Complex64>>) -> Result<Self> {
        if n_branches < 2 {
            return invalid(format!("branch count must be at least 2, got {n_branches}"));
        }
        if branches.len() != n_branches {
            return invalid(format!(
                "expected {n_branches} branches, got {}",
                branches.len()
            ));
        }
        if branches.iter().any(|b| b.is_empty()) {
            return invalid("empty coefficient sequence");
        }
        for b in &branches {
            check_finite(b)?;
        }
        let longest = branches.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            n_branches,
            branches,
            genus: longest.div_ceil(2).max(1),
        })
    }

    /// The genus-1 Haar bank `m_0(z) = (1 + z)/√2`.
    pub fn haar() -> Self {
        Self::from_real_lowpass(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).expect("static coefficients")
    }

    /// The four degenerate genus-2 members of the β-family (all Haar-like).
    ///
    /// | variant | `m_0`           | β      |
    /// |---------|-----------------|--------|
    /// | 1       | `(1 + z)/√2`    | π/4    |
    /// | 2       | `(1 + z³)/√2`   | −π/4   |
    /// | 3       | `(z + z²)/√2`   | 3π/4   |
    /// | 4       | `(z² + z³)/√2`  | −3π/4  |
    ///
    /// Coefficients are written exactly rather than evaluated from β.
    pub fn haar_variant(variant: u8) -> Result<Self> {
        let h = FRAC_1_SQRT_2;
        let coeffs = match variant {
            1 => [h, h, 0.0, 0.0],
            2 => [h, 0.0, 0.0, h],
            3 => [0.0, h, h, 0.0],
            4 => [0.0, 0.0, h, h],
            _ => return invalid(format!("Haar variant must be 1..=4, got {variant}")),
        };
        Self::from_real_lowpass(&coeffs)
    }

    /// β-parameter of a Haar variant.
    pub fn haar_variant_beta(variant: u8) -> Option<f64> {
        match variant {
            1 => Some(PI / 4.0),
            2 => Some(-PI / 4.0),
            3 => Some(3.0 * PI / 4.0),
            4 => Some(-3.0 * PI / 4.0),
            _ => None,
        }
    }

    /// Daubechies' four-tap filter.
    pub fn daubechies() -> Self {
        let s3 = 3f64.sqrt();
        let d = 4.0 * SQRT_2;
        Self::from_real_lowpass(&[(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d])
            .expect("static coefficients")
    }

    pub fn n_branches(&self) -> usize {
        self.n_branches
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn lowpass(&self) -> &[Complex64] {
        &self.branches[0]
    }

    pub fn branch(&self, i: usize) -> Option<&[Complex64]> {
        self.branches.get(i).map(Vec::as_slice)
    }

    pub fn branches(&self) -> &[Vec<Complex64>] {
        &self.branches
    }

    /// Low-pass coefficient `a_k`, zero outside the stored range.
    pub fn a(&self, k: usize) -> Complex64 {
        self.lowpass().get(k).copied().unwrap_or(ZERO)
    }
}

fn check_finite(c: &[Complex64]) -> Result<()> {
    if c.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        Ok(())
    } else {
        invalid("coefficients must be finite")
    }
}

/// On-disk form: `{"N": 2, "coeffs": [[re, im], ...]}`. Banks with `N > 2`
/// carry every branch in `"branches"`; `"coeffs"` then repeats branch 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FilterBankJson {
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    branches: Option<Vec<Vec<[f64; 2]>>>,
}

fn to_pairs(c: &[Complex64]) -> Vec<[f64; 2]> {
    c.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(c: &[[f64; 2]]) -> Vec<Complex64> {
    c.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

impl From<FilterBank> for FilterBankJson {
    fn from(bank: FilterBank) -> Self {
        let branches = (bank.n_branches != 2)
            .then(|| bank.branches.iter().map(|b| to_pairs(b)).collect());
        Self {
            n: bank.n_branches,
            coeffs: to_pairs(bank.lowpass()),
            branches,
        }
    }
}

impl TryFrom<FilterBankJson> for FilterBank {
    type Error = Error;

    fn try_from(raw: FilterBankJson) -> Result<Self> {
        match (raw.n, raw.branches) {
            (2, None) => FilterBank::from_lowpass(from_pairs(&raw.coeffs)),
            (n, Some(branches)) => {
                let branches: Vec<_> = branches.iter().map(|b| from_pairs(b)).collect();
                if branches.first().map(Vec::as_slice) != Some(from_pairs(&raw.coeffs).as_slice()) {
                    return invalid("\"coeffs\" must equal branch 0");
                }
                FilterBank::from_branches(n, branches)
            }
            (n, None) => invalid(format!("a bank with N = {n} needs explicit \"branches\"")),
        }
    }
}

/// The real β-parameterized genus-2 solutions of the QMF equations.
pub fn beta_family(beta: f64) -> FilterBank {
    let (s, c) = beta.sin_cos();
    let k = 1.0 / (2.0 * SQRT_2);
    FilterBank::from_real_lowpass(&[
        k * (1.0 + SQRT_2 * c),
        k * (1.0 + SQRT_2 * s),
        k * (1.0 - SQRT_2 * c),
        k * (1.0 - SQRT_2 * s),
    ])
    .expect("four finite coefficients")
}

/// `b_k = (-1)^k conj(a_{2D-1-k})`. Two-branch banks only.
pub fn highpass(bank: &FilterBank) -> Result<Vec<Complex64>> {
    if bank.n_branches() != 2 {
        return unsupported(format!(
            "high-pass derivation needs N = 2 (got N = {}); supply branches explicitly",
            bank.n_branches()
        ));
    }
    Ok(highpass_of(bank.lowpass()))
}

pub(crate) fn highpass_of(lowpass: &[Complex64]) -> Vec<Complex64> {
    let len = lowpass.len();
    (0..len)
        .map(|k| {
            let c = lowpass[len - 1 - k].conj();
            if k % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

/// `Σ c_k z^k` for `|z| = 1`.
pub fn eval_symbol(coeffs: &[Complex64], z: Complex64) -> Result<Complex64> {
    if (z.norm() - 1.0).abs() > UNIT_MODULUS_TOLERANCE {
        return invalid(format!("|z| = {} is not on the unit circle", z.norm()));
    }
    Ok(horner(coeffs, z))
}

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// `j`-th of `samples` equispaced points on the unit circle.
pub fn circle_point(j: usize, samples: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * j as f64 / samples as f64)
}

/// `M(z) = (1/√2) [[m_0(z), m_0(−z)], [m_1(z), m_1(−z)]]`.
pub fn modulation_matrix(bank: &FilterBank, z: Complex64) -> Result<Matrix2<Complex64>> {
    if bank.n_branches() != 2 {
        return unsupported("the 2×2 modulation matrix needs N = 2; use polyphase_matrix");
    }
    let m0 = bank.lowpass();
    let m1 = &bank.branches()[1];
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(Matrix2::new(
        eval_symbol(m0, z)?,
        eval_symbol(m0, -z)?,
        eval_symbol(m1, z)?,
        eval_symbol(m1, -z)?,
    ) * s)
}

/// `M_N(z) = (1/√N) (m_j(z e^{2πik/N}))_{j,k}` for a bank with `N` branches.
pub fn polyphase_matrix(bank: &FilterBank, z: Complex64) -> Result<DMatrix<Complex64>> {
    let n = bank.n_branches();
    if bank.branches().len() != n {
        return invalid(format!(
            "bank declares N = {n} but has {} branches",
            bank.branches().len()
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = DMatrix::from_element(n, n, ZERO);
    for k in 0..n {
        let w = z * circle_point(k, n);
        for (j, branch) in bank.branches().iter().enumerate() {
            out[(j, k)] = eval_symbol(branch, w)? * scale;
        }
    }
    Ok(out)
}

/// Largest entry of `|U* U − I|`.
pub fn unitarity_residual<R, C, S>(u: &nalgebra::Matrix<Complex64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    let (rows, cols) = u.shape();
    let mut worst = 0.0f64;
    for i in 0..cols {
        for j in 0..cols {
            let mut acc = ZERO;
            for r in 0..rows {
                acc += u[(r, i)].conj() * u[(r, j)];
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// Pass/fail with the tolerance that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub tolerance: f64,
}

/// Residuals of the QMF conditions for a two-branch bank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `|Σ_k conj(a_k) a_{k+2ℓ} − δ_{0,ℓ}|` for every lag with overlapping support.
    pub orthogonality_residuals: BTreeMap<i64, f64>,
    /// `|Σ_k a_k − √2|`.
    pub sum_residual: f64,
    /// Max over sampled `z` of the entries of `|M(z)* M(z) − I|`.
    pub unitarity_max_residual: f64,
    pub samples: usize,
    pub verdict: Verdict,
}

impl ValidationReport {
    pub fn max_orthogonality_residual(&self) -> f64 {
        self.orthogonality_residuals
            .values()
            .fold(0.0, |a, &b| a.max(b))
    }
}

pub fn validate_qmf(bank: &FilterBank, tolerance: f64) -> Result<ValidationReport> {
    validate_qmf_sampled(bank, tolerance, DEFAULT_CIRCLE_SAMPLES)
}

pub fn validate_qmf_sampled(
    bank: &FilterBank,
    tolerance: f64,
    samples: usize,
) -> Result<ValidationReport> {
    if bank.n_branches() != 2 {
        return unsupported("QMF validation is for N = 2 banks; use fractal::validate_on");
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return invalid("tolerance must be non-negative");
    }
    if samples == 0 {
        return invalid("at least one circle sample is required");
    }
    let a = bank.lowpass();
    let d = bank.genus() as i64;
    let mut orthogonality_residuals = BTreeMap::new();
    for lag in -(d - 1)..=(d - 1) {
        let shift = 2 * lag;
        let mut acc = ZERO;
        for (k, ak) in a.iter().enumerate() {
            let j = k as i64 + shift;
            if (0..a.len() as i64).contains(&j) {
                acc += ak.conj() * a[j as usize];
            }
        }
        if lag == 0 {
            acc -= 1.0;
        }
        orthogonality_residuals.insert(lag, acc.norm());
    }
    let sum: Complex64 = a.iter().sum();
    let sum_residual = (sum - SQRT_2).norm();
    let mut unitarity_max_residual = 0.0f64;
    for j in 0..samples {
        let m = modulation_matrix(bank, circle_point(j, samples))?;
        unitarity_max_residual = unitarity_max_residual.max(unitarity_residual(&m));
    }
    let passed = orthogonality_residuals.values().all(|&r| r <= tolerance)
        && sum_residual <= tolerance
        && unitarity_max_residual <= tolerance;
    Ok(ValidationReport {
        orthogonality_residuals,
        sum_residual,
        unitarity_max_residual,
        samples,
        verdict: Verdict { passed, tolerance },
    })
}

/// Polyphase blocks `A_k` of the low-pass filter together with the residuals of
/// `Σ_k A_{k+n} A_k* = δ_{0,n}` (row form) and `Σ_k A_k* A_{k+n} = δ_{0,n}` (column form).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrices {
    pub matrices: Vec<Matrix2<Complex64>>,
    pub row_residuals: BTreeMap<i64, f64>,
    pub column_residuals: BTreeMap<i64, f64>,
}

impl BlockMatrices {
    pub fn max_residual(&self) -> f64 {
        self.row_residuals
            .values()
            .chain(self.column_residuals.values())
            .fold(0.0, |a, &b| a.max(b))
    }

    /// `U(z) = Σ A_k z^k`.
    pub fn symbol(&self, z: Complex64) -> Matrix2<Complex64> {
        self.matrices
            .iter()
            .rev()
            .fold(Matrix2::zeros(), |acc, m| acc * z + m)
    }
}

/// `A_k = [[a_{2k}, a_{2k+1}], [a_{2(D−k)−1}, −a_{2(D−k−1)}]]` for `k = 0, …, D−1`.
pub fn block_coefficient_matrices(bank: &FilterBank) -> Result<BlockMatrices> {
    if bank.n_branches() != 2 {
        return unsupported("block coefficient matrices need N = 2");
    }
    let d = bank.genus();
    let matrices: Vec<_> = (0..d)
        .map(|k| {
            Matrix2::new(
                bank.a(2 * k),
                bank.a(2 * k + 1),
                bank.a(2 * (d - k) - 1),
                -bank.a(2 * (d - k - 1)),
            )
        })
        .collect();
    let mut row_residuals = BTreeMap::new();
    let mut column_residuals = BTreeMap::new();
    let di = d as i64;
    for n in -(di - 1)..=(di - 1) {
        let mut rows = Matrix2::<Complex64>::zeros();
        let mut cols = Matrix2::<Complex64>::zeros();
        for k in 0..di {
            let j = k + n;
            if (0..di).contains(&j) {
                let ak = &matrices[k as usize];
                let aj = &matrices[j as usize];
                rows += aj * ak.adjoint();
                cols += ak.adjoint() * aj;
            }
        }
        if n == 0 {
            rows -= Matrix2::identity();
            cols -= Matrix2::identity();
        }
        row_residuals.insert(n, rows.iter().fold(0.0f64, |a, z| a.max(z.norm())));
        column_residuals.insert(n, cols.iter().fold(0.0f64, |a, z| a.max(z.norm())));
    }
    Ok(BlockMatrices {
        matrices,
        row_residuals,
        column_residuals,
    })
}

/// `max_z |(1/N) Σ_{w^N = z} conj(m_i(w)) m_j(w) − δ_{ij}|` over `samples` circle points.
pub fn symbol_cuntz_residual(bank: &FilterBank, samples: usize) -> Result<f64> {
    let n = bank.n_branches();
    let mut worst = 0.0f64;
    for s in 0..samples {
        // Roots of w^N = z for z = e^{iθ}: w = e^{i(θ + 2πk)/N}.
        let theta = 2.0 * PI * s as f64 / samples as f64;
        let roots: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, (theta + 2.0 * PI * k as f64) / n as f64))
            .collect();
        let values: Vec<Vec<Complex64>> = bank
            .branches()
            .iter()
            .map(|b| roots.iter().map(|&w| horner(b, w)).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                let mut acc: Complex64 = values[i]
                    .iter()
                    .zip(&values[j])
                    .map(|(x, y)| x.conj() * y)
                    .sum::<Complex64>()
                    / n as f64;
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
    }
    Ok(worst)
}
