//! The measure `μ0` (and `μ_f`) on `N`-adic intervals.
//!
//! The word `(i_1, …, i_k)` addresses `[Σ i_j N^{-j}, Σ i_j N^{-j} + N^{-k})` with `i_1`
//! the most significant digit, and its mass is `‖F_{i_k} ⋯ F_{i_1} e_0‖²`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, unsupported, Error, Result};
use crate::filters::FilterBank;
use crate::operators::{apply_word_star, restricted_family, SparseSequence, Subspace};
use crate::spectral::{basis, dominant_eigendata, spectrum_f0};

/// Default cap on the number of cells in a grid.
pub const DEFAULT_GRID_CAP: u64 = 531_441;

/// Masses below this are reported as 0.
pub const MASS_FLOOR: f64 = 1e-300;

/// Successive ratios closer than this count as settled.
pub const SETTLE_TOLERANCE: f64 = 1e-6;

/// An `N`-adic interval addressed by its digit word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NAdicInterval {
    base: usize,
    digits: Vec<u8>,
}

impl NAdicInterval {
    pub fn new(base: usize, digits: Vec<u8>) -> Result<Self> {
        if base < 2 {
            return invalid(format!("base must be at least 2, got {base}"));
        }
        if let Some(d) = digits.iter().find(|&&d| d as usize >= base) {
            return invalid(format!("digit {d} out of range for base {base}"));
        }
        Ok(Self { base, digits })
    }

    /// The whole unit interval.
    pub fn root(base: usize) -> Result<Self> {
        Self::new(base, Vec::new())
    }

    /// Parses a digit string such as `"0110"`; the empty string is the root.
    pub fn parse(base: usize, text: &str) -> Result<Self> {
        let digits = text
            .trim()
            .chars()
            .map(|ch| {
                ch.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidInput(format!("invalid digit {ch:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(base, digits)
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn length(&self) -> f64 {
        (self.base as f64).powi(-(self.depth() as i32))
    }

    pub fn left_endpoint(&self) -> f64 {
        self.digits
            .iter()
            .rev()
            .fold(0.0, |acc, &d| (acc + d as f64) / self.base as f64)
    }

    /// Left endpoint as a reduced fraction `(p, q)`; `None` if `N^k` overflows.
    pub fn left_endpoint_exact(&self) -> Option<(u128, u128)> {
        let mut num: u128 = 0;
        let mut den: u128 = 1;
        for &d in &self.digits {
            num = num.checked_mul(self.base as u128)?.checked_add(d as u128)?;
            den = den.checked_mul(self.base as u128)?;
        }
        let g = gcd(num, den);
        Some((num / g, den / g))
    }

    pub fn child(&self, d: u8) -> Result<Self> {
        let mut digits = self.digits.clone();
        digits.push(d);
        Self::new(self.base, digits)
    }

    pub fn children(&self) -> Vec<Self> {
        (0..self.base as u8)
            .map(|d| self.child(d).expect("digit below base"))
            .collect()
    }

    /// Whether `other` lies inside `self`.
    pub fn contains(&self, other: &Self) -> bool {
        other.base == self.base && other.digits.starts_with(&self.digits)
    }
}

impl fmt::Display for NAdicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write!(f, "{}", char::from_digit(*d as u32, 36).expect("digit below 36"))?;
        }
        Ok(())
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// All masses at one depth, in lexicographic word order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureTable {
    pub base: usize,
    pub depth: usize,
    pub masses: Vec<f64>,
}

impl MeasureTable {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Word with lexicographic position `index`.
    pub fn word(&self, index: usize) -> NAdicInterval {
        let mut digits = vec![0u8; self.depth];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % self.base) as u8;
            rest /= self.base;
        }
        NAdicInterval {
            base: self.base,
            digits,
        }
    }

    pub fn index_of(&self, word: &NAdicInterval) -> usize {
        word.digits
            .iter()
            .fold(0, |acc, &d| acc * self.base + d as usize)
    }

    pub fn mass(&self, word: &NAdicInterval) -> Option<f64> {
        (word.base == self.base && word.depth() == self.depth)
            .then(|| self.masses[self.index_of(word)])
    }

    /// Table one level up, each cell the sum of its `N` children.
    pub fn coarsen(&self) -> Option<Self> {
        (self.depth > 0).then(|| Self {
            base: self.base,
            depth: self.depth - 1,
            masses: self.masses.chunks(self.base).map(|c| c.iter().sum()).collect(),
        })
    }

    /// `max |parent − Σ children|` against a table one level coarser.
    pub fn additivity_residual(&self, parent: &MeasureTable) -> Result<f64> {
        if parent.base != self.base || parent.depth + 1 != self.depth {
            return invalid("parent table must have the same base and depth one less");
        }
        Ok(self
            .masses
            .chunks(self.base)
            .zip(&parent.masses)
            .map(|(kids, p)| (kids.iter().sum::<f64>() - p).abs())
            .fold(0.0, f64::max))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NAdicInterval, f64)> + '_ {
        self.masses.iter().enumerate().map(|(i, &m)| (self.word(i), m))
    }
}

fn clamp(mass: f64) -> f64 {
    if mass < MASS_FLOOR {
        0.0
    } else {
        mass
    }
}

fn check_base(bank: &FilterBank, interval: &NAdicInterval) -> Result<()> {
    if interval.base != bank.n_branches() {
        return invalid(format!(
            "interval is base {} but the bank has N = {}",
            interval.base,
            bank.n_branches()
        ));
    }
    Ok(())
}

fn m_matrices(bank: &FilterBank) -> Vec<DMatrix<Complex64>> {
    restricted_family(bank, Subspace::M)
        .into_iter()
        .map(|op| op.into_matrix())
        .collect()
}

fn orbit(ops: &[DMatrix<Complex64>], digits: &[u8], start: DVector<Complex64>) -> DVector<Complex64> {
    digits.iter().fold(start, |v, &d| &ops[d as usize] * v)
}

/// `F_{i_k} ⋯ F_{i_1} e_0`.
pub fn word_orbit(bank: &FilterBank, interval: &NAdicInterval) -> Result<DVector<Complex64>> {
    check_base(bank, interval)?;
    let ops = m_matrices(bank);
    let dim = ops[0].nrows();
    Ok(orbit(&ops, &interval.digits, basis(dim, 0)))
}

/// `μ0(J) = ‖F_{i_k} ⋯ F_{i_1} e_0‖²`.
pub fn mu0_interval(bank: &FilterBank, interval: &NAdicInterval) -> Result<f64> {
    Ok(clamp(word_orbit(bank, interval)?.norm_squared()))
}

/// `μ_f(J) = ‖S_{i_k}* ⋯ S_{i_1}* f‖²` on full sequences.
pub fn mu_f_interval(bank: &FilterBank, f: &SparseSequence, interval: &NAdicInterval) -> Result<f64> {
    check_base(bank, interval)?;
    if (f.norm() - 1.0).abs() > 1e-10 {
        return invalid(format!("f must have unit norm, got {}", f.norm()));
    }
    Ok(clamp(apply_word_star(bank, &interval.digits, f).norm_sqr()))
}

/// Every depth-`k` mass, capped at [`DEFAULT_GRID_CAP`] cells.
pub fn measure_grid(bank: &FilterBank, depth: usize) -> Result<MeasureTable> {
    measure_grid_capped(bank, depth, DEFAULT_GRID_CAP)
}

pub(crate) fn check_cells(base: usize, depth: usize, cap: u64) -> Result<u64> {
    let cells = (base as u64)
        .checked_pow(depth as u32)
        .filter(|&c| c <= cap)
        .ok_or(Error::ResourceLimit {
            what: "grid cells",
            requested: (base as u64).saturating_pow(depth as u32),
            cap,
        })?;
    Ok(cells)
}

pub fn measure_grid_capped(bank: &FilterBank, depth: usize, cap: u64) -> Result<MeasureTable> {
    let base = bank.n_branches();
    let cells = check_cells(base, depth, cap)?;
    let ops = m_matrices(bank);
    let dim = ops[0].nrows();
    let mut masses = Vec::with_capacity(cells as usize);
    subtree_masses(&ops, basis(dim, 0), depth, &mut masses);
    Ok(MeasureTable {
        base,
        depth,
        masses,
    })
}

/// Depth-first over all children of `v`, pushing leaf masses in lexicographic order.
fn subtree_masses(ops: &[DMatrix<Complex64>], v: DVector<Complex64>, levels: usize, out: &mut Vec<f64>) {
    if levels == 0 {
        out.push(clamp(v.norm_squared()));
        return;
    }
    for op in ops {
        subtree_masses(ops, op * &v, levels - 1, out);
    }
}

/// `|a_0|^{2·#0} |a_{2D−1}|^{2·#1}`, a lower bound for `μ0` on the word.
pub fn lower_bound(bank: &FilterBank, interval: &NAdicInterval) -> Result<f64> {
    if bank.n_branches() != 2 {
        return unsupported("the lower bound is stated for N = 2 banks");
    }
    check_base(bank, interval)?;
    let first = bank.a(0).norm_sqr();
    let last = bank.a(2 * bank.genus() - 1).norm_sqr();
    Ok(interval
        .digits
        .iter()
        .map(|&d| if d == 0 { first } else { last })
        .product())
}

/// `s = −ln|a_0|² / ln 2` when `a_0` strictly dominates the spectrum of `F_0`.
pub fn fractal_scale(bank: &FilterBank) -> Result<Option<f64>> {
    Ok(spectrum_f0(bank)?.fractal_scale)
}

/// Ratios `ρ_n` for `n = 1, …, n_max` with the settling point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioScan {
    /// `ratios[n − 1]` belongs to refinement depth `n`.
    pub ratios: Vec<f64>,
    /// First `n` with `|ρ_n − ρ_{n−1}| < SETTLE_TOLERANCE`.
    pub settled_at: Option<usize>,
    /// `ρ` at the settling point, or at `n_max`.
    pub estimate: f64,
    /// `|ρ_n − ρ_{n−1}|` at that point.
    pub residual: f64,
    /// Limit predicted from the dominant eigendata.
    pub predicted: f64,
}

impl RatioScan {
    fn from_ratios(ratios: Vec<f64>, predicted: f64) -> Self {
        let diffs = |n: usize| (ratios[n - 1] - ratios[n - 2]).abs();
        let settled_at = (2..=ratios.len()).find(|&n| diffs(n) < SETTLE_TOLERANCE);
        let at = settled_at.unwrap_or(ratios.len());
        let residual = if at >= 2 { diffs(at) } else { f64::INFINITY };
        Self {
            estimate: ratios.get(at.wrapping_sub(1)).copied().unwrap_or(f64::NAN),
            ratios,
            settled_at,
            residual,
            predicted,
        }
    }

    pub fn relative_error(&self) -> f64 {
        ((self.estimate - self.predicted) / self.predicted).abs()
    }
}

/// Scaled orbit `(F_0/λ)^n F_word e_0`, `n = 1, …, n_max`, as squared norms.
fn scaled_ratios(f0: &DMatrix<Complex64>, lambda: Complex64, start: DVector<Complex64>, n_max: usize) -> Vec<f64> {
    let mut v = start;
    (1..=n_max)
        .map(|_| {
            v = f0 * &v / lambda;
            v.norm_squared()
        })
        .collect()
}

/// `μ0(word · 0^n) / |a_0|^{2n}` for `n = 1, …, n_max`.
///
/// The predicted limit is `|⟨e_0 | F_word e_0⟩|² ‖e_0 + v‖²`.
pub fn fractal_ratio_scan(bank: &FilterBank, base_word: &NAdicInterval, n_max: usize) -> Result<RatioScan> {
    check_base(bank, base_word)?;
    let data = spectrum_f0(bank)?;
    if data.fractal_scale.is_none() {
        return unsupported(
            "a_0 does not strictly dominate the spectrum of F_0; use daubechies_ratio_scan when 1/√2 dominates",
        );
    }
    if n_max == 0 {
        return invalid("n_max must be at least 1");
    }
    let xi = data.right_vector.expect("dominant data carries ξ");
    let start = word_orbit(bank, base_word)?;
    let ops = m_matrices(bank);
    let lambda = ops[0][(0, 0)];
    let predicted = start[0].norm_sqr() * xi.norm_squared();
    Ok(RatioScan::from_ratios(scaled_ratios(&ops[0], lambda, start, n_max), predicted))
}

/// `μ0(word · 0^n) / N^{-n}` when the dominant eigenvalue of `F_0` is `1/√N`.
///
/// The predicted limit is `|⟨w | F_word e_0⟩|² ‖ξ‖²` with `w = 𝟙/√d`.
pub fn daubechies_ratio_scan(bank: &FilterBank, base_word: &NAdicInterval, n_max: usize) -> Result<RatioScan> {
    check_base(bank, base_word)?;
    if n_max == 0 {
        return invalid("n_max must be at least 1");
    }
    let scale = 1.0 / (bank.n_branches() as f64).sqrt();
    let data = spectrum_f0(bank)?;
    let dominant = data.dominant.expect("non-empty spectrum");
    if !data.strictly_dominant || (dominant - scale).norm() > 1e-9 {
        return unsupported(format!(
            "the dominant eigenvalue of F_0 must be 1/√N = {scale}, got {dominant}"
        ));
    }
    let ops = m_matrices(bank);
    let dim = ops[0].nrows();
    let w = DVector::from_element(dim, Complex64::new(1.0 / (dim as f64).sqrt(), 0.0));
    let eig = dominant_eigendata(&ops[0], Complex64::new(scale, 0.0), &w)?;
    let xi = eig.right_vector.expect("dominant data carries ξ");
    let start = word_orbit(bank, base_word)?;
    let predicted = w.dotc(&start).norm_sqr() * xi.norm_squared();
    Ok(RatioScan::from_ratios(
        scaled_ratios(&ops[0], Complex64::new(scale, 0.0), start, n_max),
        predicted,
    ))
}

/// The printed normalization `w = √2(e_0 + e_{−1} + e_{−2})`: `|⟨w | F_word e_0⟩|²`.
pub fn daubechies_printed_limit(bank: &FilterBank, base_word: &NAdicInterval) -> Result<f64> {
    let s = word_orbit(bank, base_word)?;
    Ok(2.0 * s.sum().norm_sqr())
}

/// Largest density `μ0(J)/|J|` over the depth-`j` subintervals `J` of a dyadic set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityLevel {
    pub depth: usize,
    pub max_density: f64,
    pub argmax: String,
}

/// Maximum density at every depth from `within.depth()` to `depth`.
pub fn unboundedness_scan(bank: &FilterBank, within: &NAdicInterval, depth: usize) -> Result<Vec<DensityLevel>> {
    check_base(bank, within)?;
    if depth < within.depth() {
        return invalid("scan depth is shallower than the interval");
    }
    let base = bank.n_branches();
    check_cells(base, depth - within.depth(), DEFAULT_GRID_CAP)?;
    let ops = m_matrices(bank);
    let mut levels: Vec<DensityLevel> = (within.depth()..=depth)
        .map(|d| DensityLevel {
            depth: d,
            max_density: f64::NEG_INFINITY,
            argmax: String::new(),
        })
        .collect();
    let start = word_orbit(bank, within)?;
    let mut digits = within.digits.clone();
    density_walk(&ops, base, start, &mut digits, within.depth(), depth, &mut levels);
    Ok(levels)
}

fn density_walk(
    ops: &[DMatrix<Complex64>],
    base: usize,
    v: DVector<Complex64>,
    digits: &mut Vec<u8>,
    first: usize,
    last: usize,
    levels: &mut [DensityLevel],
) {
    let k = digits.len();
    let density = clamp(v.norm_squared()) * (base as f64).powi(k as i32);
    let level = &mut levels[k - first];
    if density > level.max_density * (1.0 + 1e-12) {
        level.max_density = density;
        level.argmax = digits.iter().map(|d| char::from(b'0' + d)).collect();
    }
    if k == last {
        return;
    }
    for (d, op) in ops.iter().enumerate() {
        digits.push(d as u8);
        density_walk(ops, base, op * &v, digits, first, last, levels);
        digits.pop();
    }
}

/// `2|a_0|²`, the per-level growth of the density along `[0, 2^{-n})`.
pub fn density_growth_factor(bank: &FilterBank) -> f64 {
    bank.n_branches() as f64 * bank.a(0).norm_sqr()
}
