//! Spectra of the restricted operators and the dominant-eigenvalue limit
//! `a^{-n} F^n x → ⟨w|x⟩ ξ`.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::filters::FilterBank;
use crate::operators::restrict_to_m;

/// Relative margin by which the dominant modulus must beat the runner-up.
pub const DOMINANCE_MARGIN: f64 = 1e-9;

/// Smallest singular value of `a − G` below which the resolvent counts as singular.
pub const RESOLVENT_TOLERANCE: f64 = 1e-10;

/// Allowed deviation from an exact left eigenpair in [`dominant_eigendata`].
pub const EIGENPAIR_TOLERANCE: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigen-information about a restricted operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    /// The eigenvalue of largest modulus.
    pub dominant: Option<Complex64>,
    /// Whether `dominant` beats every other eigenvalue by [`DOMINANCE_MARGIN`].
    pub strictly_dominant: bool,
    /// Unit `w` with `F* w = conj(a) w`.
    pub left_vector: Option<DVector<Complex64>>,
    /// `ξ` with `F ξ = a ξ` and `⟨w|ξ⟩ = 1`.
    pub right_vector: Option<DVector<Complex64>>,
    /// `−ln|a_0|² / ln 2`, set only when `a_0` is the strictly dominant eigenvalue.
    pub fractal_scale: Option<f64>,
}

impl SpectralData {
    /// `v = ξ − e_0` when the left vector is `e_0`.
    pub fn offset(&self) -> Option<DVector<Complex64>> {
        let w = self.left_vector.as_ref()?;
        let xi = self.right_vector.as_ref()?;
        let e0 = basis(w.len(), 0);
        ((w - &e0).norm() == 0.0).then(|| xi - e0)
    }
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn pairs(v: &DVector<Complex64>) -> Vec<[f64; 2]> {
    v.iter().map(pair).collect()
}

impl Serialize for SpectralData {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            eigenvalues: Vec<[f64; 2]>,
            dominant: Option<[f64; 2]>,
            strictly_dominant: bool,
            left_vector: Option<Vec<[f64; 2]>>,
            right_vector: Option<Vec<[f64; 2]>>,
            fractal_scale: Option<f64>,
            v: Option<Vec<[f64; 2]>>,
            v_norm_sqr: Option<f64>,
        }
        let v = self.offset();
        Repr {
            eigenvalues: self.eigenvalues.iter().map(pair).collect(),
            dominant: self.dominant.as_ref().map(pair),
            strictly_dominant: self.strictly_dominant,
            left_vector: self.left_vector.as_ref().map(pairs),
            right_vector: self.right_vector.as_ref().map(pairs),
            fractal_scale: self.fractal_scale,
            v_norm_sqr: v.as_ref().map(|v| v.norm_squared()),
            v: v.as_ref().map(pairs),
        }
        .serialize(serializer)
    }
}

pub(crate) fn basis(dim: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(dim, ZERO);
    v[i] = ONE;
    v
}

fn sort_by_modulus(values: &mut [Complex64]) {
    values.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(y.re.total_cmp(&x.re)));
}

/// Numeric eigenvalues from a complex Schur decomposition, by decreasing modulus.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if m.is_empty() || !m.is_square() {
        return Err(Error::Internal(format!(
            "eigenvalues of a {}×{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut values: Vec<Complex64> = m
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Internal("Schur form has no eigenvalues".into()))?
        .iter()
        .copied()
        .collect();
    sort_by_modulus(&mut values);
    Ok(values)
}

/// Roots of `(λ − ā_0)(λ² − (ā_1 + ā_2)λ + ā_1ā_2 − ā_0ā_3)`, the characteristic
/// polynomial of `F_0` for a genus-2 two-branch bank.
pub fn closed_form_spectrum_d2(bank: &FilterBank) -> Result<Vec<Complex64>> {
    if bank.n_branches() != 2 || bank.genus() != 2 {
        return invalid(format!(
            "closed-form spectrum needs N = 2, D = 2 (got N = {}, D = {})",
            bank.n_branches(),
            bank.genus()
        ));
    }
    let a: Vec<Complex64> = (0..4).map(|k| bank.a(k).conj()).collect();
    let b = a[1] + a[2];
    let c = a[1] * a[2] - a[0] * a[3];
    let disc = (b * b - 4.0 * c).sqrt();
    let mut values = vec![a[0], (b + disc) / 2.0, (b - disc) / 2.0];
    sort_by_modulus(&mut values);
    Ok(values)
}

/// `{a_0(β), 1/√2, (sin β − cos β)/2}`.
pub fn beta_spectrum(beta: f64) -> [f64; 3] {
    let (s, c) = beta.sin_cos();
    [(1.0 + 2f64.sqrt() * c) / (2.0 * 2f64.sqrt()), FRAC_1_SQRT_2, (s - c) / 2.0]
}

/// The largest-modulus value and whether it is strictly dominant. Input sorted as by [`eigenvalues`].
pub fn dominance(sorted: &[Complex64]) -> Option<(Complex64, bool)> {
    let first = *sorted.first()?;
    let strict = match sorted.get(1) {
        None => first.norm() > 0.0,
        Some(second) => first.norm() - second.norm() > DOMINANCE_MARGIN * first.norm(),
    };
    Some((first, strict))
}

/// `(eigenvalue, unit)` of the smallest singular value of `m`, with the unit right singular vector.
fn near_null_vector(m: &DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty matrix");
    let v = v_t.row(idx).adjoint();
    (sigma, v.normalize())
}

/// Unit `w` with `F* w ≈ conj(a) w`.
pub fn left_eigenvector(f: &DMatrix<Complex64>, a: Complex64) -> DVector<Complex64> {
    let shifted = f.adjoint() - DMatrix::identity(f.nrows(), f.ncols()) * a.conj();
    near_null_vector(&shifted).1
}

/// Unit `x` with `F x ≈ a x`.
pub fn right_eigenvector(f: &DMatrix<Complex64>, a: Complex64) -> DVector<Complex64> {
    let shifted = f - DMatrix::identity(f.nrows(), f.ncols()) * a;
    near_null_vector(&shifted).1
}

/// Spectral data of `F_0 = S_0*|_M`.
///
/// Genus-2 two-branch banks use [`closed_form_spectrum_d2`]; everything else goes
/// through [`eigenvalues`]. When the dominant eigenvalue is `F_0[0,0] = ā_0` the left
/// vector is `e_0`, otherwise it is computed numerically.
pub fn spectrum_f0(bank: &FilterBank) -> Result<SpectralData> {
    let f = restrict_to_m(bank, 0)?.into_matrix();
    let eigs = if bank.n_branches() == 2 && bank.genus() == 2 {
        closed_form_spectrum_d2(bank)?
    } else {
        eigenvalues(&f)?
    };
    let Some((a, strict)) = dominance(&eigs) else {
        return Err(Error::Internal("empty spectrum".into()));
    };
    let mut data = SpectralData {
        eigenvalues: eigs,
        dominant: Some(a),
        strictly_dominant: strict,
        left_vector: None,
        right_vector: None,
        fractal_scale: None,
    };
    if !strict {
        return Ok(data);
    }
    let corner = f[(0, 0)];
    let corner_is_dominant = (a - corner).norm() <= 1e-9 * a.norm().max(1.0);
    let first_row_is_corner = (1..f.ncols()).all(|c| f[(0, c)] == ZERO);
    let w = if corner_is_dominant && first_row_is_corner {
        basis(f.nrows(), 0)
    } else {
        left_eigenvector(&f, a)
    };
    let eig = dominant_eigendata(&f, a, &w)?;
    data.left_vector = eig.left_vector;
    data.right_vector = eig.right_vector;
    if corner_is_dominant && bank.n_branches() == 2 {
        data.fractal_scale = Some(-corner.norm_sqr().ln() / LN_2);
    }
    Ok(data)
}

/// `‖𝟙 F_0 − (1/√2) 𝟙‖` for the all-ones row vector.
pub fn left_ones_check(bank: &FilterBank) -> Result<f64> {
    let f = restrict_to_m(bank, 0)?.into_matrix();
    let scale = 1.0 / (bank.n_branches() as f64).sqrt();
    let residual: f64 = f
        .column_iter()
        .map(|col| (col.sum() - scale).norm_sqr())
        .sum();
    Ok(residual.sqrt())
}

/// Builds `ξ = w + B'(a − G)^{-1} η` from the split `ℂw ⊕ M'`, where the columns of
/// `B'` are an orthonormal basis of `w^⊥`, `G = B'* F B'` and `η = B'* F w`.
pub fn dominant_eigendata(
    f: &DMatrix<Complex64>,
    a: Complex64,
    w: &DVector<Complex64>,
) -> Result<SpectralData> {
    let d = f.nrows();
    if !f.is_square() || d == 0 {
        return invalid(format!("operator must be square, got {}×{}", f.nrows(), f.ncols()));
    }
    if w.len() != d {
        return invalid(format!("left vector has length {}, operator has dimension {d}", w.len()));
    }
    if (w.norm() - 1.0).abs() > EIGENPAIR_TOLERANCE {
        return invalid(format!("left vector must be a unit vector, got norm {}", w.norm()));
    }
    let scale = f.norm().max(1.0);
    let left_residual = (f.adjoint() * w - w * a.conj()).norm();
    if left_residual > EIGENPAIR_TOLERANCE * scale {
        return invalid(format!(
            "w is not a left eigenvector for {a}: ‖F*w − conj(a)w‖ = {left_residual:.3e}"
        ));
    }
    let xi = if d == 1 {
        w.clone()
    } else {
        let mut stacked = DMatrix::from_element(d, d + 1, ZERO);
        stacked.set_column(0, w);
        stacked
            .view_mut((0, 1), (d, d))
            .copy_from(&DMatrix::<Complex64>::identity(d, d));
        let q = stacked.qr().q();
        let b = q.columns(1, d - 1).into_owned();
        let g = b.adjoint() * f * &b;
        let eta = b.adjoint() * (f * w);
        let resolvent = DMatrix::identity(d - 1, d - 1) * a - &g;
        let (sigma, _) = near_null_vector(&resolvent);
        if sigma < RESOLVENT_TOLERANCE * scale {
            return Err(Error::SingularResolvent {
                value: format!("{a}"),
                distance: sigma,
            });
        }
        let y = resolvent
            .lu()
            .solve(&eta)
            .ok_or_else(|| Error::SingularResolvent {
                value: format!("{a}"),
                distance: sigma,
            })?;
        w + b * y
    };
    let eigs = eigenvalues(f)?;
    let strict = dominance(&eigs).is_some_and(|(top, strict)| strict && (top - a).norm() < 1e-8 * scale);
    Ok(SpectralData {
        eigenvalues: eigs,
        dominant: Some(a),
        strictly_dominant: strict,
        left_vector: Some(w.clone()),
        right_vector: Some(xi),
        fractal_scale: None,
    })
}

/// `a^{-n} F^n x` computed as `n` steps of `x ← F x / a`, and its distance to `⟨w|x⟩ ξ`.
pub fn power_limit(
    f: &DMatrix<Complex64>,
    a: Complex64,
    w: &DVector<Complex64>,
    xi: &DVector<Complex64>,
    x: &DVector<Complex64>,
    n: usize,
) -> (DVector<Complex64>, f64) {
    let target = xi * w.dotc(x);
    let mut y = x.clone();
    for _ in 0..n {
        y = f * y / a;
    }
    let err = (&y - target).norm();
    (y, err)
}

/// Errors `‖a^{-n} F^n x − ⟨w|x⟩ ξ‖` for `n = 1, …, n_max`.
pub fn power_errors(
    f: &DMatrix<Complex64>,
    a: Complex64,
    w: &DVector<Complex64>,
    xi: &DVector<Complex64>,
    x: &DVector<Complex64>,
    n_max: usize,
) -> Vec<f64> {
    let target = xi * w.dotc(x);
    let mut y = x.clone();
    (1..=n_max)
        .map(|_| {
            y = f * &y / a;
            (&y - &target).norm()
        })
        .collect()
}

/// `n^{d−1} ρ^n`.
pub fn decay_envelope(n: usize, d: usize, rho: f64) -> f64 {
    (n as f64).powi(d as i32 - 1) * rho.powi(n as i32)
}

/// Smallest `C` with `errors[n−1] ≤ C n^{d−1} ρ^n` for every `n` in `ns`.
pub fn fit_decay_constant(errors: &[f64], ns: impl IntoIterator<Item = usize>, d: usize, rho: f64) -> f64 {
    ns.into_iter()
        .map(|n| errors[n - 1] / decay_envelope(n, d, rho))
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ln errors[n−1]` against `n` over `ns`.
pub fn log_error_slope(errors: &[f64], ns: impl IntoIterator<Item = usize>) -> f64 {
    let pts: Vec<(f64, f64)> = ns
        .into_iter()
        .map(|n| (n as f64, errors[n - 1].ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
