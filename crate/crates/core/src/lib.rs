//! Analysis of quadrature-mirror filter banks through their Cuntz-relation
//! representations on `ℓ²(ℤ)`.
//!
//! A filter bank `m_0, …, m_{N-1}` defines isometries `(S_i f)(z) = m_i(z) f(z^N)`.
//! Compressing the adjoints `S_i*` to a finite window of basis vectors gives small
//! matrices `F_i`, and products of those matrices compute the
//! Coifman–Meyer–Wickerhauser measure `μ0` of every `N`-adic interval.
//!
//! Modules:
//! - [`filters`]: filter construction (β-family, Daubechies, Haar variants) and validation.
//! - [`operators`]: `S_i`, `S_i*` on sparse sequences and their restrictions to `L`, `M`.
//! - [`spectral`]: spectra of the restricted operators and the dominant-eigenvalue limit.
//! - [`measure`]: `μ0` / `μ_f` on `N`-adic intervals, grids, bounds and scale scans.
//! - [`packets`]: wavelet-packet tilings, expansion coefficients and cascade synthesis.
//! - [`fractal`]: the three-branch Cantor representation with exact dyadic masses.

pub mod error;
pub mod filters;
pub mod fractal;
pub mod measure;
pub mod operators;
pub mod packets;
pub mod spectral;

pub use error::{Error, Result};
pub use filters::FilterBank;
pub use measure::{MeasureTable, NAdicInterval};
pub use operators::{RestrictedOperator, SparseSequence, Subspace};
pub use spectral::SpectralData;

pub use num_complex::Complex64;
