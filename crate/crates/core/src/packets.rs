//! Wavelet-packet combinatorics: tilings of `ℕ₀` by `[2^p n, 2^p (n+1))`, packet
//! indices, expansion coefficients and cascade synthesis of `φ_n`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, unsupported, Error, Result};
use crate::filters::FilterBank;
use crate::operators::{apply_s_star, SparseSequence};

/// Default coverage horizon for tilings.
pub const DEFAULT_HORIZON: u64 = 1 << 16;

/// Largest word length accepted by [`expansion_coefficients`].
pub const MAX_PACKET_DEPTH: usize = 12;

/// Coefficients smaller than this are dropped from a [`CoefficientMap`].
pub const COEFFICIENT_FLOOR: f64 = 1e-15;

/// Largest number of iterations accepted by [`cascade`].
pub const MAX_CASCADE_ITERATIONS: usize = 20;

/// Largest number of samples produced by [`cascade`].
pub const MAX_CASCADE_SAMPLES: u64 = 1 << 24;

/// A set of `(p, n)` pairs checked against `[0, H)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tiling {
    pairs: Vec<(u32, u64)>,
    horizon: u64,
}

impl Tiling {
    pub fn new(pairs: Vec<(u32, u64)>, horizon: u64) -> Result<Self> {
        if !horizon.is_power_of_two() {
            return invalid(format!("horizon must be a power of 2, got {horizon}"));
        }
        Ok(Self { pairs, horizon })
    }

    /// `{(0,0)} ∪ {(p,1) : 0 ≤ p < log₂ H}`.
    pub fn classic(horizon: u64) -> Result<Self> {
        let mut t = Self::new(vec![(0, 0)], horizon)?;
        t.pairs.extend((0..horizon.trailing_zeros()).map(|p| (p, 1)));
        Ok(t)
    }

    /// `{(0, n) : n < H}`.
    pub fn singletons(horizon: u64) -> Result<Self> {
        let mut t = Self::new(Vec::new(), horizon)?;
        t.pairs.extend((0..horizon).map(|n| (0, n)));
        Ok(t)
    }

    pub fn pairs(&self) -> &[(u32, u64)] {
        &self.pairs
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Splits pair `i` into the two halves `(p−1, 2n)` and `(p−1, 2n+1)`.
    pub fn refine(&self, i: usize) -> Result<Self> {
        let Some(&(p, n)) = self.pairs.get(i) else {
            return invalid(format!("pair index {i} out of range"));
        };
        if p == 0 {
            return invalid("a pair with p = 0 is a single integer and cannot be split");
        }
        let mut pairs = self.pairs.clone();
        pairs.splice(i..=i, [(p - 1, 2 * n), (p - 1, 2 * n + 1)]);
        Self::new(pairs, self.horizon)
    }
}

/// Parses `"p:n,p:n,…"`.
pub fn parse_pairs(text: &str) -> Result<Vec<(u32, u64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (p, n) = item
                .split_once(':')
                .ok_or_else(|| Error::InvalidInput(format!("pair {item:?} is not of the form p:n")))?;
            let p = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad scale in {item:?}")))?;
            let n = n
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad index in {item:?}")))?;
            Ok((p, n))
        })
        .collect()
}

/// Outcome of a tiling check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "at", rename_all = "lowercase")]
pub enum TilingVerdict {
    Valid,
    /// Smallest integer below the horizon covered by no interval.
    Gap(u64),
    /// Smallest integer covered by two intervals.
    Overlap(u64),
}

impl TilingVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Self::Valid)
    }
}

fn interval(p: u32, n: u64) -> (u128, u128) {
    let width = if p >= 127 { u128::MAX } else { 1u128 << p };
    let start = width.saturating_mul(n as u128);
    (start, start.saturating_add(width))
}

/// Checks that the intervals below the horizon cover `[0, H)` exactly once.
///
/// Intervals starting at or above `H` are ignored; one that starts below `H`
/// and ends above it is a [`Error::Horizon`] error.
pub fn validate_tiling(t: &Tiling) -> Result<TilingVerdict> {
    let h = t.horizon as u128;
    let mut spans = Vec::with_capacity(t.pairs.len());
    for &(p, n) in &t.pairs {
        let (start, end) = interval(p, n);
        if start >= h {
            continue;
        }
        if end > h {
            return Err(Error::Horizon {
                start: start as u64,
                end: u64::try_from(end).unwrap_or(u64::MAX),
                horizon: t.horizon,
            });
        }
        spans.push((start as u64, end as u64));
    }
    spans.sort_unstable();
    let mut cursor = 0u64;
    for (start, end) in spans {
        if start > cursor {
            return Ok(TilingVerdict::Gap(cursor));
        }
        if start < cursor {
            return Ok(TilingVerdict::Overlap(start));
        }
        cursor = end;
    }
    Ok(if cursor < t.horizon {
        TilingVerdict::Gap(cursor)
    } else {
        TilingVerdict::Valid
    })
}

/// `m = 2^p n + i_1 + 2 i_2 + ⋯ + 2^{p−1} i_p`.
pub fn packet_index(p: u32, n: u64, word: &[u8]) -> Result<u64> {
    if word.len() != p as usize {
        return invalid(format!("word length {} does not match p = {p}", word.len()));
    }
    if word.iter().any(|&d| d > 1) {
        return invalid("packet digits must be binary");
    }
    let low = word
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &d)| acc | ((d as u64) << j));
    1u64.checked_shl(p)
        .and_then(|w| w.checked_mul(n))
        .and_then(|base| base.checked_add(low))
        .ok_or_else(|| Error::InvalidInput(format!("2^{p}·{n} overflows")))
}

/// `⟨e_j | S_{i_p}* ⋯ S_{i_1}* e_k⟩` for every word of length `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    pub source: i64,
    pub p: usize,
    pub entries: BTreeMap<(Vec<u8>, i64), Complex64>,
}

impl CoefficientMap {
    pub fn total_mass(&self) -> f64 {
        self.entries.values().map(Complex64::norm_sqr).sum()
    }

    /// `Σ_j |c(word, j)|²`.
    pub fn word_mass(&self, word: &[u8]) -> f64 {
        self.entries
            .iter()
            .filter(|((w, _), _)| w.as_slice() == word)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    pub fn get(&self, word: &[u8], j: i64) -> Complex64 {
        self.entries
            .get(&(word.to_vec(), j))
            .copied()
            .unwrap_or_default()
    }
}

impl Serialize for CoefficientMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            word: String,
            j: i64,
            re: f64,
            im: f64,
        }
        #[derive(Serialize)]
        struct Repr {
            source: i64,
            p: usize,
            entries: Vec<Entry>,
        }
        Repr {
            source: self.source,
            p: self.p,
            entries: self
                .entries
                .iter()
                .map(|((w, j), c)| Entry {
                    word: w.iter().map(|d| char::from(b'0' + d)).collect(),
                    j: *j,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

/// Expansion coefficients of `e_k` against every word of length `p`.
pub fn expansion_coefficients(bank: &FilterBank, p: usize, k: i64) -> Result<CoefficientMap> {
    if p > MAX_PACKET_DEPTH {
        return Err(Error::ResourceLimit {
            what: "packet depth",
            requested: p as u64,
            cap: MAX_PACKET_DEPTH as u64,
        });
    }
    let mut entries = BTreeMap::new();
    let mut word = Vec::with_capacity(p);
    coefficient_walk(bank, SparseSequence::basis(k), p, &mut word, &mut entries);
    Ok(CoefficientMap {
        source: k,
        p,
        entries,
    })
}

fn coefficient_walk(
    bank: &FilterBank,
    seq: SparseSequence,
    remaining: usize,
    word: &mut Vec<u8>,
    out: &mut BTreeMap<(Vec<u8>, i64), Complex64>,
) {
    if remaining == 0 {
        for (j, c) in seq.pruned(COEFFICIENT_FLOOR).iter() {
            out.insert((word.clone(), j), c);
        }
        return;
    }
    for (d, branch) in bank.branches().iter().enumerate() {
        word.push(d as u8);
        let next = apply_s_star(branch, bank.n_branches(), &seq);
        coefficient_walk(bank, next, remaining - 1, word, out);
        word.pop();
    }
}

/// Point samples `φ(x_j)` at `x_j = j / resolution` on `[0, 2D − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSamples {
    pub resolution: usize,
    pub support: usize,
    pub values: Vec<Complex64>,
}

impl CascadeSamples {
    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.resolution as f64
    }

    /// `Σ φ(x_j) / resolution`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.resolution as f64
    }

    /// `Σ conj(φ(x_j)) ψ(x_j) / resolution`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            / self.resolution as f64
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }
}

/// Approximates `φ_n` on a dyadic grid.
///
/// Starts from `1_{[0,1)}`, applies `φ ↦ √2 Σ a_k φ(2x − k)` `iterations` times and then
/// the two-scale map `T_d` for each binary digit of `n`, most significant first, where
/// `T_d` uses branch `d`.
pub fn cascade(bank: &FilterBank, n: u64, iterations: usize, resolution: usize) -> Result<CascadeSamples> {
    if bank.n_branches() != 2 {
        return unsupported("cascade synthesis is implemented for N = 2 banks");
    }
    if iterations > MAX_CASCADE_ITERATIONS {
        return Err(Error::ResourceLimit {
            what: "cascade iterations",
            requested: iterations as u64,
            cap: MAX_CASCADE_ITERATIONS as u64,
        });
    }
    if !resolution.is_power_of_two() {
        return invalid(format!("resolution must be a power of 2, got {resolution}"));
    }
    let support = (2 * bank.genus() - 1).max(1);
    let len = support as u64 * resolution as u64;
    if len > MAX_CASCADE_SAMPLES {
        return Err(Error::ResourceLimit {
            what: "cascade samples",
            requested: len,
            cap: MAX_CASCADE_SAMPLES,
        });
    }
    let len = len as usize;
    let mut values: Vec<Complex64> = (0..len)
        .map(|j| if j < resolution { Complex64::new(1.0, 0.0) } else { Complex64::default() })
        .collect();
    // 2a/√2 rather than √2·a keeps 2·(1/√2)/√2 = 1 exact.
    let two_scale = |coeffs: &[Complex64], f: &[Complex64]| -> Vec<Complex64> {
        let scaled: Vec<Complex64> = coeffs.iter().map(|c| c * 2.0 / std::f64::consts::SQRT_2).collect();
        (0..len)
            .map(|j| {
                scaled
                    .iter()
                    .enumerate()
                    .filter_map(|(k, c)| {
                        let idx = 2 * j as i64 - (k * resolution) as i64;
                        usize::try_from(idx).ok().and_then(|i| f.get(i)).map(|v| c * v)
                    })
                    .sum::<Complex64>()
            })
            .collect()
    };
    for _ in 0..iterations {
        values = two_scale(bank.lowpass(), &values);
    }
    if n > 0 {
        for bit in (0..64 - n.leading_zeros()).rev() {
            let d = ((n >> bit) & 1) as usize;
            values = two_scale(&bank.branches()[d], &values);
        }
    }
    Ok(CascadeSamples {
        resolution,
        support,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::beta_family;
    use crate::measure::{mu_f_interval, NAdicInterval};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn three_scale_tiling() -> Tiling {
        let mut pairs: Vec<(u32, u64)> = (0..4).map(|n| (2, n)).collect();
        pairs.extend((1..4).map(|n| (4, n)));
        pairs.extend((1..4).map(|n| (6, n)));
        Tiling::new(pairs, 256).unwrap()
    }

    #[test]
    fn standard_tilings_are_valid() {
        assert_eq!(validate_tiling(&Tiling::classic(16).unwrap()).unwrap(), TilingVerdict::Valid);
        assert_eq!(validate_tiling(&Tiling::classic(DEFAULT_HORIZON).unwrap()).unwrap(), TilingVerdict::Valid);
        assert_eq!(validate_tiling(&Tiling::singletons(256).unwrap()).unwrap(), TilingVerdict::Valid);
        assert_eq!(validate_tiling(&three_scale_tiling()).unwrap(), TilingVerdict::Valid);
    }

    #[test]
    fn constructed_violations() {
        let dup = Tiling::new(vec![(1, 0), (1, 0)], 4).unwrap();
        assert_eq!(validate_tiling(&dup).unwrap(), TilingVerdict::Overlap(0));
        let nested = Tiling::new(vec![(1, 0), (0, 1)], 4).unwrap();
        assert_eq!(validate_tiling(&nested).unwrap(), TilingVerdict::Overlap(1));
        let short = Tiling::new(vec![(1, 0)], 4).unwrap();
        assert_eq!(validate_tiling(&short).unwrap(), TilingVerdict::Gap(2));
        let without_zero = Tiling::new((0..4).map(|p| (p, 1)).collect(), 16).unwrap();
        assert_eq!(validate_tiling(&without_zero).unwrap(), TilingVerdict::Gap(0));
    }

    #[test]
    fn horizon_rules() {
        let crossing = Tiling::new(vec![(0, 0), (0, 1), (1, 1)], 2).unwrap();
        assert!(matches!(validate_tiling(&crossing), Ok(TilingVerdict::Valid)));
        let crossing = Tiling::new(vec![(0, 0), (0, 1), (2, 0)], 2).unwrap();
        assert!(matches!(validate_tiling(&crossing), Err(Error::Horizon { start: 0, end: 4, horizon: 2 })));
        assert!(Tiling::new(vec![], 12).is_err());
        assert!(matches!(
            validate_tiling(&Tiling::new(vec![(200, 0)], 8).unwrap()),
            Err(Error::Horizon { .. })
        ));
    }

    #[test]
    fn refinement_preserves_validity() {
        let t = three_scale_tiling();
        for i in 0..t.pairs().len() {
            let r = t.refine(i).unwrap();
            assert_eq!(validate_tiling(&r).unwrap(), TilingVerdict::Valid);
        }
        assert!(Tiling::singletons(4).unwrap().refine(0).is_err());
    }

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pairs("0:0, 0:1,1:1").unwrap(), vec![(0, 0), (0, 1), (1, 1)]);
        assert!(parse_pairs("0-0").is_err());
        assert!(parse_pairs("x:1").is_err());
    }

    #[test]
    fn packet_index_examples() {
        assert_eq!(packet_index(0, 7, &[]).unwrap(), 7);
        assert_eq!(packet_index(2, 0, &[1, 1]).unwrap(), 3);
        let mut hit: Vec<u64> = (0..8u8)
            .map(|w| packet_index(3, 2, &[w & 1, (w >> 1) & 1, (w >> 2) & 1]).unwrap())
            .collect();
        hit.sort_unstable();
        assert_eq!(hit, (16..24).collect::<Vec<_>>());
        assert!(packet_index(2, 0, &[1]).is_err());
        assert!(packet_index(1, 0, &[2]).is_err());
    }

    #[test]
    fn packet_index_is_bijective() {
        for p in 0..=10u32 {
            let n = 3;
            let mut seen = vec![false; 1 << p];
            for w in 0..(1u64 << p) {
                let word: Vec<u8> = (0..p).map(|j| ((w >> j) & 1) as u8).collect();
                let m = packet_index(p, n, &word).unwrap();
                let slot = (m - (n << p)) as usize;
                assert!(!seen[slot]);
                seen[slot] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn haar_coefficients() {
        let haar = FilterBank::haar_variant(1).unwrap();
        let map = expansion_coefficients(&haar, 1, 0).unwrap();
        assert_eq!(map.entries.len(), 2);
        assert_abs_diff_eq!(map.get(&[0], 0).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(map.get(&[1], -1).re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn coefficients_are_complete_and_match_marginals() {
        for bank in [FilterBank::daubechies(), beta_family(0.6), crate::fractal::cantor_filter()] {
            for k in [0, 3, -2] {
                let map = expansion_coefficients(&bank, 3, k).unwrap();
                assert_abs_diff_eq!(map.total_mass(), 1.0, epsilon = 1e-12);
                let base = bank.n_branches() as u8;
                for w in 0..(base as usize).pow(3) {
                    let word = [(w / (base as usize).pow(2)) as u8, (w / base as usize % base as usize) as u8, (w % base as usize) as u8];
                    let interval = NAdicInterval::new(bank.n_branches(), word.to_vec()).unwrap();
                    let mu = mu_f_interval(&bank, &SparseSequence::basis(k), &interval).unwrap();
                    assert_abs_diff_eq!(map.word_mass(&word), mu, epsilon = 1e-12);
                }
            }
        }
        assert!(matches!(
            expansion_coefficients(&FilterBank::haar(), 13, 0),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn haar_cascade_shapes() {
        let haar = FilterBank::haar();
        let phi = cascade(&haar, 0, 1, 64).unwrap();
        assert_eq!(phi.support, 1);
        assert!(phi.values.iter().all(|v| *v == Complex64::new(1.0, 0.0)), "{:?}", &phi.values[..4]);

        let psi = cascade(&haar, 1, 5, 64).unwrap();
        for (j, v) in psi.values.iter().enumerate() {
            let want = if psi.x(j) < 0.5 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(v.re, want, epsilon = 1e-15);
        }
        assert!(psi.is_real());
    }

    #[test]
    fn haar_packets_are_orthonormal_walsh_functions() {
        let haar = FilterBank::haar();
        let fns: Vec<_> = (0..4).map(|n| cascade(&haar, n, 3, 256).unwrap()).collect();
        for f in &fns {
            assert!(f.values.iter().all(|v| v.im == 0.0 && [0.0, 1.0, -1.0].contains(&v.re)));
        }
        for (i, f) in fns.iter().enumerate() {
            for (j, g) in fns.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!((f.inner(g) - want).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cascade_integral_is_one() {
        for bank in [FilterBank::daubechies(), beta_family(0.0), beta_family(2.0)] {
            let phi = cascade(&bank, 0, 12, 1024).unwrap();
            assert_abs_diff_eq!((phi.integral() - 1.0).norm(), 0.0, epsilon = 1e-8);
            let psi = cascade(&bank, 1, 12, 1024).unwrap();
            assert_abs_diff_eq!(psi.integral().norm(), 0.0, epsilon = 1e-8);
        }
        assert!(cascade(&FilterBank::daubechies(), 0, 21, 64).is_err());
        assert!(cascade(&FilterBank::daubechies(), 0, 3, 100).is_err());
        assert!(cascade(&crate::fractal::cantor_filter(), 0, 3, 64).is_err());
    }
}
