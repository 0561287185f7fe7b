//! Ring Hamiltonians in the two flux gauges, the gauge map between them,
//! and the antilinear PT action on site amplitudes.
//!
//! Sites are 0-based internally. Logical (1-based) site 1 carries gain
//! `+iγ` and logical site `N+1` carries loss `-iγ`; internally these are
//! indices `0` and `N`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Where the Peierls phase of the enclosed flux lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Gauge {
    /// Every link carries `φ = Φ / 2N`.
    #[default]
    UniformPhase,
    /// All of `Φ` sits on the link between the first and last site.
    ConcentratedLink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingParams {
    /// Half the number of sites; the ring has `2 * half_size` sites.
    pub half_size: usize,
    /// Gain/loss rate in units of the hopping strength.
    pub gamma: f64,
    /// Total enclosed flux in radians. Never reduced modulo `2π` here.
    pub flux: f64,
    pub gauge: Gauge,
}

impl RingParams {
    pub fn new(half_size: usize, gamma: f64, flux: f64) -> Result<Self> {
        let params = RingParams {
            half_size,
            gamma,
            flux,
            gauge: Gauge::UniformPhase,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_size < 2 {
            return Err(Error::domain(format!(
                "ring half-size N must be at least 2, got {}",
                self.half_size
            )));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::domain(format!(
                "gain/loss must be finite and non-negative, got {}",
                self.gamma
            )));
        }
        if !self.flux.is_finite() {
            return Err(Error::domain(format!("flux must be finite, got {}", self.flux)));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        2 * self.half_size
    }

    /// Per-link phase `Φ / 2N` of the uniform gauge.
    pub fn link_phase(&self) -> f64 {
        self.flux / self.sites() as f64
    }

    /// Flux reduced into `[0, 2π)`, for reporting only.
    pub fn reduced_flux(&self) -> f64 {
        self.flux.rem_euclid(TAU)
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(ComplexMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &other.0)
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let n = self.dim();
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect())
    }

    /// Largest entrywise deviation from another matrix of the same size.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn put_gain_loss(h: &mut ComplexMatrix, params: &RingParams) {
    let n = params.half_size;
    h.set(0, 0, Complex64::new(0.0, params.gamma));
    h.set(n, n, Complex64::new(0.0, -params.gamma));
}

/// Ring Hamiltonian with the flux spread evenly over all `2N` links.
pub fn build_flux_hamiltonian(params: &RingParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let d = params.sites();
    let forward = -Complex64::from_polar(1.0, params.link_phase());
    let mut h = ComplexMatrix::zeros(d);
    for j in 0..d {
        let next = (j + 1) % d;
        h.set(j, next, forward);
        h.set(next, j, forward.conj());
    }
    put_gain_loss(&mut h, params);
    Ok(h)
}

/// Ring Hamiltonian with real hoppings except on the closing link, which
/// carries the whole flux: entry `(1, 2N)` is `-e^{-iΦ}`.
pub fn build_sc_hamiltonian(params: &RingParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let d = params.sites();
    let one = Complex64::new(-1.0, 0.0);
    let mut h = ComplexMatrix::zeros(d);
    for j in 0..d - 1 {
        h.set(j, j + 1, one);
        h.set(j + 1, j, one);
    }
    let closing = -Complex64::from_polar(1.0, -params.flux);
    h.set(0, d - 1, closing);
    h.set(d - 1, 0, closing.conj());
    put_gain_loss(&mut h, params);
    Ok(h)
}

/// Builds the Hamiltonian in the gauge named by `params.gauge`.
pub fn build_hamiltonian(params: &RingParams) -> Result<ComplexMatrix> {
    match params.gauge {
        Gauge::UniformPhase => build_flux_hamiltonian(params),
        Gauge::ConcentratedLink => build_sc_hamiltonian(params),
    }
}

/// Conjugates a uniform-gauge Hamiltonian by `D = diag(e^{iφ j})`,
/// `j = 1..2N`, returning `D H D⁻¹`, which is the concentrated-link form.
pub fn gauge_transform(matrix: &ComplexMatrix, params: &RingParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let d = params.sites();
    if matrix.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: matrix.dim(),
        });
    }
    let phi = params.link_phase();
    // (D H D⁻¹)_{rc} = e^{iφ(r-c)} H_{rc}; the difference is formed before the
    // exponential so the corner picks up exactly e^{-iφ(2N-1)}.
    let mut out = matrix.clone();
    for r in 0..d {
        for c in 0..d {
            if r != c {
                let factor = Complex64::from_polar(1.0, phi * (r as f64 - c as f64));
                out.set(r, c, matrix.get(r, c) * factor);
            }
        }
    }
    Ok(out)
}

/// Site permutation of the parity operator, 0-based: `j ↦ (N - j) mod 2N`
/// (logical `j ↦ N + 2 - j`). It is an involution.
pub fn parity_index(half_size: usize, site: usize) -> usize {
    let d = 2 * half_size;
    (half_size + d - site % d) % d
}

/// Applies `PT`: output at site `j` is the conjugate of the input at the
/// parity image of `j`.
pub fn apply_pt(state: &[Complex64], half_size: usize) -> Result<Vec<Complex64>> {
    let d = 2 * half_size;
    if state.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: state.len(),
        });
    }
    Ok((0..d)
        .map(|j| state[parity_index(half_size, j)].conj())
        .collect())
}

/// `conj(P H P⁻¹)`; equals `H` for the uniform-gauge Hamiltonian.
pub fn pt_conjugate(matrix: &ComplexMatrix, half_size: usize) -> Result<ComplexMatrix> {
    let d = 2 * half_size;
    if matrix.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: matrix.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(d);
    for r in 0..d {
        for c in 0..d {
            let src = matrix.get(parity_index(half_size, r), parity_index(half_size, c));
            out.set(r, c, src.conj());
        }
    }
    Ok(out)
}
