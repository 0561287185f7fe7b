//! Dense non-Hermitian eigensolver and its characteristic-polynomial oracle.
//!
//! The solver balances the matrix, reduces it to Hessenberg form and runs a
//! Wilkinson-shifted complex QR iteration. Every returned eigenvalue carries
//! a backward-error residual `σ_min(H - λI) / max|H_ij|`.
//!
//! Near an exceptional point of order `m` the computed eigenvalues scatter
//! by roughly `(ε‖H‖)^{1/m}` around the true value while their mean stays
//! accurate to `O(ε‖H‖)`. Clusters whose spread is within that round-off
//! floor are therefore reported at their mean.

mod charpoly;
mod dd;
mod qr;

pub use charpoly::{char_poly, CharPoly, MAX_CHAR_POLY_DIM};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::ComplexMatrix;
use crate::Result;

/// Advertised backward-error tolerance, relative to the max-norm of `H`.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Relative singular-value cutoff for numerical rank decisions.
pub const RANK_CUTOFF: f64 = 1e-7;
/// Eigenvalues closer than this are grouped when collecting eigenvectors.
pub const CLUSTER_GAP: f64 = 1e-6;
/// QR sweeps allowed per eigenvalue.
pub const SWEEPS_PER_EIGENVALUE: usize = 60;

/// Highest coalescence order the cluster merge looks for.
const MAX_MERGE_ORDER: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    QrIteration,
    CharPolyOracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub source: SpectrumSource,
    pub converged: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    pub fn sum_of_squares(&self) -> Complex64 {
        self.eigenvalues.iter().map(|z| z * z).sum()
    }

    pub fn product(&self) -> Complex64 {
        self.eigenvalues.iter().product()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn conjugated(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|z| z.conj()).collect()
    }

    pub fn negated(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|z| -z).collect()
    }
}

/// Eigenvalues plus one unit right eigenvector per eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub spectrum: Spectrum,
    /// `vectors[i]` belongs to `spectrum.eigenvalues[i]`. Inside a defective
    /// cluster the available independent vectors are reused.
    pub vectors: Vec<Vec<Complex64>>,
    /// Dimension of the numerical null space of `H - λI` for the cluster
    /// holding each eigenvalue.
    pub geometric_multiplicity: Vec<usize>,
    /// Number of eigenvalues in the cluster holding each eigenvalue.
    pub algebraic_multiplicity: Vec<usize>,
}

pub(crate) fn sort_lexicographic(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Single-linkage grouping of points closer than `radius`. Groups are
/// returned in order of their smallest index.
pub fn cluster_indices(values: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn diameter(values: &[Complex64], group: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, &i) in group.iter().enumerate() {
        for &j in &group[a + 1..] {
            d = d.max((values[i] - values[j]).norm());
        }
    }
    d
}

/// Spread below which `order` computed eigenvalues cannot be told apart
/// from a single defective eigenvalue.
fn roundoff_floor(dim: usize, scale: f64, order: i32) -> f64 {
    (64.0 * dim as f64 * f64::EPSILON * scale).powf(1.0 / order as f64)
}

fn merge_roundoff_clusters(values: &mut [Complex64], scale: f64) {
    let n = values.len();
    if n < 2 || scale == 0.0 {
        return;
    }
    let link = roundoff_floor(n, scale, MAX_MERGE_ORDER);
    for group in cluster_indices(values, link) {
        if group.len() < 2 {
            continue;
        }
        let order = (group.len() as i32).min(MAX_MERGE_ORDER);
        if diameter(values, &group) <= 2.0 * roundoff_floor(n, scale, order) {
            let mean = group.iter().map(|&i| values[i]).sum::<Complex64>() / group.len() as f64;
            for &i in &group {
                values[i] = mean;
            }
        }
    }
}

pub fn singular_values(matrix: &DMatrix<Complex64>) -> Vec<f64> {
    let mut s: Vec<f64> = matrix.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm (largest singular value).
pub fn norm2(matrix: &ComplexMatrix) -> f64 {
    singular_values(matrix.as_matrix()).first().copied().unwrap_or(0.0)
}

/// Number of singular values strictly above `cutoff`.
pub fn numerical_rank(matrix: &ComplexMatrix, cutoff: f64) -> usize {
    singular_values(matrix.as_matrix())
        .into_iter()
        .filter(|&s| s > cutoff)
        .count()
}

pub(crate) fn shifted(matrix: &ComplexMatrix, lambda: Complex64) -> DMatrix<Complex64> {
    let mut m = matrix.as_matrix().clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= lambda;
    }
    m
}

/// `σ_min(H - λI) / max|H_ij|`.
pub fn residual(matrix: &ComplexMatrix, lambda: Complex64) -> f64 {
    let smin = singular_values(&shifted(matrix, lambda))
        .last()
        .copied()
        .unwrap_or(0.0);
    let scale = matrix.max_norm();
    if scale == 0.0 { smin } else { smin / scale }
}

fn qr_eigenvalues(matrix: &ComplexMatrix) -> (Vec<Complex64>, bool) {
    let mut work = matrix.as_matrix().clone();
    qr::balance(&mut work);
    qr::reduce_to_hessenberg(&mut work);
    let budget = SWEEPS_PER_EIGENVALUE * matrix.dim().max(1);
    let out = qr::hessenberg_qr(&mut work, budget);
    (out.eigenvalues, out.converged)
}

fn finish(matrix: &ComplexMatrix, mut values: Vec<Complex64>, converged: bool, source: SpectrumSource) -> Spectrum {
    merge_roundoff_clusters(&mut values, matrix.as_matrix().norm());
    sort_lexicographic(&mut values);
    let residuals: Vec<f64> = values.iter().map(|&z| residual(matrix, z)).collect();
    let converged = converged && residuals.iter().all(|&r| r <= RESIDUAL_TOL);
    Spectrum {
        eigenvalues: values,
        residuals,
        source,
        converged,
    }
}

/// All eigenvalues with algebraic multiplicity.
///
/// Never fails: if the iteration budget runs out, or any residual exceeds
/// [`RESIDUAL_TOL`], the best estimates are returned with
/// `converged == false`.
pub fn eigenvalues(matrix: &ComplexMatrix) -> Spectrum {
    let (values, converged) = qr_eigenvalues(matrix);
    finish(matrix, values, converged, SpectrumSource::QrIteration)
}

/// Eigenvalues from the roots of the characteristic polynomial.
pub fn oracle_eigenvalues(matrix: &ComplexMatrix) -> Result<Spectrum> {
    let poly = char_poly(matrix)?;
    Ok(finish(matrix, poly.roots(), true, SpectrumSource::CharPolyOracle))
}

/// Eigenvalues and unit right eigenvectors taken from the null space of
/// `H - λI`.
pub fn eigenpairs(matrix: &ComplexMatrix) -> Eigenpairs {
    let spectrum = eigenvalues(matrix);
    let n = matrix.dim();
    let cutoff = RANK_CUTOFF * norm2(matrix);
    let mut vectors = vec![Vec::new(); n];
    let mut geometric = vec![0; n];
    let mut algebraic = vec![0; n];
    for group in cluster_indices(&spectrum.eigenvalues, CLUSTER_GAP) {
        let mean = group.iter().map(|&i| spectrum.eigenvalues[i]).sum::<Complex64>() / group.len() as f64;
        let svd = shifted(matrix, mean).svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let null_dim = order
            .iter()
            .filter(|&&k| svd.singular_values[k] <= cutoff)
            .count();
        let available = null_dim.clamp(1, group.len());
        for (slot, &i) in group.iter().enumerate() {
            let row = order[slot % available];
            let mut v: Vec<Complex64> = v_t.row(row).iter().map(|z| z.conj()).collect();
            normalize_phase(&mut v);
            vectors[i] = v;
            geometric[i] = null_dim;
            algebraic[i] = group.len();
        }
    }
    Eigenpairs {
        spectrum,
        vectors,
        geometric_multiplicity: geometric,
        algebraic_multiplicity: algebraic,
    }
}

/// Rotates a vector so its largest component is real and positive.
fn normalize_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm() / norm;
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// Determinant by LU factorization.
pub fn determinant(matrix: &ComplexMatrix) -> Complex64 {
    matrix.as_matrix().clone().determinant()
}
