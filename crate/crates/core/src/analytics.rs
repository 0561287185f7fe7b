//! Closed-form and implicit analytic results for the ring.
//!
//! Real eigenvalues of the `2N`-site ring are `E = -2 cos k` where `k` is a
//! real root in `(0, π)` of the critical function
//!
//! ```text
//! F(γ, Φ, k) = (1 - γ² / (4 sin²k)) sin²(Nk) - sin²(Φ/2)
//! ```
//!
//! Flux enters only through `sin²(Φ/2)`, so `F(γ, Φ, k) = F(γ, 0, k) - sin²(Φ/2)`
//! and the largest flux keeping every root real is fixed by the maximum of
//! `F(γ, 0, ·)` on its first lobe `[π/2N, π/N]`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Tolerance on `cos Φ - (1 - 2(1 - γ²/4)²)` for landing on the four-site
/// phase boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// An extremum of the critical function this close to zero is a double root.
pub const TANGENCY_TOL: f64 = 1e-10;
/// Bracketing samples per unit of `N` in [`real_k_roots`].
pub const ROOT_GRID_PER_SITE: usize = 64;

/// Eigenvalues of the four-site ring (`N = 2`) in closed form:
/// `±√2 √((1 - γ²/4) ± √((1 - γ²/4)² - sin²(Φ/2)))`, principal roots.
pub fn four_site_eigenvalues(gamma: f64, flux: f64) -> [Complex64; 4] {
    let a = Complex64::new(1.0 - gamma * gamma / 4.0, 0.0);
    // Reduce first so that Φ = 2mπ gives sin(Φ/2) = 0 exactly; the closed
    // form amplifies that round-off by a square root at the triple point.
    let s = (flux_offset(flux) / 2.0).sin();
    let inner = (a * a - s * s).sqrt();
    let plus = (a + inner).sqrt() * SQRT_2;
    let minus = (a - inner).sqrt() * SQRT_2;
    [plus, -plus, minus, -minus]
}

/// Labels of the four-site phase diagram in the `(γ, Φ)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FourSiteRegion {
    /// Entirely real spectrum, `0 < γ < 2`.
    RegionI,
    /// Complex conjugate pairs.
    RegionII,
    /// Purely imaginary conjugate pairs, `γ > 2`.
    RegionIII,
    /// On the boundary curve: two 2×2 Jordan blocks.
    BoundaryTwoEP,
    /// `γ = 2` at trivial flux: three levels coalesce at zero.
    TripleEP,
    /// `γ = 0`.
    Hermitian,
}

impl FourSiteRegion {
    pub fn is_exact_phase(self) -> Option<bool> {
        match self {
            FourSiteRegion::RegionI | FourSiteRegion::Hermitian => Some(true),
            FourSiteRegion::RegionII | FourSiteRegion::RegionIII => Some(false),
            FourSiteRegion::BoundaryTwoEP | FourSiteRegion::TripleEP => None,
        }
    }
}

/// Distance of `flux` from the nearest multiple of `2π`.
fn flux_offset(flux: f64) -> f64 {
    let r = flux.rem_euclid(std::f64::consts::TAU);
    r.min(std::f64::consts::TAU - r)
}

pub fn four_site_region(gamma: f64, flux: f64) -> FourSiteRegion {
    if gamma == 0.0 {
        return FourSiteRegion::Hermitian;
    }
    if (gamma - 2.0).abs() <= BOUNDARY_TOL && flux_offset(flux) <= 1e-9 {
        return FourSiteRegion::TripleEP;
    }
    let a = 1.0 - gamma * gamma / 4.0;
    let margin = flux.cos() - (1.0 - 2.0 * a * a);
    if margin.abs() <= BOUNDARY_TOL {
        FourSiteRegion::BoundaryTwoEP
    } else if margin < 0.0 {
        FourSiteRegion::RegionII
    } else if gamma < 2.0 {
        FourSiteRegion::RegionI
    } else {
        FourSiteRegion::RegionIII
    }
}

fn check_half_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("ring half-size N must be at least 2, got {n}")));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::domain(format!(
            "gain/loss must be finite and non-negative, got {gamma}"
        )));
    }
    Ok(())
}

/// `F(γ, 0, k)`, written with `sin(Nk)/sin(k)` so it stays finite as
/// `k → 0, π`.
fn profile(n: usize, gamma: f64, k: f64) -> f64 {
    let snk = (n as f64 * k).sin();
    let ratio = snk / k.sin();
    snk * snk - 0.25 * gamma * gamma * ratio * ratio
}

/// `dF/dk`; independent of the flux.
pub fn critical_derivative(n: usize, gamma: f64, k: f64) -> f64 {
    let nf = n as f64;
    let (sk, ck) = k.sin_cos();
    let (snk, cnk) = (nf * k).sin_cos();
    let ratio = snk / sk;
    let ratio_prime = (nf * cnk * sk - snk * ck) / (sk * sk);
    nf * (2.0 * nf * k).sin() - 0.5 * gamma * gamma * ratio * ratio_prime
}

/// The critical function `F(γ, Φ, k)` on `k ∈ (0, π)`.
pub fn critical_function(n: usize, gamma: f64, flux: f64, k: f64) -> Result<f64> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::domain(format!("k must lie in (0, π), got {k}")));
    }
    let sk = k.sin();
    let snk = (n as f64 * k).sin();
    let sf = (flux / 2.0).sin();
    Ok((1.0 - gamma * gamma / (4.0 * sk * sk)) * snk * snk - sf * sf)
}

/// A real root of the critical function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KRoot {
    pub k: f64,
    /// 2 for a tangency (the function touches zero at an extremum).
    pub multiplicity: usize,
}

impl KRoot {
    /// The real eigenvalue `-2 cos k` this root stands for.
    pub fn energy(&self) -> f64 {
        -2.0 * self.k.cos()
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy)]
struct Sample {
    k: f64,
    value: f64,
    extremum: bool,
}

/// All real roots of `F(γ, Φ, ·)` in `(0, π)`, ascending.
///
/// Sign changes on a grid of `64N` intervals are refined by bisection to
/// `1e-12`. Extrema of `F` (sign changes of `dF/dk`) are located first and
/// inserted into the grid; an extremum with `|F| ≤ 1e-10` is reported as a
/// double root.
pub fn real_k_roots(n: usize, gamma: f64, flux: f64) -> Result<Vec<KRoot>> {
    check_half_size(n)?;
    check_gamma(gamma)?;
    let sf = (flux / 2.0).sin();
    let offset = sf * sf;
    let f = |k: f64| profile(n, gamma, k) - offset;
    let df = |k: f64| critical_derivative(n, gamma, k);

    let intervals = ROOT_GRID_PER_SITE * n;
    let step = PI / intervals as f64;
    // Open interval: nudge the endpoints inside.
    let grid: Vec<f64> = (0..=intervals)
        .map(|i| match i {
            0 => step * 1e-6,
            i if i == intervals => PI - step * 1e-6,
            i => step * i as f64,
        })
        .collect();

    let mut samples: Vec<Sample> = Vec::with_capacity(grid.len() + 2 * n);
    let mut prev_slope = df(grid[0]);
    samples.push(Sample { k: grid[0], value: f(grid[0]), extremum: false });
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope_b = df(b);
        if prev_slope != 0.0 && slope_b != 0.0 && (prev_slope < 0.0) != (slope_b < 0.0) {
            let k = bisect(df, a, b, 1e-15);
            samples.push(Sample { k, value: f(k), extremum: true });
        }
        let at_grid_extremum = slope_b == 0.0;
        samples.push(Sample { k: b, value: f(b), extremum: at_grid_extremum });
        prev_slope = if slope_b == 0.0 { prev_slope } else { slope_b };
    }
    samples.sort_by(|x, y| x.k.total_cmp(&y.k));
    // An extremum found next to a grid point replaces it.
    let mut merged: Vec<Sample> = Vec::with_capacity(samples.len());
    for s in samples {
        match merged.last_mut() {
            Some(last) if (s.k - last.k).abs() <= 1e-12 => {
                if s.extremum {
                    *last = s;
                }
            }
            _ => merged.push(s),
        }
    }

    // Sign class: 0 marks a point that is itself a root.
    let sign = |s: &Sample| -> i8 {
        if (s.extremum && s.value.abs() <= TANGENCY_TOL) || s.value == 0.0 {
            0
        } else if s.value > 0.0 {
            1
        } else {
            -1
        }
    };
    let mut roots = Vec::new();
    for (i, s) in merged.iter().enumerate() {
        if sign(s) == 0 {
            let multiplicity = if s.extremum { 2 } else { 1 };
            roots.push(KRoot { k: s.k, multiplicity });
        }
        if let Some(next) = merged.get(i + 1) {
            let (sa, sb) = (sign(s), sign(next));
            if sa != 0 && sb != 0 && sa != sb {
                roots.push(KRoot { k: bisect(f, s.k, next.k, 1e-12), multiplicity: 1 });
            }
        }
    }
    Ok(roots)
}

/// Total root count with multiplicity.
pub fn root_count(roots: &[KRoot]) -> usize {
    roots.iter().map(|r| r.multiplicity).sum()
}

/// Wavenumber of the gain/loss-dependent level `-√(4 - γ²)` at trivial flux:
/// `arccos √(1 - γ²/4)`.
pub fn k_plus(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma > 2.0 {
        return Err(Error::domain(format!("no real k₊ exists for γ = {gamma} > 2")));
    }
    Ok((1.0 - gamma * gamma / 4.0).max(0.0).sqrt().acos())
}

/// `γ_c = 2 sin(π/N)`: above it any nontrivial flux breaks PT symmetry.
pub fn threshold_gamma(n: usize) -> Result<f64> {
    check_half_size(n)?;
    Ok(2.0 * (PI / n as f64).sin())
}

/// Fewest complex conjugate pairs under nontrivial flux, `D = 2 ⌊k₊ N / π⌋`,
/// or `2N` once `γ > 2`.
///
/// Every level `-2 cos(nπ/N)` with `n < k₊N/π` on either band edge breaks,
/// and each is doubly degenerate, so a ring at small nontrivial flux shows
/// `2D` complex eigenvalues.
///
/// When `k₊ N / π` is an exact integer the lower count is returned.
pub fn min_broken_pairs(n: usize, gamma: f64) -> Result<usize> {
    check_half_size(n)?;
    check_gamma(gamma)?;
    if gamma > 2.0 {
        return Ok(2 * n);
    }
    let x = k_plus(gamma)? * n as f64 / PI;
    Ok(2 * (x - 1e-12).floor().max(0.0) as usize)
}

/// Spectrum at `Φ = 2mπ`: `-2 cos(nπ/N)` twice for `n = 1..N-1`, and
/// `±√(4 - γ²)` (imaginary beyond `γ = 2`). Sorted like a solver spectrum.
pub fn trivial_flux_spectrum(n: usize, gamma: f64) -> Result<Vec<Complex64>> {
    check_half_size(n)?;
    check_gamma(gamma)?;
    let mut out = Vec::with_capacity(2 * n);
    for m in 1..n {
        let e = -2.0 * (m as f64 * PI / n as f64).cos();
        out.push(Complex64::new(e, 0.0));
        out.push(Complex64::new(e, 0.0));
    }
    let root = Complex64::new(4.0 - gamma * gamma, 0.0).sqrt();
    out.push(root);
    out.push(-root);
    crate::eig::sort_lexicographic(&mut out);
    Ok(out)
}

/// Maximum of `F(γ, 0, k)` on the first lobe and the flux it allows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub k_c: f64,
    pub f_max: f64,
    /// `2 arcsin √F_max`, clamped to `[0, π]`.
    pub phi_c: f64,
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Locates `k_c`, the maximizer of `F(γ, 0, k)` on `[π/2N, π/N]`.
///
/// Golden-section search brackets the maximum, then bisection on the
/// analytic derivative drives `|dF/dk|` below `1e-10` (or the bracket to
/// machine resolution).
pub fn find_kc(n: usize, gamma: f64) -> Result<CriticalPoint> {
    check_half_size(n)?;
    check_gamma(gamma)?;
    let gc = threshold_gamma(n)?;
    if gamma <= 0.0 || gamma >= gc {
        return Err(Error::domain(format!(
            "k_c is defined for 0 < γ < γ_c = {gc}, got γ = {gamma}"
        )));
    }
    let lo = PI / (2.0 * n as f64);
    let hi = PI / n as f64;
    let f = |k: f64| profile(n, gamma, k);
    let df = |k: f64| critical_derivative(n, gamma, k);

    let guess = golden_section_max(f, lo, hi, 1e-9 * hi);
    let mut k_c = guess;
    if df(guess).abs() > 1e-10 {
        let width = 4e-9 * hi;
        let a = (guess - width).max(lo);
        let b = (guess + width).min(hi);
        if df(a) > 0.0 && df(b) < 0.0 {
            let mut a = a;
            let mut b = b;
            while b - a > 4.0 * f64::EPSILON * b {
                let mid = 0.5 * (a + b);
                let slope = df(mid);
                k_c = mid;
                if slope.abs() <= 1e-10 {
                    break;
                }
                if slope > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
        }
    }
    let f_max = f(k_c).clamp(0.0, 1.0);
    Ok(CriticalPoint {
        k_c,
        f_max,
        phi_c: (2.0 * f_max.sqrt().asin()).clamp(0.0, PI),
    })
}

/// Largest flux `Φ_c ∈ [0, π]` with an entirely real spectrum.
///
/// `π` at `γ = 0`; `0` for `γ ≥ γ_c`.
pub fn max_flux(n: usize, gamma: f64) -> Result<f64> {
    check_half_size(n)?;
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Ok(PI);
    }
    if gamma >= threshold_gamma(n)? {
        return Ok(0.0);
    }
    Ok(find_kc(n, gamma)?.phi_c)
}

/// Weak-gain estimate `Φ_c ≈ π (1 - 2Nγ/π²)`, floored at zero.
pub fn max_flux_linear_approx(n: usize, gamma: f64) -> f64 {
    (PI * (1.0 - 2.0 * n as f64 * gamma / (PI * PI))).max(0.0)
}

/// `N k_c / π`, which runs from 1/2 to 1 as `γ` goes from 0 to `γ_c`.
pub fn scaled_kc(n: usize, gamma: f64) -> Result<f64> {
    Ok(n as f64 * find_kc(n, gamma)?.k_c / PI)
}
