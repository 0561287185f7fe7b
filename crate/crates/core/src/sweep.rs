//! Parameter-grid drivers: band structures over flux, phase diagrams, and
//! the critical-flux and `k_c` curves.
//!
//! Grid points are evaluated in parallel with rayon; results are always
//! gathered in grid order, so output is bit-identical across runs and
//! thread counts.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{max_flux, max_flux_linear_approx, scaled_kc, threshold_gamma};
use crate::eig;
use crate::matching::min_cost_assignment;
use crate::model::{build_flux_hamiltonian, RingParams};
use crate::phase::{classify_params, PhaseClassification};
use crate::{Error, Result};

/// Bisection steps on `Φ ∈ [0, π]` for the numeric critical flux.
pub const BISECTION_STEPS: usize = 40;
/// A tracked band moving more than this many grid spacings (times the unit
/// slope estimate) in one step is flagged as a crossing.
pub const CROSSING_FACTOR: f64 = 10.0;
/// Band slope estimate in hopping units; `|dE/dΦ|` is at most `1/N` away
/// from exceptional points.
pub const SLOPE_ESTIMATE: f64 = 1.0;
/// Refinement step near `γ_c` in [`kc_curve`], as a fraction of `γ_c`.
pub const KC_REFINE_STEP: f64 = 1e-3;

/// Evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| {
                if i == points - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub flux_index: usize,
    pub band: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandSweep {
    pub half_size: usize,
    pub gamma: f64,
    pub flux_grid: Vec<f64>,
    /// `bands[i][b]` is band `b` at `flux_grid[i]`, continued from `i - 1`.
    pub bands: Vec<Vec<Complex64>>,
    /// Solver output at each flux value, sorted lexicographically.
    pub raw: Vec<Vec<Complex64>>,
    pub crossings: Vec<Crossing>,
}

fn spectrum_at(params: &RingParams) -> Result<Vec<Complex64>> {
    let spectrum = eig::eigenvalues(&build_flux_hamiltonian(params)?);
    if !spectrum.converged {
        return Err(Error::Unconverged {
            context: Some(format!(
                "N={}, γ={}, Φ={}",
                params.half_size, params.gamma, params.flux
            )),
        });
    }
    Ok(spectrum.eigenvalues)
}

/// Assigns each previous band a current eigenvalue. Greedy by distance,
/// falling back to the optimal assignment when the greedy cost exceeds
/// twice the row-minimum lower bound.
fn continue_bands(prev: &[Complex64], current: &[Complex64]) -> Vec<usize> {
    let n = prev.len();
    let cost: Vec<Vec<f64>> = prev
        .iter()
        .map(|p| current.iter().map(|c| (p - c).norm()).collect())
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    pairs.sort_by(|&(a, b), &(c, d)| cost[a][b].total_cmp(&cost[c][d]).then((a, b).cmp(&(c, d))));
    let mut assignment = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut greedy_cost = 0.0;
    for (i, j) in pairs {
        if assignment[i] == usize::MAX && !taken[j] {
            assignment[i] = j;
            taken[j] = true;
            greedy_cost += cost[i][j];
        }
    }
    let lower_bound: f64 = cost
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .sum();
    if greedy_cost > 2.0 * lower_bound {
        min_cost_assignment(&cost)
    } else {
        assignment
    }
}

/// Spectrum over `flux_steps` points spanning `[0, 2π]`, with bands
/// continued by minimal displacement between neighbouring flux values.
pub fn band_sweep(half_size: usize, gamma: f64, flux_steps: usize) -> Result<BandSweep> {
    if flux_steps < 2 {
        return Err(Error::domain(format!("flux_steps must be at least 2, got {flux_steps}")));
    }
    RingParams::new(half_size, gamma, 0.0)?;
    let flux_grid = linspace(0.0, TAU, flux_steps);
    let raw: Vec<Vec<Complex64>> = flux_grid
        .par_iter()
        .map(|&phi| spectrum_at(&RingParams::new(half_size, gamma, phi)?))
        .collect::<Result<_>>()?;

    let spacing = TAU / (flux_steps - 1) as f64;
    let limit = CROSSING_FACTOR * spacing * SLOPE_ESTIMATE;
    let mut bands = Vec::with_capacity(flux_steps);
    let mut crossings = Vec::new();
    bands.push(raw[0].clone());
    for (i, current) in raw.iter().enumerate().skip(1) {
        let prev: &Vec<Complex64> = &bands[i - 1];
        let assignment = continue_bands(prev, current);
        let next: Vec<Complex64> = assignment.iter().map(|&j| current[j]).collect();
        for (band, (a, b)) in prev.iter().zip(&next).enumerate() {
            if (a - b).norm() > limit {
                crossings.push(Crossing { flux_index: i, band });
            }
        }
        bands.push(next);
    }
    Ok(BandSweep { half_size, gamma, flux_grid, bands, raw, crossings })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagram {
    pub half_size: usize,
    pub gamma_grid: Vec<f64>,
    pub flux_grid: Vec<f64>,
    /// Row-major: `cells[i * flux_grid.len() + j]` is at
    /// `(gamma_grid[i], flux_grid[j])`.
    pub cells: Vec<PhaseClassification>,
}

impl PhaseDiagram {
    pub fn cell(&self, gamma_index: usize, flux_index: usize) -> &PhaseClassification {
        &self.cells[gamma_index * self.flux_grid.len() + flux_index]
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::domain(format!("{name} range must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

/// Classifies every point of a `steps × steps` grid (endpoints included).
pub fn phase_diagram(
    half_size: usize,
    gamma_range: (f64, f64),
    flux_range: (f64, f64),
    steps: usize,
) -> Result<PhaseDiagram> {
    check_range("gamma", gamma_range)?;
    check_range("flux", flux_range)?;
    if steps < 2 {
        return Err(Error::domain(format!("steps must be at least 2, got {steps}")));
    }
    RingParams::new(half_size, gamma_range.0, flux_range.0)?;
    let gamma_grid = linspace(gamma_range.0, gamma_range.1, steps);
    let flux_grid = linspace(flux_range.0, flux_range.1, steps);
    let cells = (0..steps * steps)
        .into_par_iter()
        .map(|idx| {
            let params = RingParams::new(half_size, gamma_grid[idx / steps], flux_grid[idx % steps])?;
            classify_params(&params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagram { half_size, gamma_grid, flux_grid, cells })
}

/// Largest flux in `[0, π]` classified as exact by the eigensolver, by
/// bisection. Cells flagged near an exceptional point count as broken.
pub fn numeric_max_flux(half_size: usize, gamma: f64) -> Result<f64> {
    let exact = |phi: f64| -> Result<bool> {
        let c = classify_params(&RingParams::new(half_size, gamma, phi)?)?;
        Ok(c.is_exact() && !c.near_ep)
    };
    if exact(PI)? {
        return Ok(PI);
    }
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if exact(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalCurve {
    pub half_size: usize,
    pub gamma_grid: Vec<f64>,
    pub phi_c_analytic: Vec<f64>,
    pub phi_c_numeric: Vec<f64>,
    pub phi_c_linear: Vec<f64>,
}

impl CriticalCurve {
    /// Largest `|analytic - numeric|` over the curve.
    pub fn max_disagreement(&self) -> f64 {
        self.phi_c_analytic
            .iter()
            .zip(&self.phi_c_numeric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `γ_c (i + 1/2) / steps` for `i = 0..steps`.
fn half_step_grid(gamma_c: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| gamma_c * (i as f64 + 0.5) / steps as f64).collect()
}

/// `Φ_c(γ)` on `gamma_steps` points inside `(0, γ_c)`, from the first-lobe
/// maximum, from diagonalization, and from the weak-gain linear law.
pub fn critical_curve(half_size: usize, gamma_steps: usize) -> Result<CriticalCurve> {
    if gamma_steps == 0 {
        return Err(Error::domain("gamma_steps must be positive"));
    }
    let gamma_grid = half_step_grid(threshold_gamma(half_size)?, gamma_steps);
    let rows = gamma_grid
        .par_iter()
        .map(|&g| Ok((max_flux(half_size, g)?, numeric_max_flux(half_size, g)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    Ok(CriticalCurve {
        half_size,
        phi_c_analytic: rows.iter().map(|r| r.0).collect(),
        phi_c_numeric: rows.iter().map(|r| r.1).collect(),
        phi_c_linear: gamma_grid.iter().map(|&g| max_flux_linear_approx(half_size, g)).collect(),
        gamma_grid,
    })
}

/// `(γ, N k_c / π)` over `(0, γ_c)`, with the grid refined to steps of
/// `γ_c / 1000` over the last base interval (at least the final 1%) where
/// `k_c` turns sharply towards `π/N`.
pub fn kc_curve(half_size: usize, gamma_steps: usize) -> Result<Vec<(f64, f64)>> {
    if gamma_steps == 0 {
        return Err(Error::domain("gamma_steps must be positive"));
    }
    let gc = threshold_gamma(half_size)?;
    let mut grid = half_step_grid(gc, gamma_steps);
    let window = (gc / gamma_steps as f64).max(0.01 * gc);
    let fine = gc * KC_REFINE_STEP;
    let refined = (window / fine).ceil() as usize;
    grid.extend((0..refined).map(|j| gc - fine * (j as f64 + 0.5)));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * gc);
    grid.par_iter()
        .map(|&g| Ok((g, scaled_kc(half_size, g)?)))
        .collect()
}
