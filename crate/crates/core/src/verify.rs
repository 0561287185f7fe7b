//! Invariant suite behind `ptring verify`.
//!
//! Each property walks a parameter grid and stops at its first
//! counterexample. The Hamiltonian builder under test can be swapped for a
//! deliberately corrupted one to check that the suite actually bites.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::analytics::{four_site_eigenvalues, max_flux, real_k_roots, threshold_gamma};
use crate::eig::{self, determinant, oracle_eigenvalues, Spectrum};
use crate::matching::multiset_distance;
use crate::model::{build_flux_hamiltonian, build_sc_hamiltonian, gauge_transform, pt_conjugate, ComplexMatrix, RingParams};
use crate::phase::TAU_REAL;
use crate::sweep::{linspace, numeric_max_flux};
use crate::Result;

/// Corruptions of the uniform-gauge builder used for fault injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// The loss site loses its `-iγ`.
    DropLoss,
    /// One forward hopping is 1% too strong.
    SkewHopping,
}

impl Fault {
    pub fn parse(name: &str) -> Option<Fault> {
        match name {
            "none" => Some(Fault::None),
            "drop-loss" => Some(Fault::DropLoss),
            "skew-hopping" => Some(Fault::SkewHopping),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyConfig {
    pub quick: bool,
    pub fault: Fault,
}

impl VerifyConfig {
    fn build(&self, params: &RingParams) -> Result<ComplexMatrix> {
        let mut h = build_flux_hamiltonian(params)?;
        match self.fault {
            Fault::None => {}
            Fault::DropLoss => {
                let n = params.half_size;
                h.set(n, n, Complex64::new(0.0, 0.0));
            }
            Fault::SkewHopping => {
                let z = h.get(0, 1);
                h.set(0, 1, z * 1.01);
            }
        }
        Ok(h)
    }

    fn sizes(&self) -> &'static [usize] {
        if self.quick { &[2, 3, 5] } else { &[2, 3, 5, 8, 20] }
    }

    fn grid(&self) -> Vec<RingParams> {
        let gammas = [0.0, 0.5, 1.0, 3f64.sqrt(), 2.5];
        let fluxes = [0.0, 0.3, PI / 2.0, PI, 5.9];
        let mut out = Vec::new();
        for &n in self.sizes() {
            for &g in &gammas {
                for &phi in &fluxes {
                    out.push(RingParams::new(n, g, phi).expect("grid parameters are valid"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: usize,
    /// First failing case, if any.
    pub counterexample: Option<String>,
    pub elapsed: Duration,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub outcomes: Vec<PropertyOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(PropertyOutcome::passed)
    }

    pub fn first_failure(&self) -> Option<&PropertyOutcome> {
        self.outcomes.iter().find(|o| !o.passed())
    }
}

type Check = std::result::Result<(), String>;

fn label(p: &RingParams) -> String {
    format!("N={}, γ={}, Φ={}", p.half_size, p.gamma, p.flux)
}

fn within(what: &str, value: f64, tol: f64) -> Check {
    if value <= tol {
        Ok(())
    } else {
        Err(format!("{what} = {value:e} exceeds {tol:e}"))
    }
}

fn run_property<T>(name: &'static str, cases: &[T], describe: impl Fn(&T) -> String, check: impl Fn(&T) -> Check) -> PropertyOutcome {
    let start = Instant::now();
    let mut counterexample = None;
    let mut done = 0;
    for case in cases {
        done += 1;
        if let Err(msg) = check(case) {
            counterexample = Some(format!("{}: {msg}", describe(case)));
            break;
        }
    }
    PropertyOutcome { name, cases: done, counterexample, elapsed: start.elapsed() }
}

fn solve(cfg: &VerifyConfig, p: &RingParams) -> std::result::Result<(ComplexMatrix, Spectrum), String> {
    let h = cfg.build(p).map_err(|e| e.to_string())?;
    let s = eig::eigenvalues(&h);
    if !s.converged {
        return Err("eigensolver did not converge".into());
    }
    Ok((h, s))
}

fn spectrum_only(cfg: &VerifyConfig, p: &RingParams) -> std::result::Result<Vec<Complex64>, String> {
    solve(cfg, p).map(|(_, s)| s.eigenvalues)
}

fn gauge_invariance(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let (h, s) = solve(cfg, p)?;
    let sc = build_sc_hamiltonian(p).map_err(|e| e.to_string())?;
    let mapped = gauge_transform(&h, p).map_err(|e| e.to_string())?;
    within("entrywise |D H D⁻¹ - H_sc|", mapped.max_abs_diff(&sc), 1e-12)?;
    within("gauge spectrum distance", multiset_distance(&s.eigenvalues, &eig::eigenvalues(&sc).eigenvalues), 1e-9)
}

fn trace_identities(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let (h, s) = solve(cfg, p)?;
    let n = p.half_size as f64;
    let second = Complex64::new(4.0 * n - 2.0 * p.gamma * p.gamma, 0.0);
    within("|tr H|", h.trace().norm(), 1e-12)?;
    within("|tr H² - (4N - 2γ²)|", (h.matmul(&h).trace() - second).norm(), 1e-12)?;
    within("|Σλ|", s.sum().norm(), 1e-9)?;
    within("|Σλ² - (4N - 2γ²)|", (s.sum_of_squares() - second).norm(), 1e-8)?;
    let det = determinant(&h);
    within("|Πλ - det H| / max(|det H|, 1)", (s.product() - det).norm() / det.norm().max(1.0), 1e-7)
}

fn pt_commutation(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let h = cfg.build(p).map_err(|e| e.to_string())?;
    let conj = pt_conjugate(&h, p.half_size).map_err(|e| e.to_string())?;
    within("|conj(P H P⁻¹) - H|", conj.max_abs_diff(&h), 1e-12)
}

fn conjugation_closure(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let (_, s) = solve(cfg, p)?;
    within("distance to conjugate spectrum", multiset_distance(&s.eigenvalues, &s.conjugated()), 1e-8)
}

fn negation_closure(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let (_, s) = solve(cfg, p)?;
    within("distance to negated spectrum", multiset_distance(&s.eigenvalues, &s.negated()), 1e-8)
}

fn flux_periodicity(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let a = spectrum_only(cfg, p)?;
    let shifted = RingParams { flux: p.flux + TAU, ..*p };
    within("distance to spectrum at Φ + 2π", multiset_distance(&a, &spectrum_only(cfg, &shifted)?), 1e-9)
}

fn flux_reflection(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let a = spectrum_only(cfg, p)?;
    let reflected = RingParams { flux: -p.flux, ..*p };
    within("distance to spectrum at -Φ", multiset_distance(&a, &spectrum_only(cfg, &reflected)?), 1e-9)
}

fn oracle_equivalence(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let (h, s) = solve(cfg, p)?;
    let oracle = oracle_eigenvalues(&h).map_err(|e| e.to_string())?;
    within("QR vs characteristic-polynomial roots", multiset_distance(&s.eigenvalues, &oracle.eigenvalues), 1e-6)
}

fn four_site_closed_form(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let s = spectrum_only(cfg, p)?;
    within("closed form vs solver", multiset_distance(&four_site_eigenvalues(p.gamma, p.flux), &s), 1e-9)
}

/// Both directions as sets: every real root `k` gives an eigenvalue
/// `-2 cos k`, and every real eigenvalue strictly inside `(-2, 2)` comes
/// from a root.
fn root_correspondence(cfg: &VerifyConfig, p: &RingParams) -> Check {
    let s = spectrum_only(cfg, p)?;
    let roots = real_k_roots(p.half_size, p.gamma, p.flux).map_err(|e| e.to_string())?;
    for r in &roots {
        let e = Complex64::new(r.energy(), 0.0);
        let gap = s.iter().map(|z| (z - e).norm()).fold(f64::INFINITY, f64::min);
        within(&format!("distance from root energy {} to spectrum", r.energy()), gap, 1e-7)?;
    }
    for z in s.iter().filter(|z| z.im.abs() <= TAU_REAL && z.re.abs() < 2.0 - 1e-9) {
        let gap = roots.iter().map(|r| (r.energy() - z.re).abs()).fold(f64::INFINITY, f64::min);
        within(&format!("distance from real eigenvalue {} to a root", z.re), gap, 1e-6)?;
    }
    Ok(())
}

/// Compares the two routes to `Φ_c` on the uncorrupted model; a faulty
/// builder is caught by the spectral properties.
fn critical_flux_agreement(&(n, g): &(usize, f64)) -> Check {
    let analytic = max_flux(n, g).map_err(|e| e.to_string())?;
    let numeric = numeric_max_flux(n, g).map_err(|e| e.to_string())?;
    within("|Φ_c analytic - Φ_c numeric|", (analytic - numeric).abs(), 1e-3)
}

/// Runs every property and collects the outcomes in a fixed order.
pub fn run(cfg: &VerifyConfig) -> VerifyReport {
    let grid = cfg.grid();
    let small: Vec<RingParams> = grid.iter().copied().filter(|p| p.sites() <= 20).collect();
    let steps = if cfg.quick { 11 } else { 41 };
    let four_site: Vec<RingParams> = linspace(0.0, 4.0, steps)
        .into_iter()
        .flat_map(|g| linspace(0.0, TAU, steps).into_iter().map(move |phi| RingParams::new(2, g, phi).expect("valid")))
        .collect();
    let (sizes, samples): (&[usize], usize) = if cfg.quick { (&[5], 5) } else { (&[5, 6, 7, 8, 9, 10], 10) };
    let critical: Vec<(usize, f64)> = sizes
        .iter()
        .flat_map(|&n| {
            let gc = threshold_gamma(n).expect("N ≥ 2");
            (0..samples).map(move |i| (n, gc * (i as f64 + 0.5) / samples as f64))
        })
        .collect();

    let outcomes = vec![
        run_property("gauge-invariance", &grid, label, |p| gauge_invariance(cfg, p)),
        run_property("trace-identities", &grid, label, |p| trace_identities(cfg, p)),
        run_property("pt-commutation", &grid, label, |p| pt_commutation(cfg, p)),
        run_property("conjugation-closure", &grid, label, |p| conjugation_closure(cfg, p)),
        run_property("negation-closure", &grid, label, |p| negation_closure(cfg, p)),
        run_property("flux-periodicity", &grid, label, |p| flux_periodicity(cfg, p)),
        run_property("flux-reflection", &grid, label, |p| flux_reflection(cfg, p)),
        run_property("oracle-equivalence", &small, label, |p| oracle_equivalence(cfg, p)),
        run_property("four-site-closed-form", &four_site, label, |p| four_site_closed_form(cfg, p)),
        run_property("root-spectrum-correspondence", &grid, label, |p| root_correspondence(cfg, p)),
        run_property(
            "critical-flux-agreement",
            &critical,
            |&(n, g)| format!("N={n}, γ={g}"),
            critical_flux_agreement,
        ),
    ];
    VerifyReport { outcomes }
}
