//! Exact/broken PT-phase classification and exceptional-point detection.

use num_complex::Complex64;
use serde::Serialize;

use crate::analytics::{four_site_region, FourSiteRegion};
use crate::eig::{self, cluster_indices, norm2, Spectrum, RANK_CUTOFF};
use crate::model::{build_hamiltonian, ComplexMatrix, RingParams};
use crate::{Error, Result};

/// An eigenvalue with `|Im λ| ≤ TAU_REAL` counts as real.
pub const TAU_REAL: f64 = 1e-8;
/// Largest distance allowed between `λ` and the conjugate of its partner.
pub const PAIR_MATCH_CAP: f64 = 1e-6;
/// Eigenvalues closer than this are candidates for one exceptional point.
pub const EP_GAP: f64 = 1e-6;
/// Eigenvalue distance below which a defective-looking pair marks the
/// classification as near an exceptional point.
pub const NEAR_EP_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    ExactPT,
    BrokenPT,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::ExactPT => "exact",
            Phase::BrokenPT => "broken",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseClassification {
    pub phase: Phase,
    /// Eigenvalues with `|Im λ| > TAU_REAL`.
    pub complex_level_count: usize,
    pub pair_count: usize,
    /// Complex eigenvalues that also have `|Re λ| ≤ TAU_REAL`.
    pub pure_imaginary_count: usize,
    /// Set only for the four-site ring.
    pub region4: Option<FourSiteRegion>,
    /// Two eigenvalues within [`NEAR_EP_RADIUS`] look defective; the
    /// verdict is less trustworthy.
    pub near_ep: bool,
}

impl PhaseClassification {
    pub fn is_exact(&self) -> bool {
        self.phase == Phase::ExactPT
    }
}

pub fn count_complex_levels(spectrum: &Spectrum) -> usize {
    spectrum
        .eigenvalues
        .iter()
        .filter(|z| z.im.abs() > TAU_REAL)
        .count()
}

/// Greedy nearest-conjugate pairing of the complex eigenvalues.
fn check_conjugate_pairs(complex: &[Complex64]) -> Result<()> {
    let mut used = vec![false; complex.len()];
    for i in 0..complex.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = complex[i].conj();
        let best = (0..complex.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (complex[a] - target).norm().total_cmp(&(complex[b] - target).norm()));
        match best {
            Some(j) if (complex[j] - target).norm() <= PAIR_MATCH_CAP => used[j] = true,
            _ => {
                return Err(Error::Consistency(format!(
                    "complex eigenvalue {} has no conjugate partner within {PAIR_MATCH_CAP:e}",
                    complex[i]
                )))
            }
        }
    }
    Ok(())
}

/// Classifies a converged spectrum. `region4` and `near_ep` are left unset;
/// [`classify_params`] fills them in.
pub fn classify(spectrum: &Spectrum) -> Result<PhaseClassification> {
    if !spectrum.converged {
        return Err(Error::Unconverged { context: None });
    }
    let complex: Vec<Complex64> = spectrum
        .eigenvalues
        .iter()
        .copied()
        .filter(|z| z.im.abs() > TAU_REAL)
        .collect();
    check_conjugate_pairs(&complex)?;
    let count = complex.len();
    Ok(PhaseClassification {
        phase: if count == 0 { Phase::ExactPT } else { Phase::BrokenPT },
        complex_level_count: count,
        pair_count: count / 2,
        pure_imaginary_count: complex.iter().filter(|z| z.re.abs() <= TAU_REAL).count(),
        region4: None,
        near_ep: false,
    })
}

fn describe(params: &RingParams) -> String {
    format!("N={}, γ={}, Φ={}", params.half_size, params.gamma, params.flux)
}

/// Builds, diagonalizes and classifies, including the four-site region
/// label and the near-EP annotation.
pub fn classify_params(params: &RingParams) -> Result<PhaseClassification> {
    let h = build_hamiltonian(params)?;
    let spectrum = eig::eigenvalues(&h);
    if !spectrum.converged {
        return Err(Error::Unconverged { context: Some(describe(params)) });
    }
    let mut out = classify(&spectrum).map_err(|e| match e {
        Error::Consistency(msg) => Error::Consistency(format!("{msg} at {}", describe(params))),
        other => other,
    })?;
    if params.half_size == 2 {
        out.region4 = Some(four_site_region(params.gamma, params.flux));
    }
    out.near_ep = !defective_clusters(&h, &spectrum, NEAR_EP_RADIUS).is_empty();
    Ok(out)
}

/// Per-eigenvalue near-EP flags, aligned with `spectrum.eigenvalues`.
pub fn near_ep_mask(h: &ComplexMatrix, spectrum: &Spectrum) -> Vec<bool> {
    let mut mask = vec![false; spectrum.len()];
    for cluster in defective_clusters(h, spectrum, NEAR_EP_RADIUS) {
        for i in cluster.members {
            mask[i] = true;
        }
    }
    mask
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpReport {
    pub gamma: f64,
    pub flux: f64,
    pub eigenvalue: Complex64,
    /// Length of the longest Jordan chain.
    pub order: usize,
    pub geometric_multiplicity: usize,
    pub algebraic_multiplicity: usize,
}

struct DefectiveCluster {
    mean: Complex64,
    members: Vec<usize>,
    nullity: usize,
}

/// Clusters of at least two eigenvalues (single linkage at `gap`) whose
/// numerical null space of `H - λ̄I` is smaller than the cluster.
///
/// The rank cutoff is `max(1e-7‖H‖₂, diameter)`: a diagonalizable cluster
/// of spread `d` has singular values `O(d)`, while near a Jordan block only
/// one of them is that small.
fn defective_clusters(h: &ComplexMatrix, spectrum: &Spectrum, gap: f64) -> Vec<DefectiveCluster> {
    let values = &spectrum.eigenvalues;
    let base_cutoff = RANK_CUTOFF * norm2(h);
    let mut out = Vec::new();
    for group in cluster_indices(values, gap) {
        if group.len() < 2 {
            continue;
        }
        let mean = group.iter().map(|&i| values[i]).sum::<Complex64>() / group.len() as f64;
        let diameter = group
            .iter()
            .flat_map(|&i| group.iter().map(move |&j| (values[i] - values[j]).norm()))
            .fold(0.0, f64::max);
        let cutoff = base_cutoff.max(diameter);
        let nullity = eig::singular_values(&eig::shifted(h, mean))
            .iter()
            .filter(|&&s| s <= cutoff)
            .count();
        if nullity < group.len() {
            out.push(DefectiveCluster { mean, members: group, nullity });
        }
    }
    out
}

/// Smallest `p` with `nullity((H - λI)^p)` equal to the cluster size.
fn jordan_index(h: &ComplexMatrix, lambda: Complex64, size: usize) -> usize {
    let a = eig::shifted(h, lambda);
    let scale = norm2(h).max(a.norm());
    let mut power = a.clone();
    for p in 1..=size {
        if p > 1 {
            power = &power * &a;
        }
        let cutoff = RANK_CUTOFF * scale.powi(p as i32);
        let nullity = eig::singular_values(&power).iter().filter(|&&s| s <= cutoff).count();
        if nullity >= size {
            return p;
        }
    }
    size
}

/// Exceptional points of the ring at `params`, one report per defective
/// eigenvalue cluster (gap [`EP_GAP`]). Empty when the spectrum is simple
/// or every cluster is diagonalizable.
pub fn detect_ep(params: &RingParams) -> Result<Vec<EpReport>> {
    let h = build_hamiltonian(params)?;
    let spectrum = eig::eigenvalues(&h);
    let mut reports: Vec<EpReport> = defective_clusters(&h, &spectrum, EP_GAP)
        .into_iter()
        .map(|c| EpReport {
            gamma: params.gamma,
            flux: params.flux,
            eigenvalue: c.mean,
            order: jordan_index(&h, c.mean, c.members.len()).max(2),
            geometric_multiplicity: c.nullity,
            algebraic_multiplicity: c.members.len(),
        })
        .collect();
    reports.sort_by(|a, b| {
        a.eigenvalue
            .re
            .total_cmp(&b.eigenvalue.re)
            .then(a.eigenvalue.im.total_cmp(&b.eigenvalue.im))
    });
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_flux_hamiltonian, Gauge};
    use std::f64::consts::PI;

    fn spectrum(n: usize, g: f64, phi: f64) -> Spectrum {
        eig::eigenvalues(&build_flux_hamiltonian(&RingParams::new(n, g, phi).unwrap()).unwrap())
    }

    #[test]
    fn classify_examples() {
        let c = classify(&spectrum(5, 0.5, 0.0)).unwrap();
        assert_eq!((c.phase, c.pair_count), (Phase::ExactPT, 0));

        let s = spectrum(5, 2.5, 0.0);
        let c = classify(&s).unwrap();
        assert_eq!((c.phase, c.pair_count, c.pure_imaginary_count), (Phase::BrokenPT, 1, 2));
        for target in [Complex64::new(0.0, 1.5), Complex64::new(0.0, -1.5)] {
            assert!(s.eigenvalues.iter().any(|z| (z - target).norm() <= 1e-8));
        }

        let c = classify(&spectrum(5, 0.5, PI)).unwrap();
        assert_eq!((c.phase, c.pair_count), (Phase::BrokenPT, 5));
    }

    #[test]
    fn unconverged_spectrum_rejected() {
        let mut s = spectrum(3, 0.5, 0.0);
        s.converged = false;
        assert!(matches!(classify(&s), Err(Error::Unconverged { .. })));
    }

    #[test]
    fn unpaired_level_is_consistency_error() {
        let mut s = spectrum(3, 0.5, 0.0);
        s.eigenvalues[0] = Complex64::new(0.3, 0.2);
        assert!(matches!(classify(&s), Err(Error::Consistency(_))));
    }

    #[test]
    fn complex_level_examples() {
        // Twelve conjugate pairs: both band edges lose six degenerate levels.
        let s = spectrum(20, 3f64.sqrt(), 0.05);
        assert_eq!(count_complex_levels(&s), 24);
        assert_eq!(classify(&s).unwrap().pair_count, 12);
        assert_eq!(count_complex_levels(&spectrum(5, 0.5, 0.1)), 0);
        assert_eq!(count_complex_levels(&spectrum(5, 1.5, PI)), 10);
    }

    #[test]
    fn triple_coalescence_at_four_sites() {
        let eps = detect_ep(&RingParams::new(2, 2.0, 0.0).unwrap()).unwrap();
        assert_eq!(eps.len(), 1);
        let ep = &eps[0];
        assert!(ep.eigenvalue.norm() < 1e-8);
        assert_eq!(ep.order, 3);
        assert_eq!(ep.geometric_multiplicity, 2);
        assert_eq!(ep.algebraic_multiplicity, 4);
    }

    #[test]
    fn two_second_order_eps_on_boundary() {
        let eps = detect_ep(&RingParams::new(2, 8f64.sqrt(), PI).unwrap()).unwrap();
        assert_eq!(eps.len(), 2);
        let r2 = 2f64.sqrt();
        assert!((eps[0].eigenvalue - Complex64::new(0.0, -r2)).norm() < 1e-7);
        assert!((eps[1].eigenvalue - Complex64::new(0.0, r2)).norm() < 1e-7);
        for ep in &eps {
            assert_eq!((ep.order, ep.geometric_multiplicity), (2, 1));
        }
    }

    #[test]
    fn generic_and_hermitian_points_have_no_ep() {
        assert!(detect_ep(&RingParams::new(2, 1.0, 0.3).unwrap()).unwrap().is_empty());
        // Degenerate but diagonalizable.
        assert!(detect_ep(&RingParams::new(5, 0.0, 0.0).unwrap()).unwrap().is_empty());
        assert!(detect_ep(&RingParams::new(5, 0.5, 0.0).unwrap()).unwrap().is_empty());
        assert!(!classify_params(&RingParams::new(5, 0.0, 0.0).unwrap()).unwrap().near_ep);
    }

    #[test]
    fn near_ep_annotation() {
        let c = classify_params(&RingParams::new(2, 2.0, 0.0).unwrap()).unwrap();
        assert!(c.near_ep);
        assert_eq!(c.region4, Some(FourSiteRegion::TripleEP));
        let h = build_flux_hamiltonian(&RingParams::new(2, 2.0, 0.0).unwrap()).unwrap();
        assert_eq!(near_ep_mask(&h, &eig::eigenvalues(&h)), vec![true; 4]);
        let c = classify_params(&RingParams::new(2, 1.0, 0.3).unwrap()).unwrap();
        assert!(!c.near_ep);
        assert_eq!(c.region4, Some(FourSiteRegion::RegionI));
        assert_eq!(classify_params(&RingParams::new(3, 1.0, 0.3).unwrap()).unwrap().region4, None);
    }

    #[test]
    fn gauge_independent_verdicts() {
        for n in [2usize, 3, 5] {
            for &g in &[0.0, 0.4, 1.0, 2.5] {
                for &phi in &[0.0, 0.3, 1.5, PI, 5.0] {
                    let p = RingParams::new(n, g, phi).unwrap();
                    let a = classify_params(&p).unwrap();
                    let b = classify_params(&p.with_gauge(Gauge::ConcentratedLink)).unwrap();
                    assert_eq!(a, b, "N={n} γ={g} Φ={phi}");
                }
            }
        }
    }

    #[test]
    fn agrees_with_four_site_regions() {
        let mut checked = 0;
        for i in 0..41 {
            for j in 0..41 {
                let g = 4.0 * i as f64 / 40.0;
                let phi = 2.0 * PI * j as f64 / 40.0;
                let a = 1.0 - g * g / 4.0;
                if (phi.cos() - (1.0 - 2.0 * a * a)).abs() <= 2.0 * TAU_REAL {
                    continue;
                }
                let region = four_site_region(g, phi);
                let Some(exact) = region.is_exact_phase() else { continue };
                let c = classify_params(&RingParams::new(2, g, phi).unwrap()).unwrap();
                assert_eq!(c.is_exact(), exact, "γ={g} Φ={phi} {region:?}");
                checked += 1;
            }
        }
        assert!(checked > 1500);
    }

    #[test]
    fn pair_count_grows_with_flux() {
        let counts: Vec<usize> = (0..=100)
            .map(|i| count_complex_levels(&spectrum(5, 0.5, PI * i as f64 / 100.0)))
            .collect();
        assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
        assert_eq!(*counts.last().unwrap(), 10);
    }

    #[test]
    fn ep_fires_along_four_site_boundary() {
        // cos Φ = 1 - 2a², a = 1 - γ²/4, parametrized by Φ ∈ (0, π].
        let mut fired = 0;
        for i in 1..=50 {
            let phi = PI * i as f64 / 50.0;
            let a = ((1.0 - phi.cos()) / 2.0).sqrt();
            let g = (4.0 * (1.0 + a)).sqrt();
            if !detect_ep(&RingParams::new(2, g, phi).unwrap()).unwrap().is_empty() {
                fired += 1;
            }
        }
        assert!(fired >= 48, "{fired}/50");
    }
}
