//! Characteristic polynomial by the Faddeev–LeVerrier recursion and an
//! Aberth–Ehrlich root finder. Together they form an eigenvalue oracle that
//! shares no code with the QR path.

use num_complex::Complex64;

use super::dd::Cdd;
use crate::model::ComplexMatrix;
use crate::{Error, Result};

/// Largest dimension accepted by [`char_poly`]; the recursion loses accuracy
/// quickly beyond this.
pub const MAX_CHAR_POLY_DIM: usize = 64;

/// Monic polynomial `zⁿ + c_{n-1} zⁿ⁻¹ + … + c_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    /// Coefficients in ascending order of degree; the last one is `1`.
    pub coefficients: Vec<Complex64>,
    // The same coefficients in double-double precision; root finding uses these.
    extended: Vec<Cdd>,
}

impl CharPoly {
    /// Wraps f64 coefficients (ascending order, monic).
    pub fn from_coefficients(coefficients: Vec<Complex64>) -> Self {
        let extended = coefficients.iter().map(|&c| Cdd::from_c64(c)).collect();
        CharPoly { coefficients, extended }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by Horner's scheme in extended precision.
    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let z = Cdd::from_c64(z);
        let mut p = Cdd::default();
        let mut dp = Cdd::default();
        for &c in self.extended.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p.to_c64(), dp.to_c64())
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imaginary(&self) -> f64 {
        self.coefficients.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// All roots by simultaneous Aberth–Ehrlich iteration.
    pub fn roots(&self) -> Vec<Complex64> {
        aberth_roots(self)
    }
}

/// Faddeev–LeVerrier: `M₁ = I`, `c_{n-k} = -tr(A M_k)/k`,
/// `M_{k+1} = A M_k + c_{n-k} I`.
pub fn char_poly(matrix: &ComplexMatrix) -> Result<CharPoly> {
    let n = matrix.dim();
    if n > MAX_CHAR_POLY_DIM {
        return Err(Error::domain(format!(
            "characteristic polynomial limited to dimension {MAX_CHAR_POLY_DIM}, got {n}"
        )));
    }
    let a: Vec<Cdd> = (0..n * n)
        .map(|k| Cdd::from_c64(matrix.get(k / n, k % n)))
        .collect();
    let mut coeffs = vec![Cdd::default(); n + 1];
    coeffs[n] = Cdd::from_c64(Complex64::new(1.0, 0.0));
    let mut m = vec![Cdd::default(); n * n];
    for i in 0..n {
        m[i * n + i] = coeffs[n];
    }
    let mut am = vec![Cdd::default(); n * n];
    for k in 1..=n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = Cdd::default();
                for l in 0..n {
                    acc = acc + a[i * n + l] * m[l * n + j];
                }
                am[i * n + j] = acc;
            }
        }
        let trace = (0..n).fold(Cdd::default(), |t, i| t + am[i * n + i]);
        let c = (-trace).div_f64(k as f64);
        coeffs[n - k] = c;
        std::mem::swap(&mut m, &mut am);
        for i in 0..n {
            m[i * n + i] = m[i * n + i] + c;
        }
    }
    Ok(CharPoly {
        coefficients: coeffs.iter().map(|c| c.to_c64()).collect(),
        extended: coeffs,
    })
}

fn aberth_roots(poly: &CharPoly) -> Vec<Complex64> {
    let n = poly.degree();
    if n == 0 {
        return Vec::new();
    }
    let coeffs = &poly.coefficients;
    // Cauchy upper bound on root moduli.
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    if coeffs[..n].iter().all(|c| c.norm() == 0.0) {
        return vec![Complex64::new(0.0, 0.0); n];
    }
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(0.5 * radius.min(4.0), angle)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..2000 {
        let mut moved = false;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = poly.eval_with_derivative(z[k]);
            if p.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let newton = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let diff = z[k] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                done[k] = true;
                continue;
            }
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z[k].norm()) {
                done[k] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_matrix_is_pure_power() {
        let p = char_poly(&ComplexMatrix::zeros(4)).unwrap();
        assert_eq!(p.coefficients, vec![c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        assert_eq!(p.roots(), vec![c(0., 0.); 4]);
    }

    #[test]
    fn dimension_guard() {
        assert!(matches!(char_poly(&ComplexMatrix::zeros(65)), Err(Error::Domain(_))));
    }

    #[test]
    fn roots_of_known_polynomial() {
        // (z - 1)(z + 2)(z - i) = z³ + (1 - i) z² + (-2 - i) z + 2i
        let p = CharPoly::from_coefficients(vec![c(0., 2.), c(-2., -1.), c(1., -1.), c(1., 0.)]);
        let roots = p.roots();
        let expected = [c(1., 0.), c(-2., 0.), c(0., 1.)];
        assert!(crate::matching::multiset_distance(&roots, &expected) < 1e-13);
    }

    #[test]
    fn diagonal_matrix_coefficients() {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 0, c(2.0, 0.0));
        m.set(1, 1, c(3.0, 0.0));
        let p = char_poly(&m).unwrap();
        assert_eq!(p.coefficients, vec![c(6., 0.), c(-5., 0.), c(1., 0.)]);
    }
}
