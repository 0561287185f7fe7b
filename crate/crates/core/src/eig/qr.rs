//! Balancing, Householder reduction to upper Hessenberg form, and the
//! shifted complex QR iteration on the Hessenberg matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

const RADIX: f64 = 2.0;

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity scaling by powers of two so that row and column
/// norms are comparable. Exact in floating point; eigenvalues unchanged.
pub(crate) fn balance(a: &mut DMatrix<Complex64>) {
    let n = a.nrows();
    let sqr = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[(j, i)]);
                    r += abs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut g = r / RADIX;
            let mut f = 1.0;
            while c < g {
                f *= RADIX;
                c *= sqr;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqr;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction; entries below the first subdiagonal are
/// set to exactly zero.
pub(crate) fn reduce_to_hessenberg(a: &mut DMatrix<Complex64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let unit = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -unit * norm;
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut().take(n).skip(k + 1) {
            *vi /= vnorm;
        }
        // A ← (I - 2vvᴴ) A
        for j in k..n {
            let dot: Complex64 = (k + 1..n).map(|i| v[i].conj() * a[(i, j)]).sum();
            for i in k + 1..n {
                a[(i, j)] -= 2.0 * v[i] * dot;
            }
        }
        // A ← A (I - 2vvᴴ)
        for i in 0..n {
            let dot: Complex64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            for j in k + 1..n {
                a[(i, j)] -= 2.0 * dot * v[j].conj();
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Eigenvalues of the 2×2 block `[[a, b], [c, d]]`.
pub(crate) fn eig22(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let s = abs1(a) + abs1(b) + abs1(c) + abs1(d);
    if s == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    let (a, b, c, d) = (a / s, b / s, c / s, d / s);
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    ((half_tr + disc) * s, (half_tr - disc) * s)
}

/// Givens rotation `[[c, s], [-s̄, c]]` with real `c` mapping `(x, y)` to
/// `(r, 0)`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == Complex64::new(0.0, 0.0) {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let xn = x.norm();
    if xn == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let r = xn.hypot(y.norm());
    (xn / r, (x / xn) * y.conj() / r)
}

pub(crate) struct QrOutcome {
    pub eigenvalues: Vec<Complex64>,
    pub converged: bool,
}

/// Shifted QR iteration on an upper Hessenberg matrix. Only the active
/// unreduced window is updated, so the matrix is destroyed and no Schur
/// vectors are produced.
///
/// `sweep_budget` counts QR sweeps over the whole run.
pub(crate) fn hessenberg_qr(h: &mut DMatrix<Complex64>, sweep_budget: usize) -> QrOutcome {
    let n = h.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let mut eigs = vec![zero; n];
    if n == 0 {
        return QrOutcome { eigenvalues: eigs, converged: true };
    }
    let scale = h.iter().map(|z| abs1(*z)).fold(0.0, f64::max);
    let eps = f64::EPSILON;
    let mut hi = n as isize - 1;
    let mut sweeps = 0;
    let mut stalled = 0;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    while hi >= 0 {
        let top = hi as usize;
        let mut lo = top;
        while lo > 0 {
            let mut s = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if s == 0.0 {
                s = scale;
            }
            if abs1(h[(lo, lo - 1)]) <= eps * s {
                h[(lo, lo - 1)] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == top {
            eigs[top] = h[(top, top)];
            hi -= 1;
            stalled = 0;
            continue;
        }
        if lo + 1 == top {
            let (e1, e2) = eig22(h[(lo, lo)], h[(lo, top)], h[(top, lo)], h[(top, top)]);
            eigs[lo] = e1;
            eigs[top] = e2;
            hi -= 2;
            stalled = 0;
            continue;
        }
        if sweeps >= sweep_budget {
            for i in 0..=top {
                eigs[i] = h[(i, i)];
            }
            return QrOutcome { eigenvalues: eigs, converged: false };
        }
        sweeps += 1;
        stalled += 1;

        let shift = if stalled % 10 == 0 {
            // exceptional shift to break cycles
            h[(top, top)] + Complex64::new(0.75 * abs1(h[(top, top - 1)]), 0.0)
        } else {
            let (e1, e2) = eig22(
                h[(top - 1, top - 1)],
                h[(top - 1, top)],
                h[(top, top - 1)],
                h[(top, top)],
            );
            let d = h[(top, top)];
            if (e1 - d).norm() <= (e2 - d).norm() { e1 } else { e2 }
        };

        for k in lo..=top {
            h[(k, k)] -= shift;
        }
        rot.clear();
        for k in lo..top {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=top {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rot.push((c, s));
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(top) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + s.conj() * y;
                h[(i, k + 1)] = -s * x + y * c;
            }
        }
        for k in lo..=top {
            h[(k, k)] += shift;
        }
    }
    QrOutcome { eigenvalues: eigs, converged: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hessenberg_form_preserves_trace_and_zeros_below() {
        let n = 6;
        let mut a = DMatrix::from_fn(n, n, |i, j| c((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.3));
        let trace = a.trace();
        let fro = a.norm();
        reduce_to_hessenberg(&mut a);
        for i in 0..n {
            for j in 0..n {
                if i > j + 1 {
                    assert_eq!(a[(i, j)], c(0.0, 0.0));
                }
            }
        }
        assert!((a.trace() - trace).norm() < 1e-12);
        assert!((a.norm() - fro).abs() < 1e-12);
    }

    #[test]
    fn triangular_input_returns_diagonal() {
        let mut a = DMatrix::from_fn(4, 4, |i, j| if i <= j { c(i as f64 + 1.0, -(j as f64)) } else { c(0.0, 0.0) });
        let out = hessenberg_qr(&mut a, 100);
        assert!(out.converged);
        let mut re: Vec<f64> = out.eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert_eq!(re, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn eig22_handles_zero_and_jordan_blocks() {
        assert_eq!(eig22(c(0., 0.), c(0., 0.), c(0., 0.), c(0., 0.)), (c(0., 0.), c(0., 0.)));
        let (a, b) = eig22(c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.));
        assert!((a - c(1., 0.)).norm() < 1e-15 && (b - c(1., 0.)).norm() < 1e-15);
        let (a, b) = eig22(c(0., 0.), c(-1., 0.), c(1., 0.), c(0., 0.));
        let mut im = [a.im, b.im];
        im.sort_by(f64::total_cmp);
        assert!((im[0] + 1.0).abs() < 1e-15 && (im[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_budget_reports_unconverged() {
        let mut a = DMatrix::from_fn(5, 5, |i, j| if i.abs_diff(j) == 1 { c(-1.0, 0.0) } else { c(0.0, 0.0) });
        let out = hessenberg_qr(&mut a, 0);
        assert!(!out.converged);
    }
}
