//! Dense complex kernels backing the steady-state solver and its checks:
//! a column-pivoted Householder QR least-squares routine with rank
//! detection, a cyclic Jacobi eigensolver for Hermitian matrices and a
//! Hessenberg/shifted-QR routine for general complex spectra.

use ndarray::Array2;
use num_complex::Complex64;

/// Result of a least-squares solve. `rank` counts pivots above the
/// relative threshold; `residual` is the 2-norm of the unreachable part
/// of the right-hand side.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    pub rank: usize,
    pub residual: f64,
}

/// Minimum-residual basic solution of `a * x ≈ rhs` via Householder QR
/// with column pivoting. A pivot column whose trailing norm falls below
/// `rel_tol` times the first pivot is treated as dependent, so
/// `rank < ncols` flags a solution space with more than one dimension.
pub fn lstsq_qr_pivoted(a: &Array2<Complex64>, rhs: &[Complex64], rel_tol: f64) -> LeastSquares {
    let (m, n) = (a.nrows(), a.ncols());
    assert_eq!(rhs.len(), m, "rhs length must match row count");
    let kmax = m.min(n);
    let mut w = a.clone();
    let mut b: Vec<Complex64> = rhs.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut v = vec![Complex64::ZERO; m];
    let mut rank = 0;
    let mut first_pivot = 0.0f64;

    for k in 0..kmax {
        // Column norms are recomputed per step; the factor-of-two cost buys
        // immunity to the cancellation that plagues norm downdating.
        let mut best = k;
        let mut best_sq = -1.0;
        for j in k..n {
            let sq: f64 = (k..m).map(|i| w[[i, j]].norm_sqr()).sum();
            if sq > best_sq {
                best_sq = sq;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                w.swap([i, k], [i, best]);
            }
            perm.swap(k, best);
        }
        let xnorm = best_sq.max(0.0).sqrt();
        if k == 0 {
            first_pivot = xnorm;
        }
        if xnorm == 0.0 || xnorm < rel_tol * first_pivot {
            break;
        }
        rank += 1;

        let alpha = w[[k, k]];
        let phase = if alpha.norm() == 0.0 {
            Complex64::ONE
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * xnorm;
        for i in k..m {
            v[i] = w[[i, k]];
        }
        v[k] -= beta;
        let vsq: f64 = (k..m).map(|i| v[i].norm_sqr()).sum();
        if vsq > 0.0 {
            let scale = 2.0 / vsq;
            for j in (k + 1)..n {
                let dot: Complex64 = (k..m).map(|i| v[i].conj() * w[[i, j]]).sum();
                let f = scale * dot;
                for i in k..m {
                    w[[i, j]] -= f * v[i];
                }
            }
            let dotb: Complex64 = (k..m).map(|i| v[i].conj() * b[i]).sum();
            let f = scale * dotb;
            for i in k..m {
                b[i] -= f * v[i];
            }
        }
        w[[k, k]] = beta;
        for i in (k + 1)..m {
            w[[i, k]] = Complex64::ZERO;
        }
    }

    let mut xp = vec![Complex64::ZERO; n];
    for k in (0..rank).rev() {
        let mut acc = b[k];
        for j in (k + 1)..rank {
            acc -= w[[k, j]] * xp[j];
        }
        xp[k] = acc / w[[k, k]];
    }
    let mut solution = vec![Complex64::ZERO; n];
    for j in 0..n {
        solution[perm[j]] = xp[j];
    }
    let residual = (rank..m).map(|i| b[i].norm_sqr()).sum::<f64>().sqrt();
    LeastSquares {
        solution,
        rank,
        residual,
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, sorted
/// ascending. The input is symmetrized first, so tiny anti-Hermitian
/// noise from upstream arithmetic is harmless.
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    let mut w = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            w[[i, j]] = 0.5 * (a[[i, j]] + a[[j, i]].conj());
        }
    }
    let fro: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if fro == 0.0 {
        return vec![0.0; n];
    }
    let stop = 1e-14 * fro;

    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| w[[p, q]].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[[p, q]];
                let am = apq.norm();
                if am <= 1e-300 {
                    continue;
                }
                let phase = apq / am;
                let app = w[[p, p]].re;
                let aqq = w[[q, q]].re;
                let theta = (aqq - app) / (2.0 * am);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = w[[i, p]];
                    let aiq = w[[i, q]];
                    w[[i, p]] = c * aip - s * phase.conj() * aiq;
                    w[[i, q]] = s * phase * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = w[[p, j]];
                    let aqj = w[[q, j]];
                    w[[p, j]] = c * apj - s * phase * aqj;
                    w[[q, j]] = s * phase.conj() * apj + c * aqj;
                }
                w[[p, q]] = Complex64::ZERO;
                w[[q, p]] = Complex64::ZERO;
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| w[[i, i]].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Complex Givens rotation `[c, s; -conj(s), c]` mapping `(f, g)` to
/// `(r, 0)` with real `c`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    if g.norm() == 0.0 {
        return (1.0, Complex64::ZERO, f);
    }
    if f.norm() == 0.0 {
        let ga = g.norm();
        return (0.0, g.conj() / ga, Complex64::new(ga, 0.0));
    }
    let fa = f.norm();
    let r = (fa * fa + g.norm_sqr()).sqrt();
    let c = fa / r;
    let s = (f / fa) * g.conj() / r;
    let rr = (f / fa) * r;
    (c, s, rr)
}

/// Eigenvalues of a general complex matrix: Householder reduction to
/// upper Hessenberg form followed by Wilkinson-shifted QR iterations.
/// Intended for the modest dimensions of spectrum spot checks.
pub fn general_eigenvalues(a: &Array2<Complex64>) -> Vec<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[[0, 0]]];
    }
    let mut h = a.clone();
    let mut v = vec![Complex64::ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let xsq: f64 = ((k + 1)..n).map(|i| h[[i, k]].norm_sqr()).sum();
        let xnorm = xsq.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let alpha = h[[k + 1, k]];
        let phase = if alpha.norm() == 0.0 {
            Complex64::ONE
        } else {
            alpha / alpha.norm()
        };
        let beta = -phase * xnorm;
        for i in (k + 1)..n {
            v[i] = h[[i, k]];
        }
        v[k + 1] -= beta;
        let vsq: f64 = ((k + 1)..n).map(|i| v[i].norm_sqr()).sum();
        if vsq == 0.0 {
            continue;
        }
        let scale = 2.0 / vsq;
        // similarity transform with the (Hermitian, unitary) reflector
        for j in k..n {
            let dot: Complex64 = ((k + 1)..n).map(|i| v[i].conj() * h[[i, j]]).sum();
            let f = scale * dot;
            for i in (k + 1)..n {
                h[[i, j]] -= f * v[i];
            }
        }
        for i in 0..n {
            let dot: Complex64 = ((k + 1)..n).map(|j| h[[i, j]] * v[j]).sum();
            let f = scale * dot;
            for j in (k + 1)..n {
                h[[i, j]] -= f * v[j].conj();
            }
        }
        h[[k + 1, k]] = beta;
        for i in (k + 2)..n {
            h[[i, k]] = Complex64::ZERO;
        }
    }

    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut iters = 0usize;
    let eps = 1e-14;
    let mut cs: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    while hi > 0 {
        // deflate converged trailing eigenvalues
        let mut lo = hi - 1;
        while lo > 0 {
            let s = h[[lo - 1, lo - 1]].norm() + h[[lo, lo]].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[[lo, lo - 1]].norm() <= eps * s {
                h[[lo, lo - 1]] = Complex64::ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs.push(h[[lo, lo]]);
            hi -= 1;
            iters = 0;
            continue;
        }

        iters += 1;
        let mu = if iters.is_multiple_of(16) {
            // exceptional shift to break rare oscillation
            Complex64::new(h[[hi - 1, hi - 2]].norm() + h[[hi - 2, hi - 2]].norm(), 0.0)
        } else {
            let a11 = h[[hi - 2, hi - 2]];
            let a12 = h[[hi - 2, hi - 1]];
            let a21 = h[[hi - 1, hi - 2]];
            let a22 = h[[hi - 1, hi - 1]];
            let tr = a11 + a22;
            let det = a11 * a22 - a12 * a21;
            let disc = (tr * tr - 4.0 * det).sqrt();
            let mu1 = 0.5 * (tr + disc);
            let mu2 = 0.5 * (tr - disc);
            if (mu1 - a22).norm() < (mu2 - a22).norm() {
                mu1
            } else {
                mu2
            }
        };
        if iters > 300 {
            // best effort: accept the current diagonal entry
            eigs.push(h[[hi - 1, hi - 1]]);
            hi -= 1;
            iters = 0;
            continue;
        }

        for i in lo..hi {
            h[[i, i]] -= mu;
        }
        cs.clear();
        for i in lo..(hi - 1) {
            let (c, s, r) = givens(h[[i, i]], h[[i + 1, i]]);
            h[[i, i]] = r;
            h[[i + 1, i]] = Complex64::ZERO;
            for j in (i + 1)..hi {
                let top = h[[i, j]];
                let bot = h[[i + 1, j]];
                h[[i, j]] = c * top + s * bot;
                h[[i + 1, j]] = -s.conj() * top + c * bot;
            }
            cs.push((c, s));
        }
        for (idx, &(c, s)) in cs.iter().enumerate() {
            let i = lo + idx;
            let rmax = (i + 2).min(hi);
            for r in lo..rmax {
                let left = h[[r, i]];
                let right = h[[r, i + 1]];
                h[[r, i]] = c * left + s.conj() * right;
                h[[r, i + 1]] = -s * left + c * right;
            }
        }
        for i in lo..hi {
            h[[i, i]] += mu;
        }
    }
    eigs
}
