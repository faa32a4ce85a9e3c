//! Small dense real matrix kernels.
//!
//! Everything here works on matrices of dimension at most a few dozen, so the
//! routines favour clarity over blocking or cache tricks: an unpivoted
//! Cholesky factorization for positive definite systems and a cyclic Jacobi
//! sweep for symmetric eigendecompositions.

mod matrix;

pub use matrix::{Mat, SymMat};

use crate::error::{Error, Result};

/// Relative pivot tolerance for the Cholesky factorization.
const PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` with `m = L L^T`.
pub fn cholesky(m: &SymMat) -> Result<Mat> {
    let n = m.dim();
    let max_diag = m.diagonal().into_iter().fold(0.0, f64::max);
    let floor = PIVOT_TOL * max_diag.max(f64::MIN_POSITIVE);
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Natural log of the determinant of a positive definite matrix.
pub fn logdet_pd(m: &SymMat) -> Result<f64> {
    let l = cholesky(m)?;
    Ok(2.0 * (0..m.dim()).map(|i| l[(i, i)].ln()).sum::<f64>())
}

/// Solves `m x = b` for positive definite `m`.
pub fn solve_pd(m: &SymMat, b: &Mat) -> Result<Mat> {
    let n = m.dim();
    if b.rows() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, expected {n}",
            b.rows()
        )));
    }
    let l = cholesky(m)?;
    let mut x = b.clone();
    for c in 0..b.cols() {
        // forward: L y = b
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

pub fn inverse_pd(m: &SymMat) -> Result<SymMat> {
    let inv = solve_pd(m, &Mat::identity(m.dim()))?;
    Ok(SymMat::from_mat(&inv))
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and a matrix whose columns are the
/// corresponding orthonormal eigenvectors.
pub fn eigen_sym(m: &SymMat) -> (Vec<f64>, Mat) {
    let n = m.dim();
    let mut a = m.as_mat().clone();
    let mut v = Mat::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

pub fn min_eigenvalue(m: &SymMat) -> f64 {
    eigen_sym(m).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// Rebuilds `V diag(f(lambda)) V^T`.
fn spectral_map(m: &SymMat, f: impl Fn(f64) -> f64) -> SymMat {
    let n = m.dim();
    let (vals, vecs) = eigen_sym(m);
    let mapped: Vec<f64> = vals.into_iter().map(f).collect();
    SymMat::from_upper(n, |i, j| {
        (0..n).map(|k| vecs[(i, k)] * mapped[k] * vecs[(j, k)]).sum()
    })
}

/// Euclidean projection onto the PSD cone (negative eigenvalues clipped).
pub fn clip_psd(m: &SymMat) -> SymMat {
    spectral_map(m, |l| l.max(0.0))
}

/// Maps a symmetric matrix into `{Q PSD, Q_kk <= caps_k}`.
///
/// Eigenvalues are clipped at zero, then rows and columns are rescaled by
/// `min(1, sqrt(cap_k / Q_kk))`. The congruence keeps the result PSD. This is
/// not the Euclidean projection onto the intersection, only a feasible map
/// that leaves feasible inputs untouched.
pub fn project_psd_capped(m: &SymMat, caps: &[f64]) -> SymMat {
    assert_eq!(caps.len(), m.dim(), "one cap per diagonal entry");
    let clipped = if min_eigenvalue(m) >= 0.0 {
        m.clone()
    } else {
        clip_psd(m)
    };
    rescale_diagonal(&clipped, caps)
}

fn rescale_diagonal(m: &SymMat, caps: &[f64]) -> SymMat {
    let s: Vec<f64> = m
        .diagonal()
        .iter()
        .zip(caps)
        .map(|(&d, &c)| if d > c { (c / d).sqrt() } else { 1.0 })
        .collect();
    if s.iter().all(|&v| v == 1.0) {
        return m.clone();
    }
    SymMat::from_upper(m.dim(), |i, j| s[i] * s[j] * m.get(i, j))
}

/// Euclidean projection onto `{Q PSD, Q_kk <= caps_k}` by Dykstra's
/// alternating projections, finished with [`project_psd_capped`] so the
/// returned matrix is feasible even if the iteration stops early.
pub fn project_psd_capped_exact(m: &SymMat, caps: &[f64]) -> SymMat {
    assert_eq!(caps.len(), m.dim(), "one cap per diagonal entry");
    let n = m.dim();
    let mut x = m.clone();
    let mut p = SymMat::zeros(n);
    let mut q = SymMat::zeros(n);
    for _ in 0..500 {
        let y = clip_psd(&x.add(&p));
        p = x.add(&p).sub(&y);
        let mut next = y.add(&q);
        for (i, &c) in caps.iter().enumerate() {
            if next.get(i, i) > c {
                next.set(i, i, c);
            }
        }
        q = y.add(&q).sub(&next);
        let moved = next.max_abs_diff(&x);
        x = next;
        if moved < 1e-14 * (1.0 + x.frobenius()) {
            break;
        }
    }
    project_psd_capped(&x, caps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn logdet_examples() {
        assert!(close(logdet_pd(&SymMat::identity(3)).unwrap(), 0.0, 1e-15));
        let d = logdet_pd(&SymMat::diag(&[2.0, 2.0])).unwrap();
        assert!(close(d, 2.0 * 2f64.ln(), 1e-12));
        let m = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!(close(logdet_pd(&m).unwrap(), 3f64.ln(), 1e-12));
    }

    #[test]
    fn logdet_rejects_indefinite() {
        let m = SymMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            logdet_pd(&m),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
        assert!(logdet_pd(&SymMat::diag(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn solve_examples() {
        let b = Mat::column(&[1.5, -2.0, 3.0]);
        let x = solve_pd(&SymMat::identity(3), &b).unwrap();
        assert!(x.max_abs_diff(&b) < 1e-15);

        let x = solve_pd(&SymMat::diag(&[4.0]), &Mat::column(&[8.0])).unwrap();
        assert!(close(x[(0, 0)], 2.0, 1e-15));

        let m = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let x = solve_pd(&m, &Mat::column(&[3.0, 3.0])).unwrap();
        assert!(x.max_abs_diff(&Mat::column(&[1.0, 1.0])) < 1e-14);
    }

    #[test]
    fn solve_checks_dimensions() {
        let err = solve_pd(&SymMat::identity(2), &Mat::column(&[1.0, 2.0, 3.0]));
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn projection_examples() {
        let caps = [1.0, 1.0];
        let feasible = SymMat::from_rows(&[vec![0.5, 0.2], vec![0.2, 0.8]]).unwrap();
        assert_eq!(project_psd_capped(&feasible, &caps), feasible);

        let p = project_psd_capped(&SymMat::diag(&[-1.0, 2.0]), &caps);
        assert!(p.max_abs_diff(&SymMat::diag(&[0.0, 1.0])) < 1e-12);

        let m = SymMat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let p = project_psd_capped(&m, &caps);
        let want = SymMat::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!(p.max_abs_diff(&want) < 1e-12);
        assert!(min_eigenvalue(&p) >= 0.0);
    }

    #[test]
    fn exact_projection_hits_kkt_point() {
        // diag(3, 0.5) projected onto diag <= 1 is diag(1, 0.5).
        let p = project_psd_capped_exact(&SymMat::diag(&[3.0, 0.5]), &[1.0, 1.0]);
        assert!(p.max_abs_diff(&SymMat::diag(&[1.0, 0.5])) < 1e-10);
        // Feasible points are fixed.
        let f = SymMat::from_rows(&[vec![0.9, 0.3], vec![0.3, 0.4]]).unwrap();
        assert!(project_psd_capped_exact(&f, &[1.0, 1.0]).max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn jacobi_reconstructs() {
        let m = SymMat::from_rows(&[
            vec![4.0, 1.0, -2.0],
            vec![1.0, 3.0, 0.5],
            vec![-2.0, 0.5, 1.0],
        ])
        .unwrap();
        let (vals, vecs) = eigen_sym(&m);
        let rebuilt = SymMat::from_upper(3, |i, j| {
            (0..3).map(|k| vecs[(i, k)] * vals[k] * vecs[(j, k)]).sum()
        });
        assert!(rebuilt.max_abs_diff(&m) < 1e-12);
        let trace: f64 = vals.iter().sum();
        assert!(close(trace, 8.0, 1e-12));
    }
}
