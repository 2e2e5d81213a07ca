//! Small dense linear-algebra helpers shared across modules.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::types::c64;
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};

/// Neumaier-compensated dot product. Identity checks against 1e-12-level
/// tolerances need the extra bits once operator norms reach ~1/h^2.
pub fn dot_compensated(x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (a, b) in x.iter().zip(y.iter()) {
        let p = a * b;
        let t = sum + p;
        if sum.abs() >= p.abs() {
            comp += (sum - t) + p;
        } else {
            comp += (p - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Symmetric matrix power through a full eigendecomposition.
///
/// Eigenvalues below `rel_kernel_tol * lambda_max` are treated as kernel
/// directions; with `ground_kernel` they receive unit weight instead of
/// blowing up under a negative power (the grounded operator agrees with
/// the true power on the orthogonal complement of the kernel).
pub fn sym_power(a: &Array2<f64>, p: f64, ground_kernel: bool) -> Result<Array2<f64>> {
    let (vals, vecs) = a.eigh(UPLO::Lower)?;
    let vmax = vals.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-12 * vmax.max(1.0);
    let powered: Array1<f64> = vals
        .iter()
        .map(|&v| {
            if v <= tol {
                if ground_kernel {
                    Ok(1.0)
                } else if v <= 0.0 {
                    Err(Error::invalid(
                        "matrix",
                        format!("non-positive eigenvalue {v:e} under power {p}"),
                    ))
                } else {
                    Ok(v.powf(p))
                }
            } else {
                Ok(v.powf(p))
            }
        })
        .collect::<Result<Vec<f64>>>()?
        .into();
    let scaled = &vecs * &powered; // scales columns
    Ok(scaled.dot(&vecs.t()))
}

/// Dense symmetric-definite generalized eigenproblem `A x = lambda B x`
/// via Cholesky reduction; returns eigenvalues ascending with eigenvectors
/// as columns (B-orthonormal).
pub fn generalized_eigh(a: &Array2<f64>, b: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    use ndarray_linalg::{Cholesky, Inverse};
    let l = b.cholesky(UPLO::Lower)?;
    let linv = l.inv()?;
    let c = linv.dot(a).dot(&linv.t());
    let c = 0.5 * (&c + &c.t());
    let (vals, y) = c.eigh(UPLO::Lower)?;
    let x = linv.t().dot(&y);
    Ok((vals, x))
}

pub fn to_complex(a: ArrayView2<f64>) -> Array2<c64> {
    a.mapv(|x| c64::new(x, 0.0))
}

/// Euclidean norm of a complex vector.
pub fn cnorm(v: &Array1<c64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm.
pub fn fro(a: &Array2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn all_finite(v: ArrayView1<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}
