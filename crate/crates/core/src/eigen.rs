//! Cyclic Jacobi eigenvalue iteration for real symmetric matrices.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Absolute off-diagonal Frobenius norm at which iteration stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Sweeps every `(p, q)` pair in row order with a plane rotation that
/// annihilates `a_pq` until the off-diagonal Frobenius norm drops below
/// [`OFF_DIAGONAL_TOL`] (or the rounding floor of the working precision,
/// whichever is larger). Only the upper triangle is read or written.
pub fn symmetric_eigenvalues<T: Scalar>(matrix: &Matrix<T>) -> Result<Vec<T>> {
    let n = matrix.dim();
    let mut a = matrix.clone();
    let floor = T::epsilon() * T::lit(16.0) * upper_frobenius(&a);
    let tol = T::lit(OFF_DIAGONAL_TOL).max(floor);
    let tol_sq = tol * tol;
    // an entry below this cannot on its own keep the norm above `tol`
    let negligible = tol / T::from_count(n.max(1));

    let mut sweeps = 0;
    loop {
        let off = off_upper_sq(&a);
        // both triangles count toward the Frobenius norm
        if off + off <= tol_sq {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() > negligible {
                    rotate(&mut a, p, q);
                }
            }
        }
    }

    let mut values: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    values.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(values)
}

fn upper_frobenius<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for i in 0..n {
        let row = a.row(i);
        s = s + row[i] * row[i];
        for &x in &row[i + 1..] {
            s = s + (x + x) * x;
        }
    }
    s.sqrt()
}

fn off_upper_sq<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for i in 0..n {
        for &x in &a.row(i)[i + 1..] {
            s = s + x * x;
        }
    }
    s
}

/// Plane rotation in the `(p, q)` plane, `p < q`, touching the upper triangle only.
#[inline]
fn rotate<T: Scalar>(a: &mut Matrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (apq + apq);
    // smaller root of t^2 + 2 theta t - 1 = 0
    let t = if theta.is_infinite() {
        T::zero()
    } else {
        let sign = if theta >= T::zero() {
            T::one()
        } else {
            -T::one()
        };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let n = a.dim();
    let data = a.as_mut_slice();
    data[p * n + p] = app - t * apq;
    data[q * n + q] = aqq + t * apq;
    data[p * n + q] = T::zero();
    let mix = |g: T, h: T| (c * g - s * h, s * g + c * h);
    for k in 0..p {
        let (g, h) = mix(data[k * n + p], data[k * n + q]);
        data[k * n + p] = g;
        data[k * n + q] = h;
    }
    for k in p + 1..q {
        let (g, h) = mix(data[p * n + k], data[k * n + q]);
        data[p * n + k] = g;
        data[k * n + q] = h;
    }
    let (row_p, row_q) = data.split_at_mut(q * n);
    let row_p = &mut row_p[p * n + q + 1..p * n + n];
    let row_q = &mut row_q[q + 1..n];
    for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (g, h) = mix(*x, *y);
        *x = g;
        *y = h;
    }
}
