//! Eigenvalues of real symmetric matrices: Householder tridiagonalization
//! followed by the implicit-shift QL iteration (`tql` lineage). Eigenvectors
//! are never needed on the symmetric path, so nothing is accumulated.

use alloc::vec;
use alloc::vec::Vec;

// f64 math resolves through libm on no_std targets; host builds shadow
// this with the inherent std methods
#[allow(unused_imports)]
use num_traits::Float;

use super::{DenseMatrix, LinalgError};

const EPS: f64 = f64::EPSILON;
const MAX_QL_ITER: usize = 50;

pub(super) fn eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let n = m.dim();
    let mut a: Vec<f64> = m.data().to_vec();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tridiagonalize(n, &mut a, &mut d, &mut e);
    ql_implicit(n, &mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Reduces the symmetric matrix in `a` (full storage, lower triangle
/// authoritative) to tridiagonal form: diagonal in `d`, subdiagonal in
/// `e[1..]`.
fn tridiagonalize(n: usize, a: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let mut u = vec![0.0f64; n];
    let mut p = vec![0.0f64; n];

    for i in (1..n).rev() {
        let l = i - 1;
        let mut scale = 0.0;
        for k in 0..=l {
            scale += a[i * n + k].abs();
        }
        if scale == 0.0 || i == 1 {
            e[i] = a[i * n + l];
            continue;
        }

        let mut h = 0.0;
        for k in 0..=l {
            u[k] = a[i * n + k] / scale;
            h += u[k] * u[k];
        }
        let f = u[l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        u[l] = f - g;

        // p = A u / h on the leading (i x i) block
        for j in 0..=l {
            let mut sum = 0.0;
            for k in 0..=j {
                sum += a[j * n + k] * u[k];
            }
            for k in (j + 1)..=l {
                sum += a[k * n + j] * u[k];
            }
            p[j] = sum / h;
        }
        let mut ut_p = 0.0;
        for j in 0..=l {
            ut_p += u[j] * p[j];
        }
        let k_scale = ut_p / (2.0 * h);
        // q = p - K u, rank-two update A -= u q' + q u'
        for j in 0..=l {
            p[j] -= k_scale * u[j];
        }
        for j in 0..=l {
            for k in 0..=j {
                a[j * n + k] -= u[j] * p[k] + p[j] * u[k];
            }
        }
    }

    for i in 0..n {
        d[i] = a[i * n + i];
    }
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal (d, e).
fn ql_implicit(n: usize, d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let mut total_iter = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= EPS * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                total_iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(LinalgError::NonConvergence { iterations: total_iter });
                }

                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn hypot(a: f64, b: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    if a > b {
        a * (1.0 + (b / a) * (b / a)).sqrt()
    } else if b != 0.0 {
        b * (1.0 + (a / b) * (a / b)).sqrt()
    } else {
        0.0
    }
}
