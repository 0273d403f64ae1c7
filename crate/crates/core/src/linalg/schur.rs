//! Balance, Householder-Hessenberg reduction and shifted-QR iteration for
//! real nonsymmetric matrices.
//!
//! Derived from the Algol procedures `balance`, `orthes`/`ortran` and `hqr2`
//! by Martin, Parlett, Reinsch and Wilkinson (Handbook for Automatic
//! Computation, Vol. II) and their EISPACK / JAMA descendants. [`hqr_values`]
//! is the eigenvalue-only variant: updates stay inside the active window and
//! no transformations are accumulated.

use alloc::vec;
use alloc::vec::Vec;

// f64 math resolves through libm on no_std targets; host builds shadow
// this with the inherent std methods
#[allow(unused_imports)]
use num_traits::Float;

use super::{DenseMatrix, LinalgError};

const EPS: f64 = f64::EPSILON;

/// Iterative scaling so that row and column norms match; similarity
/// transform, eigenvalues unchanged. Returns the per-row scale factors.
pub(super) fn balance(a: &mut DenseMatrix) -> Vec<f64> {
    let n = a.dim();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    let mut scale = vec![1.0f64; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a.get(j, i).abs();
                    r += a.get(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                let mut c_work = c;
                while c_work < g {
                    f *= radix;
                    c_work *= sqrdx;
                }
                g = r * radix;
                while c_work > g {
                    f /= radix;
                    c_work /= sqrdx;
                }
                if (c_work + r) / f < 0.95 * s {
                    done = false;
                    let g_inv = 1.0 / f;
                    scale[i] *= f;
                    for j in 0..n {
                        let v = a.get(i, j) * g_inv;
                        a.set(i, j, v);
                    }
                    for j in 0..n {
                        let v = a.get(j, i) * f;
                        a.set(j, i, v);
                    }
                }
            }
        }
    }
    scale
}

/// Undoes [`balance`] on a matrix of column eigenvectors.
pub(super) fn balance_back(v: &mut DenseMatrix, scale: &[f64]) {
    let n = v.dim();
    for i in 0..n {
        for j in 0..n {
            let val = v.get(i, j) * scale[i];
            v.set(i, j, val);
        }
    }
}

/// Householder reduction to upper Hessenberg form; when `v` is given the
/// orthogonal transformations are accumulated into it (`ortran`).
pub(super) fn hessenberg(hm: &mut DenseMatrix, v: Option<&mut DenseMatrix>) {
    let n = hm.dim();
    if n < 3 {
        return;
    }
    let low = 0usize;
    let high = n - 1;
    let mut ort = vec![0.0f64; n];

    for m in (low + 1)..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += hm.get(i, m - 1).abs();
        }
        if scale != 0.0 {
            let mut h = 0.0;
            for i in (m..=high).rev() {
                ort[i] = hm.get(i, m - 1) / scale;
                h += ort[i] * ort[i];
            }
            let mut g = h.sqrt();
            if ort[m] > 0.0 {
                g = -g;
            }
            h -= ort[m] * g;
            ort[m] -= g;

            // H = (I - u u' / h) H (I - u u' / h)
            for j in m..n {
                let mut f = 0.0;
                for i in (m..=high).rev() {
                    f += ort[i] * hm.get(i, j);
                }
                f /= h;
                for i in m..=high {
                    let val = hm.get(i, j) - f * ort[i];
                    hm.set(i, j, val);
                }
            }
            for i in 0..=high {
                let mut f = 0.0;
                for j in (m..=high).rev() {
                    f += ort[j] * hm.get(i, j);
                }
                f /= h;
                for j in m..=high {
                    let val = hm.get(i, j) - f * ort[j];
                    hm.set(i, j, val);
                }
            }
            ort[m] *= scale;
            hm.set(m, m - 1, scale * g);
        }
    }

    if let Some(v) = v {
        for m in ((low + 1)..high).rev() {
            if hm.get(m, m - 1) != 0.0 {
                for i in (m + 1)..=high {
                    ort[i] = hm.get(i, m - 1);
                }
                for j in m..=high {
                    let mut g = 0.0;
                    for i in m..=high {
                        g += ort[i] * v.get(i, j);
                    }
                    // double division avoids possible underflow
                    g = (g / ort[m]) / hm.get(m, m - 1);
                    for i in m..=high {
                        let val = v.get(i, j) + g * ort[i];
                        v.set(i, j, val);
                    }
                }
            }
        }
    }
}

/// Complex scalar division (Smith's algorithm).
fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
/// iteration, without Schur form or eigenvectors. Row and column updates are
/// confined to the active window.
pub(super) fn hqr_values(hm: &mut DenseMatrix) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    qr_iteration(hm, None)
}

/// Full `hqr2`: reduces the Hessenberg matrix to real Schur form, accumulates
/// the transformations into `v`, then back-substitutes for eigenvectors.
/// On return `v` holds the packed eigenvector columns.
pub(super) fn hqr2(
    hm: &mut DenseMatrix,
    v: &mut DenseMatrix,
) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    qr_iteration(hm, Some(v))
}

fn qr_iteration(
    hm: &mut DenseMatrix,
    mut vectors: Option<&mut DenseMatrix>,
) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let size = hm.dim();
    let full = vectors.is_some();
    let nn = size as isize;
    let mut n = nn - 1;
    let low: isize = 0;
    let high = nn - 1;
    let mut exshift = 0.0f64;
    let mut p = 0.0f64;
    let mut q = 0.0f64;
    let mut r = 0.0f64;
    let mut s = 0.0f64;
    let mut z = 0.0f64;
    let mut t;
    let mut w;
    let mut x;
    let mut y;

    let mut d = vec![0.0f64; size];
    let mut e = vec![0.0f64; size];

    macro_rules! h {
        ($i:expr, $j:expr) => {
            hm.get($i as usize, $j as usize)
        };
    }
    macro_rules! hset {
        ($i:expr, $j:expr, $v:expr) => {
            hm.set($i as usize, $j as usize, $v)
        };
    }

    let mut norm = 0.0f64;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += h!(i, j).abs();
        }
    }

    let mut iter = 0usize;
    let mut total_iter = 0usize;
    // large nilpotent clusters (rank-deficient interconnections) deflate
    // slowly; the caps are generous because a stalled window is small and
    // cheap, and only genuine divergence should error
    let budget = 200 * size.max(1);

    while n >= low {
        // look for a single small sub-diagonal element
        let mut l = n;
        while l > low {
            s = h!(l - 1, l - 1).abs() + h!(l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if h!(l, l - 1).abs() < EPS * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // one root found
            hset!(n, n, h!(n, n) + exshift);
            d[n as usize] = h!(n, n);
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // two roots found
            w = h!(n, n - 1) * h!(n - 1, n);
            p = (h!(n - 1, n - 1) - h!(n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            hset!(n, n, h!(n, n) + exshift);
            hset!(n - 1, n - 1, h!(n - 1, n - 1) + exshift);
            x = h!(n, n);

            if q >= 0.0 {
                // real pair
                z = if p >= 0.0 { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != 0.0 {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = 0.0;
                e[n as usize] = 0.0;
                if full {
                    // rotate to keep the Schur form consistent
                    x = h!(n, n - 1);
                    s = x.abs() + z.abs();
                    p = x / s;
                    q = z / s;
                    r = (p * p + q * q).sqrt();
                    p /= r;
                    q /= r;
                    for j in (n - 1)..nn {
                        z = h!(n - 1, j);
                        hset!(n - 1, j, q * z + p * h!(n, j));
                        hset!(n, j, q * h!(n, j) - p * z);
                    }
                    for i in 0..=n {
                        z = h!(i, n - 1);
                        hset!(i, n - 1, q * z + p * h!(i, n));
                        hset!(i, n, q * h!(i, n) - p * z);
                    }
                    let v = vectors.as_deref_mut().unwrap();
                    for i in low..=high {
                        z = v.get(i as usize, (n - 1) as usize);
                        let vn = v.get(i as usize, n as usize);
                        v.set(i as usize, (n - 1) as usize, q * z + p * vn);
                        v.set(i as usize, n as usize, q * vn - p * z);
                    }
                }
            } else {
                // complex pair
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // no convergence yet; form shift
            x = h!(n, n);
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h!(n - 1, n - 1);
                w = h!(n, n - 1) * h!(n - 1, n);
            }

            // Wilkinson's ad hoc exceptional shift, applied every 10
            // iterations; relying on a single application (JAMA style) can
            // stall on near-circulant blocks
            if iter > 0 && iter % 10 == 0 {
                exshift += x;
                for i in low..=n {
                    hset!(i, i, h!(i, i) - x);
                }
                s = h!(n, n - 1).abs() + h!(n - 1, n - 2).abs();
                y = 0.75 * s;
                x = y;
                w = -0.4375 * s * s;
            }

            iter += 1;
            total_iter += 1;
            if iter > 1000 || total_iter > budget {
                return Err(LinalgError::NonConvergence { iterations: total_iter });
            }

            // look for two consecutive small sub-diagonal elements
            let mut m = n - 2;
            while m >= l {
                z = h!(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / h!(m + 1, m) + h!(m, m + 1);
                q = h!(m + 1, m + 1) - z - r - s;
                r = h!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h!(m, m - 1).abs() * (q.abs() + r.abs())
                    < EPS * (p.abs() * (h!(m - 1, m - 1).abs() + z.abs() + h!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                hset!(i, i - 2, 0.0);
                if i > m + 2 {
                    hset!(i, i - 3, 0.0);
                }
            }

            // double QR step on rows l..=n and columns m..=n
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = h!(k, k - 1);
                    q = h!(k + 1, k - 1);
                    r = if notlast { h!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        hset!(k, k - 1, -s * x);
                    } else if l != m {
                        hset!(k, k - 1, -h!(k, k - 1));
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    // row modification
                    let row_hi = if full { nn - 1 } else { n };
                    for j in k..=row_hi {
                        p = h!(k, j) + q * h!(k + 1, j);
                        if notlast {
                            p += r * h!(k + 2, j);
                            hset!(k + 2, j, h!(k + 2, j) - p * z);
                        }
                        hset!(k, j, h!(k, j) - p * x);
                        hset!(k + 1, j, h!(k + 1, j) - p * y);
                    }

                    // column modification
                    let col_lo = if full { 0 } else { l };
                    for i in col_lo..=n.min(k + 3) {
                        p = x * h!(i, k) + y * h!(i, k + 1);
                        if notlast {
                            p += z * h!(i, k + 2);
                            hset!(i, k + 2, h!(i, k + 2) - p * r);
                        }
                        hset!(i, k, h!(i, k) - p);
                        hset!(i, k + 1, h!(i, k + 1) - p * q);
                    }

                    if let Some(v) = vectors.as_deref_mut() {
                        for i in low..=high {
                            let iu = i as usize;
                            let ku = k as usize;
                            p = x * v.get(iu, ku) + y * v.get(iu, ku + 1);
                            if notlast {
                                p += z * v.get(iu, ku + 2);
                                v.set(iu, ku + 2, v.get(iu, ku + 2) - p * r);
                            }
                            v.set(iu, ku, v.get(iu, ku) - p);
                            v.set(iu, ku + 1, v.get(iu, ku + 1) - p * q);
                        }
                    }
                }
            }
        }
    }

    if !full || norm == 0.0 {
        return Ok((d, e));
    }

    // back-substitute the quasi-triangular form for eigenvectors
    for n in (0..nn).rev() {
        p = d[n as usize];
        q = e[n as usize];

        if q == 0.0 {
            // real vector
            let mut l = n;
            hset!(n, n, 1.0);
            for i in (0..n).rev() {
                w = h!(i, i) - p;
                r = 0.0;
                for j in l..=n {
                    r += h!(i, j) * h!(j, n);
                }
                if e[i as usize] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        if w != 0.0 {
                            hset!(i, n, -r / w);
                        } else {
                            hset!(i, n, -r / (EPS * norm));
                        }
                    } else {
                        // solve the 2x2 real block
                        x = h!(i, i + 1);
                        y = h!(i + 1, i);
                        q = (d[i as usize] - p) * (d[i as usize] - p)
                            + e[i as usize] * e[i as usize];
                        t = (x * s - z * r) / q;
                        hset!(i, n, t);
                        if x.abs() > z.abs() {
                            hset!(i + 1, n, (-r - w * t) / x);
                        } else {
                            hset!(i + 1, n, (-s - y * t) / z);
                        }
                    }
                    // overflow control
                    t = h!(i, n).abs();
                    if (EPS * t) * t > 1.0 {
                        for j in i..=n {
                            hset!(j, n, h!(j, n) / t);
                        }
                    }
                }
            }
        } else if q < 0.0 {
            // complex vector; last component imaginary so the block is triangular
            let mut l = n - 1;
            if h!(n, n - 1).abs() > h!(n - 1, n).abs() {
                hset!(n - 1, n - 1, q / h!(n, n - 1));
                hset!(n - 1, n, -(h!(n, n) - p) / h!(n, n - 1));
            } else {
                let (re, im) = cdiv(0.0, -h!(n - 1, n), h!(n - 1, n - 1) - p, q);
                hset!(n - 1, n - 1, re);
                hset!(n - 1, n, im);
            }
            hset!(n, n - 1, 0.0);
            hset!(n, n, 1.0);
            for i in (0..(n - 1)).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=n {
                    ra += h!(i, j) * h!(j, n - 1);
                    sa += h!(i, j) * h!(j, n);
                }
                w = h!(i, i) - p;

                if e[i as usize] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        let (re, im) = cdiv(-ra, -sa, w, q);
                        hset!(i, n - 1, re);
                        hset!(i, n, im);
                    } else {
                        // solve the 2x2 complex block
                        x = h!(i, i + 1);
                        y = h!(i + 1, i);
                        let mut vr = (d[i as usize] - p) * (d[i as usize] - p)
                            + e[i as usize] * e[i as usize]
                            - q * q;
                        let vi = (d[i as usize] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = EPS
                                * norm
                                * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (re, im) =
                            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        hset!(i, n - 1, re);
                        hset!(i, n, im);
                        if x.abs() > z.abs() + q.abs() {
                            hset!(i + 1, n - 1, (-ra - w * h!(i, n - 1) + q * h!(i, n)) / x);
                            hset!(i + 1, n, (-sa - w * h!(i, n) - q * h!(i, n - 1)) / x);
                        } else {
                            let (re, im) = cdiv(-r - y * h!(i, n - 1), -s - y * h!(i, n), z, q);
                            hset!(i + 1, n - 1, re);
                            hset!(i + 1, n, im);
                        }
                    }
                    // overflow control
                    t = h!(i, n - 1).abs().max(h!(i, n).abs());
                    if (EPS * t) * t > 1.0 {
                        for j in i..=n {
                            hset!(j, n - 1, h!(j, n - 1) / t);
                            hset!(j, n, h!(j, n) / t);
                        }
                    }
                }
            }
        }
    }

    // back-transform to eigenvectors of the original matrix
    let v = vectors.as_deref_mut().unwrap();
    for j in (low..nn).rev() {
        for i in low..=high {
            z = 0.0;
            for k in low..=j.min(high) {
                z += v.get(i as usize, k as usize) * h!(k, j);
            }
            v.set(i as usize, j as usize, z);
        }
    }

    Ok((d, e))
}
