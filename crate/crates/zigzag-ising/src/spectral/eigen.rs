use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigen-data of a symmetric tridiagonal matrix.
///
/// Only the leading `rows` rows of the orthogonal eigenvector matrix are kept:
/// `vector(i, k)` is the i-th component of the k-th normalized eigenvector.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    values: Vec<f64>,
    rows: usize,
    vectors: Vec<f64>,
}

impl TridiagonalEigen {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn vector(&self, i: usize, k: usize) -> f64 {
        self.vectors[i * self.values.len() + k]
    }

    /// Row `i` of the eigenvector matrix, indexed by eigenvalue.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.values.len();
        &self.vectors[i * n..(i + 1) * n]
    }
}

#[inline]
fn pythag(a: f64, b: f64) -> f64 {
    let r = (a * a + b * b).sqrt();
    if r.is_finite() && r > 1e-150 {
        r
    } else {
        a.hypot(b)
    }
}

/// Implicit-shift QL iteration for the symmetric tridiagonal matrix with
/// diagonal `diag` and off-diagonal `offdiag`. Eigenvalues come back ascending.
pub fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64], rows: usize) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::Size("empty matrix".into()));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::Shape(format!(
            "diagonal of length {n} needs {} off-diagonal entries, got {}",
            n - 1,
            offdiag.len()
        )));
    }
    let rows = rows.min(n);
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // z[i * rows + k]: component i of the transformed basis vector e_k
    let mut z = vec![0.0; rows * n];
    for i in 0..rows {
        z[i * rows + i] = 1.0;
    }

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let mut total = 0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                total += 1;
                if iter > MAX_SWEEPS {
                    return Err(Error::Eigensolver { iterations: total });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = pythag(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = pythag(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z[i * rows..(i + 2) * rows].split_at_mut(rows);
                    for (zi, zj) in lo.iter_mut().zip(hi.iter_mut()) {
                        let h = *zj;
                        *zj = s * *zi + c * h;
                        *zi = c * *zi - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0; rows * n];
    for i in 0..rows {
        for (dst, &k) in order.iter().enumerate() {
            vectors[i * n + dst] = z[k * rows + i];
        }
    }
    Ok(TridiagonalEigen {
        values,
        rows,
        vectors,
    })
}

/// Eigenvalues only.
pub fn tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    Ok(tridiagonal_eigen(diag, offdiag, 0)?.values)
}
