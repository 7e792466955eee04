//! Angle sequences, Jacobi and bidiagonal truncations, spectral quadrature
//! and the log-determinants built from them.

pub mod angles;
pub mod eigen;
pub mod gauss;
pub mod logdet;
pub mod operator;
pub mod quadrature;

pub use angles::{coupling, theta_to_x, x_to_theta, AngleKind, AngleSequence};
pub use eigen::{tridiagonal_eigen, tridiagonal_eigenvalues, TridiagonalEigen};
pub use logdet::{hankel_logdet, logdet, LogDet};
pub use gauss::{composite_rule, gauss_legendre};
pub use operator::{build_d_even, build_jacobi, BidiagonalOperator, JacobiOperator};
pub use quadrature::{moments, spectral_quadrature, MomentTable, SpectralQuadrature};

use crate::error::{Error, Result};

/// Eigenvalues below this are treated as the numerical kernel of `J`.
pub const KERNEL_FLOOR: f64 = 1e-14;

/// Eigenvalues below `-NEGATIVE_SLACK` violate `J >= 0`.
pub const NEGATIVE_SLACK: f64 = 1e-10;

pub(crate) fn clamp_eigenvalue(lambda: f64) -> Result<f64> {
    if lambda < -NEGATIVE_SLACK {
        return Err(Error::Invariant(format!(
            "negative eigenvalue {lambda:e} of a positive semidefinite truncation"
        )));
    }
    Ok(if lambda < KERNEL_FLOOR { 0.0 } else { lambda })
}

/// Leading `m x m` block of `J^{1/2}`, row-major.
pub fn sqrt_block(j: &JacobiOperator, m: usize) -> Result<Vec<f64>> {
    if m > j.size() {
        return Err(Error::Size(format!(
            "minor of order {m} exceeds truncation size {}",
            j.size()
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let eig = tridiagonal_eigen(j.diag(), j.offdiag(), m)?;
    let roots = eig
        .values()
        .iter()
        .map(|&l| clamp_eigenvalue(l).map(f64::sqrt))
        .collect::<Result<Vec<_>>>()?;
    let mut block = vec![0.0; m * m];
    for a in 0..m {
        for b in a..m {
            let (ra, rb) = (eig.row(a), eig.row(b));
            let v: f64 = roots
                .iter()
                .zip(ra.iter().zip(rb))
                .map(|(r, (x, y))| r * x * y)
                .sum();
            block[a * m + b] = v;
            block[b * m + a] = v;
        }
    }
    Ok(block)
}

/// Leading `m x m` block of `U = D^T (D D^T)^{-1/2}`, row-major.
///
/// Eigenpairs of `D D^T` in the numerical kernel are left out of `U`.
pub fn polar_block(d: &BidiagonalOperator, m: usize) -> Result<Vec<f64>> {
    let n = d.size();
    if m > n {
        return Err(Error::Size(format!(
            "minor of order {m} exceeds truncation size {n}"
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let (gd, go) = d.gram();
    let rows = (m + 1).min(n);
    let eig = tridiagonal_eigen(&gd, &go, rows)?;
    let mut block = vec![0.0; m * m];
    let mut col = vec![0.0; m];
    for (k, &lambda) in eig.values().iter().enumerate() {
        let lambda = clamp_eigenvalue(lambda)?;
        if lambda == 0.0 {
            continue;
        }
        let inv = 1.0 / lambda.sqrt();
        for (i, c) in col.iter_mut().enumerate() {
            let mut v = d.diag()[i] * eig.vector(i, k);
            if i + 1 < n {
                v += d.subdiag()[i] * eig.vector(i + 1, k);
            }
            *c = v * inv;
        }
        for i in 0..m {
            for jj in 0..m {
                block[i * m + jj] += col[i] * eig.vector(jj, k);
            }
        }
    }
    Ok(block)
}

/// Log-determinants of the leading `k x k` minors of a row-major `m x m`
/// matrix, k = 1..=m.
pub fn leading_minors(block: &[f64], m: usize) -> Result<Vec<LogDet>> {
    (1..=m)
        .map(|k| {
            let sub: Vec<f64> = (0..k)
                .flat_map(|i| block[i * m..i * m + k].iter().copied())
                .collect();
            logdet(&sub, k)
        })
        .collect()
}

/// `det P_m J^{1/2} P_m` of the truncation.
pub fn sqrt_minor_logdet(j: &JacobiOperator, m: usize) -> Result<LogDet> {
    logdet(&sqrt_block(j, m)?, m)
}

/// `|det P_m U P_m|` with `U = D^T (D D^T)^{-1/2}` built on the truncation.
pub fn polar_minor_logdet(d: &BidiagonalOperator, m: usize) -> Result<LogDet> {
    Ok(logdet(&polar_block(d, m)?, m)?.abs())
}
