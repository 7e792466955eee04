use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::angles::check_angle;

/// Tolerance of the criticality test `prod tan(theta_k) = 1`.
pub const CRITICALITY_TOL: f64 = 1e-12;

fn check_block(block: &[f64]) -> Result<usize> {
    if block.is_empty() || block.len() % 2 == 1 {
        return Err(Error::Shape(format!(
            "period block must have even positive length, got {}",
            block.len()
        )));
    }
    for (i, &t) in block.iter().enumerate() {
        check_angle(i + 1, t)?;
    }
    Ok(block.len() / 2)
}

/// theta_k for any integer k, extended periodically (so theta_0 = theta_{2n}).
fn theta(block: &[f64], k: isize) -> f64 {
    let len = block.len() as isize;
    block[((k - 1).rem_euclid(len)) as usize]
}

/// Diagonal b_1..b_n and couplings a_1..a_n of one period; a_n couples the
/// last site of a period to the first site of the next.
fn period_entries(block: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = block.len() / 2;
    let th = |k: usize| theta(block, k as isize);
    let b = (1..=n)
        .map(|k| {
            let x = th(2 * k - 1).cos() * th(2 * k).cos();
            let y = theta(block, 2 * k as isize - 2).sin() * th(2 * k - 1).sin();
            x * x + y * y
        })
        .collect();
    let a = (1..=n)
        .map(|k| th(2 * k - 1).cos() * th(2 * k).cos() * th(2 * k).sin() * th(2 * k + 1).sin())
        .collect();
    (b, a)
}

/// `prod tan(theta_k)` over the block and whether it equals 1.
pub fn periodic_criticality(block: &[f64]) -> Result<(f64, bool)> {
    check_block(block)?;
    let product: f64 = block.iter().map(|t| t.tan()).product();
    Ok((product, (product - 1.0).abs() <= CRITICALITY_TOL))
}

fn require_critical(block: &[f64]) -> Result<usize> {
    let n = check_block(block)?;
    let (product, critical) = periodic_criticality(block)?;
    if !critical {
        return Err(Error::Precondition(format!(
            "period block is not critical: prod tan(theta) = {product}"
        )));
    }
    Ok(n)
}

/// psi_1..psi_{n+1} of the positive periodic solution of `J psi = 0`
/// (off-diagonal `-a_k`).
pub fn ground_vector(block: &[f64]) -> Result<Vec<f64>> {
    let n = require_critical(block)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut cot = 1.0;
    for k in 1..=n + 1 {
        if k > 1 {
            cot *= 1.0 / theta(block, 2 * k as isize - 3).tan();
            cot *= 1.0 / theta(block, 2 * k as isize - 2).tan();
        }
        out.push(cot / theta(block, 2 * k as isize - 1).sin());
    }
    Ok(out)
}

fn cj_from(psi: &[f64], a: &[f64]) -> f64 {
    let n = a.len() as f64;
    let norm: f64 = psi[..a.len()].iter().map(|x| x * x).sum();
    let flux: f64 = (0..a.len()).map(|k| 1.0 / (a[k] * psi[k] * psi[k + 1])).sum();
    (norm * flux).sqrt() / n
}

/// Constant of the square-root edge of the integrated density of states.
pub fn cj_constant(block: &[f64]) -> Result<f64> {
    let psi = ground_vector(block)?;
    let (_, a) = period_entries(block);
    Ok(cj_from(&psi, &a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSpectralData {
    pub period: usize,
    /// psi_1..psi_n
    pub ground: Vec<f64>,
    pub cj: f64,
    pub tan_product: f64,
}

impl PeriodicSpectralData {
    pub fn new(block: &[f64]) -> Result<Self> {
        let psi = ground_vector(block)?;
        let (_, a) = period_entries(block);
        let (tan_product, _) = periodic_criticality(block)?;
        Ok(Self {
            period: a.len(),
            cj: cj_from(&psi, &a),
            ground: psi[..a.len()].to_vec(),
            tan_product,
        })
    }
}

/// Periodic truncation of the Jacobi operator: a symmetric cyclic
/// tridiagonal matrix with diagonal `diag` and couplings `offdiag[i]`
/// between sites i and i+1 (mod size).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicJacobi {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl CyclicJacobi {
    /// `n_periods` copies of the block with off-diagonal `-a_k`.
    pub fn new(block: &[f64], n_periods: usize) -> Result<Self> {
        check_block(block)?;
        let (b, a) = period_entries(block);
        if b.len() * n_periods < 3 {
            return Err(Error::Size(
                "cyclic truncation needs at least 3 sites".into(),
            ));
        }
        Ok(Self {
            diag: b.repeat(n_periods),
            offdiag: a.iter().map(|x| -x).collect::<Vec<_>>().repeat(n_periods),
        })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Number of eigenvalues below `lambda`, from the inertia of
    /// `A - lambda I` (symmetric elimination with fill in the last column).
    pub fn count_below(&self, lambda: f64) -> usize {
        let n = self.size();
        let c = &self.diag;
        let e = &self.offdiag;
        let tiny = f64::EPSILON * 1e-3;
        let guard = |p: f64| if p == 0.0 { tiny } else { p };
        let mut negatives = 0;
        let mut p = guard(c[0] - lambda);
        let mut f = e[n - 1];
        let mut tail = c[n - 1] - lambda;
        if p < 0.0 {
            negatives += 1;
        }
        for i in 1..n - 1 {
            let q = guard(c[i] - lambda - e[i - 1] * e[i - 1] / p);
            let g = if i == n - 2 { e[n - 2] } else { 0.0 } - e[i - 1] * f / p;
            tail -= f * f / p;
            p = q;
            f = g;
            if p < 0.0 {
                negatives += 1;
            }
        }
        tail -= f * f / p;
        if tail < 0.0 {
            negatives += 1;
        }
        negatives
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsFit {
    pub size: usize,
    pub lambda: Vec<f64>,
    pub ids: Vec<f64>,
    /// Weighted least-squares slope of IDS against `sqrt(lambda)/pi` over the
    /// lowest tenth of the window.
    pub slope: f64,
    pub cj: f64,
}

/// Empirical integrated density of states of the periodic truncation with
/// `n_periods` periods on the grid `lambda_i = lambda_max (i/points)^2`.
pub fn ids_empirical(
    block: &[f64],
    n_periods: usize,
    lambda_max: f64,
    points: usize,
) -> Result<IdsFit> {
    require_critical(block)?;
    if n_periods < 64 {
        return Err(Error::Size(format!(
            "IDS needs at least 64 periods, got {n_periods}"
        )));
    }
    if !(lambda_max > 0.0 && lambda_max <= 1.0) || points < 10 {
        return Err(Error::Domain(format!(
            "bad IDS window lambda_max = {lambda_max}, points = {points}"
        )));
    }
    let op = CyclicJacobi::new(block, n_periods)?;
    let size = op.size() as f64;
    let lambda: Vec<f64> = (1..=points)
        .map(|i| lambda_max * (i as f64 / points as f64).powi(2))
        .collect();
    let ids: Vec<f64> = lambda
        .iter()
        .map(|&l| op.count_below(l) as f64 / size)
        .collect();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&l, &y) in lambda.iter().zip(&ids) {
        if l > 0.1 * lambda_max {
            break;
        }
        let x = l.sqrt() / std::f64::consts::PI;
        let w = 1.0 / l.sqrt();
        sxy += w * x * y;
        sxx += w * x * x;
    }
    Ok(IdsFit {
        size: op.size(),
        lambda,
        ids,
        slope: sxy / sxx,
        cj: cj_constant(block)?,
    })
}

/// Hermitian cyclic n x n matrix of one period with the coupling between
/// sites q and q+1 twisted by `exp(i t omega_q)`, `sum omega_q = 1`.
fn twisted_block(block: &[f64], t: f64) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let psi = ground_vector(block)?;
    let (b, a) = period_entries(block);
    let inv: Vec<f64> = (0..a.len()).map(|q| 1.0 / (a[q] * psi[q] * psi[q + 1])).collect();
    let total: f64 = inv.iter().sum();
    let e = a
        .iter()
        .zip(&inv)
        .map(|(&aq, &w)| -aq * Complex64::from_polar(1.0, t * w / total))
        .collect();
    Ok((b, e))
}

fn hermitian_count_below(c: &[f64], e: &[Complex64], lambda: f64) -> usize {
    let n = c.len();
    let tiny = f64::EPSILON * 1e-3;
    let guard = |p: f64| if p == 0.0 { tiny } else { p };
    let mut negatives = 0;
    let mut p = guard(c[0] - lambda);
    let mut f = e[n - 1].conj();
    let mut tail = c[n - 1] - lambda;
    if p < 0.0 {
        negatives += 1;
    }
    for i in 1..n - 1 {
        let q = guard(c[i] - lambda - e[i - 1].norm_sqr() / p);
        let direct = if i == n - 2 { e[n - 2] } else { Complex64::new(0.0, 0.0) };
        let g = direct - e[i - 1].conj() * f / p;
        tail -= f.norm_sqr() / p;
        p = q;
        f = g;
        if p < 0.0 {
            negatives += 1;
        }
    }
    tail -= f.norm_sqr() / p;
    if tail < 0.0 {
        negatives += 1;
    }
    negatives
}

/// Lowest eigenvalue of the twisted period block.
pub fn twisted_lowest_eigenvalue(block: &[f64], t: f64) -> Result<f64> {
    if !(t.abs() <= std::f64::consts::PI) {
        return Err(Error::Domain(format!("twist t = {t} outside [-pi, pi]")));
    }
    let (b, e) = twisted_block(block, t)?;
    let lambda = match b.len() {
        1 => b[0] + 2.0 * e[0].re,
        2 => {
            let h = e[0] + e[1].conj();
            let mid = 0.5 * (b[0] + b[1]);
            let half = 0.5 * (b[0] - b[1]);
            mid - (half * half + h.norm_sqr()).sqrt()
        }
        _ => {
            let radius: f64 = 2.0 * e.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut lo = b.iter().cloned().fold(f64::INFINITY, f64::min) - radius;
            let mut hi = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + radius;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if hermitian_count_below(&b, &e, mid) >= 1 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    Ok(lambda)
}
