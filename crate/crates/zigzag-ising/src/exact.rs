//! Closed forms for the fully critical model on the rotated lattice: diagonal
//! correlations, zig-zag magnetization and the Legendre spinor.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::critical::c_sigma;
use crate::error::{Error, Result};
use crate::spectral::composite_rule;

/// `ln(1 - 1/(4k^2))`
fn log_factor(k: usize) -> f64 {
    let k = k as f64;
    (-0.25 / (k * k)).ln_1p()
}

/// `ln D_n`
pub fn log_wu_diagonal(n: usize) -> f64 {
    let nf = n as f64;
    let sum: f64 = (1..n).map(|k| (k as f64 - nf) * log_factor(k)).sum();
    nf * FRAC_2_PI.ln() + sum
}

/// Diagonal correlation `D_n` at distance `n`.
pub fn wu_diagonal(n: usize) -> f64 {
    log_wu_diagonal(n).exp()
}

/// `D_0..=D_{n_max}` through `D_{n+1}/D_n = (2/pi) prod_{k<=n} (1 - 1/(4k^2))^{-1}`.
pub fn wu_diagonals(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_d = 0.0;
    let mut log_ratio = FRAC_2_PI.ln();
    out.push(1.0);
    for n in 0..n_max {
        if n >= 1 {
            log_ratio -= log_factor(n);
        }
        log_d += log_ratio;
        out.push(log_d.exp());
    }
    out
}

/// `ln M_m` from the direct product.
pub fn log_zigzag_magnetization(m: usize) -> f64 {
    let mf = m as f64;
    let sum: f64 = (1..2 * m)
        .map(|k| ((k / 2) as f64 - mf) * log_factor(k))
        .sum();
    mf * FRAC_2_PI.ln() + sum
}

/// Both evaluations of the zig-zag magnetization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMagnetization {
    pub m: usize,
    pub direct: f64,
    /// `prod_{j<m} D_{2j+2}/D_{2j+1}`
    pub ratio: f64,
}

const EXACT_RTOL: f64 = 1e-13;

pub fn zigzag_magnetization_exact(m: usize) -> Result<ExactMagnetization> {
    let direct = log_zigzag_magnetization(m).exp();
    let ratio = (0..m)
        .map(|j| log_wu_diagonal(2 * j + 2) - log_wu_diagonal(2 * j + 1))
        .sum::<f64>()
        .exp();
    if (direct - ratio).abs() > EXACT_RTOL * direct.max(ratio) * (1.0 + m as f64 / 64.0) {
        return Err(Error::Consistency(format!(
            "M_{m}: direct product {direct} vs ratio recursion {ratio}"
        )));
    }
    Ok(ExactMagnetization { m, direct, ratio })
}

/// `M_{j/2}` for j = 0..=j_max from `M_{m+1/2} M_m = sqrt(2) D_{2m+1}`.
pub fn half_integer_magnetizations(j_max: usize) -> Vec<f64> {
    let d = wu_diagonals(j_max);
    let mut out = Vec::with_capacity(j_max + 1);
    out.push(1.0);
    for j in 0..j_max {
        let next = SQRT_2 * d[j + 1] / out[j];
        out.push(next);
    }
    out
}

/// `M_{m+1/2}` with `m = twice_m / 2`.
pub fn half_integer_identity(twice_m: usize) -> f64 {
    half_integer_magnetizations(twice_m + 1)[twice_m + 1]
}

/// `(D_n (2n)^{1/4} / C_sigma^2, M_n (2n)^{1/8} / (2^{1/8} C_sigma))`
pub fn diagonal_asymptotics_check(n: usize) -> Result<(f64, f64)> {
    if n < 10 {
        return Err(Error::Precondition(format!(
            "asymptotic check needs n >= 10, got {n}"
        )));
    }
    let c = c_sigma();
    let two_n = 2.0 * n as f64;
    let d = wu_diagonal(n) * two_n.powf(0.25) / (c * c);
    let m = log_zigzag_magnetization(n).exp() * two_n.powf(0.125) / (2f64.powf(0.125) * c);
    Ok((d, m))
}

/// Legendre polynomial `P_n(x)`.
pub fn legendre(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Spinor `V(k, s)` on `|k| <= K`, `0 <= s <= S`; entries with `k + s + n` odd
/// are not part of the lattice and read as `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinorField {
    pub n: usize,
    pub k_max: usize,
    pub s_max: usize,
    pub normalization: f64,
    values: Vec<f64>,
}

impl SpinorField {
    fn index(&self, k: i64, s: usize) -> usize {
        (k + self.k_max as i64) as usize * (self.s_max + 1) + s
    }

    pub fn on_lattice(&self, k: i64, s: usize) -> bool {
        (k + s as i64 + self.n as i64).rem_euclid(2) == 0
    }

    pub fn get(&self, k: i64, s: usize) -> Option<f64> {
        if k.unsigned_abs() as usize > self.k_max || s > self.s_max || !self.on_lattice(k, s) {
            return None;
        }
        Some(self.values[self.index(k, s)])
    }

    /// `-V(k,s) + (1/4) sum of the four diagonal neighbours`, with `V(k,-1) = V(k,1)`
    /// across the segment `|k| <= n`. Needs a one-cell margin.
    pub fn laplacian(&self, k: i64, s: usize) -> Option<f64> {
        let v = self.get(k, s)?;
        let up = self.get(k - 1, s + 1)? + self.get(k + 1, s + 1)?;
        let down = if s == 0 {
            up
        } else {
            self.get(k - 1, s - 1)? + self.get(k + 1, s - 1)?
        };
        Some(-v + 0.25 * (up + down))
    }
}

const SPINOR_PANELS: usize = 8;
const SPINOR_ORDER: usize = 32;

/// `(1/pi) int_0^pi cos(kt) y(t)^s P_n(cos t) dt` for the whole grid, with
/// `y = cos t / (1 + sin t)` on `[0, pi]`.
fn spinor_integrals(n: usize, k_max: usize, s_max: usize, panels: usize) -> Vec<f64> {
    let mut t = Vec::new();
    let mut w = Vec::new();
    for (a, b) in [(0.0, 0.5 * PI), (0.5 * PI, PI)] {
        let (x, wx) = composite_rule(a, b, panels, SPINOR_ORDER);
        t.extend(x);
        w.extend(wx);
    }
    let base: Vec<(f64, f64)> = t
        .iter()
        .zip(&w)
        .map(|(&t, &w)| {
            let (s, c) = t.sin_cos();
            (c / (1.0 + s), w * legendre(n, c) / PI)
        })
        .collect();
    let width = 2 * k_max + 1;
    let mut out = vec![0.0; width * (s_max + 1)];
    for (ki, kk) in (-(k_max as i64)..=k_max as i64).enumerate() {
        let cos_k: Vec<f64> = t.iter().map(|t| (kk as f64 * t).cos()).collect();
        let mut pow: Vec<f64> = vec![1.0; t.len()];
        for s in 0..=s_max {
            if (kk + s as i64 + n as i64).rem_euclid(2) == 0 {
                out[ki * (s_max + 1) + s] = base
                    .iter()
                    .zip(&cos_k)
                    .zip(&pow)
                    .map(|(((_, bw), c), p)| bw * c * p)
                    .sum();
            }
            for (p, (y, _)) in pow.iter_mut().zip(&base) {
                *p *= y;
            }
        }
    }
    out
}

pub fn legendre_spinor(n: usize, k_max: usize, s_max: usize) -> Result<SpinorField> {
    if k_max < n + 2 || s_max < 2 {
        return Err(Error::Size(format!(
            "spinor grid needs K >= n + 2 and S >= 2, got K = {k_max}, S = {s_max}"
        )));
    }
    let raw = spinor_integrals(n, k_max, s_max, SPINOR_PANELS);
    let check = spinor_integrals(n, k_max, s_max, 2 * SPINOR_PANELS);
    let scale = raw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let drift = raw
        .iter()
        .zip(&check)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    if drift > 1e-13 * scale.max(1.0) {
        return Err(Error::Numeric(format!(
            "spinor quadrature not converged: drift {drift:e}"
        )));
    }
    let mut field = SpinorField {
        n,
        k_max,
        s_max,
        normalization: 1.0,
        values: raw,
    };
    let at_branch = field.values[field.index(n as i64, 0)];
    if at_branch == 0.0 {
        return Err(Error::Numeric("spinor vanishes at the branch point".into()));
    }
    let c = wu_diagonal(n) / at_branch;
    for v in &mut field.values {
        *v *= c;
    }
    field.normalization = c;
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorResiduals {
    /// Largest `|Delta V|` off the branch points, over `s >= 1` and `|k| < n` on the row `s = 0`.
    pub interior_max: f64,
    pub branch_left: f64,
    pub branch_right: f64,
}

pub fn spinor_laplacian_residuals(field: &SpinorField) -> SpinorResiduals {
    let n = field.n as i64;
    let km = field.k_max as i64 - 1;
    let mut interior_max = 0.0f64;
    for k in -km..=km {
        for s in 0..field.s_max {
            if s == 0 && k.abs() >= n {
                continue;
            }
            if let Some(r) = field.laplacian(k, s) {
                interior_max = interior_max.max(r.abs());
            }
        }
    }
    SpinorResiduals {
        interior_max,
        branch_left: field.laplacian(-n, 0).unwrap_or(f64::NAN),
        branch_right: field.laplacian(n, 0).unwrap_or(f64::NAN),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::{One, ToPrimitive};

    /// Rational part `prod_{k=1}^{n-1} (4k^2 / (4k^2 - 1))^{n-k}` as (num, den).
    fn wu_rational(n: u64) -> (BigInt, BigInt) {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for k in 1..n {
            let a = BigInt::from(4 * k * k);
            let b = BigInt::from(4 * k * k - 1);
            for _ in 0..(n - k) {
                num *= &a;
                den *= &b;
            }
        }
        (num, den)
    }

    /// Rational part of `M_m`: exponent `floor(k/2) - m` on `1 - 1/(4k^2)`.
    fn zigzag_rational(m: u64) -> (BigInt, BigInt) {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for k in 1..2 * m {
            let a = BigInt::from(4 * k * k);
            let b = BigInt::from(4 * k * k - 1);
            for _ in 0..(m - k / 2) {
                num *= &a;
                den *= &b;
            }
        }
        (num, den)
    }

    fn big_ratio(num: &BigInt, den: &BigInt) -> f64 {
        let shift = 80 + den.bits() as i64 - num.bits() as i64;
        let q = if shift >= 0 {
            (num << shift as usize) / den
        } else {
            num / (den << (-shift) as usize)
        };
        q.to_f64().unwrap() * 2f64.powi(-shift as i32)
    }

    #[test]
    fn closed_values() {
        assert_eq!(wu_diagonal(0), 1.0);
        assert!((wu_diagonal(1) / (2.0 / PI) - 1.0).abs() < 1e-15);
        assert!((wu_diagonal(2) / (16.0 / (3.0 * PI * PI)) - 1.0).abs() < 1e-15);
        let m1 = zigzag_magnetization_exact(1).unwrap();
        assert!((m1.direct / (8.0 / (3.0 * PI)) - 1.0).abs() < 1e-15);
        let m2 = zigzag_magnetization_exact(2).unwrap();
        assert!((m2.direct / (36864.0 / (4725.0 * PI * PI)) - 1.0).abs() < 1e-15);
        assert_eq!(zigzag_magnetization_exact(0).unwrap().direct, 1.0);
    }

    #[test]
    fn rational_parts_exact() {
        for n in 0..=20u64 {
            let (num, den) = wu_rational(n);
            let exact = big_ratio(&num, &den) * FRAC_2_PI.powi(n as i32);
            assert!((wu_diagonal(n as usize) / exact - 1.0).abs() < 1e-13, "D_{n}");
        }
        for m in 0..=10u64 {
            let (num, den) = zigzag_rational(m);
            let exact = big_ratio(&num, &den) * FRAC_2_PI.powi(m as i32);
            let v = zigzag_magnetization_exact(m as usize).unwrap().direct;
            assert!((v / exact - 1.0).abs() < 1e-13, "M_{m}");
        }
    }

    #[test]
    fn ratio_identity_exact_in_integers() {
        // S_{m+1} R_{2m+1} = S_m R_{2m+2} as rationals
        for m in 0..=8u64 {
            let (sa, sb) = zigzag_rational(m + 1);
            let (ra, rb) = wu_rational(2 * m + 1);
            let (ta, tb) = zigzag_rational(m);
            let (ua, ub) = wu_rational(2 * m + 2);
            assert_eq!(&sa * &ra * &tb * &ub, &ta * &ua * &sb * &rb, "m={m}");
        }
    }

    #[test]
    fn double_factorial_recurrence() {
        let d = wu_diagonals(40);
        for n in 0..40 {
            let mut r = FRAC_2_PI;
            for k in 1..=n {
                let k = k as f64;
                r *= (2.0 * k) * (2.0 * k) / ((2.0 * k - 1.0) * (2.0 * k + 1.0));
            }
            assert!((d[n + 1] / d[n] / r - 1.0).abs() < 1e-13);
            assert!((d[n] / wu_diagonal(n) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn magnetization_ratio_identity() {
        for m in 0..=50 {
            let a = zigzag_magnetization_exact(m).unwrap().direct;
            let b = zigzag_magnetization_exact(m + 1).unwrap().direct;
            let r = wu_diagonal(2 * m + 2) / wu_diagonal(2 * m + 1);
            assert!((b / a / r - 1.0).abs() < 1e-13, "m={m}");
        }
    }

    #[test]
    fn half_integers() {
        assert!((half_integer_identity(0) - 2.0 * SQRT_2 / PI).abs() < 1e-15);
        let h = half_integer_magnetizations(41);
        for m in 0..=20 {
            let full = zigzag_magnetization_exact(m).unwrap().direct;
            assert!((h[2 * m] / full - 1.0).abs() < 1e-13, "m={m}");
        }
        // M_{m+1/2}/M_{m-1/2} = D_{2m+1}/D_{2m}, with M_{-1/2} = sqrt 2
        let d = wu_diagonals(41);
        assert!((h[1] / SQRT_2 - d[1] / d[0]).abs() < 1e-15);
        for m in 1..20 {
            assert!((h[2 * m + 1] / h[2 * m - 1] / (d[2 * m + 1] / d[2 * m]) - 1.0).abs() < 1e-13);
        }
        let m1 = zigzag_magnetization_exact(1).unwrap().direct;
        assert!((half_integer_identity(2) - SQRT_2 * d[3] / m1).abs() < 1e-15);
    }

    #[test]
    fn asymptotics() {
        let (d, m) = diagonal_asymptotics_check(1000).unwrap();
        assert!((d - 1.0).abs() < 1e-3 && (m - 1.0).abs() < 1e-3, "{d} {m}");
        let (d5, m5) = diagonal_asymptotics_check(500).unwrap();
        let (d2, m2) = diagonal_asymptotics_check(2000).unwrap();
        assert!((d2 - 1.0).abs() < (d5 - 1.0).abs());
        assert!((m2 - 1.0).abs() < (m5 - 1.0).abs());
        assert!(diagonal_asymptotics_check(3).is_err());
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre(0, 0.3), 1.0);
        assert!((legendre(2, 0.3) - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((legendre(5, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spinor_structure() {
        for n in 0..=5 {
            let f = legendre_spinor(n, n + 4, 6).unwrap();
            let ni = n as i64;
            assert!((f.get(ni, 0).unwrap() - wu_diagonal(n)).abs() < 1e-14);
            assert!((f.get(-ni, 0).unwrap() - wu_diagonal(n)).abs() < 1e-14);
            for k in (ni + 2..=f.k_max as i64).step_by(2) {
                assert!(f.get(k, 0).unwrap().abs() < 1e-10, "n={n} k={k}");
                assert!(f.get(-k, 0).unwrap().abs() < 1e-10);
            }
            for k in -(f.k_max as i64)..=f.k_max as i64 {
                for s in 0..=f.s_max {
                    assert_eq!(f.get(k, s), f.get(-k, s));
                    if !f.on_lattice(k, s) {
                        assert!(f.get(k, s).is_none());
                    }
                }
            }
            // C_n = 2^n D_n / p_n with p_n the leading Legendre coefficient
            let mut p = 1.0;
            for j in 1..=n {
                p *= (2 * j - 1) as f64 / j as f64;
            }
            assert!((f.normalization / (2f64.powi(n as i32) * wu_diagonal(n) / p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spinor_profile_in_s() {
        let f = legendre_spinor(2, 6, 16).unwrap();
        for k in -6i64..=6 {
            let col: Vec<f64> = (0..=16).filter_map(|s| f.get(k, s)).map(f64::abs).collect();
            let peak = col
                .iter()
                .enumerate()
                .fold(0, |best, (i, v)| if *v > col[best] { i } else { best });
            if k.abs() <= 2 {
                assert_eq!(peak, 0, "k={k}");
            }
            assert!(col[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-15), "k={k}");
            assert!(col[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-15), "k={k}");
        }
    }

    #[test]
    fn spinor_harmonicity() {
        for n in 0..=5usize {
            let f = legendre_spinor(n, n + 6, 8).unwrap();
            let r = spinor_laplacian_residuals(&f);
            assert!(r.interior_max <= 1e-10, "n={n}: {}", r.interior_max);
            let target = if n == 0 {
                -wu_diagonal(1)
            } else {
                -0.5 * wu_diagonal(n + 1)
            };
            assert!((r.branch_right - target).abs() < 1e-8, "n={n}");
            assert!((r.branch_left - target).abs() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(legendre_spinor(3, 4, 5), Err(Error::Size(_))));
    }
}
