//! Critical line `theta_h = theta`, `theta_v = pi/2 - theta` of the straight
//! lattice: orthogonal polynomials on [-1, 1] and the horizontal correlations.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::angles::check_angle;
use crate::spectral::composite_rule;

/// `zeta'(-1) = -0.16542114370045092921...`
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;

const GAUSS_ORDER: usize = 32;
const NORM_RTOL: f64 = 1e-10;
const GRADING: f64 = 0.15;

/// `2^{1/6} exp(3/2 zeta'(-1))`
pub fn c_sigma() -> f64 {
    (LN_2 / 6.0 + 1.5 * ZETA_PRIME_MINUS_ONE).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RealLineWeight {
    /// `[1 - (sin(theta) x)^2]^{1/2}`
    Regular,
    /// `[1 - (sin(theta) x)^2]^{-1/2}`
    Dual,
}

/// Monic orthogonal polynomials of a real-line weight, through their norms
/// and three-term recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealLineOPState {
    pub theta: f64,
    pub weight: RealLineWeight,
    /// `log ||P_n||^2`, n = 0..=n_max
    pub log_norms: Vec<f64>,
    /// `x P_n = P_{n+1} + a_n P_n + b_n^2 P_{n-1}`; `a_n` vanishes by symmetry.
    pub a: Vec<f64>,
    /// `b_1..b_{n_max}`
    pub b: Vec<f64>,
}

impl RealLineOPState {
    pub fn norms(&self) -> Vec<f64> {
        self.log_norms.iter().map(|l| l.exp()).collect()
    }

    pub fn n_max(&self) -> usize {
        self.log_norms.len() - 1
    }
}

/// Composite rule on (-pi/2, pi/2) whose end panels are refined geometrically
/// down to the width `cos(theta)` of the boundary layer.
fn graded_rule(panels: usize, layer: f64) -> (Vec<f64>, Vec<f64>) {
    let h = PI / panels as f64;
    let (mut u, mut w) = composite_rule(-0.5 * PI + h, 0.5 * PI - h, panels - 2, GAUSS_ORDER);
    let mut cuts = vec![h];
    while *cuts.last().unwrap() > 0.1 * layer && cuts.len() < 80 {
        cuts.push(cuts.last().unwrap() * GRADING);
    }
    cuts.push(0.0);
    for pair in cuts.windows(2) {
        let (far, near) = (pair[0], pair[1]);
        for side in [-1.0, 1.0] {
            let (a, b) = (side * (0.5 * PI - far), side * (0.5 * PI - near));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (x, wx) = composite_rule(lo, hi, 1, GAUSS_ORDER);
            u.extend(x);
            w.extend(wx);
        }
    }
    (u, w)
}

/// Nodes and weights of `int_{-1}^{1} f(x) w(x) dx` after `x = sin u`.
fn weighted_rule(theta: f64, weight: RealLineWeight, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let c2 = theta.cos().powi(2);
    let (u, wu) = graded_rule(panels, theta.cos());
    let mut x = Vec::with_capacity(u.len());
    let mut w = Vec::with_capacity(u.len());
    for (&u, &wu) in u.iter().zip(&wu) {
        let (s, c) = u.sin_cos();
        // 1 - sin^2(theta) sin^2(u), without cancellation near the endpoints
        let root = (c * c + c2 * s * s).sqrt();
        let f = match weight {
            RealLineWeight::Regular => c * root,
            RealLineWeight::Dual => c / root,
        };
        x.push(s);
        w.push(wu * f);
    }
    (x, w)
}

/// Stieltjes procedure with one reorthogonalization step.
fn stieltjes(x: &[f64], w: &[f64], n_max: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mu0: f64 = w.iter().sum();
    if !(mu0 > 0.0) {
        return Err(Error::Numeric("weight has nonpositive mass".into()));
    }
    let inner = |f: &[f64], g: &[f64]| -> f64 { w.iter().zip(f).zip(g).map(|((w, f), g)| w * f * g).sum() };
    let mut q = vec![1.0 / mu0.sqrt(); x.len()];
    let mut q_prev = vec![0.0; x.len()];
    let mut b_prev = 0.0;
    let mut log_norms = vec![mu0.ln()];
    let mut a = Vec::with_capacity(n_max);
    let mut b = Vec::with_capacity(n_max);
    let mut r = vec![0.0; x.len()];
    for _ in 0..n_max {
        let ak: f64 = w.iter().zip(x).zip(&q).map(|((w, x), q)| w * x * q * q).sum();
        for i in 0..x.len() {
            r[i] = (x[i] - ak) * q[i] - b_prev * q_prev[i];
        }
        let c = inner(&r, &q);
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= c * qi;
        }
        let nb = inner(&r, &r).sqrt();
        if !(nb > 0.0) || !nb.is_finite() {
            return Err(Error::Numeric(format!(
                "Stieltjes recurrence broke down at degree {}",
                a.len() + 1
            )));
        }
        log_norms.push(log_norms.last().unwrap() + 2.0 * nb.ln());
        a.push(ak);
        b.push(nb);
        for i in 0..x.len() {
            q_prev[i] = q[i];
            q[i] = r[i] / nb;
        }
        b_prev = nb;
    }
    Ok((log_norms, a, b))
}

fn check_theta(theta: f64) -> Result<f64> {
    check_angle(0, theta)
}

/// Norms `||P_n||^2` for n = 0..=n_max, checked against a rule with twice the panels.
pub fn realline_norms(theta: f64, weight: RealLineWeight, n_max: usize) -> Result<RealLineOPState> {
    check_theta(theta)?;
    let panels = 64usize.max((n_max + 1).next_power_of_two() / 2);
    let (x, w) = weighted_rule(theta, weight, panels);
    let (log_norms, a, b) = stieltjes(&x, &w, n_max)?;
    let (x2, w2) = weighted_rule(theta, weight, 2 * panels);
    let (check, _, _) = stieltjes(&x2, &w2, n_max)?;
    for (n, (l, c)) in log_norms.iter().zip(&check).enumerate() {
        if (l - c).abs() > NORM_RTOL {
            return Err(Error::Numeric(format!(
                "norm of degree {n} not resolved: log difference {:e} under doubling",
                (l - c).abs()
            )));
        }
    }
    Ok(RealLineOPState {
        theta,
        weight,
        log_norms,
        a,
        b,
    })
}

/// Correlations `D_n` along a row and the companions `L_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalChain {
    pub theta: f64,
    /// D_0..=D_N
    pub d: Vec<f64>,
    /// L_0..=L_N; empty for the quadratic chain
    pub l: Vec<f64>,
    /// `D~_{n+1}` from `cos(theta) D~_{n+1} = (A_n - B_{n+1}) D_n / 2`, n = 0..N-1
    pub d_tilde: Vec<f64>,
    /// `A_n = 2^{2n} ||P_n||^2 / pi`
    pub a: Vec<f64>,
    /// `B_n = 2^{2n} ||P#_n||^2 / pi`
    pub b: Vec<f64>,
}

fn log_coefficients(theta: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = realline_norms(theta, RealLineWeight::Regular, n)?;
    let ph = realline_norms(theta, RealLineWeight::Dual, n)?;
    let scale = |k: usize| 2.0 * k as f64 * LN_2 - PI.ln();
    let la = (0..=n).map(|k| scale(k) + p.log_norms[k]).collect();
    let lb = (0..=n).map(|k| scale(k) + ph.log_norms[k]).collect();
    Ok((la, lb))
}

fn check_correlation(n: usize, log_d: f64) -> Result<f64> {
    let d = log_d.exp();
    if !(d > 0.0) || log_d > 1e-12 {
        return Err(Error::Invariant(format!("D_{n} = {d} outside (0, 1]")));
    }
    Ok(d.min(1.0))
}

fn d_tilde(theta: f64, d: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let c = theta.cos();
    (0..d.len() - 1)
        .map(|n| 0.5 * (a[n] - b[n + 1]) * d[n] / c)
        .collect()
}

/// `D_0..=D_{n_max}` from the alternating chain `L_n -> D_{n+1}`, `D_n -> L_{n+1}`.
pub fn critical_correlations(theta: f64, n_max: usize) -> Result<CriticalChain> {
    check_theta(theta)?;
    let (la, lb) = log_coefficients(theta, n_max + 1)?;
    let ls = theta.sin().ln();
    let mut log_d = vec![0.0];
    let mut log_l = vec![ls];
    for n in 0..n_max {
        log_d.push(lb[n] - ls + log_l[n]);
        log_l.push(la[n] + ls + log_d[n]);
    }
    let d = log_d
        .iter()
        .enumerate()
        .map(|(n, &l)| check_correlation(n, l))
        .collect::<Result<Vec<_>>>()?;
    let l = log_l.iter().map(|x| x.exp()).collect();
    let a: Vec<f64> = la.iter().map(|x| x.exp()).collect();
    let b: Vec<f64> = lb.iter().map(|x| x.exp()).collect();
    let d_tilde = d_tilde(theta, &d, &a, &b);
    Ok(CriticalChain {
        theta,
        d,
        l,
        d_tilde,
        a,
        b,
    })
}

/// Chain built from the arithmetic and harmonic ratio forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticChain {
    /// `D` from `D_{m+1}/D_m = (A_m + B_{m+1}) / 2`
    pub chain: CriticalChain,
    /// `(A_m + B_{m+1}) / 2`, m = 0..N-1
    pub arithmetic: Vec<f64>,
    /// `2 / (1/A_{m-1} + 1/B_m)`, m = 1..N-1 stored at index m; index 0 is NaN
    pub harmonic: Vec<f64>,
}

impl QuadraticChain {
    /// Largest gap between the two ratio forms.
    pub fn form_gap(&self) -> f64 {
        self.arithmetic
            .iter()
            .zip(&self.harmonic)
            .skip(1)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|D_n - D'_n|` against another chain over common indices.
    pub fn max_deviation(&self, other: &CriticalChain) -> f64 {
        self.chain
            .d
            .iter()
            .zip(&other.d)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

pub fn quadratic_chain(theta: f64, n_max: usize) -> Result<QuadraticChain> {
    check_theta(theta)?;
    let (la, lb) = log_coefficients(theta, n_max + 1)?;
    let a: Vec<f64> = la.iter().map(|x| x.exp()).collect();
    let b: Vec<f64> = lb.iter().map(|x| x.exp()).collect();
    let arithmetic: Vec<f64> = (0..n_max).map(|m| 0.5 * (a[m] + b[m + 1])).collect();
    let harmonic: Vec<f64> = (0..n_max)
        .map(|m| {
            if m == 0 {
                f64::NAN
            } else {
                2.0 / (1.0 / a[m - 1] + 1.0 / b[m])
            }
        })
        .collect();
    let mut log_d = vec![0.0];
    for r in &arithmetic {
        log_d.push(log_d.last().unwrap() + r.ln());
    }
    let d = log_d
        .iter()
        .enumerate()
        .map(|(n, &l)| check_correlation(n, l))
        .collect::<Result<Vec<_>>>()?;
    let d_tilde = d_tilde(theta, &d, &a, &b);
    Ok(QuadraticChain {
        chain: CriticalChain {
            theta,
            d,
            l: Vec::new(),
            d_tilde,
            a,
            b,
        },
        arithmetic,
        harmonic,
    })
}

/// `D_m (2m cos theta)^{1/4} / C_sigma^2`
pub fn mccoy_wu_check(theta: f64, m: usize) -> Result<f64> {
    if m < 10 {
        return Err(Error::Precondition(format!("asymptotic check needs m >= 10, got {m}")));
    }
    let chain = critical_correlations(theta, m)?;
    Ok(mccoy_wu_ratio(&chain, m))
}

pub fn mccoy_wu_ratio(chain: &CriticalChain, m: usize) -> f64 {
    chain.d[m] * (2.0 * m as f64 * chain.theta.cos()).powf(0.25) / c_sigma().powi(2)
}

/// `D_{m+1} D_m (2m cos theta)^{1/2} / C_sigma^4`
pub fn mccoy_wu_product_ratio(chain: &CriticalChain, m: usize) -> f64 {
    chain.d[m + 1] * chain.d[m] * (2.0 * m as f64 * chain.theta.cos()).sqrt() / c_sigma().powi(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    /// Adaptive Simpson, independent of the Gauss rules.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    #[test]
    fn zeroth_norm_against_simpson() {
        for theta in [0.3, FRAC_PI_4, 1.2] {
            let s = theta.sin();
            let st = realline_norms(theta, RealLineWeight::Regular, 2).unwrap();
            let direct = simpson(&|x: f64| (1.0 - (s * x).powi(2)).sqrt(), -1.0, 1.0, 1e-15);
            assert!((st.norms()[0] - direct).abs() < 1e-12, "{theta}");
        }
    }

    #[test]
    fn chebyshev_limits() {
        let theta = FRAC_PI_2 - 1e-11;
        let p = realline_norms(theta, RealLineWeight::Regular, 30).unwrap().norms();
        let ph = realline_norms(theta, RealLineWeight::Dual, 30).unwrap().norms();
        assert!((ph[0] / PI - 1.0).abs() < 1e-10);
        for n in 0..=30 {
            let u = PI / 2f64.powi(2 * n as i32 + 1);
            assert!((p[n] / u - 1.0).abs() < 1e-10, "U {n}");
            if n >= 1 {
                let t = PI / 2f64.powi(2 * n as i32 - 1);
                assert!((ph[n] / t - 1.0).abs() < 1e-10, "T {n}");
            }
        }
    }

    #[test]
    fn norms_decrease() {
        for weight in [RealLineWeight::Regular, RealLineWeight::Dual] {
            let st = realline_norms(FRAC_PI_3, weight, 60).unwrap();
            assert!(st.log_norms[1..].windows(2).all(|w| w[1] < w[0]));
            assert!(st.a.iter().all(|a| a.abs() < 1e-13));
        }
    }

    #[test]
    fn gauss_exactness() {
        let theta: f64 = 0.7;
        let s = theta.sin();
        let n = 8;
        let st = realline_norms(theta, RealLineWeight::Dual, n).unwrap();
        // Jacobi matrix of the recurrence gives an n-point Gauss rule
        let diag = vec![0.0; n];
        let eig = crate::spectral::tridiagonal_eigen(&diag, &st.b[..n - 1], 1).unwrap();
        let mu0 = st.norms()[0];
        for p in (0..2 * n).step_by(2) {
            let q: f64 = eig
                .values()
                .iter()
                .zip(eig.row(0))
                .map(|(x, v)| mu0 * v * v * x.powi(p as i32))
                .sum();
            let direct = simpson(&|u: f64| u.sin().powi(p as i32) * u.cos() / (1.0 - (s * u.sin()).powi(2)).sqrt(), -FRAC_PI_2, FRAC_PI_2, 1e-15);
            assert!((q - direct).abs() < 1e-12, "p={p}: {q} {direct}");
        }
    }

    #[test]
    fn first_correlations() {
        let c = critical_correlations(FRAC_PI_4, 3).unwrap();
        assert_eq!(c.d[0], 1.0);
        assert!((c.d[1] - FRAC_1_SQRT_2).abs() < 1e-13);
        let c = critical_correlations(FRAC_PI_6, 3).unwrap();
        assert!((c.d[1] - 2.0 / 3.0).abs() < 1e-13);
        assert!((c.l[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn second_correlation_matches_cylinder_extrapolation() {
        // transfer matrix on cylinders of circumference 12..18, extrapolated in 1/L^2
        let c = critical_correlations(FRAC_PI_4, 2).unwrap();
        assert!((c.d[2] - 0.5947).abs() < 5e-4, "{}", c.d[2]);
    }

    #[test]
    fn chain_decreases() {
        for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
            let c = critical_correlations(theta, 60).unwrap();
            assert!(c.d.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn product_identity() {
        for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
            let c = critical_correlations(theta, 21).unwrap();
            let p = realline_norms(theta, RealLineWeight::Regular, 21).unwrap();
            let ph = realline_norms(theta, RealLineWeight::Dual, 21).unwrap();
            for m in 0..=20usize {
                let mf = m as f64;
                let log_rhs = -(2.0 * mf + 1.0) * PI.ln()
                    + 2.0 * mf * mf * LN_2
                    + p.log_norms[..m].iter().sum::<f64>()
                    + ph.log_norms[..=m].iter().sum::<f64>();
                let lhs = (c.d[m + 1] * c.d[m]).ln();
                assert!((lhs - log_rhs).abs() < 1e-9, "theta={theta} m={m}");
            }
        }
    }

    #[test]
    fn two_step_ratio() {
        let c = critical_correlations(FRAC_PI_3, 30).unwrap();
        for n in 0..28 {
            assert!((c.d[n + 2] / c.d[n] - c.a[n] * c.b[n + 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant() {
        let c = c_sigma();
        // 30-digit zeta'(-1) evaluated independently
        assert!((c - 0.875_809_055_080_938).abs() < 1e-14);
        let p = 2f64.powf(2.0 / 3.0) * (6.0 * ZETA_PRIME_MINUS_ONE).exp();
        assert!((c.powi(4) - p).abs() < 1e-15);
    }

    #[test]
    fn mccoy_wu() {
        let mut last = f64::INFINITY;
        for m in [50, 100, 200] {
            let r = mccoy_wu_check(FRAC_PI_4, m).unwrap();
            assert!((r - 1.0).abs() < 1e-2);
            assert!((r - 1.0).abs() < last);
            last = (r - 1.0).abs();
        }
        assert!((mccoy_wu_check(FRAC_PI_6, 100).unwrap() - 1.0).abs() < 1e-2);
        assert!(matches!(mccoy_wu_check(FRAC_PI_4, 5), Err(Error::Precondition(_))));
    }

    #[test]
    fn quadratic_forms_are_computed() {
        let q = quadratic_chain(FRAC_PI_4, 10).unwrap();
        assert_eq!(q.chain.d.len(), 11);
        assert!(q.harmonic[0].is_nan());
        // both forms multiply to the exact two-step ratio
        for m in 0..9 {
            assert!((q.arithmetic[m] * q.harmonic[m + 1] - q.chain.a[m] * q.chain.b[m + 1]).abs() < 1e-12);
        }
    }
}
