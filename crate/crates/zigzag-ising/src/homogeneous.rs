//! Homogeneous square lattice off criticality: circle weights, Verblunsky
//! coefficients and the spontaneous magnetization.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::spectral::angles::check_angle;

const FOURIER_TOL: f64 = 1e-13;
const FOURIER_MAX_POINTS: usize = 1 << 22;
const PIVOT_FLOOR: f64 = 1e-13;

/// `w(t) = [(1 - sin h cos v cos t)^2 - (cos h sin v)^2]^{1/2}` or its
/// reciprocal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleWeight {
    pub theta_h: f64,
    pub theta_v: f64,
    pub dual: bool,
}

impl CircleWeight {
    pub fn new(theta_h: f64, theta_v: f64, dual: bool) -> Result<Self> {
        check_angle(1, theta_h)?;
        check_angle(2, theta_v)?;
        if dual && (theta_h + theta_v - FRAC_PI_2).abs() < 1e-12 {
            return Err(Error::Domain(
                "dual weight is not integrable on the critical line".into(),
            ));
        }
        Ok(Self {
            theta_h,
            theta_v,
            dual,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = 1.0 - self.theta_h.sin() * self.theta_v.cos() * t.cos();
        let b = self.theta_h.cos() * self.theta_v.sin();
        let w = ((a - b) * (a + b)).sqrt();
        if self.dual {
            1.0 / w
        } else {
            w
        }
    }

    /// q_-^2 = tan(h/2) tan(pi/4 + v/2)
    pub fn q_minus_sq(&self) -> f64 {
        (0.5 * self.theta_h).tan() * (FRAC_PI_4 + 0.5 * self.theta_v).tan()
    }

    /// q_+^2 = tan(h/2) tan(pi/4 - v/2)
    pub fn q_plus_sq(&self) -> f64 {
        (0.5 * self.theta_h).tan() * (FRAC_PI_4 - 0.5 * self.theta_v).tan()
    }

    /// Constant `C = cos^2(h/2) cos v` in `w = C |1 - q_-^2 e^{it}| |1 - q_+^2 e^{it}|`.
    pub fn scale(&self) -> f64 {
        (0.5 * self.theta_h).cos().powi(2) * self.theta_v.cos()
    }

    /// Right-hand side of the factorization at `t` (non-dual weight).
    pub fn factorized(&self, t: f64) -> f64 {
        let f = |q2: f64| ((1.0 - q2 * t.cos()).powi(2) + (q2 * t.sin()).powi(2)).sqrt();
        self.scale() * f(self.q_minus_sq()) * f(self.q_plus_sq())
    }
}

fn trapezoid_cosine(f: &dyn Fn(f64) -> f64, points: usize, s_max: usize) -> Vec<f64> {
    let h = 2.0 * PI / points as f64;
    let samples: Vec<f64> = (0..points).map(|j| f(j as f64 * h)).collect();
    let table: Vec<f64> = (0..points).map(|j| (j as f64 * h).cos()).collect();
    (0..=s_max)
        .map(|s| {
            let mut idx = 0usize;
            let mut acc = 0.0;
            for x in &samples {
                acc += x * table[idx];
                idx = (idx + s) % points;
            }
            acc / points as f64
        })
        .collect()
}

/// Fourier coefficients c_0..=c_S of an even function on the circle by the
/// trapezoid rule, doubling the resolution until they settle.
pub fn fourier_cosine(f: impl Fn(f64) -> f64, s_max: usize) -> Result<Vec<f64>> {
    let mut points = (4 * s_max + 4).max(64).next_power_of_two();
    let mut prev = trapezoid_cosine(&f, points, s_max);
    loop {
        points *= 2;
        if points > FOURIER_MAX_POINTS {
            return Err(Error::Numeric(format!(
                "Fourier coefficients not settled with {} points",
                points / 2
            )));
        }
        let next = trapezoid_cosine(&f, points, s_max);
        let scale = next[0].abs().max(1.0);
        let diff = prev
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff <= FOURIER_TOL * scale {
            return Ok(next);
        }
        prev = next;
    }
}

/// c_0..=c_S of the weight; `c_{-s} = c_s`.
pub fn weight_fourier_moments(weight: &CircleWeight, s_max: usize) -> Result<Vec<f64>> {
    fourier_cosine(|t| weight.eval(t), s_max)
}

/// Verblunsky coefficients and squared norms of the monic orthogonal
/// polynomials of a real even weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpucState {
    /// alpha_0..alpha_{n-1}
    pub alpha: Vec<f64>,
    /// beta_0..beta_n
    pub beta: Vec<f64>,
}

/// Levinson recursion on the Toeplitz moments `c_0..=c_n`.
pub fn verblunsky(moments: &[f64], n: usize) -> Result<OpucState> {
    if moments.len() < n + 1 {
        return Err(Error::Size(format!(
            "{n} Verblunsky coefficients need moments c_0..=c_{n}, got {}",
            moments.len()
        )));
    }
    if !(moments[0] > 0.0) {
        return Err(Error::Domain(format!("c_0 = {} is not positive", moments[0])));
    }
    let mut phi = vec![1.0];
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n + 1);
    beta.push(moments[0]);
    for k in 0..n {
        let b = beta[k];
        let a: f64 = phi.iter().zip(&moments[1..]).map(|(p, c)| p * c).sum::<f64>() / b;
        let shrink = 1.0 - a * a;
        if shrink < PIVOT_FLOOR {
            return Err(Error::Numeric(format!(
                "Levinson step {k}: 1 - alpha^2 = {shrink:e}"
            )));
        }
        let mut next = vec![0.0; k + 2];
        next[1..].copy_from_slice(&phi);
        for j in 0..=k {
            next[j] -= a * phi[k - j];
        }
        phi = next;
        alpha.push(a);
        beta.push(b * shrink);
    }
    Ok(OpucState { alpha, beta })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalProducts {
    /// `D_{2m+1}^2 - (D*_{2m+1})^2` for m = 0..=m_max
    pub values: Vec<f64>,
    pub limit: f64,
    pub l0: f64,
    pub l0_star: f64,
}

fn require_subcritical(theta_h: f64, theta_v: f64) -> Result<()> {
    check_angle(1, theta_h)?;
    check_angle(2, theta_v)?;
    if theta_h.tan() * theta_v.tan() >= 1.0 {
        return Err(Error::Domain(format!(
            "(theta_h, theta_v) = ({theta_h}, {theta_v}) is not subcritical"
        )));
    }
    Ok(())
}

pub(crate) fn telescope(beta: &[f64], beta_hash: &[f64], base: f64, m_max: usize) -> Vec<f64> {
    (0..=m_max)
        .map(|m| {
            let hash: f64 = beta_hash[..2 * m + 2].iter().map(|b| b.ln()).sum();
            let plain: f64 = beta[..2 * m].iter().map(|b| b.ln()).sum();
            base * (hash + plain).exp()
        })
        .collect()
}

/// Norms of both weights far enough for the telescoped product up to m_max.
fn norms(theta_h: f64, theta_v: f64, m_max: usize) -> Result<(OpucState, OpucState)> {
    let n = 2 * m_max + 2;
    let w = weight_fourier_moments(&CircleWeight::new(theta_h, theta_v, false)?, n)?;
    let wh = weight_fourier_moments(&CircleWeight::new(theta_h, theta_v, true)?, n)?;
    Ok((verblunsky(&w, n)?, verblunsky(&wh, n)?))
}

pub fn subcritical_product(theta_h: f64, theta_v: f64, m_max: usize) -> Result<SubcriticalProducts> {
    require_subcritical(theta_h, theta_v)?;
    let (plain, hash) = norms(theta_h, theta_v, m_max)?;
    let l0 = theta_v.cos();
    let l0_star = theta_h.sin();
    let values = telescope(&plain.beta, &hash.beta, (l0 - l0_star) * (l0 + l0_star), m_max);
    Ok(SubcriticalProducts {
        limit: *values.last().unwrap(),
        values,
        l0,
        l0_star,
    })
}

/// `prod_{k<=2m+1} beta#_k prod_{k<=2m-1} beta_k`, which tends to `C^-2 G^2`.
pub fn szego_product(theta_h: f64, theta_v: f64, m: usize) -> Result<f64> {
    require_subcritical(theta_h, theta_v)?;
    let (plain, hash) = norms(theta_h, theta_v, m)?;
    Ok(telescope(&plain.beta, &hash.beta, 1.0, m)[m])
}

/// `[1 - (tan h tan v)^2]^{1/8}`
pub fn koy_magnetization(theta_h: f64, theta_v: f64) -> Result<f64> {
    require_subcritical(theta_h, theta_v)?;
    let p = theta_h.tan() * theta_v.tan();
    Ok((1.0 - p * p).powf(0.125))
}

/// `k^{1/4}` with `k = [1 - (tan h tan v)^2]^{1/2}`.
pub fn koy_magnetization_k(theta_h: f64, theta_v: f64) -> Result<f64> {
    require_subcritical(theta_h, theta_v)?;
    let p = theta_h.tan() * theta_v.tan();
    Ok((1.0 - p * p).sqrt().sqrt().sqrt())
}

/// `G = [(1 - q_-^4)(1 - q_+^4)(1 - q_-^2 q_+^2)^2]^{-1/4}`
pub fn szego_g(theta_h: f64, theta_v: f64) -> Result<f64> {
    require_subcritical(theta_h, theta_v)?;
    let w = CircleWeight::new(theta_h, theta_v, false)?;
    let (a, b) = (w.q_minus_sq(), w.q_plus_sq());
    Ok(((1.0 - a * a) * (1.0 - b * b) * (1.0 - a * b).powi(2)).powf(-0.25))
}

/// G through cosines of h, v, h + v and h - v.
pub fn szego_g_trig(theta_h: f64, theta_v: f64) -> Result<f64> {
    require_subcritical(theta_h, theta_v)?;
    let (h, v) = (theta_h, theta_v);
    Ok((0.5 * h).cos().powi(2) * v.cos().sqrt() / h.cos().sqrt()
        * ((h + v).cos() * (h - v).cos()).powf(-0.25))
}

/// G as `exp[sum_k (q_-^{2k} + q_+^{2k})^2 / 4k]`, summed until the terms
/// drop below rounding.
pub fn szego_g_series(theta_h: f64, theta_v: f64) -> Result<f64> {
    require_subcritical(theta_h, theta_v)?;
    let w = CircleWeight::new(theta_h, theta_v, false)?;
    let (a, b) = (w.q_minus_sq(), w.q_plus_sq());
    let (mut pa, mut pb, mut sum) = (1.0, 1.0, 0.0);
    for k in 1..100_000 {
        pa *= a;
        pb *= b;
        let term = (pa + pb).powi(2) / (4.0 * k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    Ok(sum.exp())
}

/// Energy density on a vertical edge, `beta#_0 [cos v - alpha#_0 sin h]`.
pub fn energy_density(theta_h: f64, theta_v: f64) -> Result<f64> {
    let w = CircleWeight::new(theta_h, theta_v, true)?;
    let c = weight_fourier_moments(&w, 1)?;
    let st = verblunsky(&c, 1)?;
    Ok(st.beta[0] * (theta_v.cos() - st.alpha[0] * theta_h.sin()))
}
