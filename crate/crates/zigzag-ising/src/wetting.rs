//! Homogeneous subcritical half-plane with a modified first column: the
//! Toeplitz+Hankel form of the magnetization and the wetting transition.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homogeneous::fourier_cosine;
use crate::layered::{magnetization, MagnetizationOptions, Method};
use crate::spectral::angles::{check_angle, coupling};
use crate::spectral::{logdet, AngleSequence};

/// Agreement required between a determinant variant and the layered engine.
pub const CERTIFY_TOL: f64 = 1e-5;
/// Default cap on the determinant order.
pub const MAX_ORDER: usize = 24;

const FOURIER_TOL: f64 = 1e-13;
const FOURIER_MAX_POINTS: usize = 1 << 22;
/// `|r| - q^2` below this switches to the cancelled form of `xi`.
const CANCEL_TOL: f64 = 1e-12;
/// Poles of `xi` within this distance of the circle are subtracted analytically.
const POLE_BAND: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WettingModel {
    pub theta: f64,
    pub theta_1: f64,
    pub q: f64,
    pub r: f64,
}

impl WettingModel {
    pub fn new(theta: f64, theta_1: f64) -> Result<Self> {
        check_angle(1, theta_1)?;
        check_angle(2, theta)?;
        if theta >= PI / 4.0 {
            return Err(Error::Domain(format!(
                "bulk angle {theta} is not subcritical"
            )));
        }
        let q = theta.tan();
        let r = 1.0 - (theta_1.cos() / theta.cos()).powi(2);
        Ok(Self { theta, theta_1, q, r })
    }

    /// Model with `q = tan(theta)` and `r = 1 - cos^2(theta_1)/cos^2(theta)`.
    pub fn from_qr(q: f64, r: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("q = {q} outside (0, 1)")));
        }
        if !(r > -q * q && r < 1.0) {
            return Err(Error::Domain(format!("r = {r} outside (-q^2, 1)")));
        }
        let theta = q.atan();
        let theta_1 = ((1.0 - r).sqrt() * theta.cos()).acos();
        Self::new(theta, theta_1)
    }

    pub fn angles(&self) -> Result<AngleSequence> {
        AngleSequence::with_first(self.theta_1, self.theta)
    }

    fn q2(&self) -> f64 {
        self.q * self.q
    }

    /// Whether the point eigenvalue below the continuous spectrum is present.
    pub fn has_bound_state(&self) -> bool {
        self.r > self.q2()
    }

    /// `zeta_0 = q^2 / r`
    pub fn zeta0(&self) -> Option<f64> {
        self.has_bound_state().then(|| self.q2() / self.r)
    }

    /// `c = (r^2 - q^4) r^{-3/2} (r - q^4)^{-1/2}`
    pub fn c(&self) -> Option<f64> {
        let (q4, r) = (self.q2() * self.q2(), self.r);
        self.has_bound_state()
            .then(|| (r * r - q4) * r.powf(-1.5) * (r - q4).powf(-0.5))
    }

    /// `lambda(zeta_0) = (1 - r)(r - q^4) / (r (1 + q^2)^2)`
    pub fn bound_eigenvalue(&self) -> Option<f64> {
        let (q2, r) = (self.q2(), self.r);
        self.has_bound_state()
            .then(|| (1.0 - r) * (r - q2 * q2) / (r * (1.0 + q2).powi(2)))
    }

    /// `w(z) = |1 - q^2 z|`
    pub fn w(&self, z: Complex64) -> f64 {
        (1.0 - self.q2() * z).norm()
    }

    /// `xi(z) = (rz - q^2)(q^2 z - 1) / ((z - q^2)(q^2 z - r))`, with the common
    /// factor cancelled when `|r| = q^2`.
    pub fn xi(&self, z: Complex64) -> Complex64 {
        let (q2, r) = (self.q2(), self.r);
        if (r - q2).abs() <= CANCEL_TOL {
            (q2 * z - 1.0) / (z - q2)
        } else if (r + q2).abs() <= CANCEL_TOL {
            -(q2 * z - 1.0) / (z - q2)
        } else {
            (r * z - q2) * (q2 * z - 1.0) / ((z - q2) * (q2 * z - r))
        }
    }

    /// Spectral parameter `lambda(zeta) = 1 - a (2 + zeta + 1/zeta)`, `a = sin^2 cos^2`.
    pub fn lambda(&self, zeta: Complex64) -> Complex64 {
        let a = (self.theta.sin() * self.theta.cos()).powi(2);
        1.0 - a * (2.0 + zeta + 1.0 / zeta)
    }
}

/// Fourier data of the determinant entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierBank {
    /// `alpha_0..=alpha_S`; `alpha_{-s} = alpha_s`
    pub alpha: Vec<f64>,
    /// `beta_0..=beta_S`
    pub beta: Vec<f64>,
    /// Largest imaginary part discarded from `beta`.
    pub beta_imag: f64,
    /// `gamma_0..=gamma_S`
    pub gamma: Vec<f64>,
}

impl FourierBank {
    pub fn alpha_at(&self, s: i64) -> f64 {
        self.alpha[s.unsigned_abs() as usize]
    }
}

fn trapezoid_complex(f: &dyn Fn(f64) -> Complex64, points: usize, s_max: usize) -> Vec<Complex64> {
    let h = 2.0 * PI / points as f64;
    let samples: Vec<Complex64> = (0..points).map(|j| f(j as f64 * h)).collect();
    (0..=s_max)
        .map(|s| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in samples.iter().enumerate() {
                let phase = ((j * s) % points) as f64 * h;
                acc += v * Complex64::from_polar(1.0, -phase);
            }
            acc / points as f64
        })
        .collect()
}

fn fourier_complex(f: &dyn Fn(f64) -> Complex64, s_max: usize) -> Result<Vec<Complex64>> {
    let mut points = (4 * s_max + 4).max(256).next_power_of_two();
    let mut prev = trapezoid_complex(f, points, s_max);
    loop {
        points *= 2;
        if points > FOURIER_MAX_POINTS {
            return Err(Error::Numeric(format!(
                "boundary coefficients not settled with {} points",
                points / 2
            )));
        }
        let next = trapezoid_complex(f, points, s_max);
        let diff = prev
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        if diff <= FOURIER_TOL * next[0].norm().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
}

/// Pole `r/q^2` of `xi` with the residue of `xi W`, where
/// `W(z) = ((1 - q^2 z)(1 - q^2/z))^{1/2}` continues `w` off the circle.
/// Only poles close to the circle are returned.
fn near_pole(model: &WettingModel) -> Option<(f64, f64)> {
    let (q2, r) = (model.q2(), model.r);
    if (r.abs() - q2).abs() <= CANCEL_TOL {
        return None;
    }
    let p = r / q2;
    if (p.abs() - 1.0).abs() > POLE_BAND || p.abs() <= q2 || p.abs() >= 1.0 / q2 {
        return None;
    }
    let w = ((1.0 - q2 * p) * (1.0 - q2 / p)).sqrt();
    let res = (r * p - q2) * (q2 * p - 1.0) / ((p - q2) * q2);
    Some((p, res * w))
}

/// Coefficient of `z^s`, s >= 0, of `1/(z - p)` on the unit circle.
fn pole_coefficient(p: f64, s: usize) -> f64 {
    if p.abs() > 1.0 {
        -p.powi(-(s as i32) - 1)
    } else {
        0.0
    }
}

pub fn wetting_coefficients(model: &WettingModel, s_max: usize) -> Result<FourierBank> {
    let alpha = fourier_cosine(|t| model.w(Complex64::from_polar(1.0, t)), s_max)?;
    let pole = near_pole(model);
    let f = |t: f64| {
        let z = Complex64::from_polar(1.0, t);
        let v = model.xi(z) * model.w(z);
        match pole {
            Some((p, res)) => v - res / (z - p),
            None => v,
        }
    };
    let mut raw = fourier_complex(&f, s_max)?;
    if let Some((p, res)) = pole {
        for (s, b) in raw.iter_mut().enumerate() {
            *b += res * pole_coefficient(p, s);
        }
    }
    let beta_imag = raw.iter().fold(0.0f64, |m, b| m.max(b.im.abs()));
    let beta = raw.iter().map(|b| b.re).collect();
    let gamma = match (model.c(), model.zeta0()) {
        (Some(c), Some(z0)) => (0..=s_max).map(|s| c * z0.powi(s as i32)).collect(),
        _ => vec![0.0; s_max + 1],
    };
    Ok(FourierBank {
        alpha,
        beta,
        beta_imag,
        gamma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `alpha_{k-n} - beta_{k+n} + (1-r)^{3/2} gamma_{k+n}`
    Statement,
    /// `alpha_{k-n} + beta_{k+n} + (1-r)^{3/2} c zeta_0^{k+n-1}`
    ProofDisplay,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Statement, Variant::ProofDisplay];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Statement => "statement",
            Variant::ProofDisplay => "proof-display",
        }
    }
}

/// Row-major `m x m` Toeplitz+Hankel matrix of a variant.
pub fn toeplitz_hankel(model: &WettingModel, bank: &FourierBank, m: usize, variant: Variant) -> Vec<f64> {
    let f = (1.0 - model.r).powf(1.5);
    let mut out = Vec::with_capacity(m * m);
    for k in 0..m {
        for n in 0..m {
            let t = bank.alpha_at(k as i64 - n as i64);
            let h = k + n;
            let v = match variant {
                Variant::Statement => t - bank.beta[h] + f * bank.gamma[h],
                Variant::ProofDisplay => {
                    let extra = match (model.c(), model.zeta0()) {
                        (Some(c), Some(z0)) => c * z0.powi(h as i32 - 1),
                        _ => 0.0,
                    };
                    t + bank.beta[h] + f * extra
                }
            };
            out.push(v);
        }
    }
    out
}

/// `(1-r)^{-3/2} det[...]` for one variant.
pub fn variant_value(model: &WettingModel, bank: &FourierBank, m: usize, variant: Variant) -> Result<f64> {
    if m == 0 {
        return Ok(1.0);
    }
    let det = logdet(&toeplitz_hankel(model, bank, m, variant), m)?;
    Ok(det.value() / (1.0 - model.r).powf(1.5))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WettingReport {
    pub m: usize,
    pub value: f64,
    pub variant: Variant,
    pub statement: f64,
    pub proof_display: f64,
    pub reference: f64,
    /// `|statement - proof_display|`
    pub variant_gap: f64,
    /// `|value - reference|`
    pub deviation: f64,
}

/// Reference value from the layered engine with angles `(theta_1, theta, theta, ...)`.
pub fn layered_reference(model: &WettingModel, m: usize) -> Result<f64> {
    let opts = MagnetizationOptions {
        tol: 1e-10,
        ..MagnetizationOptions::default()
    };
    Ok(magnetization(&model.angles()?, m, Method::Sqrt, &opts)?.value)
}

/// Both determinant variants, certified against the layered engine.
pub fn wetting_magnetization(model: &WettingModel, m: usize) -> Result<WettingReport> {
    if m == 0 || m > MAX_ORDER {
        return Err(Error::Domain(format!(
            "determinant order must lie in 1..={MAX_ORDER}, got {m}"
        )));
    }
    let bank = wetting_coefficients(model, 2 * m)?;
    let statement = variant_value(model, &bank, m, Variant::Statement)?;
    let proof_display = variant_value(model, &bank, m, Variant::ProofDisplay)?;
    let reference = layered_reference(model, m)?;
    let (variant, value) = [(Variant::Statement, statement), (Variant::ProofDisplay, proof_display)]
        .into_iter()
        .min_by(|a, b| (a.1 - reference).abs().total_cmp(&(b.1 - reference).abs()))
        .unwrap();
    let deviation = (value - reference).abs();
    if !(deviation <= CERTIFY_TOL) {
        return Err(Error::Consistency(format!(
            "M_{m}: neither variant matches the layered value {reference} (statement {statement}, proof display {proof_display})"
        )));
    }
    Ok(WettingReport {
        m,
        value,
        variant,
        statement,
        proof_display,
        reference,
        variant_gap: (statement - proof_display).abs(),
        deviation,
    })
}

/// `M_1` with free boundary, `(1 - q^4)^{1/2}`.
pub fn free_boundary_limit(q: f64) -> f64 {
    (1.0 - q.powi(4)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalField {
    pub theta: f64,
    pub theta_1: f64,
    /// Field `h = 2 beta J_1`.
    pub h: f64,
}

/// First-column coupling at which `r = q^2`.
pub fn critical_field(q: f64) -> Result<CriticalField> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q = {q} outside (0, 1)")));
    }
    let theta = q.atan();
    let theta_1 = ((1.0 - q * q).sqrt() * theta.cos()).acos();
    Ok(CriticalField {
        theta,
        theta_1,
        h: 2.0 * coupling(theta_1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_6;

    #[test]
    fn xi_reciprocity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (q, r) in [(0.5, 0.3), (0.5, -0.2), (0.8, 0.9), (0.3, 0.09), (0.4, -0.16)] {
            let m = WettingModel::from_qr(q, r).unwrap();
            for _ in 0..64 {
                let z = Complex64::from_polar(1.0, rng.gen_range(-PI..PI));
                assert!((m.xi(z) * m.xi(1.0 / z) - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cancelled_form_is_continuous() {
        let q = 0.5;
        let exact = WettingModel::from_qr(q, q * q).unwrap();
        let near = WettingModel { r: q * q + 1e-9, ..exact };
        let z = Complex64::from_polar(1.0, 0.7);
        assert!((exact.xi(z) - near.xi(z)).norm() < 1e-7);
        let b = wetting_coefficients(&exact, 6).unwrap();
        assert!(b.beta.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn coefficient_properties() {
        for (q, r) in [(0.5, 0.3), (0.5, 0.1), (0.7, -0.3), (0.2, 0.8)] {
            let m = WettingModel::from_qr(q, r).unwrap();
            let b = wetting_coefficients(&m, 10).unwrap();
            assert!(b.beta_imag <= 1e-12);
            // mean of |1 - q^2 z| is at least |mean| = 1
            assert!(b.alpha[0] >= 1.0 && b.alpha[0] <= 1.0 + q * q);
            if r <= q * q {
                assert!(b.gamma.iter().all(|&g| g == 0.0));
            } else {
                assert!(b.gamma[0] > 0.0);
            }
        }
    }

    #[test]
    fn pole_subtraction_matches_plain_rule() {
        for (q, r) in [(0.5, 0.3), (0.6, -0.3), (0.7, 0.45)] {
            let m = WettingModel::from_qr(q, r).unwrap();
            assert!(near_pole(&m).is_some());
            let b = wetting_coefficients(&m, 6).unwrap();
            let f = |t: f64| {
                let z = Complex64::from_polar(1.0, t);
                m.xi(z) * m.w(z)
            };
            let plain = trapezoid_complex(&f, 1 << 16, 6);
            for s in 0..=6 {
                assert!((b.beta[s] - plain[s].re).abs() < 1e-11, "q={q} r={r} s={s}");
            }
        }
    }

    #[test]
    fn builder_matches_naive_loop() {
        let m = WettingModel::from_qr(0.6, 0.5).unwrap();
        let b = wetting_coefficients(&m, 8).unwrap();
        let f = (1.0 - m.r).powf(1.5);
        let got = toeplitz_hankel(&m, &b, 5, Variant::Statement);
        let mut naive = vec![0.0; 25];
        for k in 0..5usize {
            for n in 0..5usize {
                let d = (k as i64 - n as i64).unsigned_abs() as usize;
                naive[k * 5 + n] = b.alpha[d] - b.beta[k + n] + f * b.gamma[k + n];
            }
        }
        assert_eq!(got, naive);
    }

    #[test]
    fn homogeneous_case_matches_layered() {
        let model = WettingModel::new(FRAC_PI_6, FRAC_PI_6).unwrap();
        assert!(model.r.abs() < 1e-15);
        for m in 1..=6 {
            let rep = wetting_magnetization(&model, m).unwrap();
            assert_eq!(rep.variant, Variant::Statement);
            assert!(rep.deviation < 1e-6, "m={m}");
        }
    }

    #[test]
    fn statement_variant_is_certified() {
        let model = WettingModel::from_qr(FRAC_PI_6.tan(), 0.5).unwrap();
        for m in 1..=5 {
            let rep = wetting_magnetization(&model, m).unwrap();
            assert_eq!(rep.variant, Variant::Statement);
            assert!(rep.deviation < 1e-6);
            assert!(rep.variant_gap > 1e-2);
        }
    }

    #[test]
    fn critical_field_identity() {
        let q = FRAC_PI_6.tan();
        let cf = critical_field(q).unwrap();
        let lhs = cf.theta_1.cos().powi(2);
        let rhs = (1.0 - q * q) * cf.theta.cos().powi(2);
        assert!((lhs - rhs).abs() < 1e-14);
        let model = WettingModel::new(cf.theta, cf.theta_1).unwrap();
        assert!((model.r - q * q).abs() < 1e-12);
        // r = q^2 - eps vs q^2 + eps: gamma switches on
        let below = WettingModel::from_qr(q, q * q - 1e-6).unwrap();
        let above = WettingModel::from_qr(q, q * q + 1e-6).unwrap();
        assert!(wetting_coefficients(&below, 2).unwrap().gamma[0] == 0.0);
        assert!(wetting_coefficients(&above, 2).unwrap().gamma[0] > 0.0);
        // weaker q gives a field closer to the bulk angle
        let gap = |q: f64| {
            let cf = critical_field(q).unwrap();
            cf.theta_1 - cf.theta
        };
        assert!(gap(1e-3) > 0.0 && gap(1e-3) < 1e-3 && gap(1e-3) < gap(1e-2));
    }

    #[test]
    fn generalized_eigenfunctions() {
        // (J - lambda) psi = 0 on interior rows, psi_k = rho_k^{-1}(zeta^k - xi zeta^{-k})
        let model = WettingModel::from_qr(0.5, 0.4).unwrap();
        let j = crate::spectral::build_jacobi(&model.angles().unwrap(), 12).unwrap();
        for t in [0.3, 1.1, 2.5] {
            let zeta = Complex64::from_polar(1.0, t);
            let xi = model.xi(zeta);
            let lam = model.lambda(zeta);
            let psi: Vec<Complex64> = (0..12)
                .map(|k| {
                    let rho = if k == 0 { (1.0 - model.r).sqrt() } else { 1.0 };
                    (zeta.powi(k) - xi * zeta.powi(-k)) / rho
                })
                .collect();
            for row in 0..11 {
                let mut v = (j.diag()[row] - lam) * psi[row] - j.offdiag()[row] * psi[row + 1];
                if row > 0 {
                    v -= j.offdiag()[row - 1] * psi[row - 1];
                }
                assert!(v.norm() < 1e-10, "t={t} row={row}: {}", v.norm());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn free_boundary_asymptotics(q in 0.2f64..0.9, s in 1usize..4) {
            // alpha_s - beta_s = O(1 - r), alpha_0 - beta_0 = O((1 - r)^2)
            let d = |eps: f64| {
                let b = wetting_coefficients(&WettingModel::from_qr(q, 1.0 - eps).unwrap(), s).unwrap();
                (b.alpha[0] - b.beta[0], b.alpha[s] - b.beta[s])
            };
            let (a1, b1) = d(1e-2);
            let (a2, b2) = d(5e-3);
            prop_assert!(((a1 / a2).log2() - 2.0).abs() < 0.15);
            prop_assert!(((b1 / b2).log2() - 1.0).abs() < 0.15);
        }
    }
}
