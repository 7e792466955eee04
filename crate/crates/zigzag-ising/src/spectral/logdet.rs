use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A determinant stored as sign and natural log of its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogDet {
    pub sign: i8,
    pub log_abs: f64,
}

impl LogDet {
    pub const ONE: LogDet = LogDet {
        sign: 1,
        log_abs: 0.0,
    };
    pub const ZERO: LogDet = LogDet {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogDet {
                sign: if x > 0.0 { 1 } else { -1 },
                log_abs: x.abs().ln(),
            }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_abs.exp()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: LogDet) -> LogDet {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        LogDet {
            sign: self.sign * other.sign,
            log_abs: self.log_abs + other.log_abs,
        }
    }

    pub fn div(self, other: LogDet) -> Result<LogDet> {
        if other.sign == 0 {
            return Err(Error::Numeric("division by a singular determinant".into()));
        }
        if self.sign == 0 {
            return Ok(Self::ZERO);
        }
        Ok(LogDet {
            sign: self.sign * other.sign,
            log_abs: self.log_abs - other.log_abs,
        })
    }

    pub fn abs(self) -> LogDet {
        LogDet {
            sign: self.sign.abs(),
            log_abs: self.log_abs,
        }
    }

    pub fn powf(self, p: f64) -> Result<LogDet> {
        match self.sign {
            0 => Ok(Self::ZERO),
            1 => Ok(LogDet {
                sign: 1,
                log_abs: p * self.log_abs,
            }),
            _ => Err(Error::Numeric(
                "fractional power of a negative determinant".into(),
            )),
        }
    }
}

/// Log-determinant of a dense row-major `n x n` matrix by partial pivoting.
///
/// A pivot below `n * eps * max|a_ij|` counts as an exact zero.
pub fn logdet(matrix: &[f64], n: usize) -> Result<LogDet> {
    if matrix.len() != n * n {
        return Err(Error::Shape(format!(
            "expected {} entries for a {n} x {n} matrix, got {}",
            n * n,
            matrix.len()
        )));
    }
    if n == 0 {
        return Ok(LogDet::ONE);
    }
    let mut a = matrix.to_vec();
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok(LogDet::ZERO);
    }
    let floor = n as f64 * f64::EPSILON * scale;
    let mut sign: i8 = 1;
    let mut log_abs = 0.0;
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if pmax <= floor {
            return Ok(LogDet::ZERO);
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            sign = -sign;
        }
        let p = a[col * n + col];
        if p < 0.0 {
            sign = -sign;
        }
        log_abs += p.abs().ln();
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for k in col + 1..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    Ok(LogDet { sign, log_abs })
}

/// Hankel determinant `det[mu_{p+q}]_{p,q<m}` of a moment table.
pub fn hankel_logdet(moments: &[f64], m: usize) -> Result<LogDet> {
    if m == 0 {
        return Ok(LogDet::ONE);
    }
    if moments.len() < 2 * m - 1 {
        return Err(Error::Size(format!(
            "Hankel determinant of order {m} needs moments 0..={}, table has {}",
            2 * m - 2,
            moments.len()
        )));
    }
    let mut h = vec![0.0; m * m];
    for p in 0..m {
        for q in 0..m {
            h[p * m + q] = moments[p + q];
        }
    }
    logdet(&h, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cofactor3(a: &[f64]) -> f64 {
        a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
            + a[2] * (a[3] * a[7] - a[4] * a[6])
    }

    fn cofactor4(a: &[f64]) -> f64 {
        let mut total = 0.0;
        for c in 0..4 {
            let minor: Vec<f64> = (1..4)
                .flat_map(|r| (0..4).filter(move |&k| k != c).map(move |k| (r, k)))
                .map(|(r, k)| a[r * 4 + k])
                .collect();
            let s = if c % 2 == 0 { 1.0 } else { -1.0 };
            total += s * a[c] * cofactor3(&minor);
        }
        total
    }

    #[test]
    fn dirac_at_one() {
        let mu = [1.0; 5];
        assert_eq!(hankel_logdet(&mu, 1).unwrap().value(), 1.0);
        assert!(hankel_logdet(&mu, 2).unwrap().is_zero());
    }

    #[test]
    fn uniform_measure() {
        let mu: Vec<f64> = (0..5).map(|p| 1.0 / (p as f64 + 1.0)).collect();
        let h2 = hankel_logdet(&mu, 2).unwrap().value();
        assert!((h2 - 1.0 / 12.0).abs() < 1e-16);
        assert_eq!(hankel_logdet(&mu, 1).unwrap().value(), 1.0);
    }

    #[test]
    fn table_too_short() {
        assert!(matches!(hankel_logdet(&[1.0, 0.5], 2), Err(Error::Size(_))));
    }

    #[test]
    fn sign_tracking() {
        let m = [0.0, 1.0, 1.0, 0.0];
        assert_eq!(logdet(&m, 2).unwrap().value(), -1.0);
        let d = LogDet::from_value(-3.0).mul(LogDet::from_value(2.0));
        assert!((d.value() + 6.0).abs() < 1e-14);
        assert!(LogDet::from_value(4.0).powf(0.5).unwrap().value() - 2.0 < 1e-15);
    }

    proptest! {
        #[test]
        fn matches_cofactor_4x4(v in prop::collection::vec(-1.0f64..1.0, 16)) {
            let mut a = v.clone();
            for i in 0..4 { a[i * 5] += 4.0; }
            let direct = cofactor4(&a);
            let ld = logdet(&a, 4).unwrap().value();
            prop_assert!((ld - direct).abs() <= 1e-10 * direct.abs());
        }

        #[test]
        fn psd_hankel_matches_cofactor(nodes in prop::collection::vec(0.0f64..1.0, 3..8),
                                       raw in prop::collection::vec(0.05f64..1.0, 8)) {
            let total: f64 = raw[..nodes.len()].iter().sum();
            let mu: Vec<f64> = (0..5).map(|p| nodes.iter().zip(&raw).map(|(x, w)| w / total * x.powi(p)).sum()).collect();
            let h: Vec<f64> = (0..3).flat_map(|p| (0..3).map(move |q| (p, q))).map(|(p, q)| mu[p + q]).collect();
            let direct = cofactor3(&h);
            let ld = hankel_logdet(&mu, 3).unwrap();
            prop_assert!(ld.sign >= 0);
            prop_assert!((ld.value() - direct).abs() <= 1e-10 * direct.abs() + 1e-15);
        }
    }
}
