use serde::{Deserialize, Serialize};

use super::angles::AngleSequence;
use crate::error::{Error, Result};

/// Symmetric tridiagonal truncation of the Jacobi operator.
///
/// The off-diagonal is stored as `+a_k`. Conjugating by `diag((-1)^k)` flips
/// its sign, so spectra, moments and absolute minors do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiOperator {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl JacobiOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Size("Jacobi matrix must have size >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::Shape(format!(
                "size {} needs {} off-diagonal entries, got {}",
                diag.len(),
                diag.len() - 1,
                offdiag.len()
            )));
        }
        if let Some(k) = offdiag.iter().position(|&a| !(a > 0.0)) {
            return Err(Error::Domain(format!(
                "off-diagonal a_{} = {} is not positive",
                k + 1,
                offdiag[k]
            )));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// b_1..b_N
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// a_1..a_{N-1}
    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    /// Leading n x n block.
    pub fn leading(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.size() {
            return Err(Error::Size(format!(
                "cannot take a {n} x {n} block of a size {} operator",
                self.size()
            )));
        }
        Ok(Self {
            diag: self.diag[..n].to_vec(),
            offdiag: self.offdiag[..n - 1].to_vec(),
        })
    }
}

/// Lower bidiagonal factor with `D D^T = J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidiagonalOperator {
    diag: Vec<f64>,
    subdiag: Vec<f64>,
}

impl BidiagonalOperator {
    pub fn new(diag: Vec<f64>, subdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Size("bidiagonal matrix must have size >= 1".into()));
        }
        if subdiag.len() + 1 != diag.len() {
            return Err(Error::Shape(format!(
                "size {} needs {} subdiagonal entries, got {}",
                diag.len(),
                diag.len() - 1,
                subdiag.len()
            )));
        }
        Ok(Self { diag, subdiag })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// d_1..d_N
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// s_1..s_{N-1}
    pub fn subdiag(&self) -> &[f64] {
        &self.subdiag
    }

    /// Tridiagonal entries (diagonal, off-diagonal) of `D D^T`.
    pub fn gram(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.size();
        let diag = (0..n)
            .map(|k| {
                let s = if k > 0 { self.subdiag[k - 1] } else { 0.0 };
                self.diag[k] * self.diag[k] + s * s
            })
            .collect();
        let off = (0..n - 1).map(|k| self.diag[k] * self.subdiag[k]).collect();
        (diag, off)
    }

    /// `(D^T v)_i = d_i v_i + s_i v_{i+1}` on the truncation.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i + 1 < n {
                    acc += self.subdiag[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// max-norm distance between `D D^T` and `j`.
    pub fn gram_deviation(&self, j: &JacobiOperator) -> f64 {
        let (d, o) = self.gram();
        let a = d
            .iter()
            .zip(j.diag())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let b = o
            .iter()
            .zip(j.offdiag())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        a.max(b)
    }
}

/// N x N truncation of the Jacobi operator of an angle sequence.
pub fn build_jacobi(angles: &AngleSequence, n: usize) -> Result<JacobiOperator> {
    if n == 0 {
        return Err(Error::Size("truncation size must be >= 1".into()));
    }
    let th = angles.thetas(2 * n)?;
    let (c, s): (Vec<f64>, Vec<f64>) = th.iter().map(|t| (t.cos(), t.sin())).unzip();
    let diag = (1..=n)
        .map(|k| {
            let x = c[2 * k - 1] * c[2 * k];
            let y = s[2 * k - 2] * s[2 * k - 1];
            x * x + y * y
        })
        .collect();
    let offdiag = (1..n)
        .map(|k| c[2 * k - 1] * c[2 * k] * s[2 * k] * s[2 * k + 1])
        .collect();
    JacobiOperator::new(diag, offdiag)
}

/// N x N truncation of the even block of the propagation operator.
pub fn build_d_even(angles: &AngleSequence, n: usize) -> Result<BidiagonalOperator> {
    if n == 0 {
        return Err(Error::Size("truncation size must be >= 1".into()));
    }
    let th = angles.thetas(2 * n)?;
    let diag = (1..=n)
        .map(|k| th[2 * k - 1].cos() * th[2 * k].cos())
        .collect();
    let subdiag = (1..n)
        .map(|k| th[2 * k].sin() * th[2 * k + 1].sin())
        .collect();
    BidiagonalOperator::new(diag, subdiag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn critical_entries() {
        let a = AngleSequence::homogeneous(FRAC_PI_4).unwrap();
        let j = build_jacobi(&a, 3).unwrap();
        for (x, y) in j.diag().iter().zip([0.25, 0.5, 0.5]) {
            assert!((x - y).abs() < 1e-15);
        }
        for x in j.offdiag() {
            assert!((x - 0.25).abs() < 1e-15);
        }
        let d = build_d_even(&a, 3).unwrap();
        assert!(d.diag().iter().all(|x| (x - 0.5).abs() < 1e-15));
        assert!(d.subdiag().iter().all(|x| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn homogeneous_entries() {
        let t = 0.7f64;
        let j = build_jacobi(&AngleSequence::homogeneous(t).unwrap(), 4).unwrap();
        let (c, s) = (t.cos(), t.sin());
        assert!((j.diag()[0] - c.powi(4)).abs() < 1e-15);
        for b in &j.diag()[1..] {
            assert!((b - c.powi(4) - s.powi(4)).abs() < 1e-15);
        }
        for a in j.offdiag() {
            assert!((a - c * c * s * s).abs() < 1e-15);
        }
        let d = build_d_even(&AngleSequence::homogeneous(t).unwrap(), 4).unwrap();
        assert!(d.diag().iter().all(|x| (x - c * c).abs() < 1e-15));
        assert!(d.subdiag().iter().all(|x| (x - s * s).abs() < 1e-15));
    }

    #[test]
    fn alternating_first_entry() {
        let a = AngleSequence::periodic(vec![FRAC_PI_6, FRAC_PI_3]).unwrap();
        let j = build_jacobi(&a, 2).unwrap();
        assert!((j.diag()[0] - 3.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn size_one_and_errors() {
        let a = AngleSequence::homogeneous(0.5).unwrap();
        let j = build_jacobi(&a, 1).unwrap();
        assert_eq!(j.size(), 1);
        assert!(build_jacobi(&a, 0).is_err());
        let short = AngleSequence::explicit(vec![0.5; 5]).unwrap();
        assert!(build_jacobi(&short, 3).is_err());
        assert!(build_jacobi(&short, 2).is_ok());
        assert!(JacobiOperator::new(vec![1.0, 1.0], vec![0.0]).is_err());
    }

    #[test]
    fn apply_matches_dense() {
        let j = JacobiOperator::new(vec![1.0, 2.0, 3.0], vec![0.5, 0.25]).unwrap();
        assert_eq!(j.apply(&[1.0, 1.0, 1.0]), vec![1.5, 2.75, 3.25]);
    }

    fn angle_list() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-3f64..(FRAC_PI_2 - 1e-3), 2..1025)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn gram_reproduces_jacobi(list in angle_list()) {
            let a = AngleSequence::explicit(list.clone()).unwrap();
            let n = list.len() / 2;
            let j = build_jacobi(&a, n).unwrap();
            let d = build_d_even(&a, n).unwrap();
            prop_assert!(d.gram_deviation(&j) <= 1e-14);
        }

        #[test]
        fn entries_in_unit_interval(list in angle_list()) {
            let a = AngleSequence::explicit(list.clone()).unwrap();
            let j = build_jacobi(&a, list.len() / 2).unwrap();
            prop_assert!(j.diag().iter().all(|&b| (0.0..=1.0).contains(&b)));
            prop_assert!(j.offdiag().iter().all(|&x| x > 0.0 && x <= 0.5));
        }
    }
}
