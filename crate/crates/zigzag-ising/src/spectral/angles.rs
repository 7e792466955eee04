use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interaction weight `x = tan(theta/2)` of an edge with angle `theta`.
pub fn theta_to_x(theta: f64) -> f64 {
    (0.5 * theta).tan()
}

/// Inverse of [`theta_to_x`].
pub fn x_to_theta(x: f64) -> f64 {
    2.0 * x.atan()
}

/// Dimensionless coupling `beta*J = -ln(x)/2`.
pub fn coupling(theta: f64) -> f64 {
    -0.5 * theta_to_x(theta).ln()
}

/// Angle with the given dimensionless coupling `beta*J`.
pub fn coupling_to_theta(beta_j: f64) -> f64 {
    x_to_theta((-2.0 * beta_j).exp())
}

pub(crate) fn check_angle(index: usize, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 && value < FRAC_PI_2 {
        Ok(value)
    } else {
        Err(Error::Angle { index, value })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum AngleKind {
    Explicit { angles: Vec<f64> },
    Periodic { block: Vec<f64> },
    Homogeneous { theta: f64 },
    HomogeneousWithFirst { first: f64, theta: f64 },
    Prefixed { head: Vec<f64>, tail: f64 },
}

/// The stream theta_1, theta_2, ... of column interaction angles. `theta(0)` is 0 by convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSequence {
    kind: AngleKind,
}

impl AngleSequence {
    /// A finite list; asking for angles past its end is a size error.
    pub fn explicit(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Size("empty angle list".into()));
        }
        for (i, &t) in angles.iter().enumerate() {
            check_angle(i + 1, t)?;
        }
        Ok(Self {
            kind: AngleKind::Explicit { angles },
        })
    }

    pub fn periodic(block: Vec<f64>) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::Shape("empty period block".into()));
        }
        for (i, &t) in block.iter().enumerate() {
            check_angle(i + 1, t)?;
        }
        Ok(Self {
            kind: AngleKind::Periodic { block },
        })
    }

    pub fn homogeneous(theta: f64) -> Result<Self> {
        check_angle(1, theta)?;
        Ok(Self {
            kind: AngleKind::Homogeneous { theta },
        })
    }

    pub fn with_first(first: f64, theta: f64) -> Result<Self> {
        check_angle(1, first)?;
        check_angle(2, theta)?;
        Ok(Self {
            kind: AngleKind::HomogeneousWithFirst { first, theta },
        })
    }

    /// Explicit head followed by a constant tail.
    pub fn prefixed(head: Vec<f64>, tail: f64) -> Result<Self> {
        for (i, &t) in head.iter().enumerate() {
            check_angle(i + 1, t)?;
        }
        check_angle(head.len() + 1, tail)?;
        Ok(Self {
            kind: AngleKind::Prefixed { head, tail },
        })
    }

    /// Angles given through their weights `x_k = tan(theta_k/2)`.
    pub fn from_x(weights: Vec<f64>) -> Result<Self> {
        Self::explicit(weights.into_iter().map(x_to_theta).collect())
    }

    pub fn kind(&self) -> &AngleKind {
        &self.kind
    }

    /// Number of angles available, `None` for infinite generators.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            AngleKind::Explicit { angles } => Some(angles.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            AngleKind::Explicit { angles } => *angles.get(k - 1).ok_or_else(|| {
                Error::Size(format!(
                    "angle list has {} entries, theta_{k} requested",
                    angles.len()
                ))
            })?,
            AngleKind::Periodic { block } => block[(k - 1) % block.len()],
            AngleKind::Homogeneous { theta } => *theta,
            AngleKind::HomogeneousWithFirst { first, theta } => {
                if k == 1 {
                    *first
                } else {
                    *theta
                }
            }
            AngleKind::Prefixed { head, tail } => head.get(k - 1).copied().unwrap_or(*tail),
        })
    }

    /// theta_0..=theta_upto.
    pub fn thetas(&self, upto: usize) -> Result<Vec<f64>> {
        (0..=upto).map(|k| self.theta(k)).collect()
    }

    /// Largest Jacobi truncation the sequence can feed (needs theta_1..theta_2N).
    pub fn max_truncation(&self) -> Option<usize> {
        self.len().map(|n| n / 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn theta_zero_is_zero() {
        let a = AngleSequence::homogeneous(0.3).unwrap();
        assert_eq!(a.theta(0).unwrap(), 0.0);
        assert_eq!(a.theta(7).unwrap(), 0.3);
    }

    #[test]
    fn rejects_closed_endpoints() {
        assert_eq!(
            AngleSequence::explicit(vec![0.2, FRAC_PI_2]),
            Err(Error::Angle {
                index: 2,
                value: FRAC_PI_2
            })
        );
        assert!(AngleSequence::homogeneous(0.0).is_err());
        assert!(AngleSequence::prefixed(vec![0.1], -0.1).is_err());
    }

    #[test]
    fn periodic_and_prefixed_generators() {
        let p = AngleSequence::periodic(vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(p.theta(4).unwrap(), 0.1);
        assert_eq!(p.theta(6).unwrap(), 0.3);
        let q = AngleSequence::prefixed(vec![0.5, 0.6], 0.7).unwrap();
        assert_eq!(q.thetas(4).unwrap(), vec![0.0, 0.5, 0.6, 0.7, 0.7]);
        let w = AngleSequence::with_first(0.2, FRAC_PI_4).unwrap();
        assert_eq!(w.theta(1).unwrap(), 0.2);
        assert_eq!(w.theta(2).unwrap(), FRAC_PI_4);
    }

    #[test]
    fn explicit_out_of_range() {
        let e = AngleSequence::explicit(vec![0.4; 4]).unwrap();
        assert!(matches!(e.theta(5), Err(Error::Size(_))));
        assert_eq!(e.max_truncation(), Some(2));
    }

    #[test]
    fn coupling_matches_weight() {
        let t = 0.9;
        assert!((coupling_to_theta(coupling(t)) - t).abs() < 1e-15);
        assert!(((-2.0 * coupling(t)).exp() - theta_to_x(t)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn x_round_trip(theta in 1e-6f64..(FRAC_PI_2 - 1e-6)) {
            let back = x_to_theta(theta_to_x(theta));
            prop_assert!((back - theta).abs() <= 4.0 * f64::EPSILON * theta.max(1.0));
        }
    }
}
