//! Magnetization of the zig-zag half-plane for arbitrary angle sequences,
//! and the spectral data of periodic critical sequences.

pub mod periodic;

pub use periodic::{
    cj_constant, ground_vector, ids_empirical, periodic_criticality, twisted_lowest_eigenvalue,
    CyclicJacobi, IdsFit, PeriodicSpectralData,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    build_d_even, build_jacobi, clamp_eigenvalue, leading_minors,
    polar_block, spectral_quadrature, sqrt_block, AngleSequence, LogDet,
};

/// Largest order accepted by the Hankel path.
pub const HANKEL_MAX_ORDER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `H_m[lambda^{1/2} nu] / (H_m[nu] H_m[lambda nu])^{1/2}`
    Hankel,
    /// `det P_m J^{1/2} P_m / prod cos(theta_k)`
    Sqrt,
    /// `|det P_m U P_m|`
    Polar,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Hankel, Method::Sqrt, Method::Polar];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hankel => "hankel",
            Method::Sqrt => "sqrt",
            Method::Polar => "polar",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hankel" => Ok(Method::Hankel),
            "sqrt" => Ok(Method::Sqrt),
            "polar" => Ok(Method::Polar),
            _ => Err(Error::Domain(format!("unknown method {s:?}"))),
        }
    }
}

/// Truncation policy for [`magnetization`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationOptions {
    /// Relative tolerance on successive truncations.
    pub tol: f64,
    /// First truncation; defaults to `max(64, 8 m)`.
    pub n_start: Option<usize>,
    /// Last truncation tried before giving up.
    pub n_max: usize,
    /// Evaluate at this truncation only, without a convergence study.
    pub truncation: Option<usize>,
}

impl Default for MagnetizationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            n_start: None,
            n_max: 1 << 14,
            truncation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationReport {
    pub m: usize,
    pub value: f64,
    pub method: Method,
    /// Largest truncation evaluated.
    pub truncation: usize,
    pub error_estimate: f64,
    /// Whether `value` is an Aitken extrapolation rather than a raw iterate.
    pub extrapolated: bool,
}

/// M_1..=M_{m_max} at one fixed truncation.
pub fn magnetization_at(
    angles: &AngleSequence,
    n: usize,
    m_max: usize,
    method: Method,
) -> Result<Vec<f64>> {
    if m_max == 0 {
        return Ok(Vec::new());
    }
    if m_max > n {
        return Err(Error::Size(format!(
            "M_{m_max} needs a truncation of size >= {m_max}, got {n}"
        )));
    }
    let logs: Vec<LogDet> = match method {
        Method::Sqrt => {
            let j = build_jacobi(angles, n)?;
            let minors = leading_minors(&sqrt_block(&j, m_max)?, m_max)?;
            let mut cos = LogDet::ONE;
            let th = angles.thetas(2 * m_max)?;
            minors
                .into_iter()
                .enumerate()
                .map(|(i, det)| {
                    let k = i + 1;
                    cos = cos
                        .mul(LogDet::from_value(th[2 * k - 1].cos() * th[2 * k].cos()));
                    det.div(cos)
                })
                .collect::<Result<_>>()?
        }
        Method::Polar => {
            let d = build_d_even(angles, n)?;
            leading_minors(&polar_block(&d, m_max)?, m_max)?
                .into_iter()
                .map(LogDet::abs)
                .collect()
        }
        Method::Hankel => {
            if m_max > HANKEL_MAX_ORDER {
                return Err(Error::Domain(format!(
                    "Hankel path is limited to m <= {HANKEL_MAX_ORDER}, got {m_max}"
                )));
            }
            if n < 2 * m_max {
                return Err(Error::Size(format!(
                    "Hankel path for M_{m_max} needs a truncation of size >= {}, got {n}",
                    2 * m_max
                )));
            }
            let j = build_jacobi(angles, n)?;
            let q = spectral_quadrature(&j)?;
            let root = |l: f64| clamp_eigenvalue(l).map(f64::sqrt).unwrap_or(f64::NAN);
            q.nodes().iter().try_for_each(|&l| clamp_eigenvalue(l).map(|_| ()))?;
            (1..=m_max)
                .map(|m| {
                    let num = q.gram_logdet(root, m)?;
                    let den = q
                        .gram_logdet(|_| 1.0, m)?
                        .mul(q.gram_logdet(|l| l, m)?)
                        .powf(0.5)?;
                    num.div(den)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(logs.iter().map(LogDet::value).collect())
}

struct Tracker {
    iterates: Vec<f64>,
    extrapolations: Vec<Option<f64>>,
    done: Option<(f64, f64, bool)>,
}

impl Tracker {
    fn new() -> Self {
        Self {
            iterates: Vec::new(),
            extrapolations: Vec::new(),
            done: None,
        }
    }

    fn push(&mut self, x: f64, tol: f64) {
        self.iterates.push(x);
        let k = self.iterates.len();
        if k < 2 {
            self.extrapolations.push(None);
            return;
        }
        let scale = x.abs().max(1e-4);
        let delta = x - self.iterates[k - 2];
        if delta.abs() <= tol * scale {
            self.extrapolations.push(None);
            self.done = Some((x, delta.abs(), false));
            return;
        }
        let mut e = None;
        if k >= 3 {
            let prev = self.iterates[k - 2] - self.iterates[k - 3];
            let rho = delta / prev;
            if rho > 0.0 && rho < 0.9 {
                e = Some(x + delta * rho / (1.0 - rho));
            }
        }
        if let (Some(ek), Some(Some(ep))) = (e, self.extrapolations.last()) {
            if (ek - ep).abs() <= tol * scale {
                self.done = Some((ek, (ek - ep).abs(), true));
            }
        }
        self.extrapolations.push(e);
    }
}

fn check_range(m: usize, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 + 1e-9 {
        Ok(())
    } else {
        Err(Error::Invariant(format!("M_{m} = {value} outside (0, 1]")))
    }
}

/// M_0..=M_{m_max} with one shared truncation schedule.
///
/// Explicit (finite) angle lists are evaluated at the largest truncation
/// they support and report a zero error estimate.
pub fn magnetization_profile(
    angles: &AngleSequence,
    m_max: usize,
    method: Method,
    opts: &MagnetizationOptions,
) -> Result<Vec<MagnetizationReport>> {
    let mut out = vec![MagnetizationReport {
        m: 0,
        value: 1.0,
        method,
        truncation: 0,
        error_estimate: 0.0,
        extrapolated: false,
    }];
    if m_max == 0 {
        return Ok(out);
    }
    if method == Method::Hankel && m_max > HANKEL_MAX_ORDER {
        return Err(Error::Domain(format!(
            "Hankel path is limited to m <= {HANKEL_MAX_ORDER}, got {m_max}"
        )));
    }
    if let Some(n) = opts.truncation.or_else(|| angles.max_truncation()) {
        let n = angles.max_truncation().map_or(n, |cap| n.min(cap));
        let values = magnetization_at(angles, n, m_max, method)?;
        for (i, v) in values.into_iter().enumerate() {
            check_range(i + 1, v)?;
            out.push(MagnetizationReport {
                m: i + 1,
                value: v,
                method,
                truncation: n,
                error_estimate: 0.0,
                extrapolated: false,
            });
        }
        return Ok(out);
    }

    let mut n = opts.n_start.unwrap_or(64.max(8 * m_max)).max(2 * m_max);
    let mut trackers: Vec<Tracker> = (0..m_max).map(|_| Tracker::new()).collect();
    let mut finished = vec![0usize; m_max];
    loop {
        let values = magnetization_at(angles, n, m_max, method)?;
        for (i, (t, v)) in trackers.iter_mut().zip(values).enumerate() {
            if t.done.is_none() {
                t.push(v, opts.tol);
                finished[i] = n;
            }
        }
        if trackers.iter().all(|t| t.done.is_some()) {
            break;
        }
        if 2 * n > opts.n_max {
            let t = trackers.iter().find(|t| t.done.is_none()).unwrap();
            let k = t.iterates.len();
            return Err(Error::Convergence {
                truncation: n,
                previous: if k >= 2 { t.iterates[k - 2] } else { f64::NAN },
                last: t.iterates[k - 1],
            });
        }
        n *= 2;
    }
    for (i, t) in trackers.into_iter().enumerate() {
        let (value, err, extrapolated) = t.done.unwrap();
        check_range(i + 1, value)?;
        out.push(MagnetizationReport {
            m: i + 1,
            value,
            method,
            truncation: finished[i],
            error_estimate: err,
            extrapolated,
        });
    }
    Ok(out)
}

/// Magnetization M_m of the (2m)-th column.
pub fn magnetization(
    angles: &AngleSequence,
    m: usize,
    method: Method,
    opts: &MagnetizationOptions,
) -> Result<MagnetizationReport> {
    Ok(magnetization_profile(angles, m, method, opts)?.pop().unwrap())
}

/// `max |(D^T psi)_i|` over rows away from the truncation edge, where
/// `psi_k = (-1)^k cot(theta)^{2k}` normalized in l2 is the kernel vector of
/// the homogeneous supercritical operator.
pub fn kernel_residual_homogeneous(theta: f64, n: usize) -> Result<f64> {
    if !(theta > std::f64::consts::FRAC_PI_4 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "kernel vector needs pi/4 < theta < pi/2, got {theta}"
        )));
    }
    if n < 2 {
        return Err(Error::Size("kernel residual needs N >= 2".into()));
    }
    let d = build_d_even(&AngleSequence::homogeneous(theta)?, n)?;
    let c2 = theta.tan().powi(-2);
    let mut psi: Vec<f64> = (1..=n)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * c2.powi(k as i32))
        .collect();
    let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|x| *x /= norm);
    let r = d.apply_transpose(&psi);
    Ok(r[..n - 1].iter().fold(0.0, |m, x| m.max(x.abs())))
}
