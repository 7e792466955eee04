//! Finite-strip magnetization on the rotated grid, by transfer matrix and by
//! exhaustive enumeration.
//!
//! Column `p` (0..=W) holds `H` spins; spin `j` of column `p` sits at height
//! `2j + (p mod 2)` and touches the spins at heights `y +- 1` of columns `p +- 1`.
//! Columns 0 and W and every site outside the height range are fixed to the
//! boundary sign. The bonds between columns `p-1` and `p` carry `beta J_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::angles::{coupling, AngleSequence};

pub const MAX_HEIGHT: usize = 14;
pub const MAX_ENUMERATED: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripSpec {
    pub width: usize,
    pub height: usize,
    /// `beta J_1 .. beta J_W`
    pub couplings: Vec<f64>,
    /// +1 or -1
    pub boundary: i8,
}

impl StripSpec {
    pub fn new(width: usize, height: usize, couplings: Vec<f64>) -> Result<Self> {
        if width < 2 || height == 0 {
            return Err(Error::Size(format!(
                "strip needs width >= 2 and height >= 1, got {width}x{height}"
            )));
        }
        if couplings.len() != width {
            return Err(Error::Shape(format!(
                "{} couplings for width {width}",
                couplings.len()
            )));
        }
        if let Some((i, &k)) = couplings
            .iter()
            .enumerate()
            .find(|(_, k)| !(k.is_finite() && **k > 0.0))
        {
            return Err(Error::Domain(format!("coupling {} = {k} is not finite positive", i + 1)));
        }
        Ok(Self {
            width,
            height,
            couplings,
            boundary: 1,
        })
    }

    pub fn from_angles(angles: &AngleSequence, width: usize, height: usize) -> Result<Self> {
        let couplings = (1..=width)
            .map(|p| angles.theta(p).map(coupling))
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, couplings)
    }

    pub fn flipped(&self) -> Self {
        Self {
            boundary: -self.boundary,
            ..self.clone()
        }
    }

    pub fn free_spins(&self) -> usize {
        (self.width - 1) * self.height
    }

    /// Row index closest to the vertical center in column `column`.
    pub fn mid_row(&self, column: usize) -> usize {
        if column % 2 == 0 {
            self.height / 2
        } else {
            (self.height - 1) / 2
        }
    }

    fn check_site(&self, column: usize, row: usize) -> Result<()> {
        if column == 0 || column >= self.width || row >= self.height {
            return Err(Error::Size(format!(
                "site ({column}, {row}) is not a free spin of a {}x{} strip",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// `<sigma>` at a free site by summing all configurations (Gray-code order).
pub fn enumerate_magnetization(spec: &StripSpec, column: usize, row: usize) -> Result<f64> {
    let n = spec.free_spins();
    if n > MAX_ENUMERATED {
        return Err(Error::Size(format!(
            "{n} free spins exceeds the enumeration limit {MAX_ENUMERATED}"
        )));
    }
    spec.check_site(column, row)?;
    let (h, w) = (spec.height, spec.width);
    let b = f64::from(spec.boundary);
    let index = |p: usize, j: usize| (p - 1) * h + j;
    let mut field = vec![0.0; n];
    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for p in 1..w {
        for j in 0..h {
            let y = 2 * j + p % 2;
            let i = index(p, j);
            for (q, k) in [(p - 1, spec.couplings[p - 1]), (p + 1, spec.couplings[p])] {
                for yy in [y as i64 - 1, y as i64 + 1] {
                    let jj = (yy - (q % 2) as i64) / 2;
                    let fixed = q == 0 || q == w || yy < 0 || jj >= h as i64;
                    if fixed {
                        field[i] += k * b;
                    } else {
                        neighbors[i].push((index(q, jj as usize), k));
                    }
                }
            }
        }
    }
    let site = index(column, row);
    let mut spins = vec![b; n];
    let mut energy: f64 = b * field.iter().sum::<f64>()
        + neighbors
            .iter()
            .flat_map(|nb| nb.iter().map(|&(_, k)| 0.5 * k))
            .sum::<f64>();
    let reference = energy.abs() + field.iter().map(|f| f.abs()).sum::<f64>();
    let (mut z, mut s) = (0.0, 0.0);
    let total: u64 = 1 << n;
    for step in 0..total {
        if step > 0 {
            let i = step.trailing_zeros() as usize;
            let local = field[i] + neighbors[i].iter().map(|&(t, k)| k * spins[t]).sum::<f64>();
            energy -= 2.0 * spins[i] * local;
            spins[i] = -spins[i];
        }
        let weight = (energy - reference).exp();
        z += weight;
        s += weight * spins[site];
    }
    Ok(s / z)
}

fn sign(state: usize, bit: usize) -> f64 {
    if state >> bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One column step: sums out the old column, spin by spin.
fn advance(vectors: &mut [Vec<f64>], k: f64, old_parity: usize, height: usize, b: f64) {
    let (e_plus, e_minus) = (k.exp(), (-k).exp());
    let order: Vec<usize> = if old_parity == 0 {
        (0..height).collect()
    } else {
        (0..height).rev().collect()
    };
    for v in vectors.iter_mut() {
        for &j in &order {
            // bond between old spin j and the already placed new neighbour
            let placed = if old_parity == 0 { j.checked_sub(1) } else { (j + 1 < height).then_some(j + 1) };
            for (state, x) in v.iter_mut().enumerate() {
                let other = placed.map_or(b, |t| sign(state, t));
                *x *= if sign(state, j) * other > 0.0 { e_plus } else { e_minus };
            }
            let mask = 1usize << j;
            for state in 0..v.len() {
                if state & mask == 0 {
                    let (up, down) = (v[state], v[state | mask]);
                    v[state] = e_plus * up + e_minus * down;
                    v[state | mask] = e_minus * up + e_plus * down;
                }
            }
        }
        // bond between the new edge spin and the fixed site beyond the old column
        let edge = if old_parity == 0 { height - 1 } else { 0 };
        for (state, x) in v.iter_mut().enumerate() {
            *x *= if sign(state, edge) * b > 0.0 { e_plus } else { e_minus };
        }
    }
}

/// `<sigma>` at a free site from the column-to-column transfer sweep.
pub fn transfer_matrix_magnetization(spec: &StripSpec, column: usize, row: usize) -> Result<f64> {
    if spec.height > MAX_HEIGHT {
        return Err(Error::Size(format!(
            "height {} exceeds the transfer-matrix limit {MAX_HEIGHT}",
            spec.height
        )));
    }
    spec.check_site(column, row)?;
    let h = spec.height;
    let b = f64::from(spec.boundary);
    let fixed = if spec.boundary > 0 { 0 } else { (1 << h) - 1 };
    let mut vectors = vec![vec![0.0; 1 << h]; 2];
    vectors[0][fixed] = 1.0;
    vectors[1][fixed] = 1.0;
    for p in 1..=spec.width {
        advance(&mut vectors, spec.couplings[p - 1], (p - 1) % 2, h, b);
        if p == column {
            for (state, x) in vectors[1].iter_mut().enumerate() {
                *x *= sign(state, row);
            }
        }
        let scale = vectors[0].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for v in vectors.iter_mut() {
            v.iter_mut().for_each(|x| *x /= scale);
        }
    }
    Ok(vectors[1][fixed] / vectors[0][fixed])
}

/// Magnetization of the middle spin of column `2m`.
pub fn strip_magnetization(spec: &StripSpec, m: usize) -> Result<f64> {
    if m == 0 {
        return Ok(f64::from(spec.boundary));
    }
    transfer_matrix_magnetization(spec, 2 * m, spec.mid_row(2 * m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub height: usize,
    pub width: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub m: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Aitken limit of the last three heights at the largest width.
    pub extrapolated: Option<f64>,
}

/// Strip values of `M_m` over every `(height, width)` pair.
pub fn convergence_table(
    angles: &AngleSequence,
    m: usize,
    heights: &[usize],
    widths: &[usize],
) -> Result<ConvergenceTable> {
    let mut rows = Vec::new();
    for &w in widths {
        for &h in heights {
            let spec = StripSpec::from_angles(angles, w, h)?;
            rows.push(ConvergenceRow {
                height: h,
                width: w,
                value: strip_magnetization(&spec, m)?,
            });
        }
    }
    let w_max = widths.iter().copied().max();
    let last: Vec<f64> = rows
        .iter()
        .filter(|r| Some(r.width) == w_max)
        .map(|r| r.value)
        .collect();
    let extrapolated = (last.len() >= 3).then(|| {
        let [a, b, c] = [last[last.len() - 3], last[last.len() - 2], last[last.len() - 1]];
        let denom = (c - b) - (b - a);
        if denom.abs() > 1e-300 && ((c - b) / (b - a)).abs() < 1.0 {
            c - (c - b) * (c - b) / denom
        } else {
            c
        }
    });
    Ok(ConvergenceTable { m, rows, extrapolated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered::{magnetization, MagnetizationOptions, Method};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_6;

    fn uniform(width: usize, height: usize, k: f64) -> StripSpec {
        StripSpec::new(width, height, vec![k; width]).unwrap()
    }

    #[test]
    fn single_spin() {
        let spec = StripSpec::new(2, 1, vec![0.3, 0.45]).unwrap();
        let exact = (2.0 * 0.3 + 2.0f64 * 0.45).tanh();
        assert!((enumerate_magnetization(&spec, 1, 0).unwrap() - exact).abs() < 1e-15);
        assert!((transfer_matrix_magnetization(&spec, 1, 0).unwrap() - exact).abs() < 1e-15);
    }

    #[test]
    fn strong_coupling_orders() {
        let spec = uniform(4, 3, 8.0);
        assert!(1.0 - enumerate_magnetization(&spec, 2, 1).unwrap() < 1e-12);
    }

    #[test]
    fn boundary_site_in_row_zero() {
        // column 2, row 0 touches two fixed sites below the strip
        let spec = uniform(4, 2, 0.4);
        let e = enumerate_magnetization(&spec, 2, 0).unwrap();
        let t = transfer_matrix_magnetization(&spec, 2, 0).unwrap();
        assert!((e - t).abs() < 1e-13);
    }

    #[test]
    fn limits_and_errors() {
        assert!(matches!(enumerate_magnetization(&uniform(6, 5, 0.5), 2, 2), Err(Error::Size(_))));
        assert!(matches!(transfer_matrix_magnetization(&uniform(4, 15, 0.5), 2, 2), Err(Error::Size(_))));
        assert!(matches!(transfer_matrix_magnetization(&uniform(4, 3, 0.5), 4, 0), Err(Error::Size(_))));
        assert!(StripSpec::new(3, 2, vec![0.1, f64::INFINITY, 0.2]).is_err());
        assert!(StripSpec::new(3, 2, vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn subcritical_strip_matches_layered() {
        let angles = AngleSequence::homogeneous(FRAC_PI_6).unwrap();
        let heights = [6, 8, 10, 12];
        let table = convergence_table(&angles, 1, &heights, &[20]).unwrap();
        let opts = MagnetizationOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let layered = magnetization(&angles, 1, Method::Sqrt, &opts).unwrap().value;
        let gaps: Vec<f64> = table.rows.iter().map(|r| (r.value - layered).abs()).collect();
        assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
        assert!(gaps[3] < 1e-2, "{gaps:?}");
        assert!(table.rows.iter().all(|r| r.value > layered));
    }

    #[test]
    fn width_insensitive_subcritical() {
        let angles = AngleSequence::homogeneous(FRAC_PI_6).unwrap();
        let a = strip_magnetization(&StripSpec::from_angles(&angles, 20, 8).unwrap(), 1).unwrap();
        let b = strip_magnetization(&StripSpec::from_angles(&angles, 40, 8).unwrap(), 1).unwrap();
        assert!((a - b).abs() < 1e-6, "{}", (a - b).abs());
    }

    fn small_spec() -> impl Strategy<Value = StripSpec> {
        (2usize..=5, 1usize..=3)
            .prop_filter("enumerable", |(w, h)| (w - 1) * h <= 12)
            .prop_flat_map(|(w, h)| {
                prop::collection::vec(0.1f64..1.5, w)
                    .prop_map(move |t| StripSpec::new(w, h, t.into_iter().map(coupling).collect()).unwrap())
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn transfer_equals_enumeration(spec in small_spec(), c in 0usize..8, r in 0usize..8) {
            let column = 1 + c % (spec.width - 1);
            let row = r % spec.height;
            let e = enumerate_magnetization(&spec, column, row).unwrap();
            let t = transfer_matrix_magnetization(&spec, column, row).unwrap();
            prop_assert!((e - t).abs() <= 1e-12, "{e} vs {t}");
        }

        #[test]
        fn spin_flip_negates(spec in small_spec(), c in 0usize..8, r in 0usize..8) {
            let column = 1 + c % (spec.width - 1);
            let row = r % spec.height;
            let flipped = spec.flipped();
            let a = transfer_matrix_magnetization(&spec, column, row).unwrap();
            prop_assert_eq!(transfer_matrix_magnetization(&flipped, column, row).unwrap(), -a);
            let e = enumerate_magnetization(&spec, column, row).unwrap();
            prop_assert_eq!(enumerate_magnetization(&flipped, column, row).unwrap(), -e);
        }
    }
}
