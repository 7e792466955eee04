//! Canonical s-embedding of a periodic critical layered model.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layered::periodic::periodic_criticality;

/// Slopes `phi_0..phi_{2n-1}` from `tan(phi_{k+1}) = tan^2(theta_{k+1}) tan(phi_k)`
/// and `sum tan(phi) = sum cot(phi)`.
pub fn solve_slopes(block: &[f64]) -> Result<Vec<f64>> {
    let (product, critical) = periodic_criticality(block)?;
    if !critical {
        return Err(Error::Precondition(format!(
            "block is not critical (prod tan = {product}); slopes would not be periodic"
        )));
    }
    let ratios = slope_ratios(block);
    let sum_tan: f64 = ratios.iter().sum();
    let sum_cot: f64 = ratios.iter().map(|r| 1.0 / r).sum();
    let tan0 = (sum_cot / sum_tan).sqrt();
    Ok(ratios.iter().map(|r| (tan0 * r).atan()).collect())
}

/// `prod_{p=1}^k tan^2(theta_p)`, k = 0..2n-1
fn slope_ratios(block: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(block.len());
    let mut acc = 1.0;
    out.push(acc);
    for t in &block[..block.len() - 1] {
        acc *= t.tan().powi(2);
        out.push(acc);
    }
    out
}

/// `|sum tan(phi) - sum cot(phi)|`
pub fn balance_residual(phi: &[f64]) -> f64 {
    let t: f64 = phi.iter().map(|p| p.tan()).sum();
    let c: f64 = phi.iter().map(|p| 1.0 / p.tan()).sum();
    (t - c).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexKind {
    Bullet,
    Circ,
}

impl VertexKind {
    pub fn name(self) -> &'static str {
        match self {
            VertexKind::Bullet => "bullet",
            VertexKind::Circ => "circ",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub block: Vec<f64>,
    /// One period of slopes.
    pub phi: Vec<f64>,
    /// `t_bullet_0..t_bullet_K`
    pub t_bullet: Vec<f64>,
    /// `t_circ_0..t_circ_K`
    pub t_circ: Vec<f64>,
    pub period_width: f64,
}

impl Embedding {
    pub fn columns(&self) -> usize {
        self.t_bullet.len() - 1
    }

    pub fn phi_at(&self, k: usize) -> f64 {
        self.phi[k % self.phi.len()]
    }

    /// Kind of the vertex over column `k` in row `s`.
    pub fn kind(k: usize, s: i64) -> VertexKind {
        if (k as i64 + s).rem_euclid(2) == 1 {
            VertexKind::Bullet
        } else {
            VertexKind::Circ
        }
    }

    /// Planar position `(-t, s)` of the vertex over column `k` in row `s`.
    pub fn point(&self, k: usize, s: i64) -> (f64, f64) {
        let t = match Self::kind(k, s) {
            VertexKind::Bullet => self.t_bullet[k],
            VertexKind::Circ => self.t_circ[k],
        };
        (0.0 - t, s as f64)
    }

    /// Vertices of the quad between columns `k`, `k+1` and rows `s`, `s+1`,
    /// counterclockwise from `(k, s)`.
    pub fn quad(&self, k: usize, s: i64) -> [(f64, f64); 4] {
        [
            self.point(k, s),
            self.point(k + 1, s),
            self.point(k + 1, s + 1),
            self.point(k, s + 1),
        ]
    }

    /// Center of the circle tangent to all four sides of `quad(k, s)`; the
    /// horizontal sides are one unit apart so the radius is one half.
    pub fn incircle(&self, k: usize, s: i64) -> (f64, f64) {
        let [a, _, _, d] = self.quad(k, s);
        // points of the side a-d at height s + 1/2, shifted inward by the
        // half-unit normal distance
        let (dx, dy) = (d.0 - a.0, d.1 - a.1);
        let len = dx.hypot(dy);
        let x_mid = a.0 + 0.5 * dx / dy;
        (x_mid - 0.5 * len / dy, a.1 + 0.5)
    }

    /// `k, kind, x, phi` rows for `s = 0` and `s = 1`, header included.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,kind,x,phi\n");
        for k in 0..=self.columns() {
            for (kind, t) in [(VertexKind::Bullet, self.t_bullet[k]), (VertexKind::Circ, self.t_circ[k])] {
                let _ = writeln!(out, "{k},{},{:.16e},{:.16e}", kind.name(), 0.0 - t, self.phi_at(k));
            }
        }
        out
    }

    /// Quads and their incircles over `rows` rows.
    pub fn to_svg(&self, rows: usize) -> String {
        let scale = 40.0;
        let x_min = -self.t_bullet.last().unwrap().max(*self.t_circ.last().unwrap()) - 1.0;
        let x_max = self.t_bullet[0].min(self.t_circ[0]).min(0.0).abs() + 1.0;
        let width = (x_max - x_min) * scale;
        let height = (rows as f64 + 2.0) * scale;
        let map = |p: (f64, f64)| ((p.0 - x_min) * scale, height - (p.1 + 1.0) * scale);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:.2} {height:.2}" width="{width:.0}" height="{height:.0}">"#
        );
        for s in 0..rows as i64 {
            for k in 0..self.columns() {
                let pts: Vec<String> = self
                    .quad(k, s)
                    .iter()
                    .map(|&p| {
                        let (x, y) = map(p);
                        format!("{x:.3},{y:.3}")
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r##"<polygon points="{}" fill="none" stroke="#333" stroke-width="1"/>"##,
                    pts.join(" ")
                );
                let (cx, cy) = map(self.incircle(k, s));
                let _ = writeln!(
                    out,
                    r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="#c33" stroke-width="0.8"/>"##,
                    0.5 * scale
                );
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Coordinates over `columns` columns anchored at `t_circ_0 = 0`.
pub fn embed(block: &[f64], columns: usize) -> Result<Embedding> {
    embed_anchored(block, columns, 0.0)
}

pub fn embed_anchored(block: &[f64], columns: usize, anchor: f64) -> Result<Embedding> {
    if columns < block.len() {
        return Err(Error::Size(format!(
            "embedding needs at least one period of {} columns, got {columns}",
            block.len()
        )));
    }
    let phi = solve_slopes(block)?;
    let at = |k: usize| phi[k % phi.len()];
    let mut t_circ = vec![anchor];
    let mut t_bullet = vec![anchor - 1.0 / (2.0 * phi[0]).tan()];
    for k in 0..columns {
        let (a, b) = (at(k), at(k + 1));
        t_bullet.push(t_circ[k] + 0.5 * (a.tan() + b.tan()));
        t_circ.push(t_bullet[k] + 0.5 * (1.0 / a.tan() + 1.0 / b.tan()));
    }
    let len = block.len();
    let period_width = t_bullet[len] - t_bullet[0];
    Ok(Embedding {
        block: block.to_vec(),
        phi,
        t_bullet,
        t_circ,
        period_width,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodWidth {
    /// `t_bullet_{2n} - t_bullet_0`
    pub coordinate: f64,
    /// `(sum tan + sum cot) / 2`
    pub half_sum: f64,
    /// `(sum tan * sum cot)^{1/2}`
    pub geometric: f64,
}

impl PeriodWidth {
    pub fn spread(&self) -> f64 {
        let v = [self.coordinate, self.half_sum, self.geometric];
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    }
}

pub fn period_width(block: &[f64]) -> Result<PeriodWidth> {
    let e = embed(block, block.len())?;
    let t: f64 = e.phi.iter().map(|p| p.tan()).sum();
    let c: f64 = e.phi.iter().map(|p| 1.0 / p.tan()).sum();
    Ok(PeriodWidth {
        coordinate: e.period_width,
        half_sum: 0.5 * (t + c),
        geometric: (t * c).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered::periodic::cj_constant;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    /// Critical block with the last angle solved from `prod tan = 1`.
    fn close_block(free: &[f64]) -> Vec<f64> {
        let p: f64 = free.iter().map(|t| t.tan()).product();
        let mut b = free.to_vec();
        b.push((1.0 / p).atan());
        b
    }

    #[test]
    fn slope_examples() {
        let phi = solve_slopes(&[FRAC_PI_4, FRAC_PI_4]).unwrap();
        assert!(phi.iter().all(|p| (p - FRAC_PI_4).abs() < 1e-15));
        let phi = solve_slopes(&[FRAC_PI_6, FRAC_PI_3]).unwrap();
        assert!((phi[0] - FRAC_PI_3).abs() < 1e-14);
        assert!((phi[1] - FRAC_PI_6).abs() < 1e-14);
        assert!(matches!(solve_slopes(&[FRAC_PI_6, FRAC_PI_6]), Err(Error::Precondition(_))));
    }

    #[test]
    fn balance_is_sensitive() {
        let mut phi = solve_slopes(&[FRAC_PI_6, FRAC_PI_3]).unwrap();
        assert!(balance_residual(&phi) < 1e-12);
        let t0 = phi[0] + 1e-6;
        let ratio = phi[1].tan() / phi[0].tan();
        phi[0] = t0;
        phi[1] = (t0.tan() * ratio).atan();
        assert!(balance_residual(&phi) >= 1e-7);
    }

    #[test]
    fn homogeneous_spacing() {
        let e = embed(&[FRAC_PI_4, FRAC_PI_4], 10).unwrap();
        for k in 0..10 {
            assert!((e.t_bullet[k + 1] - e.t_circ[k] - 1.0).abs() < 1e-14);
            assert!((e.t_circ[k + 1] - e.t_bullet[k] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_angle_spacing() {
        let e = embed(&[FRAC_PI_6, FRAC_PI_3], 6).unwrap();
        let s = 2.0 / 3f64.sqrt();
        assert!((e.t_bullet[1] - e.t_circ[0] - s).abs() < 1e-14);
        assert!((e.t_circ[1] - e.t_bullet[0] - s).abs() < 1e-14);
    }

    #[test]
    fn width_examples() {
        let w = period_width(&[FRAC_PI_4, FRAC_PI_4]).unwrap();
        assert!((w.coordinate - 2.0).abs() < 1e-14 && w.spread() < 1e-14);
        let w = period_width(&[FRAC_PI_6, FRAC_PI_3]).unwrap();
        assert!((w.geometric - 4.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(w.spread() < 1e-12);
    }

    #[test]
    fn incircles_touch_both_slanted_sides() {
        let block = close_block(&[0.5, 1.1, 0.9]);
        let e = embed(&block, 12).unwrap();
        let dist = |p: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            ((p.0 - a.0) * dy - (p.1 - a.1) * dx).abs() / dx.hypot(dy)
        };
        for s in 0..3 {
            for k in 0..12 {
                let [a, b, c, d] = e.quad(k, s);
                let o = e.incircle(k, s);
                assert!((dist(o, a, d) - 0.5).abs() < 1e-12);
                assert!((dist(o, b, c) - 0.5).abs() < 1e-12, "k={k} s={s}");
                assert!(o.0 < a.0.max(d.0) && o.0 > b.0.min(c.0));
            }
        }
    }

    #[test]
    fn csv_and_svg() {
        let e = embed(&[FRAC_PI_6, FRAC_PI_3], 4).unwrap();
        let csv = e.to_csv();
        assert!(csv.starts_with("k,kind,x,phi\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 5);
        let svg = e.to_svg(3);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 12);
    }

    fn critical_block(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.15f64..1.4, 2 * n - 1).prop_filter_map("closing angle in range", |free| {
            let b = close_block(&free);
            let last = *b.last().unwrap();
            (last > 0.05 && last < 1.52).then_some(b)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn width_is_n_times_cj(block in prop_oneof![critical_block(1), critical_block(2), critical_block(3)]) {
            let w = period_width(&block).unwrap();
            let n = (block.len() / 2) as f64;
            let cj = cj_constant(&block).unwrap();
            prop_assert!(w.spread() <= 1e-12 * w.coordinate.max(1.0));
            prop_assert!((w.coordinate - n * cj).abs() <= 1e-12 * w.coordinate.max(1.0));
        }

        #[test]
        fn embedding_invariants(block in critical_block(2)) {
            let e = embed(&block, 40).unwrap();
            prop_assert!(balance_residual(&e.phi) <= 1e-12 * e.period_width);
            for k in 0..40 {
                prop_assert!(e.t_bullet[k + 1] > e.t_circ[k] && e.t_circ[k + 1] > e.t_bullet[k]);
                let (a, b) = (e.phi_at(k), e.phi_at(k + 1));
                prop_assert!((e.t_bullet[k + 1] - e.t_circ[k] - 0.5 * (a.tan() + b.tan())).abs() < 1e-12 * e.period_width);
                prop_assert!((e.t_circ[k + 1] - e.t_bullet[k] - 0.5 * (1.0 / a.tan() + 1.0 / b.tan())).abs() < 1e-12 * e.period_width);
                prop_assert!((e.t_circ[k] - e.t_bullet[k] - 1.0 / (2.0 * a).tan()).abs() < 1e-10 * e.period_width);
                let next = block[k % block.len()].tan().powi(2) * a.tan();
                prop_assert!((b.tan() / next - 1.0).abs() < 1e-12);
            }
            for k in 0..=40 - block.len() {
                prop_assert!((e.t_bullet[k + block.len()] - e.t_bullet[k] - e.period_width).abs() < 1e-11 * e.period_width);
            }
            let shifted = embed_anchored(&block, 40, 3.5).unwrap();
            for k in 0..=40 {
                prop_assert!((shifted.t_bullet[k] - e.t_bullet[k] - 3.5).abs() < 1e-12 * e.period_width.max(1.0) * 4.0);
            }
        }

        #[test]
        fn perturbed_blocks_are_rejected(block in critical_block(2), eps in 1e-6f64..1e-2) {
            let mut b = block.clone();
            b[0] += eps;
            prop_assert!(solve_slopes(&b).is_err());
        }
    }
}
