use serde_json::json;

use zigzag_ising::critical::{c_sigma, critical_correlations, mccoy_wu_ratio, quadratic_chain};
use zigzag_ising::exact::{wu_diagonals, zigzag_magnetization_exact};
use zigzag_ising::homogeneous::{
    energy_density, koy_magnetization, subcritical_product, szego_g, szego_product, CircleWeight,
};
use zigzag_ising::layered::{
    cj_constant, ids_empirical, magnetization_profile, twisted_lowest_eigenvalue,
    MagnetizationOptions, MagnetizationReport, Method, HANKEL_MAX_ORDER,
};
use zigzag_ising::oracle::{convergence_table, strip_magnetization, StripSpec};
use zigzag_ising::sembedding::{balance_residual, embed, period_width, VertexKind};
use zigzag_ising::spectral::AngleSequence;
use zigzag_ising::wetting::{
    critical_field, free_boundary_limit, layered_reference, variant_value, wetting_coefficients,
    wetting_magnetization, Variant, MAX_ORDER,
};
use zigzag_ising::{Error, Result};

use crate::args::*;
use crate::output::{Cell, Report};

/// Order-preserving map over at most `threads` worker threads.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| scope.spawn(|| c.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

pub fn execute(command: &Command, threads: usize) -> Result<Report> {
    match command {
        Command::Magnetization(a) => magnetization(a, threads),
        Command::Homogeneous(a) => homogeneous(a),
        Command::CriticalChain(a) => critical_chain(a),
        Command::ExactCritical(a) => exact_critical(a),
        Command::Wetting(a) => wetting(a),
        Command::Ids(a) => ids(a),
        Command::Sembedding(a) => sembedding(a),
        Command::Oracle(a) => oracle(a, threads),
        Command::Crosscheck(a) => crosscheck(a, threads),
    }
}

fn options(tol: f64, truncation: Option<usize>, n_max: usize) -> Result<MagnetizationOptions> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance {tol} outside (0, 1)")));
    }
    Ok(MagnetizationOptions {
        tol,
        truncation,
        n_max,
        ..MagnetizationOptions::default()
    })
}

fn describe_angles(report: &mut Report, angles: &AngleSequence) {
    report.input("angles", serde_json::to_value(angles.kind()).expect("angles serialize"));
}

fn truncation_entry(method: Method, r: &MagnetizationReport) -> serde_json::Value {
    json!({
        "method": method.name(),
        "m": r.m,
        "truncation": r.truncation,
        "error_estimate": r.error_estimate,
        "extrapolated": r.extrapolated,
    })
}

fn magnetization(a: &MagnetizationArgs, threads: usize) -> Result<Report> {
    let angles = a.angles.sequence()?;
    let opts = options(a.tol, a.truncation, a.n_max)?;
    let methods: Vec<Method> = match a.method {
        MethodChoice::Hankel => vec![Method::Hankel],
        MethodChoice::Sqrt => vec![Method::Sqrt],
        MethodChoice::Polar => vec![Method::Polar],
        MethodChoice::All if a.m_max <= HANKEL_MAX_ORDER => Method::ALL.to_vec(),
        MethodChoice::All => vec![Method::Sqrt, Method::Polar],
    };
    let profiles = parallel_map(&methods, threads, |&m| magnetization_profile(&angles, a.m_max, m, &opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut report = if methods.len() == 1 {
        Report::new(&["m", "M_m", "error_estimate", "truncation"])
    } else {
        Report::new(&["m", "M_m", "hankel", "sqrt", "polar", "spread"])
    };
    describe_angles(&mut report, &angles);
    report.input("m_max", a.m_max);
    report.tolerance("convergence", a.tol);
    for (method, profile) in methods.iter().zip(&profiles) {
        for r in profile.iter().skip(1) {
            report.truncations.push(truncation_entry(*method, r));
        }
    }
    if methods.len() == 1 {
        for r in &profiles[0] {
            report.row(vec![r.m.into(), r.value.into(), r.error_estimate.into(), r.truncation.into()]);
        }
        report.diagnostic("method", methods[0].name());
        return Ok(report);
    }
    let value = |method: Method, m: usize| -> f64 {
        methods
            .iter()
            .position(|&x| x == method)
            .map_or(f64::NAN, |i| profiles[i][m].value)
    };
    let bound = 10.0 * a.tol;
    let mut max_spread = 0.0f64;
    for m in 0..=a.m_max {
        let vals: Vec<f64> = methods.iter().map(|&x| value(x, m)).collect();
        let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
        let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
        let spread = hi - lo;
        max_spread = max_spread.max(spread);
        report.row(vec![
            m.into(),
            value(Method::Sqrt, m).into(),
            value(Method::Hankel, m).into(),
            value(Method::Sqrt, m).into(),
            value(Method::Polar, m).into(),
            spread.into(),
        ]);
    }
    report.tolerance("method_agreement", bound);
    report.diagnostic("max_spread", max_spread);
    report.diagnostic("methods", methods.iter().map(|m| m.name()).collect::<Vec<_>>());
    if max_spread > bound {
        report.failure = Some(format!("methods disagree by {max_spread:e} > {bound:e}"));
    }
    Ok(report)
}

fn homogeneous(a: &HomogeneousArgs) -> Result<Report> {
    let (h, v) = (a.theta_h, a.theta_v.unwrap_or(a.theta_h));
    let products = subcritical_product(h, v, a.m_max)?;
    let mut report = Report::new(&["m", "product"]);
    report.input("theta_h", h);
    report.input("theta_v", v);
    report.input("m_max", a.m_max);
    for (m, &p) in products.values.iter().enumerate() {
        report.row(vec![m.into(), p.into()]);
    }
    let koy = koy_magnetization(h, v)?;
    let target = koy.powi(4);
    let szego = szego_product(h, v, a.m_max)?;
    let szego_limit = (szego_g(h, v)? / CircleWeight::new(h, v, false)?.scale()).powi(2);
    report.diagnostic("product_limit", products.limit);
    report.diagnostic("product_target", target);
    report.diagnostic("product_gap", (products.limit - target).abs());
    report.diagnostic("koy_magnetization", koy);
    report.diagnostic("szego_product", szego);
    report.diagnostic("szego_limit", szego_limit);
    report.diagnostic("szego_gap", (szego - szego_limit).abs());
    report.diagnostic("energy_density", energy_density(h, v)?);
    Ok(report)
}

fn critical_chain(a: &CriticalChainArgs) -> Result<Report> {
    let chain = critical_correlations(a.theta, a.n_max)?;
    let quad = quadratic_chain(a.theta, a.n_max)?;
    let mut report = Report::new(&["n", "D_n", "L_n", "A_n", "B_n", "D_n_quadratic"]);
    report.input("theta", a.theta);
    report.input("n_max", a.n_max);
    for n in 0..=a.n_max {
        report.row(vec![
            n.into(),
            chain.d[n].into(),
            chain.l[n].into(),
            chain.a[n].into(),
            chain.b[n].into(),
            quad.chain.d.get(n).copied().unwrap_or(f64::NAN).into(),
        ]);
    }
    report.diagnostic("c_sigma", c_sigma());
    report.diagnostic("quadratic_form_gap", quad.form_gap());
    report.diagnostic("quadratic_max_deviation", quad.max_deviation(&chain));
    if a.n_max >= 10 {
        report.diagnostic("mccoy_wu_ratio", mccoy_wu_ratio(&chain, a.n_max));
    }
    Ok(report)
}

fn exact_critical(a: &ExactCriticalArgs) -> Result<Report> {
    let d = wu_diagonals(a.n_max);
    let mut report = Report::new(&["n", "D_n", "M_n"]);
    report.input("n_max", a.n_max);
    let mut worst = 0.0f64;
    for (n, &dn) in d.iter().enumerate() {
        let m = zigzag_magnetization_exact(n)?;
        worst = worst.max((m.direct - m.ratio).abs() / m.direct);
        report.row(vec![n.into(), dn.into(), m.direct.into()]);
    }
    report.diagnostic("ratio_identity_max_rel", worst);
    Ok(report)
}

fn wetting(a: &WettingArgs) -> Result<Report> {
    let model = a.model.model()?;
    if a.m_max == 0 || a.m_max > MAX_ORDER {
        return Err(Error::Domain(format!("--m-max must lie in 1..={MAX_ORDER}")));
    }
    let mut report = Report::new(&["m", "M_m", "statement", "proof_display", "reference", "deviation", "variant"]);
    report.input("q", model.q);
    report.input("r", model.r);
    report.input("theta", model.theta);
    report.input("theta_1", model.theta_1);
    report.tolerance("certify", zigzag_ising::wetting::CERTIFY_TOL);
    for m in 1..=a.m_max {
        let w = wetting_magnetization(&model, m)?;
        report.row(vec![
            m.into(),
            w.value.into(),
            w.statement.into(),
            w.proof_display.into(),
            w.reference.into(),
            w.deviation.into(),
            w.variant.name().into(),
        ]);
    }
    report.diagnostic("bound_state", model.has_bound_state());
    report.diagnostic("zeta0", model.zeta0());
    report.diagnostic("c", model.c());
    report.diagnostic("bound_eigenvalue", model.bound_eigenvalue());
    report.diagnostic("free_boundary_limit", free_boundary_limit(model.q));
    report.diagnostic("critical_field", serde_json::to_value(critical_field(model.q)?).expect("serializes"));
    Ok(report)
}

fn ids(a: &IdsArgs) -> Result<Report> {
    let block = a.block.angles()?;
    let n = (block.len() / 2).max(1);
    let periods = a.periods.unwrap_or(1024usize.div_ceil(n));
    let fit = ids_empirical(&block, periods, a.lambda_max, a.points)?;
    let mut report = Report::new(&["lambda", "ids", "edge_law"]);
    report.input("block", block.clone());
    report.input("periods", periods);
    report.input("lambda_max", a.lambda_max);
    report.input("points", a.points);
    for (&l, &y) in fit.lambda.iter().zip(&fit.ids) {
        report.row(vec![l.into(), y.into(), (fit.cj * l.sqrt() / std::f64::consts::PI).into()]);
    }
    let twisted = twisted_lowest_eigenvalue(&block, a.twist)?;
    let target = (n as f64 * fit.cj).powi(-2);
    report.diagnostic("size", fit.size);
    report.diagnostic("cj", fit.cj);
    report.diagnostic("slope", fit.slope);
    report.diagnostic("slope_rel_error", fit.slope / fit.cj - 1.0);
    report.diagnostic("twist", a.twist);
    report.diagnostic("twisted_ratio", twisted / (a.twist * a.twist));
    report.diagnostic("twisted_target", target);
    report.diagnostic("twisted_rel_error", twisted / (a.twist * a.twist) / target - 1.0);
    Ok(report)
}

fn sembedding(a: &SembeddingArgs) -> Result<Report> {
    let block = a.block.angles()?;
    let columns = a.columns.unwrap_or(4 * block.len());
    let e = embed(&block, columns)?;
    let width = period_width(&block)?;
    let mut report = Report::new(&["k", "kind", "x", "phi"]);
    report.input("block", block.clone());
    report.input("columns", columns);
    for k in 0..=columns {
        for (kind, t) in [(VertexKind::Bullet, e.t_bullet[k]), (VertexKind::Circ, e.t_circ[k])] {
            report.row(vec![k.into(), kind.name().into(), (0.0 - t).into(), e.phi_at(k).into()]);
        }
    }
    let n = block.len() / 2;
    report.diagnostic("phi", e.phi.clone());
    report.diagnostic("balance_residual", balance_residual(&e.phi));
    report.diagnostic("period_width", serde_json::to_value(width).expect("serializes"));
    report.diagnostic("n_cj", n as f64 * cj_constant(&block)?);
    report.svg = Some(e.to_svg(a.rows));
    Ok(report)
}

fn oracle(a: &OracleArgs, threads: usize) -> Result<Report> {
    let angles = a.angles.sequence()?;
    let pairs: Vec<(usize, usize)> = a
        .widths
        .iter()
        .flat_map(|&w| a.heights.iter().map(move |&h| (h, w)))
        .collect();
    let values = parallel_map(&pairs, threads, |&(h, w)| {
        StripSpec::from_angles(&angles, w, h).and_then(|s| strip_magnetization(&s, a.m))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let extrapolated = convergence_table(&angles, a.m, &a.heights[a.heights.len().saturating_sub(3)..], &[*a.widths.iter().max().unwrap_or(&0)])?
        .extrapolated;
    let layered = if a.compare {
        let opts = options(1e-10, None, 1 << 14)?;
        Some(magnetization_profile(&angles, a.m, Method::Sqrt, &opts)?[a.m].value)
    } else {
        None
    };
    let mut report = Report::new(&["height", "width", "value", "gap"]);
    describe_angles(&mut report, &angles);
    report.input("m", a.m);
    for (&(h, w), &v) in pairs.iter().zip(&values) {
        let gap = layered.map_or(f64::NAN, |l| v - l);
        report.row(vec![h.into(), w.into(), v.into(), gap.into()]);
    }
    report.diagnostic("extrapolated", extrapolated);
    report.diagnostic("layered", layered);
    Ok(report)
}

fn crosscheck(a: &CrosscheckArgs, threads: usize) -> Result<Report> {
    let mut report = Report::new(&["m", "path", "reference", "value", "deviation", "bound", "pass"]);
    report.input("suite", serde_json::to_value(a.suite).expect("serializes"));
    report.input("m_max", a.m_max);
    let opts = options(a.tol, None, 1 << 14)?;
    let push = |report: &mut Report, m: usize, path: &str, reference: f64, value: f64, bound: f64| {
        let dev = (value - reference).abs();
        report.row(vec![m.into(), path.into(), reference.into(), value.into(), dev.into(), bound.into(), (dev <= bound).into()]);
    };
    match a.suite {
        Suite::Exact => {
            let angles = AngleSequence::homogeneous(std::f64::consts::FRAC_PI_4)?;
            let profile = magnetization_profile(&angles, a.m_max, Method::Sqrt, &opts)?;
            for r in profile.iter().skip(1) {
                let exact = zigzag_magnetization_exact(r.m)?.direct;
                push(&mut report, r.m, "sqrt-vs-factorial", exact, r.value, 1e-4);
            }
        }
        Suite::Methods => {
            let angles = require_angles(&a.angles)?;
            describe_angles(&mut report, &angles);
            let methods: Vec<Method> = if a.m_max <= HANKEL_MAX_ORDER {
                Method::ALL.to_vec()
            } else {
                vec![Method::Sqrt, Method::Polar]
            };
            let profiles = parallel_map(&methods, threads, |&m| magnetization_profile(&angles, a.m_max, m, &opts))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let sqrt = methods.iter().position(|&m| m == Method::Sqrt).unwrap();
            for m in 1..=a.m_max {
                for (i, method) in methods.iter().enumerate() {
                    if i != sqrt {
                        let path = format!("{}-vs-sqrt", method.name());
                        push(&mut report, m, &path, profiles[sqrt][m].value, profiles[i][m].value, 10.0 * a.tol);
                    }
                }
            }
        }
        Suite::Wetting => {
            let model = a.model.model()?;
            report.input("q", model.q);
            report.input("r", model.r);
            if a.m_max == 0 || a.m_max > MAX_ORDER {
                return Err(Error::Domain(format!("--m-max must lie in 1..={MAX_ORDER}")));
            }
            let bank = wetting_coefficients(&model, 2 * a.m_max)?;
            for m in 1..=a.m_max {
                let reference = layered_reference(&model, m)?;
                let value = variant_value(&model, &bank, m, Variant::Statement)?;
                push(&mut report, m, "determinant-vs-layered", reference, value, zigzag_ising::wetting::CERTIFY_TOL);
            }
        }
        Suite::Oracle => {
            let angles = require_angles(&a.angles)?;
            describe_angles(&mut report, &angles);
            report.input("height", a.height);
            report.input("width", a.width);
            let profile = magnetization_profile(&angles, a.m_max, Method::Sqrt, &opts)?;
            let ms: Vec<usize> = (1..=a.m_max).collect();
            let strips = parallel_map(&ms, threads, |&m| {
                StripSpec::from_angles(&angles, a.width, a.height).and_then(|s| strip_magnetization(&s, m))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            for (&m, &v) in ms.iter().zip(&strips) {
                push(&mut report, m, "strip-vs-layered", profile[m].value, v, 1e-2);
            }
        }
        Suite::Geometry => {
            let block = a.block.angles()?;
            report.input("block", block.clone());
            let w = period_width(&block)?;
            let n_cj = (block.len() / 2) as f64 * cj_constant(&block)?;
            for (path, value) in [("coordinate", w.coordinate), ("half-sum", w.half_sum), ("geometric", w.geometric)] {
                push(&mut report, block.len() / 2, path, n_cj, value, 1e-12 * n_cj.max(1.0));
            }
        }
    }
    let failed = report
        .rows
        .iter()
        .filter(|r| r.last() == Some(&Cell::from(false)))
        .count();
    report.diagnostic("checks", report.rows.len());
    report.diagnostic("failed", failed);
    if failed > 0 {
        report.failure = Some(format!("{failed} of {} checks outside their bound", report.rows.len()));
    }
    Ok(report)
}

fn require_angles(angles: &AngleArgs) -> Result<AngleSequence> {
    if !angles.is_set() {
        return Err(Error::Domain("this suite needs an angle source".into()));
    }
    angles.sequence()
}
