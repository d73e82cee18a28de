//! One function per subcommand; each returns a finished report.

use anyhow::{bail, Context};
use rug::{Float, Rational};
use serde_json::json;

use mislab::asymptotics::{alt_expansion, charlier_correction, mu_leading, z_mean_asymptotic, AltCentre, C_PRINTED};
use mislab::exact::{
    j_direct_table, jbar_recurrence, mu_closed_form_exact_table, mu_closed_form_real, mu_positive_form_exact, mu_positive_form_real, mu_recurrence,
    nu_factorial_integers, nu_recurrence, zeta_moments, zeta_ode_residuals, MomentTable, PoissonGf, TableSpec,
};
use mislab::model::agreement_bits;
use mislab::search::CostKind;
use mislab::stats::{
    calibrate_ks, exact_moment_trend, normality_report, run_campaign, run_campaign_samples, z_limit_report, CampaignSpec, SimulationSummary,
};
use mislab::{required_precision, Mode, ModelParams, NumericContext, Scalar};

use crate::config::RunConfig;
use crate::report::Report;
use crate::Command;

const DIGITS: usize = 20;

fn fmt_float(v: &Float) -> String {
    v.to_string_radix(10, Some(DIGITS))
}

fn show<S: Scalar>(v: &S, prec: u32) -> String {
    match S::MODE {
        Mode::Exact => v.encode(),
        Mode::Real => fmt_float(&v.to_float(prec)),
    }
}

fn ratio(a: &Float, b: &Float) -> String {
    fmt_float(&Float::with_val(a.prec(), a / b))
}

fn rel_err(est: &Float, exact: &Float) -> Float {
    (Float::with_val(est.prec(), est / exact) - 1u32).abs()
}

/// Moment table from the cache directory when one is configured, built in
/// memory otherwise.
fn table<S: Scalar>(cfg: &RunConfig, params: &ModelParams, max_n: usize, m_max: usize, ctx: &NumericContext) -> anyhow::Result<MomentTable<S>> {
    let spec = TableSpec { max_n: max_n.max(1), m_max: m_max.max(2), mode: S::MODE, precision_bits: ctx.precision_bits() };
    match &cfg.cache_dir {
        Some(dir) => {
            let (t, hit) = MomentTable::load_or_build(dir, params, spec, ctx)?;
            let name = MomentTable::<S>::cache_file_name(params, &spec);
            eprintln!("mislab: {} {name}", if hit { "cache hit" } else { "cached" });
            Ok(t)
        }
        None => Ok(MomentTable::build(params, spec, ctx)?),
    }
}

/// `mu_0..=mu_max_n`; only goes through the full table when it will be cached.
fn mu_values<S: Scalar>(cfg: &RunConfig, params: &ModelParams, max_n: usize, ctx: &NumericContext) -> anyhow::Result<Vec<S>> {
    if cfg.cache_dir.is_some() {
        Ok(table::<S>(cfg, params, max_n, 2, ctx)?.mu)
    } else {
        Ok(mu_recurrence::<S>(max_n, params, ctx))
    }
}

fn top(grid: &[usize]) -> usize {
    *grid.last().expect("grids are non-empty")
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> anyhow::Result<Report> {
    let ctx = cfg.ctx()?;
    let mode = cfg.mode()?;
    let params = cfg.params()?;
    cfg.check_replicates()?;
    macro_rules! by_mode {
        ($f:ident($($a:expr),*)) => {
            match mode {
                Mode::Exact => $f::<Rational>($($a),*),
                Mode::Real => $f::<Float>($($a),*),
            }
        };
    }
    match cmd {
        Command::ExactMean => by_mode!(exact_mean(cfg, &params, &ctx)),
        Command::ClosedForms => closed_forms(cfg, mode, &params, &ctx),
        Command::Jn => jn(cfg, mode, &params, &ctx),
        Command::Moments => by_mode!(moments(cfg, &params, &ctx)),
        Command::Nu => nu(cfg, mode, &ctx),
        Command::Zeta => Ok(zeta(cfg)),
        Command::Asymptotic => asymptotic(cfg, &params, &ctx),
        Command::Charlier { terms } => charlier(cfg, *terms, &params, &ctx),
        Command::AltExpansion { centre } => {
            let centre = if centre == "n+1" { AltCentre::NPlusOne } else { AltCentre::N };
            alt(cfg, centre, &params, &ctx)
        }
        Command::Simulate { kind } => simulate(cfg, kind.parse()?, &params),
        Command::Normality { ks_threshold, calibration_trials } => normality(cfg, *ks_threshold, *calibration_trials, &params, &ctx),
        Command::ZLimit => z_limit(cfg, &params, &ctx),
        Command::Compare => compare(cfg, &params, &ctx),
        Command::Cache => {
            if cfg.cache_dir.is_none() {
                bail!("cache needs --cache-dir or MISLAB_CACHE_DIR");
            }
            by_mode!(cache(cfg, &params, &ctx))
        }
    }
}

fn exact_mean<S: Scalar>(cfg: &RunConfig, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let mu = mu_values::<S>(cfg, params, top(&grid), ctx)?;
    let mut r = Report::new(["n", "mu"]);
    for &n in &grid {
        r.row(vec![n.to_string(), show(&mu[n], ctx.precision_bits())]);
    }
    Ok(r)
}

fn closed_forms(cfg: &RunConfig, mode: Mode, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let max_n = top(&grid);
    let mut r;
    match mode {
        Mode::Exact => {
            r = Report::new(["n", "recurrence", "closed_form", "positive_form", "agree"]);
            let rec = mu_recurrence::<Rational>(max_n, params, ctx);
            let closed = mu_closed_form_exact_table(max_n, params);
            let mut all = true;
            for &n in &grid {
                let pos = mu_positive_form_exact(n, params);
                let agree = rec[n] == closed[n] && rec[n] == pos;
                all &= agree;
                r.row(vec![n.to_string(), rec[n].to_string(), closed[n].to_string(), pos.to_string(), agree.to_string()]);
            }
            r.check("exact forms agree", all);
        }
        Mode::Real => {
            r = Report::new(["n", "recurrence", "closed_form", "positive_form", "closed_bits", "positive_bits"]);
            let prec = ctx.precision_bits();
            let wide = NumericContext::new(prec.max(required_precision(max_n as f64)))?;
            let rec = mu_recurrence::<Float>(max_n, params, ctx);
            let mut worst = f64::INFINITY;
            for &n in &grid {
                let closed = Float::with_val(prec, mu_closed_form_real(n, params, &wide)?);
                let pos = mu_positive_form_real(n, params, ctx);
                let (bc, bp) = (agreement_bits(&closed, &rec[n]), agreement_bits(&pos, &rec[n]));
                worst = worst.min(bc).min(bp);
                r.row(vec![n.to_string(), fmt_float(&rec[n]), fmt_float(&closed), fmt_float(&pos), format!("{bc:.1}"), format!("{bp:.1}")]);
            }
            r.note(format!("closed form evaluated at {} bits", wide.precision_bits()));
            r.check(format!("forms agree to {} bits", prec / 2), worst >= (prec / 2) as f64);
        }
    }
    Ok(r)
}

fn jn(cfg: &RunConfig, mode: Mode, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let max_n = top(&grid);
    let mut r = Report::new(["n", "J", "Jbar", "agree"]);
    match mode {
        Mode::Exact => {
            let j = j_direct_table::<Rational>(max_n, params, ctx);
            let jbar = jbar_recurrence::<Rational>(max_n, params, ctx);
            let mut all = true;
            for &n in &grid {
                let agree = Rational::from(&j[n] + 1u32) == jbar[n];
                all &= agree;
                r.row(vec![n.to_string(), j[n].to_string(), jbar[n].to_string(), agree.to_string()]);
            }
            r.check("J + 1 = Jbar", all);
        }
        Mode::Real => {
            let j = j_direct_table::<Float>(max_n, params, ctx);
            let jbar = jbar_recurrence::<Float>(max_n, params, ctx);
            let need = (ctx.precision_bits() / 2) as f64;
            let mut all = true;
            for &n in &grid {
                let bits = agreement_bits(&Float::with_val(ctx.precision_bits(), &j[n] + 1u32), &jbar[n]);
                all &= bits >= need;
                r.row(vec![n.to_string(), fmt_float(&j[n]), fmt_float(&jbar[n]), format!("{bits:.1} bits")]);
            }
            r.check(format!("J + 1 = Jbar to {need} bits"), all);
        }
    }
    r.note("Jbar counts the empty set, J does not");
    Ok(r)
}

fn moments<S: Scalar>(cfg: &RunConfig, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let m_max = cfg.m_max.max(2);
    let t = table::<S>(cfg, params, top(&grid), m_max, ctx)?;
    let prec = ctx.precision_bits();
    let mut cols = vec!["n".to_string(), "mu".into(), "sigma2".into()];
    cols.extend((3..=m_max).map(|k| format!("std_m{k}")));
    let mut r = Report::new(cols);
    for &n in &grid {
        let mut row = vec![n.to_string(), show(&t.mu[n], prec), show(t.sigma2(n), prec)];
        row.extend((3..=m_max).map(|k| t.central.standardized(n, k, prec).map(|v| fmt_float(&v)).unwrap_or_default()));
        r.row(row);
    }
    Ok(r)
}

fn nu(cfg: &RunConfig, mode: Mode, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let max_n = top(&grid);
    let r = match mode {
        Mode::Exact => {
            let nu = nu_recurrence::<Rational>(max_n, ctx);
            let ints = nu_factorial_integers(&nu);
            let mut r = Report::new(["n", "nu", "n!_nu"]);
            for &n in &grid {
                let scaled = ints.as_ref().map(|v| v[n].to_string()).unwrap_or_default();
                r.row(vec![n.to_string(), nu[n].to_string(), scaled]);
            }
            r.check("n! nu_n integral", ints.is_ok());
            r
        }
        Mode::Real => {
            let prec = ctx.precision_bits();
            let nu = nu_recurrence::<Float>(max_n, ctx);
            let mut r = Report::new(["n", "nu", "mean_estimate", "rel_err"]);
            for &n in &grid {
                let (est, err) = if n >= 16 {
                    let e = z_mean_asymptotic(n as u64, C_PRINTED, prec)?;
                    let err = rel_err(&e, &nu[n]);
                    (fmt_float(&e), format!("{:.6e}", err.to_f64()))
                } else {
                    (String::new(), String::new())
                };
                r.row(vec![n.to_string(), fmt_float(&nu[n]), est, err]);
            }
            r.note(format!("estimate C n^(-1/4) exp(2 sqrt n) (1 + 9/16 n^(-1/2) + ...) with C = {C_PRINTED}"));
            r
        }
    };
    Ok(r)
}

fn zeta(cfg: &RunConfig) -> Report {
    let m = cfg.m_max;
    let z = zeta_moments(m);
    let mut r = Report::new(["m", "zeta", "decimal"]);
    for (k, v) in z.iter().enumerate() {
        r.row(vec![k.to_string(), v.to_string(), format!("{:.15}", v.to_f64())]);
    }
    r.check(format!("series satisfies the limit equation to order {m}"), zeta_ode_residuals(&z, m).iter().all(|c| c.is_zero()));
    r
}

fn asymptotic(cfg: &RunConfig, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let mu_all = mu_values::<Float>(cfg, params, top(&grid), ctx)?;
    let mut r = Report::new(["n", "mu", "leading", "leading/mu", "saddle", "saddle/mu", "G", "u", "p0_printed", "p0_consistent"]);
    for &n in &grid {
        let e = mu_leading(n as f64, params, ctx)?;
        let mu = &mu_all[n];
        r.row(vec![
            n.to_string(),
            fmt_float(mu),
            fmt_float(&e.estimate.value),
            ratio(&e.estimate.value, mu),
            fmt_float(&e.saddle.value),
            ratio(&e.saddle.value, mu),
            e.estimate.periodic_amplitude.as_ref().map(fmt_float).unwrap_or_default(),
            fmt_float(&e.u),
            fmt_float(&e.p0_printed),
            fmt_float(&e.p0_consistent),
        ]);
    }
    Ok(r)
}

/// Poisson transform backed by a (possibly cached) moment table long enough
/// for `j`-th derivatives at `x`.
fn poisson(cfg: &RunConfig, params: &ModelParams, x: f64, j: usize, ctx: &NumericContext) -> anyhow::Result<PoissonGf> {
    let len = PoissonGf::table_len_for(x, j, ctx);
    Ok(PoissonGf::from_mu(params, ctx, mu_values(cfg, params, len, ctx)?))
}

fn charlier(cfg: &RunConfig, terms: u32, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let gf = poisson(cfg, params, top(&grid) as f64, terms as usize, ctx)?;
    let mut r = Report::new(["n", "mu", "poisson", "poisson_rel_err", "charlier", "charlier_rel_err"]);
    let mut better = true;
    for &n in &grid {
        let mu = &gf.mu()[n];
        let plain = gf.eval(&Float::with_val(ctx.precision_bits(), n), 0)?;
        let corr = charlier_correction(n as u64, terms, &gf)?.value;
        let (e0, e1) = (rel_err(&plain, mu), rel_err(&corr, mu));
        better &= e1 < e0;
        r.row(vec![
            n.to_string(),
            fmt_float(mu),
            fmt_float(&plain),
            format!("{:.6e}", e0.to_f64()),
            fmt_float(&corr),
            format!("{:.6e}", e1.to_f64()),
        ]);
    }
    r.check("correction beats the plain Poisson value", better);
    Ok(r)
}

fn alt(cfg: &RunConfig, centre: AltCentre, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let terms = cfg.m_max as u32;
    let gf = poisson(cfg, params, top(&grid) as f64, 0, ctx)?;
    let mut cols: Vec<String> = ["x", "N", "eta", "Q", "f_tilde"].map(String::from).into();
    cols.extend((0..=terms).map(|m| format!("ratio_m{m}")));
    let mut r = Report::new(cols);
    for &x in &grid {
        let xf = Float::with_val(ctx.precision_bits(), x);
        let exact = gf.eval(&xf, 0)?;
        let a = alt_expansion(&xf, terms, centre, params, ctx).with_context(|| format!("alt-expansion at x = {x}"))?;
        let mut row = vec![x.to_string(), a.saddle.n.to_string(), fmt_float(&a.saddle.eta), fmt_float(&a.q_point), fmt_float(&exact)];
        row.extend(a.partial_sums.iter().map(|e| ratio(&e.value, &exact)));
        r.row(row);
    }
    r.note(format!("centre rho = {}", if centre == AltCentre::N { "N" } else { "N+1" }));
    Ok(r)
}

fn summary_report(summaries: &[SimulationSummary]) -> anyhow::Result<Report> {
    let mut buf = Vec::new();
    mislab::stats::write_summaries_csv(&mut buf, summaries)?;
    let text = String::from_utf8(buf)?;
    let mut lines = text.lines();
    let mut r = Report::new(lines.next().unwrap_or_default().split(','));
    for l in lines {
        r.row(l.split(',').map(String::from).collect());
    }
    r.data = Some(serde_json::to_value(summaries)?);
    Ok(r)
}

fn simulate(cfg: &RunConfig, kind: CostKind, params: &ModelParams) -> anyhow::Result<Report> {
    let spec = CampaignSpec::new(kind, cfg.grid()?, params.clone(), cfg.replicates, cfg.seed);
    let summaries = run_campaign(&spec)?;
    let mut r = summary_report(&summaries)?;
    let dropped: u64 = summaries.iter().map(|s| s.budget_exceeded).sum();
    if dropped > 0 {
        r.note(format!("{dropped} replicates exceeded the leaf budget and were dropped"));
    }
    Ok(r)
}

fn normality(cfg: &RunConfig, threshold: f64, trials: usize, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let spec = CampaignSpec::new(CostKind::Y, grid.clone(), params.clone(), cfg.replicates, cfg.seed);
    let summaries = run_campaign(&spec)?;
    let calibration = calibrate_ks(cfg.replicates as usize, trials, cfg.seed)?;
    let exact = exact_moment_trend(params, &grid, 4, ctx)?;
    let rep = normality_report(&summaries, threshold, calibration, Some(exact))?;
    let ex = rep.exact.as_ref().expect("exact trend supplied");
    let mut r = Report::new(["n", "skewness", "excess_kurtosis", "ks", "exact_std_m3", "exact_std_m4"]);
    for (i, s) in summaries.iter().enumerate() {
        r.row(vec![
            s.n.to_string(),
            format!("{:.6}", s.skewness),
            format!("{:.6}", s.kurtosis),
            format!("{:.6}", s.ks),
            format!("{:.6}", ex.standardized[i][3]),
            format!("{:.6}", ex.standardized[i][4]),
        ]);
    }
    r.note(format!(
        "KS threshold {threshold}; normal samples of size {}: q95 = {:.6}, q99 = {:.6}",
        rep.calibration.sample_size, rep.calibration.q95, rep.calibration.q99
    ));
    r.check("sample skewness shrinks", rep.skewness_shrinks);
    r.check("sample excess kurtosis shrinks", rep.kurtosis_shrinks);
    r.check("threshold admits normal samples", rep.threshold_admits_normal);
    r.check("KS at largest n below threshold", rep.ks_below_threshold);
    r.check("exact odd moments shrink", ex.odd_shrink);
    r.check("exact even moments approach (m-1)!!", ex.even_approach);
    r.data = Some(json!({ "summaries": summaries, "report": rep }));
    Ok(r)
}

fn z_limit(cfg: &RunConfig, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let spec = CampaignSpec::new(CostKind::Z, cfg.grid()?, params.clone(), cfg.replicates, cfg.seed);
    let samples = run_campaign_samples(&spec)?;
    let rep = z_limit_report(&samples, ctx)?;
    let mut cols = vec!["n".to_string(), "nu".into()];
    for k in 1..=4 {
        cols.extend([format!("moment{k}"), format!("stderr{k}"), format!("zeta{k}")]);
    }
    cols.extend(["exact_second".into(), "skewness".into()]);
    let mut r = Report::new(cols);
    for row in &rep.rows {
        let mut cells = vec![row.n.to_string(), format!("{:.10e}", row.nu)];
        for k in 0..4 {
            cells.extend([format!("{:.6}", row.moments[k]), format!("{:.6}", row.stderr[k]), format!("{:.6}", row.zeta[k])]);
        }
        cells.extend([format!("{:.6}", row.exact_second), format!("{:.6}", row.skewness)]);
        r.row(cells);
    }
    r.note(format!("limit law skewness {:.6}, excess kurtosis {:.6}", rep.skewness_target, rep.kurtosis_target));
    r.check("skewness bounded away from 0", rep.non_normal);
    r.check("scaled moments within 4 stderr of zeta_k", rep.moments_match);
    r.data = Some(serde_json::to_value(&rep)?);
    Ok(r)
}

fn compare(cfg: &RunConfig, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let gf = poisson(cfg, params, top(&grid) as f64, 0, ctx)?;
    let mut r = Report::new(["n", "mu", "poisson", "poisson/mu", "leading", "leading/mu"]);
    for &n in &grid {
        let mu = &gf.mu()[n];
        let f = gf.eval(&Float::with_val(ctx.precision_bits(), n), 0)?;
        let (lead, lead_ratio) = if n >= 16 {
            let e = mu_leading(n as f64, params, ctx)?.estimate.value;
            (fmt_float(&e), ratio(&e, mu))
        } else {
            (String::new(), String::new())
        };
        r.row(vec![n.to_string(), fmt_float(mu), fmt_float(&f), ratio(&f, mu), lead, lead_ratio]);
    }
    Ok(r)
}

fn cache<S: Scalar>(cfg: &RunConfig, params: &ModelParams, ctx: &NumericContext) -> anyhow::Result<Report> {
    let grid = cfg.grid()?;
    let max_n = top(&grid);
    let t = table::<S>(cfg, params, max_n, cfg.m_max, ctx)?;
    let mut r = Report::new(["file", "max_n", "m_max", "mode", "precision_bits", "mu_max_n"]);
    r.row(vec![
        MomentTable::<S>::cache_file_name(params, &t.spec),
        t.spec.max_n.to_string(),
        t.spec.m_max.to_string(),
        t.spec.mode.to_string(),
        t.spec.precision_bits.to_string(),
        show(&t.mu[max_n], ctx.precision_bits()),
    ]);
    Ok(r)
}
