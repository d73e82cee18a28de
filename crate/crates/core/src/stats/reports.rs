//! Normality, Z-limit and variance-ratio reports.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use super::campaign::GridSamples;
use super::summary::{ks_distance_normal, SampleMoments, SimulationSummary};
use crate::error::{Error, Result};
use crate::exact::{central_moments, mu_recurrence, nu_recurrence, z_second_moments, zeta_moments};
use crate::model::{ModelParams, NumericContext};
use crate::rng::StreamKey;
use crate::search::CostKind;

/// KS threshold used when none is configured.
pub const DEFAULT_KS_THRESHOLD: f64 = 0.05;

/// `|v|` shrinks from first to last, with at most `allowed` steps where it
/// does not.
pub fn shrinking(values: &[f64], allowed: usize) -> bool {
    let a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let bad = a.windows(2).filter(|w| w[1] >= w[0]).count();
    a.len() >= 2 && bad <= allowed && a[a.len() - 1] < a[0]
}

/// Distribution of the composite KS distance for true normal samples of a
/// given size, standardized exactly as the cost samples are.
#[derive(Clone, Debug, Serialize)]
pub struct KsCalibration {
    pub sample_size: usize,
    pub trials: usize,
    pub seed: u64,
    /// 95% and 99% quantiles of the simulated distances.
    pub q95: f64,
    pub q99: f64,
}

pub fn calibrate_ks(sample_size: usize, trials: usize, master_seed: u64) -> Result<KsCalibration> {
    if sample_size < 2 || trials < 20 {
        return Err(Error::InsufficientData("KS calibration needs samples of size >= 2 and >= 20 trials".into()));
    }
    let key = StreamKey::derive(master_seed, &format!("ks-calibration|size={sample_size}"));
    let mut d: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = key.rng(t);
            let xs: Vec<f64> = (0..sample_size).map(|_| rng.sample(StandardNormal)).collect();
            ks_distance_normal(&xs)
        })
        .collect();
    d.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| d[((p * trials as f64).ceil() as usize).min(trials) - 1];
    Ok(KsCalibration { sample_size, trials, seed: master_seed, q95: q(0.95), q99: q(0.99) })
}

/// Standardized exact central moments `M_{n,m} / sigma_n^m` of `Y_n`.
#[derive(Clone, Debug, Serialize)]
pub struct ExactMomentTrend {
    pub p: String,
    pub n: Vec<usize>,
    /// `standardized[i][m]` for `m = 0..=m_max`.
    pub standardized: Vec<Vec<f64>>,
    pub first_moment_zero: bool,
    /// Odd standardized moments (3, 5, ...) shrink in magnitude.
    pub odd_shrink: bool,
    /// Even standardized moments approach `(m-1)!!`.
    pub even_approach: bool,
}

fn double_factorial(m: usize) -> f64 {
    (1..m).step_by(2).map(|k| k as f64).product()
}

pub fn exact_moment_trend(params: &ModelParams, ns: &[usize], m_max: usize, ctx: &NumericContext) -> Result<ExactMomentTrend> {
    if ns.len() < 2 || ns.iter().any(|&n| n < 2) {
        return Err(Error::InsufficientData("moment trend needs >= 2 sizes, each >= 2".into()));
    }
    let top = *ns.iter().max().unwrap();
    let mu = mu_recurrence::<Float>(top, params, ctx);
    let cm = central_moments(&mu, m_max, params, ctx);
    let prec = ctx.precision_bits();
    let standardized: Vec<Vec<f64>> =
        ns.iter().map(|&n| (0..=m_max).map(|m| cm.standardized(n, m, prec).map_or(f64::NAN, |v| v.to_f64())).collect()).collect();
    let column = |m: usize| standardized.iter().map(|row| row[m]).collect::<Vec<f64>>();
    let first_moment_zero = standardized.iter().all(|row| row[1] == 0.0);
    let odd_shrink = (3..=m_max).step_by(2).all(|m| shrinking(&column(m), 1));
    let even_approach = (4..=m_max).step_by(2).all(|m| {
        let target = double_factorial(m);
        shrinking(&column(m).iter().map(|v| v - target).collect::<Vec<_>>(), 1)
    });
    Ok(ExactMomentTrend { p: params.label(), n: ns.to_vec(), standardized, first_moment_zero, odd_shrink, even_approach })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityReport {
    pub n: Vec<usize>,
    pub skewness: Vec<f64>,
    pub kurtosis: Vec<f64>,
    pub ks_largest_n: f64,
    pub ks_threshold: f64,
    pub calibration: KsCalibration,
    pub skewness_shrinks: bool,
    pub kurtosis_shrinks: bool,
    /// The threshold admits true normal samples (`q99 <= threshold`).
    pub threshold_admits_normal: bool,
    pub ks_below_threshold: bool,
    pub exact: Option<ExactMomentTrend>,
    pub pass: bool,
}

/// Checks `Y` summaries over increasing `n` for the trend toward normality.
pub fn normality_report(
    summaries: &[SimulationSummary],
    ks_threshold: f64,
    calibration: KsCalibration,
    exact: Option<ExactMomentTrend>,
) -> Result<NormalityReport> {
    if summaries.len() < 3 {
        return Err(Error::InsufficientData(format!("normality report needs >= 3 grid points, got {}", summaries.len())));
    }
    if summaries.iter().any(|s| s.kind != CostKind::Y) {
        return Err(Error::InvalidParameter("normality report takes Y summaries".into()));
    }
    let skewness: Vec<f64> = summaries.iter().map(|s| s.skewness).collect();
    let kurtosis: Vec<f64> = summaries.iter().map(|s| s.kurtosis).collect();
    let ks_largest_n = summaries.last().unwrap().ks;
    let skewness_shrinks = shrinking(&skewness, 1);
    let kurtosis_shrinks = shrinking(&kurtosis, 1);
    let threshold_admits_normal = calibration.q99 <= ks_threshold;
    let ks_below_threshold = ks_largest_n < ks_threshold;
    let exact_ok = exact.as_ref().is_none_or(|e| e.first_moment_zero && e.odd_shrink && e.even_approach);
    Ok(NormalityReport {
        n: summaries.iter().map(|s| s.n).collect(),
        skewness,
        kurtosis,
        ks_largest_n,
        ks_threshold,
        calibration,
        skewness_shrinks,
        kurtosis_shrinks,
        threshold_admits_normal,
        ks_below_threshold,
        pass: skewness_shrinks && kurtosis_shrinks && threshold_admits_normal && ks_below_threshold && exact_ok,
        exact,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZLimitRow {
    pub n: usize,
    pub nu: f64,
    /// Sample `E (Z_n/nu_n)^k`, `k = 1..=4`.
    pub moments: Vec<f64>,
    pub stderr: Vec<f64>,
    pub zeta: Vec<f64>,
    pub within_4_stderr: Vec<bool>,
    /// Exact `E Z_n^2 / nu_n^2` at this `n`.
    pub exact_second: f64,
    pub skewness: f64,
    pub skewness_stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZLimitReport {
    pub rows: Vec<ZLimitRow>,
    /// `(zeta_3 - 3 zeta_2 + 2) / (zeta_2 - 1)^{3/2}`.
    pub skewness_target: f64,
    /// Excess kurtosis implied by `zeta_1..4`; nonzero witnesses non-normality.
    pub kurtosis_target: f64,
    /// Sample skewness more than 3 standard errors above 0 at every `n`.
    pub non_normal: bool,
    pub moments_match: bool,
    pub pass: bool,
}

pub fn zeta_shape() -> (f64, f64) {
    let z: Vec<f64> = zeta_moments(4).iter().map(|r| r.to_f64()).collect();
    let var = z[2] - 1.0;
    let skew = (z[3] - 3.0 * z[2] + 2.0) / var.powf(1.5);
    let m4 = z[4] - 4.0 * z[3] + 6.0 * z[2] - 3.0;
    (skew, m4 / (var * var) - 3.0)
}

pub fn z_limit_report(samples: &[GridSamples], ctx: &NumericContext) -> Result<ZLimitReport> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!("Z-limit report needs >= 2 grid points, got {}", samples.len())));
    }
    if samples.iter().any(|s| s.kind != CostKind::Z || s.costs.len() < 2) {
        return Err(Error::InvalidParameter("Z-limit report takes non-trivial Z samples".into()));
    }
    let top = samples.iter().map(|s| s.n).max().unwrap();
    let nu = nu_recurrence::<Float>(top, ctx);
    let second = z_second_moments::<Float>(top, ctx);
    let zeta: Vec<f64> = zeta_moments(4).iter().map(|r| r.to_f64()).collect();
    let (skewness_target, kurtosis_target) = zeta_shape();
    let mut rows = Vec::new();
    for s in samples {
        let nu_n = nu[s.n].to_f64();
        let scaled: Vec<f64> = s.costs.iter().map(|c| c / nu_n).collect();
        let mut moments = Vec::new();
        let mut stderr = Vec::new();
        for k in 1..=4 {
            let powers: Vec<f64> = scaled.iter().map(|v| v.powi(k)).collect();
            let m = SampleMoments::of(&powers);
            moments.push(m.mean);
            stderr.push(m.mean_stderr());
        }
        let within_4_stderr = (0..4).map(|i| (moments[i] - zeta[i + 1]).abs() <= 4.0 * stderr[i]).collect();
        let sm = SampleMoments::of(&s.costs);
        let exact_second = (Float::with_val(ctx.precision_bits(), &second[s.n] / &nu[s.n]) / &nu[s.n]).to_f64();
        rows.push(ZLimitRow {
            n: s.n,
            nu: nu_n,
            moments,
            stderr,
            zeta: zeta[1..].to_vec(),
            within_4_stderr,
            exact_second,
            skewness: sm.skewness(),
            skewness_stderr: (6.0 / s.costs.len() as f64).sqrt(),
        });
    }
    let non_normal = rows.iter().all(|r| r.skewness > 3.0 * r.skewness_stderr);
    let moments_match = rows.iter().all(|r| r.within_4_stderr.iter().all(|&b| b));
    Ok(ZLimitReport { pass: non_normal && moments_match, rows, skewness_target, kurtosis_target, non_normal, moments_match })
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceRatioRow {
    pub n: usize,
    pub var_x: f64,
    pub var_y: f64,
    pub ratio: f64,
    /// 2.5% and 97.5% bootstrap percentiles.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceRatioTable {
    pub rows: Vec<VarianceRatioRow>,
    pub resamples: usize,
    /// Least-squares `ratio ~ c0 + c1 n + c2 n^2`, when there are >= 3 rows.
    pub quadratic_fit: Option<[f64; 3]>,
    pub concave: Option<bool>,
}

fn resampled_variance<R: Rng>(xs: &[f64], rng: &mut R) -> f64 {
    let draw: Vec<f64> = (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).collect();
    SampleMoments::of(&draw).variance
}

fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Option<[f64; 3]> {
    // normal equations, scaled by the largest x for conditioning
    let s = xs.iter().cloned().fold(0.0, f64::max);
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let t = x / s;
        let v = [1.0, t, t * t];
        for i in 0..3 {
            b[i] += v[i] * y;
            for j in 0..3 {
                a[i][j] += v[i] * v[j];
            }
        }
    }
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut c = [0.0; 3];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *ck = det(&m) / d;
    }
    Some([c[0], c[1] / s, c[2] / (s * s)])
}

/// `Var(X_n)/Var(Y_n)` with bootstrap intervals, from paired campaigns.
pub fn x_vs_y_variance(x: &[GridSamples], y: &[GridSamples], resamples: usize, master_seed: u64) -> Result<VarianceRatioTable> {
    if x.is_empty() || x.len() != y.len() || resamples < 10 {
        return Err(Error::InsufficientData("need paired X and Y grids and >= 10 resamples".into()));
    }
    let mut rows = Vec::new();
    for (xs, ys) in x.iter().zip(y) {
        if xs.kind != CostKind::X || ys.kind != CostKind::Y || xs.n != ys.n || xs.p != ys.p {
            return Err(Error::InvalidParameter(format!("unpaired grid points: {} n={} vs {} n={}", xs.kind, xs.n, ys.kind, ys.n)));
        }
        if xs.costs.len() < 2 || ys.costs.len() < 2 {
            return Err(Error::InsufficientData(format!("too few samples at n = {}", xs.n)));
        }
        let var_x = SampleMoments::of(&xs.costs).variance;
        let var_y = SampleMoments::of(&ys.costs).variance;
        let key = StreamKey::derive(master_seed, &format!("bootstrap|n={}|p={}", xs.n, xs.p));
        let mut boot: Vec<f64> = (0..resamples as u64)
            .into_par_iter()
            .map(|b| {
                let mut rng = key.rng(b);
                let vx = resampled_variance(&xs.costs, &mut rng);
                vx / resampled_variance(&ys.costs, &mut rng)
            })
            .collect();
        boot.sort_by(|a, b| a.total_cmp(b));
        let pct = |p: f64| boot[((p * resamples as f64).round() as usize).min(resamples - 1)];
        rows.push(VarianceRatioRow { n: xs.n, var_x, var_y, ratio: var_x / var_y, ci_low: pct(0.025), ci_high: pct(0.975) });
    }
    let quadratic = if rows.len() >= 3 {
        let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let rs: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        quadratic_fit(&ns, &rs)
    } else {
        None
    };
    Ok(VarianceRatioTable { rows, resamples, concave: quadratic.map(|c| c[2] < 0.0), quadratic_fit: quadratic })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinking_rules() {
        assert!(shrinking(&[3.0, 2.0, 1.0], 0));
        assert!(shrinking(&[3.0, 3.5, 1.0], 1));
        assert!(!shrinking(&[3.0, 3.5, 1.0], 0));
        assert!(!shrinking(&[1.0, 0.5, 2.0], 1));
        assert!(shrinking(&[-3.0, 2.0, -1.0], 0));
    }

    #[test]
    fn quadratic_recovers_parabola() {
        let xs = [30.0, 60.0, 100.0, 150.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 0.05 * x - 1e-4 * x * x).collect();
        let c = quadratic_fit(&xs, &ys).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-9 && (c[1] - 0.05).abs() < 1e-11 && (c[2] + 1e-4).abs() < 1e-13);
    }

    #[test]
    fn zeta_shape_is_skewed() {
        let (skew, kurt) = zeta_shape();
        assert!(skew > 0.0);
        assert!(kurt != 0.0);
    }

    #[test]
    fn calibration_of_normal_samples() {
        let c = calibrate_ks(10_000, 200, 5).unwrap();
        assert!(c.q99 < 0.02, "{}", c.q99);
        assert!(c.q95 <= c.q99);
    }

    #[test]
    fn exact_trend_small() {
        let params = ModelParams::from_ratio(1, 2).unwrap();
        let ctx = NumericContext::new(128).unwrap();
        let t = exact_moment_trend(&params, &[50, 100, 200], 4, &ctx).unwrap();
        assert!(t.first_moment_zero);
        for row in &t.standardized {
            assert_eq!(row[0], 1.0);
            assert!((row[2] - 1.0).abs() < 1e-12);
        }
    }
}
