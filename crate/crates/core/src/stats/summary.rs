//! Sample moments, the composite KS distance to the normal law, and the
//! per-grid-point summary record.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::search::CostKind;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Mean and central moments of a sample, accumulated in index order so the
/// result does not depend on how the sample was produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased variance.
    pub variance: f64,
    /// `m_2, m_3, m_4` about the mean, divided by `count`.
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl SampleMoments {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        let nf = count as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let variance = if count > 1 { m2 / (nf - 1.0) } else { 0.0 };
        SampleMoments { count, mean, variance, m2: m2 / nf, m3: m3 / nf, m4: m4 / nf }
    }

    pub fn skewness(&self) -> f64 {
        if self.m2 > 0.0 {
            self.m3 / self.m2.powf(1.5)
        } else {
            0.0
        }
    }

    pub fn excess_kurtosis(&self) -> f64 {
        if self.m2 > 0.0 {
            self.m4 / (self.m2 * self.m2) - 3.0
        } else {
            0.0
        }
    }

    pub fn mean_stderr(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    /// Large-sample standard error of the sample variance,
    /// `sqrt((m_4 - m_2^2) / R)`.
    pub fn variance_stderr(&self) -> f64 {
        ((self.m4 - self.m2 * self.m2).max(0.0) / self.count as f64).sqrt()
    }
}

/// `sup |F_R(x) - Phi((x - mean)/sd)|`, standardizing by the sample's own
/// mean and standard deviation. Zero for a constant sample.
pub fn ks_distance_normal(xs: &[f64]) -> f64 {
    let m = SampleMoments::of(xs);
    let sd = m.variance.sqrt();
    if xs.is_empty() || sd == 0.0 {
        return 0.0;
    }
    let mut z: Vec<f64> = xs.iter().map(|x| (x - m.mean) / sd).collect();
    z.sort_by(|a, b| a.total_cmp(b));
    let nf = z.len() as f64;
    z.iter().enumerate().fold(0.0f64, |d, (i, &v)| {
        let c = normal_cdf(v);
        d.max((i + 1) as f64 / nf - c).max(c - i as f64 / nf)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub kind: CostKind,
    pub n: usize,
    /// `num/den`, or `-` for the uniform-split cost.
    pub p: String,
    #[serde(rename = "R")]
    pub replicates: u64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
    pub ks: f64,
    pub mean_stderr: f64,
    pub variance_stderr: f64,
    pub skewness_stderr: f64,
    pub kurtosis_stderr: f64,
    /// Replicates dropped for exceeding the leaf budget.
    pub budget_exceeded: u64,
    pub seed: u64,
    pub engine_version: String,
}

impl SimulationSummary {
    pub fn from_costs(kind: CostKind, n: usize, p: String, costs: &[f64], budget_exceeded: u64, seed: u64) -> Self {
        let m = SampleMoments::of(costs);
        let rf = costs.len() as f64;
        SimulationSummary {
            kind,
            n,
            p,
            replicates: costs.len() as u64 + budget_exceeded,
            mean: m.mean,
            variance: m.variance,
            skewness: m.skewness(),
            kurtosis: m.excess_kurtosis(),
            ks: ks_distance_normal(costs),
            mean_stderr: m.mean_stderr(),
            variance_stderr: m.variance_stderr(),
            skewness_stderr: (6.0 / rf).sqrt(),
            kurtosis_stderr: (24.0 / rf).sqrt(),
            budget_exceeded,
            seed,
            engine_version: crate::ENGINE_VERSION.to_string(),
        }
    }

    /// Whether `target` lies within `k` standard errors of the sample mean.
    pub fn mean_within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.mean_stderr
    }

    pub fn variance_within(&self, target: f64, k: f64) -> bool {
        (self.variance - target).abs() <= k * self.variance_stderr
    }
}

pub const SUMMARY_CSV_HEADER: &str =
    "kind,n,p,R,mean,variance,skewness,kurtosis,ks,mean_stderr,variance_stderr,skewness_stderr,kurtosis_stderr,budget_exceeded,seed,engine_version";

pub fn write_summaries_csv<W: Write>(out: &mut W, rows: &[SimulationSummary]) -> io::Result<()> {
    writeln!(out, "{SUMMARY_CSV_HEADER}")?;
    for s in rows {
        writeln!(
            out,
            "{},{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{}",
            s.kind,
            s.n,
            s.p,
            s.replicates,
            s.mean,
            s.variance,
            s.skewness,
            s.kurtosis,
            s.ks,
            s.mean_stderr,
            s.variance_stderr,
            s.skewness_stderr,
            s.kurtosis_stderr,
            s.budget_exceeded,
            s.seed,
            s.engine_version
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_sample() {
        let m = SampleMoments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.skewness(), 0.0);
        // population m4 / m2^2 = 2.5625 / 1.5625
        assert!((m.excess_kurtosis() - (2.5625 / 1.5625 - 3.0)).abs() < 1e-12);
        let c = SampleMoments::of(&[7.0; 10]);
        assert_eq!((c.variance, c.skewness(), c.excess_kurtosis()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn ks_hand_case() {
        assert_eq!(ks_distance_normal(&[3.0; 5]), 0.0);
        // two points standardize to -+1/sqrt(2)
        let d = ks_distance_normal(&[0.0, 1.0]);
        let c = normal_cdf(-std::f64::consts::FRAC_1_SQRT_2);
        assert!((d - (0.5 - c).max(c)).abs() < 1e-15);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }
}
