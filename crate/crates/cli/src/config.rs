//! Run configuration shared by every subcommand, and `--n-grid` parsing.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use mislab::{Mode, ModelParams, NumericContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// Edge probability as an exact fraction, e.g. 1/2.
    #[arg(long, global = true, default_value = "1/2")]
    pub p: String,
    /// A single size.
    #[arg(long, global = true, conflicts_with = "n_grid")]
    pub n: Option<u64>,
    /// Size grid: `a:b:x2` (geometric), `a:b:+k` (arithmetic) or `a,b,c`.
    #[arg(long, global = true)]
    pub n_grid: Option<String>,
    /// Monte Carlo replicates per grid point.
    #[arg(short = 'R', long = "replicates", global = true, default_value_t = 1000)]
    pub replicates: u64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "precision", global = true, default_value_t = 256)]
    pub precision_bits: u32,
    /// Highest moment / number of expansion terms.
    #[arg(long = "m", global = true, default_value_t = 4)]
    pub m_max: usize,
    #[arg(long, global = true, default_value = "exact")]
    pub mode: String,
    /// Report file; standard output when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Directory for cached moment tables.
    #[arg(long, global = true, env = "MISLAB_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl RunConfig {
    pub fn params(&self) -> anyhow::Result<ModelParams> {
        Ok(ModelParams::parse(&self.p)?)
    }

    pub fn mode(&self) -> anyhow::Result<Mode> {
        Ok(self.mode.parse()?)
    }

    pub fn ctx(&self) -> anyhow::Result<NumericContext> {
        Ok(NumericContext::new(self.precision_bits)?)
    }

    pub fn grid(&self) -> anyhow::Result<Vec<usize>> {
        match (&self.n, &self.n_grid) {
            (Some(n), _) => Ok(vec![*n as usize]),
            (None, Some(g)) => parse_grid(g),
            (None, None) => bail!("give --n or --n-grid"),
        }
    }

    pub fn check_replicates(&self) -> anyhow::Result<()> {
        if self.replicates < 1 {
            bail!("-R must be at least 1");
        }
        Ok(())
    }

    /// `key=value` pairs describing the run. Output and cache locations are
    /// left out so that reports do not depend on where they were written or
    /// whether a cache was consulted.
    pub fn header(&self, command: &str) -> Vec<(String, String)> {
        let grid = match (&self.n, &self.n_grid) {
            (Some(n), _) => n.to_string(),
            (None, Some(g)) => g.clone(),
            (None, None) => "-".into(),
        };
        [
            ("command", command.to_string()),
            ("p", self.p.trim().to_string()),
            ("n", grid),
            ("R", self.replicates.to_string()),
            ("seed", self.seed.to_string()),
            ("precision_bits", self.precision_bits.to_string()),
            ("m", self.m_max.to_string()),
            ("mode", self.mode.clone()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

fn num(s: &str, what: &str) -> anyhow::Result<u64> {
    s.trim().parse().with_context(|| format!("bad {what} '{s}' in --n-grid"))
}

/// Parses `a:b:x2`, `a:b:+k` or a comma list into a strictly increasing grid.
pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid: Vec<u64> = match parts.as_slice() {
        [a, b, step] => {
            let (a, b) = (num(a, "start")?, num(b, "end")?);
            if a > b {
                bail!("grid start {a} exceeds end {b}");
            }
            let mut out = vec![a];
            if let Some(f) = step.strip_prefix('x') {
                let f = num(f, "factor")?;
                if f < 2 || a == 0 {
                    bail!("geometric grids need a factor >= 2 and a start >= 1");
                }
                while let Some(next) = out.last().unwrap().checked_mul(f).filter(|v| *v <= b) {
                    out.push(next);
                }
            } else if let Some(k) = step.strip_prefix('+') {
                let k = num(k, "step")?;
                if k == 0 {
                    bail!("arithmetic grids need a step >= 1");
                }
                while let Some(next) = out.last().unwrap().checked_add(k).filter(|v| *v <= b) {
                    out.push(next);
                }
            } else {
                bail!("grid step '{step}' must look like x2 or +10");
            }
            out
        }
        [list] => list.split(',').map(|s| num(s, "size")).collect::<anyhow::Result<_>>()?,
        _ => bail!("grid '{spec}' must be a:b:xF, a:b:+K or a comma list"),
    };
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        bail!("grid '{spec}' is not strictly increasing");
    }
    Ok(grid.into_iter().map(|v| v as usize).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("500:5000:x2").unwrap(), vec![500, 1000, 2000, 4000]);
        assert_eq!(parse_grid("10:40:+10").unwrap(), vec![10, 20, 30, 40]);
        assert_eq!(parse_grid("3,5,9").unwrap(), vec![3, 5, 9]);
        assert_eq!(parse_grid("7:7:x2").unwrap(), vec![7]);
        for bad in ["5,3", "1:10:x1", "1:10:*2", "10:1:+1", "a:b:+1", "1:2"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
