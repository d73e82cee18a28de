//! Bundled moment tables with an on-disk JSON cache.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::jn::j_direct_table;
use super::moments::{central_moments, CentralMoments};
use super::mu::{mu_recurrence, mu_tilde_table};
use super::nu::{nu_recurrence, zeta_moments};
use crate::error::{Error, Result};
use crate::model::{Mode, ModelParams, NumericContext, Scalar};
use crate::ENGINE_VERSION;

/// What to build: sizes, scalar mode and precision (ignored in exact mode
/// except as part of the cache key).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSpec {
    pub max_n: usize,
    pub m_max: usize,
    pub mode: Mode,
    pub precision_bits: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable<S> {
    pub params: ModelParams,
    pub spec: TableSpec,
    pub mu: Vec<S>,
    pub mu_tilde: Vec<S>,
    /// `J_0..=J_max_n` (`J_0 = 0`).
    pub j: Vec<S>,
    pub central: CentralMoments<S>,
    pub nu: Vec<S>,
    pub zeta: Vec<S>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: String,
    p: String,
    mode: Mode,
    precision_bits: u32,
    max_n: usize,
    m_max: usize,
}

#[derive(Deserialize)]
struct CacheFile {
    header: Header,
    mu: Vec<String>,
    mu_tilde: Vec<String>,
    j: Vec<String>,
    central: Vec<String>,
    t: Vec<String>,
    nu: Vec<String>,
    zeta: Vec<String>,
}

impl<S: Scalar> MomentTable<S> {
    pub fn build(params: &ModelParams, spec: TableSpec, ctx: &NumericContext) -> Result<Self> {
        if spec.mode != S::MODE {
            return Err(Error::InvalidParameter(format!("table mode {} does not match scalar mode {}", spec.mode, S::MODE)));
        }
        if spec.max_n < 1 || spec.m_max < 2 {
            return Err(Error::InvalidParameter("tables need max_n >= 1 and m_max >= 2".into()));
        }
        let mu = mu_recurrence::<S>(spec.max_n, params, ctx);
        let central = central_moments(&mu, spec.m_max, params, ctx);
        Ok(MomentTable {
            params: params.clone(),
            spec,
            mu_tilde: mu_tilde_table(spec.max_n, params, ctx),
            j: j_direct_table(spec.max_n, params, ctx),
            central,
            nu: nu_recurrence(spec.max_n, ctx),
            zeta: zeta_moments(spec.m_max).iter().map(|z| S::from_rational(z, ctx)).collect(),
            mu,
        })
    }

    pub fn sigma2(&self, n: usize) -> &S {
        self.central.sigma2(n)
    }

    pub fn cache_file_name(params: &ModelParams, spec: &TableSpec) -> String {
        let p = params.label().replace('/', "_");
        let version: String = ENGINE_VERSION.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '-' }).collect();
        format!("moments-p{p}-{}-{}b-n{}-m{}-{version}.json", spec.mode, spec.precision_bits, spec.max_n, spec.m_max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let enc = |v: &[S]| v.iter().map(Scalar::encode).collect::<Vec<_>>();
        let flat = |rows: &[Vec<S>]| rows.iter().flatten().map(Scalar::encode).collect::<Vec<_>>();
        json!({
            "header": Header {
                version: ENGINE_VERSION.to_string(),
                p: self.params.label(),
                mode: self.spec.mode,
                precision_bits: self.spec.precision_bits,
                max_n: self.spec.max_n,
                m_max: self.spec.m_max,
            },
            "mu": enc(&self.mu),
            "mu_tilde": enc(&self.mu_tilde),
            "j": enc(&self.j),
            "central": flat(&self.central.m),
            "t": flat(&self.central.t),
            "nu": enc(&self.nu),
            "zeta": enc(&self.zeta),
        })
    }

    pub fn from_json(text: &str, params: &ModelParams, spec: TableSpec, ctx: &NumericContext) -> Result<Self> {
        let file: CacheFile = serde_json::from_str(text)?;
        let h = &file.header;
        if h.version != ENGINE_VERSION
            || h.p != params.label()
            || h.mode != spec.mode
            || h.precision_bits != spec.precision_bits
            || h.max_n != spec.max_n
            || h.m_max != spec.m_max
        {
            return Err(Error::Cache("cache header does not match the requested table".into()));
        }
        let dec = |v: &[String]| v.iter().map(|s| S::decode(s, ctx)).collect::<Result<Vec<S>>>();
        let rows = |v: &[String]| -> Result<Vec<Vec<S>>> {
            let flat = dec(v)?;
            if flat.len() != (spec.max_n + 1) * (spec.m_max + 1) {
                return Err(Error::Cache("central moment block has the wrong size".into()));
            }
            Ok(flat.chunks(spec.m_max + 1).map(|c| c.to_vec()).collect())
        };
        let table = MomentTable {
            params: params.clone(),
            spec,
            mu: dec(&file.mu)?,
            mu_tilde: dec(&file.mu_tilde)?,
            j: dec(&file.j)?,
            central: CentralMoments { m_max: spec.m_max, m: rows(&file.central)?, t: rows(&file.t)? },
            nu: dec(&file.nu)?,
            zeta: dec(&file.zeta)?,
        };
        let n = spec.max_n + 1;
        if [table.mu.len(), table.mu_tilde.len(), table.j.len(), table.nu.len()].iter().any(|&l| l != n) {
            return Err(Error::Cache("sequence lengths do not match max_n".into()));
        }
        Ok(table)
    }

    /// Loads the table from `dir` if a matching cache file exists, otherwise
    /// builds and writes it. Returns the table and whether it was a hit.
    pub fn load_or_build(dir: &Path, params: &ModelParams, spec: TableSpec, ctx: &NumericContext) -> Result<(Self, bool)> {
        let path = dir.join(Self::cache_file_name(params, &spec));
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(t) = Self::from_json(&text, params, spec, ctx) {
                return Ok((t, true));
            }
        }
        let table = Self::build(params, spec, ctx)?;
        table.write_cache(dir)?;
        Ok((table, false))
    }

    pub fn write_cache(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(Self::cache_file_name(&self.params, &self.spec));
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec(&self.to_json())?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}
