//! A tabular report with named checks, written as `#`-commented CSV or JSON.

use std::io::Write;

use serde_json::{json, Map, Value};

pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Default)]
pub struct Report {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Structured payload for JSON output (e.g. simulation summaries).
    pub data: Option<Value>,
}

impl Report {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Report { columns: columns.into_iter().map(Into::into).collect(), ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(Check { name: name.into(), pass });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# {}", mislab::ENGINE_VERSION)?;
        let cfg: Vec<String> = self.header.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "# {}", cfg.join(" "))?;
        for c in &self.checks {
            writeln!(out, "# check {}: {}", c.name, if c.pass { "PASS" } else { "FAIL" })?;
        }
        for n in &self.notes {
            writeln!(out, "# note: {n}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let config: Map<String, Value> = self.header.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let rows: Vec<Value> =
            self.rows.iter().map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(|v| Value::String(v.clone()))).collect())).collect();
        let checks: Vec<Value> = self.checks.iter().map(|c| json!({ "name": c.name, "pass": c.pass })).collect();
        let mut v = json!({
            "engine_version": mislab::ENGINE_VERSION,
            "config": config,
            "checks": checks,
            "notes": self.notes,
            "columns": self.columns,
            "rows": rows,
        });
        if let Some(d) = &self.data {
            v["data"] = d.clone();
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = Report::new(["n", "mu"]);
        r.header = vec![("command".into(), "x".into())];
        r.row(vec!["3".into(), "19/8".into()]);
        r.check("agree", true);
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# mislab/"));
        assert_eq!(&lines[1..], ["# command=x", "# check agree: PASS", "n,mu", "3,19/8"]);
        assert_eq!(r.to_json()["rows"][0]["mu"], "19/8");
    }
}
