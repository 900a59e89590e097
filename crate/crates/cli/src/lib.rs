//! Batch driver: configuration, the verification suites, and deterministic
//! report emission (JSON schema `v1` plus RFC-4180 CSV tables).

pub mod suites;

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "v1";

/// Run configuration. Every field has a CLI flag; a JSON config file may
/// supply defaults, with flags winning.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub space: String,
    pub n_samples: usize,
    pub seed: u64,
    pub radius: f64,
    pub sigma: f64,
    pub tol_structure: f64,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            space: "CH2".to_string(),
            n_samples: 1024,
            seed: 7,
            radius: 2.0,
            sigma: 0.1,
            tol_structure: 5e-3,
        }
    }
}

impl Config {
    pub fn space_id(&self) -> anyhow::Result<rank1_core::SpaceId> {
        rank1_core::SpaceId::parse(&self.space)
            .ok_or_else(|| anyhow::anyhow!("unknown space: {}", self.space))
    }
}

/// One check: a named residual against its tolerance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub space: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A full run: the echoing of the configuration keeps reports
/// self-describing, and no timestamps are recorded so identical
/// (config, seed) runs are byte-identical.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub suite: String,
    pub config: Config,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> anyhow::Result<Report> {
        let r: Report = serde_json::from_str(s)?;
        if r.schema != SCHEMA {
            anyhow::bail!("unsupported report schema: {}", r.schema);
        }
        Ok(r)
    }

    /// RFC-4180 CSV table of the checks (headers always present).
    pub fn checks_csv(&self) -> String {
        let mut out = String::from("name,space,value,tolerance,pass\r\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\r\n",
                csv_field(&c.name),
                csv_field(&c.space),
                c.value,
                c.tolerance,
                c.pass
            ));
        }
        out
    }

    /// Re-ingest a checks CSV; used as the round-trip oracle for emission.
    pub fn checks_from_csv(s: &str) -> anyhow::Result<Vec<CheckRecord>> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(s.as_bytes());
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            out.push(CheckRecord {
                name: rec[0].to_string(),
                space: rec[1].to_string(),
                value: rec[2].parse()?,
                tolerance: rec[3].parse()?,
                pass: rec[4].parse()?,
            });
        }
        Ok(out)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Run one suite into a report.
pub fn run_suite(suite: &str, cfg: &Config) -> anyhow::Result<Report> {
    let checks = suites::run_checks(suite, cfg)?;
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        schema: SCHEMA.to_string(),
        suite: suite.to_string(),
        config: cfg.clone(),
        checks,
        pass,
    })
}
