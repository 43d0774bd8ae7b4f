use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use super::ops::{error_outcome, prepare, Artifact};
use super::{ConfigError, Expectation, ExperimentSpec};
use crate::metric::element_cap;

/// Default output directory when neither `--out` nor the spec sets one.
pub const ARTIFACT_DIR: &str = "qhlab-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Positive,
    Negative,
    BudgetExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub index: usize,
    pub op: String,
    pub label: String,
    pub expect: Expectation,
    pub verdict: Verdict,
    pub met: bool,
    pub radius: Option<u32>,
    pub summary: String,
    pub witnesses: Vec<String>,
    /// CSV files written next to the report
    pub files: Vec<String>,
    pub details: Value,
    #[serde(skip)]
    pub artifacts: Vec<(String, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub description: String,
    pub tool_version: String,
    pub element_budget: usize,
    pub checks: Vec<CheckRecord>,
    pub expectations_met: bool,
    pub contradictions: usize,
    pub budget_exceeded: usize,
    /// the only field that varies between runs
    pub wall_time_ms: u64,
}

/// Runs the checks in declared order.
pub fn run(spec: &ExperimentSpec) -> Result<Report, ConfigError> {
    let start = Instant::now();
    let prepared = prepare(spec)?;
    let slug = file_slug(&spec.name);
    let mut checks = Vec::new();
    for p in prepared {
        let (verdict, outcome) = match (p.task)() {
            Ok(o) => (if o.positive { Verdict::Positive } else { Verdict::Negative }, o),
            Err(e) => {
                let (budget, o) = error_outcome(&e);
                (if budget { Verdict::BudgetExceeded } else { Verdict::Negative }, o)
            }
        };
        let met = matches!(
            (verdict, p.expect),
            (Verdict::Positive, Expectation::Positive) | (Verdict::Negative, Expectation::Negative)
        );
        let artifacts: Vec<(String, String)> = outcome
            .artifacts
            .into_iter()
            .map(|Artifact { suffix, content }| (format!("{slug}.{}-{suffix}.csv", p.index), content))
            .collect();
        checks.push(CheckRecord {
            index: p.index,
            op: p.op.to_string(),
            label: p.label,
            expect: p.expect,
            verdict,
            met,
            radius: p.radius,
            summary: outcome.summary,
            witnesses: outcome.witnesses,
            files: artifacts.iter().map(|a| a.0.clone()).collect(),
            details: outcome.details,
            artifacts,
        });
    }
    let budget_exceeded = checks.iter().filter(|c| c.verdict == Verdict::BudgetExceeded).count();
    let contradictions = checks.iter().filter(|c| !c.met && c.verdict != Verdict::BudgetExceeded).count();
    Ok(Report {
        experiment: spec.name.clone(),
        description: spec.description.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        element_budget: element_cap(),
        expectations_met: checks.iter().all(|c| c.met),
        contradictions,
        budget_exceeded,
        checks,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

fn file_slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

impl Report {
    /// 0 when every expectation is met, 3 when a budget was exceeded, 1 when
    /// a check contradicted its expectation.
    pub fn exit_code(&self) -> i32 {
        if self.budget_exceeded > 0 {
            3
        } else if self.contradictions > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its wall time, byte-identical across runs.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("wall_time_ms");
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    /// One line per check.
    pub fn human_summary(&self) -> String {
        let mut out = format!("{} ({} checks)\n", self.experiment, self.checks.len());
        for c in &self.checks {
            let mark = match (c.met, c.verdict) {
                (_, Verdict::BudgetExceeded) => "BUDGET",
                (true, _) => "ok",
                (false, _) => "FAIL",
            };
            let verdict = match c.verdict {
                Verdict::Positive => "positive",
                Verdict::Negative => "negative",
                Verdict::BudgetExceeded => "budget exceeded",
            };
            let expect = match c.expect {
                Expectation::Positive => "positive",
                Expectation::Negative => "negative",
            };
            out.push_str(&format!("  [{mark}] {}. {} ({verdict}, expected {expect}): {}\n", c.index, c.label, c.summary));
            for w in c.witnesses.iter().take(3) {
                out.push_str(&format!("        witness: {w}\n"));
            }
        }
        out.push_str(&format!(
            "expectations met: {}, contradictions: {}, budget exceeded: {}, {} ms\n",
            self.expectations_met, self.contradictions, self.budget_exceeded, self.wall_time_ms
        ));
        out
    }

    /// Writes `<name>.json` and the CSV files into `dir`, returning the
    /// report path.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", file_slug(&self.experiment)));
        let mut f = std::fs::File::create(&path)?;
        f.write_all(self.to_json().as_bytes())?;
        f.write_all(b"\n")?;
        for c in &self.checks {
            for (name, content) in &c.artifacts {
                std::fs::write(dir.join(name), content)?;
            }
        }
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_check_list() {
        let spec = ExperimentSpec::from_json(r#"{"name": "empty"}"#).unwrap();
        let r = run(&spec).unwrap();
        assert!(r.checks.is_empty() && r.expectations_met);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn expectation_decides_exit_code() {
        let text = r#"{"name": "d", "groups": {"D": {"kind": "infinite_dihedral"}},
            "checks": [{"op": "finite_index", "group": "D", "subgroup": {"kind": "dihedral_rotations"},
                        "radius": 5, "max_rep_length": 3, "expect": "EXPECT"}]}"#;
        let neg = ExperimentSpec::from_json(&text.replace("EXPECT", "negative")).unwrap();
        assert_eq!(run(&neg).unwrap().exit_code(), 0);
        let pos = ExperimentSpec::from_json(&text.replace("EXPECT", "positive")).unwrap();
        let r = run(&pos).unwrap();
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.checks[0].verdict, Verdict::Negative);
    }

    #[test]
    fn budget_errors_do_not_stop_other_checks() {
        let text = r#"{"name": "b", "groups": {"F": {"kind": "free", "rank": 2}},
            "checks": [
              {"op": "finite_index", "group": "F", "subgroup": {"kind": "free_cyclic", "word": "b"}, "radius": 3},
              {"op": "almost_commutative", "group": "F", "radius": 2, "expect": "negative"}]}"#;
        let r = run(&ExperimentSpec::from_json(text).unwrap()).unwrap();
        assert_eq!(r.checks[0].verdict, Verdict::BudgetExceeded);
        assert!(r.checks[1].met);
        assert_eq!(r.exit_code(), 3);
    }
}
