//! Running an experiment spec from JSON, as the `qhlab run` command does.

use qhlab::experiment::{preset, run, ExperimentSpec};

const SPEC: &str = r#"{
  "name": "example",
  "groups": {"F2": {"kind": "free", "rank": 2}, "D": {"kind": "infinite_dihedral"}},
  "checks": [
    {"op": "defect_set", "map": {"kind": "brooks_retraction", "group": "F2", "word": "a b"}, "radius": 4},
    {"op": "finite_index", "group": "D", "subgroup": {"kind": "dihedral_rotations"},
     "radius": 8, "max_rep_length": 4, "expect": "negative"}
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec::from_json(SPEC)?;
    let report = run(&spec)?;
    print!("{}", report.human_summary());
    println!("exit code {}", report.exit_code());

    let dir = std::env::temp_dir().join("qhlab-example");
    let path = preset("stable-lengths").map(|s| run(&s))??.write(&dir)?;
    println!("preset report written to {}", path.display());
    Ok(())
}
