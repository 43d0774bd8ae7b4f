use super::{ConfigError, ExperimentSpec};

/// A built-in experiment.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub json: &'static str,
}

macro_rules! preset {
    ($name:literal, $description:literal) => {
        Preset {
            name: $name,
            description: $description,
            json: include_str!(concat!("../../presets/", $name, ".json")),
        }
    };
}

const PRESETS: [Preset; 10] = [
    preset!("dihedral-not-retract", "finite index criterion fails for the rotations of D_inf"),
    preset!("heisenberg-center-distorted", "the Heisenberg center is distorted, hence not a quasi-retract"),
    preset!("bs12-a-distorted", "<a> in BS(1,2) is exponentially distorted"),
    preset!("brooks-f2", "quasi-retraction of F2 onto <ab> from the Brooks quasimorphism h_ab"),
    preset!("rounding-extension-split", "the bounded rounding extension of Z is quasi-split"),
    preset!("heisenberg-extension-unsplit", "the Heisenberg extension of Z^2 is not quasi-split"),
    preset!("thm44-roundtrip", "retraction, section and strict quasi-isomorphism with the product"),
    preset!("lemma-suite-section2", "bound checks on the catalog quasi-homomorphisms"),
    preset!("induced-action-f2", "line quasi-actions and actions induced along Brooks retractions"),
    preset!("stable-lengths", "stable lengths on a dihedral Cayley ball and on the line"),
];

pub fn presets() -> &'static [Preset] {
    &PRESETS
}

pub fn preset(name: &str) -> Result<ExperimentSpec, ConfigError> {
    let p = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
    ExperimentSpec::from_json(p.json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        assert_eq!(presets().len(), 10);
        for p in presets() {
            let spec = preset(p.name).unwrap();
            assert_eq!(spec.name, p.name);
            spec.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
        assert!(preset("nope").is_err());
    }
}
