//! JSON experiment specs, their validation, execution and reports.

mod ops;
mod presets;
mod report;

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{cayley_action, line_action_from_qm, Point, QuasiAction};
use crate::catalog::{brooks_retraction, central_shift, letters};
use crate::group::{Element, GroupRef, GroupSpec, SubgroupSpec};
use crate::qhom::QHom;
use crate::qmorph::Quasimorphism;
use crate::retract::SesBundle;

pub use presets::{preset, presets, Preset};
pub use report::{run, CheckRecord, Report, Verdict, ARTIFACT_DIR};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("check {index} ({op}): {message}")]
    Check { index: usize, op: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    #[default]
    Positive,
    Negative,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub groups: BTreeMap<String, GroupSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    /// directory for the report and CSV files
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub expect: Expectation,
    #[serde(flatten)]
    pub op: Op,
}

fn default_horizon() -> u32 {
    16
}

fn default_surjectivity() -> u64 {
    crate::action::DEFAULT_SURJECTIVITY_BOUND
}

fn default_triples() -> usize {
    10_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    DefectSet {
        map: MapSpec,
        radius: u32,
    },
    DualDefectSet {
        map: MapSpec,
        radius: u32,
    },
    /// product (n = 3, 4), inverse, conjugation and commutator bounds plus
    /// agreement of the primal and dual defect verdicts
    LemmaSuite {
        map: MapSpec,
        radius: u32,
        #[serde(default = "default_horizon")]
        horizon: u32,
    },
    ProductBound {
        map: MapSpec,
        radius: u32,
        n: usize,
    },
    InverseBound {
        map: MapSpec,
        radius: u32,
    },
    ConjugationBound {
        map: MapSpec,
        radius: u32,
    },
    CommutatorImage {
        map: MapSpec,
        radius: u32,
        #[serde(default = "default_horizon")]
        horizon: u32,
    },
    CentralPerturbation {
        map: MapSpec,
        values: Vec<String>,
        radius: u32,
    },
    GoodQh {
        map: MapSpec,
        radius: u32,
        #[serde(default = "default_horizon")]
        horizon: u32,
    },
    AlmostCommutative {
        group: String,
        radius: u32,
    },
    CyclicRetract {
        group: String,
        qm: QmSpec,
        element: String,
        radius: u32,
        n_max: u32,
    },
    Distortion {
        group: String,
        subgroup: SubgroupRef,
        radius: u32,
        #[serde(default = "default_horizon")]
        horizon: u32,
    },
    FiniteIndex {
        group: String,
        subgroup: SubgroupRef,
        radius: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_rep_length: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
    },
    NormalizeRetraction {
        map: MapSpec,
        group: String,
        subgroup: SubgroupRef,
        radius: u32,
    },
    TransversalRetraction {
        bundle: BundleSpec,
        radius: u32,
    },
    /// transversal retraction, the section recovered from it and the strict
    /// quasi-isomorphism with the product
    SplitRoundtrip {
        bundle: BundleSpec,
        radius: u32,
        #[serde(default = "default_horizon")]
        horizon: u32,
    },
    Symmetry {
        group: String,
        subgroup: SubgroupRef,
        t: Vec<String>,
        radius: u32,
    },
    PowerCommutators {
        group: String,
        subgroup: SubgroupRef,
        t: Vec<String>,
        radius: u32,
        n_max: usize,
    },
    LineAction {
        group: String,
        qm: QmSpec,
        radius: u32,
        #[serde(default = "default_triples")]
        triples: usize,
        #[serde(default)]
        seed: u64,
    },
    InducedAction {
        map: MapSpec,
        action: ActionSpec,
        /// intrinsic ball of this subgroup of the target, for coarse surjectivity
        sample: SubgroupRef,
        sample_radius: u32,
        points: Vec<String>,
        radius: u32,
        #[serde(default = "default_surjectivity")]
        surjectivity_bound: u64,
        #[serde(default = "default_horizon")]
        horizon: u32,
    },
    StableLength {
        action: ActionSpec,
        element: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<String>,
        n_max: u32,
        /// expected `τ` as an exact fraction
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<String>,
    },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::DefectSet { .. } => "defect_set",
            Op::DualDefectSet { .. } => "dual_defect_set",
            Op::LemmaSuite { .. } => "lemma_suite",
            Op::ProductBound { .. } => "product_bound",
            Op::InverseBound { .. } => "inverse_bound",
            Op::ConjugationBound { .. } => "conjugation_bound",
            Op::CommutatorImage { .. } => "commutator_image",
            Op::CentralPerturbation { .. } => "central_perturbation",
            Op::GoodQh { .. } => "good_qh",
            Op::AlmostCommutative { .. } => "almost_commutative",
            Op::CyclicRetract { .. } => "cyclic_retract",
            Op::Distortion { .. } => "distortion",
            Op::FiniteIndex { .. } => "finite_index",
            Op::NormalizeRetraction { .. } => "normalize_retraction",
            Op::TransversalRetraction { .. } => "transversal_retraction",
            Op::SplitRoundtrip { .. } => "split_roundtrip",
            Op::Symmetry { .. } => "symmetry",
            Op::PowerCommutators { .. } => "power_commutators",
            Op::LineAction { .. } => "line_action",
            Op::InducedAction { .. } => "induced_action",
            Op::StableLength { .. } => "stable_length",
        }
    }

    /// The ball radius of the check, if it has one.
    pub fn radius_mut(&mut self) -> Option<&mut u32> {
        match self {
            Op::DefectSet { radius, .. }
            | Op::DualDefectSet { radius, .. }
            | Op::LemmaSuite { radius, .. }
            | Op::ProductBound { radius, .. }
            | Op::InverseBound { radius, .. }
            | Op::ConjugationBound { radius, .. }
            | Op::CommutatorImage { radius, .. }
            | Op::CentralPerturbation { radius, .. }
            | Op::GoodQh { radius, .. }
            | Op::AlmostCommutative { radius, .. }
            | Op::CyclicRetract { radius, .. }
            | Op::Distortion { radius, .. }
            | Op::FiniteIndex { radius, .. }
            | Op::NormalizeRetraction { radius, .. }
            | Op::TransversalRetraction { radius, .. }
            | Op::SplitRoundtrip { radius, .. }
            | Op::Symmetry { radius, .. }
            | Op::PowerCommutators { radius, .. }
            | Op::LineAction { radius, .. }
            | Op::InducedAction { radius, .. } => Some(radius),
            Op::StableLength { .. } => None,
        }
    }

    pub fn radius(&self) -> Option<u32> {
        self.clone().radius_mut().map(|r| *r)
    }
}

/// A named quasi-homomorphism.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity { group: String },
    /// the homomorphism sending the source generators to `images`
    Homomorphism { source: String, target: String, images: Vec<String> },
    BrooksRetraction { group: String, word: String },
    /// the section carried by a bundle
    Section { bundle: BundleSpec },
    Projection { bundle: BundleSpec },
    /// `φ(g)·aᵢ` for central `aᵢ`, indexed by the coordinate sum of `g`
    CentralShift { base: Box<MapSpec>, values: Vec<String> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BundleSpec {
    CentralExtension { group: String },
    HeisenbergCenter { group: String },
    DihedralRotations { group: String },
    DirectProduct { group: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubgroupRef {
    Whole,
    HeisenbergCenter,
    HeisenbergAC,
    DihedralRotations,
    BsTranslations,
    BsDilations,
    FreeCyclic { word: String },
    LeftFactor,
    RightFactor,
    ExtensionFiber,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QmSpec {
    Zero,
    Brooks { word: String },
    ExponentSum { generator: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionSpec {
    Cayley { group: String, radius: u32 },
    Line { group: String, qm: QmSpec },
}

/// Groups built from a spec, used to resolve every name in its checks.
pub struct Context {
    groups: BTreeMap<String, GroupRef>,
}

type Resolved<T> = Result<T, String>;

fn msg<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

impl Context {
    pub fn new(spec: &ExperimentSpec) -> Result<Self, ConfigError> {
        let mut groups = BTreeMap::new();
        for (name, g) in &spec.groups {
            let built = g.build().map_err(|e| ConfigError::Invalid(format!("group {name:?}: {e}")))?;
            groups.insert(name.clone(), built);
        }
        Ok(Context { groups })
    }

    pub fn group(&self, name: &str) -> Resolved<GroupRef> {
        self.groups.get(name).cloned().ok_or_else(|| format!("unknown group {name:?}"))
    }

    pub fn element(&self, group: &GroupRef, word: &str) -> Resolved<Element> {
        group.parse(word).map_err(msg)
    }

    pub fn elements(&self, group: &GroupRef, words: &[String]) -> Resolved<Vec<Element>> {
        words.iter().map(|w| self.element(group, w)).collect()
    }

    pub fn bundle(&self, spec: &BundleSpec) -> Resolved<SesBundle> {
        let r = match spec {
            BundleSpec::CentralExtension { group } => SesBundle::from_central_extension(self.group(group)?),
            BundleSpec::HeisenbergCenter { group } => SesBundle::heisenberg_center(self.group(group)?),
            BundleSpec::DihedralRotations { group } => SesBundle::dihedral_rotations(self.group(group)?),
            BundleSpec::DirectProduct { group } => SesBundle::direct_product(self.group(group)?),
        };
        r.map_err(msg)
    }

    pub fn map(&self, spec: &MapSpec) -> Resolved<QHom> {
        match spec {
            MapSpec::Identity { group } => Ok(QHom::identity(self.group(group)?)),
            MapSpec::Homomorphism { source, target, images } => {
                let (s, t) = (self.group(source)?, self.group(target)?);
                if images.len() != s.generators().len() {
                    return Err(format!("{} images for {} generators", images.len(), s.generators().len()));
                }
                let images = self.elements(&t, images)?;
                Ok(QHom::from_generator_images(s, t, "hom", images))
            }
            MapSpec::BrooksRetraction { group, word } => brooks_retraction(&self.group(group)?, word).map_err(msg),
            MapSpec::Section { bundle } => Ok(self.bundle(bundle)?.section),
            MapSpec::Projection { bundle } => Ok(self.bundle(bundle)?.projection),
            MapSpec::CentralShift { base, values } => {
                let phi = self.map(base)?;
                let values = self.elements(&phi.target, values)?;
                central_shift(&phi, values).map_err(msg)
            }
        }
    }

    pub fn subgroup(&self, group: &GroupRef, spec: &SubgroupRef) -> Resolved<SubgroupSpec> {
        let g = group.clone();
        let r = match spec {
            SubgroupRef::Whole => {
                let gens = g.generator_elements();
                return Ok(SubgroupSpec::exact(g, "G", gens, |_| true));
            }
            SubgroupRef::HeisenbergCenter => SubgroupSpec::heisenberg_center(g),
            SubgroupRef::HeisenbergAC => SubgroupSpec::heisenberg_a_c(g),
            SubgroupRef::DihedralRotations => SubgroupSpec::dihedral_rotations(g),
            SubgroupRef::BsTranslations => SubgroupSpec::bs_translations(g),
            SubgroupRef::BsDilations => SubgroupSpec::bs_dilations(g),
            SubgroupRef::FreeCyclic { word } => {
                let w = letters(&g, word).map_err(msg)?;
                SubgroupSpec::free_cyclic(g, &w)
            }
            SubgroupRef::LeftFactor => SubgroupSpec::left_factor(g),
            SubgroupRef::RightFactor => SubgroupSpec::right_factor(g),
            SubgroupRef::ExtensionFiber => SubgroupSpec::extension_fiber(g),
        };
        r.map_err(msg)
    }

    pub fn qm(&self, group: &GroupRef, spec: &QmSpec) -> Resolved<Quasimorphism> {
        match spec {
            QmSpec::Zero => Ok(Quasimorphism::zero(group.clone())),
            QmSpec::Brooks { word } => {
                let w = letters(group, word).map_err(msg)?;
                Quasimorphism::brooks(group.clone(), &w).map_err(msg)
            }
            QmSpec::ExponentSum { generator } => {
                let i = group.generator_index(generator).ok_or_else(|| format!("unknown generator {generator:?}"))?;
                Quasimorphism::exponent_sum(group.clone(), i).map_err(msg)
            }
        }
    }

    pub fn action(&self, spec: &ActionSpec) -> Resolved<QuasiAction> {
        match spec {
            ActionSpec::Cayley { group, radius } => {
                let g = self.group(group)?;
                cayley_action(&g, &g.generator_elements(), *radius).map_err(msg)
            }
            ActionSpec::Line { group, qm } => {
                let g = self.group(group)?;
                Ok(line_action_from_qm(&self.qm(&g, qm)?))
            }
        }
    }

    /// A point of the action's space: an exact fraction on the line, a word
    /// in a Cayley ball.
    pub fn point(&self, action: &QuasiAction, text: &str) -> Resolved<Point> {
        match &action.space {
            crate::action::SpaceModel::RealLine => {
                text.trim().parse::<Rational64>().map(Point::Real).map_err(|e| format!("point {text:?}: {e}"))
            }
            crate::action::SpaceModel::CayleyBall { ball, .. } => {
                let p = Point::Group(self.element(ball.group(), text)?);
                if action.space.contains(&p) {
                    Ok(p)
                } else {
                    Err(format!("point {text:?} lies outside the ball"))
                }
            }
        }
    }
}

impl ExperimentSpec {
    /// Parses a spec, reporting the position of syntax and schema errors.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Sets the radius of every check that has one.
    pub fn override_radius(&mut self, radius: u32) {
        for c in &mut self.checks {
            if let Some(r) = c.op.radius_mut() {
                *r = radius;
            }
        }
    }

    /// Resolves every name and word in the spec without running anything.
    pub fn validate(&self) -> Result<(), ConfigError> {
        ops::prepare(self).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_positions() {
        let e = ExperimentSpec::from_json("{\n  \"name\": 3\n}").unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"name": "x", "groups": {"Z": {"kind": "free_abelian", "rank": 1}},
            "checks": [{"op": "defect_set", "map": {"kind": "identity", "group": "Z"}, "radius": 2, "bogus": 1}]}"#;
        assert!(ExperimentSpec::from_json(text).is_err());
        let ok = text.replace(", \"bogus\": 1", "");
        let spec = ExperimentSpec::from_json(&ok).unwrap();
        assert_eq!(spec.checks[0].expect, Expectation::Positive);
        spec.validate().unwrap();
    }

    #[test]
    fn unresolved_names_fail_validation() {
        let text = r#"{"name": "x", "checks": [{"op": "almost_commutative", "group": "G", "radius": 2}]}"#;
        let spec = ExperimentSpec::from_json(text).unwrap();
        assert!(matches!(spec.validate(), Err(ConfigError::Check { index: 1, .. })));
    }

    #[test]
    fn radius_override_reaches_every_check() {
        let mut spec = preset("lemma-suite-section2").unwrap();
        spec.override_radius(2);
        assert!(spec.checks.iter().all(|c| c.op.radius().is_none_or(|r| r == 2)));
    }
}
