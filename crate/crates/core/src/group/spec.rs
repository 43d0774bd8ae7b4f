use serde::{Deserialize, Serialize};

use super::{Alpha, Cocycle, FiniteTable, Group, GroupError, GroupRef};

/// JSON description of a group, e.g.
/// `{"kind": "central_extension", "z_rank": 1, "base": {"kind": "free_abelian", "rank": 1},
///   "cocycle": {"builtin": "rounding", "alpha_num": 1, "alpha_den": 2, "alpha_sqrt": true}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Free {
        rank: usize,
    },
    FreeAbelian {
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
    InfiniteDihedral,
    Heisenberg,
    BaumslagSolitar {
        n: u32,
    },
    Finite {
        table: Vec<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Cyclic {
        order: u32,
    },
    DirectProduct {
        left: Box<GroupSpec>,
        right: Box<GroupSpec>,
    },
    CentralExtension {
        z_rank: usize,
        base: Box<GroupSpec>,
        cocycle: CocycleSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    /// `zero`, `rounding` or `heisenberg`
    pub builtin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_num: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_den: Option<i64>,
    /// interpret α as `sqrt(alpha_num/alpha_den)`
    #[serde(default)]
    pub alpha_sqrt: bool,
}

impl CocycleSpec {
    pub fn build(&self) -> Result<Cocycle, GroupError> {
        match self.builtin.as_str() {
            "zero" => Ok(Cocycle::zero()),
            "heisenberg" => Ok(Cocycle::heisenberg()),
            "rounding" => {
                let (Some(num), Some(den)) = (self.alpha_num, self.alpha_den) else {
                    return Err(GroupError::InvalidParameters(
                        "rounding cocycle needs alpha_num and alpha_den".into(),
                    ));
                };
                let alpha = if self.alpha_sqrt {
                    Alpha::sqrt_of(num, den)
                } else {
                    Alpha::rational(num, den)
                };
                Ok(Cocycle::rounding(alpha))
            }
            other => Err(GroupError::InvalidParameters(format!("unknown cocycle {other:?}"))),
        }
    }
}

impl GroupSpec {
    pub fn build(&self) -> Result<GroupRef, GroupError> {
        match self {
            GroupSpec::Free { rank } => Group::free(*rank),
            GroupSpec::FreeAbelian { rank, names } => match names {
                Some(n) if n.len() != *rank => Err(GroupError::InvalidParameters(format!(
                    "{} names for rank {rank}",
                    n.len()
                ))),
                Some(n) => Group::free_abelian_named(n),
                None => Group::free_abelian(*rank),
            },
            GroupSpec::InfiniteDihedral => Ok(Group::infinite_dihedral()),
            GroupSpec::Heisenberg => Ok(Group::heisenberg()),
            GroupSpec::BaumslagSolitar { n } => Group::baumslag_solitar(*n),
            GroupSpec::Finite { table, generators, name } => Group::finite(
                name.as_deref().unwrap_or("finite"),
                FiniteTable::new(table.clone())?,
                generators.clone(),
            ),
            GroupSpec::Cyclic { order } => Group::cyclic(*order),
            GroupSpec::DirectProduct { left, right } => {
                Ok(Group::direct_product(left.build()?, right.build()?))
            }
            GroupSpec::CentralExtension { z_rank, base, cocycle } => {
                Group::central_extension(*z_rank, base.build()?, cocycle.build()?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rounding_extension() {
        let json = r#"{"kind": "central_extension", "z_rank": 1,
            "base": {"kind": "free_abelian", "rank": 1},
            "cocycle": {"builtin": "rounding", "alpha_num": 1, "alpha_den": 2, "alpha_sqrt": true}}"#;
        let spec: GroupSpec = serde_json::from_str(json).unwrap();
        let g = spec.build().unwrap();
        assert_eq!(g.kind_name(), "central_extension");
        assert_eq!(g.generators().len(), 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GroupSpec::Free { rank: 0 }.build().is_err());
        assert!(GroupSpec::BaumslagSolitar { n: 1 }.build().is_err());
        let spec: Result<GroupSpec, _> = serde_json::from_str(r#"{"kind": "hyperbolic"}"#);
        assert!(spec.is_err());
        let missing = CocycleSpec {
            builtin: "rounding".into(),
            alpha_num: None,
            alpha_den: Some(2),
            alpha_sqrt: false,
        };
        assert!(missing.build().is_err());
    }

    #[test]
    fn finite_table_from_json() {
        let json = r#"{"kind": "finite", "table": [[0,1,2],[1,2,0],[2,0,1]], "generators": [1]}"#;
        let g: GroupSpec = serde_json::from_str(json).unwrap();
        assert_eq!(g.build().unwrap().generators().len(), 1);
        let open = r#"{"kind": "finite", "table": [[0,1],[1,5]]}"#;
        let g: GroupSpec = serde_json::from_str(open).unwrap();
        assert!(g.build().is_err());
    }
}
