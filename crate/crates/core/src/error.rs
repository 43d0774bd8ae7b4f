use thiserror::Error;

use crate::group::GroupError;
use crate::metric::MetricError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("set product exceeds {cap} elements")]
    SetBudget { cap: usize },
    #[error("word {0} is not cyclically reduced or is empty")]
    NotCyclicallyReduced(String),
    #[error("quasimorphism looks bounded along {element}: estimate {estimate}")]
    BoundedQuasimorphism { element: String, estimate: String },
    #[error("prerequisite {which} fails within horizon: {detail}")]
    UnstablePrerequisite { which: String, detail: String },
    #[error("{element} is not central: it does not commute with {witness}")]
    NotCentral { element: String, witness: String },
    #[error("map is not coarsely surjective: {witness} is at distance {distance} from the image")]
    NotCoarselySurjective { witness: String, distance: String },
    #[error("defect set of {0} grows within horizon")]
    UnstableDefect(String),
    #[error("maps are not composable: {0}")]
    NotComposable(String),
    #[error("invalid extension bundle: {0}")]
    InvalidBundle(String),
    #[error("coset enumeration did not close by radius {radius} ({cosets} cosets found)")]
    CosetBudget { radius: u32, cosets: usize },
}

impl Error {
    /// True for errors caused by a size or radius budget rather than by the input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::SetBudget { .. } | Error::CosetBudget { .. } | Error::Metric(MetricError::BudgetExceeded { .. })
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
