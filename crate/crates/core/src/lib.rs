pub mod action;
pub mod catalog;
pub mod error;
pub mod experiment;
pub mod group;
pub mod metric;
pub mod qhom;
pub mod qmorph;
pub mod retract;
pub mod sets;

pub use error::{Error, Result};
