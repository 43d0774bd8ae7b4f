//! Finite element sets, products of sets and radius-indexed growth tables.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, GroupRef};

pub type ElementSet = BTreeSet<Element>;

/// Upper bound on the size of any set product.
pub const SET_CAP: usize = 2_000_000;

/// Number of consecutive equal sizes that counts as stable.
pub const STABLE_WINDOW: usize = 3;

pub fn inverse_set(group: &GroupRef, a: &ElementSet) -> ElementSet {
    a.iter().map(|x| group.inv(x)).collect()
}

/// `{ab : a ∈ A, b ∈ B}`.
pub fn product_set(group: &GroupRef, a: &ElementSet, b: &ElementSet) -> Result<ElementSet> {
    if a.len().saturating_mul(b.len()) > SET_CAP * 4 {
        return Err(Error::SetBudget { cap: SET_CAP });
    }
    let a: Vec<&Element> = a.iter().collect();
    let parts: Vec<Vec<Element>> = a
        .par_iter()
        .map(|x| b.iter().map(|y| group.mul(x, y)).collect())
        .collect();
    let out: ElementSet = parts.into_iter().flatten().collect();
    if out.len() > SET_CAP {
        return Err(Error::SetBudget { cap: SET_CAP });
    }
    Ok(out)
}

/// Product of the listed sets in order.
pub fn product_of(group: &GroupRef, sets: &[&ElementSet]) -> Result<ElementSet> {
    let mut acc: ElementSet = [group.identity()].into_iter().collect();
    for s in sets {
        acc = product_set(group, &acc, s)?;
    }
    Ok(acc)
}

/// `Aⁿ`, with `A⁰ = {1}`.
pub fn power_set(group: &GroupRef, a: &ElementSet, n: usize) -> Result<ElementSet> {
    let sets = vec![a; n];
    product_of(group, &sets)
}

/// `C(K,T) = {ktk⁻¹t⁻¹}`.
pub fn commutator_set(group: &GroupRef, k: &[Element], t: &[Element]) -> ElementSet {
    let parts: Vec<Vec<Element>> = k
        .par_iter()
        .map(|x| t.iter().map(|y| group.commutator(x, y)).collect())
        .collect();
    parts.into_iter().flatten().collect()
}

pub fn format_set(group: &GroupRef, s: &ElementSet) -> Vec<String> {
    s.iter().map(|e| group.format(e)).collect()
}

/// Verdict on a growth table at its largest radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "horizon", rename_all = "snake_case")]
pub enum Stability {
    StableWithin(u32),
    GrowingAt(u32),
}

impl Stability {
    pub fn is_stable(self) -> bool {
        matches!(self, Stability::StableWithin(_))
    }
}

/// Set sizes indexed by radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub radii: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl GrowthTable {
    pub fn horizon(&self) -> u32 {
        self.radii.last().copied().unwrap_or(0)
    }

    /// Stable when the last `window` sizes coincide.
    pub fn stability_with(&self, window: usize) -> Stability {
        let n = self.sizes.len();
        let w = window.min(n).max(1);
        let tail = &self.sizes[n - w..];
        if n > 0 && tail.iter().all(|&s| s == tail[0]) {
            Stability::StableWithin(self.horizon())
        } else {
            Stability::GrowingAt(self.horizon())
        }
    }

    pub fn stability(&self) -> Stability {
        self.stability_with(STABLE_WINDOW)
    }

    pub fn strictly_increasing(&self) -> bool {
        self.sizes.windows(2).all(|w| w[0] < w[1])
    }
}
