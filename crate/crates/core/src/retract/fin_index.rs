use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, SubgroupSpec};
use crate::metric::{element_cap, Ball, MetricError};
use crate::sets::GrowthTable;

/// Upper bound on the number of transversals examined.
pub const DEFAULT_TRANSVERSAL_CAP: usize = 100_000;

/// Longest coset search before giving up on finite index.
const COSET_SEARCH_RADIUS: u32 = 24;
const COSET_SEARCH_ELEMENTS: usize = 200_000;
const MAX_COSETS: usize = 512;
const KEPT_SUMMARIES: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct TransversalSummary {
    pub representatives: Vec<String>,
    pub table: GrowthTable,
    pub stable: bool,
    pub strictly_increasing: bool,
    /// the longest commutators at the largest radius
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteIndexReport {
    pub subgroup: String,
    pub index: usize,
    /// radius at which coset enumeration closed
    pub coset_radius: u32,
    pub max_rep_length: u32,
    pub candidates_per_coset: Vec<usize>,
    pub transversals_checked: usize,
    pub truncated: bool,
    pub stable_count: usize,
    pub all_strictly_increasing: bool,
    pub positive: bool,
    /// a stable transversal when the verdict is positive
    pub witness: Option<TransversalSummary>,
    pub summaries: Vec<TransversalSummary>,
}

/// Searches right coset transversals containing `1`, built from coset
/// elements of length at most `max_rep_length` (default twice the index),
/// for one whose commutator set with the `H`-ball stays stable for radii
/// `2..=radius`.
pub fn finite_index_criterion(
    subgroup: &SubgroupSpec,
    radius: u32,
    max_rep_length: Option<u32>,
    cap: usize,
) -> Result<FiniteIndexReport> {
    let g = &subgroup.ambient;
    let gens = g.generator_elements();
    let search = match Ball::try_new(g, &gens, COSET_SEARCH_RADIUS, element_cap().min(COSET_SEARCH_ELEMENTS)) {
        Ok(b) => b,
        Err(MetricError::BudgetExceeded { partial, .. }) => *partial,
        Err(e) => return Err(e.into()),
    };
    let same_coset = |x: &Element, y: &Element| subgroup.contains(&g.mul(x, &g.inv(y)));
    let mut reps: Vec<Element> = Vec::new();
    let mut closed_at = None;
    for k in 0..=search.radius() {
        let before = reps.len();
        for x in search.stratum(k) {
            if !reps.iter().any(|r| same_coset(x, r)) {
                reps.push(x.clone());
                if reps.len() > MAX_COSETS {
                    return Err(Error::CosetBudget { radius: k, cosets: reps.len() });
                }
            }
        }
        if k > 0 && reps.len() == before {
            closed_at = Some(k);
            break;
        }
    }
    let Some(coset_radius) = closed_at else {
        return Err(Error::CosetBudget { radius: search.radius(), cosets: reps.len() });
    };
    let index = reps.len();
    let max_len = max_rep_length.unwrap_or(2 * index as u32);
    let pool = if max_len <= search.radius() { search } else { Ball::complete(g, &gens, max_len)? };
    let mut candidates: Vec<Vec<Element>> = vec![Vec::new(); index];
    candidates[0].push(g.identity());
    for x in pool.within(max_len) {
        let c = reps.iter().position(|r| same_coset(x, r)).expect("cosets closed");
        if c > 0 {
            candidates[c].push(x.clone());
        }
    }

    let total: f64 = candidates.iter().map(|c| c.len() as f64).product();
    let truncated = total > cap as f64;
    let mut transversals: Vec<Vec<Element>> = vec![Vec::new()];
    for cands in &candidates {
        let mut next = Vec::new();
        'outer: for t in &transversals {
            for c in cands {
                if next.len() >= cap {
                    break 'outer;
                }
                let mut t = t.clone();
                t.push(c.clone());
                next.push(t);
            }
        }
        transversals = next;
    }

    let h_ball = Ball::complete(g, &subgroup.generators, radius)?;
    let radii: Vec<u32> = (2..=radius.max(2)).collect();
    let summaries: Vec<TransversalSummary> = transversals
        .par_iter()
        .map(|t| {
            let mut first: FxHashMap<Element, u32> = FxHashMap::default();
            for (i, h) in h_ball.elements().iter().enumerate() {
                let d = h_ball.distance_at(i);
                for x in t {
                    first.entry(g.commutator(h, x)).and_modify(|w| *w = (*w).min(d)).or_insert(d);
                }
            }
            let sizes = radii.iter().map(|&r| first.values().filter(|&&d| d <= r).count()).collect();
            let table = GrowthTable { radii: radii.clone(), sizes };
            let mut longest: Vec<(u32, String)> = first.iter().map(|(e, &d)| (d, g.format(e))).collect();
            longest.sort_by(|a, b| b.cmp(a));
            TransversalSummary {
                representatives: t.iter().map(|x| g.format(x)).collect(),
                stable: table.stability().is_stable(),
                strictly_increasing: table.strictly_increasing(),
                witnesses: longest.into_iter().take(4).map(|p| p.1).collect(),
                table,
            }
        })
        .collect();
    let stable_count = summaries.iter().filter(|s| s.stable).count();
    let witness = summaries.iter().find(|s| s.stable).cloned();
    Ok(FiniteIndexReport {
        subgroup: subgroup.name.clone(),
        index,
        coset_radius,
        max_rep_length: max_len,
        candidates_per_coset: candidates.iter().map(Vec::len).collect(),
        transversals_checked: summaries.len(),
        truncated,
        stable_count,
        all_strictly_increasing: summaries.iter().all(|s| s.strictly_increasing),
        positive: stable_count > 0,
        witness,
        summaries: summaries.into_iter().take(KEPT_SUMMARIES).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn dihedral_is_negative() {
        let d = Group::infinite_dihedral();
        let h = SubgroupSpec::dihedral_rotations(d).unwrap();
        let rep = finite_index_criterion(&h, 10, Some(8), DEFAULT_TRANSVERSAL_CAP).unwrap();
        assert_eq!(rep.index, 2);
        assert_eq!(rep.transversals_checked, 15);
        assert!(rep.all_strictly_increasing);
        assert!(!rep.positive);
        let sizes: Vec<usize> = (2..=10).map(|r| 2 * r + 1).collect();
        assert!(rep.summaries.iter().all(|s| s.table.sizes == sizes));
    }

    #[test]
    fn product_with_finite_is_positive() {
        let g = Group::direct_product(Group::free_abelian(1).unwrap(), Group::cyclic(2).unwrap());
        let h = SubgroupSpec::left_factor(g).unwrap();
        let rep = finite_index_criterion(&h, 6, None, DEFAULT_TRANSVERSAL_CAP).unwrap();
        assert_eq!(rep.index, 2);
        assert!(rep.positive);
        assert_eq!(rep.witness.unwrap().table.sizes.last(), Some(&1));
    }

    #[test]
    fn infinite_index_exhausts_budget() {
        let f2 = Group::free(2).unwrap();
        let h = SubgroupSpec::free_cyclic(f2, &[2]).unwrap();
        assert!(matches!(finite_index_criterion(&h, 4, None, 10), Err(Error::CosetBudget { .. })));
    }

    #[test]
    fn cap_truncates() {
        let g = Group::direct_product(Group::free_abelian(1).unwrap(), Group::cyclic(3).unwrap());
        let h = SubgroupSpec::left_factor(g).unwrap();
        let rep = finite_index_criterion(&h, 4, Some(6), 5).unwrap();
        assert!(rep.truncated);
        assert_eq!(rep.transversals_checked, 5);
    }
}
