//! Word metrics, ball enumeration and subgroup distortion.

use std::cmp::Ordering;
use std::fmt;
use std::io;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::OnceLock;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Element, GroupRef, SubgroupSpec};

/// Element cap per ball unless configured otherwise.
pub const DEFAULT_ELEMENT_CAP: usize = 5_000_000;

const PARALLEL_FRONTIER: usize = 2048;

static ELEMENT_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_ELEMENT_CAP);

/// Process-wide element cap used by [`Ball::new`] and [`Ball::complete`].
pub fn element_cap() -> usize {
    ELEMENT_CAP.load(AtomicOrdering::Relaxed)
}

pub fn set_element_cap(cap: usize) {
    ELEMENT_CAP.store(cap.max(1), AtomicOrdering::Relaxed);
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("ball budget of {cap} elements exceeded at radius {reached}")]
    BudgetExceeded {
        cap: usize,
        reached: u32,
        partial: Box<Ball>,
    },
    #[error("subgroup generator {0} is not in the subgroup")]
    GeneratorNotInSubgroup(String),
}

/// Inverse-closed generating set without the identity, order preserved.
pub fn symmetric_closure(group: &GroupRef, gens: &[Element]) -> Vec<Element> {
    let mut out: Vec<Element> = Vec::with_capacity(2 * gens.len());
    for g in gens {
        for h in [g.clone(), group.inv(g)] {
            if !group.is_identity(&h) && !out.contains(&h) {
                out.push(h);
            }
        }
    }
    out
}

/// Distance value that is either exact or known to exceed the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Exact(u64),
    AboveHorizon,
}

impl Distance {
    pub fn exact(self) -> Option<u64> {
        match self {
            Distance::Exact(d) => Some(d),
            Distance::AboveHorizon => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Distance::Exact(_))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Distance::Exact(a), Distance::Exact(b)) => a.cmp(b),
            (Distance::Exact(_), Distance::AboveHorizon) => Ordering::Less,
            (Distance::AboveHorizon, Distance::Exact(_)) => Ordering::Greater,
            (Distance::AboveHorizon, Distance::AboveHorizon) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exact(d) => write!(f, "{d}"),
            Distance::AboveHorizon => f.write_str("above horizon"),
        }
    }
}

/// Breadth-first enumeration state shared by [`Ball`] and [`word_length`].
struct Bfs {
    group: GroupRef,
    gens: Vec<Element>,
    elements: Vec<Element>,
    offsets: Vec<usize>,
    index: FxHashMap<Element, usize>,
    cap: usize,
    complete: bool,
}

impl Bfs {
    fn new(group: &GroupRef, gens: &[Element], cap: usize) -> Self {
        let id = group.identity();
        let mut index = FxHashMap::default();
        index.insert(id.clone(), 0);
        Bfs {
            group: group.clone(),
            gens: symmetric_closure(group, gens),
            elements: vec![id],
            offsets: vec![0, 1],
            index,
            cap,
            complete: true,
        }
    }

    fn radius(&self) -> u32 {
        (self.offsets.len() - 2) as u32
    }

    /// Adds the next stratum. Returns false once the cap has been hit.
    fn step(&mut self) -> bool {
        if !self.complete {
            return false;
        }
        let k = self.offsets.len() - 2;
        let frontier = &self.elements[self.offsets[k]..self.offsets[k + 1]];
        let (group, gens) = (&self.group, &self.gens);
        let products: Vec<Element> = if frontier.len() >= PARALLEL_FRONTIER {
            frontier
                .par_iter()
                .flat_map_iter(|g| gens.iter().map(move |s| group.mul(g, s)))
                .collect()
        } else {
            frontier
                .iter()
                .flat_map(|g| gens.iter().map(move |s| group.mul(g, s)))
                .collect()
        };
        for p in products {
            if self.index.contains_key(&p) {
                continue;
            }
            if self.elements.len() >= self.cap {
                self.complete = false;
                break;
            }
            self.index.insert(p.clone(), self.elements.len());
            self.elements.push(p);
        }
        self.offsets.push(self.elements.len());
        self.complete
    }

    fn into_ball(self) -> Ball {
        let mut dist = vec![0u32; self.elements.len()];
        for k in 0..self.offsets.len() - 1 {
            for d in &mut dist[self.offsets[k]..self.offsets[k + 1]] {
                *d = k as u32;
            }
        }
        Ball {
            group: self.group,
            gens: self.gens,
            radius: (self.offsets.len() - 2) as u32,
            elements: self.elements,
            offsets: self.offsets,
            index: self.index,
            dist,
            complete: self.complete,
        }
    }
}

/// All elements within word distance `radius` of the identity, stratified by
/// distance. Strata are stored contiguously, so `within(r)` is a prefix.
#[derive(Clone, Debug)]
pub struct Ball {
    group: GroupRef,
    gens: Vec<Element>,
    radius: u32,
    elements: Vec<Element>,
    offsets: Vec<usize>,
    index: FxHashMap<Element, usize>,
    dist: Vec<u32>,
    complete: bool,
}

/// JSON summary `{radius, sizes[]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallSummary {
    pub radius: u32,
    pub sizes: Vec<usize>,
    pub complete: bool,
}

impl Ball {
    /// Enumerates under the process-wide cap; an over-budget ball comes back
    /// flagged incomplete.
    pub fn new(group: &GroupRef, gens: &[Element], radius: u32) -> Ball {
        Self::with_cap(group, gens, radius, element_cap())
    }

    /// Like [`Ball::new`] but an incomplete enumeration is an error.
    pub fn complete(group: &GroupRef, gens: &[Element], radius: u32) -> Result<Ball, MetricError> {
        Self::try_new(group, gens, radius, element_cap())
    }

    pub fn with_cap(group: &GroupRef, gens: &[Element], radius: u32, cap: usize) -> Ball {
        let mut bfs = Bfs::new(group, gens, cap.max(1));
        for _ in 0..radius {
            if !bfs.step() {
                break;
            }
        }
        // keep the requested radius even when truncated
        while bfs.radius() < radius {
            bfs.offsets.push(bfs.elements.len());
        }
        bfs.into_ball()
    }

    /// Like [`Ball::with_cap`] but an over-budget enumeration is an error
    /// carrying the partial ball.
    pub fn try_new(group: &GroupRef, gens: &[Element], radius: u32, cap: usize) -> Result<Ball, MetricError> {
        let ball = Self::with_cap(group, gens, radius, cap);
        if ball.complete {
            Ok(ball)
        } else {
            let reached = ball.last_complete_radius();
            Err(MetricError::BudgetExceeded {
                cap,
                reached,
                partial: Box::new(ball),
            })
        }
    }

    /// Ball over the group's own generators.
    pub fn standard(group: &GroupRef, radius: u32) -> Ball {
        Self::new(group, &group.generator_elements(), radius)
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    /// The symmetric generating set actually used.
    pub fn gens(&self) -> &[Element] {
        &self.gens
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    fn last_complete_radius(&self) -> u32 {
        if self.complete {
            return self.radius;
        }
        // the stratum where the cap hit is partial
        let full = self.offsets.windows(2).take_while(|w| w[1] < self.elements.len()).count();
        full.saturating_sub(1) as u32
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn stratum(&self, k: u32) -> &[Element] {
        let k = k as usize;
        if k + 1 >= self.offsets.len() {
            return &[];
        }
        &self.elements[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Elements at distance at most `r`.
    pub fn within(&self, r: u32) -> &[Element] {
        let r = (r.min(self.radius) as usize) + 1;
        &self.elements[..self.offsets[r]]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn distance(&self, g: &Element) -> Option<u32> {
        self.index.get(g).map(|&i| self.dist[i])
    }

    pub fn position(&self, g: &Element) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn distance_at(&self, i: usize) -> u32 {
        self.dist[i]
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.index.contains_key(g)
    }

    pub fn summary(&self) -> BallSummary {
        BallSummary {
            radius: self.radius,
            sizes: self.sizes(),
            complete: self.complete,
        }
    }
}

/// `d(1,g)` if it is at most `horizon`, found by breadth-first search.
pub fn word_length(group: &GroupRef, gens: &[Element], g: &Element, horizon: u32) -> Distance {
    let mut bfs = Bfs::new(group, gens, element_cap());
    loop {
        if let Some(&i) = bfs.index.get(g) {
            let k = bfs.offsets.partition_point(|&o| o <= i) - 1;
            return Distance::Exact(k as u64);
        }
        if bfs.radius() >= horizon || !bfs.step() {
            return Distance::AboveHorizon;
        }
        // a finite group is exhausted once a stratum comes back empty
        let n = bfs.offsets.len();
        if bfs.offsets[n - 1] == bfs.offsets[n - 2] {
            return Distance::AboveHorizon;
        }
    }
}

/// Word metric with a fixed horizon. Uses the closed-form length of the
/// default generators when available, otherwise a lazily built ball.
#[derive(Debug)]
pub struct WordMetric {
    group: GroupRef,
    gens: Vec<Element>,
    horizon: u32,
    cap: usize,
    closed_form: bool,
    ball: OnceLock<Ball>,
}

impl WordMetric {
    pub fn new(group: &GroupRef, gens: &[Element], horizon: u32) -> Self {
        Self::with_cap(group, gens, horizon, element_cap())
    }

    pub fn with_cap(group: &GroupRef, gens: &[Element], horizon: u32, cap: usize) -> Self {
        let gens = symmetric_closure(group, gens);
        let standard = symmetric_closure(group, &group.generator_elements());
        let same_set = gens.len() == standard.len() && gens.iter().all(|g| standard.contains(g));
        let closed_form = same_set && group.default_length(&group.identity()).is_some();
        WordMetric {
            group: group.clone(),
            gens,
            horizon,
            cap,
            closed_form,
            ball: OnceLock::new(),
        }
    }

    pub fn standard(group: &GroupRef, horizon: u32) -> Self {
        Self::new(group, &group.generator_elements(), horizon)
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn gens(&self) -> &[Element] {
        &self.gens
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    fn ball(&self) -> &Ball {
        self.ball
            .get_or_init(|| Ball::with_cap(&self.group, &self.gens, self.horizon, self.cap))
    }

    pub fn length(&self, g: &Element) -> Distance {
        if self.closed_form {
            if let Some(d) = self.group.default_length(g) {
                return if d <= self.horizon as u64 {
                    Distance::Exact(d)
                } else {
                    Distance::AboveHorizon
                };
            }
        }
        match self.ball().distance(g) {
            Some(d) => Distance::Exact(d as u64),
            None => Distance::AboveHorizon,
        }
    }

    /// Left-invariant distance `|a⁻¹b|`.
    pub fn distance(&self, a: &Element, b: &Element) -> Distance {
        self.length(&self.group.left_quotient(a, b))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DistortionVerdict {
    /// Intrinsic length bounded by `ratio` times extrinsic length.
    LinearWithin { ratio: f64 },
    /// log-log slope of the frontier exceeds the threshold.
    SuperlinearWithin { exponent: f64 },
}

/// Log-log slope above which a profile is reported superlinear.
pub const SUPERLINEAR_SLOPE: f64 = 1.3;

/// Intrinsic versus ambient word length for the elements of an `H`-ball.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistortionProfile {
    pub subgroup: String,
    pub radius: u32,
    /// `(intrinsic, extrinsic)`, one per element of the intrinsic ball
    pub pairs: Vec<(u64, Distance)>,
    /// for each extrinsic length, the largest intrinsic length seen there
    pub envelope: Vec<(u64, u64)>,
    pub slope: f64,
    pub verdict: DistortionVerdict,
    /// the element realizing each envelope point, as a word in `H`'s ambient group
    pub envelope_witnesses: Vec<String>,
    pub above_horizon: usize,
}

impl DistortionProfile {
    pub fn is_superlinear(&self) -> bool {
        matches!(self.verdict, DistortionVerdict::SuperlinearWithin { .. })
    }

    /// CSV with columns `intrinsic,extrinsic`; pairs beyond the horizon are
    /// written with an empty extrinsic field.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["intrinsic", "extrinsic"])?;
        for (i, e) in &self.pairs {
            let e = e.exact().map(|d| d.to_string()).unwrap_or_default();
            w.write_record([i.to_string(), e])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairs each element of the radius-`radius` ball of `H` (over `gens_h`)
/// with its length over `gens_g`. Ambient lengths are searched up to
/// `horizon`.
pub fn distortion_profile(
    gens_g: &[Element],
    subgroup: &SubgroupSpec,
    gens_h: &[Element],
    radius: u32,
    horizon: u32,
) -> Result<DistortionProfile, MetricError> {
    let group = &subgroup.ambient;
    if let Some(bad) = gens_h.iter().find(|g| !subgroup.contains(g)) {
        return Err(MetricError::GeneratorNotInSubgroup(group.format(bad)));
    }
    let h_ball = Ball::complete(group, gens_h, radius)?;
    let metric = WordMetric::new(group, gens_g, horizon);
    let lengths: Vec<Distance> = h_ball.elements().par_iter().map(|h| metric.length(h)).collect();
    let pairs: Vec<(u64, Distance)> = h_ball
        .elements()
        .iter()
        .enumerate()
        .map(|(i, _)| (h_ball.distance_at(i) as u64, lengths[i]))
        .collect();

    let mut best: std::collections::BTreeMap<u64, (u64, usize)> = Default::default();
    for (i, (intr, ext)) in pairs.iter().enumerate() {
        if let Some(e) = ext.exact() {
            let slot = best.entry(e).or_insert((*intr, i));
            if *intr > slot.0 {
                *slot = (*intr, i);
            }
        }
    }
    let envelope: Vec<(u64, u64)> = best.iter().map(|(&e, &(i, _))| (e, i)).collect();
    let envelope_witnesses = best
        .values()
        .map(|&(_, i)| group.format(&h_ball.elements()[i]))
        .collect();
    let slope = frontier_slope(&envelope);
    let verdict = if slope > SUPERLINEAR_SLOPE {
        DistortionVerdict::SuperlinearWithin { exponent: slope }
    } else {
        let ratio = envelope
            .iter()
            .filter(|(e, _)| *e > 0)
            .map(|&(e, i)| i as f64 / e as f64)
            .fold(0.0, f64::max);
        DistortionVerdict::LinearWithin { ratio }
    };
    Ok(DistortionProfile {
        subgroup: subgroup.name.clone(),
        radius,
        above_horizon: pairs.iter().filter(|(_, e)| !e.is_exact()).count(),
        pairs,
        envelope,
        slope,
        verdict,
        envelope_witnesses,
    })
}

/// Least-squares slope of `ln(intrinsic)` against `ln(extrinsic)` over the
/// envelope points in the upper half of the extrinsic range.
pub fn frontier_slope(envelope: &[(u64, u64)]) -> f64 {
    let Some(&(max_ext, _)) = envelope.last() else {
        return 1.0;
    };
    let points: Vec<(f64, f64)> = envelope
        .iter()
        .filter(|&&(e, i)| e > 0 && i > 0 && 2 * e >= max_ext)
        .map(|&(e, i)| ((e as f64).ln(), (i as f64).ln()))
        .collect();
    if points.len() < 2 {
        return 1.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        1.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn free_group_strata() {
        let f2 = Group::free(2).unwrap();
        let ball = Ball::standard(&f2, 4);
        assert_eq!(ball.sizes(), vec![1, 4, 12, 36, 108]);
        assert_eq!(ball.within(2).len(), 17);
    }

    #[test]
    fn free_abelian_ball() {
        let z2 = Group::free_abelian(2).unwrap();
        assert_eq!(Ball::standard(&z2, 2).len(), 13);
    }

    #[test]
    fn radius_zero_is_identity() {
        let h = Group::heisenberg();
        let ball = Ball::standard(&h, 0);
        assert_eq!(ball.elements(), &[h.identity()]);
    }

    #[test]
    fn finite_group_ball_saturates() {
        let z5 = Group::cyclic(5).unwrap();
        let ball = Ball::standard(&z5, 10);
        assert_eq!(ball.len(), 5);
        assert_eq!(ball.sizes(), vec![1, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(word_length(&z5, &z5.generator_elements(), &Element::Finite(3), 10), Distance::Exact(2));
    }

    #[test]
    fn budget_exceeded_returns_partial_ball() {
        let f2 = Group::free(2).unwrap();
        let err = Ball::try_new(&f2, &f2.generator_elements(), 5, 20).unwrap_err();
        let MetricError::BudgetExceeded { partial, reached, .. } = err else { panic!() };
        assert!(!partial.is_complete());
        assert_eq!(partial.len(), 20);
        assert_eq!(reached, 2);
    }

    #[test]
    fn heisenberg_word_lengths() {
        let h = Group::heisenberg();
        let c4 = Element::Heisenberg { x: 0, y: 0, z: 4 };
        assert_eq!(word_length(&h, &h.generator_elements(), &c4, 10), Distance::Exact(8));
        assert_eq!(word_length(&h, &h.generator_elements(), &c4, 7), Distance::AboveHorizon);
        assert_eq!(word_length(&h, &h.generator_elements(), &h.identity(), 0), Distance::Exact(0));
    }

    #[test]
    fn dihedral_word_length() {
        let d = Group::infinite_dihedral();
        let g = d.parse("t^3 s").unwrap();
        assert_eq!(word_length(&d, &d.generator_elements(), &g, 10), Distance::Exact(4));
    }

    #[test]
    fn closed_form_matches_search() {
        let groups = [
            Group::free(2).unwrap(),
            Group::free_abelian(3).unwrap(),
            Group::infinite_dihedral(),
            Group::direct_product(Group::free_abelian(1).unwrap(), Group::infinite_dihedral()),
        ];
        for g in groups {
            let ball = Ball::standard(&g, 5);
            let metric = WordMetric::standard(&g, 5);
            for e in ball.elements() {
                assert_eq!(metric.length(e), Distance::Exact(ball.distance(e).unwrap() as u64));
            }
        }
    }

    #[test]
    fn extra_generators_never_lengthen() {
        let h = Group::heisenberg();
        let base = Ball::standard(&h, 4);
        let mut gens = h.generator_elements();
        gens.push(Element::Heisenberg { x: 0, y: 0, z: 1 });
        let bigger = Ball::new(&h, &gens, 4);
        for e in base.elements() {
            assert!(bigger.distance(e).unwrap() <= base.distance(e).unwrap());
        }
    }

    #[test]
    fn free_cyclic_subgroup_is_undistorted() {
        let f2 = Group::free(2).unwrap();
        let h = SubgroupSpec::free_cyclic(f2.clone(), &[2]).unwrap();
        let p = distortion_profile(&f2.generator_elements(), &h, &h.generators, 10, 12).unwrap();
        assert_eq!(p.verdict, DistortionVerdict::LinearWithin { ratio: 1.0 });
    }

    #[test]
    fn profile_rejects_foreign_generator() {
        let f2 = Group::free(2).unwrap();
        let h = SubgroupSpec::free_cyclic(f2.clone(), &[2]).unwrap();
        let a = f2.generator(0).clone();
        assert!(distortion_profile(&f2.generator_elements(), &h, &[a], 3, 5).is_err());
    }

    #[test]
    fn csv_export() {
        let f2 = Group::free(2).unwrap();
        let h = SubgroupSpec::free_cyclic(f2.clone(), &[2]).unwrap();
        let p = distortion_profile(&f2.generator_elements(), &h, &h.generators, 2, 2).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("intrinsic,extrinsic\n0,0\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
