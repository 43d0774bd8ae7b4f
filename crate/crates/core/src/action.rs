//! Quasi-actions on Cayley balls and on the real line.

use std::fmt;
use std::io;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, GroupRef};
use crate::metric::{Ball, Distance, WordMetric};
use crate::qhom::{defect_set, QHom};
use crate::qmorph::Quasimorphism;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Group(Element),
    Real(Rational64),
}

impl Point {
    pub fn real(n: i64) -> Self {
        Point::Real(Rational64::from_integer(n))
    }
}

#[derive(Clone)]
pub enum SpaceModel {
    /// Elements of a ball with the word metric of its generators.
    CayleyBall { ball: Arc<Ball>, metric: Arc<WordMetric> },
    RealLine,
}

impl fmt::Debug for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceModel::CayleyBall { ball, .. } => {
                write!(f, "CayleyBall({}, radius {})", ball.group().name(), ball.radius())
            }
            SpaceModel::RealLine => f.write_str("RealLine"),
        }
    }
}

impl SpaceModel {
    /// Exact distance, `None` when beyond the metric horizon or when the
    /// points do not belong to this space.
    pub fn distance(&self, a: &Point, b: &Point) -> Option<Rational64> {
        match (self, a, b) {
            (SpaceModel::RealLine, Point::Real(x), Point::Real(y)) => Some((x - y).abs()),
            (SpaceModel::CayleyBall { metric, .. }, Point::Group(x), Point::Group(y)) => {
                metric.distance(x, y).exact().map(|d| Rational64::from_integer(d as i64))
            }
            _ => None,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (SpaceModel::RealLine, Point::Real(_)) => true,
            (SpaceModel::CayleyBall { ball, .. }, Point::Group(x)) => ball.contains(x),
            _ => false,
        }
    }

    pub fn format(&self, p: &Point) -> String {
        match (self, p) {
            (SpaceModel::CayleyBall { ball, .. }, Point::Group(x)) => ball.group().format(x),
            (_, Point::Real(x)) => x.to_string(),
            (_, Point::Group(x)) => format!("{x:?}"),
        }
    }
}

pub type ActionFn = dyn Fn(&Element, &Point) -> Option<Point> + Send + Sync;

/// `ρ: G × X → X`; `None` marks an image clamped at the boundary of a
/// finite model.
#[derive(Clone)]
pub struct QuasiAction {
    pub group: GroupRef,
    pub space: SpaceModel,
    pub label: String,
    eval: Arc<ActionFn>,
}

impl fmt::Debug for QuasiAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuasiAction({} of {} on {:?})", self.label, self.group.name(), self.space)
    }
}

/// Measured `(λ, ε)` with the exclusions caused by clamping.
#[derive(Clone, Debug, Serialize)]
pub struct ActionConstants {
    pub radius: u32,
    pub lambda: f64,
    pub epsilon: String,
    /// `max d(g(hx), (gh)x)`
    pub composition_defect: String,
    /// smallest additive constant making each `ρ(g, ·)` a `(λ, ·)`-quasi-isometry
    pub qi_additive: String,
    pub triples: usize,
    pub clamped: usize,
    pub excluded_fraction: f64,
}

fn rat_max(a: Rational64, b: Rational64) -> Rational64 {
    if a > b {
        a
    } else {
        b
    }
}

impl QuasiAction {
    pub fn new<F>(group: GroupRef, space: SpaceModel, label: &str, eval: F) -> Self
    where
        F: Fn(&Element, &Point) -> Option<Point> + Send + Sync + 'static,
    {
        QuasiAction { group, space, label: label.to_string(), eval: Arc::new(eval) }
    }

    pub fn act(&self, g: &Element, x: &Point) -> Option<Point> {
        (self.eval)(g, x)
    }

    /// `d(g(hx), (gh)x)`, `None` when a point is clamped.
    pub fn composition_defect(&self, g: &Element, h: &Element, x: &Point) -> Option<Rational64> {
        let hx = self.act(h, x)?;
        let ghx = self.act(g, &hx)?;
        let gh_x = self.act(&self.group.mul(g, h), x)?;
        self.space.distance(&ghx, &gh_x)
    }

    /// Composition defect over `elements² × points` and the quasi-isometry
    /// constants of each `ρ(g, ·)` over `elements × points²`.
    pub fn measure(&self, elements: &[Element], points: &[Point], radius: u32) -> ActionConstants {
        let comp: Vec<Option<Rational64>> = elements
            .par_iter()
            .flat_map_iter(|g| {
                elements
                    .iter()
                    .flat_map(move |h| points.iter().map(move |x| self.composition_defect(g, h, x)))
            })
            .collect();
        let triples = comp.len();
        let mut clamped = comp.iter().filter(|c| c.is_none()).count();
        let composition = comp.into_iter().flatten().fold(Rational64::zero(), rat_max);

        let rows: Vec<(f64, Rational64, usize)> = elements
            .par_iter()
            .map(|g| {
                let images: Vec<Option<Point>> = points.iter().map(|x| self.act(g, x)).collect();
                let (mut ratio, mut add, mut lost) = (1.0f64, Rational64::zero(), 0usize);
                for i in 0..points.len() {
                    for j in 0..i {
                        let (Some(a), Some(b)) = (&images[i], &images[j]) else {
                            lost += 1;
                            continue;
                        };
                        let (Some(d), Some(dg)) = (self.space.distance(&points[i], &points[j]), self.space.distance(a, b))
                        else {
                            lost += 1;
                            continue;
                        };
                        if !d.is_zero() && !dg.is_zero() {
                            let r = to_f64(dg) / to_f64(d);
                            ratio = ratio.max(r).max(1.0 / r);
                        }
                        add = rat_max(add, (dg - d).abs());
                    }
                }
                (ratio, add, lost)
            })
            .collect();
        let lambda = rows.iter().map(|r| r.0).fold(1.0, f64::max);
        let qi_additive = rows.iter().map(|r| r.1).fold(Rational64::zero(), rat_max);
        clamped += rows.iter().map(|r| r.2).sum::<usize>();
        let pairs = elements.len() * points.len() * points.len().saturating_sub(1) / 2;
        ActionConstants {
            radius,
            lambda,
            epsilon: rat_max(composition, qi_additive).to_string(),
            composition_defect: composition.to_string(),
            qi_additive: qi_additive.to_string(),
            triples,
            clamped,
            excluded_fraction: if triples + pairs == 0 { 0.0 } else { clamped as f64 / (triples + pairs) as f64 },
        }
    }
}

fn to_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// `ρ(g, x) = x + φ(g)` on the real line.
pub fn line_action_from_qm(phi: &Quasimorphism) -> QuasiAction {
    let phi2 = phi.clone();
    QuasiAction::new(phi.source.clone(), SpaceModel::RealLine, &format!("x + {}", phi.label()), move |g, x| match x {
        Point::Real(x) => Some(Point::Real(x + phi2.eval(g))),
        Point::Group(_) => None,
    })
}

/// Left multiplication on the radius-`R` ball; images outside the ball are
/// clamped.
pub fn cayley_action(group: &GroupRef, gens: &[Element], radius: u32) -> Result<QuasiAction> {
    let ball = Arc::new(Ball::complete(group, gens, radius)?);
    let metric = Arc::new(WordMetric::new(group, gens, 2 * radius));
    let (g, b) = (group.clone(), ball.clone());
    Ok(QuasiAction::new(
        group.clone(),
        SpaceModel::CayleyBall { ball, metric },
        &format!("left multiplication on the {radius}-ball"),
        move |x, p| match p {
            Point::Group(y) => {
                let z = g.mul(x, y);
                b.contains(&z).then_some(Point::Group(z))
            }
            Point::Real(_) => None,
        },
    ))
}

/// Sample of the induced action and its certified bound `λM + 3ε`.
#[derive(Clone, Debug, Serialize)]
pub struct InducedReport {
    pub radius: u32,
    /// constants of `ρ_H` on the target sample
    pub target: ActionConstants,
    pub lambda: f64,
    pub epsilon: String,
    /// `max d(x, ax)` over sampled `x` and `a ∈ D(φ)`
    pub m: String,
    pub bound: String,
    pub measured_defect: String,
    pub holds: bool,
    pub equality: bool,
    pub triples: usize,
    pub clamped: usize,
    pub surjectivity_distance: u64,
    pub surjectivity_bound: u64,
}

#[derive(Clone, Debug)]
pub struct InducedAction {
    pub action: QuasiAction,
    pub report: InducedReport,
}

#[derive(Clone, Debug)]
pub struct InduceParams {
    /// radius of the source ball for `g, h`
    pub radius: u32,
    /// sample of `H` for coarse surjectivity and for `ρ_H`'s constants
    pub target_sample: Vec<Element>,
    pub points: Vec<Point>,
    pub surjectivity_bound: u64,
    pub horizon: u32,
}

/// Default coarse surjectivity threshold.
pub const DEFAULT_SURJECTIVITY_BOUND: u64 = 2;

/// `ρ(g, x) = ρ_H(φ(g), x)`, after checking that `D(φ)` is stable and
/// that `φ` reaches every sampled element of `H` within the bound.
pub fn induce_action(phi: &QHom, rho_h: &QuasiAction, params: &InduceParams) -> Result<InducedAction> {
    let (g, h) = (&phi.source, &phi.target);
    let defects = defect_set(phi, params.radius)?;
    if !defects.is_stable() {
        return Err(Error::UnstableDefect(phi.label.clone()));
    }
    let ball = Ball::complete(g, &g.generator_elements(), params.radius)?;
    let images = phi.images(ball.elements());
    let metric = WordMetric::standard(h, params.horizon);
    let mut surj = 0u64;
    for y in &params.target_sample {
        let best = images.par_iter().map(|p| metric.distance(p, y)).min().unwrap_or(Distance::AboveHorizon);
        match best {
            Distance::Exact(d) if d <= params.surjectivity_bound => surj = surj.max(d),
            other => {
                return Err(Error::NotCoarselySurjective { witness: h.format(y), distance: other.to_string() });
            }
        }
    }

    let target = rho_h.measure(&params.target_sample, &params.points, params.radius);
    let lambda = target.lambda;
    let epsilon: Rational64 = target.epsilon.parse().expect("rational");
    let mut m = Rational64::zero();
    for a in &defects.elements {
        for x in &params.points {
            if let Some(ax) = rho_h.act(a, x) {
                if let Some(d) = rho_h.space.distance(x, &ax) {
                    m = rat_max(m, d);
                }
            }
        }
    }
    let bound = to_f64(m) * lambda + 3.0 * to_f64(epsilon);

    let (p, rh) = (phi.clone(), rho_h.clone());
    let action = QuasiAction::new(g.clone(), rho_h.space.clone(), &format!("{} induced by {}", rho_h.label, phi.label), move |x, pt| {
        rh.act(&p.apply(x), pt)
    });
    let comp: Vec<Option<Rational64>> = ball
        .elements()
        .par_iter()
        .flat_map_iter(|x| {
            let action = &action;
            ball.elements()
                .iter()
                .flat_map(move |y| params.points.iter().map(move |pt| action.composition_defect(x, y, pt)))
        })
        .collect();
    let triples = comp.len();
    let clamped = comp.iter().filter(|c| c.is_none()).count();
    let measured = comp.into_iter().flatten().fold(Rational64::zero(), rat_max);
    let measured_f = to_f64(measured);
    Ok(InducedAction {
        report: InducedReport {
            radius: params.radius,
            lambda,
            epsilon: epsilon.to_string(),
            m: m.to_string(),
            bound: format!("{bound}"),
            measured_defect: measured.to_string(),
            holds: measured_f <= bound + 1e-9,
            equality: (measured_f - bound).abs() < 1e-9,
            triples,
            clamped,
            surjectivity_distance: surj,
            surjectivity_bound: params.surjectivity_bound,
            target,
        },
        action,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    pub max_distance: Option<String>,
    pub samples: usize,
    pub clamped: usize,
}

/// `max d(σ(ρ_X(g, x)), ρ_Y(g, σ(x)))` over the samples.
pub fn coarse_equivariance<S>(
    sigma: S,
    rho_x: &QuasiAction,
    rho_y: &QuasiAction,
    elements: &[Element],
    points: &[Point],
) -> EquivarianceReport
where
    S: Fn(&Point) -> Option<Point> + Sync,
{
    let values: Vec<Option<Rational64>> = elements
        .par_iter()
        .flat_map_iter(|g| {
            let sigma = &sigma;
            points.iter().map(move |x| {
                let left = sigma(&rho_x.act(g, x)?)?;
                let right = rho_y.act(g, &sigma(x)?)?;
                rho_y.space.distance(&left, &right)
            })
        })
        .collect();
    let clamped = values.iter().filter(|v| v.is_none()).count();
    let max = values.iter().flatten().copied().max();
    EquivarianceReport { max_distance: max.map(|m| m.to_string()), samples: values.len(), clamped }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthHint {
    Elliptic,
    Hyperbolic,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableLength {
    pub element: String,
    /// `(n, d(o, fⁿo))`
    pub distances: Vec<(u32, String)>,
    /// `min d(o, fⁿo)/n`, the limit for a subadditive sequence
    pub tau: String,
    /// `max − min` of `d(o, fⁿo)/n` over the second half
    pub tail_oscillation: String,
    /// first `n` whose orbit point left the model
    pub truncated_at: Option<u32>,
    pub subadditive: bool,
    pub hint: LengthHint,
}

impl StableLength {
    pub fn tau(&self) -> Rational64 {
        self.tau.parse().expect("rational")
    }

    /// CSV with columns `n,distance`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "distance"])?;
        for (n, d) in &self.distances {
            w.write_record([n.to_string(), d.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The sequence `d(o, fⁿo)` for `n ≤ n_max` and `τ(f) = inf d(o, fⁿo)/n`.
pub fn stable_length(rho: &QuasiAction, f: &Element, o: &Point, n_max: u32) -> StableLength {
    let mut distances: Vec<Rational64> = Vec::new();
    let mut truncated_at = None;
    let mut current = o.clone();
    for n in 1..=n_max.max(1) {
        match rho.act(f, &current).and_then(|p| rho.space.distance(o, &p).map(|d| (p, d))) {
            Some((p, d)) => {
                distances.push(d);
                current = p;
            }
            None => {
                truncated_at = Some(n);
                break;
            }
        }
    }
    let ratios: Vec<Rational64> =
        distances.iter().enumerate().map(|(i, d)| d / Rational64::from_integer(i as i64 + 1)).collect();
    let tau = ratios.iter().copied().min().unwrap_or_else(Rational64::zero);
    let tail = &ratios[ratios.len() / 2..];
    let osc = match (tail.iter().max(), tail.iter().min()) {
        (Some(a), Some(b)) => a - b,
        _ => Rational64::zero(),
    };
    let n = distances.len();
    let subadditive = (1..=n).all(|a| (1..=n - a).all(|b| distances[a + b - 1] <= distances[a - 1] + distances[b - 1]));
    let first = distances.first().copied().unwrap_or_else(Rational64::zero);
    let hint = if n == 0 || first.is_zero() && tau.is_zero() {
        LengthHint::Elliptic
    } else if tau * Rational64::from_integer(2) >= first {
        LengthHint::Hyperbolic
    } else if tau * Rational64::from_integer(n as i64) <= first {
        LengthHint::Elliptic
    } else {
        LengthHint::Undetermined
    };
    let fmt = match &rho.space {
        SpaceModel::CayleyBall { ball, .. } => ball.group().format(f),
        SpaceModel::RealLine => rho.group.format(f),
    };
    StableLength {
        element: fmt,
        distances: distances.iter().enumerate().map(|(i, d)| (i as u32 + 1, d.to_string())).collect(),
        tau: tau.to_string(),
        tail_oscillation: osc.to_string(),
        truncated_at,
        subadditive,
        hint,
    }
}
