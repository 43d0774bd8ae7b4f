use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::{ConfigError, Context, Expectation, ExperimentSpec, Op};
use crate::action::{induce_action, stable_length, InduceParams, LengthHint, Point};
use crate::catalog::coordinate_selector;
use crate::error::{Error, Result};
use crate::metric::{distortion_profile, Ball};
use crate::qhom::{
    central_perturb, check_commutator_image, check_conjugation_bound, check_inverse_bound, check_product_bound,
    defect_set, dual_defect_set, goodqh_check, CheckOutcome, DefectReport, MAX_WITNESSES,
};
use crate::qmorph::defect_sup;
use crate::retract::{
    almost_commutative_check, cyclic_retract_from_qm, finite_index_criterion, non_retract_certificate,
    normalize_retraction, power_commutator_checks, retraction_to_section, strict_qiso_product, symmetry_check,
    transversal_retraction, DEFAULT_TRANSVERSAL_CAP,
};

/// A CSV file produced by a check.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub suffix: String,
    pub content: String,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub positive: bool,
    pub summary: String,
    pub witnesses: Vec<String>,
    pub details: Value,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn new(positive: bool, summary: String, details: Value) -> Self {
        Outcome { positive, summary, witnesses: Vec::new(), details, artifacts: Vec::new() }
    }

    fn witnesses<I: IntoIterator<Item = String>>(mut self, w: I) -> Self {
        self.witnesses.extend(w);
        self.witnesses.truncate(MAX_WITNESSES);
        self
    }
}

pub type Task = Box<dyn FnOnce() -> Result<Outcome> + Send>;

pub struct Prepared {
    pub index: usize,
    pub op: &'static str,
    pub label: String,
    pub expect: Expectation,
    pub radius: Option<u32>,
    pub task: Task,
}

fn value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

fn longest(words: &[String]) -> Vec<String> {
    let mut w = words.to_vec();
    w.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    w.truncate(MAX_WITNESSES);
    w
}

fn defect_outcome(r: DefectReport) -> Outcome {
    let positive = r.is_stable();
    let summary = format!("{}: sizes {:?} over radii 1..{}", r.label, r.table.sizes, r.table.radii.len());
    let w = if positive { Vec::new() } else { longest(&r.words) };
    Outcome::new(positive, summary, value(&r)).witnesses(w)
}

fn check_outcome(c: CheckOutcome) -> Outcome {
    let summary = format!("{}: {} samples, {} witnesses", c.check, c.samples, c.witnesses.len());
    Outcome::new(c.passed, summary, value(&c)).witnesses(c.witnesses.clone())
}

fn csv_string<F>(write: F) -> String
where
    F: FnOnce(&mut Vec<u8>) -> csv::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).expect("CSV into memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

/// Resolves every check of `spec` into a runnable task.
pub fn prepare(spec: &ExperimentSpec) -> Result<Vec<Prepared>, ConfigError> {
    let ctx = Context::new(spec)?;
    let mut out = Vec::new();
    for (i, c) in spec.checks.iter().enumerate() {
        let index = i + 1;
        let task = task(&ctx, &c.op).map_err(|message| ConfigError::Check { index, op: c.op.name().into(), message })?;
        if c.op.radius() == Some(0) {
            return Err(ConfigError::Check { index, op: c.op.name().into(), message: "radius must be positive".into() });
        }
        out.push(Prepared {
            index,
            op: c.op.name(),
            label: c.label.clone().unwrap_or_else(|| c.op.name().to_string()),
            expect: c.expect,
            radius: c.op.radius(),
            task,
        });
    }
    Ok(out)
}

fn task(ctx: &Context, op: &Op) -> Result<Task, String> {
    let op = op.clone();
    Ok(match op {
        Op::DefectSet { map, radius } => {
            let phi = ctx.map(&map)?;
            Box::new(move || Ok(defect_outcome(defect_set(&phi, radius)?)))
        }
        Op::DualDefectSet { map, radius } => {
            let phi = ctx.map(&map)?;
            Box::new(move || Ok(defect_outcome(dual_defect_set(&phi, radius)?)))
        }
        Op::LemmaSuite { map, radius, horizon } => {
            let phi = ctx.map(&map)?;
            Box::new(move || {
                let checks = vec![
                    check_product_bound(&phi, radius, 3)?,
                    check_product_bound(&phi, radius, 4)?,
                    check_inverse_bound(&phi, radius)?,
                    check_conjugation_bound(&phi, radius)?,
                    check_commutator_image(&phi, radius, horizon)?,
                ];
                let primal = defect_set(&phi, radius)?;
                let dual = dual_defect_set(&phi, radius)?;
                let agree = primal.is_stable() == dual.is_stable();
                let witnesses: Vec<String> =
                    checks.iter().flat_map(|c| c.witnesses.iter().map(move |w| format!("{}: {w}", c.check))).collect();
                let passed = checks.iter().filter(|c| c.passed).count();
                let summary = format!(
                    "{}: {passed}/{} bounds hold, |D| = {}, |D~| = {}, verdicts {}",
                    phi.label,
                    checks.len(),
                    primal.len(),
                    dual.len(),
                    if agree { "agree" } else { "disagree" }
                );
                let details = json!({
                    "map": phi.label,
                    "checks": checks,
                    "defect": primal,
                    "dual_defect": dual,
                    "verdicts_agree": agree,
                });
                let mut w = witnesses;
                if !agree {
                    w.insert(0, "primal and dual defect verdicts disagree".into());
                }
                Ok(Outcome::new(passed == checks.len() && agree, summary, details).witnesses(w))
            })
        }
        Op::ProductBound { map, radius, n } => {
            let phi = ctx.map(&map)?;
            if n < 2 {
                return Err("n must be at least 2".into());
            }
            Box::new(move || Ok(check_outcome(check_product_bound(&phi, radius, n)?)))
        }
        Op::InverseBound { map, radius } => {
            let phi = ctx.map(&map)?;
            Box::new(move || Ok(check_outcome(check_inverse_bound(&phi, radius)?)))
        }
        Op::ConjugationBound { map, radius } => {
            let phi = ctx.map(&map)?;
            Box::new(move || Ok(check_outcome(check_conjugation_bound(&phi, radius)?)))
        }
        Op::CommutatorImage { map, radius, horizon } => {
            let phi = ctx.map(&map)?;
            Box::new(move || Ok(check_outcome(check_commutator_image(&phi, radius, horizon)?)))
        }
        Op::CentralPerturbation { map, values, radius } => {
            let phi = ctx.map(&map)?;
            let a = ctx.elements(&phi.target, &values)?;
            Box::new(move || {
                let k = a.len();
                let p = central_perturb(&phi, a, coordinate_selector(k), radius)?;
                Ok(check_outcome(p.outcome))
            })
        }
        Op::GoodQh { map, radius, horizon } => {
            let phi = ctx.map(&map)?;
            Box::new(move || {
                let r = goodqh_check(&phi, radius, horizon)?;
                let summary = format!(
                    "{}: |A| sizes {:?}, |C| sizes {:?}, distance to identity {}",
                    phi.label, r.a.table.sizes, r.commutators.table.sizes, r.identity_distance
                );
                let w = if r.positive { Vec::new() } else { longest(&r.commutators.words) };
                Ok(Outcome::new(r.positive && r.consistent, summary, value(&r)).witnesses(w))
            })
        }
        Op::AlmostCommutative { group, radius } => {
            let g = ctx.group(&group)?;
            Box::new(move || Ok(defect_outcome(almost_commutative_check(&g, radius)?)))
        }
        Op::CyclicRetract { group, qm, element, radius, n_max } => {
            let g = ctx.group(&group)?;
            let phi = ctx.qm(&g, &qm)?;
            let h = ctx.element(&g, &element)?;
            Box::new(move || {
                let r = cyclic_retract_from_qm(&phi, &h, radius, n_max)?;
                let exact = r.homogenization.iter().all(|v| *v == r.estimate);
                let positive = r.on_powers.passed && r.defect.is_stable();
                let summary = format!(
                    "{} along {}: estimate {}, oscillation {}, |D(r)| sizes {:?}",
                    phi.label(),
                    r.element,
                    r.estimate,
                    r.oscillation,
                    r.defect.table.sizes
                );
                let mut details = value(&r);
                details["exact_on_powers"] = json!(exact);
                let w = r.on_powers.witnesses.clone();
                Ok(Outcome::new(positive, summary, details).witnesses(w))
            })
        }
        Op::Distortion { group, subgroup, radius, horizon } => {
            let g = ctx.group(&group)?;
            let h = ctx.subgroup(&g, &subgroup)?;
            Box::new(move || {
                let gens_h = h.generators.clone();
                let p = distortion_profile(&g.generator_elements(), &h, &gens_h, radius, horizon)?;
                let cert = non_retract_certificate(&p);
                let summary = match &cert {
                    Some(c) => format!("{}: slope {:.3}; {}", p.subgroup, p.slope, c.statement),
                    None => format!("{}: slope {:.3}, undistorted within radius {radius}", p.subgroup, p.slope),
                };
                let w: Vec<String> = cert
                    .as_ref()
                    .map(|c| {
                        c.witnesses.iter().rev().map(|(i, e, w)| format!("{w}: intrinsic {i}, extrinsic {e}")).collect()
                    })
                    .unwrap_or_default();
                let csv = csv_string(|b| p.write_csv(b));
                let details = json!({"profile": p, "certificate": cert});
                let mut o = Outcome::new(cert.is_none(), summary, details).witnesses(w);
                o.artifacts.push(Artifact { suffix: "distortion".into(), content: csv });
                Ok(o)
            })
        }
        Op::FiniteIndex { group, subgroup, radius, max_rep_length, cap } => {
            let g = ctx.group(&group)?;
            let h = ctx.subgroup(&g, &subgroup)?;
            Box::new(move || {
                let r = finite_index_criterion(&h, radius, max_rep_length, cap.unwrap_or(DEFAULT_TRANSVERSAL_CAP))?;
                let summary = format!(
                    "{}: index {}, {} transversals, {} stable, all strictly increasing: {}",
                    r.subgroup, r.index, r.transversals_checked, r.stable_count, r.all_strictly_increasing
                );
                let w = if r.positive {
                    Vec::new()
                } else {
                    r.summaries.first().map(|s| s.witnesses.clone()).unwrap_or_default()
                };
                Ok(Outcome::new(r.positive, summary, value(&r)).witnesses(w))
            })
        }
        Op::NormalizeRetraction { map, group, subgroup, radius } => {
            let phi = ctx.map(&map)?;
            let g = ctx.group(&group)?;
            let h = ctx.subgroup(&g, &subgroup)?;
            Box::new(move || {
                let n = normalize_retraction(&phi, &h, radius)?;
                let r = n.report;
                let positive = r.certificate.passed && r.restriction.passed && r.defect.is_stable();
                let summary = format!(
                    "{} normalized on {}: |A| = {}, |B| = {}, |D(r)| sizes {:?}",
                    phi.label,
                    h.name,
                    r.a.len(),
                    r.b.len(),
                    r.defect.table.sizes
                );
                let w: Vec<String> =
                    r.certificate.witnesses.iter().chain(&r.restriction.witnesses).cloned().collect();
                Ok(Outcome::new(positive, summary, value(&r)).witnesses(w))
            })
        }
        Op::TransversalRetraction { bundle, radius } => {
            let b = ctx.bundle(&bundle)?;
            Box::new(move || {
                let t = transversal_retraction(&b, radius)?;
                let r = t.report;
                let positive = r.defect.is_stable() && r.certificate.passed && r.restriction.passed;
                let summary = format!(
                    "{}: |D~(s)| = {}, |C(H, s(Q))| = {}, |D(r)| sizes {:?}",
                    r.bundle,
                    r.dual_defect.len(),
                    r.commutators.len(),
                    r.defect.table.sizes
                );
                let w: Vec<String> = r.certificate.witnesses.iter().chain(&r.restriction.witnesses).cloned().collect();
                Ok(Outcome::new(positive, summary, value(&r)).witnesses(w))
            })
        }
        Op::SplitRoundtrip { bundle, radius, horizon } => {
            let b = ctx.bundle(&bundle)?;
            Box::new(move || {
                let t = transversal_retraction(&b, radius)?;
                let sec = retraction_to_section(&t.map, &b, radius, horizon)?;
                let q = strict_qiso_product(&b, &t.map, &sec.section, radius, horizon)?;
                let holds = q.report.constants.as_ref().is_some_and(|c| c.holds());
                let constants = match &q.report.constants {
                    Some(c) => format!("{} violations of the constants", c.violations),
                    None => format!("constants not measurable within horizon {horizon}"),
                };
                let positive = t.report.defect.is_stable()
                    && t.report.certificate.passed
                    && sec.report.equiv_distance.is_exact()
                    && q.report.qiso.strict
                    && q.report.diagram.passed
                    && holds;
                let summary = format!(
                    "{}: |D(r)| = {}, section at distance {} from the original, strict: {}, {constants}",
                    t.report.bundle,
                    t.report.defect.len(),
                    sec.report.equiv_distance,
                    q.report.qiso.strict
                );
                let mut w: Vec<String> = t.report.certificate.witnesses.clone();
                w.extend(q.report.diagram.witnesses.iter().cloned());
                if let Some(c) = &q.report.constants {
                    w.extend(c.witnesses.iter().cloned());
                }
                let details = json!({
                    "retraction": t.report,
                    "section": sec.report,
                    "strict_qiso": q.report,
                });
                Ok(Outcome::new(positive, summary, details).witnesses(w))
            })
        }
        Op::Symmetry { group, subgroup, t, radius } => {
            let g = ctx.group(&group)?;
            let h = ctx.subgroup(&g, &subgroup)?;
            let t = ctx.elements(&g, &t)?;
            Box::new(move || {
                let r = symmetry_check(&h, radius, &t)?;
                let summary = format!(
                    "{}: |C(H,T)| = {}, |C(T^-1,H)| = {}, |C(H,T^-1)^-1| = {}, enlarged radius {}",
                    h.name, r.c_h_t, r.c_tinv_h, r.c_h_tinv_inverse, r.enlarged_radius
                );
                let w = r.outcome.witnesses.clone();
                Ok(Outcome::new(r.outcome.passed, summary, value(&r)).witnesses(w))
            })
        }
        Op::PowerCommutators { group, subgroup, t, radius, n_max } => {
            let g = ctx.group(&group)?;
            let h = ctx.subgroup(&g, &subgroup)?;
            let t = ctx.elements(&g, &t)?;
            Box::new(move || {
                let r = power_commutator_checks(&h, radius, &t, n_max)?;
                let positive = r.factorization.passed && r.power_defect.passed;
                let summary = format!(
                    "{}: factorization {} samples, power defect {} samples, n <= {n_max}",
                    h.name, r.factorization.samples, r.power_defect.samples
                );
                let w: Vec<String> =
                    r.factorization.witnesses.iter().chain(&r.power_defect.witnesses).cloned().collect();
                Ok(Outcome::new(positive, summary, value(&r)).witnesses(w))
            })
        }
        Op::LineAction { group, qm, radius, triples, seed } => {
            let g = ctx.group(&group)?;
            let phi = ctx.qm(&g, &qm)?;
            Box::new(move || {
                let rho = crate::action::line_action_from_qm(&phi);
                let ball = Ball::complete(&g, &g.generator_elements(), radius)?;
                let el = ball.elements();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut mismatches = Vec::new();
                let mut max = Rational64::from_integer(0);
                for _ in 0..triples {
                    let (x, y) = (&el[rng.gen_range(0..el.len())], &el[rng.gen_range(0..el.len())]);
                    let p = Point::Real(Rational64::new(rng.gen_range(-1000..=1000), rng.gen_range(1..=12)));
                    let got = rho.composition_defect(x, y, &p);
                    let want = phi.defect_at(x, y);
                    max = max.max(want);
                    if got != Some(want) {
                        mismatches.push(format!("g = {}, h = {}, x = {p:?}", g.format(x), g.format(y)));
                    }
                }
                let sup = defect_sup(&phi, &ball);
                let summary = format!(
                    "x + {}: {triples} triples, {} mismatches, max defect {max}, defect sup on the ball {sup}",
                    phi.label(),
                    mismatches.len()
                );
                let details = json!({
                    "triples": triples,
                    "seed": seed,
                    "mismatches": mismatches.len(),
                    "max_sampled_defect": max.to_string(),
                    "defect_sup": sup.to_string(),
                    "constants": {"lambda": 1, "epsilon": sup.to_string()},
                });
                Ok(Outcome::new(mismatches.is_empty(), summary, details).witnesses(mismatches))
            })
        }
        Op::InducedAction { map, action, sample, sample_radius, points, radius, surjectivity_bound, horizon } => {
            let phi = ctx.map(&map)?;
            let rho = ctx.action(&action)?;
            if rho.group.name() != phi.target.name() {
                return Err(format!("action of {} cannot be pulled back along a map into {}", rho.group.name(), phi.target.name()));
            }
            let h = ctx.subgroup(&phi.target, &sample)?;
            let pts = points.iter().map(|p| ctx.point(&rho, p)).collect::<Result<Vec<_>, _>>()?;
            Box::new(move || {
                let target_sample = Ball::complete(&h.ambient, &h.generators, sample_radius)?.elements().to_vec();
                let params = InduceParams { radius, target_sample, points: pts, surjectivity_bound, horizon };
                let ind = induce_action(&phi, &rho, &params)?;
                let r = ind.report;
                let summary = format!(
                    "{}: measured defect {} <= lambda M + 3 eps = {} (lambda {}, M {}, eps {}){}",
                    ind.action.label,
                    r.measured_defect,
                    r.bound,
                    r.lambda,
                    r.m,
                    r.epsilon,
                    if r.equality { ", equality" } else { "" }
                );
                Ok(Outcome::new(r.holds, summary, value(&r)))
            })
        }
        Op::StableLength { action, element, base, n_max, tau } => {
            let rho = ctx.action(&action)?;
            let f = ctx.element(&rho.group, &element)?;
            let o = match (&base, &rho.space) {
                (Some(b), _) => ctx.point(&rho, b)?,
                (None, crate::action::SpaceModel::RealLine) => Point::real(0),
                (None, _) => Point::Group(rho.group.identity()),
            };
            let expected = tau
                .as_deref()
                .map(|t| t.parse::<Rational64>().map_err(|e| format!("tau {t:?}: {e}")))
                .transpose()?;
            Box::new(move || {
                let s = stable_length(&rho, &f, &o, n_max);
                let positive = match expected {
                    Some(t) => s.tau() == t,
                    None => s.hint == LengthHint::Hyperbolic,
                };
                let summary = format!(
                    "tau({}) = {} over {} steps, hint {:?}{}",
                    s.element,
                    s.tau,
                    s.distances.len(),
                    s.hint,
                    s.truncated_at.map(|n| format!(", truncated at n = {n}")).unwrap_or_default()
                );
                let csv = csv_string(|b| s.write_csv(b));
                let mut o = Outcome::new(positive, summary, value(&s));
                o.artifacts.push(Artifact { suffix: "stable-length".into(), content: csv });
                Ok(o)
            })
        }
    })
}

/// Converts an error raised while running a check into its record: budget
/// errors are kept apart, every other error is a negative verdict.
pub fn error_outcome(e: &Error) -> (bool, Outcome) {
    let kind = match e {
        Error::UnstablePrerequisite { .. } => "unstable_prerequisite",
        Error::BoundedQuasimorphism { .. } => "bounded_quasimorphism",
        Error::NotCoarselySurjective { .. } => "not_coarsely_surjective",
        Error::UnstableDefect(_) => "unstable_defect",
        Error::NotCentral { .. } => "not_central",
        Error::InvalidBundle(_) => "invalid_bundle",
        Error::NotComposable(_) => "not_composable",
        Error::NotCyclicallyReduced(_) => "not_cyclically_reduced",
        Error::SetBudget { .. } | Error::CosetBudget { .. } => "budget_exceeded",
        Error::Metric(_) => "metric",
        Error::Group(_) => "group",
    };
    let kind = if e.is_budget() { "budget_exceeded" } else { kind };
    let text = e.to_string();
    let o = Outcome::new(false, text.clone(), json!({"error": kind, "message": text})).witnesses([text]);
    (e.is_budget(), o)
}
