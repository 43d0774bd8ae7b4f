use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{defect_set, CheckOutcome, QHom};
use crate::error::{Error, Result};
use crate::group::Element;
use crate::metric::{Ball, Distance, WordMetric};
use crate::sets::{inverse_set, power_set, product_of, ElementSet};

const EXHAUSTIVE_TUPLES: usize = 50_000;
const RANDOM_TUPLES: usize = 4_000;
const TUPLE_SEED: u64 = 0x7u64 << 32 | 0x0dd5;

/// Index tuples of length `n` over `len` positions: all of them when few,
/// otherwise a seeded sample.
fn tuples(len: usize, n: usize) -> Vec<Vec<usize>> {
    let total = (len as f64).powi(n as i32);
    if total <= EXHAUSTIVE_TUPLES as f64 {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..len).map(move |i| {
                        let mut t = t.clone();
                        t.push(i);
                        t
                    })
                })
                .collect();
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(TUPLE_SEED ^ n as u64);
    (0..RANDOM_TUPLES)
        .map(|_| (0..n).map(|_| rng.gen_range(0..len)).collect())
        .collect()
}

fn source_ball(phi: &QHom, radius: u32) -> Result<Ball> {
    Ok(Ball::complete(&phi.source, &phi.source.generator_elements(), radius)?)
}

/// `φ(x₁⋯xₙ) = φ(x₁)⋯φ(xₙ)·d` with `d ∈ Dⁿ⁻¹`, `D` taken over the
/// radius-`radius` ball. The partial products reach radius `(n−1)·radius`,
/// so a pass means the defects met out there already lie in `D_R`.
pub fn check_product_bound(phi: &QHom, radius: u32, n: usize) -> Result<CheckOutcome> {
    let (g, t) = (&phi.source, &phi.target);
    let report = defect_set(phi, radius)?;
    let d = report.elements.clone();
    let allowed = power_set(t, &d, n.saturating_sub(1))?;
    let ball = source_ball(phi, radius)?;
    let el = ball.elements();
    let images = phi.images(el);
    let samples = tuples(el.len(), n);
    let bad: Vec<String> = samples
        .par_iter()
        .filter_map(|tup| {
            let prod = g.product(tup.iter().map(|&i| &el[i]));
            let img = t.product(tup.iter().map(|&i| &images[i]));
            let delta = t.left_quotient(&img, &phi.apply(&prod));
            (!allowed.contains(&delta)).then(|| {
                let xs: Vec<String> = tup.iter().map(|&i| g.format(&el[i])).collect();
                format!("({}) leaves {} outside D^{}", xs.join(", "), t.format(&delta), n - 1)
            })
        })
        .collect();
    let mut out = CheckOutcome::new(&format!("product_bound_n{n}"), radius);
    out.samples = samples.len();
    out.value("defect_stable", report.is_stable());
    out.value("defect_size", d.len());
    out.value("allowed_size", allowed.len());
    bad.into_iter().for_each(|w| out.fail(w));
    Ok(out)
}

/// `φ(x)⁻¹ = φ(x⁻¹)·d` with `d ∈ D²`.
pub fn check_inverse_bound(phi: &QHom, radius: u32) -> Result<CheckOutcome> {
    let (g, t) = (&phi.source, &phi.target);
    let d = defect_set(phi, radius)?.elements;
    let allowed = power_set(t, &d, 2)?;
    let ball = source_ball(phi, radius)?;
    let mut out = CheckOutcome::new("inverse_bound", radius);
    out.samples = ball.len();
    out.value("defect_size", d.len());
    let bad: Vec<String> = ball
        .elements()
        .par_iter()
        .filter_map(|x| {
            let lhs = t.inv(&phi.apply(x));
            let delta = t.left_quotient(&phi.apply(&g.inv(x)), &lhs);
            (!allowed.contains(&delta)).then(|| format!("x = {}: {} not in D^2", g.format(x), t.format(&delta)))
        })
        .collect();
    bad.into_iter().for_each(|w| out.fail(w));
    Ok(out)
}

/// `h⁻¹Dh ⊆ D²D⁻¹` for every `h` in the image of the ball.
pub fn check_conjugation_bound(phi: &QHom, radius: u32) -> Result<CheckOutcome> {
    let t = &phi.target;
    let d = defect_set(phi, radius)?.elements;
    let d_inv = inverse_set(t, &d);
    let allowed = product_of(t, &[&d, &d, &d_inv])?;
    let ball = source_ball(phi, radius)?;
    let hs: ElementSet = phi.images(ball.elements()).into_iter().collect();
    let hs: Vec<Element> = hs.into_iter().collect();
    let mut out = CheckOutcome::new("conjugation_bound", radius);
    out.samples = hs.len() * d.len();
    out.value("defect_size", d.len());
    let bad: Vec<String> = hs
        .par_iter()
        .flat_map_iter(|h| {
            let h_inv = t.inv(h);
            let allowed = &allowed;
            d.iter().filter_map(move |x| {
                let c = t.mul(&t.mul(&h_inv, x), h);
                (!allowed.contains(&c)).then(|| format!("h = {}, d = {}", t.format(h), t.format(x)))
            })
        })
        .collect();
    bad.into_iter().for_each(|w| out.fail(w));
    Ok(out)
}

/// Distance from `φ([x,y])` to the commutator `[φ(x),φ(y)]`, which bounds
/// the distance to the target commutator set. Passes when every distance is
/// exact and at most `11·L`, `L` the longest defect.
pub fn check_commutator_image(phi: &QHom, radius: u32, horizon: u32) -> Result<CheckOutcome> {
    let (g, t) = (&phi.source, &phi.target);
    let d = defect_set(phi, radius)?.elements;
    let metric = WordMetric::standard(t, horizon);
    let longest = d.iter().map(|x| metric.length(x)).max().unwrap_or(Distance::Exact(0));
    let mut out = CheckOutcome::new("commutator_image", radius);
    let Distance::Exact(l) = longest else {
        out.fail("a defect element is beyond the horizon".into());
        return Ok(out);
    };
    let bound = 11 * l;
    let ball = source_ball(phi, radius)?;
    let el = ball.elements();
    let images = phi.images(el);
    let pairs: Vec<(usize, usize)> = (0..el.len()).flat_map(|i| (0..el.len()).map(move |j| (i, j))).collect();
    let dists: Vec<(Distance, usize, usize)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let img = phi.apply(&g.commutator(&el[i], &el[j]));
            let c = t.commutator(&images[i], &images[j]);
            (metric.distance(&img, &c), i, j)
        })
        .collect();
    let worst = dists.iter().map(|x| x.0).max().unwrap_or(Distance::Exact(0));
    out.samples = dists.len();
    out.value("max_distance", worst);
    out.value("bound", bound);
    out.value("longest_defect", l);
    for (dist, i, j) in dists {
        if dist > Distance::Exact(bound) {
            out.fail(format!("x = {}, y = {}: distance {dist}", g.format(&el[i]), g.format(&el[j])));
        }
    }
    Ok(out)
}

/// A central perturbation `φ′(g) = φ(g)·a(g)` with its containment check.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub map: QHom,
    pub outcome: CheckOutcome,
}

/// Builds `φ′(g) = φ(g)·A[selector(g)]` after checking that every element of
/// `A` commutes with the target generators, then verifies
/// `D(φ′) ⊆ A⁻²·D(φ)·A` on the ball.
pub fn central_perturb<F>(phi: &QHom, a: Vec<Element>, selector: F, radius: u32) -> Result<Perturbation>
where
    F: Fn(&Element) -> usize + Send + Sync + 'static,
{
    let t = phi.target.clone();
    for x in &a {
        for s in t.generator_elements() {
            if !t.is_identity(&t.commutator(x, &s)) {
                return Err(Error::NotCentral { element: t.format(x), witness: t.format(&s) });
            }
        }
    }
    let a_set: ElementSet = a.iter().cloned().collect();
    let a_inv = inverse_set(&t, &a_set);
    let d = defect_set(phi, radius)?.elements;
    let allowed = product_of(&t, &[&a_inv, &a_inv, &d, &a_set])?;
    let inner = phi.clone();
    let target = t.clone();
    let label = format!("{} * A", phi.label);
    let map = QHom::new(phi.source.clone(), t.clone(), &label, move |g| {
        target.mul(&inner.apply(g), &a[selector(g)])
    });
    let perturbed = defect_set(&map, radius)?;
    let mut outcome = CheckOutcome::new("central_perturbation", radius);
    outcome.samples = perturbed.len();
    outcome.value("a_size", a_set.len());
    outcome.value("defect_size", perturbed.len());
    for x in &perturbed.elements {
        if !allowed.contains(x) {
            outcome.fail(format!("{} not in A^-2 D A", t.format(x)));
        }
    }
    Ok(Perturbation { map, outcome })
}
