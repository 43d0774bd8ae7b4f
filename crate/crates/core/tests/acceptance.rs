//! Acceptance criteria 1 to 10. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion fails or overruns its time limit.
//!
//! Expected values come from the oracles below, which share no code with
//! the library: free reduction on letter vectors, 3x3 unitriangular
//! matrices, affine maps of the rationals and a direct cocycle model.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::error::Error as StdError;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qhlab::action::{cayley_action, induce_action, line_action_from_qm, stable_length, InduceParams, Point};
use qhlab::catalog::{brooks_retraction, lemma_suite_maps, rounding_extension};
use qhlab::experiment::{presets, run, ExperimentSpec};
use qhlab::group::{Element, Group, SubgroupSpec};
use qhlab::metric::{distortion_profile, Ball, Distance, WordMetric};
use qhlab::qhom::{
    check_commutator_image, check_conjugation_bound, check_inverse_bound, check_product_bound, defect_set,
    dual_defect_set,
};
use qhlab::qmorph::Quasimorphism;
use qhlab::retract::{
    finite_index_criterion, non_retract_certificate, power_commutator_checks, retraction_to_section,
    strict_qiso_product, symmetry_check, transversal_retraction, SesBundle, DEFAULT_TRANSVERSAL_CAP,
};
use qhlab::Error;

type Outcome = Result<String, Box<dyn StdError>>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+).into());
        }
    };
}

mod oracle {
    use super::*;

    pub mod free {
        pub type Word = Vec<i32>;

        pub fn reduce(w: &[i32]) -> Word {
            let mut out: Word = Vec::with_capacity(w.len());
            for &l in w {
                if out.last() == Some(&-l) {
                    out.pop();
                } else {
                    out.push(l);
                }
            }
            out
        }

        pub fn mul(x: &[i32], y: &[i32]) -> Word {
            reduce(&[x, y].concat())
        }

        pub fn inv(x: &[i32]) -> Word {
            x.iter().rev().map(|l| -l).collect()
        }

        fn occurrences(w: &[i32], pat: &[i32]) -> i64 {
            w.windows(pat.len()).filter(|s| *s == pat).count() as i64
        }

        /// `h_ab`: occurrences of `ab` minus occurrences of `b⁻¹a⁻¹`.
        pub fn h_ab(w: &[i32]) -> i64 {
            occurrences(w, &[1, 2]) - occurrences(w, &[-2, -1])
        }

        pub fn ab_power(n: i64) -> Word {
            let unit: [i32; 2] = if n >= 0 { [1, 2] } else { [-2, -1] };
            unit.iter().copied().cycle().take(2 * n.unsigned_abs() as usize).collect()
        }

        /// Every reduced word of length at most `r` over `a, b`.
        pub fn ball(r: usize) -> Vec<Word> {
            let mut out = vec![Vec::new()];
            let mut frontier: Vec<Word> = vec![Vec::new()];
            for _ in 0..r {
                let mut next = Vec::new();
                for w in &frontier {
                    for l in [1, -1, 2, -2] {
                        if w.last() != Some(&-l) {
                            let mut v = w.clone();
                            v.push(l);
                            next.push(v);
                        }
                    }
                }
                out.extend(next.iter().cloned());
                frontier = next;
            }
            out
        }
    }

    /// Heisenberg elements as upper unitriangular matrices `(x, y, w)`
    /// with `w` the corner entry.
    pub mod heis {
        use super::*;

        pub type M = (i64, i64, i64);

        pub fn mul(p: M, q: M) -> M {
            (p.0 + q.0, p.1 + q.1, p.2 + q.2 + p.0 * q.1)
        }

        pub fn inv(p: M) -> M {
            (-p.0, -p.1, p.0 * p.1 - p.2)
        }

        pub const A: M = (1, 0, 0);
        pub const B: M = (0, 1, 0);

        pub fn power(g: M, n: i64) -> M {
            let base = if n >= 0 { g } else { inv(g) };
            (0..n.abs()).fold((0, 0, 0), |acc, _| mul(acc, base))
        }

        /// `a^x b^y c^z` with `c = aba⁻¹b⁻¹`.
        pub fn from_normal_form(x: i64, y: i64, z: i64) -> M {
            (x, y, x * y + z)
        }

        /// Breadth-first distances over `a^±1, b^±1` up to `depth`.
        pub fn bfs(depth: u32) -> HashMap<M, u32> {
            let gens = [A, inv(A), B, inv(B)];
            let mut dist = HashMap::from([((0, 0, 0), 0)]);
            let mut queue = VecDeque::from([(0, 0, 0)]);
            while let Some(p) = queue.pop_front() {
                let d = dist[&p];
                if d == depth {
                    continue;
                }
                for g in gens {
                    let q = mul(p, g);
                    if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(q) {
                        e.insert(d + 1);
                        queue.push_back(q);
                    }
                }
            }
            dist
        }
    }

    /// `BS(1,2)` acting on the rationals: `(e, b)` is `v ↦ 2^e v + b` and
    /// products compose right to left.
    pub mod affine {
        use super::*;

        pub type A = (i32, Rational64);

        pub fn mul(g: A, h: A) -> A {
            (g.0 + h.0, scale(g.0) * h.1 + g.1)
        }

        fn scale(e: i32) -> Rational64 {
            if e >= 0 {
                Rational64::from_integer(1 << e)
            } else {
                Rational64::new(1, 1 << -e)
            }
        }

        pub fn word(letters: &[(char, i32)]) -> A {
            letters.iter().fold((0, Rational64::from_integer(0)), |acc, &(c, e)| {
                let g = match c {
                    'a' => (0, Rational64::from_integer(e as i64)),
                    _ => (e, Rational64::from_integer(0)),
                };
                mul(acc, g)
            })
        }
    }

    /// Infinite dihedral group as `(shift, flip)`, `t^shift s^flip`.
    pub mod dihedral {
        pub type D = (i64, bool);

        pub fn mul(p: D, q: D) -> D {
            (p.0 + if p.1 { -q.0 } else { q.0 }, p.1 ^ q.1)
        }

        pub fn inv(p: D) -> D {
            if p.1 {
                p
            } else {
                (-p.0, false)
            }
        }

        pub fn commutator(x: D, y: D) -> D {
            mul(mul(x, y), mul(inv(x), inv(y)))
        }

        /// Word lengths over `t^±1, s` for every element within `depth`.
        pub fn lengths(depth: u32) -> std::collections::HashMap<D, u32> {
            let gens = [(1, false), (-1, false), (0, true)];
            let mut dist = std::collections::HashMap::from([((0, false), 0)]);
            let mut frontier = vec![(0, false)];
            for d in 1..=depth {
                let mut next = Vec::new();
                for p in frontier {
                    for g in gens {
                        let q = mul(p, g);
                        if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(q) {
                            e.insert(d);
                            next.push(q);
                        }
                    }
                }
                frontier = next;
            }
            dist
        }
    }

    /// `Z →ω E → Z` with `ω(m, n) = ⌊α(m+n)⌋ − ⌊αm⌋ − ⌊αn⌋`, `α = √2/2`.
    pub mod rounding {
        use super::*;

        pub type E = (i64, i64);

        fn isqrt(n: i64) -> i64 {
            let mut r = (n as f64).sqrt() as i64;
            while r * r > n {
                r -= 1;
            }
            while (r + 1) * (r + 1) <= n {
                r += 1;
            }
            r
        }

        /// `⌊n/√2⌋`, exact since `n/√2` is irrational for `n ≠ 0`.
        pub fn floor_alpha(n: i64) -> i64 {
            let m = isqrt(n * n / 2);
            match n.signum() {
                0 => 0,
                1 => m,
                _ => -m - 1,
            }
        }

        pub fn omega(m: i64, n: i64) -> i64 {
            floor_alpha(m + n) - floor_alpha(m) - floor_alpha(n)
        }

        pub fn mul(p: E, q: E) -> E {
            (p.0 + q.0 + omega(p.1, q.1), p.1 + q.1)
        }

        pub fn inv(p: E) -> E {
            (-p.0 - omega(p.1, -p.1), -p.1)
        }

        /// `r(g) = g·(0, π(g))⁻¹`.
        pub fn retraction(p: E) -> E {
            mul(p, inv((0, p.1)))
        }

        pub fn ball(depth: u32) -> Vec<(E, u32)> {
            let gens = [(1, 0), (-1, 0), (0, 1), inv((0, 1))];
            let mut dist = HashMap::from([((0, 0), 0u32)]);
            let mut frontier = vec![(0, 0)];
            for d in 1..=depth {
                let mut next = Vec::new();
                for p in frontier {
                    for g in gens {
                        let q = mul(p, g);
                        if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(q) {
                            e.insert(d);
                            next.push(q);
                        }
                    }
                }
                frontier = next;
            }
            dist.into_iter().collect()
        }
    }

    /// Sizes per radius of a set whose elements first appear at the given
    /// radii.
    pub fn growth<K: Ord>(first: &BTreeMap<K, u32>, radius: u32) -> Vec<usize> {
        (1..=radius).map(|r| first.values().filter(|&&f| f <= r).count()).collect()
    }

    pub fn record<K: Ord>(first: &mut BTreeMap<K, u32>, k: K, r: u32) {
        let e = first.entry(k).or_insert(r);
        *e = (*e).min(r);
    }
}

use oracle::{affine, dihedral, free, heis, rounding};

fn criterion_1() -> Outcome {
    let f2 = Group::free(2)?;
    let h = Quasimorphism::brooks(f2.clone(), &[1, 2])?;
    let ab = f2.parse("a b")?;
    for n in 1..=30 {
        let want = free::h_ab(&free::ab_power(n));
        ensure!(want == n, "oracle h_ab((ab)^{n}) = {want}");
        let got = h.eval(&f2.pow(&ab, n));
        ensure!(got == Rational64::from_integer(want), "h_ab((ab)^{n}) = {got}, expected {want}");
    }

    let radius = 5;
    let ball = free::ball(radius as usize);
    let r_of = |w: &[i32]| free::ab_power(free::h_ab(w));
    let images: Vec<free::Word> = ball.iter().map(|w| r_of(w)).collect();
    let mut first = BTreeMap::new();
    for (x, rx) in ball.iter().zip(&images) {
        for (y, ry) in ball.iter().zip(&images) {
            let d = free::mul(&free::mul(&free::inv(ry), &free::inv(rx)), &r_of(&free::mul(x, y)));
            oracle::record(&mut first, d, (x.len().max(y.len()).max(1)) as u32);
        }
    }
    let expected_sizes = oracle::growth(&first, radius);

    let rep = defect_set(&brooks_retraction(&f2, "a b")?, radius)?;
    ensure!(rep.table.sizes == expected_sizes, "|D(r)| by radius {:?}, oracle {:?}", rep.table.sizes, expected_sizes);
    let expected: BTreeSet<Element> = first.into_keys().map(Element::Free).collect();
    ensure!(rep.elements == expected, "defect set differs from the oracle");
    let tail = &rep.table.sizes[2..5];
    ensure!(tail.iter().all(|&s| s == tail[0]), "sizes at radii 3,4,5 are {tail:?}");
    ensure!(rep.is_stable(), "library reports {:?}", rep.verdict);
    Ok(format!("h_ab((ab)^n) = n for n <= 30; |D(r)| = {:?} for radii 1..5", rep.table.sizes))
}

fn criterion_2() -> Outcome {
    let radius = 4;
    let maps = lemma_suite_maps()?;
    for phi in &maps {
        let checks = [
            check_product_bound(phi, radius, 3)?,
            check_product_bound(phi, radius, 4)?,
            check_inverse_bound(phi, radius)?,
            check_conjugation_bound(phi, radius)?,
            check_commutator_image(phi, radius, 16)?,
        ];
        for c in &checks {
            ensure!(c.passed && c.witnesses.is_empty(), "{} on {}: {:?}", c.check, phi.label, c.witnesses);
        }
        let primal = defect_set(phi, radius)?;
        let dual = dual_defect_set(phi, radius)?;
        ensure!(
            primal.is_stable() == dual.is_stable(),
            "{}: primal {:?}, dual {:?}",
            phi.label,
            primal.verdict,
            dual.verdict
        );
    }
    Ok(format!("{} maps, 5 bounds each, zero witnesses, primal and dual verdicts agree", maps.len()))
}

fn criterion_3() -> Outcome {
    let h3 = Group::heisenberg();
    let as_matrix = |e: &Element| match e {
        Element::Heisenberg { x, y, z } => Ok(heis::from_normal_form(*x, *y, *z)),
        other => Err(format!("not a Heisenberg element: {other:?}")),
    };
    for n in 1..=20i64 {
        let word = format!("a^{n} b^{n} a^-{n} b^-{n}");
        let m = heis::mul(
            heis::mul(heis::power(heis::A, n), heis::power(heis::B, n)),
            heis::mul(heis::power(heis::A, -n), heis::power(heis::B, -n)),
        );
        ensure!(m == (0, 0, n * n), "oracle [a^{n}, b^{n}] = {m:?}");
        ensure!(as_matrix(&h3.parse(&word)?)? == m, "library disagrees on {word}");
    }
    let dist = heis::bfs(8);
    let c4 = heis::from_normal_form(0, 0, 4);
    ensure!(dist.get(&c4) == Some(&8), "oracle BFS gives d(1, c^4) = {:?}", dist.get(&c4));
    let c4_lib = h3.pow(&h3.commutator(h3.generator(0), h3.generator(1)), 4);
    ensure!(as_matrix(&c4_lib)? == c4, "library c^4 is {c4_lib:?}");
    let lib_d = WordMetric::standard(&h3, 8).length(&c4_lib);
    ensure!(lib_d == Distance::Exact(8), "library d(1, c^4) = {lib_d}");

    let bs = Group::baumslag_solitar(2)?;
    for k in 0..=10i32 {
        let m = affine::word(&[('t', k), ('a', 1), ('t', -k)]);
        let target = (0, Rational64::from_integer(1 << k));
        ensure!(m == target, "oracle t^{k} a t^-{k} = {m:?}");
        let lib = bs.parse(&format!("t^{k} a t^-{k}"))?;
        ensure!(lib == bs.parse(&format!("a^{}", 1 << k))?, "library t^{k} a t^-{k} differs from a^{}", 1 << k);
    }

    let center = SubgroupSpec::heisenberg_center(h3.clone())?;
    let p_h = distortion_profile(&h3.generator_elements(), &center, &center.generators, 10, 16)?;
    let cert_h = non_retract_certificate(&p_h).ok_or("Heisenberg center profile is not superlinear")?;
    let translations = SubgroupSpec::bs_translations(bs.clone())?;
    let p_bs = distortion_profile(&bs.generator_elements(), &translations, &translations.generators, 10, 10)?;
    let cert_bs = non_retract_certificate(&p_bs).ok_or("BS(1,2) translation profile is not superlinear")?;
    ensure!(!cert_h.witnesses.is_empty() && !cert_bs.witnesses.is_empty(), "certificates carry no witnesses");
    Ok(format!(
        "[a^n,b^n] = c^(n^2) for n <= 20, d(1,c^4) = 8, t^k a t^-k = a^(2^k) for k <= 10; slopes {:.2} and {:.2}",
        cert_h.exponent, cert_bs.exponent
    ))
}

fn criterion_4() -> Outcome {
    let d = Group::infinite_dihedral();
    let radius = 10u32;
    let reps: Vec<dihedral::D> = (-8..=8).map(|m| (m, true)).collect();
    let mut oracle_sizes = Vec::new();
    for r in 1..=radius as i64 {
        let sizes: BTreeSet<usize> = reps
            .iter()
            .map(|&x| (-r..=r).map(|k| dihedral::commutator((k, false), x)).collect::<BTreeSet<_>>().len())
            .collect();
        ensure!(sizes.len() == 1, "oracle sizes at radius {r} depend on the representative: {sizes:?}");
        oracle_sizes.push((r as u32, *sizes.iter().next().unwrap()));
    }

    let sub = SubgroupSpec::dihedral_rotations(d.clone())?;
    let rep = finite_index_criterion(&sub, radius, Some(8), DEFAULT_TRANSVERSAL_CAP)?;
    ensure!(!rep.positive, "verdict is positive");
    ensure!(rep.index == 2 && !rep.truncated && rep.transversals_checked > 0, "index {}, truncated {}", rep.index, rep.truncated);
    ensure!(rep.all_strictly_increasing && rep.stable_count == 0, "a transversal stabilises");
    let top_witnesses: BTreeSet<String> =
        [20, -20].iter().map(|&s| d.format(&Element::Dihedral { shift: s, flip: false })).collect();
    for s in &rep.summaries {
        let growth: Vec<(u32, usize)> =
            s.table.radii.iter().copied().zip(s.table.sizes.iter().copied()).filter(|(r, _)| *r >= 2).collect();
        ensure!(growth.windows(2).all(|w| w[0].1 < w[1].1), "{:?}: not strictly increasing", s.representatives);
        for (r, size) in &growth {
            let want = oracle_sizes.iter().find(|(o, _)| o == r).map(|x| x.1);
            ensure!(Some(*size) == want, "{:?}: |C| = {size} at radius {r}, oracle {want:?}", s.representatives);
        }
        ensure!(
            s.witnesses.iter().any(|w| top_witnesses.contains(w)),
            "{:?}: witnesses {:?} miss t^20",
            s.representatives,
            s.witnesses
        );
    }
    Ok(format!(
        "{} transversals, |C(H_r, T)| = 2r+1 for r = 2..10, witnesses t^(2k), verdict negative",
        rep.transversals_checked
    ))
}

fn criterion_5() -> Outcome {
    let e = rounding_extension()?;
    let bundle = SesBundle::from_central_extension(e.clone())?;
    let radius = 8;
    let tr = transversal_retraction(&bundle, radius)?;

    let ball = rounding::ball(radius);
    let mut first = BTreeMap::new();
    for &(x, dx) in &ball {
        for &(y, dy) in &ball {
            let (rx, ry) = (rounding::retraction(x), rounding::retraction(y));
            let d = rounding::mul(rounding::mul(rounding::inv(ry), rounding::inv(rx)), rounding::retraction(rounding::mul(x, y)));
            oracle::record(&mut first, d, dx.max(dy).max(1));
        }
    }
    let sizes = &tr.report.defect.table.sizes;
    ensure!(*sizes == oracle::growth(&first, radius), "|D(r)| {sizes:?}, oracle {:?}", oracle::growth(&first, radius));
    let expected: BTreeSet<Element> = first
        .keys()
        .map(|&(z, n)| Element::Central { fiber: vec![z], base: Box::new(Element::Abelian(vec![n])) })
        .collect();
    ensure!(tr.report.defect.elements == expected, "defect set differs from the oracle");
    let tail = &sizes[5..8];
    ensure!(tail.iter().all(|&s| s == tail[0] && s <= 2), "sizes at radii 6,7,8: {tail:?}");
    ensure!(tr.report.certificate.passed && tr.report.restriction.passed, "retraction certificate failed");

    let horizon = 32;
    let sec = retraction_to_section(&tr.map, &bundle, 6, horizon)?;
    ensure!(sec.report.equiv_distance == Distance::Exact(0), "equiv_distance {}", sec.report.equiv_distance);
    let q = strict_qiso_product(&bundle, &tr.map, &sec.section, 6, horizon)?;
    let rep = &q.report;
    ensure!(rep.forward_mismatches == 0 && rep.backward_mismatches == 0, "composites differ from the identity");
    ensure!(rep.qiso.strict && rep.diagram.passed, "strict {}, diagram {}", rep.qiso.strict, rep.diagram.passed);
    let c = rep.constants.as_ref().ok_or("qi constants not measurable within the horizon")?;
    ensure!(c.holds(), "qi constant inequality fails: {c:?}");
    Ok(format!("D(r) = {:?} stable at radii 6..8, equiv_distance 0, strict on the radius-6 ball", tr.report.defect.words))
}

fn criterion_6() -> Outcome {
    let h3 = Group::heisenberg();
    let bundle = SesBundle::heisenberg_center(h3.clone())?;
    let radius = 6u32;
    let mut first = BTreeMap::new();
    let r = radius as i64;
    for x in -r..=r {
        for y in -r..=r {
            let n = (x.abs() + y.abs()) as u32;
            if n > radius {
                continue;
            }
            for x2 in -r..=r {
                for y2 in -r..=r {
                    let n2 = (x2.abs() + y2.abs()) as u32;
                    if n2 > radius {
                        continue;
                    }
                    let s = |p: i64, q: i64| heis::mul(heis::power(heis::A, p), heis::power(heis::B, q));
                    let d = heis::mul(heis::mul(s(x, y), s(x2, y2)), heis::inv(s(x + x2, y + y2)));
                    ensure!(d == (0, 0, -x2 * y), "oracle dual defect at ({x},{y}), ({x2},{y2}) is {d:?}");
                    oracle::record(&mut first, d.2, n.max(n2).max(1));
                }
            }
        }
    }
    let dual = dual_defect_set(&bundle.section, radius)?;
    ensure!(dual.table.sizes == oracle::growth(&first, radius), "sizes {:?}, oracle {:?}", dual.table.sizes, oracle::growth(&first, radius));
    let expected: BTreeSet<Element> = first.keys().map(|&z| Element::Heisenberg { x: 0, y: 0, z }).collect();
    ensure!(dual.elements == expected, "dual defect set is not the family c^(-x'y)");
    match transversal_retraction(&bundle, radius) {
        Err(Error::UnstablePrerequisite { which, .. }) => {
            Ok(format!("UnstablePrerequisite ({which}); |c^(-x'y)| by radius {:?}", dual.table.sizes))
        }
        Err(other) => Err(format!("unexpected error: {other}").into()),
        Ok(_) => Err("transversal retraction succeeded".into()),
    }
}

fn criterion_7() -> Outcome {
    let d = Group::infinite_dihedral();
    let h3 = Group::heisenberg();
    let cases = [
        (SubgroupSpec::dihedral_rotations(d.clone())?, vec![d.parse("s")?]),
        (SubgroupSpec::heisenberg_a_c(h3.clone())?, vec![h3.parse("b")?]),
    ];
    let mut notes = Vec::new();
    for (sub, t) in &cases {
        ensure!(sub.contains(sub.ambient.generator(0)), "{} misses the first generator", sub.name);
        let sym = symmetry_check(sub, 6, t)?;
        ensure!(sym.outcome.passed && sym.outcome.witnesses.is_empty(), "{} symmetry: {:?}", sub.name, sym.outcome.witnesses);
        let pc = power_commutator_checks(sub, 6, t, 4)?;
        for c in [&pc.factorization, &pc.power_defect] {
            ensure!(c.passed && c.witnesses.is_empty(), "{} {}: {:?}", sub.name, c.check, c.witnesses);
        }
        notes.push(format!("{} (|C(H,T)| = {})", sub.name, sym.c_h_t));
    }
    Ok(format!("symmetry and power commutators n <= 4 at R=6 on {}", notes.join(", ")))
}

fn criterion_8() -> Outcome {
    let f2 = Group::free(2)?;
    let radius = 5;
    let h = Quasimorphism::brooks(f2.clone(), &[1, 2])?;
    let rho = line_action_from_qm(&h);
    let phi = brooks_retraction(&f2, "a b")?;
    let ab = f2.parse("a b")?;
    let target_sample = Ball::complete(&f2, &[ab], 2)?.elements().to_vec();
    let points = ["0", "1/2", "-3", "7/3"].iter().map(|p| p.parse().map(Point::Real)).collect::<Result<Vec<_>, _>>()?;
    let params = InduceParams { radius, target_sample, points, surjectivity_bound: 2, horizon: 16 };
    let ind = induce_action(&phi, &rho, &params)?;
    let r = &ind.report;
    ensure!(r.lambda == 1.0, "lambda = {}", r.lambda);
    ensure!(r.holds, "measured {} exceeds lambda M + 3 eps = {}", r.measured_defect, r.bound);

    let ball = free::ball(radius as usize);
    let shifts: Vec<i64> = ball.iter().map(|w| free::h_ab(&free::ab_power(free::h_ab(w)))).collect();
    let mut want = 0;
    for (x, sx) in ball.iter().zip(&shifts) {
        for (y, sy) in ball.iter().zip(&shifts) {
            let sxy = free::h_ab(&free::ab_power(free::h_ab(&free::mul(x, y))));
            want = want.max((sx + sy - sxy).abs());
        }
    }
    ensure!(r.measured_defect == want.to_string(), "measured defect {}, oracle {want}", r.measured_defect);

    let el = Ball::complete(&f2, &f2.generator_elements(), radius)?.elements().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let triples = 10_000;
    for _ in 0..triples {
        let (x, y) = (&el[rng.gen_range(0..el.len())], &el[rng.gen_range(0..el.len())]);
        let p = Point::Real(Rational64::new(rng.gen_range(-1000..=1000), rng.gen_range(1..=12)));
        let (Element::Free(xw), Element::Free(yw)) = (x, y) else { return Err("not a free word".into()) };
        let defect = (free::h_ab(&free::mul(xw, yw)) - free::h_ab(xw) - free::h_ab(yw)).abs();
        let got = rho.composition_defect(x, y, &p);
        ensure!(got == Some(Rational64::from_integer(defect)), "g = {xw:?}, h = {yw:?}: {got:?} vs {defect}");
    }
    Ok(format!(
        "measured {} <= {} (lambda 1, M {}, eps {}); line action exact on {triples} triples",
        r.measured_defect, r.bound, r.m, r.epsilon
    ))
}

fn criterion_9() -> Outcome {
    let d = Group::infinite_dihedral();
    let rho = cayley_action(&d, &d.generator_elements(), 12)?;
    let lengths = dihedral::lengths(12);
    let o = Point::Group(d.identity());
    for (name, step) in [("t", (1, false)), ("s", (0, true))] {
        let mut p = (0, false);
        let mut tau: Option<Rational64> = None;
        for n in 1..=12i64 {
            p = dihedral::mul(p, step);
            let ratio = Rational64::new(lengths[&p] as i64, n);
            tau = Some(tau.map_or(ratio, |t| t.min(ratio)));
        }
        let s = stable_length(&rho, &d.parse(name)?, &o, 12);
        ensure!(Some(s.tau()) == tau, "tau({name}) = {}, oracle {tau:?}", s.tau);
    }

    let z = Group::free_abelian(1)?;
    let line = line_action_from_qm(&Quasimorphism::exponent_sum(z.clone(), 0)?);
    for k in -5i64..=5 {
        let s = stable_length(&line, &z.pow(z.generator(0), k), &Point::real(0), 20);
        ensure!(s.tau() == Rational64::from_integer(k.abs()), "tau(a^{k}) = {}", s.tau);
    }
    Ok("tau(t) = 1, tau(s) = 0 on the radius-12 ball; tau(a^k) = |k| for |k| <= 5".into())
}

fn criterion_10() -> Outcome {
    for p in presets() {
        let spec = ExperimentSpec::from_json(p.json)?;
        let a = run(&spec)?.deterministic_json();
        let b = run(&spec)?.deterministic_json();
        ensure!(a == b, "{}: reports differ", p.name);
    }
    Ok(format!("{} presets, two runs each, identical reports", presets().len()))
}

type Criterion = (u32, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, criterion_1, Some(Duration::from_secs(60))),
        (2, criterion_2, None),
        (3, criterion_3, None),
        (4, criterion_4, Some(Duration::from_secs(30))),
        (5, criterion_5, None),
        (6, criterion_6, None),
        (7, criterion_7, None),
        (8, criterion_8, None),
        (9, criterion_9, None),
        (10, criterion_10, None),
    ];
    let mut failed = 0;
    for (n, f, limit) in criteria {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let overrun = limit.filter(|l| elapsed > *l);
        let (status, note) = match (&outcome, overrun) {
            (Ok(msg), None) => ("PASS", msg.clone()),
            (Ok(msg), Some(l)) => ("FAIL", format!("over the {} s limit; {msg}", l.as_secs())),
            (Err(e), _) => ("FAIL", e.to_string()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        let limit = limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
        println!("criterion {n:>2}: {status} {:>7.2} s{limit}  {note}", elapsed.as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
