//! Named quasi-homomorphisms used by the presets and the acceptance suite.

use crate::error::{Error, Result};
use crate::group::{Element, Group, GroupRef, Letter};
use crate::qhom::QHom;
use crate::qmorph::{floor_i64, Quasimorphism};
use crate::retract::SesBundle;

/// Letters of a reduced word in a free group.
pub fn letters(group: &GroupRef, word: &str) -> Result<Vec<Letter>> {
    match group.parse(word)? {
        Element::Free(v) => Ok(v),
        _ => Err(crate::group::GroupError::WrongKind { expected: "free group", actual: group.name().to_string() }.into()),
    }
}

/// `r(g) = w^{h_w(g)}`, the Brooks retraction onto `⟨w⟩`.
pub fn brooks_retraction(group: &GroupRef, word: &str) -> Result<QHom> {
    let h = Quasimorphism::brooks(group.clone(), &letters(group, word)?)?;
    let w = group.parse(word)?;
    let g = group.clone();
    Ok(QHom::new(group.clone(), group.clone(), &format!("{}^{}", g.format(&w), h.label()), move |x| {
        g.pow(&w, floor_i64(h.eval(x)))
    }))
}

/// `Z →ω E → Z` with `ω(m, n) = ⌊α(m+n)⌋ − ⌊αm⌋ − ⌊αn⌋` and `α = √2/2`.
pub fn rounding_extension() -> Result<GroupRef> {
    use crate::group::{Alpha, Cocycle};
    Ok(Group::central_extension(1, Group::free_abelian(1)?, Cocycle::rounding(Alpha::sqrt_of(1, 2)))?)
}

/// The zero-lift section `n ↦ (0, n)` of the rounding extension.
pub fn rounding_section() -> Result<QHom> {
    Ok(SesBundle::from_central_extension(rounding_extension()?)?.section)
}

/// `s(x, y) = aˣbʸ`, a section of `H₃ → Z²` whose defect grows.
pub fn heisenberg_section() -> Result<QHom> {
    Ok(SesBundle::heisenberg_center(Group::heisenberg())?.section)
}

fn coordinate_sum(e: &Element) -> i64 {
    match e {
        Element::Free(v) => v.len() as i64,
        Element::Abelian(v) => v.iter().sum(),
        Element::Dihedral { shift, flip } => shift + i64::from(*flip),
        Element::Heisenberg { x, y, .. } => x + y,
        Element::Central { base, .. } => coordinate_sum(base),
        Element::Pair(a, b) => coordinate_sum(a) + coordinate_sum(b),
        Element::Finite(i) => i64::from(*i),
        Element::Affine { .. } => 0,
    }
}

/// Index of the perturbation value used at `g`: the sum of its normal form
/// coordinates (word length in a free group) modulo `k`.
pub fn coordinate_selector(k: usize) -> impl Fn(&Element) -> usize + Send + Sync + 'static {
    let k = k.max(1) as i64;
    move |x| coordinate_sum(x).rem_euclid(k) as usize
}

/// `φ′(g) = φ(g)·aᵢ` with `i` chosen by [`coordinate_selector`]; every
/// `aᵢ` must be central in the target.
pub fn central_shift(phi: &QHom, values: Vec<Element>) -> Result<QHom> {
    let t = phi.target.clone();
    for x in &values {
        for s in t.generator_elements() {
            if !t.is_identity(&t.commutator(x, &s)) {
                return Err(Error::NotCentral { element: t.format(x), witness: t.format(&s) });
            }
        }
    }
    if values.is_empty() {
        return Ok(phi.clone());
    }
    let select = coordinate_selector(values.len());
    let label = format!("{} * A", phi.label);
    let inner = phi.clone();
    Ok(QHom::new(phi.source.clone(), t.clone(), &label, move |g| t.mul(&inner.apply(g), &values[select(g)])))
}

/// The quasi-homomorphisms of the lemma suite: identities, the Brooks
/// retraction on `F₂`, the rounding section and two central perturbations.
pub fn lemma_suite_maps() -> Result<Vec<QHom>> {
    let f2 = Group::free(2)?;
    let h3 = Group::heisenberg();
    let e = rounding_extension()?;
    let s = rounding_section()?;
    let c = h3.commutator(h3.generator(0), h3.generator(1));
    let z = e.parse("z")?;
    Ok(vec![
        QHom::identity(f2.clone()),
        QHom::identity(h3.clone()),
        brooks_retraction(&f2, "a b")?,
        s.clone(),
        central_shift(&QHom::identity(h3.clone()), vec![h3.identity(), c])?,
        central_shift(&s, vec![e.identity(), z])?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qhom::defect_set;

    #[test]
    fn brooks_retraction_fixes_powers() {
        let f2 = Group::free(2).unwrap();
        let r = brooks_retraction(&f2, "a b").unwrap();
        let w = f2.parse("a b").unwrap();
        for n in -6..=6 {
            assert_eq!(r.apply(&f2.pow(&w, n)), f2.pow(&w, n));
        }
        assert_eq!(r.apply(&f2.parse("b a").unwrap()), f2.identity());
    }

    #[test]
    fn catalog_defects_are_stable() {
        for phi in lemma_suite_maps().unwrap() {
            assert!(defect_set(&phi, 4).unwrap().is_stable(), "{}", phi.label);
        }
        assert!(!defect_set(&heisenberg_section().unwrap(), 5).unwrap().is_stable());
    }
}
