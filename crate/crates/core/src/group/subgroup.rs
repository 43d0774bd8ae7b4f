use std::fmt;
use std::sync::Arc;

use super::{Element, GroupError, GroupKind, GroupRef, Letter};
use crate::metric::Ball;

pub type MembershipFn = dyn Fn(&Element) -> bool + Send + Sync;

#[derive(Clone)]
pub enum Membership {
    /// Decides membership exactly.
    Exact(Arc<MembershipFn>),
    /// Semi-decision: `g` is reported a member iff it is a product of at
    /// most `cutoff` subgroup generators.
    Approximate { cutoff: u32, ball: Arc<Ball> },
}

impl fmt::Debug for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::Exact(_) => f.write_str("Exact"),
            Membership::Approximate { cutoff, .. } => write!(f, "Approximate(cutoff={cutoff})"),
        }
    }
}

/// A subgroup `H ≤ G` with generators and a membership rule.
#[derive(Clone, Debug)]
pub struct SubgroupSpec {
    pub ambient: GroupRef,
    pub name: String,
    pub generators: Vec<Element>,
    pub membership: Membership,
}

impl SubgroupSpec {
    pub fn exact<F>(ambient: GroupRef, name: &str, generators: Vec<Element>, member: F) -> Self
    where
        F: Fn(&Element) -> bool + Send + Sync + 'static,
    {
        SubgroupSpec {
            ambient,
            name: name.to_string(),
            generators,
            membership: Membership::Exact(Arc::new(member)),
        }
    }

    /// Subgroup generated by arbitrary elements, with membership semi-decided
    /// by enumerating products of at most `cutoff` generators.
    pub fn generated(ambient: GroupRef, name: &str, generators: Vec<Element>, cutoff: u32) -> Self {
        let ball = Arc::new(Ball::new(&ambient, &generators, cutoff));
        SubgroupSpec {
            ambient,
            name: name.to_string(),
            generators,
            membership: Membership::Approximate { cutoff, ball },
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        match &self.membership {
            Membership::Exact(f) => f(g),
            Membership::Approximate { ball, .. } => ball.contains(g),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.membership, Membership::Exact(_))
    }

    /// The center `⟨c⟩` of the Heisenberg group.
    pub fn heisenberg_center(g: GroupRef) -> Result<Self, GroupError> {
        expect_kind(&g, matches!(g.kind(), GroupKind::Heisenberg), "heisenberg group")?;
        let c = Element::Heisenberg { x: 0, y: 0, z: 1 };
        Ok(Self::exact(g, "<c>", vec![c], |e| {
            matches!(e, Element::Heisenberg { x: 0, y: 0, .. })
        }))
    }

    /// The normal subgroup `⟨a, c⟩` of the Heisenberg group.
    pub fn heisenberg_a_c(g: GroupRef) -> Result<Self, GroupError> {
        expect_kind(&g, matches!(g.kind(), GroupKind::Heisenberg), "heisenberg group")?;
        let gens = vec![
            Element::Heisenberg { x: 1, y: 0, z: 0 },
            Element::Heisenberg { x: 0, y: 0, z: 1 },
        ];
        Ok(Self::exact(g, "<a,c>", gens, |e| matches!(e, Element::Heisenberg { y: 0, .. })))
    }

    /// The rotation subgroup `⟨t⟩` of the infinite dihedral group.
    pub fn dihedral_rotations(g: GroupRef) -> Result<Self, GroupError> {
        expect_kind(&g, matches!(g.kind(), GroupKind::InfiniteDihedral), "infinite dihedral group")?;
        let t = Element::Dihedral { shift: 1, flip: false };
        Ok(Self::exact(g, "<t>", vec![t], |e| matches!(e, Element::Dihedral { flip: false, .. })))
    }

    /// `⟨a⟩` in BS(1,n): the translations by integers.
    pub fn bs_translations(g: GroupRef) -> Result<Self, GroupError> {
        expect_kind(&g, matches!(g.kind(), GroupKind::BaumslagSolitar { .. }), "BS(1,n)")?;
        let a = g.generator(0).clone();
        Ok(Self::exact(g, "<a>", vec![a], |e| match e {
            Element::Affine { scale, shift } => *scale == 0 && shift.is_integer(),
            _ => false,
        }))
    }

    /// `⟨t⟩` in BS(1,n): the pure dilations.
    pub fn bs_dilations(g: GroupRef) -> Result<Self, GroupError> {
        expect_kind(&g, matches!(g.kind(), GroupKind::BaumslagSolitar { .. }), "BS(1,n)")?;
        let t = g.generator(1).clone();
        Ok(Self::exact(g, "<t>", vec![t], |e| match e {
            Element::Affine { shift, .. } => num_traits::Zero::is_zero(shift),
            _ => false,
        }))
    }

    /// `⟨w⟩` in a free group, for `w` cyclically reduced.
    pub fn free_cyclic(g: GroupRef, w: &[Letter]) -> Result<Self, GroupError> {
        expect_kind(&g, matches!(g.kind(), GroupKind::Free { .. }), "free group")?;
        let gen = g.word_to_element(w)?;
        let Element::Free(word) = gen.clone() else { unreachable!() };
        if word.is_empty() || word[0] == -word[word.len() - 1] {
            return Err(GroupError::InvalidParameters(
                "cyclic subgroup generator must be cyclically reduced and nontrivial".into(),
            ));
        }
        let name = format!("<{}>", g.format(&gen));
        Ok(Self::exact(g, &name, vec![gen], move |e| {
            let Element::Free(v) = e else { return false };
            if v.len() % word.len() != 0 {
                return false;
            }
            let k = v.len() / word.len();
            let inv: Vec<Letter> = word.iter().rev().map(|l| -l).collect();
            v.chunks(word.len()).all(|c| c == word.as_slice())
                || (k > 0 && v.chunks(inv.len()).all(|c| c == inv.as_slice()))
        }))
    }

    /// `H × 1` inside `H × Q`.
    pub fn left_factor(g: GroupRef) -> Result<Self, GroupError> {
        let GroupKind::DirectProduct(l, r) = g.kind() else {
            return Err(wrong(&g, "direct product"));
        };
        let (l, r) = (l.clone(), r.clone());
        let gens = l
            .generator_elements()
            .into_iter()
            .map(|x| Element::Pair(Box::new(x), Box::new(r.identity())))
            .collect();
        let id = r.identity();
        Ok(Self::exact(g, "left factor", gens, move |e| {
            matches!(e, Element::Pair(_, b) if **b == id)
        }))
    }

    /// `1 × Q` inside `H × Q`.
    pub fn right_factor(g: GroupRef) -> Result<Self, GroupError> {
        let GroupKind::DirectProduct(l, r) = g.kind() else {
            return Err(wrong(&g, "direct product"));
        };
        let (l, r) = (l.clone(), r.clone());
        let gens = r
            .generator_elements()
            .into_iter()
            .map(|x| Element::Pair(Box::new(l.identity()), Box::new(x)))
            .collect();
        let id = l.identity();
        Ok(Self::exact(g, "right factor", gens, move |e| {
            matches!(e, Element::Pair(a, _) if **a == id)
        }))
    }

    /// The fiber `{(z, 1)}` of a central extension.
    pub fn extension_fiber(g: GroupRef) -> Result<Self, GroupError> {
        let Some(ext) = g.extension() else {
            return Err(wrong(&g, "central extension"));
        };
        let base_id = ext.base.identity();
        let gens = g.generator_elements()[..ext.z_rank].to_vec();
        Ok(Self::exact(g, "fiber", gens, move |e| {
            matches!(e, Element::Central { base, .. } if **base == base_id)
        }))
    }
}

fn wrong(g: &GroupRef, expected: &'static str) -> GroupError {
    GroupError::WrongKind { expected, actual: g.name().to_string() }
}

fn expect_kind(g: &GroupRef, ok: bool, expected: &'static str) -> Result<(), GroupError> {
    if ok {
        Ok(())
    } else {
        Err(wrong(g, expected))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn cyclic_membership_in_free_group() {
        let f2 = Group::free(2).unwrap();
        let h = SubgroupSpec::free_cyclic(f2.clone(), &[1, 2]).unwrap();
        assert!(h.contains(&f2.parse("a b a b").unwrap()));
        assert!(h.contains(&f2.parse("b^-1 a^-1").unwrap()));
        assert!(h.contains(&f2.identity()));
        assert!(!h.contains(&f2.parse("b a").unwrap()));
        assert!(!h.contains(&f2.parse("a b a").unwrap()));
        assert!(SubgroupSpec::free_cyclic(f2, &[1, 2, -1]).is_err());
    }

    #[test]
    fn approximate_membership_is_flagged() {
        let f2 = Group::free(2).unwrap();
        let gens = vec![f2.parse("a^2").unwrap()];
        let h = SubgroupSpec::generated(f2.clone(), "<a^2>", gens, 3);
        assert!(!h.is_exact());
        assert!(h.contains(&f2.parse("a^6").unwrap()));
        assert!(!h.contains(&f2.parse("a^8").unwrap()));
    }

    #[test]
    fn wrong_kind_is_reported() {
        assert!(matches!(
            SubgroupSpec::heisenberg_center(Group::infinite_dihedral()),
            Err(GroupError::WrongKind { .. })
        ));
    }
}
