//! Computable groups given by canonical normal forms.
//!
//! Every element is stored in a unique canonical form, so equality and
//! hashing of [`Element`] are exact group equality. Groups are immutable
//! once built and are shared behind [`GroupRef`].

mod cocycle;
mod finite;
mod spec;
mod subgroup;
mod word;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use cocycle::{Alpha, Cocycle, CocycleRule};
pub use finite::FiniteTable;
pub use spec::{CocycleSpec, GroupSpec};
pub use subgroup::{Membership, SubgroupSpec};
pub use word::{compress, expand, format_syllables, letter, parse_word, Letter, Syllable, Word};

pub type GroupRef = Arc<Group>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("cocycle identity fails on ({x}, {y}, {z}): {detail}")]
    NonAssociativeCocycle {
        x: String,
        y: String,
        z: String,
        detail: String,
    },
    #[error("element {element} does not belong to {group}")]
    GroupMismatch { group: String, element: String },
    #[error("generator index {index} out of range ({count} generators)")]
    IndexOutOfRange { index: i64, count: usize },
    #[error("expected {expected}, got {actual}")]
    WrongKind {
        expected: &'static str,
        actual: String,
    },
    #[error("cannot parse word {input:?}: {reason}")]
    BadWord { input: String, reason: String },
}

/// Canonical normal form of a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// Freely reduced word of signed letters.
    Free(Vec<Letter>),
    /// Exponent vector.
    Abelian(Vec<i64>),
    /// `t^shift s^flip` in the infinite dihedral group.
    Dihedral { shift: i64, flip: bool },
    /// `a^x b^y c^z` with `c = [a,b]` central.
    Heisenberg { x: i64, y: i64, z: i64 },
    /// The affine map `v ↦ n^scale v + shift` in BS(1,n).
    Affine { scale: i64, shift: BigRational },
    /// Index into a multiplication table.
    Finite(u32),
    Pair(Box<Element>, Box<Element>),
    /// `(z, q)` in a central extension of `q`'s group by `Z^k`.
    Central { fiber: Vec<i64>, base: Box<Element> },
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub element: Element,
}

#[derive(Clone, Debug)]
pub struct Extension {
    pub z_rank: usize,
    pub base: GroupRef,
    pub cocycle: Cocycle,
}

#[derive(Clone, Debug)]
pub enum GroupKind {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    InfiniteDihedral,
    Heisenberg,
    BaumslagSolitar { n: u32 },
    Finite(FiniteTable),
    DirectProduct(GroupRef, GroupRef),
    CentralExtension(Extension),
}

#[derive(Clone, Debug)]
pub struct Group {
    name: String,
    kind: GroupKind,
    generators: Vec<Generator>,
}

fn letter_names(count: usize, prefix: &str) -> Vec<String> {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    if count <= LETTERS.len() && prefix.is_empty() {
        LETTERS[..count]
            .iter()
            .map(|&c| (c as char).to_string())
            .collect()
    } else {
        let p = if prefix.is_empty() { "x" } else { prefix };
        (1..=count).map(|i| format!("{p}{i}")).collect()
    }
}

impl Group {
    fn build(name: String, kind: GroupKind, generators: Vec<Generator>) -> GroupRef {
        Arc::new(Group {
            name,
            kind,
            generators,
        })
    }

    pub fn free(rank: usize) -> Result<GroupRef, GroupError> {
        if rank == 0 {
            return Err(GroupError::InvalidParameters("free group needs rank >= 1".into()));
        }
        let generators = letter_names(rank, "")
            .into_iter()
            .enumerate()
            .map(|(i, name)| Generator {
                name,
                element: Element::Free(vec![letter(i, false)]),
            })
            .collect();
        Ok(Self::build(format!("F{rank}"), GroupKind::Free { rank }, generators))
    }

    pub fn free_abelian(rank: usize) -> Result<GroupRef, GroupError> {
        Self::free_abelian_named(&letter_names(rank, ""))
    }

    /// Free abelian group whose standard basis carries the given names.
    pub fn free_abelian_named<S: AsRef<str>>(names: &[S]) -> Result<GroupRef, GroupError> {
        let rank = names.len();
        if rank == 0 {
            return Err(GroupError::InvalidParameters(
                "free abelian group needs rank >= 1".into(),
            ));
        }
        let generators = names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let mut v = vec![0; rank];
                v[i] = 1;
                Generator {
                    name: name.as_ref().to_string(),
                    element: Element::Abelian(v),
                }
            })
            .collect();
        Ok(Self::build(
            format!("Z^{rank}"),
            GroupKind::FreeAbelian { rank },
            generators,
        ))
    }

    pub fn infinite_dihedral() -> GroupRef {
        let generators = vec![
            Generator {
                name: "t".into(),
                element: Element::Dihedral { shift: 1, flip: false },
            },
            Generator {
                name: "s".into(),
                element: Element::Dihedral { shift: 0, flip: true },
            },
        ];
        Self::build("D_inf".into(), GroupKind::InfiniteDihedral, generators)
    }

    pub fn heisenberg() -> GroupRef {
        let generators = vec![
            Generator {
                name: "a".into(),
                element: Element::Heisenberg { x: 1, y: 0, z: 0 },
            },
            Generator {
                name: "b".into(),
                element: Element::Heisenberg { x: 0, y: 1, z: 0 },
            },
        ];
        Self::build("Heis".into(), GroupKind::Heisenberg, generators)
    }

    pub fn baumslag_solitar(n: u32) -> Result<GroupRef, GroupError> {
        if n < 2 {
            return Err(GroupError::InvalidParameters("BS(1,n) needs n >= 2".into()));
        }
        let generators = vec![
            Generator {
                name: "a".into(),
                element: Element::Affine {
                    scale: 0,
                    shift: BigRational::one(),
                },
            },
            Generator {
                name: "t".into(),
                element: Element::Affine {
                    scale: 1,
                    shift: BigRational::zero(),
                },
            },
        ];
        Ok(Self::build(
            format!("BS(1,{n})"),
            GroupKind::BaumslagSolitar { n },
            generators,
        ))
    }

    /// Finite group from a verified table. `generators` defaults to every
    /// non-identity element.
    pub fn finite(
        name: &str,
        table: FiniteTable,
        generators: Option<Vec<u32>>,
    ) -> Result<GroupRef, GroupError> {
        let gens: Vec<u32> = match generators {
            Some(g) => {
                if let Some(&bad) = g.iter().find(|&&x| x as usize >= table.order()) {
                    return Err(GroupError::InvalidParameters(format!(
                        "generator {bad} outside table of order {}",
                        table.order()
                    )));
                }
                g
            }
            None => (0..table.order() as u32)
                .filter(|&x| x != table.identity())
                .collect(),
        };
        if !table.generated_by(&gens) {
            return Err(GroupError::InvalidParameters(
                "listed elements do not generate the finite group".into(),
            ));
        }
        let generators = gens
            .iter()
            .enumerate()
            .map(|(i, &g)| Generator {
                name: if gens.len() == 1 { "g".into() } else { format!("g{}", i + 1) },
                element: Element::Finite(g),
            })
            .collect();
        let table = table.with_word_cache(&gens);
        Ok(Self::build(name.to_string(), GroupKind::Finite(table), generators))
    }

    pub fn cyclic(order: u32) -> Result<GroupRef, GroupError> {
        let table = FiniteTable::cyclic(order)?;
        let gens = if order == 1 { vec![0] } else { vec![1] };
        Self::finite(&format!("Z/{order}"), table, Some(gens))
    }

    pub fn direct_product(left: GroupRef, right: GroupRef) -> GroupRef {
        let lnames: Vec<&str> = left.generators.iter().map(|g| g.name.as_str()).collect();
        let clash = right
            .generators
            .iter()
            .any(|g| lnames.contains(&g.name.as_str()));
        let mut generators = Vec::new();
        for g in &left.generators {
            generators.push(Generator {
                name: if clash { format!("L.{}", g.name) } else { g.name.clone() },
                element: Element::Pair(Box::new(g.element.clone()), Box::new(right.identity())),
            });
        }
        for g in &right.generators {
            generators.push(Generator {
                name: if clash { format!("R.{}", g.name) } else { g.name.clone() },
                element: Element::Pair(Box::new(left.identity()), Box::new(g.element.clone())),
            });
        }
        let name = format!("({} x {})", left.name, right.name);
        Self::build(name, GroupKind::DirectProduct(left, right), generators)
    }

    /// Central extension of `base` by `Z^z_rank` with multiplication
    /// `(z1,q1)(z2,q2) = (z1+z2+ω(q1,q2), q1 q2)`. The cocycle is checked on
    /// sampled triples before the group is returned.
    pub fn central_extension(
        z_rank: usize,
        base: GroupRef,
        cocycle: Cocycle,
    ) -> Result<GroupRef, GroupError> {
        if z_rank == 0 {
            return Err(GroupError::InvalidParameters(
                "central extension needs z_rank >= 1".into(),
            ));
        }
        cocycle.check_compatible(z_rank, &base)?;
        cocycle.verify(z_rank, &base)?;
        let fiber_names = if z_rank == 1 {
            vec!["z".to_string()]
        } else {
            letter_names(z_rank, "z")
        };
        let clash = base.generators.iter().any(|g| fiber_names.contains(&g.name));
        let mut generators = Vec::new();
        for (i, name) in fiber_names.iter().enumerate() {
            let mut fiber = vec![0; z_rank];
            fiber[i] = 1;
            generators.push(Generator {
                name: name.clone(),
                element: Element::Central {
                    fiber,
                    base: Box::new(base.identity()),
                },
            });
        }
        for g in &base.generators {
            generators.push(Generator {
                name: if clash { format!("Q.{}", g.name) } else { g.name.clone() },
                element: Element::Central {
                    fiber: vec![0; z_rank],
                    base: Box::new(g.element.clone()),
                },
            });
        }
        let name = format!("Ext({}, Z^{z_rank}, {})", base.name, cocycle.label());
        Ok(Self::build(
            name,
            GroupKind::CentralExtension(Extension {
                z_rank,
                base,
                cocycle,
            }),
            generators,
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GroupKind::Free { .. } => "free",
            GroupKind::FreeAbelian { .. } => "free_abelian",
            GroupKind::InfiniteDihedral => "infinite_dihedral",
            GroupKind::Heisenberg => "heisenberg",
            GroupKind::BaumslagSolitar { .. } => "baumslag_solitar",
            GroupKind::Finite(_) => "finite",
            GroupKind::DirectProduct(..) => "direct_product",
            GroupKind::CentralExtension(_) => "central_extension",
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &Element {
        &self.generators[i].element
    }

    pub fn generator_elements(&self) -> Vec<Element> {
        self.generators.iter().map(|g| g.element.clone()).collect()
    }

    pub fn generator_name(&self, i: usize) -> &str {
        &self.generators[i].name
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn extension(&self) -> Option<&Extension> {
        match &self.kind {
            GroupKind::CentralExtension(ext) => Some(ext),
            _ => None,
        }
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            GroupKind::Free { .. } => Element::Free(Vec::new()),
            GroupKind::FreeAbelian { rank } => Element::Abelian(vec![0; *rank]),
            GroupKind::InfiniteDihedral => Element::Dihedral { shift: 0, flip: false },
            GroupKind::Heisenberg => Element::Heisenberg { x: 0, y: 0, z: 0 },
            GroupKind::BaumslagSolitar { .. } => Element::Affine {
                scale: 0,
                shift: BigRational::zero(),
            },
            GroupKind::Finite(t) => Element::Finite(t.identity()),
            GroupKind::DirectProduct(l, r) => {
                Element::Pair(Box::new(l.identity()), Box::new(r.identity()))
            }
            GroupKind::CentralExtension(ext) => Element::Central {
                fiber: vec![0; ext.z_rank],
                base: Box::new(ext.base.identity()),
            },
        }
    }

    pub fn is_identity(&self, e: &Element) -> bool {
        *e == self.identity()
    }

    /// Whether `e` is a well-formed canonical element of this group.
    pub fn contains(&self, e: &Element) -> bool {
        match (&self.kind, e) {
            (GroupKind::Free { rank }, Element::Free(w)) => {
                w.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= *rank)
                    && w.windows(2).all(|p| p[0] != -p[1])
            }
            (GroupKind::FreeAbelian { rank }, Element::Abelian(v)) => v.len() == *rank,
            (GroupKind::InfiniteDihedral, Element::Dihedral { .. }) => true,
            (GroupKind::Heisenberg, Element::Heisenberg { .. }) => true,
            (GroupKind::BaumslagSolitar { n }, Element::Affine { shift, .. }) => {
                // the denominator must divide a power of n
                let n = BigInt::from(*n);
                let mut d = shift.denom().clone();
                loop {
                    if d.is_one() {
                        break true;
                    }
                    let g = d.gcd(&n);
                    if g.is_one() {
                        break false;
                    }
                    d /= g;
                }
            }
            (GroupKind::Finite(t), Element::Finite(i)) => (*i as usize) < t.order(),
            (GroupKind::DirectProduct(l, r), Element::Pair(a, b)) => l.contains(a) && r.contains(b),
            (GroupKind::CentralExtension(ext), Element::Central { fiber, base }) => {
                fiber.len() == ext.z_rank && ext.base.contains(base)
            }
            _ => false,
        }
    }

    fn mismatch(&self, e: &Element) -> GroupError {
        GroupError::GroupMismatch {
            group: self.name.clone(),
            element: format!("{e:?}"),
        }
    }

    /// Product `a·b`. Panics if either operand has the wrong shape for this
    /// group; use [`Group::try_mul`] for checked input.
    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match (&self.kind, a, b) {
            (GroupKind::Free { .. }, Element::Free(x), Element::Free(y)) => {
                let mut k = 0;
                while k < x.len() && k < y.len() && x[x.len() - 1 - k] == -y[k] {
                    k += 1;
                }
                let mut w = Vec::with_capacity(x.len() + y.len() - 2 * k);
                w.extend_from_slice(&x[..x.len() - k]);
                w.extend_from_slice(&y[k..]);
                Element::Free(w)
            }
            (GroupKind::FreeAbelian { .. }, Element::Abelian(x), Element::Abelian(y)) => {
                Element::Abelian(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (
                GroupKind::InfiniteDihedral,
                Element::Dihedral { shift: k, flip: e },
                Element::Dihedral { shift: m, flip: f },
            ) => Element::Dihedral {
                shift: if *e { k - m } else { k + m },
                flip: e ^ f,
            },
            (
                GroupKind::Heisenberg,
                Element::Heisenberg { x, y, z },
                Element::Heisenberg { x: x2, y: y2, z: z2 },
            ) => Element::Heisenberg {
                x: x + x2,
                y: y + y2,
                z: z + z2 - x2 * y,
            },
            (
                GroupKind::BaumslagSolitar { n },
                Element::Affine { scale: k1, shift: r1 },
                Element::Affine { scale: k2, shift: r2 },
            ) => Element::Affine {
                scale: k1 + k2,
                shift: r1 + r2 * n_power(*n, *k1),
            },
            (GroupKind::Finite(t), Element::Finite(i), Element::Finite(j)) => {
                Element::Finite(t.mul(*i, *j))
            }
            (GroupKind::DirectProduct(l, r), Element::Pair(a1, b1), Element::Pair(a2, b2)) => {
                Element::Pair(Box::new(l.mul(a1, a2)), Box::new(r.mul(b1, b2)))
            }
            (
                GroupKind::CentralExtension(ext),
                Element::Central { fiber: z1, base: q1 },
                Element::Central { fiber: z2, base: q2 },
            ) => {
                let w = ext.cocycle.eval(ext.z_rank, q1, q2);
                Element::Central {
                    fiber: z1
                        .iter()
                        .zip(z2)
                        .zip(&w)
                        .map(|((p, q), r)| p + q + r)
                        .collect(),
                    base: Box::new(ext.base.mul(q1, q2)),
                }
            }
            _ => panic!("{}", self.mismatch(if self.contains(a) { b } else { a })),
        }
    }

    pub fn inv(&self, a: &Element) -> Element {
        match (&self.kind, a) {
            (GroupKind::Free { .. }, Element::Free(w)) => {
                Element::Free(w.iter().rev().map(|l| -l).collect())
            }
            (GroupKind::FreeAbelian { .. }, Element::Abelian(v)) => {
                Element::Abelian(v.iter().map(|x| -x).collect())
            }
            (GroupKind::InfiniteDihedral, Element::Dihedral { shift, flip }) => {
                if *flip {
                    a.clone()
                } else {
                    Element::Dihedral {
                        shift: -shift,
                        flip: false,
                    }
                }
            }
            (GroupKind::Heisenberg, Element::Heisenberg { x, y, z }) => Element::Heisenberg {
                x: -x,
                y: -y,
                z: -z - x * y,
            },
            (GroupKind::BaumslagSolitar { n }, Element::Affine { scale, shift }) => {
                Element::Affine {
                    scale: -scale,
                    shift: -(shift * n_power(*n, -scale)),
                }
            }
            (GroupKind::Finite(t), Element::Finite(i)) => Element::Finite(t.inv(*i)),
            (GroupKind::DirectProduct(l, r), Element::Pair(x, y)) => {
                Element::Pair(Box::new(l.inv(x)), Box::new(r.inv(y)))
            }
            (GroupKind::CentralExtension(ext), Element::Central { fiber, base }) => {
                let qi = ext.base.inv(base);
                let w = ext.cocycle.eval(ext.z_rank, base, &qi);
                Element::Central {
                    fiber: fiber.iter().zip(&w).map(|(z, c)| -z - c).collect(),
                    base: Box::new(qi),
                }
            }
            _ => panic!("{}", self.mismatch(a)),
        }
    }

    pub fn try_mul(&self, a: &Element, b: &Element) -> Result<Element, GroupError> {
        for e in [a, b] {
            if !self.contains(e) {
                return Err(self.mismatch(e));
            }
        }
        Ok(self.mul(a, b))
    }

    pub fn try_inv(&self, a: &Element) -> Result<Element, GroupError> {
        if !self.contains(a) {
            return Err(self.mismatch(a));
        }
        Ok(self.inv(a))
    }

    /// `a⁻¹ b`
    pub fn left_quotient(&self, a: &Element, b: &Element) -> Element {
        self.mul(&self.inv(a), b)
    }

    /// `[a,b] = a b a⁻¹ b⁻¹`
    pub fn commutator(&self, a: &Element, b: &Element) -> Element {
        let ab = self.mul(a, b);
        let ba = self.mul(b, a);
        self.mul(&ab, &self.inv(&ba))
    }

    /// `a b a⁻¹`
    pub fn conjugate(&self, a: &Element, b: &Element) -> Element {
        self.mul(&self.mul(a, b), &self.inv(a))
    }

    pub fn product<'a, I: IntoIterator<Item = &'a Element>>(&self, items: I) -> Element {
        items
            .into_iter()
            .fold(self.identity(), |acc, e| self.mul(&acc, e))
    }

    pub fn pow(&self, a: &Element, n: i64) -> Element {
        let mut base = if n < 0 { self.inv(a) } else { a.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = self.identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn letter_element(&self, l: Letter) -> Result<Element, GroupError> {
        let idx = l.unsigned_abs() as usize;
        if l == 0 || idx > self.generators.len() {
            return Err(GroupError::IndexOutOfRange {
                index: l as i64,
                count: self.generators.len(),
            });
        }
        let g = &self.generators[idx - 1].element;
        Ok(if l > 0 { g.clone() } else { self.inv(g) })
    }

    /// Evaluates a word in the generators.
    pub fn word_to_element(&self, word: &[Letter]) -> Result<Element, GroupError> {
        let mut acc = self.identity();
        for &l in word {
            acc = self.mul(&acc, &self.letter_element(l)?);
        }
        Ok(acc)
    }

    pub fn syllables_to_element(&self, syllables: &[Syllable]) -> Element {
        syllables.iter().fold(self.identity(), |acc, s| {
            self.mul(&acc, &self.pow(&self.generators[s.gen].element, s.exp))
        })
    }

    pub fn parse(&self, word: &str) -> Result<Element, GroupError> {
        self.word_to_element(&parse_word(self, word)?)
    }

    /// A word in the generators representing `e`, run-length encoded.
    /// Evaluating it returns exactly `e`; it need not be geodesic.
    pub fn syllables(&self, e: &Element) -> Vec<Syllable> {
        match (&self.kind, e) {
            (GroupKind::Free { .. }, Element::Free(w)) => compress(w),
            (GroupKind::FreeAbelian { .. }, Element::Abelian(v)) => v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| Syllable::new(i, x))
                .collect(),
            (GroupKind::InfiniteDihedral, Element::Dihedral { shift, flip }) => {
                let mut out = Vec::new();
                if *shift != 0 {
                    out.push(Syllable::new(0, *shift));
                }
                if *flip {
                    out.push(Syllable::new(1, 1));
                }
                out
            }
            (GroupKind::Heisenberg, Element::Heisenberg { x, y, z }) => {
                let mut out = Vec::new();
                if *x != 0 {
                    out.push(Syllable::new(0, *x));
                }
                if *y != 0 {
                    out.push(Syllable::new(1, *y));
                }
                out.extend(heisenberg_center_syllables(*z));
                out
            }
            (GroupKind::BaumslagSolitar { n }, Element::Affine { scale, shift }) => {
                bs_syllables(*n, *scale, shift)
            }
            (GroupKind::Finite(t), Element::Finite(i)) => compress(t.word_of(*i)),
            (GroupKind::DirectProduct(l, r), Element::Pair(a, b)) => {
                let offset = l.generators.len();
                let mut out = l.syllables(a);
                out.extend(
                    r.syllables(b)
                        .into_iter()
                        .map(|s| Syllable::new(s.gen + offset, s.exp)),
                );
                out
            }
            (GroupKind::CentralExtension(ext), Element::Central { fiber, base }) => {
                let lifted: Vec<Syllable> = ext
                    .base
                    .syllables(base)
                    .into_iter()
                    .map(|s| Syllable::new(s.gen + ext.z_rank, s.exp))
                    .collect();
                let value = self.syllables_to_element(&lifted);
                let Element::Central { fiber: z0, .. } = value else {
                    unreachable!()
                };
                let mut out: Vec<Syllable> = fiber
                    .iter()
                    .zip(&z0)
                    .enumerate()
                    .filter(|(_, (z, w))| z != w)
                    .map(|(i, (z, w))| Syllable::new(i, z - w))
                    .collect();
                out.extend(lifted);
                out
            }
            _ => panic!("{}", self.mismatch(e)),
        }
    }

    pub fn element_word(&self, e: &Element) -> Word {
        expand(&self.syllables(e))
    }

    /// Prints `e` as a word in the generators.
    pub fn format(&self, e: &Element) -> String {
        format_syllables(self, &self.syllables(e))
    }

    /// Word length with respect to the default generating set when it has a
    /// closed form; `None` means a search is needed.
    pub fn default_length(&self, e: &Element) -> Option<u64> {
        match (&self.kind, e) {
            (GroupKind::Free { .. }, Element::Free(w)) => Some(w.len() as u64),
            (GroupKind::FreeAbelian { .. }, Element::Abelian(v)) => {
                Some(v.iter().map(|x| x.unsigned_abs()).sum())
            }
            (GroupKind::InfiniteDihedral, Element::Dihedral { shift, flip }) => {
                Some(shift.unsigned_abs() + u64::from(*flip))
            }
            (GroupKind::DirectProduct(l, r), Element::Pair(a, b)) => {
                Some(l.default_length(a)? + r.default_length(b)?)
            }
            _ => None,
        }
    }

    /// Whether `[a,b] = 1` for every pair of generators.
    pub fn is_abelian(&self) -> bool {
        let g = &self.generators;
        g.iter().all(|x| {
            g.iter()
                .all(|y| self.is_identity(&self.commutator(&x.element, &y.element)))
        })
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn n_power(n: u32, k: i64) -> BigRational {
    let base = BigInt::from(n).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// `c^z` as `[a^p, b^p][a, b^r]` (or the inverse orientation for `z < 0`).
fn heisenberg_center_syllables(z: i64) -> Vec<Syllable> {
    if z == 0 {
        return Vec::new();
    }
    let (first, second) = if z > 0 { (0, 1) } else { (1, 0) };
    let m = z.unsigned_abs();
    let p = m.isqrt() as i64;
    let r = m as i64 - p * p;
    let mut out = vec![
        Syllable::new(first, p),
        Syllable::new(second, p),
        Syllable::new(first, -p),
        Syllable::new(second, -p),
    ];
    if r > 0 {
        out.extend([
            Syllable::new(first, 1),
            Syllable::new(second, r),
            Syllable::new(first, -1),
            Syllable::new(second, -r),
        ]);
    }
    out
}

/// `(k, m/n^e)` as `t^-e · a^m · t^e · t^k`, with `a^m` written in base `n`
/// via `t a^x t⁻¹ = a^{nx}` once `|m| > n²`.
fn bs_syllables(n: u32, scale: i64, shift: &BigRational) -> Vec<Syllable> {
    const A: usize = 0;
    const T: usize = 1;
    let nb = BigInt::from(n);
    let mut e: i64 = 0;
    let mut pow = BigInt::one();
    while !(&pow % shift.denom()).is_zero() {
        pow *= &nb;
        e += 1;
    }
    let m: BigInt = shift.numer() * (&pow / shift.denom());
    let mut out = Vec::new();
    let push = |out: &mut Vec<Syllable>, gen: usize, exp: i64| {
        if exp == 0 {
            return;
        }
        match out.last_mut() {
            Some(last) if last.gen == gen => {
                last.exp += exp;
                if last.exp == 0 {
                    out.pop();
                }
            }
            _ => out.push(Syllable::new(gen, exp)),
        }
    };
    push(&mut out, T, -e);
    let small = BigInt::from(n) * BigInt::from(n);
    if m.abs() <= small {
        push(&mut out, A, m.to_i64().expect("small shift"));
    } else {
        // a^m = a^{d0} t a^{d1} t ... a^{dL} t^{-L}, digits with the sign of m
        let negative = m.is_negative();
        let mut rest = m.abs();
        let mut depth = 0;
        while !rest.is_zero() {
            let (q, d) = rest.div_rem(&nb);
            let d = d.to_i64().expect("digit");
            push(&mut out, A, if negative { -d } else { d });
            rest = q;
            if !rest.is_zero() {
                push(&mut out, T, 1);
                depth += 1;
            }
        }
        push(&mut out, T, -depth);
    }
    push(&mut out, T, e + scale);
    out
}
