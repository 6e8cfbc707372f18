//! p-morphisms: checking, surjective search, image enumeration and the
//! semantic side of the Jankov criterion.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{bit, ones};
use crate::canon::{canonical_form, CanonicalForm};
use crate::error::{Error, Result};
use crate::formula::{AxiomSet, SemanticCheck};
use crate::poset::Poset;
use crate::semantics::{frame_validates_capped, DEFAULT_VALUATION_CAP};

/// Default bound on search nodes for the enumerations in this module.
pub const DEFAULT_SEARCH_CAP: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PMorphism {
    pub source: Poset,
    pub target: Poset,
    pub map: Vec<usize>,
}

impl PMorphism {
    pub fn new(source: Poset, target: Poset, map: Vec<usize>) -> core::result::Result<PMorphism, Violation> {
        match pmorphism_violation(&map, &source, &target) {
            Some(v) => Err(v),
            None => Ok(PMorphism { source, target, map }),
        }
    }

    pub fn is_surjective(&self) -> bool {
        self.map.iter().fold(0u64, |m, &y| m | bit(y)) == self.target.all()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PMorphism) -> Option<PMorphism> {
        if self.target != other.source {
            return None;
        }
        let map = self.map.iter().map(|&y| other.map[y]).collect();
        PMorphism::new(self.source.clone(), other.target.clone(), map).ok()
    }
}

/// Why a map is not a p-morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The map does not have one target world per source world.
    WrongLength { expected: usize, found: usize },
    OutOfRange { world: usize, image: usize },
    /// `lower ≤ upper` but `f(lower) ≰ f(upper)`.
    NotMonotone { lower: usize, upper: usize },
    /// `f(world) ≤ target` but no point above `world` maps to `target`.
    Back { world: usize, target: usize },
}

/// `None` when `map` is a p-morphism `p → q`.
pub fn pmorphism_violation(map: &[usize], p: &Poset, q: &Poset) -> Option<Violation> {
    if map.len() != p.len() {
        return Some(Violation::WrongLength { expected: p.len(), found: map.len() });
    }
    if let Some(w) = (0..p.len()).find(|&w| map[w] >= q.len()) {
        return Some(Violation::OutOfRange { world: w, image: map[w] });
    }
    for x in 0..p.len() {
        for y in ones(p.up(x)) {
            if !q.leq(map[x], map[y]) {
                return Some(Violation::NotMonotone { lower: x, upper: y });
            }
        }
    }
    for x in 0..p.len() {
        let image = ones(p.up(x)).fold(0u64, |m, y| m | bit(map[y]));
        if let Some(t) = ones(q.up(map[x]) & !image).next() {
            return Some(Violation::Back { world: x, target: t });
        }
    }
    None
}

pub fn check_pmorphism(map: &[usize], p: &Poset, q: &Poset) -> bool {
    pmorphism_violation(map, p, q).is_none()
}

/// All surjective p-morphisms `p ↠ q` in lexicographic order of their maps.
pub fn surjective_pmorphisms(p: &Poset, q: &Poset) -> Result<Vec<Vec<usize>>> {
    surjective_pmorphisms_capped(p, q, usize::MAX, DEFAULT_SEARCH_CAP)
}

/// At most `limit` maps, exploring at most `node_cap` partial assignments.
pub fn surjective_pmorphisms_capped(p: &Poset, q: &Poset, limit: usize, node_cap: u64) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if q.is_empty() || p.len() < q.len() || p.depth() < q.depth() {
        return Ok(out);
    }
    let order = p.top_down_order();
    let mut map = vec![usize::MAX; p.len()];
    let mut nodes = 0u64;
    assign(p, q, &order, 0, &mut map, &mut out, limit, &mut nodes, node_cap)?;
    out.sort();
    Ok(out)
}

pub fn first_surjective_pmorphism(p: &Poset, q: &Poset) -> Result<Option<Vec<usize>>> {
    Ok(surjective_pmorphisms_capped(p, q, 1, DEFAULT_SEARCH_CAP)?.pop())
}

#[allow(clippy::too_many_arguments)]
fn assign(
    p: &Poset,
    q: &Poset,
    order: &[usize],
    i: usize,
    map: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
    nodes: &mut u64,
    node_cap: u64,
) -> Result<()> {
    if out.len() >= limit {
        return Ok(());
    }
    *nodes += 1;
    if *nodes > node_cap {
        return Err(Error::CapExceeded { what: "p-morphism search nodes", limit: node_cap });
    }
    if i == order.len() {
        if map.iter().fold(0u64, |m, &y| m | bit(y)) == q.all() {
            out.push(map.clone());
        }
        return Ok(());
    }
    // every remaining world can still cover at most one new target point
    let covered = order[..i].iter().fold(0u64, |m, &x| m | bit(map[x]));
    if (q.all() & !covered).count_ones() as usize > order.len() - i {
        return Ok(());
    }
    let x = order[i];
    let above = ones(p.strict_up(x)).fold(0u64, |m, y| m | bit(map[y]));
    for y in 0..q.len() {
        // monotone: y below every image above x; back: ↑y is exactly y plus those images
        if q.up(y) == above | bit(y) {
            map[x] = y;
            assign(p, q, order, i + 1, map, out, limit, nodes, node_cap)?;
            map[x] = usize::MAX;
        }
    }
    Ok(())
}

/// Quotient of `p` by a kernel given as class ids; `None` when the kernel is
/// not that of a p-morphism.
pub fn quotient(p: &Poset, classes: &[usize]) -> Option<Poset> {
    let k = classes.iter().copied().max().map_or(0, |m| m + 1);
    let mut pairs = Vec::new();
    for x in 0..p.len() {
        for y in ones(p.up(x)) {
            if classes[x] != classes[y] {
                pairs.push((classes[x], classes[y]));
            }
        }
    }
    let names = (0..k).map(|c| class_name(p, classes, c)).collect();
    let image = Poset::from_relation(names, &pairs).ok()?;
    check_pmorphism(classes, p, &image).then_some(image)
}

fn class_name(p: &Poset, classes: &[usize], c: usize) -> alloc::string::String {
    let members: Vec<&str> = (0..p.len()).filter(|&w| classes[w] == c).map(|w| p.name(w)).collect();
    members.join("+")
}

/// All p-morphic images of `p` up to isomorphism, in canonical-form order.
pub fn pmorphic_images(p: &Poset) -> Result<Vec<Poset>> {
    pmorphic_images_capped(p, DEFAULT_SEARCH_CAP)
}

pub fn pmorphic_images_capped(p: &Poset, node_cap: u64) -> Result<Vec<Poset>> {
    let mut found: alloc::collections::BTreeMap<CanonicalForm, Poset> = alloc::collections::BTreeMap::new();
    let order = p.top_down_order();
    let mut classes = vec![usize::MAX; p.len()];
    let mut sigs: Vec<u64> = Vec::new();
    let mut nodes = 0u64;
    partitions(p, &order, 0, &mut classes, &mut sigs, &mut nodes, node_cap, &mut |cl| {
        if let Some(q) = quotient(p, cl) {
            found.entry(canonical_form(&q)).or_insert(q);
        }
    })?;
    Ok(found.into_values().collect())
}

/// Kernels built top-down: a world may join a class only if the classes
/// above it (itself included) agree with those of the class.
#[allow(clippy::too_many_arguments)]
fn partitions(
    p: &Poset,
    order: &[usize],
    i: usize,
    classes: &mut Vec<usize>,
    sigs: &mut Vec<u64>,
    nodes: &mut u64,
    node_cap: u64,
    emit: &mut impl FnMut(&[usize]),
) -> Result<()> {
    *nodes += 1;
    if *nodes > node_cap {
        return Err(Error::CapExceeded { what: "partition search nodes", limit: node_cap });
    }
    if i == order.len() {
        emit(classes);
        return Ok(());
    }
    let x = order[i];
    let above = ones(p.strict_up(x)).fold(0u64, |m, y| m | bit(classes[y]));
    for c in 0..sigs.len() {
        if sigs[c] == above | bit(c) {
            classes[x] = c;
            partitions(p, order, i + 1, classes, sigs, nodes, node_cap, emit)?;
        }
    }
    let c = sigs.len();
    if c < 64 {
        classes[x] = c;
        sigs.push(above | bit(c));
        partitions(p, order, i + 1, classes, sigs, nodes, node_cap, emit)?;
        sigs.pop();
    }
    classes[x] = usize::MAX;
    Ok(())
}

/// A point `x` of `P` with a surjective p-morphism `↑x ↠ Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JankovWitness {
    pub point: usize,
    /// Worlds of `↑x` as indices of `P`.
    pub worlds: Vec<usize>,
    /// Image in `Q` of each entry of `worlds`.
    pub map: Vec<usize>,
}

/// Some `x ∈ P` and a surjective p-morphism `↑x ↠ Q`; such a witness
/// exists iff `P` refutes the Jankov formula of `Q`.
pub fn jankov_refutes(p: &Poset, q: &Poset) -> Result<Option<JankovWitness>> {
    q.require_root()?;
    let mut seen = BTreeSet::new();
    for x in 0..p.len() {
        if p.up(x).count_ones() < q.len() as u32 {
            continue;
        }
        let (sub, worlds) = p.restrict(p.up(x));
        if !seen.insert(canonical_form(&sub)) {
            continue;
        }
        if let Some(map) = first_surjective_pmorphism(&sub, q)? {
            return Ok(Some(JankovWitness { point: x, worlds, map }));
        }
    }
    Ok(None)
}

/// Cross-check reading: `Q` is isomorphic to a principal upset of some
/// p-morphic image of `P`.
pub fn jankov_refutes_via_images(p: &Poset, q: &Poset) -> Result<bool> {
    q.require_root()?;
    let target = canonical_form(q);
    for f in pmorphic_images(p)? {
        if (0..f.len()).any(|w| canonical_form(&f.principal(w)) == target) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Every `↑x` has a single maximal point.
pub fn kc_semantic(p: &Poset) -> bool {
    let max = p.maximal();
    (0..p.len()).all(|x| (p.up(x) & max).count_ones() == 1)
}

pub fn satisfies_check(p: &Poset, check: &SemanticCheck) -> Result<bool> {
    Ok(match check {
        SemanticCheck::Jankov(q) => jankov_refutes(p, q)?.is_none(),
        SemanticCheck::Kc => kc_semantic(p),
        SemanticCheck::Bw2 => p.width() <= 2,
        SemanticCheck::Bd(n) => p.depth() <= *n,
    })
}

/// Frame validity of every axiom; registered semantic checks are used when
/// present, otherwise valuations are enumerated up to `cap`.
pub fn validates_axiomset(p: &Poset, set: &AxiomSet) -> Result<bool> {
    validates_axiomset_capped(p, set, DEFAULT_VALUATION_CAP)
}

pub fn validates_axiomset_capped(p: &Poset, set: &AxiomSet, cap: u64) -> Result<bool> {
    for ax in &set.axioms {
        let ok = match &ax.check {
            Some(c) => satisfies_check(p, c)?,
            None => frame_validates_capped(p, &ax.formula, cap)?.valid,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Human-readable description of a violation.
pub fn describe_violation(v: &Violation, p: &Poset, q: &Poset) -> alloc::string::String {
    match *v {
        Violation::WrongLength { expected, found } => format!("map has {found} entries, expected {expected}"),
        Violation::OutOfRange { world, image } => format!("`{}` maps to missing world #{image}", p.name(world)),
        Violation::NotMonotone { lower, upper } => {
            format!("`{}` <= `{}` but their images are not ordered", p.name(lower), p.name(upper))
        }
        Violation::Back { world, target } => format!(
            "back condition fails at `{}`: nothing above it maps to `{}`",
            p.name(world),
            q.name(target)
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::is_isomorphic;
    use crate::families::{broken_combs, comb, is_broken_comb, q_poset, rn_prefix};

    #[test]
    fn fork_onto_chain() {
        let f = Poset::fork(2);
        let c = Poset::chain(2);
        assert!(check_pmorphism(&[0, 1, 1], &f, &c));
        assert!(check_pmorphism(&[0, 1, 2], &f, &f));
        assert_eq!(surjective_pmorphisms(&f, &c).unwrap(), vec![vec![0, 1, 1]]);
    }

    #[test]
    fn ladder_map_fails_back_condition() {
        let p2 = rn_prefix(2).unwrap();
        let p1 = rn_prefix(1).unwrap();
        let (zero, one) = (p2.index_of("0").unwrap(), p2.index_of("1").unwrap());
        let (root1, one1) = (p1.index_of("P1").unwrap(), p1.index_of("1").unwrap());
        let mut map = vec![root1; 3];
        map[one] = one1;
        assert_eq!(pmorphism_violation(&map, &p2, &p1), Some(Violation::Back { world: zero, target: one1 }));
    }

    #[test]
    fn surjections() {
        assert!(surjective_pmorphisms(&Poset::chain(2), &Poset::fork(2)).unwrap().is_empty());
        for p in [Poset::chain(3), Poset::fork(3), q_poset(5).unwrap()] {
            assert_eq!(surjective_pmorphisms(&p, &Poset::point()).unwrap().len(), 1);
        }
    }

    #[test]
    fn images() {
        let imgs = pmorphic_images(&Poset::chain(2)).unwrap();
        assert_eq!(imgs.len(), 2);
        assert_eq!(pmorphic_images(&q_poset(8).unwrap()).unwrap().len(), 4);
        for n in 1..=3 {
            let imgs = pmorphic_images(&comb(n).unwrap()).unwrap();
            assert!(imgs.iter().all(is_broken_comb));
        }
    }

    #[test]
    fn images_of_combs_are_broken_combs() {
        let imgs = pmorphic_images(&comb(3).unwrap()).unwrap();
        let mut combs = Vec::new();
        for m in 1..=3 {
            for c in broken_combs(m).unwrap() {
                if !combs.iter().any(|d: &Poset| is_isomorphic(d, &c).is_some()) {
                    combs.push(c);
                }
            }
        }
        assert_eq!(imgs.len(), combs.len());
    }

    #[test]
    fn jankov_semantics() {
        let q6 = q_poset(6).unwrap();
        assert!(jankov_refutes(&q6, &q6).unwrap().is_some());
        assert!(jankov_refutes(&Poset::chain(2), &Poset::fork(2)).unwrap().is_none());
        let q5 = q_poset(5).unwrap();
        let w = jankov_refutes(&q5, &q6).unwrap().unwrap();
        let (sub, _) = q5.restrict(q5.up(w.point));
        assert!(check_pmorphism(&w.map, &sub, &q6));
        let a = q5.index_of("a").unwrap();
        assert!(first_surjective_pmorphism(&q5.principal(a), &q6).unwrap().is_some());
        assert!(jankov_refutes_via_images(&q_poset(5).unwrap(), &q6).unwrap());
    }

    #[test]
    fn kc_checker() {
        assert!(kc_semantic(&q_poset(6).unwrap()));
        assert!(!kc_semantic(&Poset::fork(2)));
    }
}
