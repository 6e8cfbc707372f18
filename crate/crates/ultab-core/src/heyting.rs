//! The Heyting algebra of upsets of a finite poset, and subalgebra
//! generation stratified by implication depth.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::bits::ones;
use crate::error::{Error, Result};
use crate::poset::{disjoint_union, Poset, Upset, DEFAULT_UPSET_CAP};

/// `U → V = {x : ↑x ∩ U ⊆ V}`.
pub fn heyting_implies(p: &Poset, u: Upset, v: Upset) -> Result<Upset> {
    p.upset(u.bits())?;
    p.upset(v.bits())?;
    Ok(implies_unchecked(p, u.bits(), v.bits()))
}

#[inline]
pub(crate) fn implies_unchecked(p: &Poset, u: u64, v: u64) -> Upset {
    let bad = u & !v;
    let mut out = 0u64;
    for x in 0..p.len() {
        if p.up(x) & bad == 0 {
            out |= 1 << x;
        }
    }
    Upset::from_bits_unchecked(out)
}

/// `Up(P)` with its operations.
#[derive(Clone, Debug)]
pub struct UpsetAlgebra<'a> {
    base: &'a Poset,
    cap: u64,
}

impl<'a> UpsetAlgebra<'a> {
    pub fn new(base: &'a Poset) -> Self {
        UpsetAlgebra { base, cap: DEFAULT_UPSET_CAP }
    }

    pub fn with_cap(base: &'a Poset, cap: u64) -> Self {
        UpsetAlgebra { base, cap }
    }

    pub fn base(&self) -> &Poset {
        self.base
    }

    pub fn bottom(&self) -> Upset {
        Upset::EMPTY
    }

    pub fn top(&self) -> Upset {
        self.base.top_upset()
    }

    pub fn meet(&self, a: Upset, b: Upset) -> Upset {
        a.meet(b)
    }

    pub fn join(&self, a: Upset, b: Upset) -> Upset {
        a.join(b)
    }

    pub fn implies(&self, a: Upset, b: Upset) -> Result<Upset> {
        heyting_implies(self.base, a, b)
    }

    pub fn neg(&self, a: Upset) -> Result<Upset> {
        self.implies(a, Upset::EMPTY)
    }

    pub fn elements(&self) -> Result<Vec<Upset>> {
        self.base.all_upsets(self.cap)
    }

    pub fn generate(&self, gens: &[Upset]) -> Result<GenerationTrace> {
        generated_subalgebra_capped(self.base, gens, self.cap)
    }
}

/// Strata `D_0 ⊆ D_1 ⊆ …` of a generated subalgebra: `D_0` is the lattice
/// generated by the generators with `⊥, ⊤`, and `D_{i+1}` adds all
/// implications between members of `D_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationTrace {
    pub generators: Vec<Upset>,
    pub strata: Vec<Vec<Upset>>,
    pub stabilization_depth: usize,
}

impl GenerationTrace {
    /// The generated subalgebra (the last stratum).
    pub fn subalgebra(&self) -> &[Upset] {
        self.strata.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn generated_subalgebra(p: &Poset, gens: &[Upset]) -> Result<GenerationTrace> {
    generated_subalgebra_capped(p, gens, DEFAULT_UPSET_CAP)
}

pub fn generated_subalgebra_capped(p: &Poset, gens: &[Upset], cap: u64) -> Result<GenerationTrace> {
    for g in gens {
        p.upset(g.bits())?;
    }
    let mut seed: Vec<u64> = gens.iter().map(|g| g.bits()).collect();
    seed.push(0);
    seed.push(p.all());
    let mut current = lattice_closure(&seed, cap)?;
    let mut strata = Vec::new();
    loop {
        strata.push(current.iter().map(|&b| Upset::from_bits_unchecked(b)).collect::<Vec<_>>());
        let elems: Vec<u64> = current.iter().copied().collect();
        let mut extra = elems.clone();
        for &a in &elems {
            for &b in &elems {
                let c = implies_unchecked(p, a, b).bits();
                if !current.contains(&c) {
                    extra.push(c);
                }
            }
        }
        let next = lattice_closure(&extra, cap)?;
        if next.len() == current.len() {
            break;
        }
        current = next;
    }
    let stabilization_depth = strata.len() - 1;
    Ok(GenerationTrace { generators: gens.to_vec(), strata, stabilization_depth })
}

/// Closure under intersection and union by worklist saturation.
fn lattice_closure(seed: &[u64], cap: u64) -> Result<BTreeSet<u64>> {
    let mut set: BTreeSet<u64> = BTreeSet::new();
    let mut work: Vec<u64> = Vec::new();
    for &s in seed {
        if set.insert(s) {
            work.push(s);
        }
    }
    let mut elems: Vec<u64> = set.iter().copied().collect();
    while let Some(x) = work.pop() {
        let snapshot = elems.len();
        for i in 0..snapshot {
            let y = elems[i];
            for z in [x & y, x | y] {
                if set.insert(z) {
                    if set.len() as u64 > cap {
                        return Err(Error::CapExceeded { what: "subalgebra size", limit: cap });
                    }
                    elems.push(z);
                    work.push(z);
                }
            }
        }
    }
    Ok(set)
}

pub fn generation_depth(p: &Poset, gens: &[Upset]) -> Result<usize> {
    Ok(generated_subalgebra(p, gens)?.stabilization_depth)
}

/// Outcome of comparing the generation depth over `P ⊔ Q` (dual to the
/// product `Up(P) × Up(Q)`) with the depths of the two projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductDepth {
    pub combined: usize,
    pub left: usize,
    pub right: usize,
}

impl ProductDepth {
    pub fn holds(&self) -> bool {
        self.combined == self.left.max(self.right)
    }
}

/// Generators are pairs `(a, b)` of upsets of `P` and `Q`.
pub fn product_generation_depth(p: &Poset, q: &Poset, gens: &[(Upset, Upset)]) -> Result<ProductDepth> {
    let u = disjoint_union(p, q)?;
    let shift = p.len();
    let mut combined_gens = Vec::with_capacity(gens.len());
    for &(a, b) in gens {
        p.upset(a.bits())?;
        q.upset(b.bits())?;
        combined_gens.push(Upset::from_bits_unchecked(a.bits() | (b.bits() << shift)));
    }
    let left: Vec<Upset> = gens.iter().map(|g| g.0).collect();
    let right: Vec<Upset> = gens.iter().map(|g| g.1).collect();
    Ok(ProductDepth {
        combined: generation_depth(&u, &combined_gens)?,
        left: generation_depth(p, &left)?,
        right: generation_depth(q, &right)?,
    })
}

pub fn product_generation_depth_check(p: &Poset, q: &Poset, gens: &[(Upset, Upset)]) -> Result<bool> {
    Ok(product_generation_depth(p, q, gens)?.holds())
}

/// Upsets generated by single points, `↑x` for every `x`.
pub fn principal_upsets(p: &Poset) -> Vec<Upset> {
    let mut v: Vec<Upset> = (0..p.len()).map(|x| Upset::from_bits_unchecked(p.up(x))).collect();
    v.sort();
    v.dedup();
    v
}

/// Pointwise membership oracle for `U → V`, used by tests.
#[doc(hidden)]
pub fn implies_pointwise(p: &Poset, u: u64, v: u64) -> u64 {
    let mut out = 0;
    for x in 0..p.len() {
        let ok = ones(p.up(x)).all(|y| u & (1 << y) == 0 || v & (1 << y) != 0);
        if ok {
            out |= 1 << x;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fork2() -> Poset {
        Poset::from_named_covers(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap()
    }

    #[test]
    fn negation_on_fork() {
        let p = fork2();
        let a = p.up_closure_named(&["a"]).unwrap();
        let r = heyting_implies(&p, a, Upset::EMPTY).unwrap();
        assert_eq!(r, p.up_closure_named(&["b"]).unwrap());
    }

    #[test]
    fn self_implication_is_top_and_top_implication_is_identity() {
        let p = fork2();
        for u in p.all_upsets(64).unwrap() {
            assert_eq!(heyting_implies(&p, u, u).unwrap(), p.top_upset());
            assert_eq!(heyting_implies(&p, p.top_upset(), u).unwrap(), u);
        }
    }

    #[test]
    fn mismatched_upset_is_rejected() {
        let p = fork2();
        let not_upset = Upset::from_bits_unchecked(0b001);
        assert!(heyting_implies(&p, not_upset, Upset::EMPTY).is_err());
        let too_wide = Upset::from_bits_unchecked(0b1000);
        assert!(heyting_implies(&p, too_wide, Upset::EMPTY).is_err());
    }

    #[test]
    fn chain_generation_is_immediate() {
        let c = Poset::chain(2);
        let t = c.up_closure(&[1]).unwrap();
        let tr = generated_subalgebra(&c, &[t]).unwrap();
        assert_eq!(tr.stabilization_depth, 0);
        assert_eq!(tr.strata[0].len(), 3);
    }

    #[test]
    fn fork_needs_one_implication() {
        let p = fork2();
        let a = p.up_closure_named(&["a"]).unwrap();
        let tr = generated_subalgebra(&p, &[a]).unwrap();
        assert_eq!(tr.stabilization_depth, 1);
        assert_eq!(tr.subalgebra().len(), 5);
        assert!(tr.strata[1].contains(&p.up_closure_named(&["b"]).unwrap()));
    }

    #[test]
    fn product_of_two_chains_with_diagonal_generator() {
        let c = Poset::chain(2);
        let t = c.up_closure(&[1]).unwrap();
        let d = product_generation_depth(&c, &c, &[(t, t)]).unwrap();
        assert_eq!(d, ProductDepth { combined: 0, left: 0, right: 0 });
    }

    #[test]
    fn cap_is_enforced() {
        let p = Poset::antichain(4);
        let gens: Vec<Upset> = (0..4).map(|i| p.up_closure(&[i]).unwrap()).collect();
        assert!(generated_subalgebra_capped(&p, &gens, 8).is_err());
    }
}
