//! Finite posets over at most [`MAX_WORLDS`] points.
//!
//! Worlds are indexed `0..n`; the order is stored as one `u64` up-set mask
//! per world, so upsets are plain bit masks.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{bit, full, ones};
use crate::error::{Error, Result};

pub const MAX_WORLDS: usize = 64;

/// Default bound on `|Up(P)|` for operations that enumerate upsets.
pub const DEFAULT_UPSET_CAP: u64 = 1 << 20;

/// An upward-closed set of worlds of some parent poset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Upset(u64);

impl Upset {
    pub const EMPTY: Upset = Upset(0);

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, w: usize) -> bool {
        w < 64 && self.0 & bit(w) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Upset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        ones(self.0)
    }

    pub fn meet(self, other: Upset) -> Upset {
        Upset(self.0 & other.0)
    }

    pub fn join(self, other: Upset) -> Upset {
        Upset(self.0 | other.0)
    }

    /// Wraps a mask without checking upward closure.
    pub(crate) fn from_bits_unchecked(bits: u64) -> Upset {
        Upset(bits)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    names: Vec<String>,
    up: Vec<u64>,
    root: Option<usize>,
}

impl Poset {
    /// Builds the reflexive-transitive closure of `pairs` (each `(a, b)` read
    /// as `a <= b`). Cycles are rejected.
    pub fn from_relation(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Poset> {
        let n = names.len();
        if n > MAX_WORLDS {
            return Err(Error::TooManyWorlds(n));
        }
        check_distinct(&names)?;
        let mut up: Vec<u64> = (0..n).map(bit).collect();
        for &(a, b) in pairs {
            if a >= n {
                return Err(Error::UnknownWorld(format!("#{a}")));
            }
            if b >= n {
                return Err(Error::UnknownWorld(format!("#{b}")));
            }
            up[a] |= bit(b);
        }
        // Warshall over bit rows.
        for k in 0..n {
            for i in 0..n {
                if up[i] & bit(k) != 0 {
                    up[i] |= up[k];
                }
            }
        }
        Poset::from_up_sets(names, up)
    }

    /// Convenience constructor from world names and `(lower, upper)` cover
    /// pairs given by name.
    pub fn from_named_covers(names: &[&str], covers: &[(&str, &str)]) -> Result<Poset> {
        let owned: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let idx = |s: &str| {
            names
                .iter()
                .position(|m| *m == s)
                .ok_or_else(|| Error::UnknownWorld(s.to_string()))
        };
        let mut pairs = Vec::with_capacity(covers.len());
        for (a, b) in covers {
            pairs.push((idx(a)?, idx(b)?));
        }
        Poset::from_relation(owned, &pairs)
    }

    /// Validates an explicit order given as up-set rows.
    pub fn from_up_sets(names: Vec<String>, up: Vec<u64>) -> Result<Poset> {
        let n = names.len();
        if n > MAX_WORLDS {
            return Err(Error::TooManyWorlds(n));
        }
        if up.len() != n {
            return Err(Error::InvalidParameter("row count differs from world count".into()));
        }
        check_distinct(&names)?;
        let all = full(n);
        for i in 0..n {
            if up[i] & !all != 0 {
                return Err(Error::InvalidParameter("order row refers to a missing world".into()));
            }
            if up[i] & bit(i) == 0 {
                return Err(Error::InvalidParameter(format!("order is not reflexive at `{}`", names[i])));
            }
            for j in ones(up[i]) {
                if up[j] & !up[i] != 0 {
                    return Err(Error::InvalidParameter("order is not transitive".into()));
                }
                if j != i && up[j] & bit(i) != 0 {
                    return Err(Error::NotAntisymmetric(names[i].clone(), names[j].clone()));
                }
            }
        }
        let root = (0..n).find(|&i| up[i] == all);
        Ok(Poset { names, up, root })
    }

    pub fn point() -> Poset {
        Poset::chain(1)
    }

    /// `n`-element chain with worlds `c0 < c1 < …`.
    pub fn chain(n: usize) -> Poset {
        let names = (0..n).map(|i| format!("c{i}")).collect();
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Poset::from_relation(names, &pairs).expect("chain is a poset")
    }

    pub fn antichain(n: usize) -> Poset {
        let names = (0..n).map(|i| format!("a{i}")).collect();
        Poset::from_relation(names, &[]).expect("antichain is a poset")
    }

    /// Root `r` below `n` pairwise incomparable maximal points.
    pub fn fork(n: usize) -> Poset {
        let mut names = vec!["r".to_string()];
        names.extend((0..n).map(|i| format!("t{i}")));
        let pairs: Vec<_> = (1..=n).map(|i| (0, i)).collect();
        Poset::from_relation(names, &pairs).expect("fork is a poset")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, w: usize) -> &str {
        &self.names[w]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| Error::UnknownWorld(name.to_string()))
    }

    /// Mask of all worlds.
    pub fn all(&self) -> u64 {
        full(self.len())
    }

    /// `↑w` as a mask (includes `w`).
    #[inline]
    pub fn up(&self, w: usize) -> u64 {
        self.up[w]
    }

    #[inline]
    pub fn strict_up(&self, w: usize) -> u64 {
        self.up[w] & !bit(w)
    }

    pub fn down(&self, w: usize) -> u64 {
        (0..self.len()).filter(|&v| self.up[v] & bit(w) != 0).fold(0, |m, v| m | bit(v))
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a] & bit(b) != 0
    }

    pub fn up_rows(&self) -> &[u64] {
        &self.up
    }

    /// The least element, when there is one.
    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn is_rooted(&self) -> bool {
        self.root.is_some()
    }

    pub fn require_root(&self) -> Result<usize> {
        self.root.ok_or(Error::NotRooted)
    }

    /// Immediate successors of `w`.
    pub fn successors(&self, w: usize) -> u64 {
        let strict = self.strict_up(w);
        let mut above = 0;
        for v in ones(strict) {
            above |= self.strict_up(v);
        }
        strict & !above
    }

    /// All cover pairs `(a, b)` with `a ≺ b`, sorted.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in ones(self.successors(a)) {
                out.push((a, b));
            }
        }
        out
    }

    pub fn maximal(&self) -> u64 {
        (0..self.len()).filter(|&w| self.strict_up(w) == 0).fold(0, |m, w| m | bit(w))
    }

    /// Worlds ordered so that every world comes after all worlds above it.
    pub fn top_down_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&w| (self.up[w].count_ones(), w));
        order
    }

    /// Depth of every world: the number of points on the longest chain
    /// starting at it.
    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.len()];
        for w in self.top_down_order() {
            d[w] = 1 + ones(self.strict_up(w)).map(|v| d[v]).max().unwrap_or(0);
        }
        d
    }

    pub fn depth_of(&self, w: usize) -> usize {
        self.depths()[w]
    }

    pub fn depth(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Largest antichain inside any principal upset.
    pub fn width(&self) -> usize {
        let mut best = 0;
        let mut seen = BTreeSet::new();
        for w in 0..self.len() {
            if seen.insert(self.up[w]) {
                best = best.max(self.antichain_number(self.up[w]));
            }
        }
        best
    }

    /// Size of the largest antichain within `mask`, by Dilworth: the number of
    /// points minus a maximum matching in the strict comparability graph.
    pub fn antichain_number(&self, mask: u64) -> usize {
        let pts: Vec<usize> = ones(mask).collect();
        let mut match_right: Vec<Option<usize>> = vec![None; self.len()];
        let mut matched = 0;
        for &a in &pts {
            let mut visited = 0u64;
            if self.augment(a, mask, &mut visited, &mut match_right) {
                matched += 1;
            }
        }
        pts.len() - matched
    }

    fn augment(&self, a: usize, mask: u64, visited: &mut u64, match_right: &mut [Option<usize>]) -> bool {
        for b in ones(self.strict_up(a) & mask) {
            if *visited & bit(b) != 0 {
                continue;
            }
            *visited |= bit(b);
            let free = match match_right[b] {
                None => true,
                Some(prev) => self.augment(prev, mask, visited, match_right),
            };
            if free {
                match_right[b] = Some(a);
                return true;
            }
        }
        false
    }

    /// Checks that `bits` is an upset of this poset.
    pub fn upset(&self, bits: u64) -> Result<Upset> {
        if bits & !self.all() != 0 {
            return Err(Error::NotAnUpset);
        }
        for w in ones(bits) {
            if self.up[w] & !bits != 0 {
                return Err(Error::NotAnUpset);
            }
        }
        Ok(Upset(bits))
    }

    pub fn is_upset(&self, bits: u64) -> bool {
        self.upset(bits).is_ok()
    }

    pub fn top_upset(&self) -> Upset {
        Upset(self.all())
    }

    /// Smallest upset containing the given worlds.
    pub fn up_closure(&self, worlds: &[usize]) -> Result<Upset> {
        let mut m = 0;
        for &w in worlds {
            if w >= self.len() {
                return Err(Error::UnknownWorld(format!("#{w}")));
            }
            m |= self.up[w];
        }
        Ok(Upset(m))
    }

    pub fn up_closure_named(&self, worlds: &[&str]) -> Result<Upset> {
        let idx = worlds.iter().map(|w| self.index_of(w)).collect::<Result<Vec<_>>>()?;
        self.up_closure(&idx)
    }

    pub fn up_closure_mask(&self, mask: u64) -> u64 {
        ones(mask).fold(0, |m, w| m | self.up[w])
    }

    /// Every upset, ordered by size and then by mask. Fails once more than
    /// `cap` upsets have been produced.
    pub fn all_upsets(&self, cap: u64) -> Result<Vec<Upset>> {
        let order = self.top_down_order();
        let mut out = Vec::new();
        self.upsets_rec(&order, 0, 0, cap, &mut out)?;
        out.sort_by_key(|u| (u.0.count_ones(), u.0));
        Ok(out)
    }

    fn upsets_rec(&self, order: &[usize], i: usize, cur: u64, cap: u64, out: &mut Vec<Upset>) -> Result<()> {
        if i == order.len() {
            if out.len() as u64 >= cap {
                return Err(Error::CapExceeded { what: "number of upsets", limit: cap });
            }
            out.push(Upset(cur));
            return Ok(());
        }
        let w = order[i];
        self.upsets_rec(order, i + 1, cur, cap, out)?;
        if self.strict_up(w) & !cur == 0 {
            self.upsets_rec(order, i + 1, cur | bit(w), cap, out)?;
        }
        Ok(())
    }

    /// Induced subposet on `mask`; the second component maps new indices to
    /// old ones.
    pub fn restrict(&self, mask: u64) -> (Poset, Vec<usize>) {
        let keep: Vec<usize> = ones(mask & self.all()).collect();
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &w) in keep.iter().enumerate() {
            pos[w] = i;
        }
        let names = keep.iter().map(|&w| self.names[w].clone()).collect();
        let up = keep
            .iter()
            .map(|&w| ones(self.up[w] & mask).fold(0u64, |m, v| m | bit(pos[v])))
            .collect();
        let p = Poset::from_up_sets(names, up).expect("subposet of a poset");
        (p, keep)
    }

    /// `↑w` as a rooted poset.
    pub fn principal(&self, w: usize) -> Poset {
        self.restrict(self.up[w]).0
    }

    /// Principal upsets `↑x` for every `x`, optionally deduplicated up to
    /// isomorphism (first occurrence kept).
    pub fn rooted_upsets(&self, dedup: bool) -> Vec<Poset> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for w in 0..self.len() {
            let p = self.principal(w);
            if !dedup || seen.insert(crate::canon::canonical_form(&p)) {
                out.push(p);
            }
        }
        out
    }

    /// Renames worlds; fails on duplicates.
    pub fn with_names(&self, names: Vec<String>) -> Result<Poset> {
        if names.len() != self.len() {
            return Err(Error::InvalidParameter("name count differs from world count".into()));
        }
        Poset::from_up_sets(names, self.up.clone())
    }

    /// Adds a new greatest element named `top`.
    pub fn add_top(&self, top: &str) -> Result<Poset> {
        linear_sum(&Poset::from_relation(vec![top.to_string()], &[])?, self)
    }

    /// Adds a new least element named `root`.
    pub fn add_root(&self, root: &str) -> Result<Poset> {
        linear_sum(self, &Poset::from_relation(vec![root.to_string()], &[])?)
    }
}

fn check_distinct(names: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(Error::DuplicateWorld(n.clone()));
        }
    }
    Ok(())
}

/// Names for the union of two posets: kept when disjoint, otherwise prefixed.
fn union_names(a: &Poset, b: &Poset, pa: &str, pb: &str) -> Vec<String> {
    let clash = a.names.iter().any(|n| b.names.contains(n));
    let mut names = Vec::with_capacity(a.len() + b.len());
    for n in &a.names {
        names.push(if clash { format!("{pa}{n}") } else { n.clone() });
    }
    for n in &b.names {
        names.push(if clash { format!("{pb}{n}") } else { n.clone() });
    }
    names
}

/// Places every world of `bottom` below every world of `top`. Worlds of
/// `bottom` come first in the result.
pub fn linear_sum(top: &Poset, bottom: &Poset) -> Result<Poset> {
    let nb = bottom.len();
    let n = nb + top.len();
    if n > MAX_WORLDS {
        return Err(Error::TooManyWorlds(n));
    }
    let names = union_names(bottom, top, "b.", "t.");
    let top_mask = full(n) & !full(nb);
    let mut up = Vec::with_capacity(n);
    for w in 0..nb {
        up.push(bottom.up[w] | top_mask);
    }
    for w in 0..top.len() {
        up.push(top.up[w] << nb);
    }
    Poset::from_up_sets(names, up)
}

/// Disjoint union; worlds of `a` come first.
pub fn disjoint_union(a: &Poset, b: &Poset) -> Result<Poset> {
    let na = a.len();
    let n = na + b.len();
    if n > MAX_WORLDS {
        return Err(Error::TooManyWorlds(n));
    }
    let names = union_names(a, b, "l.", "r.");
    let mut up: Vec<u64> = a.up.clone();
    up.extend(b.up.iter().map(|&m| m << na));
    Poset::from_up_sets(names, up)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fork2() -> Poset {
        Poset::from_named_covers(&["r", "a", "b"], &[("r", "a"), ("r", "b")]).unwrap()
    }

    #[test]
    fn closure_of_root_is_everything() {
        let p = fork2();
        assert_eq!(p.up_closure_named(&["r"]).unwrap().bits(), p.all());
    }

    #[test]
    fn closure_of_maximal_point() {
        let c = Poset::from_named_covers(&["b", "t"], &[("b", "t")]).unwrap();
        let u = c.up_closure_named(&["t"]).unwrap();
        assert_eq!(u.iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn unknown_world_is_an_error() {
        assert_eq!(fork2().up_closure_named(&["z"]), Err(Error::UnknownWorld("z".into())));
        assert!(fork2().up_closure(&[7]).is_err());
    }

    #[test]
    fn cycles_are_rejected() {
        let r = Poset::from_named_covers(&["a", "b"], &[("a", "b"), ("b", "a")]);
        assert!(matches!(r, Err(Error::NotAntisymmetric(_, _))));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let r = Poset::from_relation(vec!["x".into(), "x".into()], &[]);
        assert_eq!(r, Err(Error::DuplicateWorld("x".into())));
    }

    #[test]
    fn depth_and_width_basics() {
        assert_eq!(Poset::chain(2).depth(), 2);
        assert_eq!(Poset::point().depth(), 1);
        assert_eq!(Poset::chain(5).width(), 1);
        assert_eq!(Poset::fork(3).width(), 3);
        // width is taken inside principal upsets
        assert_eq!(Poset::antichain(3).width(), 1);
    }

    #[test]
    fn upset_counts() {
        assert_eq!(Poset::chain(2).all_upsets(DEFAULT_UPSET_CAP).unwrap().len(), 3);
        assert_eq!(fork2().all_upsets(DEFAULT_UPSET_CAP).unwrap().len(), 5);
        assert_eq!(Poset::antichain(3).all_upsets(DEFAULT_UPSET_CAP).unwrap().len(), 8);
        assert!(matches!(Poset::antichain(3).all_upsets(7), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn linear_sum_of_points_is_a_chain() {
        let s = linear_sum(&Poset::point(), &Poset::point()).unwrap();
        assert!(crate::canon::is_isomorphic(&s, &Poset::chain(2)).is_some());
        let r = linear_sum(&fork2(), &Poset::point()).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.depth(), 3);
        assert_eq!(r.root(), Some(0));
        assert_eq!(r.successors(0).count_ones(), 1);
    }

    #[test]
    fn covers_of_fork() {
        assert_eq!(fork2().covers(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn non_upset_rejected() {
        let p = fork2();
        assert_eq!(p.upset(0b001), Err(Error::NotAnUpset));
        assert!(p.upset(0b110).is_ok());
    }

    #[test]
    fn rooted_upsets_dedup() {
        assert_eq!(Poset::chain(2).rooted_upsets(true).len(), 2);
        assert_eq!(fork2().rooted_upsets(true).len(), 2);
        assert_eq!(fork2().rooted_upsets(false).len(), 3);
    }
}
