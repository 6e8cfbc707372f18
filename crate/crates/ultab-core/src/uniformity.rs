//! Model classes over finite frames, the degree of uniformity, and bounded
//! `n`-uniformity certification.
//!
//! Bisimulation levels only compare colors for equality, so the searches
//! work with *abstract colorings*: partitions of the worlds into color
//! classes whose induced order on classes is acyclic. Any such partition is
//! realized by a monotone coloring with one variable per class (color of a
//! class = the classes below it), which is why the default variable bound
//! is never smaller than the number of worlds involved.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::bisim::{greatest_bisimulation, BisimLevel, Colored};
use crate::bits::{bit, full, ones};
use crate::canon::{canonical_form, iso_labeled, CanonicalForm};
use crate::error::{Error, Result};
use crate::families::{boolean_sums_up_to, is_boolean_sum, stack_profile};
use crate::morphism::{pmorphic_images_capped, DEFAULT_SEARCH_CAP};
use crate::poset::Poset;
use crate::semantics::{bisim_classes, reduce, Model};

/// Largest generator accepted by [`frame_closure`] unless overridden.
pub const DEFAULT_FRAME_SIZE_CAP: usize = 16;
/// Largest number of models produced by [`enumerate_models`].
pub const DEFAULT_MODEL_CAP: usize = 1_000_000;

/// Generators and all rooted frames that are p-morphic images of principal
/// upsets of generators, up to isomorphism, ordered by size then canonical
/// form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameClass {
    pub generators: Vec<Poset>,
    pub closure: Vec<Poset>,
}

impl FrameClass {
    pub fn max_frame_size(&self) -> usize {
        self.closure.iter().map(Poset::len).max().unwrap_or(0)
    }
}

pub fn frame_closure(generators: &[Poset]) -> Result<FrameClass> {
    frame_closure_capped(generators, DEFAULT_FRAME_SIZE_CAP, DEFAULT_SEARCH_CAP)
}

pub fn frame_closure_capped(generators: &[Poset], size_cap: usize, node_cap: u64) -> Result<FrameClass> {
    let mut found: BTreeMap<(usize, CanonicalForm), Poset> = BTreeMap::new();
    let mut done = BTreeMap::new();
    for g in generators {
        if g.len() > size_cap {
            return Err(Error::CapExceeded { what: "frame size", limit: size_cap as u64 });
        }
        for x in 0..g.len() {
            let sub = g.principal(x);
            let cf = canonical_form(&sub);
            if done.insert(cf, ()).is_some() {
                continue;
            }
            for img in pmorphic_images_capped(&sub, node_cap)? {
                found.entry((img.len(), canonical_form(&img))).or_insert(img);
            }
        }
    }
    Ok(FrameClass { generators: generators.to_vec(), closure: found.into_values().collect() })
}

/// All reduced models with `var_count` variables over the closure frames, up
/// to isomorphism of colored frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelClass {
    pub var_count: usize,
    pub models: Vec<Model>,
}

pub fn enumerate_models(fc: &FrameClass, var_count: usize) -> Result<ModelClass> {
    enumerate_models_capped(fc, var_count, DEFAULT_MODEL_CAP as u64)
}

pub fn enumerate_models_capped(fc: &FrameClass, var_count: usize, cap: u64) -> Result<ModelClass> {
    let mut seen = BTreeMap::new();
    let mut models = Vec::new();
    let mut visited = 0u64;
    for f in &fc.closure {
        let ups: Vec<u64> = f.all_upsets(cap)?.into_iter().map(|u| u.bits()).collect();
        let mut idx = vec![0usize; var_count];
        loop {
            visited += 1;
            if visited > cap {
                return Err(Error::CapExceeded { what: "colorings visited", limit: cap });
            }
            let colors: Vec<u64> = (0..f.len())
                .map(|w| (0..var_count).filter(|&i| ups[idx[i]] & bit(w) != 0).fold(0u64, |m, i| m | bit(i)))
                .collect();
            let m = Model::with_indexed_vars(f.clone(), var_count, colors)?;
            if crate::semantics::is_reduced(&m) && seen.insert(m.canonical_form(), ()).is_none() {
                models.push(m);
            }
            // odometer over upset tuples
            let mut i = var_count;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < ups.len() {
                    break;
                }
                idx[i] = 0;
            }
            if idx.iter().all(|&j| j == 0) {
                break;
            }
        }
    }
    Ok(ModelClass { var_count, models })
}

/// A pair of models, levels relative to their roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub left: Model,
    pub right: Model,
    /// The roots are `level`-bisimilar but not `(level + 1)`-bisimilar.
    pub level: usize,
}

/// What a bounded search covered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub frames: usize,
    pub max_frame_size: usize,
    /// `None` means no bound: every abstract coloring was allowed.
    pub v_max: Option<usize>,
    pub colorings: u64,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Verdict {
    /// No pair of models over the class is `n`-bisimilar without being
    /// bisimilar, within the envelope.
    Certified(usize),
    Refuted(Witness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityReport {
    pub verdict: Verdict,
    pub envelope: Envelope,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeReport {
    pub degree: usize,
    /// A non-bisimilar pair at level `degree - 1`, when `degree > 0`.
    pub witness: Option<Witness>,
    pub envelope: Envelope,
}

/// Degree of uniformity of the logic of `p`.
pub fn degree_of_uniformity(p: &Poset, v_max: Option<usize>) -> Result<DegreeReport> {
    degree_of_class(&frame_closure(core::slice::from_ref(p))?, v_max)
}

/// Least `n` such that `n`-bisimilar models over the class are bisimilar.
pub fn degree_of_class(fc: &FrameClass, v_max: Option<usize>) -> Result<DegreeReport> {
    let mut search = Search::new(fc, v_max);
    let Some(base) = search.level_zero_witness()? else {
        return Ok(DegreeReport { degree: 0, witness: None, envelope: search.envelope() });
    };
    let mut best = base;
    while let Some(w) = search.find(best.level + 1)? {
        best = w;
    }
    Ok(DegreeReport { degree: best.level + 1, witness: Some(best), envelope: search.envelope() })
}

/// Certified when no pair over the class is `n`-bisimilar but not
/// bisimilar within the bounds; refuted with such a pair otherwise.
pub fn certify_n_uniform(fc: &FrameClass, n: usize, v_max: Option<usize>) -> Result<UniformityReport> {
    let mut search = Search::new(fc, v_max);
    let found = if n == 0 { search.level_zero_witness()? } else { search.find(n)? };
    let verdict = match found {
        Some(w) => Verdict::Refuted(w),
        None => Verdict::Certified(n),
    };
    Ok(UniformityReport { verdict, envelope: search.envelope() })
}

/// Boolean sums with width at most `width_cap`, a single top, stack depth at
/// most `k` and at most `size_cap` points, closed under images.
pub fn stack_bound_class(k: usize, width_cap: usize, size_cap: usize) -> Result<FrameClass> {
    let gens: Vec<Poset> = boolean_sums_up_to(size_cap)
        .into_iter()
        .filter(|p| {
            let prof = stack_profile(p);
            prof.stack_depth <= k
                && prof.level_sizes.first() == Some(&1)
                && prof.level_sizes.iter().all(|&c| c <= width_cap)
        })
        .collect();
    debug_assert!(gens.iter().all(is_boolean_sum));
    frame_closure(&gens)
}

pub fn stack_bound_uniformity_check(
    k: usize,
    width_cap: usize,
    size_cap: usize,
    v_max: Option<usize>,
) -> Result<UniformityReport> {
    certify_n_uniform(&stack_bound_class(k, width_cap, size_cap)?, k + 1, v_max)
}

/// Abstract coloring of a frame: class id per world.
#[derive(Clone, Debug)]
struct Abstract {
    frame: usize,
    classes: Vec<usize>,
    count: usize,
    /// Reflexive-transitive order on classes, row `a` = classes above `a`.
    order: Vec<u64>,
}

struct Search<'a> {
    fc: &'a FrameClass,
    v_max: Option<usize>,
    colorings: u64,
    nodes: u64,
    reduced: Option<Vec<Abstract>>,
}

impl<'a> Search<'a> {
    fn new(fc: &'a FrameClass, v_max: Option<usize>) -> Search<'a> {
        Search { fc, v_max, colorings: 0, nodes: 0, reduced: None }
    }

    fn envelope(&self) -> Envelope {
        Envelope {
            frames: self.fc.closure.len(),
            max_frame_size: self.fc.max_frame_size(),
            v_max: self.v_max,
            colorings: self.colorings,
            nodes: self.nodes,
        }
    }

    /// Point colored `0` against the 2-chain `(0; 1)`, when the class has
    /// a frame with more than one point (then it has the 2-chain as image).
    fn level_zero_witness(&self) -> Result<Option<Witness>> {
        if self.fc.max_frame_size() < 2 || self.v_max == Some(0) {
            return Ok(None);
        }
        let point = Model::with_indexed_vars(Poset::point(), 1, vec![0])?;
        let chain = Model::with_indexed_vars(Poset::chain(2), 1, vec![0, 1])?;
        Ok(Some(Witness { left: point, right: chain, level: 0 }))
    }

    /// Reduced abstract colorings of every closure frame.
    fn reduced_colorings(&mut self) -> Vec<Abstract> {
        if let Some(r) = &self.reduced {
            return r.clone();
        }
        let mut out = Vec::new();
        let fc = self.fc;
        let mut colorings = 0u64;
        for (fi, f) in fc.closure.iter().enumerate() {
            let order = f.top_down_order();
            let mut classes = vec![usize::MAX; f.len()];
            let mut stack = vec![Vec::new()];
            grow_partition(f, &order, 0, &mut classes, &mut stack, &mut |cl, rel| {
                colorings += 1;
                let count = rel.len();
                let ids = bisim_classes(f.up_rows(), &cl.iter().map(|&c| c as u64).collect::<Vec<_>>());
                if ids.iter().copied().max().map_or(0, |m| m + 1) == f.len() {
                    out.push(Abstract { frame: fi, classes: cl.to_vec(), count, order: rel.to_vec() });
                }
            });
        }
        self.colorings += colorings;
        self.reduced = Some(out.clone());
        out
    }

    /// First pair (in search order) whose roots are at least `min_level`
    /// bisimilar without being bisimilar. Requires `min_level >= 1`: then
    /// both models use the same colors, so the right-hand coloring maps
    /// into the classes of the left-hand one.
    fn find(&mut self, min_level: usize) -> Result<Option<Witness>> {
        debug_assert!(min_level >= 1);
        let lefts = self.reduced_colorings();
        let fc = self.fc;
        for m in &lefts {
            let f1 = &fc.closure[m.frame];
            for f2 in fc.closure.iter().filter(|f2| f2.len() <= f1.len()) {
                if f2.len() < m.count {
                    continue;
                }
                if let Some(w) = self.search_right(f1, m, f2, min_level)? {
                    return Ok(Some(w));
                }
            }
        }
        Ok(None)
    }

    fn search_right(&mut self, f1: &Poset, m: &Abstract, f2: &Poset, level: usize) -> Result<Option<Witness>> {
        let n1 = f1.len();
        let mut class_mask = vec![0u64; m.count];
        for x in 0..n1 {
            class_mask[m.classes[x]] |= bit(x);
        }
        let ctx = RightCtx {
            up_m: f1.up_rows(),
            up_n: f2.up_rows(),
            class_mask,
            order: f2.top_down_order(),
            level,
            m_colors: m.classes.iter().map(|&c| c as u64).collect(),
            root_m: f1.require_root()?,
            root_n: f2.require_root()?,
        };
        let mut st = RightState {
            g: vec![usize::MAX; f2.len()],
            rows: vec![Vec::new(); f2.len()],
            rel: vec![m.order.clone()],
        };
        let mut hit = None;
        self.right_step(&ctx, 0, &mut st, &mut |g, rel| {
            hit = Some((g.to_vec(), rel.to_vec()));
            true
        })?;
        let Some((g, rel)) = hit else { return Ok(None) };
        let Some(colors) = realize(&rel, self.v_max) else {
            unreachable!("realizability is checked at the leaves")
        };
        let vars = colors.1;
        let left = Model::with_indexed_vars(f1.clone(), vars, m.classes.iter().map(|&c| colors.0[c]).collect())?;
        let right = Model::with_indexed_vars(f2.clone(), vars, g.iter().map(|&c| colors.0[c]).collect())?;
        let (_, lv) = greatest_bisimulation(Colored::of(&left), Colored::of(&right), left.root(), right.root());
        let BisimLevel::Level(l) = lv else { unreachable!("leaf checks reject bisimilar pairs") };
        let (left, _) = reduce(&left);
        let (right, _) = reduce(&right);
        Ok(Some(Witness { left, right, level: l }))
    }

    fn right_step(
        &mut self,
        ctx: &RightCtx<'_>,
        i: usize,
        st: &mut RightState,
        emit: &mut impl FnMut(&[usize], &[u64]) -> bool,
    ) -> Result<bool> {
        self.nodes += 1;
        if i == ctx.order.len() {
            return Ok(self.right_leaf(ctx, st, emit));
        }
        let y = ctx.order[i];
        let k = ctx.class_mask.len();
        let strict = ctx.up_n[y] & !bit(y);
        let succ = successors(ctx.up_n, y);
        for a in 0..k {
            let Some(rel) = add_edges(st.rel.last().expect("non-empty"), a, succ.iter().map(|&z| st.g[z])) else {
                continue;
            };
            st.g[y] = a;
            let rows = right_rows(ctx, a, strict, &st.rows);
            if rows[ctx.level - 1] == 0 {
                st.g[y] = usize::MAX;
                continue;
            }
            st.rows[y] = rows;
            st.rel.push(rel);
            let stop = self.right_step(ctx, i + 1, st, emit)?;
            st.rel.pop();
            st.rows[y] = Vec::new();
            st.g[y] = usize::MAX;
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn right_leaf(&mut self, ctx: &RightCtx<'_>, st: &RightState, emit: &mut impl FnMut(&[usize], &[u64]) -> bool) -> bool {
        if st.rows[ctx.root_n][ctx.level] & bit(ctx.root_m) == 0 {
            return false;
        }
        let rel = st.rel.last().expect("non-empty");
        if realize(rel, self.v_max).is_none() {
            return false;
        }
        let n_colors: Vec<u64> = st.g.iter().map(|&c| c as u64).collect();
        let a = Colored { up: ctx.up_m, colors: &ctx.m_colors };
        let b = Colored { up: ctx.up_n, colors: &n_colors };
        let (_, lv) = greatest_bisimulation(a, b, ctx.root_m, ctx.root_n);
        if lv == BisimLevel::Full {
            debug_assert!(
                bisim_classes(ctx.up_n, &n_colors).iter().copied().max().map_or(0, |m| m + 1) < ctx.up_n.len()
                    || iso_labeled(ctx.up_m, &ctx.m_colors, ctx.up_n, &n_colors).is_some(),
                "reduced bisimilar models must be isomorphic"
            );
            return false;
        }
        emit(&st.g, rel)
    }
}

struct RightCtx<'a> {
    up_m: &'a [u64],
    up_n: &'a [u64],
    class_mask: Vec<u64>,
    order: Vec<usize>,
    level: usize,
    m_colors: Vec<u64>,
    root_m: usize,
    root_n: usize,
}

struct RightState {
    g: Vec<usize>,
    /// `rows[y][j]`: worlds of the left model `j`-bisimilar to `y`.
    rows: Vec<Vec<u64>>,
    rel: Vec<Vec<u64>>,
}

fn successors(up: &[u64], y: usize) -> Vec<usize> {
    let strict = up[y] & !bit(y);
    let above = ones(strict).fold(0u64, |m, z| m | (up[z] & !bit(z)));
    ones(strict & !above).collect()
}

/// Layers `0..=level` of the relation row of `y`, given the rows of the
/// worlds strictly above it.
fn right_rows(ctx: &RightCtx<'_>, class: usize, strict: u64, rows: &[Vec<u64>]) -> Vec<u64> {
    let mut own = Vec::with_capacity(ctx.level + 1);
    own.push(ctx.class_mask[class]);
    for j in 0..ctx.level {
        let reach = ones(strict).fold(own[j], |m, z| m | rows[z][j]);
        let mut next = 0u64;
        for x in ones(own[j]) {
            let ux = ctx.up_m[x];
            if ux & !reach != 0 || ux & own[j] == 0 {
                continue;
            }
            if ones(strict).all(|z| ux & rows[z][j] != 0) {
                next |= bit(x);
            }
        }
        own.push(next);
    }
    own
}

/// Adds edges `from → to` to a reflexive-transitive order on classes;
/// `None` if that creates a cycle.
fn add_edges(rel: &[u64], from: usize, to: impl Iterator<Item = usize>) -> Option<Vec<u64>> {
    let mut rel = rel.to_vec();
    for t in to {
        if t == from || rel[from] & bit(t) != 0 {
            continue;
        }
        if rel[t] & bit(from) != 0 {
            return None;
        }
        let add = rel[t];
        for r in rel.iter_mut() {
            if *r & bit(from) != 0 {
                *r |= add;
            }
        }
    }
    Some(rel)
}

/// Restricted-growth partitions of `f`'s worlds, top-down, keeping the order
/// induced on classes acyclic. `stack` holds the class orders along the path.
fn grow_partition(
    f: &Poset,
    order: &[usize],
    i: usize,
    classes: &mut Vec<usize>,
    stack: &mut Vec<Vec<u64>>,
    emit: &mut impl FnMut(&[usize], &[u64]),
) {
    if i == order.len() {
        emit(classes, stack.last().expect("non-empty"));
        return;
    }
    let x = order[i];
    let succ = successors(f.up_rows(), x);
    let k = stack.last().expect("non-empty").len();
    for a in 0..=k {
        if a == 64 {
            break;
        }
        let mut base = stack.last().expect("non-empty").clone();
        if a == k {
            base.push(bit(a));
        }
        let Some(rel) = add_edges(&base, a, succ.iter().map(|&z| classes[z])) else { continue };
        classes[x] = a;
        stack.push(rel);
        grow_partition(f, order, i + 1, classes, stack, emit);
        stack.pop();
        classes[x] = usize::MAX;
    }
}

/// Injective monotone colors for the classes: `a ≤ b` in `rel` implies
/// `color(a) ⊆ color(b)`. Uses one variable per class unless `v_max` is
/// smaller, in which case a search over `2^v_max` colors is made.
/// Returns the colors and the variable count.
fn realize(rel: &[u64], v_max: Option<usize>) -> Option<(Vec<u64>, usize)> {
    let k = rel.len();
    let below = |a: usize| (0..k).filter(|&b| rel[b] & bit(a) != 0).fold(0u64, |m, b| m | bit(b));
    match v_max {
        Some(v) if v < k => {
            if v >= 64 {
                return None;
            }
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by_key(|&a| below(a).count_ones());
            let mut colors = vec![u64::MAX; k];
            assign_colors(rel, &order, 0, v, &mut colors).then_some((colors, v))
        }
        _ => Some(((0..k).map(below).collect(), k)),
    }
}

fn assign_colors(rel: &[u64], order: &[usize], i: usize, v: usize, colors: &mut Vec<u64>) -> bool {
    if i == order.len() {
        return true;
    }
    let a = order[i];
    let need = order[..i].iter().filter(|&&b| rel[b] & bit(a) != 0).fold(0u64, |m, &b| m | colors[b]);
    for c in 0..=full(v) {
        if c & need != need || order[..i].iter().any(|&b| colors[b] == c) {
            continue;
        }
        // classes above `a` already colored must contain `c`
        if order[..i].iter().any(|&b| rel[a] & bit(b) != 0 && c & !colors[b] != 0) {
            continue;
        }
        colors[a] = c;
        if assign_colors(rel, order, i + 1, v, colors) {
            return true;
        }
        colors[a] = u64::MAX;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::max_bisim_level;
    use crate::families::p_star;

    #[test]
    fn closures() {
        let fc = frame_closure(&[Poset::fork(2)]).unwrap();
        assert_eq!(fc.closure.len(), 3);
        let fc = frame_closure(&[Poset::chain(2)]).unwrap();
        assert_eq!(fc.closure.len(), 2);
    }

    #[test]
    fn chain_models() {
        let fc = frame_closure(&[Poset::chain(2)]).unwrap();
        assert_eq!(enumerate_models(&fc, 1).unwrap().models.len(), 3);
        assert_eq!(enumerate_models(&fc, 0).unwrap().models.len(), 1);
    }

    #[test]
    fn small_degrees() {
        assert_eq!(degree_of_uniformity(&Poset::point(), None).unwrap().degree, 0);
        assert_eq!(degree_of_uniformity(&Poset::chain(2), None).unwrap().degree, 1);
        let fork = degree_of_uniformity(&Poset::fork(2), None).unwrap();
        assert_eq!(fork.degree, 2);
        let w = fork.witness.unwrap();
        assert_eq!(max_bisim_level(&w.left, &w.right, 10).unwrap(), BisimLevel::Level(1));
        assert_eq!(degree_of_uniformity(&p_star(1).unwrap(), None).unwrap().degree, 2);
    }

    #[test]
    fn certification_on_fork() {
        let fc = frame_closure(&[Poset::fork(2)]).unwrap();
        assert_eq!(certify_n_uniform(&fc, 2, None).unwrap().verdict, Verdict::Certified(2));
        assert!(matches!(certify_n_uniform(&fc, 1, None).unwrap().verdict, Verdict::Refuted(_)));
        assert!(matches!(certify_n_uniform(&fc, 0, None).unwrap().verdict, Verdict::Refuted(_)));
    }

    #[test]
    fn realizations() {
        // a 3-chain of classes needs two variables
        let rel = vec![0b111, 0b110, 0b100];
        assert!(realize(&rel, Some(1)).is_none());
        let (c, v) = realize(&rel, Some(2)).unwrap();
        assert_eq!(v, 2);
        assert!(c[0] & !c[1] == 0 && c[1] & !c[2] == 0);
        assert_eq!(realize(&rel, None).unwrap().1, 3);
    }
}
