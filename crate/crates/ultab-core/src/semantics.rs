//! Colored Kripke models, evaluation and frame validity.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{bit, full, ones};
use crate::canon::{canonical_form_labeled, iso_labeled, CanonicalForm};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::heyting::implies_unchecked;
use crate::poset::{Poset, Upset, DEFAULT_UPSET_CAP};

/// Default bound on the number of valuations `frame_validates` may try.
pub const DEFAULT_VALUATION_CAP: u64 = 10_000_000;

/// A rooted poset with a monotone coloring; bit `j` of a color is the truth
/// value of `vars[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    frame: Poset,
    vars: Vec<String>,
    colors: Vec<u64>,
}

impl Model {
    pub fn new(frame: Poset, vars: Vec<String>, colors: Vec<u64>) -> Result<Model> {
        frame.require_root()?;
        if vars.len() > 64 {
            return Err(Error::InvalidParameter("more than 64 variables".into()));
        }
        if colors.len() != frame.len() {
            return Err(Error::InvalidParameter("one color per world is required".into()));
        }
        let mask = full(vars.len());
        for (w, &c) in colors.iter().enumerate() {
            if c & !mask != 0 {
                return Err(Error::InvalidParameter(alloc::format!(
                    "color of `{}` sets an unknown variable",
                    frame.name(w)
                )));
            }
        }
        for (a, b) in frame.covers() {
            if colors[a] & !colors[b] != 0 {
                return Err(Error::NonMonotoneColoring {
                    lower: frame.name(a).to_string(),
                    upper: frame.name(b).to_string(),
                });
            }
        }
        Ok(Model { frame, vars, colors })
    }

    /// Variables named `p0, p1, …`.
    pub fn with_indexed_vars(frame: Poset, var_count: usize, colors: Vec<u64>) -> Result<Model> {
        Model::new(frame, indexed_vars(var_count), colors)
    }

    pub fn frame(&self) -> &Poset {
        &self.frame
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn colors(&self) -> &[u64] {
        &self.colors
    }

    pub fn color(&self, w: usize) -> u64 {
        self.colors[w]
    }

    pub fn root(&self) -> usize {
        self.frame.root().expect("model frames are rooted")
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    /// The submodel on `↑w`, rooted at `w`.
    pub fn generated(&self, w: usize) -> Model {
        let (frame, keep) = self.frame.restrict(self.frame.up(w));
        let colors = keep.iter().map(|&v| self.colors[v]).collect();
        Model { frame, vars: self.vars.clone(), colors }
    }

    /// Truth set of a variable.
    pub fn var_set(&self, var: &str) -> Result<u64> {
        let j = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::UnboundVariable(var.to_string()))?;
        Ok((0..self.len()).filter(|&w| self.colors[w] & bit(j) != 0).fold(0, |m, w| m | bit(w)))
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        canonical_form_labeled(self.frame.up_rows(), &self.colors)
    }

    pub fn same_vars(&self, other: &Model) -> Result<()> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::VarsMismatch)
        }
    }

    /// Color as a bitstring, character `i` for `vars[i]`.
    pub fn color_string(&self, w: usize) -> String {
        (0..self.vars.len()).map(|j| if self.colors[w] & bit(j) != 0 { '1' } else { '0' }).collect()
    }
}

pub fn indexed_vars(n: usize) -> Vec<String> {
    (0..n).map(|i| alloc::format!("p{i}")).collect()
}

/// `1^{n-k} 0^k` as a color over `n` variables: the first `n-k` bits set.
pub fn ones_then_zeros(n: usize, k: usize) -> u64 {
    full(n.saturating_sub(k))
}

/// Colored isomorphism, root to root.
pub fn models_isomorphic(a: &Model, b: &Model) -> Option<Vec<usize>> {
    if a.vars != b.vars {
        return None;
    }
    iso_labeled(a.frame.up_rows(), &a.colors, b.frame.up_rows(), &b.colors)
}

/// An assignment of upsets to variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Valuation {
    pub assignments: Vec<(String, Upset)>,
}

impl Valuation {
    pub fn get(&self, var: &str) -> Option<Upset> {
        self.assignments.iter().find(|(v, _)| v == var).map(|(_, u)| *u)
    }
}

fn eval_with(p: &Poset, f: &Formula, lookup: &dyn Fn(&str) -> Result<u64>) -> Result<u64> {
    Ok(match f {
        Formula::Var(v) => lookup(v)?,
        Formula::Bot => 0,
        Formula::Top => p.all(),
        Formula::And(a, b) => eval_with(p, a, lookup)? & eval_with(p, b, lookup)?,
        Formula::Or(a, b) => eval_with(p, a, lookup)? | eval_with(p, b, lookup)?,
        Formula::Imp(a, b) => {
            let (x, y) = (eval_with(p, a, lookup)?, eval_with(p, b, lookup)?);
            implies_unchecked(p, x, y).bits()
        }
    })
}

/// Truth set `⟦φ⟧` in a model.
pub fn eval(m: &Model, f: &Formula) -> Result<Upset> {
    let bits = eval_with(&m.frame, f, &|v| m.var_set(v))?;
    Ok(Upset::from_bits_unchecked(bits))
}

pub fn satisfies_at_root(m: &Model, f: &Formula) -> Result<bool> {
    Ok(eval(m, f)?.contains(m.root()))
}

pub fn eval_valuation(p: &Poset, val: &Valuation, f: &Formula) -> Result<Upset> {
    for (_, u) in &val.assignments {
        p.upset(u.bits())?;
    }
    let bits = eval_with(p, f, &|v| val.get(v).map(|u| u.bits()).ok_or_else(|| Error::UnboundVariable(v.to_string())))?;
    Ok(Upset::from_bits_unchecked(bits))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Var(usize),
    Bot,
    Top,
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
}

/// A formula compiled into a shared DAG; `level[i]` is the largest variable
/// index node `i` depends on, `None` for closed subformulas.
struct Compiled {
    nodes: Vec<Node>,
    level: Vec<Option<usize>>,
}

impl Compiled {
    fn new(f: &Formula, vars: &[String]) -> Compiled {
        let mut c = Compiled { nodes: Vec::new(), level: Vec::new() };
        let mut memo = BTreeMap::new();
        c.add(f, vars, &mut memo);
        c
    }

    fn add(&mut self, f: &Formula, vars: &[String], memo: &mut BTreeMap<Node, usize>) -> usize {
        let node = match f {
            Formula::Var(v) => Node::Var(vars.iter().position(|x| x == v).expect("free variable listed")),
            Formula::Bot => Node::Bot,
            Formula::Top => Node::Top,
            Formula::And(a, b) => Node::And(self.add(a, vars, memo), self.add(b, vars, memo)),
            Formula::Or(a, b) => Node::Or(self.add(a, vars, memo), self.add(b, vars, memo)),
            Formula::Imp(a, b) => Node::Imp(self.add(a, vars, memo), self.add(b, vars, memo)),
        };
        if let Some(&i) = memo.get(&node) {
            return i;
        }
        let level = match node {
            Node::Var(k) => Some(k),
            Node::Bot | Node::Top => None,
            Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => self.level[a].max(self.level[b]),
        };
        self.nodes.push(node);
        self.level.push(level);
        memo.insert(node, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// Leaves of the conjunction tree rooted at `i`.
    fn conjuncts(&self, i: usize, out: &mut Vec<usize>) {
        match self.nodes[i] {
            Node::And(a, b) => {
                self.conjuncts(a, out);
                self.conjuncts(b, out);
            }
            _ => out.push(i),
        }
    }

    fn compute(&self, p: &Poset, i: usize, vals: &[u64], assign: &[u64]) -> u64 {
        match self.nodes[i] {
            Node::Var(k) => assign[k],
            Node::Bot => 0,
            Node::Top => p.all(),
            Node::And(a, b) => vals[a] & vals[b],
            Node::Or(a, b) => vals[a] | vals[b],
            Node::Imp(a, b) => implies_unchecked(p, vals[a], vals[b]).bits(),
        }
    }
}

/// Result of a validity check; `counter` holds the lexicographically least
/// refuting valuation (by upset index, first variable most significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validity {
    pub valid: bool,
    pub counter: Option<Valuation>,
}

pub fn frame_validates(p: &Poset, f: &Formula) -> Result<Validity> {
    frame_validates_capped(p, f, DEFAULT_VALUATION_CAP)
}

/// Validity at every world under every valuation.
///
/// Truth sets are upsets, so it suffices to look at whether the formula
/// holds everywhere. Valuations are explored depth-first in odometer order
/// (first variable most significant). When the formula is an implication
/// `C_1 ∧ … ∧ C_m → B`, a branch is skipped as soon as the conjuncts fixed
/// so far meet inside the (fixed) consequent: every extension is valid.
pub fn frame_validates_capped(p: &Poset, f: &Formula, cap: u64) -> Result<Validity> {
    let vars = f.free_vars();
    let ups: Vec<u64> = p.all_upsets(DEFAULT_UPSET_CAP)?.iter().map(|u| u.bits()).collect();
    let total = (ups.len() as u64).checked_pow(vars.len() as u32).unwrap_or(u64::MAX);
    if total > cap {
        return Err(Error::CapExceeded { what: "number of valuations", limit: cap });
    }
    let c = Compiled::new(f, &vars);
    let k = vars.len();
    let mut vals = vec![0u64; c.nodes.len()];
    let mut assign = vec![0u64; k];
    for n in 0..c.nodes.len() {
        if c.level[n].is_none() {
            vals[n] = c.compute(p, n, &vals, &assign);
        }
    }
    let by_level: Vec<Vec<usize>> =
        (0..k).map(|i| (0..c.nodes.len()).filter(|&n| c.level[n] == Some(i)).collect()).collect();
    let top = c.nodes.len() - 1;
    let (conjuncts, consequent) = match c.nodes[top] {
        Node::Imp(a, b) => {
            let mut out = Vec::new();
            c.conjuncts(a, &mut out);
            (out, Some(b))
        }
        _ => (Vec::new(), None),
    };
    let search = Dfs { p, c: &c, ups: &ups, by_level: &by_level, conjuncts: &conjuncts, consequent, top };
    let mut meet = p.all();
    for &n in &conjuncts {
        if c.level[n].is_none() {
            meet &= vals[n];
        }
    }
    if search.settled(meet, None, &vals) {
        return Ok(Validity { valid: true, counter: None });
    }
    if search.run(0, meet, &mut vals, &mut assign) {
        return Ok(Validity { valid: true, counter: None });
    }
    let counter = Valuation {
        assignments: vars.iter().cloned().zip(assign.iter().map(|&b| Upset::from_bits_unchecked(b))).collect(),
    };
    Ok(Validity { valid: false, counter: Some(counter) })
}

struct Dfs<'a> {
    p: &'a Poset,
    c: &'a Compiled,
    ups: &'a [u64],
    by_level: &'a [Vec<usize>],
    conjuncts: &'a [usize],
    consequent: Option<usize>,
    top: usize,
}

impl Dfs<'_> {
    /// Whether every extension is already known to be valid: the fixed
    /// conjuncts meet inside the fixed consequent.
    fn settled(&self, meet: u64, fixed: Option<usize>, vals: &[u64]) -> bool {
        let Some(b) = self.consequent else { return false };
        let b_fixed = match self.c.level[b] {
            None => true,
            Some(l) => fixed.is_some_and(|i| l <= i),
        };
        meet == 0 || (b_fixed && meet & !vals[b] == 0)
    }

    /// `true` when all extensions of the current prefix are valid; on a
    /// counterexample `assign` is left holding it.
    fn run(&self, i: usize, meet: u64, vals: &mut [u64], assign: &mut [u64]) -> bool {
        if i == assign.len() {
            return vals[self.top] == self.p.all();
        }
        for &u in self.ups {
            assign[i] = u;
            for &n in &self.by_level[i] {
                vals[n] = self.c.compute(self.p, n, vals, assign);
            }
            let mut m = meet;
            for &n in self.conjuncts {
                if self.c.level[n] == Some(i) {
                    m &= vals[n];
                }
            }
            if self.settled(m, Some(i), vals) {
                continue;
            }
            if !self.run(i + 1, m, vals, assign) {
                return false;
            }
        }
        true
    }
}

/// Greatest auto-bisimulation of a colored poset, as class ids. Class ids
/// are ordered by the least member.
pub fn bisim_classes(up: &[u64], colors: &[u64]) -> Vec<usize> {
    let n = up.len();
    let mut class = dense_ids(colors);
    loop {
        let count = class.iter().max().map_or(0, |m| m + 1);
        let sigs: Vec<(usize, u64)> = (0..n)
            .map(|x| (class[x], ones(up[x]).fold(0u64, |m, y| m | bit(class[y]))))
            .collect();
        let next = dense_ids(&sigs);
        let next_count = next.iter().max().map_or(0, |m| m + 1);
        if next_count == count {
            return next;
        }
        class = next;
    }
}

/// Ids by first occurrence of each distinct key.
fn dense_ids<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}

pub fn is_reduced(m: &Model) -> bool {
    let c = bisim_classes(m.frame.up_rows(), &m.colors);
    c.iter().max().map_or(0, |x| x + 1) == m.len()
}

/// The α/β criterion: no point with a single immediate successor of the
/// same color, and no two points with the same strict upset and color.
pub fn is_reduced_alpha_beta(m: &Model) -> bool {
    let p = &m.frame;
    for x in 0..p.len() {
        let s = p.successors(x);
        if s.count_ones() == 1 && m.colors[s.trailing_zeros() as usize] == m.colors[x] {
            return false;
        }
        for y in x + 1..p.len() {
            if p.strict_up(x) == p.strict_up(y) && m.colors[x] == m.colors[y] {
                return false;
            }
        }
    }
    true
}

/// Quotient by the greatest auto-bisimulation; the map sends every world to
/// its class. Each class is named after its lexicographically least member.
pub fn reduce(m: &Model) -> (Model, Vec<usize>) {
    let p = &m.frame;
    let class = bisim_classes(p.up_rows(), &m.colors);
    let k = class.iter().max().map_or(0, |x| x + 1);
    let mut names: Vec<Option<String>> = vec![None; k];
    let mut up = vec![0u64; k];
    let mut colors = vec![0u64; k];
    for x in 0..p.len() {
        let c = class[x];
        let nm = p.name(x);
        if names[c].as_deref().is_none_or(|cur| nm < cur) {
            names[c] = Some(nm.to_string());
        }
        colors[c] = m.colors[x];
        up[c] |= ones(p.up(x)).fold(0u64, |acc, y| acc | bit(class[y]));
    }
    let names = names.into_iter().map(|n| n.expect("every class has a member")).collect();
    let frame = Poset::from_up_sets(names, up).expect("bisimulation quotient is a poset");
    let model = Model { frame, vars: m.vars.clone(), colors };
    (model, class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn chain_model(bottom: u64, top: u64) -> Model {
        Model::with_indexed_vars(Poset::chain(2), 1, vec![bottom, top]).unwrap()
    }

    fn fork_model(r: u64, a: u64, b: u64) -> Model {
        Model::with_indexed_vars(Poset::fork(2), 1, vec![r, a, b]).unwrap()
    }

    #[test]
    fn eval_basics() {
        let m = chain_model(0, 1);
        assert_eq!(eval(&m, &parse("p0").unwrap()).unwrap().bits(), 0b10);
        assert_eq!(eval(&m, &Formula::Top).unwrap().bits(), 0b11);
        let f = fork_model(0, 1, 0);
        assert!(!satisfies_at_root(&f, &parse("~~p0").unwrap()).unwrap());
        assert!(satisfies_at_root(&m, &parse("~~p0").unwrap()).unwrap());
        assert!(matches!(eval(&m, &parse("q").unwrap()), Err(Error::UnboundVariable(_))));
    }

    #[test]
    fn monotonicity_enforced() {
        let r = Model::with_indexed_vars(Poset::chain(2), 1, vec![1, 0]);
        assert!(matches!(r, Err(Error::NonMonotoneColoring { .. })));
    }

    #[test]
    fn validity_examples() {
        assert!(frame_validates(&Poset::point(), &parse("p | ~p").unwrap()).unwrap().valid);
        let lc = parse("(p->q)|(q->p)").unwrap();
        assert!(frame_validates(&Poset::chain(4), &lc).unwrap().valid);
        assert!(!frame_validates(&Poset::fork(2), &lc).unwrap().valid);
        let kc = parse("~p | ~~p").unwrap();
        let v = frame_validates(&Poset::fork(2), &kc).unwrap();
        assert!(!v.valid);
        let counter = v.counter.unwrap();
        assert_eq!(counter.assignments.len(), 1);
        // p true at exactly one of the two maximal points
        assert_eq!(counter.get("p").unwrap().len(), 1);
        assert_eq!(counter.get("p").unwrap().bits() & 1, 0);
    }

    #[test]
    fn closed_formulas() {
        assert!(frame_validates(&Poset::fork(2), &Formula::Top).unwrap().valid);
        assert!(!frame_validates(&Poset::fork(2), &Formula::Bot).unwrap().valid);
        assert!(frame_validates(&Poset::fork(2), &parse("bot -> bot").unwrap()).unwrap().valid);
    }

    #[test]
    fn reducedness_examples() {
        assert!(is_reduced(&chain_model(0, 1)));
        assert!(!is_reduced(&chain_model(0, 0)));
        assert!(!is_reduced(&fork_model(0, 1, 1)));
    }

    #[test]
    fn reduce_examples() {
        let (r, _) = reduce(&chain_model(0, 0));
        assert_eq!(r.len(), 1);
        let (r, map) = reduce(&fork_model(0, 1, 1));
        assert!(models_isomorphic(&r, &chain_model(0, 1)).is_some());
        assert_eq!(map[1], map[2]);
        assert_eq!(r.frame().names(), &["r".to_string(), "t0".to_string()]);
        let m = fork_model(0, 1, 0);
        assert!(models_isomorphic(&reduce(&m).0, &m).is_some());
    }

    #[test]
    fn cap_is_enforced() {
        let f = parse("a | b | c | d | e").unwrap();
        assert!(frame_validates_capped(&Poset::antichain(3), &f, 1000).is_err());
    }
}
