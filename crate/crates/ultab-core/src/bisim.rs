//! Bisimulations between colored posets: layered `k`-bisimulations, the
//! `≤_k` preorder, bisimulation games and distinguishing formulas.
//!
//! Relations are stored row-wise: `rel[a]` is the mask of worlds of the
//! second model related to world `a` of the first.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{bit, ones};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::heyting::implies_unchecked;
use crate::poset::{disjoint_union, Poset};
use crate::semantics::Model;

/// Borrowed view of a colored poset.
#[derive(Clone, Copy, Debug)]
pub struct Colored<'a> {
    pub up: &'a [u64],
    pub colors: &'a [u64],
}

impl<'a> Colored<'a> {
    pub fn of(m: &'a Model) -> Colored<'a> {
        Colored { up: m.frame().up_rows(), colors: m.colors() }
    }
}

/// Equal-color pairs.
pub fn base_relation(a: Colored<'_>, b: Colored<'_>) -> Vec<u64> {
    a.colors
        .iter()
        .map(|&ca| b.colors.iter().enumerate().filter(|(_, &cb)| cb == ca).fold(0u64, |m, (j, _)| m | bit(j)))
        .collect()
}

/// One refinement step: `(x, y)` survives iff it is in `prev` and every move
/// from either side can be answered inside `prev`.
pub fn refine_step(a: Colored<'_>, b: Colored<'_>, prev: &[u64]) -> Vec<u64> {
    let mut next = vec![0u64; prev.len()];
    for x in 0..prev.len() {
        if prev[x] == 0 {
            continue;
        }
        let reach = ones(a.up[x]).fold(0u64, |m, x2| m | prev[x2]);
        let mut row = 0u64;
        for y in ones(prev[x]) {
            let forth = ones(a.up[x]).all(|x2| b.up[y] & prev[x2] != 0);
            let back = b.up[y] & !reach == 0;
            if forth && back {
                row |= bit(y);
            }
        }
        next[x] = row;
    }
    next
}

/// Layers `S_0 ⊇ S_1 ⊇ … ⊇ S_k`; each is the greatest relation given the
/// layer below it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredBisim {
    pub levels: Vec<Vec<u64>>,
}

impl LayeredBisim {
    pub fn compute(a: Colored<'_>, b: Colored<'_>, k: usize) -> LayeredBisim {
        let mut levels = vec![base_relation(a, b)];
        for _ in 0..k {
            let next = refine_step(a, b, levels.last().expect("non-empty"));
            levels.push(next);
        }
        LayeredBisim { levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn relates(&self, level: usize, x: usize, y: usize) -> bool {
        self.levels[level][x] & bit(y) != 0
    }

    pub fn top(&self) -> &[u64] {
        self.levels.last().expect("non-empty")
    }
}

/// How far the roots of two models stay related.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BisimLevel {
    /// Root colors differ.
    Unrelated,
    /// `k`-bisimilar but not `(k+1)`-bisimilar (or the cutoff was reached).
    Level(usize),
    Full,
}

impl BisimLevel {
    pub fn at_least(self, k: usize) -> bool {
        match self {
            BisimLevel::Unrelated => false,
            BisimLevel::Level(l) => l >= k,
            BisimLevel::Full => true,
        }
    }
}

/// Greatest bisimulation between two colored posets (fixpoint of
/// [`refine_step`]) together with the level at which `(ra, rb)` was dropped.
pub fn greatest_bisimulation(a: Colored<'_>, b: Colored<'_>, ra: usize, rb: usize) -> (Vec<u64>, BisimLevel) {
    let mut cur = base_relation(a, b);
    if cur[ra] & bit(rb) == 0 {
        let fix = fixpoint(a, b, cur);
        return (fix, BisimLevel::Unrelated);
    }
    let mut level = 0;
    loop {
        let next = refine_step(a, b, &cur);
        if next == cur {
            return (cur, BisimLevel::Full);
        }
        if next[ra] & bit(rb) == 0 {
            return (fixpoint(a, b, next), BisimLevel::Level(level));
        }
        cur = next;
        level += 1;
    }
}

fn fixpoint(a: Colored<'_>, b: Colored<'_>, mut cur: Vec<u64>) -> Vec<u64> {
    loop {
        let next = refine_step(a, b, &cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Level reached by the roots, stopping early at `cutoff`.
pub fn root_level(a: Colored<'_>, ra: usize, b: Colored<'_>, rb: usize, cutoff: usize) -> BisimLevel {
    let mut cur = base_relation(a, b);
    if cur[ra] & bit(rb) == 0 {
        return BisimLevel::Unrelated;
    }
    for level in 0..cutoff {
        let next = refine_step(a, b, &cur);
        if next == cur {
            return BisimLevel::Full;
        }
        if next[ra] & bit(rb) == 0 {
            return BisimLevel::Level(level);
        }
        cur = next;
    }
    if refine_step(a, b, &cur) == cur {
        BisimLevel::Full
    } else {
        BisimLevel::Level(cutoff)
    }
}

/// The greatest bisimulation when it relates the roots.
pub fn full_bisim(m: &Model, n: &Model) -> Result<Option<Vec<u64>>> {
    m.same_vars(n)?;
    let (rel, level) = greatest_bisimulation(Colored::of(m), Colored::of(n), m.root(), n.root());
    Ok((level == BisimLevel::Full).then_some(rel))
}

pub fn k_bisim(m: &Model, n: &Model, k: usize) -> Result<Option<LayeredBisim>> {
    m.same_vars(n)?;
    let l = LayeredBisim::compute(Colored::of(m), Colored::of(n), k);
    Ok(l.relates(k, m.root(), n.root()).then_some(l))
}

/// `(M, root) ≤_k (N, root)`: some `z ≥ root_M` is `k`-bisimilar to the
/// root of `N`.
pub fn leq_k(m: &Model, n: &Model, k: usize) -> Result<bool> {
    Ok(leq_k_witness(m, n, k)?.is_some())
}

pub fn leq_k_witness(m: &Model, n: &Model, k: usize) -> Result<Option<usize>> {
    m.same_vars(n)?;
    let l = LayeredBisim::compute(Colored::of(m), Colored::of(n), k);
    let rn = n.root();
    Ok(ones(m.frame().up(m.root())).find(|&z| l.relates(k, z, rn)))
}

/// `Full` when the models are bisimilar, otherwise the largest `k ≤ cutoff`
/// with the roots `k`-bisimilar.
pub fn max_bisim_level(m: &Model, n: &Model, cutoff: usize) -> Result<BisimLevel> {
    m.same_vars(n)?;
    let (_, level) = greatest_bisimulation(Colored::of(m), Colored::of(n), m.root(), n.root());
    Ok(match level {
        BisimLevel::Level(l) if l > cutoff => BisimLevel::Level(cutoff),
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Player {
    Spoiler,
    Duplicator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Current pair of worlds and the number of rounds still to play.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameState {
    pub left: usize,
    pub right: usize,
    pub rounds_left: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameMove {
    pub player: Player,
    pub side: Side,
    pub world: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTranscript {
    pub moves: Vec<GameMove>,
    pub winner: Player,
}

/// Plays the `k`-round game. Player I (`Spoiler`) picks a side and a world
/// above the current one there; player II (`Duplicator`) answers above the
/// current world on the other side. Spoiler wins as soon as the current
/// colors differ. A move that is not above the current world loses.
pub fn play_game(
    m: &Model,
    n: &Model,
    k: usize,
    mut spoiler: impl FnMut(GameState) -> (Side, usize),
    mut duplicator: impl FnMut(GameState, Side, usize) -> usize,
) -> Result<GameTranscript> {
    m.same_vars(n)?;
    let mut st = GameState { left: m.root(), right: n.root(), rounds_left: k };
    let mut moves = Vec::new();
    loop {
        if m.color(st.left) != n.color(st.right) {
            return Ok(GameTranscript { moves, winner: Player::Spoiler });
        }
        if st.rounds_left == 0 {
            return Ok(GameTranscript { moves, winner: Player::Duplicator });
        }
        let (side, z) = spoiler(st);
        moves.push(GameMove { player: Player::Spoiler, side, world: z });
        let legal = match side {
            Side::Left => z < m.len() && m.frame().leq(st.left, z),
            Side::Right => z < n.len() && n.frame().leq(st.right, z),
        };
        if !legal {
            return Ok(GameTranscript { moves, winner: Player::Duplicator });
        }
        let w = duplicator(st, side, z);
        let other = match side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        moves.push(GameMove { player: Player::Duplicator, side: other, world: w });
        let legal = match other {
            Side::Left => w < m.len() && m.frame().leq(st.left, w),
            Side::Right => w < n.len() && n.frame().leq(st.right, w),
        };
        if !legal {
            return Ok(GameTranscript { moves, winner: Player::Spoiler });
        }
        let (left, right) = match side {
            Side::Left => (z, w),
            Side::Right => (w, z),
        };
        st = GameState { left, right, rounds_left: st.rounds_left - 1 };
    }
}

/// Optimal strategies read off the layered relation of `(m, n)` up to `k`.
#[derive(Clone, Debug)]
pub struct OptimalStrategies {
    layers: LayeredBisim,
    up_m: Vec<u64>,
    up_n: Vec<u64>,
}

impl OptimalStrategies {
    pub fn new(m: &Model, n: &Model, k: usize) -> OptimalStrategies {
        OptimalStrategies {
            layers: LayeredBisim::compute(Colored::of(m), Colored::of(n), k),
            up_m: m.frame().up_rows().to_vec(),
            up_n: n.frame().up_rows().to_vec(),
        }
    }

    /// A move that cannot be answered inside the next layer down, if any;
    /// otherwise stay put on the left.
    pub fn spoiler(&self, st: GameState) -> (Side, usize) {
        let r = st.rounds_left;
        let below = &self.layers.levels[r - 1];
        for z in ones(self.up_m[st.left]) {
            if self.up_n[st.right] & below[z] == 0 {
                return (Side::Left, z);
            }
        }
        let reach = ones(self.up_m[st.left]).fold(0u64, |m, x| m | below[x]);
        if let Some(w) = ones(self.up_n[st.right] & !reach).next() {
            return (Side::Right, w);
        }
        (Side::Left, st.left)
    }

    /// The least answer that stays inside the next layer down.
    pub fn duplicator(&self, st: GameState, side: Side, z: usize) -> usize {
        let below = &self.layers.levels[st.rounds_left - 1];
        match side {
            Side::Left => ones(self.up_n[st.right] & below[z]).next().unwrap_or(st.right),
            Side::Right => ones(self.up_m[st.left]).find(|&x| below[x] & bit(z) != 0).unwrap_or(st.left),
        }
    }
}

pub fn play_optimal(m: &Model, n: &Model, k: usize) -> Result<GameTranscript> {
    let s = OptimalStrategies::new(m, n, k);
    play_game(m, n, k, |st| s.spoiler(st), |st, side, z| s.duplicator(st, side, z))
}

/// Default bound on semantically distinct formulas explored.
pub const DEFAULT_FORMULA_BUDGET: usize = 1_000_000;

/// When `(M, root) ≤_k (N, root)` fails, a formula of implication depth at
/// most `k` that holds at the root of `M` and fails at the root of `N`.
pub fn distinguishing_formula(m: &Model, n: &Model, k: usize) -> Result<Option<Formula>> {
    distinguishing_formula_budget(m, n, k, DEFAULT_FORMULA_BUDGET)
}

pub fn distinguishing_formula_budget(m: &Model, n: &Model, k: usize, budget: usize) -> Result<Option<Formula>> {
    if leq_k(m, n, k)? {
        return Ok(None);
    }
    let u = disjoint_union(m.frame(), n.frame())?;
    let shift = m.len();
    let (rm, rn) = (m.root(), n.root() + shift);
    let mut table: Vec<(u64, Formula)> = Vec::new();
    let mut index: BTreeMap<u64, usize> = BTreeMap::new();
    let insert = |bits: u64, f: Formula, table: &mut Vec<(u64, Formula)>, index: &mut BTreeMap<u64, usize>| -> Result<bool> {
        if index.contains_key(&bits) {
            return Ok(false);
        }
        if table.len() >= budget {
            return Err(Error::CapExceeded { what: "formula search states", limit: budget as u64 });
        }
        index.insert(bits, table.len());
        table.push((bits, f));
        Ok(true)
    };
    insert(0, Formula::Bot, &mut table, &mut index)?;
    insert(u.all(), Formula::Top, &mut table, &mut index)?;
    for v in m.vars() {
        let bits = m.var_set(v)? | (n.var_set(v)? << shift);
        insert(bits, Formula::Var(v.clone()), &mut table, &mut index)?;
    }
    let found = |table: &[(u64, Formula)]| {
        table.iter().find(|(b, _)| b & bit(rm) != 0 && b & bit(rn) == 0).map(|(_, f)| f.clone())
    };
    for depth in 0..=k {
        if depth > 0 {
            let snapshot = table.len();
            for i in 0..snapshot {
                for j in 0..snapshot {
                    let bits = implies_unchecked(&u, table[i].0, table[j].0).bits();
                    let f = Formula::imp(table[i].1.clone(), table[j].1.clone());
                    insert(bits, f, &mut table, &mut index)?;
                }
            }
        }
        lattice_close(&mut table, &mut index, budget)?;
        if let Some(f) = found(&table) {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

fn lattice_close(table: &mut Vec<(u64, Formula)>, index: &mut BTreeMap<u64, usize>, budget: usize) -> Result<()> {
    let mut i = 0;
    while i < table.len() {
        for j in 0..i {
            let (a, fa) = (table[i].0, table[i].1.clone());
            let (b, fb) = (table[j].0, table[j].1.clone());
            for (bits, f) in [(a & b, Formula::and(fb.clone(), fa.clone())), (a | b, Formula::or(fb, fa))] {
                if let std::collections::btree_map::Entry::Vacant(e) = index.entry(bits) {
                    if table.len() >= budget {
                        return Err(Error::CapExceeded { what: "formula search states", limit: budget as u64 });
                    }
                    e.insert(table.len());
                    table.push((bits, f));
                }
            }
        }
        i += 1;
    }
    Ok(())
}

/// Models over the same poset used by tests and examples.
#[doc(hidden)]
pub fn model_on(frame: &Poset, colors: &[u64]) -> Model {
    Model::with_indexed_vars(frame.clone(), 1, colors.to_vec()).expect("valid model")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::semantics::satisfies_at_root;

    fn chain01() -> Model {
        Model::with_indexed_vars(Poset::chain(2), 1, vec![0, 1]).unwrap()
    }

    fn fork010() -> Model {
        Model::with_indexed_vars(Poset::fork(2), 1, vec![0, 1, 0]).unwrap()
    }

    #[test]
    fn figure_two_pair_levels() {
        let (c, f) = (chain01(), fork010());
        assert!(k_bisim(&c, &f, 1).unwrap().is_some());
        assert!(k_bisim(&c, &f, 2).unwrap().is_none());
        assert!(full_bisim(&c, &f).unwrap().is_none());
        assert_eq!(max_bisim_level(&c, &f, 10).unwrap(), BisimLevel::Level(1));
    }

    #[test]
    fn self_bisimilar() {
        let f = fork010();
        let rel = full_bisim(&f, &f).unwrap().unwrap();
        for (x, r) in rel.iter().enumerate() {
            assert!(r & bit(x) != 0);
        }
        for k in 0..5 {
            assert!(leq_k(&f, &f, k).unwrap());
            assert_eq!(play_optimal(&f, &f, k).unwrap().winner, Player::Duplicator);
        }
    }

    #[test]
    fn leq_on_figure_two() {
        let (c, f) = (chain01(), fork010());
        assert!(leq_k(&c, &f, 1).unwrap());
        assert!(leq_k(&f, &c, 1).unwrap());
        assert!(!leq_k(&c, &f, 2).unwrap());
    }

    #[test]
    fn games() {
        let (c, f) = (chain01(), fork010());
        let t = play_optimal(&c, &f, 2).unwrap();
        assert_eq!(t.winner, Player::Spoiler);
        assert!(t.moves.len() <= 4);
        assert_eq!(play_optimal(&c, &f, 1).unwrap().winner, Player::Duplicator);
        let t0 = play_game(&c, &f, 0, |_| unreachable!(), |_, _, _| unreachable!()).unwrap();
        assert_eq!(t0.winner, Player::Duplicator);
        assert!(t0.moves.is_empty());
    }

    #[test]
    fn distinguishing_double_negation() {
        let (c, f) = (chain01(), fork010());
        let phi = distinguishing_formula(&c, &f, 2).unwrap().unwrap();
        assert_eq!(phi, parse("~~p0").unwrap());
        assert!(satisfies_at_root(&c, &phi).unwrap());
        assert!(!satisfies_at_root(&f, &phi).unwrap());
        assert!(distinguishing_formula(&c, &f, 1).unwrap().is_none());
        assert!(distinguishing_formula(&f, &c, 1).unwrap().is_none());
        assert!(distinguishing_formula(&c, &c, 3).unwrap().is_none());
    }

    #[test]
    fn vars_must_match() {
        let a = chain01();
        let b = Model::with_indexed_vars(Poset::chain(2), 2, vec![0, 1]).unwrap();
        assert_eq!(k_bisim(&a, &b, 1), Err(Error::VarsMismatch));
    }
}
