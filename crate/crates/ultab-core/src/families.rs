//! The concrete posets and models: the Rieger–Nishimura ladder, the `Q_i`,
//! combs, Boolean sums and the `M`/`N` model families.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{bit, ones};
use crate::canon::canonical_form;
use crate::error::{Error, Result};
use crate::poset::{linear_sum, Poset, MAX_WORLDS};
use crate::semantics::{ones_then_zeros, Model};

/// Largest ladder index whose upset still fits in [`MAX_WORLDS`].
pub const RN_MAX_INDEX: usize = MAX_WORLDS - 2;

fn rn_name(j: usize) -> String {
    match j {
        0 => "1".to_string(),
        1 => "0".to_string(),
        _ => format!("P{}", j - 1),
    }
}

/// `↑P_i` in the ladder: `P_1 ≺ 1`, `P_2 ≺ 1, 0`, and `P_j ≺ P_{j-2}, P_{j-3}`
/// where `0` and `1` play the roles of `P_0` and `P_{-1}`.
pub fn rn_prefix(i: usize) -> Result<Poset> {
    let full = rn_ladder(i)?;
    let (p, _) = full.restrict(full.up(i + 1));
    // keep the root first for readability of dumps
    Ok(reorder_root_first(&p))
}

/// The ladder cut off below `P_i`: points `1, 0, P_1, …, P_i`.
fn rn_ladder(i: usize) -> Result<Poset> {
    if i == 0 || i > RN_MAX_INDEX {
        return Err(Error::InvalidParameter(format!("ladder index must lie in 1..={RN_MAX_INDEX}")));
    }
    // slot s holds P_{s-1}; slot 0 is `1`, slot 1 is `0`
    let n = i + 2;
    let names: Vec<String> = (0..n).map(rn_name).collect();
    let mut pairs = vec![(2, 0)];
    for s in 3..n {
        pairs.push((s, s - 2));
        pairs.push((s, s - 3));
    }
    Poset::from_relation(names, &pairs)
}

fn reorder_root_first(p: &Poset) -> Poset {
    let Some(r) = p.root() else { return p.clone() };
    let mut order = vec![r];
    order.extend((0..p.len()).filter(|&w| w != r));
    permute(p, &order)
}

/// Poset whose `i`-th world is `order[i]` of `p`.
pub(crate) fn permute(p: &Poset, order: &[usize]) -> Poset {
    let mut pos = vec![0usize; p.len()];
    for (i, &w) in order.iter().enumerate() {
        pos[w] = i;
    }
    let names = order.iter().map(|&w| p.name(w).to_string()).collect();
    let up = order.iter().map(|&w| ones(p.up(w)).fold(0u64, |m, v| m | bit(pos[v]))).collect();
    Poset::from_up_sets(names, up).expect("permutation of a poset")
}

/// The ladder upset with one variable `p` true exactly at `1`.
pub fn rn_canonical_model(i: usize) -> Result<Model> {
    let frame = rn_prefix(i)?;
    let one = frame.index_of("1")?;
    let colors = (0..frame.len()).map(|w| u64::from(w == one)).collect();
    Model::new(frame, vec!["p".to_string()], colors)
}

/// `↑{P_{2n}, P_{2n-1}}`; not rooted.
pub fn p_star(n: usize) -> Result<Poset> {
    if n == 0 || 2 * n > RN_MAX_INDEX {
        return Err(Error::InvalidParameter("p-star needs 1 <= 2n <= ladder cap".into()));
    }
    let big = rn_ladder(2 * n)?;
    let (a, b) = (2 * n + 1, 2 * n);
    Ok(big.restrict(big.up(a) | big.up(b)).0)
}

/// The `n`-comb: spine `x1 < … < xn`, tooth `yj` covering `xj`.
pub fn comb(n: usize) -> Result<Poset> {
    broken_comb(n, if n >= 64 { u64::MAX } else { bit(n) - 1 })
}

/// Broken `n`-comb keeping tooth `y_{j+1}` when bit `j` of `teeth` is set.
pub fn broken_comb(n: usize, teeth: u64) -> Result<Poset> {
    if n == 0 {
        return Err(Error::InvalidParameter("a comb needs at least one spine point".into()));
    }
    let kept: Vec<usize> = (0..n).filter(|&j| teeth & bit(j) != 0).collect();
    if n + kept.len() > MAX_WORLDS {
        return Err(Error::TooManyWorlds(n + kept.len()));
    }
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    for (t, &j) in kept.iter().enumerate() {
        names.push(format!("y{}", j + 1));
        pairs.push((j, n + t));
    }
    Poset::from_relation(names, &pairs)
}

/// All `2^n` broken `n`-combs, by tooth mask.
pub fn broken_combs(n: usize) -> Result<Vec<Poset>> {
    if n >= 20 {
        return Err(Error::CapExceeded { what: "broken comb count", limit: 1 << 20 });
    }
    (0..(1u64 << n)).map(|t| broken_comb(n, t)).collect()
}

/// Whether `p` is isomorphic to a broken `m`-comb for some `m`.
pub fn is_broken_comb(p: &Poset) -> bool {
    if !p.is_rooted() {
        return false;
    }
    let cf = canonical_form(p);
    let n = p.len();
    (1..=n).any(|m| {
        let t = n - m;
        t <= m && subsets_of_size(m, t).any(|mask| broken_comb(m, mask).is_ok_and(|c| canonical_form(&c) == cf))
    })
}

fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = u64> {
    (0..(1u64 << n)).filter(move |m| m.count_ones() as usize == k)
}

/// Broken combs with at most `max_size` points, up to isomorphism.
pub fn broken_combs_up_to(max_size: usize) -> Result<Vec<Poset>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for m in 1..=max_size {
        for t in 0..=m.min(max_size - m) {
            for mask in subsets_of_size(m, t) {
                let c = broken_comb(m, mask)?;
                if seen.insert(canonical_form(&c)) {
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

/// Sizes of depth levels `c_1, c_2, …` (depth 1 = maximal points) and the
/// longest run of consecutive levels with at least two points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackProfile {
    pub level_sizes: Vec<usize>,
    pub stack_depth: usize,
}

pub fn stack_profile(p: &Poset) -> StackProfile {
    let mut level_sizes = vec![0usize; p.depth()];
    for d in p.depths() {
        level_sizes[d - 1] += 1;
    }
    let (mut best, mut run) = (0, 0);
    for &c in &level_sizes {
        run = if c >= 2 { run + 1 } else { 0 };
        best = best.max(run);
    }
    StackProfile { level_sizes, stack_depth: best }
}

/// Rooted, and every point of depth `d + 1` is covered exactly by the
/// points of depth `d`.
pub fn is_boolean_sum(p: &Poset) -> bool {
    if !p.is_rooted() {
        return false;
    }
    let depths = p.depths();
    let level = |d: usize| (0..p.len()).filter(|&w| depths[w] == d).fold(0u64, |m, w| m | bit(w));
    (0..p.len()).all(|w| depths[w] == 1 || p.successors(w) == level(depths[w] - 1))
}

/// Boolean sum with the given level sizes listed from the top.
pub fn boolean_sum(level_sizes: &[usize]) -> Result<Poset> {
    if level_sizes.is_empty() || level_sizes.contains(&0) {
        return Err(Error::InvalidParameter("level sizes must be positive".into()));
    }
    if *level_sizes.last().expect("non-empty") != 1 {
        return Err(Error::InvalidParameter("the lowest level must be a single root".into()));
    }
    let total: usize = level_sizes.iter().sum();
    if total > MAX_WORLDS {
        return Err(Error::TooManyWorlds(total));
    }
    let mut names = Vec::with_capacity(total);
    let mut starts = Vec::new();
    for (d, &c) in level_sizes.iter().enumerate() {
        starts.push(names.len());
        for j in 0..c {
            names.push(format!("L{}.{}", d + 1, j));
        }
    }
    let mut pairs = Vec::new();
    for d in 1..level_sizes.len() {
        for lo in 0..level_sizes[d] {
            for hi in 0..level_sizes[d - 1] {
                pairs.push((starts[d] + lo, starts[d - 1] + hi));
            }
        }
    }
    Poset::from_relation(names, &pairs)
}

/// All Boolean sums with at most `max_size` points, up to isomorphism
/// (they are determined by their level sizes).
pub fn boolean_sums_up_to(max_size: usize) -> Vec<Poset> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    compositions(max_size.saturating_sub(1), &mut prefix, &mut |levels| {
        let mut sizes = levels.to_vec();
        sizes.push(1);
        out.push(boolean_sum(&sizes).expect("valid level sizes"));
    });
    out
}

fn compositions(budget: usize, prefix: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    f(prefix);
    for c in 1..=budget {
        prefix.push(c);
        compositions(budget - c, prefix, f);
        prefix.pop();
    }
}

/// Layer `j` (from the top) of the `M`/`N` frames: left and right colors.
fn mn_layers(n: usize, layers: usize) -> Vec<u64> {
    let mut colors = Vec::new();
    for j in 0..layers {
        colors.push(ones_then_zeros(n, j));
        colors.push(ones_then_zeros(n, j + 1));
    }
    colors
}

fn mn_model(n: usize, layers: usize, root_zeros: usize) -> Result<Model> {
    let mut sizes = vec![2; layers];
    sizes.push(1);
    let frame = boolean_sum(&sizes)?;
    let mut colors = mn_layers(n, layers);
    colors.push(ones_then_zeros(n, root_zeros));
    Model::with_indexed_vars(frame, n, colors)
}

/// `M_n^k`: `k + 1` two-point layers and a root colored like the right
/// point just above it.
pub fn m_model(n: usize, k: usize) -> Result<Model> {
    if n <= 2 || k + 1 >= n {
        return Err(Error::InvalidParameter("m-model needs n > 2 and k + 1 < n".into()));
    }
    mn_model(n, k + 1, k + 1)
}

/// `N_n^k`: like `M_n^k` but the root loses one more variable.
pub fn n_model(n: usize, k: usize) -> Result<Model> {
    if n < 2 || k + 2 > n {
        return Err(Error::InvalidParameter("n-model needs n >= 2 and k + 2 <= n".into()));
    }
    mn_model(n, k + 1, k + 2)
}

/// The eight frames `Q_1, …, Q_8`.
pub fn q_poset(i: usize) -> Result<Poset> {
    let (names, covers): (&[&str], &[(&str, &str)]) = match i {
        // root below a chain a < a' and a single point b
        1 => (&["r", "a", "a'", "b"], &[("r", "a"), ("a", "a'"), ("r", "b")]),
        // l sees both tops, m only the right one
        2 => (&["r", "l", "m", "u", "v"], &[("r", "l"), ("r", "m"), ("l", "u"), ("l", "v"), ("m", "v")]),
        // a point and a 2-chain between a root and a top
        3 => (&["r", "a", "b", "b'", "t"], &[("r", "a"), ("r", "b"), ("b", "b'"), ("a", "t"), ("b'", "t")]),
        4 => (&["r", "a", "b", "c", "d"], &[("r", "a"), ("r", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")]),
        5 => (
            &["r", "a", "b", "c", "d", "t"],
            &[("r", "a"), ("r", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "t"), ("d", "t")],
        ),
        6 => (&["r", "a", "b", "t"], &[("r", "a"), ("r", "b"), ("a", "t"), ("b", "t")]),
        7 => (&["r", "a", "a'", "b", "b'"], &[("r", "a"), ("a", "a'"), ("r", "b"), ("b", "b'")]),
        8 => (&["r", "a", "b", "c"], &[("r", "a"), ("r", "b"), ("r", "c")]),
        _ => return Err(Error::InvalidParameter(format!("no poset Q{i}; expected 1..=8"))),
    };
    Poset::from_named_covers(names, covers)
}

fn colored(names: &[&str], covers: &[(&str, &str)], colors: &[&str]) -> Model {
    let frame = Poset::from_named_covers(names, covers).expect("figure data");
    let vars = colors[0].len();
    let bits = colors
        .iter()
        .map(|s| s.bytes().enumerate().fold(0u64, |m, (i, c)| if c == b'1' { m | bit(i) } else { m }))
        .collect();
    Model::with_indexed_vars(frame, vars, bits).expect("figure data")
}

/// The chain `(0; 1)` and the fork `(0; 1, 0)`.
pub fn figure2_pair() -> (Model, Model) {
    (
        colored(&["r", "t"], &[("r", "t")], &["0", "1"]),
        colored(&["r", "t1", "t0"], &[("r", "t1"), ("r", "t0")], &["0", "1", "0"]),
    )
}

fn fork_model(colors: &[&str]) -> Model {
    colored(&["r", "a", "b"], &[("r", "a"), ("r", "b")], colors)
}

/// For each of `Q_1, …, Q_5` a model on `Q_i` and a smaller
/// model that is 2-bisimilar to it but not bisimilar.
pub fn figure4_pairs() -> Vec<(Model, Model)> {
    let q1 = colored(&["r", "a", "a'", "b"], &[("r", "a"), ("a", "a'"), ("r", "b")], &["0", "0", "1", "0"]);
    let q2 = colored(
        &["r", "l", "m", "u", "v"],
        &[("r", "l"), ("r", "m"), ("l", "u"), ("l", "v"), ("m", "v")],
        &["0", "0", "0", "0", "1"],
    );
    let q3 = colored(
        &["r", "a", "b", "b'", "t"],
        &[("r", "a"), ("r", "b"), ("b", "b'"), ("a", "t"), ("b'", "t")],
        &["00", "00", "00", "10", "11"],
    );
    let diamond = colored(
        &["r", "a", "b", "t"],
        &[("r", "a"), ("r", "b"), ("a", "t"), ("b", "t")],
        &["00", "00", "10", "11"],
    );
    let q4 = colored(
        &["r", "a", "b", "c", "d"],
        &[("r", "a"), ("r", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")],
        &["00", "10", "00", "11", "10"],
    );
    let q4_right = colored(&["r", "m", "c", "d"], &[("r", "m"), ("m", "c"), ("m", "d")], &["00", "10", "11", "10"]);
    let q5 = colored(
        &["r", "a", "b", "c", "d", "t"],
        &[("r", "a"), ("r", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "t"), ("d", "t")],
        &["000", "100", "000", "110", "100", "111"],
    );
    let q5_right = colored(
        &["r", "m", "c", "d", "t"],
        &[("r", "m"), ("m", "c"), ("m", "d"), ("c", "t"), ("d", "t")],
        &["000", "100", "110", "100", "111"],
    );
    vec![
        (q1, fork_model(&["0", "1", "0"])),
        (q2, fork_model(&["0", "1", "0"])),
        (q3, diamond),
        (q4, q4_right),
        (q5, q5_right),
    ]
}

/// Frame of `N_n^{n-2}` with a new greatest element.
pub fn s_frame(n: usize) -> Result<Poset> {
    if n < 3 {
        return Err(Error::InvalidParameter("s-frame needs n >= 3".into()));
    }
    n_model(n, n - 2)?.frame().add_top("top")
}

/// `↑P_i` with a new greatest element.
pub fn p_prime(i: usize) -> Result<Poset> {
    rn_prefix(i)?.add_top("top")
}

/// `p_prime(i)` stacked below `p_prime(j)`.
pub fn p_prime_sum(lower: usize, upper: usize) -> Result<Poset> {
    linear_sum(&p_prime(upper)?, &p_prime(lower)?)
}

/// Family names accepted by [`family`].
pub const FAMILY_NAMES: &[&str] = &[
    "chain", "fork", "antichain", "rn", "p-star", "comb", "broken-comb", "q", "s", "p-prime",
];

/// Frame of a named family for integer parameters `n`, `i`, `k`.
pub fn family(name: &str, n: Option<usize>, i: Option<usize>, k: Option<usize>) -> Result<Poset> {
    let need = |v: Option<usize>, what: &str| {
        v.ok_or_else(|| Error::InvalidParameter(format!("family `{name}` needs parameter {what}")))
    };
    match name {
        "chain" => Ok(Poset::chain(need(n, "n")?)),
        "fork" => Ok(Poset::fork(need(n, "n")?)),
        "antichain" => Ok(Poset::antichain(need(n, "n")?)),
        "rn" => rn_prefix(need(i.or(n), "i")?),
        "p-star" => p_star(need(n, "n")?),
        "comb" => comb(need(n, "n")?),
        "broken-comb" => broken_comb(need(n, "n")?, need(k, "k (tooth mask)")? as u64),
        "q" => q_poset(need(i.or(n), "i")?),
        "s" => s_frame(need(n, "n")?),
        "p-prime" => p_prime(need(i.or(n), "i")?),
        _ => Err(Error::UnknownName(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::is_isomorphic;
    use crate::semantics::is_reduced;

    #[test]
    fn ladder_shapes() {
        assert_eq!(rn_prefix(2).unwrap().len(), 3);
        let p4 = rn_prefix(4).unwrap();
        let root = p4.root().unwrap();
        let covers: BTreeSet<&str> = ones(p4.successors(root)).map(|w| p4.name(w)).collect();
        assert_eq!(covers, ["P1", "P2"].into_iter().collect());
        for k in 0..=4 {
            assert_eq!(rn_prefix(2 * k + 1).unwrap().depth(), k + 2);
        }
        assert!(rn_prefix(0).is_err());
    }

    #[test]
    fn ladder_models_are_reduced() {
        for i in 1..=8 {
            let m = rn_canonical_model(i).unwrap();
            assert!(is_reduced(&m), "P{i}");
            if let Ok(zero) = m.frame().index_of("0") {
                assert_eq!(m.color(zero), 0);
            }
        }
    }

    #[test]
    fn p_star_nesting() {
        let s1 = p_star(1).unwrap();
        assert_eq!(s1.len(), 4);
        let max: BTreeSet<&str> = ones(s1.maximal()).map(|w| s1.name(w)).collect();
        assert_eq!(max, ["0", "1"].into_iter().collect());
        let s2 = p_star(2).unwrap();
        assert!(s1.names().iter().all(|n| s2.names().contains(n)));
    }

    #[test]
    fn combs() {
        assert!(is_isomorphic(&comb(1).unwrap(), &Poset::chain(2)).is_some());
        for n in 1..=5 {
            assert_eq!(comb(n).unwrap().len(), 2 * n);
            assert_eq!(broken_combs(n).unwrap().len(), 1 << n);
        }
        assert!(is_broken_comb(&Poset::chain(3)));
        assert!(!is_broken_comb(&Poset::fork(3)));
        assert!(is_broken_comb(&comb(3).unwrap()));
    }

    #[test]
    fn boolean_sums() {
        let q4 = q_poset(4).unwrap();
        assert!(is_boolean_sum(&q4));
        assert_eq!(stack_profile(&q4), StackProfile { level_sizes: vec![2, 2, 1], stack_depth: 2 });
        assert!(is_boolean_sum(&Poset::chain(4)));
        assert_eq!(stack_profile(&Poset::chain(4)).stack_depth, 0);
        assert!(!is_boolean_sum(&q_poset(1).unwrap()));
        // compositions of 5 into ordered parts: 2^4 = 16, plus the lone root
        assert_eq!(boolean_sums_up_to(6).len(), 1 + 1 + 2 + 4 + 8 + 16);
    }

    #[test]
    fn q_shapes() {
        let sizes: Vec<usize> = (1..=8).map(|i| q_poset(i).unwrap().len()).collect();
        assert_eq!(sizes, vec![4, 5, 5, 5, 6, 4, 5, 4]);
        let q5 = linear_sum(&Poset::point(), &q_poset(4).unwrap()).unwrap();
        assert!(is_isomorphic(&q5, &q_poset(5).unwrap()).is_some());
        assert_eq!(q_poset(8).unwrap().width(), 3);
        assert!(q_poset(9).is_err());
    }

    #[test]
    fn mn_models() {
        for n in 3..=6 {
            for k in 0..n - 1 {
                let m = m_model(n, k).unwrap();
                assert!(is_boolean_sum(m.frame()));
                assert!(is_reduced(&m));
                assert_eq!(stack_profile(m.frame()).stack_depth, k + 1);
            }
            for k in 0..=n - 2 {
                let nm = n_model(n, k).unwrap();
                assert!(is_boolean_sum(nm.frame()));
                assert!(is_reduced(&nm));
            }
        }
        assert!(m_model(2, 0).is_err());
        assert!(m_model(4, 3).is_err());
        assert!(n_model(4, 3).is_err());
    }

    #[test]
    fn s_frames() {
        for n in 3..=6 {
            let s = s_frame(n).unwrap();
            assert_eq!(s.maximal().count_ones(), 1);
            assert_eq!(s.width(), 2);
            assert!(is_boolean_sum(&s));
        }
    }
}
