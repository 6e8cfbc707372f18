//! Canonical forms and isomorphism tests for (optionally colored) posets.
//!
//! Canonical forms use partition refinement followed by individualization;
//! the certificate is the lexicographically least encoding over all leaves
//! of the search tree. Instances are small, so no automorphism pruning.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{bit, ones};
use crate::poset::Poset;

/// Totally ordered isomorphism certificate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(Vec<u64>);

impl CanonicalForm {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

pub fn canonical_form(p: &Poset) -> CanonicalForm {
    canonical_labeling(p.up_rows(), &vec![0; p.len()]).0
}

/// Canonical form of a poset whose worlds carry labels (e.g. model colors).
pub fn canonical_form_labeled(up: &[u64], labels: &[u64]) -> CanonicalForm {
    canonical_labeling(up, labels).0
}

/// Returns the certificate together with the position of every world in the
/// canonical order.
pub fn canonical_labeling(up: &[u64], labels: &[u64]) -> (CanonicalForm, Vec<usize>) {
    let n = up.len();
    let down = down_rows(up);
    let mut ranks: Vec<u64> = labels.to_vec();
    ranks.sort_unstable();
    ranks.dedup();
    let cells: Vec<usize> = labels
        .iter()
        .map(|l| ranks.binary_search(l).expect("label present"))
        .collect();
    let cells = refine(up, &down, cells);
    let mut best: Option<(Vec<u64>, Vec<usize>)> = None;
    search(up, &down, labels, cells, &mut best);
    let (enc, pos) = best.unwrap_or_else(|| (vec![n as u64], Vec::new()));
    (CanonicalForm(enc), pos)
}

fn down_rows(up: &[u64]) -> Vec<u64> {
    let mut down = vec![0u64; up.len()];
    for (a, &row) in up.iter().enumerate() {
        for b in ones(row) {
            down[b] |= bit(a);
        }
    }
    down
}

fn cell_count(cells: &[usize]) -> usize {
    cells.iter().copied().max().map_or(0, |m| m + 1)
}

/// Equitable refinement: split cells by the number of strict up- and
/// down-neighbours in every cell until stable. Cell ids are renumbered by
/// sorted signature, which keeps them isomorphism invariant.
fn refine(up: &[u64], down: &[u64], mut cells: Vec<usize>) -> Vec<usize> {
    let n = up.len();
    loop {
        let k = cell_count(&cells);
        let mut sigs: Vec<(Vec<usize>, usize)> = Vec::with_capacity(n);
        for v in 0..n {
            let mut sig = vec![0usize; 2 * k + 1];
            sig[0] = cells[v];
            for w in ones(up[v] & !bit(v)) {
                sig[1 + cells[w]] += 1;
            }
            for w in ones(down[v] & !bit(v)) {
                sig[1 + k + cells[w]] += 1;
            }
            sigs.push((sig, v));
        }
        let mut sorted: Vec<&Vec<usize>> = sigs.iter().map(|(s, _)| s).collect();
        sorted.sort();
        sorted.dedup();
        let next: Vec<usize> = sigs
            .iter()
            .map(|(s, _)| sorted.binary_search(&s).expect("signature present"))
            .collect();
        if sorted.len() == k {
            return next;
        }
        cells = next;
    }
}

fn search(up: &[u64], down: &[u64], labels: &[u64], cells: Vec<usize>, best: &mut Option<(Vec<u64>, Vec<usize>)>) {
    let n = up.len();
    let k = cell_count(&cells);
    if k == n {
        let enc = encode(up, labels, &cells);
        if best.as_ref().is_none_or(|(b, _)| enc < *b) {
            *best = Some((enc, cells));
        }
        return;
    }
    // first smallest non-singleton cell
    let mut sizes = vec![0usize; k];
    for &c in &cells {
        sizes[c] += 1;
    }
    let target = (0..k)
        .filter(|&c| sizes[c] > 1)
        .min_by_key(|&c| (sizes[c], c))
        .expect("non-discrete partition has a non-singleton cell");
    for v in 0..n {
        if cells[v] != target {
            continue;
        }
        let split: Vec<usize> = cells
            .iter()
            .enumerate()
            .map(|(w, &c)| 2 * c + usize::from(c == target && w != v))
            .collect();
        let split = renumber(&split);
        search(up, down, labels, refine(up, down, split), best);
    }
}

fn renumber(cells: &[usize]) -> Vec<usize> {
    let mut ids: Vec<usize> = cells.to_vec();
    ids.sort_unstable();
    ids.dedup();
    cells.iter().map(|c| ids.binary_search(c).expect("id present")).collect()
}

fn encode(up: &[u64], labels: &[u64], pos: &[usize]) -> Vec<u64> {
    let n = up.len();
    let mut at = vec![0usize; n];
    for v in 0..n {
        at[pos[v]] = v;
    }
    let mut enc = Vec::with_capacity(2 * n + 1);
    enc.push(n as u64);
    for &v in &at {
        enc.push(labels[v]);
    }
    for &v in &at {
        enc.push(ones(up[v]).fold(0u64, |m, w| m | bit(pos[w])));
    }
    enc
}

/// Backtracking search for an order isomorphism `P → Q`; the witness maps
/// worlds of `P` to worlds of `Q` (roots go to roots).
pub fn is_isomorphic(p: &Poset, q: &Poset) -> Option<Vec<usize>> {
    iso_labeled(p.up_rows(), &vec![0; p.len()], q.up_rows(), &vec![0; q.len()])
}

/// Label-preserving order isomorphism search.
pub fn iso_labeled(up_a: &[u64], lab_a: &[u64], up_b: &[u64], lab_b: &[u64]) -> Option<Vec<usize>> {
    let n = up_a.len();
    if n != up_b.len() {
        return None;
    }
    let (da, db) = (down_rows(up_a), down_rows(up_b));
    let inv = |up: &[u64], down: &[u64], lab: &[u64], v: usize| {
        (lab[v], up[v].count_ones(), down[v].count_ones(), cover_count(up, v))
    };
    let ia: Vec<_> = (0..n).map(|v| inv(up_a, &da, lab_a, v)).collect();
    let ib: Vec<_> = (0..n).map(|v| inv(up_b, &db, lab_b, v)).collect();
    let mut sa = ia.clone();
    let mut sb = ib.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (up_a[v].count_ones(), v));
    let mut map = vec![usize::MAX; n];
    let mut used = 0u64;
    if extend(0, &order, up_a, up_b, &ia, &ib, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

fn cover_count(up: &[u64], v: usize) -> u32 {
    let strict = up[v] & !bit(v);
    let above = ones(strict).fold(0u64, |m, w| m | (up[w] & !bit(w)));
    (strict & !above).count_ones()
}

#[allow(clippy::too_many_arguments)]
fn extend<I: PartialEq>(
    i: usize,
    order: &[usize],
    up_a: &[u64],
    up_b: &[u64],
    ia: &[I],
    ib: &[I],
    map: &mut [usize],
    used: &mut u64,
) -> bool {
    if i == order.len() {
        return true;
    }
    let v = order[i];
    for w in 0..up_b.len() {
        if *used & bit(w) != 0 || ia[v] != ib[w] {
            continue;
        }
        let ok = order[..i].iter().all(|&u| {
            let mu = map[u];
            (up_a[v] & bit(u) != 0) == (up_b[w] & bit(mu) != 0)
                && (up_a[u] & bit(v) != 0) == (up_b[mu] & bit(w) != 0)
        });
        if !ok {
            continue;
        }
        map[v] = w;
        *used |= bit(w);
        if extend(i + 1, order, up_a, up_b, ia, ib, map, used) {
            return true;
        }
        *used &= !bit(w);
        map[v] = usize::MAX;
    }
    false
}

/// All posets with `n` points up to isomorphism, in canonical-form order.
///
/// Every poset arises from a poset on one point fewer by adding a new minimal
/// element below some upset.
pub fn all_posets(n: usize) -> Vec<Poset> {
    let mut layer: BTreeMap<CanonicalForm, Vec<u64>> = BTreeMap::new();
    layer.insert(canonical_labeling(&[], &[]).0, Vec::new());
    for size in 1..=n {
        let mut next = BTreeMap::new();
        for up in layer.values() {
            let base = rows_poset(up);
            let upsets = base.all_upsets(u64::MAX).expect("uncapped");
            for u in upsets {
                let mut rows = up.clone();
                rows.push(u.bits() | bit(size - 1));
                let cf = canonical_labeling(&rows, &vec![0; size]).0;
                next.entry(cf).or_insert(rows);
            }
        }
        layer = next;
    }
    layer.values().map(|rows| rows_poset(rows)).collect()
}

/// All posets with at most `limit` upsets, up to isomorphism, ordered by
/// size then canonical form.
///
/// Removing a minimal element strictly lowers the number of upsets, so the
/// generation by added minimal elements can stop at the limit.
pub fn posets_with_upsets_at_most(limit: u64) -> Vec<Poset> {
    let mut out = Vec::new();
    let mut layer: BTreeMap<CanonicalForm, Vec<u64>> = BTreeMap::new();
    layer.insert(canonical_labeling(&[], &[]).0, Vec::new());
    let mut size = 0;
    while !layer.is_empty() && size < crate::poset::MAX_WORLDS {
        let mut next = BTreeMap::new();
        for up in layer.values() {
            let base = rows_poset(up);
            let upsets: Vec<u64> = base.all_upsets(limit).expect("bounded by limit").iter().map(|u| u.bits()).collect();
            if !up.is_empty() || size == 0 {
                out.push(base);
            }
            for &u in &upsets {
                let grown = upsets.len() as u64 + upsets.iter().filter(|&&v| v & u == u).count() as u64;
                if grown > limit {
                    continue;
                }
                let mut rows = up.clone();
                rows.push(u | bit(size));
                let cf = canonical_labeling(&rows, &vec![0; size + 1]).0;
                next.entry(cf).or_insert(rows);
            }
        }
        layer = next;
        size += 1;
    }
    out.retain(|p| !p.is_empty());
    out
}

/// Rooted posets with `n` points up to isomorphism.
pub fn all_rooted_posets(n: usize) -> Vec<Poset> {
    if n == 0 {
        return Vec::new();
    }
    all_posets(n - 1)
        .iter()
        .map(|p| p.add_root("root").expect("fresh root name"))
        .collect()
}

fn rows_poset(rows: &[u64]) -> Poset {
    let names = (0..rows.len()).map(|i| format!("w{i}")).collect();
    Poset::from_up_sets(names, rows.to_vec()).expect("generated rows form a poset")
}
