//! Invariants checked against naive oracles on small random instances.

use proptest::prelude::*;

use ultab_core::bisim::{
    distinguishing_formula, full_bisim, k_bisim, leq_k, play_optimal, LayeredBisim, Player,
};
use ultab_core::canon::{canonical_form, is_isomorphic};
use ultab_core::formula::{jankov_syntactic, parse};
use ultab_core::heyting::{generated_subalgebra, heyting_implies};
use ultab_core::morphism::{check_pmorphism, jankov_refutes, quotient, surjective_pmorphisms};
use ultab_core::poset::linear_sum;
use ultab_core::semantics::{eval, frame_validates, is_reduced, reduce};
use ultab_core::{Formula, Model, Poset, Upset};

// ---- oracles ----

fn leq_matrix(p: &Poset) -> Vec<Vec<bool>> {
    (0..p.len()).map(|a| (0..p.len()).map(|b| p.leq(a, b)).collect()).collect()
}

fn closure_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

fn is_upset_oracle(le: &[Vec<bool>], s: u64) -> bool {
    let n = le.len();
    (0..n).all(|a| s >> a & 1 == 0 || (0..n).all(|b| !le[a][b] || s >> b & 1 == 1))
}

fn upsets_oracle(le: &[Vec<bool>]) -> Vec<u64> {
    (0..1u64 << le.len()).filter(|&s| is_upset_oracle(le, s)).collect()
}

fn forces(le: &[Vec<bool>], val: &dyn Fn(&str, usize) -> bool, x: usize, f: &Formula) -> bool {
    match f {
        Formula::Var(v) => val(v, x),
        Formula::Bot => false,
        Formula::Top => true,
        Formula::And(a, b) => forces(le, val, x, a) && forces(le, val, x, b),
        Formula::Or(a, b) => forces(le, val, x, a) || forces(le, val, x, b),
        Formula::Imp(a, b) => (0..le.len()).all(|y| !le[x][y] || !forces(le, val, y, a) || forces(le, val, y, b)),
    }
}

fn model_forces(m: &Model, x: usize, f: &Formula) -> bool {
    let le = leq_matrix(m.frame());
    let val = |v: &str, w: usize| {
        let i = m.vars().iter().position(|u| u == v).expect("bound variable");
        m.color(w) >> i & 1 == 1
    };
    forces(&le, &val, x, f)
}

/// `k`-bisimilarity by the game recursion.
fn kbis(m: &Model, n: &Model, k: usize, x: usize, y: usize) -> bool {
    if m.color(x) != n.color(y) {
        return false;
    }
    if k == 0 {
        return true;
    }
    let (pm, pn) = (m.frame(), n.frame());
    let forth = (0..m.len()).filter(|&x2| pm.leq(x, x2)).all(|x2| (0..n.len()).any(|y2| pn.leq(y, y2) && kbis(m, n, k - 1, x2, y2)));
    let back = (0..n.len()).filter(|&y2| pn.leq(y, y2)).all(|y2| (0..m.len()).any(|x2| pm.leq(x, x2) && kbis(m, n, k - 1, x2, y2)));
    forth && back
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut v = rest.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

fn iso_oracle(p: &Poset, q: &Poset) -> bool {
    p.len() == q.len()
        && permutations(p.len()).iter().any(|f| (0..p.len()).all(|a| (0..p.len()).all(|b| p.leq(a, b) == q.leq(f[a], f[b]))))
}

fn pmorphism_oracle(map: &[usize], p: &Poset, q: &Poset) -> bool {
    let mono = (0..p.len()).all(|a| (0..p.len()).all(|b| !p.leq(a, b) || q.leq(map[a], map[b])));
    let back = (0..p.len()).all(|a| (0..q.len()).all(|t| !q.leq(map[a], t) || (0..p.len()).any(|b| p.leq(a, b) && map[b] == t)));
    let onto = (0..q.len()).all(|t| map.contains(&t));
    mono && back && onto
}

// ---- strategies ----

fn build(n: usize, edges: &[bool], perm: &[usize]) -> (Poset, Vec<(usize, usize)>) {
    let mut pairs = Vec::new();
    let mut e = edges.iter();
    for i in 0..n {
        for j in i + 1..n {
            if *e.next().unwrap_or(&false) {
                pairs.push((perm[i], perm[j]));
            }
        }
    }
    let names = (0..n).map(|i| format!("w{i}")).collect();
    (Poset::from_relation(names, &pairs).expect("acyclic by construction"), pairs)
}

fn arb_poset_edges(max: usize) -> impl Strategy<Value = (Poset, Vec<(usize, usize)>)> {
    (1..=max).prop_flat_map(|n| {
        (
            proptest::collection::vec(proptest::bool::weighted(0.4), n * (n - 1) / 2),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        )
            .prop_map(move |(e, perm)| build(n, &e, &perm))
    })
}

fn arb_poset(max: usize) -> impl Strategy<Value = Poset> {
    arb_poset_edges(max).prop_map(|(p, _)| p)
}

fn arb_rooted(max: usize) -> impl Strategy<Value = Poset> {
    arb_poset(max - 1).prop_map(|p| p.add_root("root").expect("fresh name"))
}

fn arb_model(max: usize, vars: usize) -> impl Strategy<Value = Model> {
    (arb_rooted(max), proptest::collection::vec(any::<u64>(), vars)).prop_map(move |(p, seeds)| {
        let sets: Vec<u64> = seeds.iter().map(|s| p.up_closure_mask(s & p.all())).collect();
        let colors = (0..p.len()).map(|w| (0..vars).filter(|&i| sets[i] >> w & 1 == 1).fold(0, |c, i| c | 1 << i)).collect();
        Model::with_indexed_vars(p, vars, colors).expect("upsets give monotone colors")
    })
}

fn arb_formula(vars: usize) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Bot),
        Just(Formula::Top),
        (0..vars).prop_map(|i| Formula::var(format!("p{i}"))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::imp(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn order_matches_closure((p, edges) in arb_poset_edges(7)) {
        let le = closure_oracle(p.len(), &edges);
        prop_assert_eq!(leq_matrix(&p), le);
    }

    #[test]
    fn upsets_match_brute_force(p in arb_poset(6)) {
        let le = leq_matrix(&p);
        let mut got: Vec<u64> = p.all_upsets(1 << 12).unwrap().iter().map(|u| u.bits()).collect();
        got.sort_unstable();
        prop_assert_eq!(got, upsets_oracle(&le));
    }

    #[test]
    fn up_closure_is_idempotent_and_monotone(p in arb_poset(7), a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (a & p.all(), b & p.all());
        let ca = p.up_closure_mask(a);
        prop_assert!(is_upset_oracle(&leq_matrix(&p), ca));
        prop_assert_eq!(p.up_closure_mask(ca), ca);
        prop_assert!(ca & !p.up_closure_mask(a | b) == 0);
    }

    #[test]
    fn rooted_upsets_bounded(p in arb_poset(7)) {
        prop_assert!(p.rooted_upsets(true).len() <= p.len());
    }

    #[test]
    fn linear_sum_adds_depth(a in arb_poset(4), b in arb_poset(4)) {
        let s = linear_sum(&a, &b).unwrap();
        prop_assert_eq!(s.depth(), a.depth() + b.depth());
        prop_assert_eq!(s.len(), a.len() + b.len());
    }

    #[test]
    fn canonical_form_decides_isomorphism(p in arb_poset(6), q in arb_poset(6)) {
        let oracle = iso_oracle(&p, &q);
        prop_assert_eq!(canonical_form(&p) == canonical_form(&q), oracle);
        prop_assert_eq!(is_isomorphic(&p, &q).is_some(), oracle);
    }

    #[test]
    fn relabelling_keeps_canonical_form((p, edges) in arb_poset_edges(7), perm in Just((0..7).collect::<Vec<usize>>()).prop_shuffle()) {
        let n = p.len();
        let perm: Vec<usize> = perm.into_iter().filter(|&i| i < n).collect();
        let moved: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let q = Poset::from_relation((0..n).map(|i| format!("v{i}")).collect(), &moved).unwrap();
        prop_assert_eq!(canonical_form(&p), canonical_form(&q));
    }

    #[test]
    fn implication_is_pointwise_and_residuated(p in arb_poset(5), seeds in proptest::collection::vec(any::<u64>(), 3)) {
        let le = leq_matrix(&p);
        let [u, v, w] = [0, 1, 2].map(|i| p.up_closure_mask(seeds[i] & p.all()));
        let (u, v, w) = (p.upset(u).unwrap(), p.upset(v).unwrap(), p.upset(w).unwrap());
        let imp = heyting_implies(&p, u, v).unwrap();
        let oracle = (0..p.len())
            .filter(|&x| (0..p.len()).all(|y| !le[x][y] || !u.contains(y) || v.contains(y)))
            .fold(0u64, |s, x| s | 1 << x);
        prop_assert_eq!(imp.bits(), oracle);
        prop_assert_eq!(w.is_subset(imp), w.meet(u).is_subset(v));
    }

    #[test]
    fn generation_strata_grow_and_respect_depth_bound(p in arb_rooted(6), seeds in proptest::collection::vec(any::<u64>(), 1..3)) {
        let gens: Vec<Upset> = seeds.iter().map(|s| p.upset(p.up_closure_mask(s & p.all())).unwrap()).collect();
        let t = generated_subalgebra(&p, &gens).unwrap();
        for pair in t.strata.windows(2) {
            prop_assert!(pair[0].iter().all(|u| pair[1].contains(u)));
            prop_assert!(pair[1].len() > pair[0].len());
        }
        prop_assert!(t.stabilization_depth < 2 * p.depth());
    }

    #[test]
    fn eval_matches_pointwise_forcing(m in arb_model(5, 2), f in arb_formula(2)) {
        let set = eval(&m, &f).unwrap();
        for x in 0..m.len() {
            prop_assert_eq!(set.contains(x), model_forces(&m, x, &f));
        }
        prop_assert!(m.frame().is_upset(set.bits()));
    }

    #[test]
    fn printed_formulas_parse_back(f in arb_formula(3)) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn frame_validity_matches_enumeration(p in arb_rooted(4), f in arb_formula(2)) {
        let le = leq_matrix(&p);
        let ups = upsets_oracle(&le);
        let vars = f.free_vars();
        let mut oracle = true;
        let combos = ups.len().pow(vars.len() as u32);
        for c in 0..combos {
            let pick: Vec<u64> = (0..vars.len()).map(|i| ups[c / ups.len().pow((vars.len() - 1 - i) as u32) % ups.len()]).collect();
            let val = |v: &str, w: usize| pick[vars.iter().position(|u| u == v).unwrap()] >> w & 1 == 1;
            if (0..p.len()).any(|x| !forces(&le, &val, x, &f)) {
                oracle = false;
                break;
            }
        }
        let v = frame_validates(&p, &f).unwrap();
        prop_assert_eq!(v.valid, oracle);
        if let Some(c) = v.counter {
            let val = |name: &str, w: usize| c.get(name).unwrap().contains(w);
            prop_assert!(!forces(&le, &val, p.root().unwrap(), &f));
        }
    }

    #[test]
    fn layered_bisimulation_matches_game_recursion(m in arb_model(4, 1), n in arb_model(4, 1), k in 0usize..4) {
        let lb = LayeredBisim::compute(ultab_core::bisim::Colored::of(&m), ultab_core::bisim::Colored::of(&n), k);
        for j in 0..=k {
            for x in 0..m.len() {
                for y in 0..n.len() {
                    prop_assert_eq!(lb.relates(j, x, y), kbis(&m, &n, j, x, y));
                    if j > 0 && lb.relates(j, x, y) {
                        prop_assert!(lb.relates(j - 1, x, y));
                    }
                }
            }
        }
        let yes = k_bisim(&m, &n, k).unwrap().is_some();
        prop_assert_eq!(yes, kbis(&m, &n, k, m.root(), n.root()));
        let game = play_optimal(&m, &n, k).unwrap();
        prop_assert_eq!(game.winner == Player::Duplicator, yes);
    }

    #[test]
    fn leq_k_and_distinguishing_formulas(m in arb_model(4, 1), n in arb_model(4, 1), k in 0usize..3) {
        let below = (0..m.len()).filter(|&z| m.frame().leq(m.root(), z)).any(|z| kbis(&m, &n, k, z, n.root()));
        prop_assert_eq!(leq_k(&m, &n, k).unwrap(), below);
        if let Some(f) = distinguishing_formula(&m, &n, k).unwrap() {
            prop_assert!(f.impl_depth() <= k);
            prop_assert!(model_forces(&m, m.root(), &f));
            prop_assert!(!model_forces(&n, n.root(), &f));
        }
    }

    #[test]
    fn reduction_is_bisimilar_and_reduced(m in arb_model(6, 2)) {
        let (r, map) = reduce(&m);
        prop_assert!(is_reduced(&r));
        prop_assert!(full_bisim(&m, &r).unwrap().is_some());
        for (x, &y) in map.iter().enumerate() {
            prop_assert_eq!(m.color(x), r.color(y));
        }
    }

    #[test]
    fn surjective_pmorphisms_are_pmorphisms(p in arb_rooted(5), q in arb_rooted(3)) {
        for map in surjective_pmorphisms(&p, &q).unwrap() {
            prop_assert!(pmorphism_oracle(&map, &p, &q));
            prop_assert!(check_pmorphism(&map, &p, &q));
            let img = quotient(&p, &map).expect("kernel of a p-morphism");
            prop_assert!(iso_oracle(&img, &q));
        }
    }

    #[test]
    fn jankov_semantic_matches_syntactic_small(p in arb_rooted(5), which in 0usize..2) {
        let q = if which == 0 { Poset::point() } else { Poset::chain(2) };
        let syn = frame_validates(&p, &jankov_syntactic(&q).unwrap()).unwrap().valid;
        prop_assert_eq!(syn, jankov_refutes(&p, &q).unwrap().is_none());
    }

    #[test]
    fn leq_k_transfers_shallow_theory(m in arb_model(4, 1), n in arb_model(4, 1), k in 0usize..3, f in arb_formula(1)) {
        prop_assume!(f.impl_depth() <= k);
        if leq_k(&m, &n, k).unwrap() && model_forces(&m, m.root(), &f) {
            prop_assert!(model_forces(&n, n.root(), &f));
        }
    }

    #[test]
    fn reduction_keeps_root_theory(m in arb_model(5, 2), f in arb_formula(2)) {
        let (r, _) = reduce(&m);
        prop_assert_eq!(model_forces(&m, m.root(), &f), model_forces(&r, r.root(), &f));
    }

    #[test]
    fn pmorphisms_compose(p in arb_rooted(5), q in arb_rooted(4), r in arb_rooted(3)) {
        let fs = surjective_pmorphisms(&p, &q).unwrap();
        let gs = surjective_pmorphisms(&q, &r).unwrap();
        for f in fs.iter().take(4) {
            for g in gs.iter().take(4) {
                let h: Vec<usize> = f.iter().map(|&x| g[x]).collect();
                prop_assert!(pmorphism_oracle(&h, &p, &r));
            }
        }
    }
}
