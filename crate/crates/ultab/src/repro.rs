//! Reproduction targets: bounded re-derivations of the finite claims, each
//! returning PASS/FAIL with JSON evidence.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use ultab_core::bisim::{
    distinguishing_formula, full_bisim, greatest_bisimulation, k_bisim, max_bisim_level, BisimLevel, Colored,
    LayeredBisim,
};
use ultab_core::canon::{all_posets, all_rooted_posets, canonical_form, is_isomorphic};
use ultab_core::families::{
    boolean_sums_up_to, broken_comb, broken_combs_up_to, comb, figure2_pair, figure4_pairs, is_boolean_sum,
    is_broken_comb, m_model, n_model, p_star, q_poset, rn_canonical_model, rn_prefix, s_frame, stack_profile,
};
use ultab_core::formula::{jankov_syntactic, named_axiom, Axiom, AxiomSet};
use ultab_core::heyting::{heyting_implies, product_generation_depth};
use ultab_core::morphism::{jankov_refutes, pmorphic_images_capped, validates_axiomset};
use ultab_core::semantics::{frame_validates_capped, is_reduced, models_isomorphic, Model};
use ultab_core::uniformity::{
    certify_n_uniform, degree_of_uniformity, enumerate_models, frame_closure_capped, stack_bound_class,
    stack_bound_uniformity_check, UniformityReport, Verdict, Witness,
};
use ultab_core::{Poset, Upset};

use crate::caps::Caps;
use crate::io::{ModelFile, PosetFile};

pub struct Target {
    pub id: &'static str,
    pub criterion: usize,
    pub description: &'static str,
    run: fn(&Params, &Caps) -> ultab_core::Result<Check>,
}

pub const TARGETS: &[Target] = &[
    Target { id: "figure2", criterion: 1, description: "chain/fork pair is 1-bisimilar and not 2-bisimilar", run: figure2 },
    Target { id: "figure4", criterion: 2, description: "Q_i model pairs sit at level exactly 2 over Q1..Q5", run: figure4 },
    Target { id: "lemma-mn", criterion: 3, description: "M_n^k and N_n^(k-1) are k- but not (k+1)-bisimilar", run: lemma_mn },
    Target { id: "rn-lemma", criterion: 4, description: "ladder models are pinned down by 2k+2 / 2k+3 rounds", run: rn_lemma },
    Target { id: "degree", criterion: 5, description: "degrees of 2-chain, 2-fork, P*_1 and P*_2", run: degree },
    Target { id: "wpl-frames", criterion: 6, description: "J(Q1), J(Q2), J(Q3) frames are the Boolean sums", run: wpl_frames },
    Target { id: "stack-lemma", criterion: 7, description: "J(Q4) and J(Q5) cut Boolean sums to stack depth 1", run: stack_lemma },
    Target { id: "2uni", criterion: 8, description: "stack-depth-1 Boolean sums are 2- but not 1-uniform", run: two_uni },
    Target { id: "combs", criterion: 9, description: "comb images, LFC frames and 3-uniformity of broken combs", run: combs },
    Target { id: "wpl-nonuniform", criterion: 10, description: "wPL has n-bisimilar non-bisimilar pairs for every n", run: wpl_nonuniform },
    Target { id: "box", criterion: 11, description: "S_n frames validate Box; stack-bounded classes are (k+1)-uniform", run: boxes },
    Target { id: "yankov", criterion: 12, description: "syntactic and semantic Jankov checks agree", run: yankov },
    Target { id: "properties", criterion: 13, description: "algebraic and bisimulation property suites", run: properties },
];

/// Optional numeric overrides shared by the targets that take them.
#[derive(Clone, Copy, Debug, Default)]
pub struct Params {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub max: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub target: &'static str,
    pub criterion: usize,
    pub pass: bool,
    pub summary: String,
    #[serde(skip)]
    pub elapsed_ms: u128,
    pub evidence: Value,
}

/// Result of one target before timing is attached.
pub struct Check {
    pub pass: bool,
    pub summary: String,
    pub evidence: Value,
}

#[derive(Debug, thiserror::Error)]
pub enum ReproError {
    #[error("unknown repro target `{0}`")]
    UnknownTarget(String),
    #[error("{target}: {source}")]
    Failed { target: &'static str, source: ultab_core::Error },
}

pub fn target(id: &str) -> Option<&'static Target> {
    TARGETS.iter().find(|t| t.id == id)
}

pub fn run(id: &str, params: &Params, caps: &Caps) -> Result<Outcome, ReproError> {
    let t = target(id).ok_or_else(|| ReproError::UnknownTarget(id.to_string()))?;
    let start = Instant::now();
    let check = (t.run)(params, caps).map_err(|source| ReproError::Failed { target: t.id, source })?;
    Ok(Outcome {
        target: t.id,
        criterion: t.criterion,
        pass: check.pass,
        summary: check.summary,
        elapsed_ms: start.elapsed().as_millis(),
        evidence: check.evidence,
    })
}

fn model_value(m: &Model) -> Value {
    serde_json::to_value(ModelFile::from_model(m)).expect("plain data")
}

fn poset_value(p: &Poset) -> Value {
    serde_json::to_value(PosetFile::from_poset(p)).expect("plain data")
}

pub fn level_value(l: BisimLevel) -> Value {
    match l {
        BisimLevel::Unrelated => json!("unrelated"),
        BisimLevel::Level(k) => json!(k),
        BisimLevel::Full => json!("full"),
    }
}

fn witness_value(w: &Witness) -> Value {
    json!({ "level": w.level, "left": model_value(&w.left), "right": model_value(&w.right) })
}

fn report_value(r: &UniformityReport) -> Value {
    let verdict = match &r.verdict {
        Verdict::Certified(n) => json!({ "certified": n }),
        Verdict::Refuted(w) => json!({ "refuted": witness_value(w) }),
    };
    let e = &r.envelope;
    json!({
        "verdict": verdict,
        "envelope": {
            "frames": e.frames,
            "max_frame_size": e.max_frame_size,
            "v_max": e.v_max,
            "colorings": e.colorings,
            "nodes": e.nodes,
        },
    })
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

/// A formula of implication depth at most `k` separating the roots, in
/// whichever direction exists.
fn separating_formula(m: &Model, n: &Model, k: usize) -> ultab_core::Result<Value> {
    if let Some(f) = distinguishing_formula(m, n, k)? {
        return Ok(json!({ "true_at": "left", "formula": f.to_string(), "depth": f.impl_depth() }));
    }
    if let Some(f) = distinguishing_formula(n, m, k)? {
        return Ok(json!({ "true_at": "right", "formula": f.to_string(), "depth": f.impl_depth() }));
    }
    Ok(Value::Null)
}

fn figure2(_: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let (m, n) = figure2_pair();
    let level = max_bisim_level(&m, &n, 8)?;
    let one = k_bisim(&m, &n, 1)?.is_some();
    let two = k_bisim(&m, &n, 2)?.is_some();
    let full = full_bisim(&m, &n)?.is_some();
    let pass = one && !two && !full && level == BisimLevel::Level(1);
    Ok(Check {
        pass,
        summary: format!("max level {}, 1-bisimilar {one}, 2-bisimilar {two}, bisimilar {full}", level_value(level)),
        evidence: json!({
            "left": model_value(&m),
            "right": model_value(&n),
            "max_level": level_value(level),
            "separating": separating_formula(&m, &n, 2)?,
        }),
    })
}

fn in_images(images: &[Poset], f: &Poset) -> bool {
    let cf = canonical_form(f);
    images.iter().any(|i| canonical_form(i) == cf)
}

fn figure4(_: &Params, caps: &Caps) -> ultab_core::Result<Check> {
    let mut rows = Vec::new();
    let mut pass = true;
    for (i, (m, n)) in figure4_pairs().iter().enumerate() {
        let q = q_poset(i + 1)?;
        let images = pmorphic_images_capped(&q, caps.search_nodes)?;
        let level = max_bisim_level(m, n, 8)?;
        let left_ok = in_images(&images, m.frame());
        let right_ok = in_images(&images, n.frame());
        let ok = level == BisimLevel::Level(2) && full_bisim(m, n)?.is_none() && left_ok;
        pass &= ok;
        rows.push(json!({
            "q": i + 1,
            "max_level": level_value(level),
            "left_frame_is_image": left_ok,
            "right_frame_is_image": right_ok,
            "left": model_value(m),
            "right": model_value(n),
            "separating": separating_formula(m, n, 3)?,
        }));
    }
    Ok(Check { pass, summary: format!("{} pairs checked", rows.len()), evidence: json!(rows) })
}

fn lemma_mn(params: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let ns: Vec<usize> = match params.n {
        Some(n) => vec![n],
        None => vec![3, 4, 5],
    };
    let mut rows = Vec::new();
    let mut pass = true;
    for &n in &ns {
        let ks: Vec<usize> = match params.k {
            Some(k) => vec![k],
            None => (1..n.saturating_sub(1)).collect(),
        };
        for k in ks {
            if k == 0 || k + 1 >= n {
                return Err(ultab_core::Error::InvalidParameter(format!("lemma-mn needs 1 <= k and k + 1 < n, got n={n} k={k}")));
            }
            let level = max_bisim_level(&m_model(n, k)?, &n_model(n, k - 1)?, n + 4)?;
            let ok = level == BisimLevel::Level(k);
            pass &= ok;
            rows.push(json!({ "n": n, "k": k, "max_level": level_value(level), "ok": ok }));
        }
    }
    let summary = rows
        .iter()
        .map(|r| format!("n={} k={} level {}", r["n"], r["k"], r["max_level"]))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Check { pass, summary, evidence: json!(rows) })
}

fn rn_lemma(_: &Params, caps: &Caps) -> ultab_core::Result<Check> {
    let fc = frame_closure_capped(&[rn_prefix(9)?], caps.frame_size, caps.search_nodes)?;
    let class = enumerate_models(&fc, 1)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for k in 0..=2 {
        for (index, rounds) in [(2 * k + 1, 2 * k + 2), (2 * k + 2, 2 * k + 3)] {
            let ladder = rn_canonical_model(index)?;
            let canon = Model::with_indexed_vars(ladder.frame().clone(), 1, ladder.colors().to_vec())?;
            let mut close = 0;
            let mut strangers = Vec::new();
            for m in &class.models {
                if max_bisim_level(m, &canon, rounds)?.at_least(rounds) {
                    close += 1;
                    if models_isomorphic(m, &canon).is_none() {
                        strangers.push(model_value(m));
                    }
                }
            }
            let ok = close >= 1 && strangers.is_empty();
            pass &= ok;
            rows.push(json!({
                "ladder_index": index,
                "rounds": rounds,
                "bisimilar_models": close,
                "non_isomorphic": strangers,
            }));
        }
    }
    Ok(Check {
        pass,
        summary: format!("{} frames, {} reduced 1-variable models", fc.closure.len(), class.models.len()),
        evidence: json!({ "frames": fc.closure.len(), "models": class.models.len(), "checks": rows }),
    })
}

fn degree(_: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let cases: Vec<(&str, Poset, usize)> = vec![
        ("2-chain", Poset::chain(2), 1),
        ("2-fork", Poset::fork(2), 2),
        ("P*_1", p_star(1)?, 2),
        ("P*_2", p_star(2)?, 4),
    ];
    let mut rows = Vec::new();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p, expected) in cases {
        let r = degree_of_uniformity(&p, None)?;
        let ok = r.degree == expected;
        pass &= ok;
        parts.push(format!("{name} {}", r.degree));
        rows.push(json!({
            "frame": name,
            "degree": r.degree,
            "expected": expected,
            "witness": r.witness.as_ref().map(witness_value),
            "frames": r.envelope.frames,
            "max_frame_size": r.envelope.max_frame_size,
        }));
    }
    Ok(Check { pass, summary: parts.join(", "), evidence: json!(rows) })
}

fn jankov_set(indices: &[usize]) -> ultab_core::Result<AxiomSet> {
    let axioms = indices.iter().map(|&i| Axiom::jankov(&q_poset(i)?)).collect::<ultab_core::Result<Vec<_>>>()?;
    Ok(AxiomSet { name: String::new(), axioms })
}

fn wpl_frames(params: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let max = params.max.unwrap_or(6);
    let set = jankov_set(&[1, 2, 3])?;
    let mut total = 0;
    let mut sums = 0;
    let mut bad = Vec::new();
    for n in 1..=max {
        for p in all_rooted_posets(n) {
            total += 1;
            let valid = validates_axiomset(&p, &set)?;
            let sum = is_boolean_sum(&p);
            sums += usize::from(sum);
            if valid != sum {
                bad.push(json!({ "poset": poset_value(&p), "validates": valid, "boolean_sum": sum }));
            }
        }
    }
    Ok(Check {
        pass: bad.is_empty(),
        summary: format!("{total} rooted posets up to {max} points, {sums} Boolean sums, {} mismatches", bad.len()),
        evidence: json!({ "posets": total, "boolean_sums": sums, "mismatches": bad }),
    })
}

fn stack_lemma(params: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let max = params.max.unwrap_or(8);
    let set = jankov_set(&[4, 5])?;
    let mut total = 0;
    let mut shallow = 0;
    let mut bad = Vec::new();
    for p in boolean_sums_up_to(max) {
        total += 1;
        let valid = validates_axiomset(&p, &set)?;
        let prof = stack_profile(&p);
        shallow += usize::from(prof.stack_depth <= 1);
        if valid != (prof.stack_depth <= 1) {
            bad.push(json!({ "levels": prof.level_sizes, "stack_depth": prof.stack_depth, "validates": valid }));
        }
    }
    Ok(Check {
        pass: bad.is_empty(),
        summary: format!("{total} Boolean sums up to {max} points, {shallow} of stack depth <= 1, {} mismatches", bad.len()),
        evidence: json!({ "boolean_sums": total, "stack_depth_le_1": shallow, "mismatches": bad }),
    })
}

fn two_uni(params: &Params, caps: &Caps) -> ultab_core::Result<Check> {
    let max = params.max.unwrap_or(6);
    let gens: Vec<Poset> = boolean_sums_up_to(max).into_iter().filter(|p| stack_profile(p).stack_depth <= 1).collect();
    let fc = frame_closure_capped(&gens, caps.frame_size, caps.search_nodes)?;
    let two = certify_n_uniform(&fc, 2, None)?;
    let one = certify_n_uniform(&fc, 1, None)?;
    let pass = matches!(two.verdict, Verdict::Certified(2)) && matches!(one.verdict, Verdict::Refuted(_));
    Ok(Check {
        pass,
        summary: format!(
            "{} frames; n=2 {}, n=1 {}",
            fc.closure.len(),
            verdict_word(&two.verdict),
            verdict_word(&one.verdict)
        ),
        evidence: json!({ "generators": gens.len(), "frames": fc.closure.len(), "n2": report_value(&two), "n1": report_value(&one) }),
    })
}

fn verdict_word(v: &Verdict) -> String {
    match v {
        Verdict::Certified(n) => format!("certified({n})"),
        Verdict::Refuted(w) => format!("refuted at level {}", w.level),
    }
}

/// Frames of a witness match the given pair of frames in some order.
fn witness_frames_are(w: &Witness, a: &Poset, b: &Poset) -> bool {
    let (l, r) = (w.left.frame(), w.right.frame());
    (is_isomorphic(l, a).is_some() && is_isomorphic(r, b).is_some())
        || (is_isomorphic(l, b).is_some() && is_isomorphic(r, a).is_some())
}

fn combs(params: &Params, caps: &Caps) -> ultab_core::Result<Check> {
    // images of comb(n) against broken m-combs for m <= n
    let mut image_rows = Vec::new();
    let mut images_ok = true;
    for n in 1..=4 {
        let images = pmorphic_images_capped(&comb(n)?, caps.search_nodes)?;
        let got: BTreeSet<_> = images.iter().map(canonical_form).collect();
        let mut want = BTreeSet::new();
        for m in 1..=n {
            for mask in 0..(1u64 << m) {
                want.insert(canonical_form(&broken_comb(m, mask)?));
            }
        }
        let ok = got == want && images.iter().all(is_broken_comb);
        images_ok &= ok;
        image_rows.push(json!({ "n": n, "images": got.len(), "broken_combs": want.len(), "ok": ok }));
    }

    let max = params.max.unwrap_or(7);
    let lfc = named_axiom("LFC")?;
    let mut total = 0;
    let mut lfc_frames = 0;
    let mut bad = Vec::new();
    for n in 1..=max {
        for p in all_rooted_posets(n) {
            total += 1;
            let valid = validates_axiomset(&p, &lfc)?;
            lfc_frames += usize::from(valid);
            if valid != is_broken_comb(&p) {
                bad.push(poset_value(&p));
            }
        }
    }

    let fc = frame_closure_capped(&broken_combs_up_to(8)?, caps.frame_size, caps.search_nodes)?;
    let three = certify_n_uniform(&fc, 3, None)?;
    let two = certify_n_uniform(&fc, 2, None)?;
    let q1_pair = &figure4_pairs()[0];
    let two_ok = match &two.verdict {
        Verdict::Refuted(w) => w.level == 2 && witness_frames_are(w, q1_pair.0.frame(), q1_pair.1.frame()),
        Verdict::Certified(_) => false,
    };
    let pass = images_ok && bad.is_empty() && matches!(three.verdict, Verdict::Certified(3)) && two_ok;
    Ok(Check {
        pass,
        summary: format!(
            "images {}, LFC frames {lfc_frames}/{total} with {} mismatches, n=3 {}, n=2 {}",
            pass_word(images_ok),
            bad.len(),
            verdict_word(&three.verdict),
            verdict_word(&two.verdict)
        ),
        evidence: json!({
            "comb_images": image_rows,
            "lfc": { "rooted_posets": total, "frames": lfc_frames, "mismatches": bad },
            "broken_comb_frames": fc.closure.len(),
            "n3": report_value(&three),
            "n2": report_value(&two),
            "n2_matches_figure4_q1": two_ok,
        }),
    })
}

fn wpl_nonuniform(params: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let ns: Vec<usize> = match params.n {
        Some(n) => vec![n],
        None => (1..=5).collect(),
    };
    let mut rows = Vec::new();
    let mut pass = true;
    for n in ns {
        if n == 0 {
            return Err(ultab_core::Error::InvalidParameter("wpl-nonuniform needs n >= 1".into()));
        }
        let vars = n + 2;
        let (m, q) = (m_model(vars, n)?, n_model(vars, n - 1)?);
        let level = max_bisim_level(&m, &q, vars + 4)?;
        let frames = is_boolean_sum(m.frame()) && is_boolean_sum(q.frame());
        let ok = level.at_least(n) && level != BisimLevel::Full && frames;
        pass &= ok;
        rows.push(json!({
            "n": n,
            "variables": vars,
            "max_level": level_value(level),
            "boolean_sum_frames": frames,
            "result": if ok { "PASS" } else { "FAIL" },
        }));
    }
    let summary = rows.iter().map(|r| format!("n={} {}", r["n"], r["result"].as_str().unwrap_or(""))).collect::<Vec<_>>().join(", ");
    Ok(Check { pass, summary, evidence: json!(rows) })
}

fn boxes(_: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let set = named_axiom("Box")?;
    let mut frames = Vec::new();
    let mut frames_ok = true;
    for n in 3..=5 {
        let s = s_frame(n)?;
        let ok = validates_axiomset(&s, &set)?;
        frames_ok &= ok;
        frames.push(json!({ "n": n, "points": s.len(), "validates_box": ok }));
    }
    let k1 = stack_bound_uniformity_check(1, 2, 7, None)?;
    let k2 = stack_bound_uniformity_check(2, 2, 9, None)?;
    let k1_low = certify_n_uniform(&stack_bound_class(1, 2, 7)?, 1, None)?;
    let pass = frames_ok
        && matches!(k1.verdict, Verdict::Certified(2))
        && matches!(k2.verdict, Verdict::Certified(3))
        && matches!(k1_low.verdict, Verdict::Refuted(_));
    Ok(Check {
        pass,
        summary: format!(
            "S_3..S_5 {}, k=1 {}, k=2 {}, k=1 at n=1 {}",
            pass_word(frames_ok),
            verdict_word(&k1.verdict),
            verdict_word(&k2.verdict),
            verdict_word(&k1_low.verdict)
        ),
        evidence: json!({
            "s_frames": frames,
            "k1_size7": report_value(&k1),
            "k2_size9": report_value(&k2),
            "k1_n1": report_value(&k1_low),
        }),
    })
}

fn yankov(params: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let max = params.max.unwrap_or(8);
    let qs = [("1-point", Poset::point()), ("2-chain", Poset::chain(2)), ("2-fork", Poset::fork(2))];
    let mut posets = Vec::new();
    for n in 1..=max {
        for p in all_rooted_posets(n) {
            // the cap errors exactly when there are more than 32 upsets
            if p.all_upsets(32).is_ok() {
                posets.push(p);
            }
        }
    }
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for (name, q) in &qs {
        let j = jankov_syntactic(q)?;
        let vars = j.free_vars().len() as u32;
        let mut refuted = 0;
        for p in &posets {
            let syntactic = frame_validates_capped(p, &j, 32u64.pow(vars))?.valid;
            let semantic = jankov_refutes(p, q)?.is_none();
            refuted += usize::from(!semantic);
            if syntactic != semantic {
                bad.push(json!({ "q": name, "poset": poset_value(p), "syntactic": syntactic, "semantic": semantic }));
            }
        }
        rows.push(json!({ "q": name, "variables": vars, "refuting_posets": refuted }));
    }
    Ok(Check {
        pass: bad.is_empty(),
        summary: format!("{} rooted posets up to {max} points with at most 32 upsets, {} mismatches", posets.len(), bad.len()),
        evidence: json!({ "posets": posets.len(), "per_q": rows, "mismatches": bad }),
    })
}

/// Every monotone coloring with `vars` variables of every rooted poset up to
/// `max` points.
fn all_models(max: usize, vars: usize) -> ultab_core::Result<Vec<Model>> {
    let mut out = Vec::new();
    for n in 1..=max {
        for p in all_rooted_posets(n) {
            let ups: Vec<u64> = p.all_upsets(1 << 12)?.iter().map(|u| u.bits()).collect();
            let mut idx = vec![0usize; vars];
            loop {
                let colors = (0..p.len())
                    .map(|w| (0..vars).filter(|&i| ups[idx[i]] >> w & 1 == 1).fold(0u64, |c, i| c | 1 << i))
                    .collect();
                out.push(Model::with_indexed_vars(p.clone(), vars, colors)?);
                let mut i = 0;
                while i < vars {
                    idx[i] += 1;
                    if idx[i] < ups.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == vars {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn properties(_: &Params, _: &Caps) -> ultab_core::Result<Check> {
    let mut parts = Vec::new();
    let mut ev = serde_json::Map::new();

    // residuation: W ⊆ (U → V) iff W ∩ U ⊆ V
    let mut triples = 0u64;
    let mut residuation_bad = Vec::new();
    for n in 1..=4 {
        for p in all_posets(n) {
            let ups = p.all_upsets(1 << 12)?;
            for &u in &ups {
                for &v in &ups {
                    let imp = heyting_implies(&p, u, v)?;
                    for &w in &ups {
                        triples += 1;
                        if w.is_subset(imp) != w.meet(u).is_subset(v) {
                            residuation_bad.push(json!({ "poset": poset_value(&p), "u": u.bits(), "v": v.bits(), "w": w.bits() }));
                        }
                    }
                }
            }
        }
    }
    let residuation = residuation_bad.is_empty();
    parts.push(format!("residuation {} ({triples} triples)", pass_word(residuation)));
    ev.insert("residuation".into(), json!({ "triples": triples, "violations": residuation_bad }));

    // layered k-bisimulations shrink and then stay put at the greatest bisimulation
    let small = all_models(4, 1)?;
    let mut chain_pairs = 0;
    let mut chain_bad = Vec::new();
    for a in &small {
        for b in &small {
            chain_pairs += 1;
            let bound = a.len() * b.len() + 1;
            let lb = LayeredBisim::compute(Colored::of(a), Colored::of(b), bound);
            let (greatest, _) = greatest_bisimulation(Colored::of(a), Colored::of(b), a.root(), b.root());
            let rows = |k: usize| -> Vec<u64> { (0..a.len()).map(|x| (0..b.len()).filter(|&y| lb.relates(k, x, y)).fold(0u64, |r, y| r | 1 << y)).collect() };
            let mut stable = None;
            let mut ok = true;
            for k in 0..bound {
                let (cur, next) = (rows(k), rows(k + 1));
                ok &= cur.iter().zip(&next).all(|(c, n)| n & !c == 0);
                if cur == next && stable.is_none() {
                    stable = Some(k);
                }
                if let Some(s) = stable {
                    ok &= rows(s) == next;
                }
            }
            ok &= stable.is_some() && rows(bound) == greatest;
            if !ok {
                chain_bad.push(json!({ "left": model_value(a), "right": model_value(b) }));
            }
        }
    }
    let chain = chain_bad.is_empty();
    parts.push(format!("k-bisimulation chain {} ({chain_pairs} pairs)", pass_word(chain)));
    ev.insert("bisimulation_chain".into(), json!({ "pairs": chain_pairs, "violations": chain_bad }));

    // reduced and bisimilar implies isomorphic
    let mut reduced_pairs = 0u64;
    let mut reduced_bad = Vec::new();
    for vars in 1..=2 {
        let reduced: Vec<Model> = all_models(5, vars)?.into_iter().filter(is_reduced).collect();
        for (i, a) in reduced.iter().enumerate() {
            for b in &reduced[i..] {
                if a.color(a.root()) != b.color(b.root()) {
                    continue;
                }
                reduced_pairs += 1;
                if full_bisim(a, b)?.is_some() && models_isomorphic(a, b).is_none() {
                    reduced_bad.push(json!({ "left": model_value(a), "right": model_value(b) }));
                }
            }
        }
    }
    let reduced_ok = reduced_bad.is_empty();
    parts.push(format!("reduced+bisimilar => isomorphic {} ({reduced_pairs} pairs)", pass_word(reduced_ok)));
    ev.insert("reduced_bisimilar_isomorphic".into(), json!({ "pairs": reduced_pairs, "violations": reduced_bad }));

    // degree bound from depth
    let mut frames = 0;
    let mut degree_bad = Vec::new();
    for n in 1..=6 {
        for p in all_rooted_posets(n) {
            frames += 1;
            let d = degree_of_uniformity(&p, None)?.degree;
            if d + 1 > 2 * p.depth() {
                degree_bad.push(json!({ "poset": poset_value(&p), "degree": d, "depth": p.depth() }));
            }
        }
    }
    let degree_ok = degree_bad.is_empty();
    parts.push(format!("degree <= 2*depth-1 {} ({frames} frames)", pass_word(degree_ok)));
    ev.insert("degree_bound".into(), json!({ "frames": frames, "violations": degree_bad }));

    // product generation depth on sampled pairs
    let pool: Vec<Poset> = (1..=3).flat_map(all_posets).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples = 0;
    let mut equal = 0;
    let mut max_excess = 0;
    let mut product_bad = Vec::new();
    for _ in 0..300 {
        let p = &pool[rng.gen_range(0..pool.len())];
        let q = &pool[rng.gen_range(0..pool.len())];
        let (up, uq) = (p.all_upsets(64)?, q.all_upsets(64)?);
        let gens: Vec<(Upset, Upset)> =
            (0..rng.gen_range(1..=2)).map(|_| (up[rng.gen_range(0..up.len())], uq[rng.gen_range(0..uq.len())])).collect();
        let d = product_generation_depth(p, q, &gens)?;
        samples += 1;
        max_excess = max_excess.max(d.combined.saturating_sub(d.left.max(d.right)));
        if d.holds() {
            equal += 1;
        } else if product_bad.len() < 5 {
            product_bad.push(json!({
                "left": poset_value(p),
                "right": poset_value(q),
                "generators": gens.iter().map(|(a, b)| [a.bits(), b.bits()]).collect::<Vec<_>>(),
                "combined_depth": d.combined,
                "left_depth": d.left,
                "right_depth": d.right,
            }));
        }
    }
    let product = equal == samples;
    parts.push(format!("product depth equality {} (equal in {equal} of {samples} samples)", pass_word(product)));
    ev.insert("product_depth".into(), json!({ "samples": samples, "equal": equal, "max_excess": max_excess, "counterexamples": product_bad }));

    Ok(Check {
        pass: residuation && chain && reduced_ok && degree_ok && product,
        summary: parts.join("; "),
        evidence: Value::Object(ev),
    })
}
