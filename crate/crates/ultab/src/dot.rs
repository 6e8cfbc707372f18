//! Hasse diagrams in Graphviz DOT: cover edges only, one rank per depth,
//! roots at the bottom.

use std::fmt::Write;

use ultab_core::{Model, Poset};

pub fn poset_dot(p: &Poset) -> String {
    render(p, |_| None)
}

/// Same as [`poset_dot`] with each node labelled by its color bitstring.
pub fn model_dot(m: &Model) -> String {
    render(m.frame(), |w| Some(m.color_string(w)))
}

fn render(p: &Poset, color: impl Fn(usize) -> Option<String>) -> String {
    let mut out = String::from("digraph hasse {\n  rankdir=BT;\n  node [shape=circle];\n");
    for w in 0..p.len() {
        let label = match color(w) {
            Some(c) => format!("\"{}\\n{}\"", escape(p.name(w)), c),
            None => quote(p.name(w)),
        };
        let _ = writeln!(out, "  {} [label={}];", quote(p.name(w)), label);
    }
    let depths = p.depths();
    let max = depths.iter().copied().max().unwrap_or(0);
    for d in (1..=max).rev() {
        let same: Vec<String> = (0..p.len()).filter(|&w| depths[w] == d).map(|w| quote(p.name(w))).collect();
        let _ = writeln!(out, "  {{ rank=same; {}; }}", same.join("; "));
    }
    for (a, b) in p.covers() {
        let _ = writeln!(out, "  {} -> {};", quote(p.name(a)), quote(p.name(b)));
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", escape(s))
}
