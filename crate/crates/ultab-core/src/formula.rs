//! Propositional formulas over `∧, ∨, →, ⊥, ⊤`.
//!
//! Text grammar, loosest to tightest binding:
//!
//! ```text
//! iff   := imp ( "<->" iff )?          right associative
//! imp   := or ( "->" imp )?            right associative
//! or    := and ( "|" and )*            left associative
//! and   := unary ( "&" unary )*        left associative
//! unary := "~" unary | atom
//! atom  := ident | "bot" | "top" | "(" iff ")"
//! ```
//!
//! `~φ` is read as `φ -> bot` and `φ <-> ψ` as `(φ -> ψ) & (ψ -> φ)`.
//! The Unicode forms `¬ ∧ ∨ → ↔ ⊥ ⊤` are accepted as well.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::poset::{Poset, DEFAULT_UPSET_CAP};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Var(String),
    Bot,
    Top,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::imp(a, Formula::Bot)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }

    /// Left-nested conjunction; `⊤` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; `⊥` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bot)
    }

    /// Implication depth.
    pub fn impl_depth(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => 0,
            Formula::And(a, b) | Formula::Or(a, b) => a.impl_depth().max(b.impl_depth()),
            Formula::Imp(a, b) => a.impl_depth().max(b.impl_depth()) + 1,
        }
    }

    /// Variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Formula::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Formula::Bot | Formula::Top => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Imp(_, b) if **b == Formula::Bot => 4,
            Formula::Imp(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 5,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side(f: &mut fmt::Formatter<'_>, x: &Formula, min: u8) -> fmt::Result {
            if x.prec() < min {
                write!(f, "({x})")
            } else {
                write!(f, "{x}")
            }
        }
        match self {
            Formula::Var(v) => f.write_str(v),
            Formula::Bot => f.write_str("bot"),
            Formula::Top => f.write_str("top"),
            Formula::Imp(a, b) if **b == Formula::Bot => {
                f.write_str("~")?;
                side(f, a, 4)
            }
            Formula::And(a, b) => {
                side(f, a, 3)?;
                f.write_str(" & ")?;
                side(f, b, 4)
            }
            Formula::Or(a, b) => {
                side(f, a, 2)?;
                f.write_str(" | ")?;
                side(f, b, 3)
            }
            Formula::Imp(a, b) => {
                side(f, a, 2)?;
                f.write_str(" -> ")?;
                side(f, b, 1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bot,
    Top,
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '~' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Imp,
            '↔' => Tok::Iff,
            '⊥' => Tok::Bot,
            '⊤' => Tok::Top,
            '-' => {
                it.next();
                match it.peek() {
                    Some(&(_, '>')) => {}
                    _ => return Err(Error::Syntax { pos, msg: "expected `->`".into() }),
                }
                Tok::Imp
            }
            '<' => {
                it.next();
                let ok = matches!(it.next(), Some((_, '-'))) && matches!(it.peek(), Some(&(_, '>')));
                if !ok {
                    return Err(Error::Syntax { pos, msg: "expected `<->`".into() });
                }
                Tok::Iff
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((
                    pos,
                    match s.as_str() {
                        "bot" => Tok::Bot,
                        "top" => Tok::Top,
                        _ => Tok::Ident(s),
                    },
                ));
                continue;
            }
            other => {
                return Err(Error::Syntax { pos, msg: format!("unexpected character `{other}`") });
            }
        };
        it.next();
        out.push((pos, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let a = self.imp()?;
        if self.eat(&Tok::Iff) {
            let b = self.iff()?;
            return Ok(Formula::iff(a, b));
        }
        Ok(a)
    }

    fn imp(&mut self) -> Result<Formula> {
        let a = self.or()?;
        if self.eat(&Tok::Imp) {
            let b = self.imp()?;
            return Ok(Formula::imp(a, b));
        }
        Ok(a)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut a = self.and()?;
        while self.eat(&Tok::Or) {
            a = Formula::or(a, self.and()?);
        }
        Ok(a)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut a = self.unary()?;
        while self.eat(&Tok::And) {
            a = Formula::and(a, self.unary()?);
        }
        Ok(a)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        let pos = self.pos();
        let tok = self.peek().cloned();
        self.i += 1;
        match tok {
            Some(Tok::Ident(s)) => Ok(Formula::Var(s)),
            Some(Tok::Bot) => Ok(Formula::Bot),
            Some(Tok::Top) => Ok(Formula::Top),
            Some(Tok::LParen) => {
                let f = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(Error::Syntax { pos: self.pos(), msg: "expected `)`".into() });
                }
                Ok(f)
            }
            None => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            Some(t) => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, i: 0, end: text.len() };
    let f = p.iff()?;
    if p.i != p.toks.len() {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(f)
}

impl core::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Formula> {
        parse(s)
    }
}

/// `bd_0 = p0`, `bd_{n+1} = p_{n+1} ∨ (p_{n+1} → bd_n)`.
pub fn bd(n: usize) -> Formula {
    let mut f = Formula::var("p0");
    for i in 1..=n {
        let p = Formula::var(format!("p{i}"));
        f = Formula::or(p.clone(), Formula::imp(p, f));
    }
    f
}

/// Bounded width axiom `⋁_{i≤n} (p_i → ⋁_{j≠i} p_j)`.
pub fn bw(n: usize) -> Formula {
    Formula::disj((0..=n).map(|i| {
        let rest = Formula::disj((0..=n).filter(|&j| j != i).map(|j| Formula::var(format!("p{j}"))));
        Formula::imp(Formula::var(format!("p{i}")), rest)
    }))
}

pub fn lc_axiom() -> Formula {
    parse("(p -> q) | (q -> p)").expect("static formula")
}

pub fn wpl_axiom() -> Formula {
    parse("(q -> p) | (((p -> q) -> p) -> p)").expect("static formula")
}

pub fn kc_axiom() -> Formula {
    parse("~p | ~~p").expect("static formula")
}

/// A frame property decided directly on the poset instead of by
/// enumerating valuations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemanticCheck {
    /// Validity of the Jankov formula of this rooted poset.
    Jankov(Poset),
    Kc,
    Bw2,
    Bd(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub formula: Formula,
    pub check: Option<SemanticCheck>,
}

impl Axiom {
    pub fn plain(formula: Formula) -> Axiom {
        Axiom { formula, check: None }
    }

    pub fn jankov(q: &Poset) -> Result<Axiom> {
        Ok(Axiom { formula: jankov_syntactic(q)?, check: Some(SemanticCheck::Jankov(q.clone())) })
    }
}

/// A logic presented as IPC plus a list of axioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSet {
    pub name: String,
    pub axioms: Vec<Axiom>,
}

impl AxiomSet {
    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.axioms.iter().map(|a| &a.formula)
    }

    pub fn extend(mut self, name: &str, more: AxiomSet) -> AxiomSet {
        self.name = name.to_string();
        self.axioms.extend(more.axioms);
        self
    }
}

pub const AXIOM_SET_NAMES: &[&str] = &["LC", "wPL", "KC", "BW2", "BDn", "2Uni", "LFC", "Box"];

fn jankov_set(name: &str, indices: &[usize]) -> Result<AxiomSet> {
    let mut axioms = Vec::new();
    for &i in indices {
        axioms.push(Axiom::jankov(&crate::families::q_poset(i)?)?);
    }
    Ok(AxiomSet { name: name.to_string(), axioms })
}

/// Named logics. `BDn` is written with the number, e.g. `BD3`.
pub fn named_axiom(name: &str) -> Result<AxiomSet> {
    let single = |f: Formula, check: Option<SemanticCheck>| AxiomSet {
        name: name.to_string(),
        axioms: alloc::vec![Axiom { formula: f, check }],
    };
    Ok(match name {
        "LC" => single(lc_axiom(), None),
        "wPL" => single(wpl_axiom(), None),
        "KC" => single(kc_axiom(), Some(SemanticCheck::Kc)),
        "BW2" => single(bw(2), Some(SemanticCheck::Bw2)),
        "2Uni" => named_axiom("wPL")?.extend("2Uni", jankov_set("", &[4, 5])?),
        "LFC" => jankov_set("LFC", &[2, 4, 5, 6, 7, 8])?,
        "Box" => named_axiom("wPL")?.extend("Box", named_axiom("BW2")?).extend("Box", named_axiom("KC")?),
        _ => {
            if let Some(n) = name.strip_prefix("BD").and_then(|s| s.parse::<usize>().ok()) {
                single(bd(n), Some(SemanticCheck::Bd(n)))
            } else {
                return Err(Error::UnknownName(name.to_string()));
            }
        }
    })
}

/// Variable naming for Jankov formulas: `j<i>` stands for the `i`-th upset
/// of `Q` in [`Poset::all_upsets`] order.
pub fn jankov_var(i: usize) -> String {
    format!("j{i}")
}

/// Jankov formula `δ → p_s` of a rooted poset `Q`: `δ` is the diagram of
/// `Up(Q)` and `s = Q ∖ {root}`.
pub fn jankov_syntactic(q: &Poset) -> Result<Formula> {
    jankov_syntactic_capped(q, DEFAULT_UPSET_CAP)
}

pub fn jankov_syntactic_capped(q: &Poset, cap: u64) -> Result<Formula> {
    let root = q.require_root()?;
    let ups = q.all_upsets(cap)?;
    let index: BTreeMap<u64, usize> = ups.iter().enumerate().map(|(i, u)| (u.bits(), i)).collect();
    let v = |bits: u64| Formula::Var(jankov_var(index[&bits]));
    let mut parts = Vec::new();
    parts.push(Formula::iff(v(0), Formula::Bot));
    parts.push(Formula::iff(v(q.all()), Formula::Top));
    for (i, a) in ups.iter().enumerate() {
        for (j, b) in ups.iter().enumerate() {
            let (pa, pb) = (v(a.bits()), v(b.bits()));
            if i <= j {
                parts.push(Formula::iff(v(a.bits() & b.bits()), Formula::and(pa.clone(), pb.clone())));
                parts.push(Formula::iff(v(a.bits() | b.bits()), Formula::or(pa.clone(), pb.clone())));
            }
            let imp = crate::heyting::implies_unchecked(q, a.bits(), b.bits()).bits();
            parts.push(Formula::iff(v(imp), Formula::imp(pa, pb)));
        }
    }
    let s = q.all() & !(1u64 << root);
    Ok(Formula::imp(Formula::conj(parts), v(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn or_binds_tighter_than_implication() {
        let f = parse("p -> q | r").unwrap();
        assert_eq!(f, Formula::imp(Formula::var("p"), Formula::or(Formula::var("q"), Formula::var("r"))));
    }

    #[test]
    fn double_negation_sugar() {
        let f = parse("~~p").unwrap();
        assert_eq!(f, Formula::not(Formula::not(Formula::var("p"))));
    }

    #[test]
    fn wpl_reading() {
        let f = parse("(q->p) | (((p->q)->p)->p)").unwrap();
        let pq = Formula::imp(Formula::var("p"), Formula::var("q"));
        let expect = Formula::or(
            Formula::imp(Formula::var("q"), Formula::var("p")),
            Formula::imp(Formula::imp(pq, Formula::var("p")), Formula::var("p")),
        );
        assert_eq!(f, expect);
        assert_eq!(f.impl_depth(), 3);
    }

    #[test]
    fn iff_and_unicode() {
        let a = parse("p <-> q").unwrap();
        let b = parse("(p → q) ∧ (q → p)").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse("⊥ ∨ ⊤").unwrap(), Formula::or(Formula::Bot, Formula::Top));
        assert_eq!(parse("¬p").unwrap(), parse("p -> bot").unwrap());
    }

    #[test]
    fn implication_is_right_associative() {
        assert_eq!(parse("a -> b -> c").unwrap(), parse("a -> (b -> c)").unwrap());
        assert_eq!(parse("a & b & c").unwrap(), parse("(a & b) & c").unwrap());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(parse("p & "), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse("(p"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("p $ q"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("p - q"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("p q"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn depths() {
        assert_eq!(parse("p").unwrap().impl_depth(), 0);
        assert_eq!(Formula::Bot.impl_depth(), 0);
        assert_eq!(parse("(p->q)|(q->p)").unwrap().impl_depth(), 1);
        for n in 0..=8 {
            assert_eq!(bd(n).impl_depth(), n);
        }
    }

    #[test]
    fn bd_unfolding() {
        assert_eq!(bd(0), Formula::var("p0"));
        assert_eq!(bd(1), parse("p1 | (p1 -> p0)").unwrap());
        assert_eq!(bd(2).free_vars(), vec!["p2", "p1", "p0"]);
    }

    #[test]
    fn free_var_order() {
        assert_eq!(parse("p -> q").unwrap().free_vars(), vec!["p", "q"]);
        assert!(Formula::Top.free_vars().is_empty());
    }

    #[test]
    fn named_sets() {
        assert_eq!(named_axiom("LC").unwrap().axioms[0].formula, parse("(p->q)|(q->p)").unwrap());
        assert_eq!(named_axiom("KC").unwrap().axioms[0].formula, parse("~p | ~~p").unwrap());
        assert_eq!(named_axiom("2Uni").unwrap().axioms.len(), 3);
        assert_eq!(named_axiom("LFC").unwrap().axioms.len(), 6);
        assert_eq!(named_axiom("Box").unwrap().axioms.len(), 3);
        assert_eq!(named_axiom("BD3").unwrap().axioms[0].formula, bd(3));
        assert_eq!(named_axiom("S4"), Err(Error::UnknownName("S4".into())));
    }

    #[test]
    fn jankov_variable_counts() {
        let one = jankov_syntactic(&Poset::point()).unwrap();
        assert_eq!(one.free_vars().len(), 2);
        let q8 = jankov_syntactic(&crate::families::q_poset(8).unwrap()).unwrap();
        assert_eq!(q8.free_vars().len(), 9);
        assert_eq!(jankov_syntactic(&Poset::antichain(2)), Err(Error::NotRooted));
    }
}
