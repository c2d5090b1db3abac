//! Terms and formulæ of minimal predicate logic restricted to `->` and `forall`.
//!
//! A [`Formula`] is an immutable, reference-counted tree. Each node caches its
//! canonical printed form, its free variables and its polarity, so equality,
//! ordering and hashing are all driven by the printed form. Two formulæ are
//! equal iff they are structurally identical (no α-conversion).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{LogicError, Misplaced, ParseError};
use crate::lexer::{Cursor, Tok};

pub type VarSet = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut VarSet) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    fn rename(&self, map: &HashMap<String, String>) -> Term {
        match self {
            Term::Var(x) => Term::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|t| t.rename(map)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// An atomic formula `P(t1, ..., tn)`; `n = 0` prints as the bare predicate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum FormulaKind {
    Atom(Atom),
    Imp(Formula, Formula),
    Forall(String, Formula),
}

struct Node {
    kind: FormulaKind,
    text: String,
    free: VarSet,
    positive: bool,
    negative: bool,
    positions: usize,
}

#[derive(Clone)]
pub struct Formula(Arc<Node>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
    /// Atoms are both positive and negative.
    Both,
    Neither,
}

impl Polarity {
    fn from_flags(positive: bool, negative: bool) -> Self {
        match (positive, negative) {
            (true, true) => Polarity::Both,
            (true, false) => Polarity::Positive,
            (false, true) => Polarity::Negative,
            (false, false) => Polarity::Neither,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Polarity::Positive | Polarity::Both)
    }

    pub fn is_negative(self) -> bool {
        matches!(self, Polarity::Negative | Polarity::Both)
    }
}

fn wrap(f: &Formula) -> String {
    format!("({})", f.0.text)
}

impl Formula {
    fn from_kind(kind: FormulaKind) -> Self {
        let node = match &kind {
            FormulaKind::Atom(a) => {
                let mut free = VarSet::new();
                a.args.iter().for_each(|t| t.collect_vars(&mut free));
                Node {
                    text: a.to_string(),
                    free,
                    positive: true,
                    negative: true,
                    positions: 1,
                    kind,
                }
            }
            FormulaKind::Imp(a, b) => {
                let left = match a.kind() {
                    FormulaKind::Atom(_) => a.0.text.clone(),
                    _ => wrap(a),
                };
                Node {
                    text: format!("{left} -> {}", b.0.text),
                    free: a.0.free.union(&b.0.free).cloned().collect(),
                    positive: a.0.negative && b.0.positive,
                    negative: a.0.positive && b.0.negative,
                    positions: 1 + a.0.positions + b.0.positions,
                    kind,
                }
            }
            FormulaKind::Forall(x, body) => {
                let inner = match body.kind() {
                    FormulaKind::Imp(..) => wrap(body),
                    _ => body.0.text.clone(),
                };
                let mut free = body.0.free.clone();
                free.remove(x);
                Node {
                    text: format!("forall {x}. {inner}"),
                    free,
                    positive: body.0.positive,
                    negative: false,
                    positions: 1 + body.0.positions,
                    kind,
                }
            }
        };
        Formula(Arc::new(node))
    }

    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Self::from_kind(FormulaKind::Atom(Atom { pred: pred.into(), args }))
    }

    /// A nullary atom.
    pub fn prop(pred: impl Into<String>) -> Self {
        Self::atom(pred, Vec::new())
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Self::from_kind(FormulaKind::Imp(a, b))
    }

    pub fn forall(x: impl Into<String>, body: Formula) -> Self {
        Self::from_kind(FormulaKind::Forall(x.into(), body))
    }

    /// `A1 -> ... -> An -> head`.
    pub fn spine(args: impl IntoIterator<Item = Formula>, head: Formula) -> Self {
        let args: Vec<_> = args.into_iter().collect();
        args.into_iter().rev().fold(head, |acc, a| Formula::imp(a, acc))
    }

    pub fn kind(&self) -> &FormulaKind {
        &self.0.kind
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self.kind() {
            FormulaKind::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        self.as_atom().is_some()
    }

    /// Canonical printed form; re-parses to `self`.
    pub fn text(&self) -> &str {
        &self.0.text
    }

    pub fn free_vars(&self) -> &VarSet {
        &self.0.free
    }

    pub fn is_closed(&self) -> bool {
        self.0.free.is_empty()
    }

    /// Variables bound anywhere in the formula, in left-to-right quantifier order.
    pub fn bound_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_bound(&mut out);
        out
    }

    fn collect_bound(&self, out: &mut Vec<String>) {
        match self.kind() {
            FormulaKind::Atom(_) => {}
            FormulaKind::Imp(a, b) => {
                a.collect_bound(out);
                b.collect_bound(out);
            }
            FormulaKind::Forall(x, body) => {
                out.push(x.clone());
                body.collect_bound(out);
            }
        }
    }

    /// Every variable name occurring in the formula, free, bound or binding.
    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        for p in self.pieces() {
            match p.kind() {
                FormulaKind::Atom(a) => a.args.iter().for_each(|t| t.collect_vars(&mut out)),
                FormulaKind::Forall(x, _) => {
                    out.insert(x.clone());
                }
                FormulaKind::Imp(..) => {}
            }
        }
        out
    }

    pub fn polarity(&self) -> Polarity {
        Polarity::from_flags(self.0.positive, self.0.negative)
    }

    /// Number of tree positions.
    pub fn positions(&self) -> usize {
        self.0.positions
    }

    /// Number of `->` and `forall` nodes.
    pub fn connectives(&self) -> usize {
        match self.kind() {
            FormulaKind::Atom(_) => 0,
            FormulaKind::Imp(a, b) => 1 + a.connectives() + b.connectives(),
            FormulaKind::Forall(_, body) => 1 + body.connectives(),
        }
    }

    /// Nesting depth of quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self.kind() {
            FormulaKind::Atom(_) => 0,
            FormulaKind::Imp(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            FormulaKind::Forall(_, body) => 1 + body.quantifier_depth(),
        }
    }

    /// Splits a negative formula `A1 -> ... -> An -> P` into `(P, [A1, ..., An])`.
    pub fn decompose(&self) -> Result<(Formula, Vec<Formula>), LogicError> {
        let mut args = Vec::new();
        let mut cur = self;
        loop {
            match cur.kind() {
                FormulaKind::Atom(_) => return Ok((cur.clone(), args)),
                FormulaKind::Imp(a, b) => {
                    args.push(a.clone());
                    cur = b;
                }
                FormulaKind::Forall(..) => return Err(LogicError::NotNegative(self.to_string())),
            }
        }
    }

    /// The formula at every position of the tree, in pre-order.
    pub fn pieces(&self) -> Vec<Formula> {
        let mut out = Vec::with_capacity(self.positions());
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            out.push(f.clone());
            match f.kind() {
                FormulaKind::Atom(_) => {}
                FormulaKind::Imp(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                FormulaKind::Forall(_, body) => stack.push(body),
            }
        }
        out
    }

    pub fn piece_set(&self) -> HashSet<Formula> {
        self.pieces().into_iter().collect()
    }

    /// Renames free variables according to `map`. The targets must not be
    /// bound anywhere in `self`.
    pub fn rename_free(&self, map: &HashMap<String, String>) -> Formula {
        if map.is_empty() || self.0.free.iter().all(|x| !map.contains_key(x)) {
            return self.clone();
        }
        match self.kind() {
            FormulaKind::Atom(a) => Formula::atom(
                a.pred.clone(),
                a.args.iter().map(|t| t.rename(map)).collect(),
            ),
            FormulaKind::Imp(a, b) => Formula::imp(a.rename_free(map), b.rename_free(map)),
            FormulaKind::Forall(x, body) => {
                debug_assert!(!map.values().any(|v| v == x), "capture of {x}");
                if map.contains_key(x) {
                    let mut inner = map.clone();
                    inner.remove(x);
                    Formula::forall(x.clone(), body.rename_free(&inner))
                } else {
                    Formula::forall(x.clone(), body.rename_free(map))
                }
            }
        }
    }

    /// Prints with a custom rendering of atoms; structure and parenthesization
    /// follow the canonical form.
    pub fn render_with(&self, atom: &dyn Fn(&Atom) -> String) -> String {
        match self.kind() {
            FormulaKind::Atom(a) => atom(a),
            FormulaKind::Imp(a, b) => {
                let left = a.render_with(atom);
                let left = if a.is_atom() { left } else { format!("({left})") };
                format!("{left} -> {}", b.render_with(atom))
            }
            FormulaKind::Forall(x, body) => {
                let inner = body.render_with(atom);
                match body.kind() {
                    FormulaKind::Imp(..) => format!("forall {x}. ({inner})"),
                    _ => format!("forall {x}. {inner}"),
                }
            }
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.text == other.0.text
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.text.hash(state);
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.text.cmp(&other.0.text)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.text)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.0.text)
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Parses a formula: `->` is right-associative and quantifier bodies extend
/// as far right as possible.
pub fn parse_formula(input: &str) -> Result<Formula, ParseError> {
    let mut cur = Cursor::new(input)?;
    let f = formula(&mut cur)?;
    cur.finish()?;
    Ok(f)
}

pub(crate) fn formula(cur: &mut Cursor) -> Result<Formula, ParseError> {
    if cur.eat(&Tok::Forall) {
        let x = cur.ident()?;
        cur.expect(&Tok::Dot)?;
        let body = formula(cur)?;
        return Ok(Formula::forall(x, body));
    }
    let lhs = atom_or_group(cur)?;
    if cur.eat(&Tok::Arrow) {
        let rhs = formula(cur)?;
        Ok(Formula::imp(lhs, rhs))
    } else {
        Ok(lhs)
    }
}

fn atom_or_group(cur: &mut Cursor) -> Result<Formula, ParseError> {
    match cur.peek() {
        Tok::Ident(_) => {
            let pred = cur.ident()?;
            let args = if *cur.peek() == Tok::LParen { term_args(cur)? } else { Vec::new() };
            Ok(Formula::atom(pred, args))
        }
        Tok::LParen => {
            cur.bump();
            let f = formula(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(f)
        }
        _ => Err(cur.unexpected("atom, `(` or `forall`")),
    }
}

fn term_args(cur: &mut Cursor) -> Result<Vec<Term>, ParseError> {
    cur.expect(&Tok::LParen)?;
    let mut args = vec![term(cur)?];
    while cur.eat(&Tok::Comma) {
        args.push(term(cur)?);
    }
    cur.expect(&Tok::RParen)?;
    Ok(args)
}

fn term(cur: &mut Cursor) -> Result<Term, ParseError> {
    let name = cur.ident()?;
    if *cur.peek() == Tok::LParen {
        Ok(Term::App(name, term_args(cur)?))
    } else {
        Ok(Term::Var(name))
    }
}

/// Finds the first quantifier standing at a position that must be negative.
/// Returns `None` exactly when the formula is positive.
pub fn misplaced_quantifier(f: &Formula) -> Option<Misplaced> {
    fn walk(f: &Formula, want_positive: bool, seen: &mut usize) -> Option<Misplaced> {
        match f.kind() {
            FormulaKind::Atom(_) => None,
            FormulaKind::Imp(a, b) => {
                walk(a, !want_positive, seen).or_else(|| walk(b, want_positive, seen))
            }
            FormulaKind::Forall(_, body) => {
                if !want_positive {
                    return Some(Misplaced { quantifier: *seen, subformula: f.to_string() });
                }
                *seen += 1;
                walk(body, true, seen)
            }
        }
    }
    walk(f, true, &mut 0)
}

/// Renames binders apart so that all bound variables are pairwise distinct
/// and distinct from the free variables. A binder is renamed only when it
/// clashes with a free variable or an earlier binder (pre-order); the new
/// name is `x_<n>` for the first global counter value `n` giving an unused
/// identifier.
pub fn barendregt_rename(f: &Formula) -> Formula {
    struct Renamer {
        used: VarSet,
        taken: VarSet,
        counter: usize,
    }

    impl Renamer {
        fn go(&mut self, f: &Formula, env: &HashMap<String, String>) -> Formula {
            match f.kind() {
                FormulaKind::Atom(_) => f.rename_free(env),
                FormulaKind::Imp(a, b) => {
                    let a = self.go(a, env);
                    let b = self.go(b, env);
                    Formula::imp(a, b)
                }
                FormulaKind::Forall(x, body) => {
                    let name = if self.taken.contains(x) {
                        loop {
                            self.counter += 1;
                            let cand = format!("{x}_{}", self.counter);
                            if !self.used.contains(&cand) {
                                break cand;
                            }
                        }
                    } else {
                        x.clone()
                    };
                    self.taken.insert(name.clone());
                    self.used.insert(name.clone());
                    let mut env = env.clone();
                    env.insert(x.clone(), name.clone());
                    let body = self.go(body, &env);
                    Formula::forall(name, body)
                }
            }
        }
    }

    let mut r = Renamer {
        used: f.all_vars(),
        taken: f.free_vars().clone(),
        counter: 0,
    };
    r.go(f, &HashMap::new())
}

/// True when all binders are pairwise distinct and distinct from the free variables.
pub fn is_barendregt(f: &Formula) -> bool {
    let bound = f.bound_vars();
    let distinct: VarSet = bound.iter().cloned().collect();
    distinct.len() == bound.len() && distinct.is_disjoint(f.free_vars())
}

/// For every binder `x` of a Barendregt formula, the set `V(x)` of variables
/// bound in the piece `forall x. A` (that is, `x` and every binder below it),
/// together with the maximum quantifier nesting depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeTable {
    sets: BTreeMap<String, VarSet>,
    depth: usize,
}

impl ScopeTable {
    pub fn scope_of(&self, x: &str) -> Option<&VarSet> {
        self.sets.get(x)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn binders(&self) -> impl Iterator<Item = (&String, &VarSet)> {
        self.sets.iter()
    }

    /// `y` is in the scope of `x`: the `forall x` node strictly dominates `forall y`.
    pub fn in_scope(&self, y: &str, x: &str) -> bool {
        x != y && self.sets.get(x).is_some_and(|v| v.contains(y))
    }

    /// The binder `x` with `V(x) = set`, if any. Distinct binders have distinct sets.
    pub fn binder_of(&self, set: &VarSet) -> Option<&str> {
        self.sets.iter().find(|(_, v)| *v == set).map(|(x, _)| x.as_str())
    }
}

pub fn scope_table(f: &Formula) -> Result<ScopeTable, LogicError> {
    fn walk(
        f: &Formula,
        ancestors: &mut Vec<String>,
        sets: &mut BTreeMap<String, VarSet>,
        depth: &mut usize,
        free: &VarSet,
    ) -> Result<(), LogicError> {
        match f.kind() {
            FormulaKind::Atom(_) => Ok(()),
            FormulaKind::Imp(a, b) => {
                walk(a, ancestors, sets, depth, free)?;
                walk(b, ancestors, sets, depth, free)
            }
            FormulaKind::Forall(x, body) => {
                if sets.contains_key(x) || free.contains(x) {
                    return Err(LogicError::NotBarendregt(x.clone()));
                }
                for a in ancestors.iter() {
                    sets.get_mut(a).expect("ancestor registered").insert(x.clone());
                }
                sets.insert(x.clone(), VarSet::from([x.clone()]));
                ancestors.push(x.clone());
                *depth = (*depth).max(ancestors.len());
                walk(body, ancestors, sets, depth, free)?;
                ancestors.pop();
                Ok(())
            }
        }
    }

    let mut sets = BTreeMap::new();
    let mut depth = 0;
    walk(f, &mut Vec::new(), &mut sets, &mut depth, f.free_vars())?;
    Ok(ScopeTable { sets, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn set(xs: &[&str]) -> VarSet {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_smallest_implication() {
        let f = p("P -> P");
        assert_eq!(f, Formula::imp(Formula::prop("P"), Formula::prop("P")));
    }

    #[test]
    fn quantifier_scopes_over_arrow() {
        let f = p("forall x. P(x) -> Q");
        let expected = Formula::forall(
            "x",
            Formula::imp(Formula::atom("P", vec![Term::var("x")]), Formula::prop("Q")),
        );
        assert_eq!(f, expected);
        assert_eq!(f.text(), "forall x. (P(x) -> Q)");
    }

    #[test]
    fn arrow_is_right_associative() {
        let f = p("A -> B -> C");
        assert_eq!(f, Formula::imp(Formula::prop("A"), p("B -> C")));
        assert_ne!(f, p("(A -> B) -> C"));
    }

    #[test]
    fn parses_nested_terms() {
        let f = p("R(f(x, g(y)), z)");
        let a = f.as_atom().unwrap();
        assert_eq!(a.args.len(), 2);
        assert_eq!(f.free_vars(), &set(&["x", "y", "z"]));
        assert_eq!(f.text(), "R(f(x, g(y)), z)");
    }

    #[test]
    fn reports_error_positions() {
        let e = parse_formula("P -> ").unwrap_err();
        assert_eq!(e.offset, 5);
        let e = parse_formula("P(x -> Q").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse_formula("forall . P").unwrap_err();
        assert_eq!(e.offset, 7);
        assert!(parse_formula("P()").is_err());
        assert!(parse_formula("P Q").is_err());
        assert!(parse_formula("P $ Q").is_err());
    }

    #[test]
    fn prints_canonical_parenthesization() {
        assert_eq!(Formula::prop("Q").text(), "Q");
        let f = p("((forall x. (P(x) -> Q)) -> Q) -> Q");
        assert_eq!(f.text(), "((forall x. (P(x) -> Q)) -> Q) -> Q");
        assert_eq!(p("P -> forall x. Q(x)").text(), "P -> forall x. Q(x)");
        assert_eq!(p("forall x. forall y. R(x, y)").text(), "forall x. forall y. R(x, y)");
    }

    #[test]
    fn free_variables() {
        assert_eq!(p("P(x) -> Q").free_vars(), &set(&["x"]));
        assert!(p("forall x. (P(x) -> Q)").free_vars().is_empty());
        assert_eq!(p("P(x') -> P(y')").free_vars(), &set(&["x'", "y'"]));
    }

    #[test]
    fn bound_variables_in_order() {
        assert_eq!(p("forall x. (P(x) -> Q)").bound_vars(), vec!["x"]);
        let f = p("forall Y. forall Z. (((eps(Y) -> eps(X)) -> eps(Z)) -> (eps(Y) -> eps(Z)) -> eps(Z))");
        assert_eq!(f.bound_vars(), vec!["Y", "Z"]);
        assert!(p("P -> Q").bound_vars().is_empty());
    }

    #[test]
    fn polarity_cases() {
        // purely propositional, so positive and negative at once
        let prop = p("((((P -> Q) -> P) -> P) -> Q) -> Q").polarity();
        assert!(prop.is_positive());
        assert_eq!(prop, Polarity::Both);
        let q = p("forall x. P(x)");
        assert_eq!(q.polarity(), Polarity::Positive);
        assert!(!q.polarity().is_negative());
        assert_eq!(p("P").polarity(), Polarity::Both);
        assert_eq!(p("P -> Q").polarity(), Polarity::Both);
        assert_eq!(p("(forall x. P(x)) -> Q").polarity(), Polarity::Negative);
        assert_eq!(p("((forall x. P(x)) -> Q) -> forall y. P(y)").polarity(), Polarity::Positive);
        assert_eq!(p("(forall x. P(x)) -> forall y. P(y)").polarity(), Polarity::Neither);
    }

    #[test]
    fn misplaced_quantifier_index() {
        assert!(misplaced_quantifier(&p("forall x. (P(x) -> Q)")).is_none());
        let m = misplaced_quantifier(&p("forall y. ((forall x. P(x)) -> Q)")).unwrap();
        assert_eq!(m.quantifier, 1);
        assert_eq!(m.subformula, "forall x. P(x)");
    }

    #[test]
    fn decompose_spine() {
        let (h, args) = p("A1 -> A2 -> P").decompose().unwrap();
        assert_eq!(h, p("P"));
        assert_eq!(args, vec![p("A1"), p("A2")]);
        let (h, args) = p("P").decompose().unwrap();
        assert_eq!(h, p("P"));
        assert!(args.is_empty());
        assert!(matches!(p("forall x. P(x)").decompose(), Err(LogicError::NotNegative(_))));
        assert!(matches!(p("A -> forall x. P(x)").decompose(), Err(LogicError::NotNegative(_))));
    }

    #[test]
    fn rename_keeps_barendregt_formula() {
        let f = p("forall x. P(x)");
        assert_eq!(barendregt_rename(&f), f);
    }

    #[test]
    fn rename_separates_clashing_binders() {
        let f = p("(forall x. P(x)) -> (forall x. Q(x))");
        let g = barendregt_rename(&f);
        assert_eq!(g.text(), "(forall x. P(x)) -> forall x_1. Q(x_1)");
        assert!(is_barendregt(&g));
    }

    #[test]
    fn rename_avoids_free_variables_and_existing_names() {
        let f = p("P(x) -> forall x. (Q(x) -> R(x_1))");
        let g = barendregt_rename(&f);
        assert_eq!(g.text(), "P(x) -> forall x_2. (Q(x_2) -> R(x_1))");
        assert!(is_barendregt(&g));
    }

    #[test]
    fn rename_respects_shadowing() {
        let f = p("forall x. ((forall x. P(x)) -> Q(x))");
        let g = barendregt_rename(&f);
        assert_eq!(g.text(), "forall x. ((forall x_1. P(x_1)) -> Q(x))");
    }

    #[test]
    fn pieces_of_quantified_formula() {
        let f = p("forall x. (P(x) -> Q)");
        let got: HashSet<_> = f.pieces().into_iter().collect();
        let want: HashSet<_> =
            ["forall x. (P(x) -> Q)", "P(x) -> Q", "P(x)", "Q"].iter().map(|s| p(s)).collect();
        assert_eq!(got, want);
        assert_eq!(p("Q").pieces(), vec![p("Q")]);
        assert_eq!(p("P -> P").pieces().len(), 3);
        assert_eq!(p("P -> P").piece_set().len(), 2);
    }

    #[test]
    fn scope_table_simple() {
        let t = scope_table(&p("forall x. (P(x) -> Q)")).unwrap();
        assert_eq!(t.scope_of("x"), Some(&set(&["x"])));
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn scope_table_prenex_chain() {
        let f = p("forall X. forall Y. forall Z. (((((eps(Y) -> eps(X)) -> eps(Z)) -> (eps(Y) -> eps(Z)) -> eps(Z)) -> eps(X)) -> eps(X))");
        let t = scope_table(&f).unwrap();
        assert_eq!(t.scope_of("X"), Some(&set(&["X", "Y", "Z"])));
        assert_eq!(t.scope_of("Y"), Some(&set(&["Y", "Z"])));
        assert_eq!(t.scope_of("Z"), Some(&set(&["Z"])));
        assert_eq!(t.depth(), 3);
        assert!(t.in_scope("Z", "X"));
        assert!(!t.in_scope("X", "X"));
        assert_eq!(t.binder_of(&set(&["Y", "Z"])), Some("Y"));
        assert_eq!(t.binder_of(&set(&["X", "Z"])), None);
    }

    #[test]
    fn scope_table_rejects_duplicates() {
        let f = p("(forall x. P(x)) -> forall x. Q(x)");
        assert_eq!(scope_table(&f), Err(LogicError::NotBarendregt("x".into())));
        let g = p("P(x) -> forall x. Q(x)");
        assert!(scope_table(&g).is_err());
    }

    #[test]
    fn render_with_custom_atoms() {
        let f = p("forall X. (eps(X) -> eps(X))");
        let s = f.render_with(&|a: &Atom| a.args.first().map_or(a.pred.clone(), |t| t.to_string()));
        assert_eq!(s, "forall X. (X -> X)");
    }
}
