//! Reference prover for the eigenvariable calculus, used to cross-check the
//! bracketed search.
//!
//! The prover here is deliberately naive: contraction is built into `L→`,
//! `R∀` always introduces a brand-new eigenvariable, and termination comes
//! only from an explicit bound on derivation height. It can confirm "yes"
//! answers at some finite depth but can never certify "no".

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::context::{Context, Item};
use crate::prover::Sequent;
use crate::syntax::{Formula, FormulaKind, Term};

/// Separates a base name from the counter in generated names. It cannot
/// occur in parsed identifiers, so generated names never clash with input.
pub const FRESH_MARKER: char = '#';

/// A sequent without brackets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatSequent {
    pub context: Vec<Formula>,
    pub goal: Formula,
}

impl FlatSequent {
    pub fn new(context: Vec<Formula>, goal: Formula) -> Self {
        FlatSequent { context, goal }
    }

    /// Every variable name used anywhere in the sequent.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.goal.all_vars().into_iter().collect();
        for f in &self.context {
            out.extend(f.all_vars());
        }
        out
    }
}

impl fmt::Display for FlatSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx: Vec<String> = self.context.iter().map(|a| a.to_string()).collect();
        if ctx.is_empty() {
            write!(f, "|- {}", self.goal)
        } else {
            write!(f, "{} |- {}", ctx.join(", "), self.goal)
        }
    }
}

/// Monotone generator of names `base#n`.
#[derive(Debug, Clone)]
pub struct FreshNames {
    next: usize,
}

impl FreshNames {
    pub fn starting_at(next: usize) -> Self {
        FreshNames { next }
    }

    /// A generator whose names avoid every generated name in `used`.
    pub fn avoiding<'a>(used: impl IntoIterator<Item = &'a String>) -> Self {
        let next = used
            .into_iter()
            .filter_map(|n| n.rsplit_once(FRESH_MARKER))
            .filter_map(|(_, k)| k.parse::<usize>().ok())
            .map(|k| k + 1)
            .max()
            .unwrap_or(0);
        FreshNames { next }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let base = base.split(FRESH_MARKER).next().unwrap_or(base);
        let name = format!("{base}{FRESH_MARKER}{}", self.next);
        self.next += 1;
        name
    }
}

/// Renames every bracket-bound variable to a fresh name, recursively, and
/// erases the brackets.
pub fn flatten(s: &Sequent, names: &mut FreshNames) -> FlatSequent {
    fn walk(ctx: &Context, map: &HashMap<String, String>, names: &mut FreshNames, out: &mut Vec<Formula>) {
        for item in ctx.iter() {
            match item {
                Item::Formula(a) => out.push(a.rename_free(map)),
                Item::Bracket(b) => {
                    let mut inner = map.clone();
                    for v in b.bound() {
                        inner.insert(v.clone(), names.fresh(v));
                    }
                    walk(b.content(), &inner, names, out);
                }
            }
        }
    }
    let mut context = Vec::new();
    walk(&s.context, &HashMap::new(), names, &mut context);
    FlatSequent { context, goal: s.goal.clone() }
}

#[derive(Debug, Clone, Copy, Default)]
struct Memo {
    /// Largest bound known to fail.
    failed: Option<usize>,
    /// Smallest bound known to succeed.
    proved: Option<usize>,
}

/// One oracle query: the eigenvariable generator, a table of already
/// decided `(context, goal, bound)` triples, and freshness instrumentation.
pub struct Oracle {
    names: FreshNames,
    memo: HashMap<(BTreeSet<Formula>, Formula), Memo>,
    eigenvariables: usize,
    stale_eigenvariables: usize,
}

impl Oracle {
    pub fn for_sequent(s: &FlatSequent) -> Self {
        Oracle {
            names: FreshNames::avoiding(&s.names()),
            memo: HashMap::new(),
            eigenvariables: 0,
            stale_eigenvariables: 0,
        }
    }

    /// Eigenvariables introduced so far.
    pub fn eigenvariables(&self) -> usize {
        self.eigenvariables
    }

    /// `R∀` applications whose eigenvariable already occurred in the sequent.
    /// Always zero unless the name generator is broken.
    pub fn stale_eigenvariables(&self) -> usize {
        self.stale_eigenvariables
    }

    /// Is there a derivation of height at most `bound`?
    pub fn prove(&mut self, s: &FlatSequent, bound: usize) -> bool {
        let ctx: BTreeSet<Formula> = s.context.iter().cloned().collect();
        self.prove_in(&ctx, &s.goal, bound)
    }

    /// Smallest height `1..=max_depth` at which a derivation exists.
    pub fn prove_iterative(&mut self, s: &FlatSequent, max_depth: usize) -> Option<usize> {
        (1..=max_depth).find(|&d| self.prove(s, d))
    }

    fn prove_in(&mut self, ctx: &BTreeSet<Formula>, goal: &Formula, bound: usize) -> bool {
        if bound == 0 {
            return false;
        }
        let key = (ctx.clone(), goal.clone());
        if let Some(m) = self.memo.get(&key) {
            if m.proved.is_some_and(|p| p <= bound) {
                return true;
            }
            if m.failed.is_some_and(|f| f >= bound) {
                return false;
            }
        }
        let result = match goal.kind() {
            FormulaKind::Imp(a, b) => {
                let mut extended = ctx.clone();
                extended.insert(a.clone());
                self.prove_in(&extended, b, bound - 1)
            }
            FormulaKind::Forall(x, body) => {
                let fresh = self.names.fresh(x);
                self.eigenvariables += 1;
                if goal.all_vars().contains(&fresh) || ctx.iter().any(|c| c.all_vars().contains(&fresh)) {
                    self.stale_eigenvariables += 1;
                }
                let renamed = body.rename_free(&HashMap::from([(x.clone(), fresh)]));
                self.prove_in(ctx, &renamed, bound - 1)
            }
            FormulaKind::Atom(_) => {
                let mut found = false;
                for h in ctx {
                    let Ok((head, args)) = h.decompose() else { continue };
                    if head != *goal {
                        continue;
                    }
                    if args.iter().all(|a| self.prove_in(ctx, a, bound - 1)) {
                        found = true;
                        break;
                    }
                }
                found
            }
        };
        let m = self.memo.entry(key).or_default();
        if result {
            m.proved = Some(m.proved.map_or(bound, |p| p.min(bound)));
        } else {
            m.failed = Some(m.failed.map_or(bound, |f| f.max(bound)));
        }
        result
    }
}

pub fn ljplus_prove(s: &FlatSequent, depth_bound: usize) -> bool {
    Oracle::for_sequent(s).prove(s, depth_bound)
}

/// Iterative deepening over `1..=max_depth`; returns the first height that works.
pub fn ljplus_prove_iterative(s: &FlatSequent, max_depth: usize) -> Option<usize> {
    Oracle::for_sequent(s).prove_iterative(s, max_depth)
}

/// Default ceiling for iterative deepening.
pub const DEFAULT_MAX_DEPTH: usize = 20;

/// Do the two sequents differ only by a renaming of variables? Free
/// variables are related by one bijection across the whole sequent; bound
/// variables by their binders. Contexts are compared as multisets.
pub fn alpha_bar_equivalent(a: &FlatSequent, b: &FlatSequent) -> bool {
    if a.context.len() != b.context.len() {
        return false;
    }
    let mut bij = Bijection::default();
    if !match_formula(&a.goal, &b.goal, &mut bij, &mut Vec::new()) {
        return false;
    }
    let mut used = vec![false; b.context.len()];
    match_contexts(&a.context, &b.context, &mut used, bij)
}

#[derive(Debug, Clone, Default)]
struct Bijection {
    forward: HashMap<String, String>,
    backward: HashMap<String, String>,
}

impl Bijection {
    fn pair(&mut self, x: &str, y: &str) -> bool {
        match (self.forward.get(x), self.backward.get(y)) {
            (Some(fy), Some(bx)) => fy == y && bx == x,
            (None, None) => {
                self.forward.insert(x.to_string(), y.to_string());
                self.backward.insert(y.to_string(), x.to_string());
                true
            }
            _ => false,
        }
    }
}

fn match_contexts(a: &[Formula], b: &[Formula], used: &mut [bool], bij: Bijection) -> bool {
    let Some((first, rest)) = a.split_first() else {
        return true;
    };
    for j in 0..b.len() {
        if used[j] {
            continue;
        }
        let mut attempt = bij.clone();
        if match_formula(first, &b[j], &mut attempt, &mut Vec::new()) {
            used[j] = true;
            if match_contexts(rest, b, used, attempt) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

fn match_formula(a: &Formula, b: &Formula, bij: &mut Bijection, env: &mut Vec<(String, String)>) -> bool {
    match (a.kind(), b.kind()) {
        (FormulaKind::Atom(p), FormulaKind::Atom(q)) => {
            p.pred == q.pred
                && p.args.len() == q.args.len()
                && p.args.iter().zip(&q.args).all(|(s, t)| match_term(s, t, bij, env))
        }
        (FormulaKind::Imp(a1, a2), FormulaKind::Imp(b1, b2)) => {
            match_formula(a1, b1, bij, env) && match_formula(a2, b2, bij, env)
        }
        (FormulaKind::Forall(x, a1), FormulaKind::Forall(y, b1)) => {
            env.push((x.clone(), y.clone()));
            let ok = match_formula(a1, b1, bij, env);
            env.pop();
            ok
        }
        _ => false,
    }
}

fn match_term(s: &Term, t: &Term, bij: &mut Bijection, env: &[(String, String)]) -> bool {
    match (s, t) {
        (Term::Var(x), Term::Var(y)) => {
            let bx = env.iter().rev().position(|(l, _)| l == x);
            let by = env.iter().rev().position(|(_, r)| r == y);
            match (bx, by) {
                (Some(i), Some(j)) => i == j,
                (None, None) => bij.pair(x, y),
                _ => false,
            }
        }
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(s, t)| match_term(s, t, bij, env))
        }
        _ => false,
    }
}

const NULLARY: [&str; 2] = ["P", "Q"];
const UNARY: [&str; 1] = ["S"];

struct Generator {
    rng: ChaCha8Rng,
    next_var: usize,
    max_nesting: usize,
}

impl Generator {
    fn atom(&mut self, scope: &[String]) -> Formula {
        if !scope.is_empty() && self.rng.gen_bool(0.6) {
            let pred = UNARY[self.rng.gen_range(0..UNARY.len())];
            let x = &scope[self.rng.gen_range(0..scope.len())];
            Formula::atom(pred, vec![Term::var(x.clone())])
        } else {
            Formula::prop(NULLARY[self.rng.gen_range(0..NULLARY.len())])
        }
    }

    // Uses exactly `budget` connectives.
    fn positive(&mut self, budget: usize, scope: &mut Vec<String>) -> Formula {
        if budget == 0 {
            return self.atom(scope);
        }
        if scope.len() < self.max_nesting && self.rng.gen_bool(0.4) {
            let x = format!("x{}", self.next_var);
            self.next_var += 1;
            scope.push(x.clone());
            let body = self.positive(budget - 1, scope);
            scope.pop();
            return Formula::forall(x, body);
        }
        let left = self.rng.gen_range(0..budget);
        let a = self.negative(left, scope);
        let b = self.positive(budget - 1 - left, scope);
        Formula::imp(a, b)
    }

    fn negative(&mut self, budget: usize, scope: &mut Vec<String>) -> Formula {
        if budget == 0 {
            return self.atom(scope);
        }
        let left = self.rng.gen_range(0..budget);
        let a = self.positive(left, scope);
        let b = self.negative(budget - 1 - left, scope);
        Formula::imp(a, b)
    }
}

/// A closed positive formula with fewer than `size` connectives (so `size`
/// 1 gives an atom) and quantifier nesting at most `quantifier_depth`, over
/// nullary predicates `P, Q, R` and unary predicates `S, T`. Binders are
/// pairwise distinct. Deterministic in `seed`.
pub fn generate_positive(seed: u64, size: usize, quantifier_depth: usize) -> Formula {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
        next_var: 0,
        max_nesting: quantifier_depth,
    };
    let budget = g.rng.gen_range(size / 2..size.max(1));
    g.positive(budget, &mut Vec::new())
}
