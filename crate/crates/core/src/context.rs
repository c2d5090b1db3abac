//! Bracketed contexts and their cleaning rewrite system.
//!
//! A [`Context`] is a multiset of [`Item`]s, each either a formula or a
//! bracket `[Γ]_V` binding the variables of `V` inside `Γ`. Three rules clean
//! a context, anywhere inside it:
//!
//! ```text
//! [I, Γ]_V  →  I, [Γ]_V     if FV(I) ∩ V = ∅
//! [ ]_V     →  ∅
//! I, I      →  I
//! ```
//!
//! Clean contexts are kept in a canonical form: duplicate-free and sorted by
//! the derived item order (formulæ before brackets, formulæ by printed form,
//! brackets by bound set and then content). Structural equality of canonical
//! contexts is therefore equality of the underlying multisets after cleaning.

use std::fmt;
use std::sync::Arc;

use crate::error::ParseError;
use crate::lexer::{Cursor, Tok};
use crate::syntax::{self, Atom, Formula, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Formula(Formula),
    Bracket(Arc<Bracket>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bracket {
    bound: VarSet,
    content: Context,
    // Determined by the two fields above, so it never affects the order.
    free: VarSet,
}

impl Bracket {
    pub fn bound(&self) -> &VarSet {
        &self.bound
    }

    pub fn content(&self) -> &Context {
        &self.content
    }
}

impl Item {
    pub fn bracket(content: Context, bound: VarSet) -> Item {
        let free = content.free_vars().difference(&bound).cloned().collect();
        Item::Bracket(Arc::new(Bracket { bound, content, free }))
    }

    pub fn free_vars(&self) -> &VarSet {
        match self {
            Item::Formula(f) => f.free_vars(),
            Item::Bracket(b) => &b.free,
        }
    }

    /// `FV(self) ∩ v = ∅`.
    pub fn avoids(&self, v: &VarSet) -> bool {
        self.free_vars().is_disjoint(v)
    }

    pub fn depth(&self) -> usize {
        match self {
            Item::Formula(_) => 0,
            Item::Bracket(b) => 1 + b.content.depth(),
        }
    }

    pub fn measure(&self) -> usize {
        match self {
            Item::Formula(_) => 1,
            Item::Bracket(b) => 1 + 2 * b.content.measure(),
        }
    }

    pub fn as_formula(&self) -> Option<&Formula> {
        match self {
            Item::Formula(f) => Some(f),
            Item::Bracket(_) => None,
        }
    }

    pub fn as_bracket(&self) -> Option<&Bracket> {
        match self {
            Item::Formula(_) => None,
            Item::Bracket(b) => Some(b),
        }
    }

    pub fn render_with(&self, atom: &dyn Fn(&Atom) -> String) -> String {
        match self {
            Item::Formula(f) => f.render_with(atom),
            Item::Bracket(b) => format!(
                "[{}]_{{{}}}",
                b.content.render_with(atom),
                b.bound.iter().cloned().collect::<Vec<_>>().join(",")
            ),
        }
    }
}

impl From<Formula> for Item {
    fn from(f: Formula) -> Self {
        Item::Formula(f)
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Formula(a) => write!(f, "{a}"),
            Item::Bracket(b) => {
                write!(f, "[{}]_{{", b.content)?;
                for (i, v) in b.bound.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(v)?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    items: Vec<Item>,
}

impl Context {
    pub fn empty() -> Self {
        Context::default()
    }

    /// A raw, possibly unclean context holding `items` in the given order.
    pub fn from_items(items: Vec<Item>) -> Self {
        Context { items }
    }

    /// The clean context containing exactly the given formulæ.
    pub fn of_formulas(fs: impl IntoIterator<Item = Formula>) -> Self {
        let mut items: Vec<Item> = fs.into_iter().map(Item::Formula).collect();
        items.sort();
        items.dedup();
        Context { items }
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Item> {
        self.items.iter()
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        for i in &self.items {
            out.extend(i.free_vars().iter().cloned());
        }
        out
    }

    /// Bracket nesting depth; 0 for a context of formulæ only.
    pub fn depth(&self) -> usize {
        self.items.iter().map(Item::depth).max().unwrap_or(0)
    }

    /// `|A| = 1`, `|[Γ]_V| = 1 + 2|Γ|`, summed over items.
    pub fn measure(&self) -> usize {
        self.items.iter().map(Item::measure).sum()
    }

    /// Every formula occurring anywhere in the context, brackets included.
    pub fn formulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.collect_formulas(&mut out);
        out
    }

    fn collect_formulas<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        for i in &self.items {
            match i {
                Item::Formula(f) => out.push(f),
                Item::Bracket(b) => b.content.collect_formulas(out),
            }
        }
    }

    /// True iff no cleaning rule applies anywhere and every level is sorted
    /// without duplicates.
    pub fn is_clean(&self) -> bool {
        self.items.windows(2).all(|w| w[0] < w[1])
            && self.items.iter().all(|i| match i {
                Item::Formula(_) => true,
                Item::Bracket(b) => {
                    !b.content.is_empty()
                        && b.content.items.iter().all(|j| !j.avoids(&b.bound))
                        && b.content.is_clean()
                }
            })
    }

    /// Normal form under the cleaning rules: contents are cleaned innermost
    /// first, variable-disjoint items are hoisted out of their bracket, empty
    /// brackets vanish, and each level is sorted and deduplicated.
    pub fn normalize(&self) -> Context {
        let mut items = Vec::with_capacity(self.items.len());
        for i in &self.items {
            match i {
                Item::Formula(_) => items.push(i.clone()),
                Item::Bracket(b) => {
                    let inner = b.content.normalize();
                    let (keep, hoist): (Vec<Item>, Vec<Item>) =
                        inner.items.into_iter().partition(|j| !j.avoids(&b.bound));
                    items.extend(hoist);
                    if !keep.is_empty() {
                        items.push(Item::bracket(Context { items: keep }, b.bound.clone()));
                    }
                }
            }
        }
        items.sort();
        items.dedup();
        Context { items }
    }

    /// Normal form of the union of two clean contexts.
    pub fn fuse(&self, other: &Context) -> Context {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let (a, b) = (&self.items, &other.items);
        let mut items = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    items.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    items.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    items.push(a[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        items.extend_from_slice(&a[i..]);
        items.extend_from_slice(&b[j..]);
        Context { items }
    }

    /// Inserts one item into a clean context. The item itself must be clean.
    pub fn with(&self, item: Item) -> Context {
        match self.items.binary_search(&item) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut items = self.items.clone();
                items.insert(pos, item);
                Context { items }
            }
        }
    }

    /// Removes the item at `index`; a clean context stays clean.
    pub fn without(&self, index: usize) -> Context {
        let mut items = self.items.clone();
        items.remove(index);
        Context { items }
    }

    /// Normal form of `[self]_v` for a clean `self`: items whose free
    /// variables avoid `v` stay outside, the rest are wrapped in one bracket.
    pub fn bracket(&self, v: &VarSet) -> Context {
        let (inside, outside): (Vec<Item>, Vec<Item>) =
            self.items.iter().cloned().partition(|i| !i.avoids(v));
        let outside = Context { items: outside };
        if inside.is_empty() {
            outside
        } else {
            outside.with(Item::bracket(Context { items: inside }, v.clone()))
        }
    }

    /// Recursively sorts every level without applying any cleaning rule.
    /// Two raw contexts denote the same multiset iff their sorted forms agree.
    pub fn sorted(&self) -> Context {
        let mut items: Vec<Item> = self
            .items
            .iter()
            .map(|i| match i {
                Item::Formula(_) => i.clone(),
                Item::Bracket(b) => Item::bracket(b.content.sorted(), b.bound.clone()),
            })
            .collect();
        items.sort();
        Context { items }
    }

    /// All contexts reachable by exactly one application of a cleaning rule
    /// at any position (multiset semantics, so results are sorted).
    pub fn rewrite_steps(&self) -> Vec<Context> {
        let mut out = Vec::new();
        let items = &self.items;
        for (k, item) in items.iter().enumerate() {
            // I, I → I
            if items[..k].contains(item) {
                out.push(Context { items: remove_at(items, k) }.sorted());
            }
            let Item::Bracket(b) = item else { continue };
            // [ ]_V → ∅
            if b.content.is_empty() {
                out.push(Context { items: remove_at(items, k) }.sorted());
            }
            // [I, Γ]_V → I, [Γ]_V
            for (m, inner) in b.content.items.iter().enumerate() {
                if inner.avoids(&b.bound) {
                    let mut next = remove_at(items, k);
                    next.push(inner.clone());
                    next.push(Item::bracket(
                        Context { items: remove_at(&b.content.items, m) },
                        b.bound.clone(),
                    ));
                    out.push(Context { items: next }.sorted());
                }
            }
            // anywhere inside the bracket
            for inner in b.content.rewrite_steps() {
                let mut next = remove_at(items, k);
                next.push(Item::bracket(inner, b.bound.clone()));
                out.push(Context { items: next }.sorted());
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn render_with(&self, atom: &dyn Fn(&Atom) -> String) -> String {
        self.items.iter().map(|i| i.render_with(atom)).collect::<Vec<_>>().join(", ")
    }
}

fn remove_at(items: &[Item], k: usize) -> Vec<Item> {
    let mut v = items.to_vec();
    v.remove(k);
    v
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

impl FromIterator<Item> for Context {
    fn from_iter<T: IntoIterator<Item = Item>>(iter: T) -> Self {
        Context { items: iter.into_iter().collect() }
    }
}

/// Parses the debug serialization `item, item, ...` where a bracket is
/// written `[content]_{v1,...,vk}`. The result is raw: items keep their
/// order and no cleaning is applied.
pub fn parse_context(input: &str) -> Result<Context, ParseError> {
    let mut cur = Cursor::new(input)?;
    let ctx = context(&mut cur, &Tok::Eof)?;
    cur.finish()?;
    Ok(ctx)
}

fn context(cur: &mut Cursor, end: &Tok) -> Result<Context, ParseError> {
    let mut items = Vec::new();
    if cur.peek() == end {
        return Ok(Context { items });
    }
    loop {
        items.push(item(cur)?);
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }
    Ok(Context { items })
}

fn item(cur: &mut Cursor) -> Result<Item, ParseError> {
    if cur.eat(&Tok::LBracket) {
        let content = context(cur, &Tok::CloseSub)?;
        cur.expect(&Tok::CloseSub)?;
        let mut bound = VarSet::new();
        if !cur.eat(&Tok::RBrace) {
            loop {
                bound.insert(cur.ident()?);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(&Tok::RBrace)?;
        }
        Ok(Item::bracket(content, bound))
    } else {
        Ok(Item::Formula(syntax::formula(cur)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn c(s: &str) -> Context {
        parse_context(s).unwrap()
    }

    fn vs(xs: &[&str]) -> VarSet {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn free_variables_subtract_bound_sets() {
        assert!(c("[P(x) -> P(y)]_{x,y}, [P(x)]_{x}").free_vars().is_empty());
        assert_eq!(Item::Formula(f("P(x) -> Q")).free_vars(), &vs(&["x"]));
        assert_eq!(c("[P(x) -> Q(z)]_{x}").free_vars(), vs(&["z"]));
    }

    #[test]
    fn measure_values() {
        assert_eq!(c("P").measure(), 1);
        assert_eq!(c("[P, Q]_{x}").measure(), 5);
        assert_eq!(Context::empty().measure(), 0);
        assert_eq!(c("[[P(x)]_{x}]_{y}").measure(), 7);
    }

    #[test]
    fn normalize_drops_empty_brackets() {
        assert_eq!(c("[]_{x}, Q, P").normalize(), c("P, Q"));
        assert_eq!(c("[[]_{y}]_{x}").normalize(), Context::empty());
    }

    #[test]
    fn normalize_hoists_disjoint_items() {
        let n = c("[Q, P(x)]_{x}").normalize();
        assert_eq!(n.to_string(), "Q, [P(x)]_{x}");
        assert!(n.is_clean());
    }

    #[test]
    fn normalize_collapses_duplicates() {
        assert_eq!(c("[P(x)]_{x}, [P(x)]_{x}").normalize().to_string(), "[P(x)]_{x}");
    }

    #[test]
    fn normalize_hoists_through_several_levels() {
        // Q escapes both brackets; P(y) only the inner one.
        let n = c("[[Q, P(y), R(x, y)]_{x}]_{y}").normalize();
        assert_eq!(n.to_string(), "Q, [P(y), [R(x, y)]_{x}]_{y}");
        // a closed bracket escapes the enclosing one
        let m = c("[[Q, P(y), R(x)]_{x}]_{y}").normalize();
        assert_eq!(m.to_string(), "Q, [R(x)]_{x}, [P(y)]_{y}");
        assert!(n.is_clean());
    }

    #[test]
    fn fuse_cases() {
        let a = c("A");
        assert_eq!(Context::empty().fuse(&a), a);
        assert_eq!(a.fuse(&Context::empty()), a);
        assert_eq!(a.fuse(&a), a);
        let fused = c("P").fuse(&c("[P(x)]_{x}"));
        assert_eq!(fused.to_string(), "P, [P(x)]_{x}");
        assert!(fused.is_clean());
    }

    #[test]
    fn bracket_splits_by_free_variables() {
        let ctx = Context::of_formulas([f("A"), f("P(x) -> Q")]);
        assert_eq!(ctx.bracket(&vs(&["x"])).to_string(), "A, [P(x) -> Q]_{x}");
        assert_eq!(Context::empty().bracket(&vs(&["x"])), Context::empty());
    }

    #[test]
    fn bracket_collapses_with_existing_copy() {
        let ctx = c("[P(x) -> Q]_{x}, P(x) -> Q").normalize();
        assert_eq!(ctx.bracket(&vs(&["x"])).to_string(), "[P(x) -> Q]_{x}");
    }

    #[test]
    fn clean_predicate() {
        assert!(c("Q, [P(x)]_{x}").is_clean());
        assert!(!c("[Q]_{x}").is_clean());
        assert!(!c("[P(x)]_{x}, Q").is_clean());
        assert!(!c("Q, Q").is_clean());
        assert!(!c("[]_{x}").is_clean());
        assert!(!c("[Q, Q(x)]_{x}").is_clean());
    }

    #[test]
    fn depth_counts_nesting() {
        assert_eq!(c("P").depth(), 0);
        assert_eq!(c("P, [Q(x), [R(y, x)]_{y}]_{x}").depth(), 2);
    }

    #[test]
    fn rewrite_steps_cover_all_rules() {
        let steps = c("[Q, P(x)]_{x}, [Q, P(x)]_{x}, []_{y}").rewrite_steps();
        // hoist Q from either copy (same multiset), drop the duplicate, drop the empty bracket
        assert_eq!(steps.len(), 3);
        assert!(steps.contains(&c("[Q, P(x)]_{x}, []_{y}").sorted()));
        assert!(steps.contains(&c("[Q, P(x)]_{x}, [Q, P(x)]_{x}").sorted()));
        assert!(steps.contains(&c("Q, [P(x)]_{x}, [Q, P(x)]_{x}, []_{y}").sorted()));
        assert!(c("Q, [P(x)]_{x}").rewrite_steps().is_empty());
    }

    #[test]
    fn parse_and_print_roundtrip() {
        let s = "A, P(x) -> Q, [P(x) -> Q, [R(x, y)]_{y}]_{x}";
        assert_eq!(c(s).to_string(), s);
        assert_eq!(c("").len(), 0);
        assert_eq!(c("[P]_{}").to_string(), "[P]_{}");
        assert!(parse_context("[P]_x").is_err());
        assert!(parse_context("[P").is_err());
    }
}
