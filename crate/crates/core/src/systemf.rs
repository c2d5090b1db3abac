//! Inhabitation of positive System F types.
//!
//! A type is translated homomorphically into a formula over one unary
//! predicate `eps`: `X ↦ eps(X)`, `T → U ↦ Φ(T) → Φ(U)`, `∀X T ↦ ∀X Φ(T)`.
//! For positive types, the type is inhabited iff the translation is provable.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LogicError, ParseError};
use crate::lexer::{Cursor, Tok};
use crate::prover::{derivable_with, Outcome, SearchOptions};
use crate::syntax::{misplaced_quantifier, Atom, Formula, Polarity, Term};

/// The predicate standing for "is inhabited".
pub const EPS: &str = "eps";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FType {
    Var(String),
    Arrow(Box<FType>, Box<FType>),
    Forall(String, Box<FType>),
}

impl FType {
    pub fn var(x: impl Into<String>) -> Self {
        FType::Var(x.into())
    }

    pub fn arrow(a: FType, b: FType) -> Self {
        FType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn forall(x: impl Into<String>, body: FType) -> Self {
        FType::Forall(x.into(), Box::new(body))
    }

    pub fn connectives(&self) -> usize {
        match self {
            FType::Var(_) => 0,
            FType::Arrow(a, b) => 1 + a.connectives() + b.connectives(),
            FType::Forall(_, b) => 1 + b.connectives(),
        }
    }
}

impl fmt::Display for FType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FType::Var(x) => f.write_str(x),
            FType::Arrow(a, b) => match **a {
                FType::Var(_) => write!(f, "{a} -> {b}"),
                _ => write!(f, "({a}) -> {b}"),
            },
            FType::Forall(x, body) => match **body {
                FType::Arrow(..) => write!(f, "forall {x}. ({body})"),
                _ => write!(f, "forall {x}. {body}"),
            },
        }
    }
}

impl std::str::FromStr for FType {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_type(s)
    }
}

/// `type := "forall" IDENT "." type | atom ("->" type)?`, `atom := IDENT | "(" type ")"`.
pub fn parse_type(input: &str) -> Result<FType, ParseError> {
    let mut cur = Cursor::new(input)?;
    let t = ty(&mut cur)?;
    cur.finish()?;
    Ok(t)
}

fn ty(cur: &mut Cursor) -> Result<FType, ParseError> {
    if cur.eat(&Tok::Forall) {
        let x = cur.ident()?;
        cur.expect(&Tok::Dot)?;
        return Ok(FType::forall(x, ty(cur)?));
    }
    let lhs = match cur.peek() {
        Tok::Ident(_) => FType::Var(cur.ident()?),
        Tok::LParen => {
            cur.bump();
            let t = ty(cur)?;
            cur.expect(&Tok::RParen)?;
            t
        }
        _ => return Err(cur.unexpected("type variable, `(` or `forall`")),
    };
    if cur.eat(&Tok::Arrow) {
        Ok(FType::arrow(lhs, ty(cur)?))
    } else {
        Ok(lhs)
    }
}

pub fn phi(t: &FType) -> Formula {
    match t {
        FType::Var(x) => Formula::atom(EPS, vec![Term::var(x.clone())]),
        FType::Arrow(a, b) => Formula::imp(phi(a), phi(b)),
        FType::Forall(x, body) => Formula::forall(x.clone(), phi(body)),
    }
}

pub fn type_polarity(t: &FType) -> Polarity {
    fn flags(t: &FType) -> (bool, bool) {
        match t {
            FType::Var(_) => (true, true),
            FType::Arrow(a, b) => {
                let (ap, an) = flags(a);
                let (bp, bn) = flags(b);
                (an && bp, ap && bn)
            }
            FType::Forall(_, body) => (flags(body).0, false),
        }
    }
    match flags(t) {
        (true, true) => Polarity::Both,
        (true, false) => Polarity::Positive,
        (false, true) => Polarity::Negative,
        (false, false) => Polarity::Neither,
    }
}

/// Prints `eps(X)` as `X`, the usual way of writing translated types.
pub fn type_notation(a: &Atom) -> String {
    match a.args.as_slice() {
        [t] if a.pred == EPS => t.to_string(),
        _ => a.to_string(),
    }
}

pub fn inhabited(t: &FType) -> Result<Outcome, LogicError> {
    inhabited_with(t, SearchOptions::default())
}

/// Decides inhabitation of a positive type. Non-positive types are refused:
/// inhabitation is undecidable in general.
pub fn inhabited_with(t: &FType, options: SearchOptions) -> Result<Outcome, LogicError> {
    let f = phi(t);
    if !type_polarity(t).is_positive() {
        let m = misplaced_quantifier(&f).expect("non-positive type has a misplaced quantifier");
        return Err(LogicError::NotPositive(m));
    }
    derivable_with(&f, options)
}

/// A random type with at most `size` nodes over variables `X0..X3`, used by
/// property tests. Any polarity can occur.
pub fn generate_type(seed: u64, size: usize) -> FType {
    fn go(rng: &mut ChaCha8Rng, budget: usize, binders: &mut usize) -> FType {
        if budget <= 1 {
            return FType::var(format!("X{}", rng.gen_range(0..4)));
        }
        if budget == 2 || rng.gen_bool(0.3) {
            let x = format!("X{}", *binders % 4);
            *binders += 1;
            return FType::forall(x, go(rng, budget - 1, binders));
        }
        let left = rng.gen_range(1..=budget - 2);
        let a = go(rng, left, binders);
        FType::arrow(a, go(rng, budget - 1 - left, binders))
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = rng.gen_range(1..=size.max(1));
    go(&mut rng, budget, &mut 0)
}
