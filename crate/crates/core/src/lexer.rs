//! Tokenizer shared by the formula, context and type parsers.

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Forall,
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
    LBracket,
    /// `]_{`, the opening of a bracket subscript.
    CloseSub,
    RBrace,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Forall => "`forall`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::CloseSub => "`]_{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `input` into `(token, byte offset)` pairs, ending with `Eof`.
pub(crate) fn tokenize(input: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let tok = match c {
            '(' => {
                chars.next();
                Tok::LParen
            }
            ')' => {
                chars.next();
                Tok::RParen
            }
            ',' => {
                chars.next();
                Tok::Comma
            }
            '.' => {
                chars.next();
                Tok::Dot
            }
            '[' => {
                chars.next();
                Tok::LBracket
            }
            '}' => {
                chars.next();
                Tok::RBrace
            }
            '-' => {
                chars.next();
                match chars.next() {
                    Some((_, '>')) => Tok::Arrow,
                    _ => return Err(ParseError::new(pos, "expected `->`")),
                }
            }
            ']' => {
                if input[pos..].starts_with("]_{") {
                    for _ in 0..3 {
                        chars.next();
                    }
                    Tok::CloseSub
                } else {
                    return Err(ParseError::new(pos, "expected `]_{` after bracket content"));
                }
            }
            c if ident_start(c) => {
                let mut end = pos;
                while let Some(&(i, c)) = chars.peek() {
                    if ident_continue(c) {
                        end = i + c.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let word = &input[pos..end];
                if word == "forall" {
                    Tok::Forall
                } else {
                    Tok::Ident(word.to_string())
                }
            }
            other => {
                return Err(ParseError::new(pos, format!("unexpected character `{other}`")));
            }
        };
        out.push((tok, pos));
    }
    out.push((Tok::Eof, input.len()));
    Ok(out)
}

/// Cursor over a token stream.
pub(crate) struct Cursor {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Cursor {
    pub(crate) fn new(input: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: tokenize(input)?, at: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub(crate) fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(
            self.offset(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}
