//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula    := quantified | iff
//! quantified := ("forall" | "exists") var {"," var} "." formula
//! iff        := implies {"<->" implies}
//! implies    := or ["->" implies]
//! or         := and {"|" and}
//! and        := unary {"&" unary}
//! unary      := "!" unary | primary
//! primary    := "(" formula ")" | "true" | "false" | quantified
//!             | Rel ["(" var {"," var} ")"] | var ("=" | "!=") var
//! ```
//!
//! Variables start with a lowercase letter, relations with an uppercase one.
//! `#` starts a comment running to the end of the line.

use std::collections::BTreeMap;

use super::formula::{self as f, Formula, Quantifier};
use super::vocab::{RelationSymbol, WeightedVocabulary};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    EqSign,
    NotEq,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: start.0,
                col: start.1,
            })
        };
        let peek = chars.get(i + 1).copied();
        let mut width = 1;
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            ',' => push(&mut out, Tok::Comma),
            '.' => push(&mut out, Tok::Dot),
            '&' => push(&mut out, Tok::Amp),
            '|' => push(&mut out, Tok::Pipe),
            '=' => push(&mut out, Tok::EqSign),
            '!' if peek == Some('=') => {
                push(&mut out, Tok::NotEq);
                width = 2;
            }
            '!' => push(&mut out, Tok::Bang),
            '-' if peek == Some('>') => {
                push(&mut out, Tok::Arrow);
                width = 2;
            }
            '<' if peek == Some('-') && chars.get(i + 2) == Some(&'>') => {
                push(&mut out, Tok::DoubleArrow);
                width = 3;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                push(&mut out, Tok::Ident(chars[i..j].iter().collect()));
                width = j - i;
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                push(&mut out, Tok::Number(chars[i..j].iter().collect()));
                width = j - i;
            }
            other => return Err(Error::parse(line, col, format!("unexpected character `{other}`"))),
        }
        i += width;
        col += width;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

enum Signature<'a> {
    Declared(&'a WeightedVocabulary),
    Inferred(BTreeMap<String, usize>),
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    sig: Signature<'a>,
}

const KEYWORDS: [&str; 4] = ["forall", "exists", "true", "false"];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::parse(line, col, message))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn variable(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(name) if is_variable(&name) => {
                self.bump();
                Ok(name)
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => self.error(format!(
                "expected a variable, found `{name}` (constants are not allowed; variables start lowercase)"
            )),
            Tok::Number(n) => self.error(format!("constants such as `{n}` are not allowed")),
            other => self.error(format!("expected a variable, found {}", describe(&other))),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        self.iff()
    }

    fn quantified(&mut self, q: Quantifier) -> Result<Formula> {
        let mut vars = vec![self.variable()?];
        while self.eat(&Tok::Comma) {
            vars.push(self.variable()?);
        }
        self.expect(Tok::Dot, "`.` after quantified variables")?;
        let body = self.formula()?;
        Ok(vars.iter().rev().fold(body, |acc, v| f::quantify(q, v, acc)))
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::DoubleArrow) {
            lhs = f::iff(lhs, self.implies()?);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            Ok(f::implies(lhs, self.implies()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            lhs = f::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            lhs = f::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Bang) {
            Ok(f::not(self.unary()?))
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        let (line, col) = self.here();
        match self.bump() {
            Tok::LParen => {
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(word) => match word.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                "forall" => self.quantified(Quantifier::Forall),
                "exists" => self.quantified(Quantifier::Exists),
                name if is_variable(name) => {
                    let negated = match self.bump() {
                        Tok::EqSign => false,
                        Tok::NotEq => true,
                        other => {
                            return Err(Error::parse(
                                line,
                                col,
                                format!(
                                    "variable `{name}` must be followed by `=` or `!=`, found {}",
                                    describe(&other)
                                ),
                            ))
                        }
                    };
                    let rhs = self.variable()?;
                    let e = f::eq(name, &rhs);
                    Ok(if negated { f::not(e) } else { e })
                }
                name if name.starts_with(|c: char| c.is_ascii_uppercase()) => {
                    let mut args = Vec::new();
                    if self.eat(&Tok::LParen) {
                        if !self.eat(&Tok::RParen) {
                            args.push(self.variable()?);
                            while self.eat(&Tok::Comma) {
                                args.push(self.variable()?);
                            }
                            self.expect(Tok::RParen, "`)` closing the argument list")?;
                        }
                    }
                    self.check_symbol(name, args.len(), line, col)?;
                    Ok(Formula::Atom {
                        rel: name.to_string(),
                        args,
                    })
                }
                other => Err(Error::parse(line, col, format!("unexpected identifier `{other}`"))),
            },
            Tok::Number(n) => Err(Error::parse(
                line,
                col,
                format!("constants such as `{n}` are not allowed"),
            )),
            other => Err(Error::parse(
                line,
                col,
                format!("expected a formula, found {}", describe(&other)),
            )),
        }
    }

    fn check_symbol(&mut self, name: &str, found: usize, line: usize, col: usize) -> Result<()> {
        let expected = match &mut self.sig {
            Signature::Declared(v) => match v.arity(name) {
                Some(a) => a,
                None => return Err(Error::UndeclaredSymbol(name.to_string())),
            },
            Signature::Inferred(map) => *map.entry(name.to_string()).or_insert(found),
        };
        if expected != found {
            let _ = (line, col);
            return Err(Error::ArityMismatch {
                name: name.to_string(),
                expected,
                found,
            });
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(format!("unexpected {} after formula", describe(self.peek())))
        }
    }
}

fn is_variable(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_lowercase()) && !KEYWORDS.contains(&name)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Pipe => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::DoubleArrow => "`<->`".into(),
        Tok::EqSign => "`=`".into(),
        Tok::NotEq => "`!=`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses `text`; every relation must be declared in `vocab` with the arity
/// it is used at.
pub fn parse(text: &str, vocab: &WeightedVocabulary) -> Result<Formula> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        sig: Signature::Declared(vocab),
    };
    let out = p.formula()?;
    p.finish()?;
    Ok(out)
}

/// Parses `text` without a vocabulary, inferring each relation's arity from
/// its first use. Later uses must agree.
pub fn parse_inferring(text: &str) -> Result<(Formula, Vec<RelationSymbol>)> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        sig: Signature::Inferred(BTreeMap::new()),
    };
    let out = p.formula()?;
    p.finish()?;
    let Signature::Inferred(map) = p.sig else {
        unreachable!()
    };
    let symbols = map
        .into_iter()
        .map(|(name, arity)| RelationSymbol { name, arity })
        .collect();
    Ok((out, symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::{and, atom, eq, not, or};

    fn vocab() -> WeightedVocabulary {
        WeightedVocabulary::unit([
            RelationSymbol::new("R", 2),
            RelationSymbol::new("S", 1),
            RelationSymbol::new("T", 1),
            RelationSymbol::new("P", 0),
        ])
        .unwrap()
    }

    #[test]
    fn nested_quantifiers() {
        let got = parse("forall x. exists y. R(x,y)", &vocab()).unwrap();
        let want = Formula::Forall(
            "x".into(),
            Box::new(Formula::Exists("y".into(), Box::new(atom("R", ["x", "y"])))),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn precedence() {
        let got = parse("R(x,y) | !S(x) & T(y)", &vocab()).unwrap();
        let want = or(atom("R", ["x", "y"]), and(not(atom("S", ["x"])), atom("T", ["y"])));
        assert_eq!(got, want);
        let got = parse("P -> P -> P <-> P", &vocab()).unwrap();
        assert!(matches!(got, Formula::Iff(..)));
    }

    #[test]
    fn equality_and_nullary() {
        let got = parse("x = y & x != y | P", &vocab()).unwrap();
        let want = or(and(eq("x", "y"), not(eq("x", "y"))), atom::<&str>("P", []));
        assert_eq!(got, want);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse("R(x,y,z)", &vocab()),
            Err(Error::ArityMismatch { expected: 2, found: 3, .. })
        ));
        assert!(matches!(parse("Q(x)", &vocab()), Err(Error::UndeclaredSymbol(_))));
        match parse("forall x.\n  R(x, 1)", &vocab()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("{other:?}"),
        }
        assert!(parse("R(x,Y)", &vocab()).is_err());
        assert!(parse("forall x R(x,x)", &vocab()).is_err());
        assert!(parse("S(x) S(x)", &vocab()).is_err());
    }

    #[test]
    fn comments_and_inference() {
        let (f, syms) = parse_inferring("# header\nexists x. A(x) # trailing\n& B").unwrap();
        assert_eq!(f.to_string(), "exists x. A(x) & B");
        assert_eq!(syms, vec![RelationSymbol::new("A", 1), RelationSymbol::new("B", 0)]);
        assert!(parse_inferring("A(x) & A(x,y)").is_err());
    }
}
