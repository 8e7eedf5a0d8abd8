//! Recursive-descent parser for the group DSL, ladder vectors and coefficient vectors.
//!
//! ```text
//! group   := "Z" | "Q" | "dense" "{" [profile] "}" | "lex" "(" group { "," group } ")"
//!          | "omega" "(" group ")" | "zhat_primes"
//! profile := item { "," item } [ ";" "default" ":" ("0" | "1") ]
//! item    := prime ":" (nat | "inf")
//! ```
//!
//! A profile may also consist of the default clause alone, as in `dense{;default:1}`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::arith::{self, Exp};
use crate::group::{Block, Group, GroupError, GroupExpr};
use crate::ladder::Modulus;

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    Expected(&'static str),
    UnknownName(String),
    TrivialGroup,
    NonPrimeKey(u64),
    OmegaOfCompound,
    ExceptionEqualsDefault(u64),
    DuplicateKey(u64),
    NumberTooLarge,
    ZeroModulus,
    TooDeep,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::Expected(what) => write!(f, "expected {what}"),
            ParseErrorKind::UnknownName(n) => write!(f, "unknown name {n:?}"),
            ParseErrorKind::TrivialGroup => f.write_str("the trivial group cannot be presented"),
            ParseErrorKind::NonPrimeKey(n) => write!(f, "profile key {n} is not prime"),
            ParseErrorKind::OmegaOfCompound => {
                f.write_str("omega() takes a single archimedean block")
            }
            ParseErrorKind::ExceptionEqualsDefault(p) => {
                write!(f, "exception for {p} equals the default")
            }
            ParseErrorKind::DuplicateKey(p) => write!(f, "prime {p} listed twice"),
            ParseErrorKind::NumberTooLarge => f.write_str("number out of range"),
            ParseErrorKind::ZeroModulus => f.write_str("moduli must be positive"),
            ParseErrorKind::TooDeep => f.write_str("expression nested too deeply"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {pos}: {kind}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            kind,
        })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(d) if d == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(_) => self.err(ParseErrorKind::Expected(what)),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn number(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(rest.len());
        if len == 0 {
            return match rest.chars().next() {
                Some(c) => self.err(ParseErrorKind::UnexpectedChar(c)),
                None => self.err(ParseErrorKind::UnexpectedEnd),
            };
        }
        self.pos += len;
        rest[..len].parse().map_err(|_| ParseError {
            pos: start,
            kind: ParseErrorKind::NumberTooLarge,
        })
    }

    fn signed(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        let start = self.pos;
        let n = self.number()?;
        let v = i64::try_from(n).map_err(|_| ParseError {
            pos: start,
            kind: ParseErrorKind::NumberTooLarge,
        })?;
        Ok(if neg { -v } else { v })
    }

    fn end(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(ParseErrorKind::UnexpectedChar(c)),
        }
    }

    fn group(&mut self, depth: usize) -> Result<GroupExpr, ParseError> {
        if depth > MAX_DEPTH {
            return self.err(ParseErrorKind::TooDeep);
        }
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => return self.err(ParseErrorKind::UnexpectedEnd),
            Some('0') => return self.err(ParseErrorKind::TrivialGroup),
            Some(c) if !(c.is_ascii_alphabetic() || c == '_') => {
                return self.err(ParseErrorKind::UnexpectedChar(c))
            }
            _ => {}
        }
        let name = self.word();
        match name {
            "Z" => Ok(GroupExpr::Block(Block::z())),
            "Q" => Ok(GroupExpr::Block(Block::q())),
            "zhat_primes" => Ok(GroupExpr::ZLocAllPrimes),
            "dense" => self.dense().map(GroupExpr::Block),
            "lex" => {
                self.expect('(', "'('")?;
                if self.peek() == Some(')') {
                    return self.err(ParseErrorKind::TrivialGroup);
                }
                let mut items = vec![self.group(depth + 1)?];
                while self.eat(',') {
                    items.push(self.group(depth + 1)?);
                }
                self.expect(')', "',' or ')'")?;
                Ok(GroupExpr::Lex(items))
            }
            "omega" => {
                self.expect('(', "'('")?;
                let arg_pos = {
                    self.skip_ws();
                    self.pos
                };
                let inner = self.group(depth + 1)?;
                self.expect(')', "')'")?;
                match Group::flatten(&inner) {
                    Ok(g) if g.segments().len() == 1 && g.is_finite() => {
                        Ok(GroupExpr::Omega(Box::new(inner)))
                    }
                    _ => Err(ParseError {
                        pos: arg_pos,
                        kind: ParseErrorKind::OmegaOfCompound,
                    }),
                }
            }
            other => Err(ParseError {
                pos: start,
                kind: ParseErrorKind::UnknownName(other.to_string()),
            }),
        }
    }

    fn dense(&mut self) -> Result<Block, ParseError> {
        self.expect('{', "'{'")?;
        let mut exceptions: BTreeMap<u64, (Exp, usize)> = BTreeMap::new();
        let mut default = 0u64;
        if self.peek() != Some('}') && self.peek() != Some(';') {
            loop {
                self.skip_ws();
                let key_pos = self.pos;
                let p = self.number()?;
                if !arith::is_prime(p) {
                    return Err(ParseError {
                        pos: key_pos,
                        kind: ParseErrorKind::NonPrimeKey(p),
                    });
                }
                self.expect(':', "':'")?;
                let e = if self.peek() == Some('i') {
                    match self.word() {
                        "inf" => Exp::Inf,
                        _ => return self.err(ParseErrorKind::Expected("exponent or 'inf'")),
                    }
                } else {
                    Exp::Fin(self.number()?)
                };
                if exceptions.insert(p, (e, key_pos)).is_some() {
                    return Err(ParseError {
                        pos: key_pos,
                        kind: ParseErrorKind::DuplicateKey(p),
                    });
                }
                if !self.eat(',') {
                    break;
                }
            }
        }
        if self.eat(';') {
            if self.word() != "default" {
                return self.err(ParseErrorKind::Expected("'default'"));
            }
            self.expect(':', "':'")?;
            self.skip_ws();
            default = match self.number()? {
                d @ (0 | 1) => d,
                _ => return self.err(ParseErrorKind::Expected("default 0 or 1")),
            };
        }
        self.expect('}', "'}'")?;
        if let Some((&p, &(_, pos))) = exceptions
            .iter()
            .find(|(_, (e, _))| *e == Exp::Fin(default))
        {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::ExceptionEqualsDefault(p),
            });
        }
        let exc = exceptions.into_iter().map(|(p, (e, _))| (p, e)).collect();
        Block::dense(default, exc).map_err(|e| ParseError {
            pos: self.pos,
            kind: group_error_kind(e),
        })
    }

    /// Comma-separated items, optionally wrapped in `()` or `[]`.
    fn vector<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        let close = match self.peek() {
            Some('(') => Some(')'),
            Some('[') => Some(']'),
            _ => None,
        };
        if close.is_some() {
            self.pos += 1;
        }
        let mut out = Vec::new();
        if close.is_none() || self.peek() != close {
            out.push(item(self)?);
            while self.eat(',') {
                out.push(item(self)?);
            }
        }
        if let Some(c) = close {
            self.expect(c, "',' or closing bracket")?;
        }
        self.end()?;
        Ok(out)
    }
}

fn group_error_kind(e: GroupError) -> ParseErrorKind {
    match e {
        GroupError::OmegaOfCompound => ParseErrorKind::OmegaOfCompound,
        GroupError::NonPrime(p) => ParseErrorKind::NonPrimeKey(p),
        _ => ParseErrorKind::TrivialGroup,
    }
}

/// Parses an unflattened expression.
pub fn parse_expr(text: &str) -> Result<GroupExpr, ParseError> {
    let mut p = Parser::new(text);
    let e = p.group(0)?;
    p.end()?;
    Ok(e)
}

/// Parses and flattens a group.
pub fn parse(text: &str) -> Result<Group, ParseError> {
    let e = parse_expr(text)?;
    Group::flatten(&e).map_err(|err| ParseError {
        pos: 0,
        kind: group_error_kind(err),
    })
}

/// Parses a modulus vector such as `(2,1)` or `(inf,4,1)`.
pub fn parse_ladder(text: &str) -> Result<Vec<Modulus>, ParseError> {
    let mut p = Parser::new(text);
    p.vector(|p| {
        if p.peek() == Some('i') {
            return match p.word() {
                "inf" => Ok(Modulus::Infinite),
                _ => p.err(ParseErrorKind::Expected("modulus or 'inf'")),
            };
        }
        let at = p.pos;
        let n = p.number()?;
        Modulus::from_u64(n).map_err(|_| ParseError {
            pos: at,
            kind: ParseErrorKind::ZeroModulus,
        })
    })
}

/// Parses a coefficient vector such as `(1,0,-2)`.
pub fn parse_coeffs(text: &str) -> Result<Vec<i64>, ParseError> {
    Parser::new(text).vector(Parser::signed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Segment;

    #[test]
    fn parses_worked_example() {
        let g = parse("lex(Q, dense{2:inf}, dense{2:inf,3:inf})").unwrap();
        assert_eq!(g.to_string(), "lex(Q, dense{2:inf}, dense{2:inf,3:inf})");
        assert_eq!(g.num_blocks(), Some(3));
    }

    #[test]
    fn basic_forms() {
        assert_eq!(parse("Z").unwrap().to_string(), "Z");
        assert_eq!(parse("dense{}").unwrap().to_string(), "Q");
        assert_eq!(
            parse(" lex( lex(Z ,Q), Z )").unwrap().to_string(),
            "lex(Z, Q, Z)"
        );
        assert_eq!(
            parse("dense{3:0;default:1}").unwrap().to_string(),
            "dense{3:0;default:1}"
        );
        assert_eq!(
            parse("dense{;default:1}").unwrap().to_string(),
            "dense{;default:1}"
        );
        assert_eq!(
            parse("omega(lex(dense{2:1}))").unwrap().segments(),
            &[Segment::Omega(
                crate::group::Block::dense(0, [(2, Exp::Fin(1))].into()).unwrap()
            )]
        );
        assert_eq!(parse("zhat_primes").unwrap().to_string(), "zhat_primes");
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            parse("dense{2:0}").unwrap_err().kind,
            ParseErrorKind::ExceptionEqualsDefault(2)
        );
        assert_eq!(
            parse("dense{4:1}").unwrap_err().kind,
            ParseErrorKind::NonPrimeKey(4)
        );
        assert_eq!(
            parse("dense{2:1,2:3}").unwrap_err().kind,
            ParseErrorKind::DuplicateKey(2)
        );
        assert_eq!(
            parse("lex()").unwrap_err().kind,
            ParseErrorKind::TrivialGroup
        );
        assert_eq!(parse("0").unwrap_err().kind, ParseErrorKind::TrivialGroup);
        assert_eq!(
            parse("omega(lex(Z,Z))").unwrap_err().kind,
            ParseErrorKind::OmegaOfCompound
        );
        assert_eq!(
            parse("omega(zhat_primes)").unwrap_err().kind,
            ParseErrorKind::OmegaOfCompound
        );
        let e = parse("lex(Z, W)").unwrap_err();
        assert_eq!(
            (e.pos, e.kind),
            (7, ParseErrorKind::UnknownName("W".into()))
        );
        assert_eq!(parse("Z Z").unwrap_err().pos, 2);
        assert_eq!(parse("").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        let deep = "lex(".repeat(500) + "Z" + &")".repeat(500);
        assert_eq!(parse(&deep).unwrap_err().kind, ParseErrorKind::TooDeep);
    }

    #[test]
    fn vectors() {
        let l = parse_ladder("(inf, 4, 1)").unwrap();
        assert_eq!(
            l,
            vec![
                Modulus::Infinite,
                Modulus::from_u64(4).unwrap(),
                Modulus::one()
            ]
        );
        assert_eq!(
            parse_ladder("(0)").unwrap_err().kind,
            ParseErrorKind::ZeroModulus
        );
        assert_eq!(parse_coeffs("(1, 0, -2)").unwrap(), vec![1, 0, -2]);
        assert_eq!(parse_coeffs("3,4").unwrap(), vec![3, 4]);
        assert_eq!(parse_coeffs("[]").unwrap(), Vec::<i64>::new());
        assert!(parse_coeffs("(1,").is_err());
    }
}
