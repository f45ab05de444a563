//! Recursive-descent parser for the formula text syntax.
//!
//! ```text
//! formula  := implic
//! implic   := orexpr [ "->" implic ]
//! orexpr   := andexpr { "|" andexpr }
//! andexpr  := until { "&" until }
//! until    := unary [ "U" [bound] until ]
//! unary    := "!" unary | ("G"|"F") [bound] unary | exists | atom | "(" formula ")"
//!           | "TRUE" | "FALSE"
//! bound    := "[>=" intval "]" | "[<=" intval "]" | "[>=" intval "][<=" intval "]"
//! exists   := "E" intval { "via" "(" edgeatom ")" } ":" unary
//! atom     := "x" ("<="|">=") numval
//! edgeatom := "y" ("<="|">=") numval
//! intval   := integer | "?" name
//! numval   := number | "?" name
//! ```
//!
//! Neighbor chains apply their `via` steps left to right.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Atom, EdgeAtom, Formula, TimeBound, Value};
use crate::graph::Comparison;
use crate::{Error, ParseError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Le,
    Ge,
    Arrow,
    Bar,
    Amp,
    Bang,
    Colon,
    Param(String),
    Word(String),
    Number(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Param(p) => format!("parameter `?{p}`"),
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> core::result::Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, found: String, expected: &[&str]| ParseError {
        line,
        column,
        found,
        expected: expected.iter().map(|s| s.to_string()).collect(),
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        let next = chars.get(i + 1).copied();
        let tok = match c {
            '(' => {
                advance(1, &mut i);
                Tok::LParen
            }
            ')' => {
                advance(1, &mut i);
                Tok::RParen
            }
            '[' => {
                advance(1, &mut i);
                Tok::LBracket
            }
            ']' => {
                advance(1, &mut i);
                Tok::RBracket
            }
            '|' => {
                advance(1, &mut i);
                Tok::Bar
            }
            '&' => {
                advance(1, &mut i);
                Tok::Amp
            }
            '!' => {
                advance(1, &mut i);
                Tok::Bang
            }
            ':' => {
                advance(1, &mut i);
                Tok::Colon
            }
            '<' if next == Some('=') => {
                advance(2, &mut i);
                Tok::Le
            }
            '>' if next == Some('=') => {
                advance(2, &mut i);
                Tok::Ge
            }
            '-' if next == Some('>') => {
                advance(2, &mut i);
                Tok::Arrow
            }
            '?' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == start || chars[start].is_ascii_digit() {
                    return Err(err(line, col + 1, "missing parameter name".into(), &["name"]));
                }
                let name: String = chars[start..j].iter().collect();
                advance(j - i, &mut i);
                Tok::Param(name)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let w: String = chars[i..j].iter().collect();
                advance(j - i, &mut i);
                Tok::Word(w)
            }
            c if c.is_ascii_digit()
                || c == '.'
                || (c == '-' && next.is_some_and(|n| n.is_ascii_digit() || n == '.')) =>
            {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let n: String = chars[i..j].iter().collect();
                advance(j - i, &mut i);
                Tok::Number(n)
            }
            other => {
                return Err(err(line, col, format!("unexpected character `{other}`"), &[]));
            }
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = core::result::Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            column: s.column,
            found: s.tok.describe(),
            expected: expected.iter().map(|e| e.to_string()).collect(),
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn expect(&mut self, tok: Tok, label: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[w]))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.or_expr()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> PResult<Formula> {
        let mut f = self.and_expr()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            f = f.or(self.and_expr()?);
        }
        Ok(f)
    }

    fn and_expr(&mut self) -> PResult<Formula> {
        let mut f = self.until()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = f.and(self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> PResult<Formula> {
        let lhs = self.unary()?;
        if self.is_word("U") {
            self.bump();
            let bound = self.bound()?;
            let rhs = self.until()?;
            return Ok(Formula::until(bound, lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        const START: &[&str] = &["`!`", "`(`", "G", "F", "E", "x", "TRUE", "FALSE"];
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Word(w) => match w.as_str() {
                "TRUE" => {
                    self.bump();
                    Ok(Formula::True)
                }
                "FALSE" => {
                    self.bump();
                    Ok(Formula::False)
                }
                "G" | "F" => {
                    self.bump();
                    let bound = self.bound()?;
                    let body = self.unary()?;
                    Ok(if w == "G" {
                        Formula::always(bound, body)
                    } else {
                        Formula::eventually(bound, body)
                    })
                }
                "E" => {
                    self.bump();
                    self.exists()
                }
                "x" => {
                    self.bump();
                    let (cmp, threshold) = self.comparison()?;
                    Ok(Formula::Atom(Atom { cmp, threshold }))
                }
                _ => Err(self.error(START)),
            },
            _ => Err(self.error(START)),
        }
    }

    fn exists(&mut self) -> PResult<Formula> {
        let count = self.int_value()?;
        let mut chain = Vec::new();
        while self.is_word("via") {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            self.expect_word("y")?;
            let (cmp, threshold) = self.comparison()?;
            self.expect(Tok::RParen, "`)`")?;
            chain.push(EdgeAtom { cmp, threshold });
        }
        if chain.is_empty() {
            return Err(self.error(&["via"]));
        }
        self.expect(Tok::Colon, "`:`")?;
        let body = self.unary()?;
        Ok(Formula::Exists {
            count,
            chain,
            body: Box::new(body),
        })
    }

    fn comparison(&mut self) -> PResult<(Comparison, Value<f64>)> {
        let cmp = match self.peek() {
            Tok::Le => Comparison::Le,
            Tok::Ge => Comparison::Ge,
            _ => return Err(self.error(&["`<=`", "`>=`"])),
        };
        self.bump();
        Ok((cmp, self.num_value()?))
    }

    fn num_value(&mut self) -> PResult<Value<f64>> {
        match self.peek().clone() {
            Tok::Param(p) => {
                self.bump();
                Ok(Value::Param(p))
            }
            Tok::Number(n) => match n.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    self.bump();
                    Ok(Value::Lit(v))
                }
                _ => Err(self.error(&["finite number"])),
            },
            _ => Err(self.error(&["number", "parameter"])),
        }
    }

    fn int_value(&mut self) -> PResult<Value<u32>> {
        match self.peek().clone() {
            Tok::Param(p) => {
                self.bump();
                Ok(Value::Param(p))
            }
            Tok::Number(n) => match n.parse::<u32>() {
                Ok(v) => {
                    self.bump();
                    Ok(Value::Lit(v))
                }
                Err(_) => Err(self.error(&["non-negative integer"])),
            },
            _ => Err(self.error(&["integer", "parameter"])),
        }
    }

    fn bound(&mut self) -> PResult<TimeBound> {
        // `[` followed by a comparison opens a bound; a bare `[` never starts a formula.
        if *self.peek() != Tok::LBracket || !matches!(self.peek_at(1), Tok::Le | Tok::Ge) {
            return Ok(TimeBound::Unbounded);
        }
        self.bump();
        let first = self.bump();
        let v = self.int_value()?;
        self.expect(Tok::RBracket, "`]`")?;
        match first {
            Tok::Le => Ok(TimeBound::AtMost(v)),
            _ => {
                if *self.peek() == Tok::LBracket && *self.peek_at(1) == Tok::Le {
                    self.bump();
                    self.bump();
                    let hi = self.int_value()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    Ok(TimeBound::Window(v, hi))
                } else {
                    Ok(TimeBound::AtLeast(v))
                }
            }
        }
    }
}

/// Parses formula text. Each named parameter may occur only once.
pub fn parse(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p
            .error(&["`->`", "`|`", "`&`", "U", "end of input"])
            .into());
    }
    let mut seen = BTreeSet::new();
    for (name, _) in f.params() {
        if !seen.insert(name.clone()) {
            return Err(Error::DuplicateParameter(name));
        }
    }
    Ok(f)
}
