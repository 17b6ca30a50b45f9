//! Prefix (s-expression) notation for objective functions.
//!
//! ```text
//! expr   := number | var | "(" op expr* ")"
//! var    := "x" digits | "y" digits
//! (add e1 e2 ...)     sum              (sub a b)     a + (neg b)
//! (neg e)             negation         (mul e1 ...)  product
//! (scale c e)         c·e              (pow e k)     e^k, integer k ≥ 1
//! (abs e)             |e|
//! (affine (x c0 c1 ...) (y d0 ...) offset)
//! ```
//!
//! Example: `(sub (pow (sub x0 1) 4) (mul 2 (pow y0 2)))` is `(x−1)⁴ − 2y²`.

use std::fmt;

use super::expr::{Expr, Side};

/// Parse failure; `offset` is a character offset into the input.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for PrefixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at offset {})", self.message, self.offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(src: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                out.push((i, Token::Open));
                chars.next();
            }
            ')' => {
                out.push((i, Token::Close));
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let start = i;
                let mut end = src.len();
                while let Some(&(j, d)) = chars.peek() {
                    if d == '(' || d == ')' || d.is_whitespace() {
                        end = j;
                        break;
                    }
                    chars.next();
                }
                out.push((start, Token::Atom(&src[start..end])));
            }
        }
    }
    out
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, PrefixError> {
        Err(PrefixError {
            offset,
            message: message.into(),
        })
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn next(&mut self) -> Result<(usize, Token<'a>), PrefixError> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t.map_or_else(|| self.err(self.len, "unexpected end of expression"), Ok)
    }

    fn at_close(&self) -> bool {
        matches!(self.tokens.get(self.pos), Some((_, Token::Close)))
    }

    fn expect_close(&mut self) -> Result<(), PrefixError> {
        match self.next()? {
            (_, Token::Close) => Ok(()),
            (o, _) => self.err(o, "expected ')'"),
        }
    }

    fn number(&mut self) -> Result<f64, PrefixError> {
        match self.next()? {
            (o, Token::Atom(a)) => a
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map_or_else(|| self.err(o, format!("expected a number, found '{a}'")), Ok),
            (o, _) => self.err(o, "expected a number"),
        }
    }

    fn list_until_close(&mut self) -> Result<Vec<Expr>, PrefixError> {
        let mut items = Vec::new();
        while !self.at_close() {
            items.push(self.expr()?);
        }
        self.expect_close()?;
        Ok(items)
    }

    fn coeff_list(&mut self, head: &str) -> Result<Vec<f64>, PrefixError> {
        match self.next()? {
            (_, Token::Open) => {}
            (o, _) => return self.err(o, format!("expected '({head} ...)'")),
        }
        match self.next()? {
            (_, Token::Atom(a)) if a == head => {}
            (o, _) => return self.err(o, format!("expected '{head}' coefficient list")),
        }
        let mut v = Vec::new();
        while !self.at_close() {
            v.push(self.number()?);
        }
        self.expect_close()?;
        Ok(v)
    }

    fn expr(&mut self) -> Result<Expr, PrefixError> {
        let (o, tok) = self.next()?;
        match tok {
            Token::Close => self.err(o, "unexpected ')'"),
            Token::Atom(a) => atom(a).map_or_else(|| self.err(o, format!("unknown symbol '{a}'")), Ok),
            Token::Open => {
                let (ho, head) = self.next()?;
                let op = match head {
                    Token::Atom(h) => h,
                    _ => return self.err(ho, "expected an operator"),
                };
                let e = match op {
                    "add" => {
                        let items = self.list_until_close()?;
                        if items.is_empty() {
                            return self.err(ho, "'add' needs at least one operand");
                        }
                        return Ok(Expr::Sum(items));
                    }
                    "mul" => {
                        let items = self.list_until_close()?;
                        if items.is_empty() {
                            return self.err(ho, "'mul' needs at least one operand");
                        }
                        return Ok(Expr::Product(items));
                    }
                    "sub" => {
                        let a = self.expr()?;
                        let b = self.expr()?;
                        Expr::sub(a, b)
                    }
                    "neg" => Expr::neg(self.expr()?),
                    "abs" => Expr::abs(self.expr()?),
                    "scale" => {
                        let c = self.number()?;
                        Expr::scale(c, self.expr()?)
                    }
                    "pow" => {
                        let base = self.expr()?;
                        let ko = self.offset();
                        let k = self.number()?;
                        if k < 1.0 || k.fract() != 0.0 || k > u32::MAX as f64 {
                            return self.err(ko, format!("exponent {k} is not an integer >= 1"));
                        }
                        Expr::pow(base, k as u32)
                    }
                    "affine" => {
                        let x = self.coeff_list("x")?;
                        let y = self.coeff_list("y")?;
                        let offset = self.number()?;
                        Expr::Affine { x, y, offset }
                    }
                    other => return self.err(ho, format!("unknown operator '{other}'")),
                };
                self.expect_close()?;
                Ok(e)
            }
        }
    }
}

fn atom(a: &str) -> Option<Expr> {
    let var = |prefix: char, side: Side| {
        a.strip_prefix(prefix)
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse().ok())
            .map(|i| Expr::Var(side, i))
    };
    var('x', Side::X)
        .or_else(|| var('y', Side::Y))
        .or_else(|| a.parse::<f64>().ok().filter(|v| v.is_finite()).map(Expr::Const))
}

/// Parses one expression; trailing input is an error.
pub fn parse_expr(src: &str) -> Result<Expr, PrefixError> {
    let mut p = Parser {
        tokens: tokenize(src),
        pos: 0,
        len: src.len(),
    };
    let e = p.expr()?;
    if p.pos < p.tokens.len() {
        let o = p.offset();
        return p.err(o, "trailing input after expression");
    }
    Ok(e)
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        write!(f, "{}", v as i64)
    } else {
        write!(f, "{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, op: &str, items: &[Expr]| {
            write!(f, "({op}")?;
            for i in items {
                write!(f, " {i}")?;
            }
            write!(f, ")")
        };
        match self {
            Expr::Const(c) => write_num(f, *c),
            Expr::Var(Side::X, i) => write!(f, "x{i}"),
            Expr::Var(Side::Y, i) => write!(f, "y{i}"),
            Expr::Neg(c) => write!(f, "(neg {c})"),
            Expr::Sum(cs) => match cs.as_slice() {
                [a, Expr::Neg(b)] => write!(f, "(sub {a} {b})"),
                _ => list(f, "add", cs),
            },
            Expr::Scale(a, c) => {
                write!(f, "(scale ")?;
                write_num(f, *a)?;
                write!(f, " {c})")
            }
            Expr::Product(cs) => list(f, "mul", cs),
            Expr::Pow(c, k) => write!(f, "(pow {c} {k})"),
            Expr::Abs(c) => write!(f, "(abs {c})"),
            Expr::Affine { x, y, offset } => {
                write!(f, "(affine (x")?;
                for v in x {
                    write!(f, " ")?;
                    write_num(f, *v)?;
                }
                write!(f, ") (y")?;
                for v in y {
                    write!(f, " ")?;
                    write_num(f, *v)?;
                }
                write!(f, ") ")?;
                write_num(f, *offset)?;
                write!(f, ")")
            }
        }
    }
}
