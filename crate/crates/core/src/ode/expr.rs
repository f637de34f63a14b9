//! Arithmetic expressions for vector fields.
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' integer)?
//! base   := number | 't' | 'x' digits | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | tanh
//! ```
//!
//! Numbers are unsigned decimals with an optional exponent. There is no
//! unary minus; write `0 - x1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "tanh" => Some(Func::Tanh),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Tanh => v.tanh(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree over `t`, `x1..xn` and constants.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldExpr {
    Num(f64),
    Time,
    /// Zero-based component index (`x1` is `Var(0)`).
    Var(usize),
    Binary(BinOp, Box<FieldExpr>, Box<FieldExpr>),
    Pow(Box<FieldExpr>, u32),
    Call(Func, Box<FieldExpr>),
}

impl FieldExpr {
    /// Parses and checks that every variable index is at most `dim`.
    pub fn parse_with_dim(text: &str, dim: usize) -> Result<FieldExpr> {
        let mut parser = Parser::new(text)?;
        let expr = parser.expr()?;
        parser.expect_end()?;
        if let Some((pos, index)) = parser.vars.iter().find(|(_, i)| *i > dim) {
            return Err(Error::VariableIndex {
                pos: *pos,
                index: *index,
                dim,
            });
        }
        Ok(expr)
    }

    pub fn constant(c: f64) -> FieldExpr {
        FieldExpr::Num(c)
    }

    /// Largest one-based variable index used, or 0.
    pub fn max_var(&self) -> usize {
        match self {
            FieldExpr::Num(_) | FieldExpr::Time => 0,
            FieldExpr::Var(i) => i + 1,
            FieldExpr::Binary(_, a, b) => a.max_var().max(b.max_var()),
            FieldExpr::Pow(a, _) | FieldExpr::Call(_, a) => a.max_var(),
        }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            FieldExpr::Num(c) => *c,
            FieldExpr::Time => t,
            FieldExpr::Var(i) => x[*i],
            FieldExpr::Binary(op, a, b) => {
                let (a, b) = (a.eval(t, x), b.eval(t, x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            FieldExpr::Pow(a, k) => a.eval(t, x).powi(*k as i32),
            FieldExpr::Call(f, a) => f.apply(a.eval(t, x)),
        }
    }

    /// True when the expression is a literal zero.
    pub fn is_zero(&self) -> bool {
        matches!(self, FieldExpr::Num(c) if *c == 0.0)
    }
}

impl FromStr for FieldExpr {
    type Err = Error;

    /// Parses without a dimension bound; only `x0` is rejected.
    fn from_str(text: &str) -> Result<FieldExpr> {
        FieldExpr::parse_with_dim(text, usize::MAX)
    }
}

/// Fully parenthesized form that reparses to the same tree.
impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldExpr::Num(c) => write!(f, "{c:?}"),
            FieldExpr::Time => write!(f, "t"),
            FieldExpr::Var(i) => write!(f, "x{}", i + 1),
            FieldExpr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            FieldExpr::Pow(a, k) => write!(f, "({a})^{k}"),
            FieldExpr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, integer: Option<u32> },
    Ident(String),
    Var(usize),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    vars: Vec<(usize, usize)>,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((start, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut integer = true;
                if i < bytes.len() && bytes[i] == b'.' {
                    integer = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integer = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                let value: f64 = s.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number `{s}`"),
                })?;
                let integer = if integer { s.parse::<u32>().ok() } else { None };
                out.push((start, Tok::Num { value, integer }));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    i += 1;
                }
                let name = &text[start..i];
                if name == "x" {
                    let ds = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if ds == i {
                        return Err(Error::UnknownIdentifier {
                            pos: start,
                            name: "x".into(),
                        });
                    }
                    let index: usize = text[ds..i].parse().map_err(|_| Error::Syntax {
                        pos: ds,
                        msg: "variable index too large".into(),
                    })?;
                    if index == 0 {
                        return Err(Error::VariableIndex {
                            pos: start,
                            index: 0,
                            dim: 0,
                        });
                    }
                    out.push((start, Tok::Var(index)));
                } else {
                    out.push((start, Tok::Ident(name.to_string())));
                }
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", c as char),
                })
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            vars: Vec::new(),
        })
    }

    fn peek(&self) -> &(usize, Tok) {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            (_, Tok::End) => Ok(()),
            (pos, tok) => Err(Error::Syntax {
                pos: *pos,
                msg: format!("unexpected {tok:?} after expression"),
            }),
        }
    }

    fn expr(&mut self) -> Result<FieldExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().1 {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = FieldExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<FieldExpr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().1 {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = FieldExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<FieldExpr> {
        let base = self.base()?;
        if self.peek().1 != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        match self.bump() {
            (_, Tok::Num { integer: Some(k), .. }) => Ok(FieldExpr::Pow(Box::new(base), k)),
            (pos, _) => Err(Error::Syntax {
                pos,
                msg: "non-integer exponent: `^` must be followed by an unsigned integer".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<FieldExpr> {
        match self.bump() {
            (_, Tok::Num { value, .. }) => Ok(FieldExpr::Num(value)),
            (pos, Tok::Var(index)) => {
                self.vars.push((pos, index));
                Ok(FieldExpr::Var(index - 1))
            }
            (pos, Tok::Ident(name)) => {
                if name == "t" {
                    return Ok(FieldExpr::Time);
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(Error::UnknownIdentifier { pos, name });
                };
                self.expect(Tok::LParen, "`(` after function name")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(FieldExpr::Call(func, Box::new(arg)))
            }
            (_, Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            (pos, Tok::End) => Err(Error::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            (pos, tok) => Err(Error::Syntax {
                pos,
                msg: format!("unexpected {tok:?}"),
            }),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let (pos, tok) = self.bump();
        if tok == want {
            Ok(())
        } else {
            Err(Error::Syntax {
                pos,
                msg: format!("expected {what}"),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<FieldExpr> {
        s.parse()
    }

    #[test]
    fn identity_component() {
        assert_eq!(parse("x1").unwrap(), FieldExpr::Var(0));
        assert_eq!(parse(" x1 ").unwrap().eval(0.0, &[4.5]), 4.5);
    }

    #[test]
    fn tree_shape() {
        let e = parse("t*x2 + 1").unwrap();
        let expected = FieldExpr::Binary(
            BinOp::Add,
            Box::new(FieldExpr::Binary(
                BinOp::Mul,
                Box::new(FieldExpr::Time),
                Box::new(FieldExpr::Var(1)),
            )),
            Box::new(FieldExpr::Num(1.0)),
        );
        assert_eq!(e, expected);
        assert_eq!(e.eval(2.0, &[0.0, 3.0]), 7.0);
    }

    #[test]
    fn rejects_non_integer_exponent() {
        assert!(matches!(parse("x1^(1/2)"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("x1^2.5"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse("1 + foo(2)"), Err(Error::UnknownIdentifier { pos: 4, .. })));
        assert!(matches!(parse("x0"), Err(Error::VariableIndex { index: 0, .. })));
        assert!(matches!(
            FieldExpr::parse_with_dim("x1 + x3", 2),
            Err(Error::VariableIndex { pos: 5, index: 3, dim: 2 })
        ));
        assert!(matches!(parse("(x1"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("-x1"), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse("x1 x2"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("2 $ 3"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn functions_and_precedence() {
        let e = parse("2*sin(t)^2 + cos(t)^2*2 - exp(0)/tanh(1)").unwrap();
        let t = 0.7_f64;
        let want = 2.0 * t.sin().powi(2) + t.cos().powi(2) * 2.0 - 1.0 / 1f64.tanh();
        assert!((e.eval(t, &[]) - want).abs() < 1e-15);
        assert_eq!(parse("8/2/2").unwrap().eval(0.0, &[]), 2.0);
        assert_eq!(parse("1.5e-3").unwrap(), FieldExpr::Num(1.5e-3));
    }

    fn arb_expr() -> impl Strategy<Value = FieldExpr> {
        let leaf = prop_oneof![
            (0.0..1e3f64).prop_map(FieldExpr::Num),
            Just(FieldExpr::Time),
            (0usize..3).prop_map(FieldExpr::Var),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), 0usize..4).prop_map(|(a, b, k)| {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][k];
                    FieldExpr::Binary(op, Box::new(a), Box::new(b))
                }),
                (inner.clone(), 0u32..5).prop_map(|(a, k)| FieldExpr::Pow(Box::new(a), k)),
                (inner, 0usize..4).prop_map(|(a, k)| {
                    let f = [Func::Sin, Func::Cos, Func::Exp, Func::Tanh][k];
                    FieldExpr::Call(f, Box::new(a))
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn unparse_reparses_to_same_tree(e in arb_expr()) {
            let text = e.to_string();
            prop_assert_eq!(parse(&text).unwrap(), e);
        }
    }
}
