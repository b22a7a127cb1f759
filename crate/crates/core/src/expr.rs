//! Tiny arithmetic language for user-supplied Hamiltonians and perturbations.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `abs sqrt ln exp sin cos max min`. A piecewise definition is a
//! list of `(condition, expr)` pairs tried in order; a condition compares two
//! expressions with `< <= > >=`.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct ExprError(pub String);

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Abs,
    Sqrt,
    Ln,
    Exp,
    Sin,
    Cos,
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Node::Num(c) => *c,
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval(vars),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::Pow(a, b) => a.eval(vars).powf(b.eval(vars)),
            Node::Call(f, args) => {
                let x = args[0].eval(vars);
                match f {
                    Func::Abs => x.abs(),
                    Func::Sqrt => x.sqrt(),
                    Func::Ln => x.ln(),
                    Func::Exp => x.exp(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Max => args[1..].iter().map(|a| a.eval(vars)).fold(x, f64::max),
                    Func::Min => args[1..].iter().map(|a| a.eval(vars)).fold(x, f64::min),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Op(char),
    Cmp(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(
                s.parse()
                    .map_err(|_| ExprError(format!("bad number `{s}`")))?,
            ));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Name(chars[start..i].iter().collect()));
        } else if c == '<' || c == '>' {
            let eq = chars.get(i + 1) == Some(&'=');
            out.push(Tok::Cmp(match (c, eq) {
                ('<', true) => "<=",
                ('<', false) => "<",
                ('>', true) => ">=",
                _ => ">",
            }));
            i += if eq { 2 } else { 1 };
        } else if "+-*/^(),".contains(c) || c == '×' || c == '÷' || c == '−' {
            out.push(Tok::Op(match c {
                '×' => '*',
                '÷' => '/',
                '−' => '-',
                c => c,
            }));
            i += 1;
        } else {
            return Err(ExprError(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat_op('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat_op('^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(c)) => {
                self.pos += 1;
                Ok(Node::Num(c))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat_op(')') {
                    return Err(ExprError("expected `)`".into()));
                }
                Ok(e)
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                if self.eat_op('(') {
                    let f = match name.as_str() {
                        "abs" => Func::Abs,
                        "sqrt" => Func::Sqrt,
                        "ln" => Func::Ln,
                        "exp" => Func::Exp,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "max" => Func::Max,
                        "min" => Func::Min,
                        _ => return Err(ExprError(format!("unknown function `{name}`"))),
                    };
                    let mut args = vec![self.expr()?];
                    while self.eat_op(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat_op(')') {
                        return Err(ExprError("expected `)` after arguments".into()));
                    }
                    let arity_ok = match f {
                        Func::Max | Func::Min => args.len() >= 2,
                        _ => args.len() == 1,
                    };
                    if !arity_ok {
                        return Err(ExprError(format!("wrong number of arguments to `{name}`")));
                    }
                    return Ok(Node::Call(f, args));
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                self.vars
                    .iter()
                    .position(|v| *v == name)
                    .map(Node::Var)
                    .ok_or_else(|| ExprError(format!("unknown variable `{name}`")))
            }
            other => Err(ExprError(format!("unexpected token {other:?}"))),
        }
    }
}

/// A compiled expression over a fixed, ordered variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    arity: usize,
}

impl Expr {
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let mut p = Parser {
            toks: lex(src)?,
            pos: 0,
            vars,
        };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(ExprError(format!("trailing input in `{src}`")));
        }
        Ok(Expr {
            root,
            arity: vars.len(),
        })
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        debug_assert_eq!(vars.len(), self.arity);
        self.root.eval(vars)
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Cond {
    lhs: Node,
    op: &'static str,
    rhs: Node,
}

impl Cond {
    fn parse(src: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let mut p = Parser {
            toks: lex(src)?,
            pos: 0,
            vars,
        };
        let lhs = p.expr()?;
        let op = match p.toks.get(p.pos) {
            Some(Tok::Cmp(op)) => *op,
            _ => return Err(ExprError(format!("condition `{src}` needs a comparison"))),
        };
        p.pos += 1;
        let rhs = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(ExprError(format!("trailing input in `{src}`")));
        }
        Ok(Cond { lhs, op, rhs })
    }

    fn holds(&self, vars: &[f64]) -> bool {
        let (a, b) = (self.lhs.eval(vars), self.rhs.eval(vars));
        match self.op {
            "<" => a < b,
            "<=" => a <= b,
            ">" => a > b,
            _ => a >= b,
        }
    }
}

/// One branch as written in a config file; a missing `when` always matches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<String>,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise {
    pieces: Vec<(Option<Cond>, Node)>,
}

impl Piecewise {
    pub fn parse(pieces: &[PieceSource], vars: &[&str]) -> Result<Self, ExprError> {
        if pieces.is_empty() {
            return Err(ExprError("no pieces".into()));
        }
        let pieces = pieces
            .iter()
            .map(|p| {
                let cond = p
                    .when
                    .as_deref()
                    .map(|w| Cond::parse(w, vars))
                    .transpose()?;
                Ok((cond, Expr::parse(&p.expr, vars)?.root))
            })
            .collect::<Result<Vec<_>, ExprError>>()?;
        Ok(Piecewise { pieces })
    }

    /// Value of the first matching branch; NaN when none matches.
    pub fn eval(&self, vars: &[f64]) -> f64 {
        self.pieces
            .iter()
            .find(|(c, _)| c.as_ref().is_none_or(|c| c.holds(vars)))
            .map_or(f64::NAN, |(_, e)| e.eval(vars))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TXP: &[&str] = &["t", "x", "p"];

    #[test]
    fn precedence_and_functions() {
        let e = Expr::parse("max(abs(p)*abs(x) - 1, 0)", TXP).unwrap();
        assert_eq!(e.eval(&[0.0, 1.0, 3.0]), 2.0);
        assert_eq!(e.eval(&[0.0, 0.5, 1.0]), 0.0);
        let e = Expr::parse("-2^2 + 3*2/4", TXP).unwrap();
        assert_eq!(e.eval(&[0.0; 3]), -4.0 + 1.5);
        let e = Expr::parse("p^2/(2+2*t) - abs(x)", TXP).unwrap();
        assert_eq!(e.eval(&[1.0, -1.0, 2.0]), 0.0);
        let e = Expr::parse("1e-1 * ln(t) + sqrt(4)", TXP).unwrap();
        assert!((e.eval(&[1.0, 0.0, 0.0]) - 2.0).abs() < 1e-15);
        assert_eq!(
            Expr::parse("3 × 2 ÷ 4 − 1", TXP).unwrap().eval(&[0.0; 3]),
            0.5
        );
    }

    #[test]
    fn piecewise_branches_in_order() {
        let h = Piecewise::parse(
            &[
                PieceSource {
                    when: Some("p >= -1".into()),
                    expr: "p - 1 - abs(x)".into(),
                },
                PieceSource {
                    when: None,
                    expr: "-2*sqrt(-p) - abs(x)".into(),
                },
            ],
            TXP,
        )
        .unwrap();
        assert_eq!(h.eval(&[0.0, 0.0, 0.0]), -1.0);
        assert_eq!(h.eval(&[0.0, 0.0, -4.0]), -4.0);
    }

    #[test]
    fn errors() {
        assert!(Expr::parse("q + 1", TXP).is_err());
        assert!(Expr::parse("foo(p)", TXP).is_err());
        assert!(Expr::parse("max(p)", TXP).is_err());
        assert!(Expr::parse("(p", TXP).is_err());
        assert!(Expr::parse("p p", TXP).is_err());
        assert!(Cond::parse("p + 1", TXP).is_err());
    }
}
