//! Small arithmetic expression language for user-supplied field components
//! and chart coordinates.
//!
//! Supports `+ - * / ^`, unary minus, parentheses, numeric literals, the
//! constant `pi`, the functions `sqrt sin cos exp ln abs`, and a caller-given
//! set of variable names.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at column {})", self.message, self.position + 1)
    }
}

impl Expr {
    /// Parses `src`; identifiers are resolved against `vars` (position in the
    /// slice becomes the variable index).
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr, ParseError> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
        };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some((at, t)) => Err(ParseError {
                position: at,
                message: format!("unexpected token {t:?}"),
            }),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => match **b {
                Expr::Const(c) if c.fract() == 0.0 && c.abs() < 64.0 => a.eval(x).powi(c as i32),
                _ => a.eval(x).powf(b.eval(x)),
            },
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    /// Highest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
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
            // exponent part
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
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| ParseError {
                position: start,
                message: format!("bad number '{text}'"),
            })?;
            out.push((start, Token::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else if c == '(' {
            out.push((i, Token::LParen));
            i += 1;
        } else if c == ')' {
            out.push((i, Token::RParen));
            i += 1;
        } else {
            return Err(ParseError {
                position: i,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.pos).map(|(at, t)| (*at, t))
    }

    fn end_position(&self) -> usize {
        self.tokens.last().map(|(at, _)| at + 1).unwrap_or(0)
    }

    fn eat_op(&mut self, ops: &str) -> Option<char> {
        match self.peek() {
            Some((_, Token::Op(c))) if ops.contains(*c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op("+-") {
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op("*/") {
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op("-").is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op("+").is_some() {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat_op("^").is_some() {
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some((at, tok)) = self.peek() else {
            return Err(ParseError {
                position: self.end_position(),
                message: "unexpected end of expression".into(),
            });
        };
        let tok = tok.clone();
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Const(v)),
            Token::LParen => {
                let e = self.expr()?;
                self.close_paren(at)?;
                Ok(e)
            }
            Token::Ident(name) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                if let Some(f) = Func::from_name(&name) {
                    match self.peek() {
                        Some((_, Token::LParen)) => self.pos += 1,
                        _ => {
                            return Err(ParseError {
                                position: at,
                                message: format!("function '{name}' needs parentheses"),
                            })
                        }
                    }
                    let arg = self.expr()?;
                    self.close_paren(at)?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                Err(ParseError {
                    position: at,
                    message: format!("unknown identifier '{name}'"),
                })
            }
            t => Err(ParseError {
                position: at,
                message: format!("unexpected token {t:?}"),
            }),
        }
    }

    fn close_paren(&mut self, open_at: usize) -> Result<(), ParseError> {
        match self.peek() {
            Some((_, Token::RParen)) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ParseError {
                position: open_at,
                message: "unbalanced parenthesis".into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: &[f64]) -> f64 {
        Expr::parse(src, &["x", "y"]).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[0.0, 0.0]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[0.0, 0.0]), 512.0);
        assert_eq!(ev("-x^2", &[3.0, 0.0]), -9.0);
        assert_eq!(ev("(1 - y) / 4", &[0.0, 5.0]), -1.0);
        assert_eq!(ev("10 - 4 - 3", &[0.0, 0.0]), 3.0);
        assert_eq!(ev("1.5e2 + 2E-1", &[0.0, 0.0]), 150.2);
    }

    #[test]
    fn functions_and_constants() {
        assert_eq!(ev("sqrt(x*x + y*y)", &[3.0, 4.0]), 5.0);
        assert!((ev("cos(pi)", &[0.0, 0.0]) + 1.0).abs() < 1e-15);
        assert_eq!(ev("abs(-x)", &[2.0, 0.0]), 2.0);
    }

    #[test]
    fn errors_are_located() {
        let e = Expr::parse("x + zz", &["x"]).unwrap_err();
        assert_eq!(e.position, 4);
        assert!(Expr::parse("(x + 1", &["x"]).is_err());
        assert!(Expr::parse("sqrt x", &["x"]).is_err());
        assert!(Expr::parse("x $ 1", &["x"]).is_err());
        assert!(Expr::parse("", &["x"]).is_err());
        assert!(Expr::parse("x 1", &["x"]).is_err());
    }

    #[test]
    fn max_var_reports_highest_index() {
        let e = Expr::parse("x + 2*y", &["x", "y", "z"]).unwrap();
        assert_eq!(e.max_var(), Some(1));
        assert_eq!(Expr::parse("pi", &["x"]).unwrap().max_var(), None);
    }
}
