//! Scalar expression fields: a small recursive-descent parser and an
//! evaluator over plain floats or second-order jets.
//!
//! Grammar: reals, named variables, `+ - * / ^`, unary minus, parentheses,
//! the functions `sin cos tan sinh cosh tanh exp log sqrt abs asin acos atan`
//! and the constant `pi`. `^` is right-associative and binds tighter than
//! unary minus applied to a product.

use crate::jet::Jet2;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Asin,
    Acos,
    Atan,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "asin" => Func::Asin,
            "acos" => Func::Acos,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    fn apply_f64(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
            Func::Asin => x.asin(),
            Func::Acos => x.acos(),
            Func::Atan => x.atan(),
        }
    }

    fn apply_jet(self, x: &Jet2) -> Jet2 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
            Func::Asin => x.asin(),
            Func::Acos => x.acos(),
            Func::Atan => x.atan(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn eval_f64(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Add(a, b) => a.eval_f64(vars) + b.eval_f64(vars),
            Expr::Sub(a, b) => a.eval_f64(vars) - b.eval_f64(vars),
            Expr::Mul(a, b) => a.eval_f64(vars) * b.eval_f64(vars),
            Expr::Div(a, b) => a.eval_f64(vars) / b.eval_f64(vars),
            Expr::Pow(a, b) => a.eval_f64(vars).powf(b.eval_f64(vars)),
            Expr::Neg(a) => -a.eval_f64(vars),
            Expr::Call(f, a) => f.apply_f64(a.eval_f64(vars)),
        }
    }

    fn eval_jet(&self, vars: &[Jet2]) -> Jet2 {
        let n = vars[0].nvars();
        match self {
            Expr::Num(c) => Jet2::constant(*c, n),
            Expr::Var(i) => vars[*i].clone(),
            Expr::Add(a, b) => a.eval_jet(vars).add(&b.eval_jet(vars)),
            Expr::Sub(a, b) => a.eval_jet(vars).sub(&b.eval_jet(vars)),
            Expr::Mul(a, b) => a.eval_jet(vars).mul(&b.eval_jet(vars)),
            Expr::Div(a, b) => a.eval_jet(vars).div(&b.eval_jet(vars)),
            Expr::Pow(a, b) => {
                let base = a.eval_jet(vars);
                match b.as_ref() {
                    Expr::Num(p) => base.powf(*p),
                    Expr::Neg(inner) => {
                        if let Expr::Num(p) = inner.as_ref() {
                            base.powf(-*p)
                        } else {
                            base.pow_jet(&b.eval_jet(vars))
                        }
                    }
                    _ => base.pow_jet(&b.eval_jet(vars)),
                }
            }
            Expr::Neg(a) => a.eval_jet(vars).neg(),
            Expr::Call(f, a) => f.apply_jet(&a.eval_jet(vars)),
        }
    }

    fn remap(&self, map: &[usize]) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var(i) => Expr::Var(map[*i]),
            Expr::Add(a, b) => Expr::Add(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Pow(a, b) => Expr::Pow(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.remap(map))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.remap(map))),
        }
    }
}

/// A compiled scalar field over a fixed ordered variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionField {
    source: String,
    vars: Vec<String>,
    ast: Expr,
}

impl fmt::Display for ExpressionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl ExpressionField {
    /// Parses `source` over the named variables.
    pub fn parse(source: &str, variables: &[&str]) -> Result<ExpressionField, ParseError> {
        let vars: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        let ast = Parser::new(source, &vars).parse()?;
        Ok(ExpressionField {
            source: source.to_string(),
            vars,
            ast,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.vars.len(), "arity mismatch");
        self.ast.eval_f64(point)
    }

    /// Value, gradient and hessian with respect to all variables at `point`.
    pub fn eval_jet(&self, point: &[f64]) -> Jet2 {
        assert_eq!(point.len(), self.vars.len(), "arity mismatch");
        let n = point.len();
        let vars: Vec<Jet2> = point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet2::variable(v, i, n))
            .collect();
        self.ast.eval_jet(&vars)
    }

    pub fn gradient(&self, point: &[f64]) -> Vec<f64> {
        self.eval_jet(point).grad
    }

    /// Re-expresses the field over a larger variable list. Every current
    /// variable must appear in `new_vars`.
    pub fn embed(&self, new_vars: &[&str]) -> ExpressionField {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                new_vars
                    .iter()
                    .position(|w| w == v)
                    .unwrap_or_else(|| panic!("variable `{v}` missing from embedding target"))
            })
            .collect();
        ExpressionField {
            source: self.source.clone(),
            vars: new_vars.iter().map(|s| s.to_string()).collect(),
            ast: self.ast.remap(&map),
        }
    }

    pub fn constant(value: f64, variables: &[&str]) -> ExpressionField {
        ExpressionField {
            source: format!("{value}"),
            vars: variables.iter().map(|s| s.to_string()).collect(),
            ast: Expr::Num(value),
        }
    }

    /// Product of two fields over the same variable list.
    pub fn product(&self, other: &ExpressionField) -> ExpressionField {
        assert_eq!(self.vars, other.vars);
        ExpressionField {
            source: format!("({})*({})", self.source, other.source),
            vars: self.vars.clone(),
            ast: Expr::Mul(Box::new(self.ast.clone()), Box::new(other.ast.clone())),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, vars: &'a [String]) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            vars,
        }
    }

    fn parse(mut self) -> Result<Expr, ParseError> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.syntax("unexpected trailing input"));
        }
        Ok(e)
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            // Right-associative; exponent may carry a unary minus.
            let exp = self.unary_power()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary_power(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary_power()?)));
        }
        self.power()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.syntax("expected a number, variable or `(`")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // Scientific notation.
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("invalid number `{text}`"),
            })
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        if let Some(f) = Func::from_name(&name) {
            if self.peek() != Some(b'(') {
                return Err(ParseError::Syntax {
                    pos: self.pos,
                    msg: format!("function `{name}` requires arguments in parentheses"),
                });
            }
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.syntax("expected `)`"));
            }
            self.pos += 1;
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            return Ok(Expr::Var(i));
        }
        Err(ParseError::UnknownIdentifier { pos: start, name })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn cosh_at_zero() {
        let f = ExpressionField::parse("cosh(t)", &["t"]).unwrap();
        assert_eq!(f.eval(&[0.0]), 1.0);
    }

    #[test]
    fn pythagorean_triple() {
        let f = ExpressionField::parse("sqrt(x^2+y^2)", &["x", "y"]).unwrap();
        assert_eq!(f.eval(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn gradient_of_quadratic() {
        // Hand differentiation: d/dt (t^2 - x^2) = 2t, d/dx = -2x.
        let f = ExpressionField::parse("t^2 - x^2", &["t", "x"]).unwrap();
        let j = f.eval_jet(&[2.0, 1.0]);
        assert_eq!(j.value, 3.0);
        assert_eq!(j.grad, vec![4.0, -2.0]);
    }

    #[test]
    fn unknown_identifier_rejected() {
        let e = ExpressionField::parse("2*q", &["t"]).unwrap_err();
        assert!(matches!(e, ParseError::UnknownIdentifier { .. }));
    }

    #[test]
    fn syntax_error_carries_position() {
        match ExpressionField::parse("1 + * 2", &["t"]).unwrap_err() {
            ParseError::Syntax { pos, .. } => assert_eq!(pos, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn power_is_right_associative() {
        let f = ExpressionField::parse("2^3^2", &[]).unwrap();
        assert_eq!(f.eval(&[]), 512.0);
    }

    #[test]
    fn unary_minus_and_pi() {
        let f = ExpressionField::parse("-cos(pi)", &[]).unwrap();
        assert_relative_eq!(f.eval(&[]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn embed_preserves_values() {
        let f = ExpressionField::parse("cosh(t)^2", &["t"]).unwrap();
        let g = f.embed(&["t", "x", "y"]);
        assert_eq!(g.eval(&[1.2, 9.0, -4.0]), f.eval(&[1.2]));
    }

    proptest! {
        // Jet gradient vs central finite differences for a representative field.
        #[test]
        fn jet_gradient_matches_fd(t in -1.5f64..1.5, x in -1.5f64..1.5) {
            let f = ExpressionField::parse(
                "sinh(t)*cos(x) + exp(x/4) - t^3/(2 + cos(t))", &["t", "x"]).unwrap();
            let j = f.eval_jet(&[t, x]);
            let h = 1e-5;
            for (i, g) in j.grad.iter().enumerate() {
                let mut p = [t, x];
                p[i] += h;
                let fp = f.eval(&p);
                p[i] -= 2.0 * h;
                let fm = f.eval(&p);
                let fd = (fp - fm) / (2.0 * h);
                prop_assert!((g - fd).abs() <= 1e-6, "grad {i}: jet {g} vs fd {fd}");
            }
        }

        // Deterministic evaluation: same inputs, bit-identical outputs.
        #[test]
        fn evaluation_deterministic(t in -3.0f64..3.0) {
            let f = ExpressionField::parse("tan(t/4) + sqrt(abs(t) + 1)", &["t"]).unwrap();
            prop_assert_eq!(f.eval(&[t]).to_bits(), f.eval(&[t]).to_bits());
        }
    }
}
