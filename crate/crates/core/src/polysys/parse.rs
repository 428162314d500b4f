//! Recursive-descent parser for the system file grammar:
//!
//! ```text
//! vars: x y z;
//! x^2 + y^2 - 1;
//! (x + 0.5)^2 + y^2 + z^2 - 1;
//! ```
//!
//! Statements end with `;`. `i` is the imaginary unit and cannot be used as
//! a variable name. `#` starts a comment running to the end of the line.

use std::fmt;

use super::{Monomial, PolySystem, Polynomial};
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredVariable(String),
    EmptySystem,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => {
                write!(f, "syntax error at {}:{}: {msg}", self.line, self.column)
            }
            ParseErrorKind::UndeclaredVariable(name) => write!(
                f,
                "undeclared variable `{name}` at {}:{}",
                self.line, self.column
            ),
            ParseErrorKind::EmptySystem => write!(f, "system contains no polynomials"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Semi,
    Colon,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match ch {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '+' | '-' | '*' | '^' | '(' | ')' | ';' | ':' => {
                let tok = match ch {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    _ => Tok::Colon,
                };
                out.push(Token { tok, line: tl, column: tc });
                advance(1, &mut i);
            }
            c if c.is_ascii_digit() || c == '.' => {
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
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                col += i - start;
                let value = lit.parse::<f64>().map_err(|_| ParseError {
                    line: tl,
                    column: tc,
                    kind: ParseErrorKind::Syntax(format!("malformed number `{lit}`")),
                })?;
                out.push(Token { tok: Tok::Number(value), line: tl, column: tc });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: tl,
                    column: tc,
                });
            }
            other => {
                return Err(ParseError {
                    line: tl,
                    column: tc,
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Sparse working polynomial used while parsing; converted to `Polynomial`
/// at statement end.
type Terms = Vec<Monomial>;

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError { line: t.line, column: t.column, kind: ParseErrorKind::Syntax(msg.into()) })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(&self.peek().tok)))
        }
    }

    fn constant(&self, z: C64) -> Terms {
        vec![Monomial { coeff: z, exponents: vec![0; self.vars.len()] }]
    }

    fn expr(&mut self) -> Result<Terms, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc.extend(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc.extend(negate(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Terms, ParseError> {
        let mut acc = self.unary()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            let rhs = self.unary()?;
            acc = multiply(&acc, &rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Terms, ParseError> {
        match self.peek().tok {
            Tok::Minus => {
                self.bump();
                Ok(negate(self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Terms, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let e = match self.peek().tok {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => v as u32,
            _ => return self.err("expected a nonnegative integer exponent"),
        };
        self.bump();
        let mut acc = self.constant(C64::new(1.0, 0.0));
        for _ in 0..e {
            acc = multiply(&acc, &base);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Terms, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Number(v) => {
                self.bump();
                Ok(self.constant(C64::new(v, 0.0)))
            }
            Tok::Ident(ref name) => {
                self.bump();
                if name == "i" {
                    return Ok(self.constant(C64::new(0.0, 1.0)));
                }
                match self.vars.iter().position(|v| v == name) {
                    Some(idx) => {
                        let mut e = vec![0; self.vars.len()];
                        e[idx] = 1;
                        Ok(vec![Monomial { coeff: C64::new(1.0, 0.0), exponents: e }])
                    }
                    None => Err(ParseError {
                        line: t.line,
                        column: t.column,
                        kind: ParseErrorKind::UndeclaredVariable(name.clone()),
                    }),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            ref other => self.err(format!("expected an operand, found {}", describe(other))),
        }
    }

    fn statements(&mut self) -> Result<Vec<Polynomial>, ParseError> {
        let mut polys = Vec::new();
        while self.peek().tok != Tok::Eof {
            let terms = self.expr()?;
            self.expect(Tok::Semi, "`;`")?;
            polys.push(Polynomial::from_terms(terms));
        }
        Ok(polys)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(v) => format!("`{v}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn negate(mut t: Terms) -> Terms {
    t.iter_mut().for_each(|m| m.coeff = -m.coeff);
    t
}

fn multiply(a: &Terms, b: &Terms) -> Terms {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let e = x.exponents.iter().zip(&y.exponents).map(|(p, q)| p + q).collect();
            out.push(Monomial { coeff: x.coeff * y.coeff, exponents: e });
        }
    }
    // merge eagerly so repeated powers stay small
    Polynomial::from_terms(out).terms
}

/// Parses a full system file: a `vars:` header followed by polynomials.
pub fn parse_system(text: &str) -> Result<PolySystem, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars: &[] };
    match p.peek().tok.clone() {
        Tok::Ident(ref s) if s == "vars" => {
            p.bump();
        }
        _ => return p.err("expected `vars:` header"),
    }
    p.expect(Tok::Colon, "`:` after `vars`")?;
    let mut vars = Vec::new();
    loop {
        let t = p.peek().clone();
        match t.tok {
            Tok::Ident(name) => {
                if name == "i" {
                    return p.err("`i` is reserved for the imaginary unit");
                }
                if vars.contains(&name) {
                    return p.err(format!("variable `{name}` declared twice"));
                }
                vars.push(name);
                p.bump();
            }
            Tok::Semi if !vars.is_empty() => {
                p.bump();
                break;
            }
            _ => return p.err("expected variable name or `;` in header"),
        }
    }
    let toks = std::mem::take(&mut p.toks);
    let pos = p.pos;
    let mut body = Parser { toks, pos, vars: &vars };
    let polys = body.statements()?;
    if polys.is_empty() {
        let t = body.peek();
        return Err(ParseError { line: t.line, column: t.column, kind: ParseErrorKind::EmptySystem });
    }
    Ok(PolySystem::new(vars.clone(), polys).expect("parser produces consistent systems"))
}

/// Parses `;`-terminated polynomials over an already known variable list.
pub fn parse_polynomials(text: &str, vars: &[&str]) -> Result<PolySystem, ParseError> {
    let owned: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let mut p = Parser { toks: lex(text)?, pos: 0, vars: &owned };
    let polys = p.statements()?;
    if polys.is_empty() {
        return Err(ParseError { line: 1, column: 1, kind: ParseErrorKind::EmptySystem });
    }
    Ok(PolySystem::new(owned.clone(), polys).expect("parser produces consistent systems"))
}

/// Parses a variable-free expression such as `1.5 - 2*i` to a complex number.
pub fn parse_constant(text: &str) -> Result<C64, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, vars: &[] };
    let terms = p.expr()?;
    p.expect(Tok::Eof, "end of constant")?;
    Ok(terms.iter().map(|m| m.coeff).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_polydisk, seeded_rng};

    #[test]
    fn cylinder_over_three_vars_has_three_terms() {
        let sys = parse_polynomials("x^2 + y^2 - 1;", &["x", "y", "z"]).unwrap();
        assert_eq!(sys.num_polys(), 1);
        assert_eq!(sys.num_vars(), 3);
        assert_eq!(sys.polynomials()[0].terms().len(), 3);
    }

    #[test]
    fn identity_polynomial() {
        let sys = parse_polynomials("x;", &["x"]).unwrap();
        let z = C64::new(0.25, -3.0);
        assert_eq!(sys.evaluate(&[z]).unwrap()[0], z);
    }

    #[test]
    fn cancelling_square_is_zero_everywhere() {
        let sys = parse_system("vars: x; x^2 - (x)*(x);").unwrap();
        let mut rng = seeded_rng(1);
        for _ in 0..20 {
            let z = random_polydisk(&mut rng) * 3.0;
            // direct oracle: x*x - x*x computed in plain arithmetic
            let direct = z * z - z * z;
            assert_eq!(sys.evaluate(&[z]).unwrap()[0], direct);
        }
    }

    #[test]
    fn complex_and_scientific_literals() {
        let sys = parse_system("vars: x;\n 2.5e-1*x + (1 - 2*i)*i + 1E2;").unwrap();
        let v = sys.evaluate(&[C64::new(4.0, 0.0)]).unwrap()[0];
        assert_eq!(v, C64::new(1.0 + 2.0 + 100.0, 1.0));
        assert_eq!(parse_constant("-3 + 0.5*i").unwrap(), C64::new(-3.0, 0.5));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_system("vars: x y;\nx + * y;").unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn undeclared_variable_is_rejected() {
        let err = parse_system("vars: x;\n x + q;").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UndeclaredVariable("q".into()));
        assert_eq!((err.line, err.column), (2, 6));
    }

    #[test]
    fn empty_system_is_rejected() {
        let err = parse_system("vars: x y;  # nothing else\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptySystem);
    }

    #[test]
    fn header_errors() {
        assert!(parse_system("x + 1;").is_err());
        assert!(parse_system("vars: x x; x;").is_err());
        assert!(parse_system("vars: i; i;").is_err());
        assert!(parse_system("vars: x; x^-1;").is_err());
        assert!(parse_system("vars: x; x^1.5;").is_err());
        assert!(parse_system("vars: x; (x + 1;").is_err());
        assert!(parse_system("vars: x; x + 1").is_err());
    }
}
