use std::sync::Arc;

use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    BadNumber(String),
    BadExponent(String),
    UnknownFunction(String),
}

/// Parse failure with a 1-based character offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {}", describe(.kind))]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character '{c}'"),
        ParseErrorKind::UnexpectedToken(t) => format!("unexpected token '{t}'"),
        ParseErrorKind::UnexpectedEnd => "unexpected end of input".into(),
        ParseErrorKind::BadNumber(s) => format!("malformed number '{s}'"),
        ParseErrorKind::BadExponent(s) => format!("exponent must be an integer, found '{s}'"),
        ParseErrorKind::UnknownFunction(s) => format!("unknown function '{s}'"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(_, s) | Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let offset = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, offset));
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
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| ParseError {
                offset,
                kind: ParseErrorKind::BadNumber(s.clone()),
            })?;
            out.push((Tok::Num(v, s), offset));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), offset));
        } else {
            return Err(ParseError {
                offset,
                kind: ParseErrorKind::UnexpectedChar(c),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_offset: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.end_offset)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(t) => ParseError {
                offset: self.offset(),
                kind: ParseErrorKind::UnexpectedToken(t.text()),
            },
            None => ParseError {
                offset: self.end_offset,
                kind: ParseErrorKind::UnexpectedEnd,
            },
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            // A literal directly after unary minus is a negative constant,
            // unless it is the base of a power ("-2^2" is -(2^2)).
            if let (Some(Tok::Num(v, _)), next) = (self.peek().cloned(), self.peek_at(1)) {
                if next != Some(&Tok::Caret) {
                    self.pos += 1;
                    return Ok(Expr::Const(-v));
                }
            }
            let inner = self.factor()?;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let k = self.integer()?;
            return Ok(Expr::Pow(Arc::new(base), k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        let offset = self.offset();
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Num(_, s)) => {
                let k: i32 = s.parse().map_err(|_| ParseError {
                    offset,
                    kind: ParseErrorKind::BadExponent(s.clone()),
                })?;
                Ok(if negative { -k } else { k })
            }
            Some(t) => Err(ParseError {
                offset,
                kind: ParseErrorKind::BadExponent(t.text()),
            }),
            None => Err(ParseError {
                offset: self.end_offset,
                kind: ParseErrorKind::UnexpectedEnd,
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v, _)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    let func = Func::from_name(&name).ok_or(ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Call(func, Arc::new(arg)))
                } else {
                    Ok(Expr::Var(Arc::from(name.as_str())))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.unexpected()),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_offset: text.chars().count() + 1,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Arc<Expr> {
        Arc::new(Expr::var(name))
    }

    #[test]
    fn power_of_function_call() {
        let e = parse("sin(theta)^2").unwrap();
        assert_eq!(e, Expr::Pow(Arc::new(Expr::Call(Func::Sin, v("theta"))), 2));
    }

    #[test]
    fn bare_constant() {
        assert_eq!(parse("1").unwrap(), Expr::Const(1.0));
    }

    #[test]
    fn product_binds_tighter_than_sum() {
        let e = parse("a*b+c").unwrap();
        assert_eq!(
            e,
            Expr::Add(Arc::new(Expr::Mul(v("a"), v("b"))), v("c"))
        );
    }

    #[test]
    fn left_associative_subtraction_and_division() {
        let e = parse("a-b-c").unwrap();
        assert_eq!(
            e,
            Expr::Sub(Arc::new(Expr::Sub(v("a"), v("b"))), v("c"))
        );
        let e = parse("a/b/c").unwrap();
        assert_eq!(
            e,
            Expr::Div(Arc::new(Expr::Div(v("a"), v("b"))), v("c"))
        );
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-x^2").unwrap();
        assert_eq!(e, Expr::Neg(Arc::new(Expr::Pow(v("x"), 2))));
        let e = parse("-2^2").unwrap();
        assert_eq!(
            e,
            Expr::Neg(Arc::new(Expr::Pow(Arc::new(Expr::Const(2.0)), 2)))
        );
        assert_eq!(parse("-3").unwrap(), Expr::Const(-3.0));
        assert_eq!(parse("-(3)").unwrap(), Expr::Neg(Arc::new(Expr::Const(3.0))));
    }

    #[test]
    fn negative_integer_exponent() {
        assert_eq!(parse("x^-2").unwrap(), Expr::Pow(v("x"), -2));
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse(".25").unwrap(), Expr::Const(0.25));
    }

    #[test]
    fn error_offsets_are_one_based() {
        let err = parse("x + * y").unwrap_err();
        assert_eq!(err.offset, 5);
        let err = parse("x + $").unwrap_err();
        assert_eq!(err.offset, 5);
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
        let err = parse("(x").unwrap_err();
        assert_eq!(err.offset, 3);
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
    }

    #[test]
    fn unknown_function_is_rejected() {
        let err = parse("1 + foo(x)").unwrap_err();
        assert_eq!(err.offset, 5);
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("foo".into()));
    }

    #[test]
    fn fractional_exponent_is_rejected() {
        let err = parse("x^1.5").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BadExponent(_)));
    }

    #[test]
    fn trailing_tokens_are_rejected() {
        assert!(parse("x y").is_err());
        assert!(parse("").is_err());
    }
}
