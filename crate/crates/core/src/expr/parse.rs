use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::{Expr, Var};
use crate::algebra::Q;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Num(Q),
    Ident(String),
    Op(char),
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let end = digits(i);
            let num: BigInt = text[i..end].parse().expect("digits");
            // `p/q` with no spaces is a single literal
            if end + 1 < bytes.len() && bytes[end] == b'/' && bytes[end + 1].is_ascii_digit() {
                let end2 = digits(end + 1);
                let den: BigInt = text[end + 1..end2].parse().expect("digits");
                if den.is_zero() {
                    return Err(syntax(end + 1, "zero denominator in literal"));
                }
                out.push((i, Tok::Num(Q::new(num, den))));
                i = end2;
            } else {
                out.push((i, Tok::Num(Q::from_integer(num))));
                i = end;
            }
        } else if c.is_ascii_alphabetic() {
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            out.push((i, Tok::Ident(text[i..j].to_string())));
            i = j;
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(syntax(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn index(s: &str) -> Option<u16> {
    if s.is_empty() || s.starts_with('0') || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn variable(name: &str) -> Option<Var> {
    match name {
        "x" => return Some(Var::XVec),
        "g" => return Some(Var::G),
        "s" => return Some(Var::S),
        "t" => return Some(Var::T),
        "y" => return Some(Var::Y),
        _ => {}
    }
    let (head, rest) = name.split_at(1);
    match head {
        "x" => index(rest).map(Var::X),
        "a" => index(rest).map(Var::A),
        "b" => index(rest).map(Var::B),
        "z" => match rest.split_once('_') {
            Some((k, i)) => Some(Var::ZComp(index(k)?, index(i)?)),
            None => index(rest).map(Var::Z),
        },
        _ => None,
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(self.here(), format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let mut e = self.atom()?;
        while self.eat('^') {
            e = Expr::Pow(Box::new(e), self.exponent()?);
        }
        Ok(e)
    }

    fn exponent(&mut self) -> Result<u32> {
        let at = self.here();
        let e = match self.peek() {
            Some(Tok::Num(_)) | Some(Tok::Op('(')) => self.atom()?,
            Some(Tok::Op('-')) => return Err(Error::NonIntegerExponent),
            _ => return Err(syntax(at, "expected an exponent")),
        };
        match e {
            Expr::Num(q) if q.is_integer() => q.to_integer().to_u32().ok_or(Error::NonIntegerExponent),
            _ => Err(Error::NonIntegerExponent),
        }
    }

    fn small_int(&mut self) -> Result<u32> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(q)) if q.is_integer() => {
                self.pos += 1;
                q.to_integer().to_u32().ok_or_else(|| syntax(at, "derivative order too large"))
            }
            _ => Err(syntax(at, "expected a nonnegative integer")),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Expr::Num(q))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "D" => {
                        self.expect('(')?;
                        let e = self.expr()?;
                        let k = if self.eat(',') { self.small_int()? } else { 1 };
                        self.expect(')')?;
                        Ok(Expr::D(Box::new(e), k))
                    }
                    "dot" => {
                        let mut a = self.args()?;
                        if a.len() != 2 {
                            return Err(syntax(at, "dot takes two arguments"));
                        }
                        let b = a.pop().expect("two");
                        let a = a.pop().expect("two");
                        Ok(Expr::Dot(Box::new(a), Box::new(b)))
                    }
                    "det" => Ok(Expr::Det(self.args()?)),
                    _ => variable(&name).map(Expr::Var).ok_or(Error::UnknownVariable(name)),
                }
            }
            Some(Tok::Op(c)) => Err(syntax(at, format!("unexpected `{c}`"))),
            None => Err(syntax(at, "unexpected end of input")),
        }
    }
}

/// Parse an expression.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(text)?, pos: 0, end: text.len() };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(syntax(p.here(), "trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    #[test]
    fn literals_and_precedence() {
        assert_eq!(parse("3/4").unwrap(), Expr::Num(q(3, 4)));
        assert_eq!(parse("3 / 4").unwrap(), Expr::Div(Box::new(Expr::Num(qi(3))), Box::new(Expr::Num(qi(4)))));
        let e = parse("D(x1,2)*x2 + 3/4").unwrap();
        assert_eq!(e.to_string(), "D(x1,2)*x2 + 3/4");
        assert_eq!(parse("-a1^2*b2").unwrap().to_string(), "-a1^2*b2");
        assert_eq!(parse("(x1 - x2) - (x1 - x2)").unwrap().to_string(), "x1 - x2 - (x1 - x2)");
        assert_eq!(parse("dot(z2, z2)").unwrap(), Expr::Dot(Box::new(Expr::Var(Var::Z(2))), Box::new(Expr::Var(Var::Z(2)))));
        assert_eq!(parse("z3_1").unwrap(), Expr::Var(Var::ZComp(3, 1)));
    }

    #[test]
    fn errors() {
        assert_eq!(parse("x1^(1/2)"), Err(Error::NonIntegerExponent));
        assert_eq!(parse("x1^-1"), Err(Error::NonIntegerExponent));
        assert_eq!(parse("w"), Err(Error::UnknownVariable("w".into())));
        assert_eq!(parse("x0"), Err(Error::UnknownVariable("x0".into())));
        assert!(matches!(parse("x1 + "), Err(Error::Syntax { pos: 5, .. })));
        assert!(matches!(parse("x1 $ x2"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("(x1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1/0"), Err(Error::Syntax { .. })));
    }
}
