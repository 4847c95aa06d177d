//! Parser for field elements: integers, decimals, `sqrt(n)`, `theta`,
//! parentheses and `+ - * /`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use theta_core::{FieldSpec, Quad, Result, ThetaError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt, u32),
    Ident(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            let text: String = cs[start..i].iter().collect();
            let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
            if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
                return Err(ThetaError::Parse(format!("bad number '{text}'")));
            }
            let digits = format!("{int}{frac}");
            out.push(Tok::Num(digits.parse().unwrap(), frac.len() as u32));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(
                cs[start..i].iter().collect::<String>().to_lowercase(),
            ));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(ThetaError::Parse(format!("unexpected '{c}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    field: FieldSpec,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
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
            Err(ThetaError::Parse(format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Quad> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v = v.try_add(&self.term()?)?;
            } else if self.eat('-') {
                v = v.try_sub(&self.term()?)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<Quad> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v = v.try_mul(&self.unary()?)?;
            } else if self.eat('/') {
                v = v.try_div(&self.unary()?)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<Quad> {
        if self.eat('-') {
            return Ok(self.unary()?.mul_int(&BigInt::from(-1)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Quad> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| ThetaError::Parse("unexpected end".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(n, scale) => Quad::from_ratio(n, BigInt::from(10).pow(scale), self.field),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Tok::Ident(name) if name == "theta" => Ok(self.field.theta()),
            Tok::Ident(name) if name == "sqrt" => {
                self.expect('(')?;
                let v = self.expr()?;
                self.expect(')')?;
                self.sqrt(&v)
            }
            other => Err(ThetaError::Parse(format!("unexpected {other:?}"))),
        }
    }

    /// `√n` for a non-negative integer `n` that is a square or `m` times one.
    fn sqrt(&self, v: &Quad) -> Result<Quad> {
        let not_in_field = || {
            ThetaError::Parse(format!(
                "sqrt of {} is not in Q(sqrt {})",
                v.to_decimal(6),
                self.field.m()
            ))
        };
        if !v.q().is_zero() || v.r() != &BigInt::from(1) || v.p().is_negative() {
            return Err(not_in_field());
        }
        let n = v.p();
        let s = n.sqrt();
        if &(&s * &s) == n {
            return Ok(Quad::from_int(s, self.field));
        }
        let m = BigInt::from(self.field.m());
        if (n % &m).is_zero() {
            let k = n / &m;
            let s = k.sqrt();
            if s.clone() * &s == k {
                return Ok(self.field.sqrt_m::<BigInt>().mul_int(&s));
            }
        }
        Err(not_in_field())
    }
}

pub fn parse_element(s: &str, field: FieldSpec) -> Result<Quad> {
    let toks = lex(s)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        field,
    };
    let v = p.expr()?;
    if p.pos != toks.len() {
        return Err(ThetaError::Parse(format!("trailing input in '{s}'")));
    }
    Ok(v)
}

/// Real value of an expression, for endpoints of measured intervals.
pub fn parse_real(s: &str, field: FieldSpec) -> Result<f64> {
    let v = parse_element(s, field)?;
    Ok(theta_core::interval::quad_to_f64(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> FieldSpec {
        FieldSpec::new(2).unwrap()
    }

    #[test]
    fn parses_field_elements() {
        let x = parse_element("sqrt(2)-1", f2()).unwrap();
        assert_eq!(x.triple(), ("-1".into(), "1".into(), "1".into()));
        let y = parse_element("(1 + sqrt(8))/3", f2()).unwrap();
        assert_eq!(
            y,
            f2().element(BigInt::from(1), BigInt::from(2), BigInt::from(3))
                .unwrap()
        );
        assert_eq!(
            parse_element("0.75", f2()).unwrap(),
            Quad::from_ratio(3.into(), 4.into(), f2()).unwrap()
        );
        assert_eq!(parse_element("sqrt(9)", f2()).unwrap(), f2().int(3));
        assert_eq!(
            parse_element("-theta*2", f2()).unwrap(),
            f2().sqrt_m::<BigInt>().mul_int(&BigInt::from(-1))
        );
    }

    #[test]
    fn rejects_bad_input() {
        for s in ["sqrt(3)", "1/0", "2 +", "1..2", "x", "(1", "1 2"] {
            assert!(parse_element(s, f2()).is_err(), "{s}");
        }
    }

    #[test]
    fn real_values() {
        assert!((parse_real("theta/2", f2()).unwrap() - 0.5f64.sqrt() / 2.0).abs() < 1e-15);
    }
}
