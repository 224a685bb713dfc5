//! Reader for the printed form of rational functions.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{RatFun, VarSet};
use crate::error::{Error, Result};

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    vars: Arc<VarSet>,
}

impl Parser<'_> {
    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!("{what} at offset {}", self.pos)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RatFun> {
        let mut acc = if self.eat(b'-') { self.term()?.neg() } else { self.term()? };
        loop {
            if self.eat(b'+') {
                acc = acc.try_add(&self.term()?)?;
            } else if self.eat(b'-') {
                acc = acc.try_sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RatFun> {
        let mut acc = self.power()?;
        loop {
            if self.eat(b'*') {
                acc = acc.try_mul(&self.power()?)?;
            } else if self.eat(b'/') {
                acc = acc.try_div(&self.power()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<RatFun> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let k = self.integer()?;
            let k: i64 = k.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
            return base.pow(if neg { -k } else { k });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap())
    }

    fn atom(&mut self) -> Result<RatFun> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(self.power()?.neg())
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(RatFun::from_rat(self.vars.clone(), &BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match self.vars.index(name) {
                    Some(i) => Ok(RatFun::var(self.vars.clone(), i)),
                    None => Err(Error::Parse(format!("unknown variable {name}"))),
                }
            }
            _ => self.err("unexpected input"),
        }
    }
}

impl RatFun {
    /// Reads expressions such as `(v^4*a1 - v^4)/a1` or `-3/2` in the universe `vars`.
    pub fn parse(vars: &Arc<VarSet>, s: &str) -> Result<RatFun> {
        let mut p = Parser { s: s.as_bytes(), pos: 0, vars: vars.clone() };
        let e = p.expr()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_roundtrip() {
        let vars = VarSet::new(["v", "a1"]);
        for s in ["(v^4*a1 - v^4 - v^2*a1^2 + v^2*a1)/a1", "-3/2", "v^-2", "-2/(v^6 - v^2)", "0", "1 - -v"] {
            let f = RatFun::parse(&vars, s).unwrap();
            assert_eq!(RatFun::parse(&vars, &f.to_string()).unwrap(), f, "{s}");
        }
        assert!(RatFun::parse(&vars, "x + 1").is_err());
        assert!(RatFun::parse(&vars, "(v").is_err());
    }
}
