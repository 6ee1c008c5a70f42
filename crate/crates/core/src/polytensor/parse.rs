//! Text grammar for polynomials, as accepted on the command line.
//!
//! ```text
//! poly    := ['+' | '-'] term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := number | complex | var ['^' integer]
//! complex := '(' signed ',' signed ')'      (a,b) denotes a + b·i
//! var     := 's' integer                    1-based: s1, s2, …
//! ```
//!
//! Whitespace is ignored everywhere. Example: `3*s1^2*s2 - (0,1)*s3`.

use num_complex::Complex64;

use super::polynomial::Polynomial;
use crate::error::{Error, Result};

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

struct Term {
    coeff: Complex64,
    vars: Vec<(usize, u32, usize)>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        let chars = src
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (i + 1, c))
            .collect();
        Self { chars, pos: 0, src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map_or(self.src.chars().count() + 1, |&(col, _)| col)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            column: self.column(),
            message: message.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
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
            self.fail(format!("expected '{c}'"))
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let mut text = String::new();
        while let Some(c) = self.peek() {
            let exponent_sign = (c == '+' || c == '-') && text.ends_with(['e', 'E']);
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exponent_sign {
                text.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if text.is_empty() {
            return self.fail("expected a number");
        }
        text.parse::<f64>().or_else(|_| {
            self.pos = start;
            self.fail(format!("malformed number '{text}'"))
        })
    }

    fn signed(&mut self) -> Result<f64> {
        let negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let x = self.number()?;
        Ok(if negative { -x } else { x })
    }

    fn integer(&mut self) -> Result<u32> {
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
            value = match value.checked_mul(10).and_then(|v| v.checked_add(d)) {
                Some(v) => v,
                None => return self.fail("integer too large"),
            };
            self.pos += 1;
        }
        if self.pos == start {
            return self.fail("expected an integer");
        }
        Ok(value)
    }

    fn factor(&mut self, term: &mut Term) -> Result<()> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let re = self.signed()?;
                self.expect(',')?;
                let im = self.signed()?;
                self.expect(')')?;
                term.coeff *= Complex64::new(re, im);
            }
            Some('s') => {
                let col = self.column();
                self.pos += 1;
                let index = self.integer()?;
                if index == 0 {
                    return Err(Error::Parse {
                        column: col,
                        message: "variables are numbered from s1".into(),
                    });
                }
                let power = if self.eat('^') { self.integer()? } else { 1 };
                term.vars.push((index as usize - 1, power, col));
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                term.coeff *= self.number()?;
            }
            Some(c) => return self.fail(format!("unexpected '{c}'")),
            None => return self.fail("unexpected end of input"),
        }
        Ok(())
    }

    fn term(&mut self, sign: f64) -> Result<Term> {
        let mut term = Term {
            coeff: Complex64::new(sign, 0.0),
            vars: Vec::new(),
        };
        self.factor(&mut term)?;
        while self.eat('*') {
            self.factor(&mut term)?;
        }
        Ok(term)
    }

    fn poly(&mut self) -> Result<Vec<Term>> {
        let mut terms = Vec::new();
        let mut sign = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        loop {
            terms.push(self.term(sign)?);
            sign = if self.eat('+') {
                1.0
            } else if self.eat('-') {
                -1.0
            } else {
                break;
            };
        }
        if self.peek().is_some() {
            return self.fail("trailing input");
        }
        Ok(terms)
    }
}

impl Polynomial {
    /// Parses the text grammar described in this module.
    ///
    /// With `nvars = None` the arity is the largest variable index used (at
    /// least 1); otherwise variables beyond `nvars` are rejected.
    pub fn parse(text: &str, nvars: Option<usize>) -> Result<Self> {
        let mut parser = Parser::new(text);
        let terms = parser.poly()?;
        let used = terms
            .iter()
            .flat_map(|t| t.vars.iter().map(|&(j, _, _)| j + 1))
            .max()
            .unwrap_or(0);
        let n = match nvars {
            Some(n) => {
                if let Some(&(j, _, col)) = terms
                    .iter()
                    .flat_map(|t| t.vars.iter())
                    .find(|&&(j, _, _)| j >= n)
                {
                    return Err(Error::Parse {
                        column: col,
                        message: format!("s{} exceeds the {n} available variables", j + 1),
                    });
                }
                n
            }
            None => used.max(1),
        };
        let mut p = Polynomial::zero(n);
        for term in terms {
            let mut alpha = vec![0u32; n];
            for (j, e, _) in term.vars {
                alpha[j] += e;
            }
            p.add_term(alpha, term.coeff)?;
        }
        Ok(p)
    }
}

impl std::str::FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Polynomial::parse(s, None)
    }
}
