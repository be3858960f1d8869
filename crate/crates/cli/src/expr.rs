//! A small expression parser for instance-file elements.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! element := expr ('/' denfactors)?
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := atom ('^' uint)?
//! atom    := rational | var | '(' expr ')'
//! denfactors := dfac ('*' dfac)*
//! dfac    := datom ('^' uint)?
//! datom   := var | '(' expr ')'
//! ```
//!
//! `INT/INT` lexes as one rational literal, so `1/2*x` is `(1/2)*x` while
//! `1/x` is a division. Division appears only at the top level and each
//! denominator factor must reduce to a variable or a linear univariate
//! polynomial (the declared-denominator shapes of the model kernel).

use anyhow::{anyhow, bail, Result};
use okounkov_core::{DenFactor, Denominator, Poly, RationalFunction, Scalar};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Scalar),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Token::Num(
                    text.parse::<Scalar>().map_err(|e| anyhow!(e))?,
                ));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => bail!("unexpected character `{other}`"),
        }
    }
    // fold INT '/' INT into a rational literal
    let mut folded: Vec<Token> = Vec::new();
    let mut j = 0usize;
    while j < out.len() {
        if j + 2 < out.len() {
            if let (Token::Num(a), Token::Slash, Token::Num(b)) =
                (&out[j], &out[j + 1], &out[j + 2])
            {
                if b.is_zero() {
                    bail!("zero denominator in rational literal");
                }
                folded.push(Token::Num(a / b));
                j += 3;
                continue;
            }
        }
        folded.push(out[j].clone());
        j += 1;
    }
    Ok(folded)
}

/// Variable naming context of a model: `x` for univariate models, `x1..xd`
/// otherwise (with `x` accepted as an alias when d = 1).
pub struct VarContext {
    pub nvars: usize,
}

impl VarContext {
    fn resolve(&self, name: &str) -> Result<usize> {
        if name == "x" && self.nvars == 1 {
            return Ok(0);
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(i) = rest.parse::<usize>() {
                if i >= 1 && i <= self.nvars {
                    return Ok(i - 1);
                }
            }
        }
        bail!(
            "unknown variable `{name}` (model has {} variable{})",
            self.nvars,
            if self.nvars == 1 { "" } else { "s" }
        )
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a VarContext,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: &Token) -> Result<()> {
        match self.next() {
            Some(ref got) if got == t => Ok(()),
            other => bail!("expected {t:?}, found {other:?}"),
        }
    }

    fn parse_expr(&mut self) -> Result<Poly> {
        let mut acc = if matches!(self.peek(), Some(Token::Minus)) {
            self.next();
            self.parse_term()?.neg()
        } else {
            self.parse_term()?
        };
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    let t = self.parse_term()?;
                    acc = acc.add(&t)?;
                }
                Some(Token::Minus) => {
                    self.next();
                    let t = self.parse_term()?;
                    acc = acc.sub(&t)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Poly> {
        let mut acc = self.parse_factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.next();
            let f = self.parse_factor()?;
            acc = acc.mul(&f)?;
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Poly> {
        let base = self.parse_atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.next();
            match self.next() {
                Some(Token::Num(e)) if e.is_integer() && !e.is_negative() => {
                    let exp = e
                        .floor_u32()
                        .ok_or_else(|| anyhow!("exponent out of range"))?;
                    Ok(base.pow(exp))
                }
                other => bail!("expected a non-negative integer exponent, found {other:?}"),
            }
        } else {
            Ok(base)
        }
    }

    fn parse_atom(&mut self) -> Result<Poly> {
        match self.next() {
            Some(Token::Num(c)) => Ok(Poly::constant(self.ctx.nvars, c)),
            Some(Token::Ident(name)) => {
                let v = self.ctx.resolve(&name)?;
                Ok(Poly::variable(self.ctx.nvars, v))
            }
            Some(Token::LParen) => {
                let e = self.parse_expr()?;
                self.expect(&Token::RParen)?;
                Ok(e)
            }
            other => bail!("expected a value, found {other:?}"),
        }
    }

    fn parse_den_factor(&mut self) -> Result<(DenFactor, Scalar, u32)> {
        let poly = match self.next() {
            Some(Token::Ident(name)) => {
                let v = self.ctx.resolve(&name)?;
                Poly::variable(self.ctx.nvars, v)
            }
            Some(Token::LParen) => {
                let e = self.parse_expr()?;
                self.expect(&Token::RParen)?;
                e
            }
            other => bail!("expected a denominator factor, found {other:?}"),
        };
        let mult = if matches!(self.peek(), Some(Token::Caret)) {
            self.next();
            match self.next() {
                Some(Token::Num(e)) if e.is_integer() && e.is_positive() => e
                    .floor_u32()
                    .ok_or_else(|| anyhow!("multiplicity out of range"))?,
                other => bail!("expected a positive integer multiplicity, found {other:?}"),
            }
        } else {
            1
        };
        let (factor, unit) = classify_factor(&poly, self.ctx.nvars)?;
        Ok((factor, unit, mult))
    }
}

/// True when the token run is `( ... )` with the opening paren matching the
/// final one, and the interior contains a top-level `*` or `^` (so the
/// parens group a factor product rather than a sub-expression).
fn outer_parens_are_redundant(tokens: &[Token]) -> bool {
    if tokens.len() < 3
        || tokens.first() != Some(&Token::LParen)
        || tokens.last() != Some(&Token::RParen)
    {
        return false;
    }
    let mut depth = 0i32;
    let mut has_product = false;
    for (i, t) in tokens.iter().enumerate() {
        match t {
            Token::LParen => depth += 1,
            Token::RParen => {
                depth -= 1;
                if depth == 0 && i != tokens.len() - 1 {
                    return false;
                }
            }
            Token::Star | Token::Caret if depth == 1 => has_product = true,
            // a top-level sum is a genuine sub-expression, not a grouping
            Token::Plus | Token::Minus if depth == 1 => return false,
            _ => {}
        }
    }
    has_product
}

/// A denominator factor must be a single variable or a linear univariate
/// polynomial `a*x + b`; the latter normalizes to the monic `x - root` with
/// the unit `a` returned for numerator compensation.
fn classify_factor(p: &Poly, nvars: usize) -> Result<(DenFactor, Scalar)> {
    if let Some(var) = single_variable(p) {
        if nvars == 1 {
            // univariate models use point factors throughout
            return Ok((DenFactor::Linear(Scalar::zero()), Scalar::one()));
        }
        return Ok((DenFactor::Var(var), Scalar::one()));
    }
    if nvars == 1 {
        let coeffs = p.coeffs_dense();
        if coeffs.len() == 2 && !coeffs[1].is_zero() {
            let a = coeffs[1].clone();
            let root = &(-&coeffs[0]) / &a;
            return Ok((DenFactor::Linear(root), a));
        }
    }
    bail!("denominator factor `{p}` is not a variable or a linear univariate polynomial")
}

fn single_variable(p: &Poly) -> Option<usize> {
    let mut terms = p.terms();
    let (e, c) = terms.next()?;
    if terms.next().is_some() || !c.is_one() {
        return None;
    }
    let mut var = None;
    for (i, &k) in e.0.iter().enumerate() {
        match k {
            0 => {}
            1 if var.is_none() => var = Some(i),
            _ => return None,
        }
    }
    var
}

/// Parse an element: a polynomial numerator over an optional product of
/// declared denominator factors.
pub fn parse_element(s: &str, ctx: &VarContext) -> Result<RationalFunction> {
    let tokens = tokenize(s)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ctx,
    };
    let num = p.parse_expr()?;
    if p.peek().is_none() {
        return Ok(RationalFunction::from_poly(num));
    }
    p.expect(&Token::Slash)?;
    // a denominator product may be wrapped in one redundant pair of parens:
    // `1/((x-1)^2*x)` means the factors `(x-1)^2` and `x`
    while outer_parens_are_redundant(&p.tokens[p.pos..]) {
        p.tokens.pop();
        p.tokens.remove(p.pos);
    }
    let mut factors: Vec<(DenFactor, u32)> = Vec::new();
    let mut unit = Scalar::one();
    loop {
        let (f, u, m) = p.parse_den_factor()?;
        unit = unit * u.pow(m as i64);
        factors.push((f, m));
        match p.peek() {
            Some(Token::Star) => {
                p.next();
            }
            None => break,
            other => bail!("unexpected token after denominator factor: {other:?}"),
        }
    }
    let den = Denominator::from_factors(factors);
    Ok(RationalFunction::new(num.scale(&unit.recip()), den))
}

/// Parse a plain rational scalar (integer or `a/b`).
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    s.trim().parse::<Scalar>().map_err(|e| anyhow!(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx1() -> VarContext {
        VarContext { nvars: 1 }
    }

    #[test]
    fn rational_literal_vs_division() {
        let f = parse_element("1/2*x", &ctx1()).unwrap();
        assert!(f.den().is_one());
        assert_eq!(f.num().coeff(&[1]), Scalar::ratio(1, 2));

        let g = parse_element("1/x", &ctx1()).unwrap();
        assert_eq!(g.den().degree(), 1);
        assert!(g.num().constant_value().unwrap().is_one());
    }

    #[test]
    fn linear_factor_normalizes() {
        // 1/(2*x - 4) == (1/2) / (x - 2)
        let f = parse_element("1/(2*x - 4)", &ctx1()).unwrap();
        assert_eq!(f.num().constant_value().unwrap(), Scalar::ratio(1, 2));
        assert_eq!(f.den().multiplicity_at_root(&Scalar::from_int(2)), 1);
    }

    #[test]
    fn composite_denominator() {
        let f = parse_element("(x^2 + 1)/((x-1)^2*x)", &ctx1()).unwrap();
        assert_eq!(f.den().degree(), 3);
        assert_eq!(f.den().multiplicity_at_root(&Scalar::one()), 2);
        assert_eq!(f.den().multiplicity_at_root(&Scalar::zero()), 1);
    }

    #[test]
    fn multivariate_elements() {
        let ctx = VarContext { nvars: 2 };
        let f = parse_element("x1^2*x2 - 3*x2", &ctx).unwrap();
        assert_eq!(f.num().coeff(&[2, 1]), Scalar::one());
        assert_eq!(f.num().coeff(&[0, 1]), Scalar::from_int(-3));
        let g = parse_element("1/x2", &ctx).unwrap();
        assert_eq!(g.den().var_multiplicity(1), 1);
        assert!(parse_element("1/(x1 - 1)", &ctx).is_err());
    }

    #[test]
    fn rejects_nonlinear_denominators() {
        assert!(parse_element("1/(x^2 - 1)", &ctx1()).is_err());
        assert!(parse_element("x +* 2", &ctx1()).is_err());
    }
}
