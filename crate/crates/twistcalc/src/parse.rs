//! Expression grammar for polynomials and operators.
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := factor (['*'] factor)*
//! factor := primary ('^' int)*
//! primary:= rational | var | dop | '(' expr ')'
//! rational := int ['/' int]
//! var    := 'x' int          (1-based)
//! dop    := 'd' int | 'dp' '[' int (',' int)* ']'
//! ```
//!
//! Juxtaposition of factors is composition (multiplication on the
//! commutative side). The pretty-printers on [`Poly`] and
//! [`TwistedOperator`] emit canonical forms this grammar accepts, so
//! parse after print is the identity.

use crate::coefficients::{scalar_ratio_big, Scalar};
use crate::error::{Error, Result};
use crate::operators::{compose, Atom, OperatorWord, TwistedOperator};
use crate::poly::{Monomial, Poly};
use crate::twist::TwistSpec;
use num::BigInt;

/// Abstract syntax shared by polynomial and operator inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Rational(Scalar),
    /// 0-based variable index.
    Var(usize),
    /// A single twisted derivation ∂_i, 0-based.
    D(usize),
    /// A divided power ∂^[k] with the full exponent vector.
    DivPow(Vec<u32>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    /// Whether any `dp[...]` atom occurs; such expressions have no word
    /// form and must take the operator-evaluation route.
    pub fn has_divided_power(&self) -> bool {
        match self {
            Expr::DivPow(_) => true,
            Expr::Rational(_) | Expr::Var(_) | Expr::D(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_divided_power(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.has_divided_power() || b.has_divided_power()
            }
        }
    }

    /// Whether any operator atom (`d`/`dp`) occurs.
    pub fn has_operator_atom(&self) -> bool {
        match self {
            Expr::D(_) | Expr::DivPow(_) => true,
            Expr::Rational(_) | Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_operator_atom(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.has_operator_atom() || b.has_operator_atom()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(String),
    Var(usize),
    D(usize),
    Dp,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(s) => format!("integer {s}"),
            Tok::Var(i) => format!("x{}", i + 1),
            Tok::D(i) => format!("d{}", i + 1),
            Tok::Dp => "dp".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Slash => "'/'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    offset: usize,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = 1 + before.matches('\n').count();
    let col = offset - before.rfind('\n').map(|p| p + 1).unwrap_or(0) + 1;
    (line, col)
}

fn err_at(src: &str, offset: usize, msg: &str) -> Error {
    let (line, col) = line_col(src, offset);
    Error::Parse(format!("{line}:{col}: {msg}"))
}

fn lex(src: &str) -> Result<Vec<Lexed>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '0'..='9' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                out.push(Lexed { tok: Tok::Int(src[i..j].into()), offset: start });
                i = j;
            }
            'x' | 'd' => {
                let mut j = i + 1;
                if c == 'd' && j < bytes.len() && bytes[j] == b'p' {
                    out.push(Lexed { tok: Tok::Dp, offset: start });
                    i = j + 1;
                    continue;
                }
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(err_at(src, start, &format!("expected digits after '{c}'")));
                }
                let n: usize = src[i + 1..j]
                    .parse()
                    .map_err(|_| err_at(src, start, "index too large"))?;
                if n == 0 {
                    return Err(err_at(src, start, "indices are 1-based; 0 is invalid"));
                }
                let tok = if c == 'x' { Tok::Var(n - 1) } else { Tok::D(n - 1) };
                out.push(Lexed { tok, offset: start });
                i = j;
            }
            '[' => push1(&mut out, Tok::LBracket, &mut i, start),
            ']' => push1(&mut out, Tok::RBracket, &mut i, start),
            ',' => push1(&mut out, Tok::Comma, &mut i, start),
            '+' => push1(&mut out, Tok::Plus, &mut i, start),
            '-' => push1(&mut out, Tok::Minus, &mut i, start),
            '*' => push1(&mut out, Tok::Star, &mut i, start),
            '^' => push1(&mut out, Tok::Caret, &mut i, start),
            '/' => push1(&mut out, Tok::Slash, &mut i, start),
            '(' => push1(&mut out, Tok::LParen, &mut i, start),
            ')' => push1(&mut out, Tok::RParen, &mut i, start),
            _ => return Err(err_at(src, start, &format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

fn push1(out: &mut Vec<Lexed>, tok: Tok, i: &mut usize, offset: usize) {
    out.push(Lexed { tok, offset });
    *i += 1;
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Lexed>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn next_offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|l| l.offset)
            .unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|l| &l.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(err_at(
                self.src,
                self.next_offset(),
                &format!("expected {what}, found {}", t.describe()),
            )),
            None => Err(err_at(
                self.src,
                self.next_offset(),
                &format!("expected {what}, found end of input"),
            )),
        }
    }

    fn parse_uint(&mut self, what: &str) -> Result<u32> {
        match self.peek().cloned() {
            Some(Tok::Int(s)) => {
                self.pos += 1;
                s.parse::<u32>()
                    .map_err(|_| err_at(self.src, self.next_offset(), &format!("{what} too large")))
            }
            other => Err(err_at(
                self.src,
                self.next_offset(),
                &format!(
                    "expected {what}, found {}",
                    other.map(|t| t.describe()).unwrap_or_else(|| "end of input".into())
                ),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Int(_)) | Some(Tok::Var(_)) | Some(Tok::D(_)) | Some(Tok::Dp)
                | Some(Tok::LParen)
        )
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            if matches!(self.peek(), Some(Tok::Star)) {
                self.pos += 1;
                acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
            } else if self.starts_factor() {
                // juxtaposition: composition of operator atoms
                acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut acc = self.primary()?;
        while matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let e = self.parse_uint("exponent")?;
            acc = Expr::Pow(Box::new(acc), e);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Expr> {
        let offset = self.next_offset();
        match self.bump().cloned() {
            Some(Tok::Int(num)) => {
                let num: BigInt = num.parse().expect("lexer produced digits");
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.pos += 1;
                    let doff = self.next_offset();
                    match self.bump().cloned() {
                        Some(Tok::Int(den)) => {
                            let den: BigInt = den.parse().expect("lexer produced digits");
                            scalar_ratio_big(num, den)
                                .map(Expr::Rational)
                                .map_err(|_| err_at(self.src, doff, "zero denominator"))
                        }
                        _ => Err(err_at(self.src, doff, "expected denominator")),
                    }
                } else {
                    Ok(Expr::Rational(Scalar::from_integer(num)))
                }
            }
            Some(Tok::Var(i)) => Ok(Expr::Var(i)),
            Some(Tok::D(i)) => Ok(Expr::D(i)),
            Some(Tok::Dp) => {
                self.expect(&Tok::LBracket, "'[' after dp")?;
                let mut ks = vec![self.parse_uint("exponent")?];
                while matches!(self.peek(), Some(Tok::Comma)) {
                    self.pos += 1;
                    ks.push(self.parse_uint("exponent")?);
                }
                self.expect(&Tok::RBracket, "']'")?;
                Ok(Expr::DivPow(ks))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            other => Err(err_at(
                self.src,
                offset,
                &format!(
                    "expected rational, variable, operator, or '(', found {}",
                    other.map(|t| t.describe()).unwrap_or_else(|| "end of input".into())
                ),
            )),
        }
    }
}

/// Parse a full expression; trailing input is an error.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(err_at(src, 0, "empty input"));
    }
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(err_at(
            src,
            p.next_offset(),
            &format!("unexpected {} after expression", t.describe()),
        ));
    }
    Ok(e)
}

/// Lower an expression to a polynomial of the given arity. Operator atoms
/// are rejected.
pub fn expr_to_poly(e: &Expr, arity: usize) -> Result<Poly> {
    match e {
        Expr::Rational(r) => Ok(Poly::constant(arity, r.clone())),
        Expr::Var(i) => {
            check_var(*i, arity)?;
            Ok(Poly::var(arity, *i))
        }
        Expr::D(_) | Expr::DivPow(_) => Err(Error::Parse(
            "operator atom in polynomial context".into(),
        )),
        Expr::Neg(a) => Ok(expr_to_poly(a, arity)?.neg()),
        Expr::Add(a, b) => Ok(expr_to_poly(a, arity)?.add(&expr_to_poly(b, arity)?)),
        Expr::Sub(a, b) => Ok(expr_to_poly(a, arity)?.sub(&expr_to_poly(b, arity)?)),
        Expr::Mul(a, b) => Ok(expr_to_poly(a, arity)?.mul(&expr_to_poly(b, arity)?)),
        Expr::Pow(a, n) => Ok(expr_to_poly(a, arity)?.pow(*n)),
    }
}

fn check_var(i: usize, arity: usize) -> Result<()> {
    if i >= arity {
        return Err(Error::Parse(format!(
            "variable x{} exceeds the configured dimension {arity}",
            i + 1
        )));
    }
    Ok(())
}

/// Evaluate an expression as a twisted operator over `spec`: sums add,
/// products compose, `d`/`dp` atoms are divided powers, everything scalar
/// or polynomial is a multiplication operator.
pub fn expr_to_operator(e: &Expr, spec: &TwistSpec) -> Result<TwistedOperator> {
    let d = spec.arity();
    match e {
        Expr::Rational(r) => Ok(TwistedOperator::multiplication(
            Poly::constant(d, r.clone()),
            spec.clone(),
        )),
        Expr::Var(i) => {
            check_var(*i, d)?;
            Ok(TwistedOperator::multiplication(Poly::var(d, *i), spec.clone()))
        }
        Expr::D(i) => {
            check_var(*i, d)?;
            Ok(TwistedOperator::divided_power(Monomial::var(d, *i), spec.clone()))
        }
        Expr::DivPow(ks) => {
            if ks.len() != d {
                return Err(Error::Parse(format!(
                    "dp[...] has {} indices, the configured dimension is {d}",
                    ks.len()
                )));
            }
            Ok(TwistedOperator::divided_power(Monomial(ks.clone()), spec.clone()))
        }
        Expr::Neg(a) => Ok(expr_to_operator(a, spec)?.neg()),
        Expr::Add(a, b) => expr_to_operator(a, spec)?.add(&expr_to_operator(b, spec)?),
        Expr::Sub(a, b) => {
            expr_to_operator(a, spec)?.add(&expr_to_operator(b, spec)?.neg())
        }
        Expr::Mul(a, b) => compose(&expr_to_operator(a, spec)?, &expr_to_operator(b, spec)?),
        Expr::Pow(a, n) => {
            let base = expr_to_operator(a, spec)?;
            let mut acc = TwistedOperator::identity(spec.clone());
            for _ in 0..*n {
                acc = compose(&acc, &base)?;
            }
            Ok(acc)
        }
    }
}

/// Distribute an expression into a sum of operator words (atoms only:
/// coefficients and single derivations). `dp[...]` has no word form and is
/// rejected; callers route such expressions through [`expr_to_operator`].
pub fn expr_to_words(e: &Expr, arity: usize) -> Result<Vec<OperatorWord>> {
    let words = distribute(e, arity)?;
    words
        .into_iter()
        .map(|atoms| OperatorWord::new(atoms))
        .collect()
}

fn distribute(e: &Expr, arity: usize) -> Result<Vec<Vec<Atom>>> {
    match e {
        Expr::Rational(r) => Ok(vec![vec![Atom::Coeff(Poly::constant(arity, r.clone()))]]),
        Expr::Var(i) => {
            check_var(*i, arity)?;
            Ok(vec![vec![Atom::Coeff(Poly::var(arity, *i))]])
        }
        Expr::D(i) => {
            check_var(*i, arity)?;
            Ok(vec![vec![Atom::D(*i)]])
        }
        Expr::DivPow(_) => Err(Error::Parse(
            "dp[...] atoms have no word form; use the operator route".into(),
        )),
        Expr::Neg(a) => {
            let minus_one = Atom::Coeff(Poly::constant(arity, -Scalar::from_integer(1.into())));
            Ok(distribute(a, arity)?
                .into_iter()
                .map(|mut w| {
                    w.insert(0, minus_one.clone());
                    w
                })
                .collect())
        }
        Expr::Add(a, b) => {
            let mut out = distribute(a, arity)?;
            out.extend(distribute(b, arity)?);
            Ok(out)
        }
        Expr::Sub(a, b) => {
            distribute(&Expr::Add(a.clone(), Box::new(Expr::Neg(b.clone()))), arity)
        }
        Expr::Mul(a, b) => {
            let left = distribute(a, arity)?;
            let right = distribute(b, arity)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    let mut w = l.clone();
                    w.extend(r.iter().cloned());
                    out.push(w);
                }
            }
            Ok(out)
        }
        Expr::Pow(a, n) => {
            if *n == 0 {
                return Ok(vec![vec![Atom::Coeff(Poly::one(arity))]]);
            }
            let mut acc = distribute(a, arity)?;
            for _ in 1..*n {
                let base = distribute(a, arity)?;
                let mut next = Vec::with_capacity(acc.len() * base.len());
                for l in &acc {
                    for r in &base {
                        let mut w = l.clone();
                        w.extend(r.iter().cloned());
                        next.push(w);
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

/// Parse a polynomial directly.
pub fn parse_poly(src: &str, arity: usize) -> Result<Poly> {
    expr_to_poly(&parse_expr(src)?, arity)
}

/// Parse a single operator word: an expression that distributes to exactly
/// one word (no sums).
pub fn parse_operator(src: &str, arity: usize) -> Result<OperatorWord> {
    let mut words = expr_to_words(&parse_expr(src)?, arity)?;
    match words.len() {
        1 => Ok(words.pop().expect("length checked")),
        n => Err(Error::Parse(format!(
            "expected a single operator word, expression has {n} summands"
        ))),
    }
}
