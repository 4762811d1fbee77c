//! Sparse multivariate polynomials over exact rational coefficients.
//!
//! Terms are keyed by exponent vectors and iterate in graded lexicographic
//! order, which fixes serialization and makes triangular solves
//! deterministic. Zero coefficients are never stored.

use crate::coefficients::Scalar;
use crate::error::{Error, Result};
use num::{One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector of a monomial (doubles as an operator multi-index).
/// Ordered by total degree first, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn constant(arity: usize) -> Self {
        Monomial(vec![0; arity])
    }

    /// The exponent vector of `x_i` (0-based variable index).
    pub fn var(arity: usize, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        Monomial(e)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.arity(), other.arity());
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise `<=`, the divisibility order on monomials.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise difference; `None` unless `self` divides `other`.
    pub fn quotient(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        Some(Monomial(
            other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect(),
        ))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Every monomial of the given arity with total degree at most `bound`,
/// in ascending graded-lex order.
pub fn monomials_up_to(arity: usize, bound: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; arity];
    fn rec(out: &mut Vec<Monomial>, current: &mut Vec<u32>, pos: usize, left: u32) {
        if pos == current.len() {
            out.push(Monomial(current.clone()));
            return;
        }
        for e in 0..=left {
            current[pos] = e;
            rec(out, current, pos + 1, left - e);
        }
        current[pos] = 0;
    }
    rec(&mut out, &mut current, 0, bound);
    out.sort();
    out
}

/// Sparse multivariate polynomial with `Scalar` coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    arity: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero(arity: usize) -> Self {
        Poly { arity, terms: BTreeMap::new() }
    }

    pub fn one(arity: usize) -> Self {
        Poly::constant(arity, Scalar::one())
    }

    pub fn constant(arity: usize, c: Scalar) -> Self {
        let mut p = Poly::zero(arity);
        p.add_term(Monomial::constant(arity), c);
        p
    }

    /// The variable `x_i` (0-based index).
    pub fn var(arity: usize, i: usize) -> Self {
        let mut p = Poly::zero(arity);
        p.add_term(Monomial::var(arity, i), Scalar::one());
        p
    }

    pub fn monomial(m: Monomial, c: Scalar) -> Self {
        let mut p = Poly::zero(m.arity());
        p.add_term(m, c);
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Monomial::constant(self.arity))
                .is_some_and(|c| c.is_one())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    /// Degree in variable `i`; `None` for the zero polynomial.
    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[i]).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&Monomial::constant(self.arity))
    }

    /// Add `c * m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        debug_assert_eq!(m.arity(), self.arity);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.arity);
        }
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.arity, other.arity);
        let mut out = Poly::zero(self.arity);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one(self.arity);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Substitute `image` for variable `i`, leaving other variables alone.
    pub fn substitute(&self, i: usize, image: &Poly) -> Poly {
        debug_assert_eq!(self.arity, image.arity());
        // Cache powers of the image since exponents repeat across terms.
        let max_e = self.degree_in(i).unwrap_or(0);
        let mut powers = Vec::with_capacity(max_e as usize + 1);
        powers.push(Poly::one(self.arity));
        for e in 1..=max_e {
            powers.push(powers[e as usize - 1].mul(image));
        }
        let mut out = Poly::zero(self.arity);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = rest.0[i];
            rest.0[i] = 0;
            let term = powers[e as usize].mul(&Poly::monomial(rest, c.clone()));
            out = out.add(&term);
        }
        out
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut lower = m.clone();
            lower.0[i] = e - 1;
            out.add_term(lower, c * Scalar::from_integer(e.into()));
        }
        out
    }

    /// Exact division by a nonzero polynomial univariate in variable `i`
    /// (all its terms involve only `x_i`). Errors if the division leaves a
    /// remainder.
    pub fn div_exact_univariate(&self, divisor: &Poly, i: usize) -> Result<Poly> {
        debug_assert_eq!(self.arity, divisor.arity());
        if divisor.is_zero() {
            return Err(Error::Indivisible("division by zero polynomial".into()));
        }
        debug_assert!(
            divisor.terms.keys().all(|m| m.total_degree() == m.0[i]),
            "divisor must be univariate in the dividing variable"
        );
        let ddeg = divisor.degree_in(i).expect("nonzero divisor");
        let dlead = divisor.coefficient(&{
            let mut m = Monomial::constant(self.arity);
            m.0[i] = ddeg;
            m
        });
        // Long division of `self`, viewed as univariate in x_i with
        // polynomial coefficients; the divisor's leading coefficient is a
        // scalar, so every step is exact.
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.arity);
        while let Some(rdeg) = rem.degree_in(i) {
            if rem.is_zero() || rdeg < ddeg {
                break;
            }
            // leading slice of `rem` in x_i-degree rdeg
            let mut step = Poly::zero(self.arity);
            for (m, c) in rem.terms.iter().filter(|(m, _)| m.0[i] == rdeg) {
                let mut lower = m.clone();
                lower.0[i] = rdeg - ddeg;
                step.add_term(lower, c / &dlead);
            }
            quot = quot.add(&step);
            rem = rem.sub(&step.mul(divisor));
        }
        if rem.is_zero() {
            Ok(quot)
        } else {
            Err(Error::Indivisible(format!(
                "remainder {rem} after dividing by {divisor}"
            )))
        }
    }
}

impl fmt::Display for Poly {
    /// Canonical form: ascending graded-lex, explicit `*` between factors,
    /// rationals as `num/den`, e.g. `5 - x2 + 3/2*x1^2*x3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_terms(f, self.terms.iter())
    }
}

/// Shared term renderer used by `Poly` and operator printing.
pub(crate) fn format_terms<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a Monomial, &'a Scalar)>,
) -> fmt::Result {
    let mut first = true;
    let mut any = false;
    for (m, c) in terms {
        any = true;
        let (sign_neg, mag) = if c < &Scalar::zero() {
            (true, -c)
        } else {
            (false, c.clone())
        };
        if first {
            if sign_neg {
                write!(f, "-")?;
            }
            first = false;
        } else if sign_neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        write!(f, "{}", term_body(m, &mag))?;
    }
    if !any {
        write!(f, "0")?;
    }
    Ok(())
}

/// Render `mag * monomial` without a sign, eliding unit coefficients.
pub(crate) fn term_body(m: &Monomial, mag: &Scalar) -> String {
    let mono = monomial_body(m);
    match (mono.is_empty(), mag.is_one()) {
        (true, _) => format!("{mag}"),
        (false, true) => mono,
        (false, false) => format!("{mag}*{mono}"),
    }
}

/// Render the variable part `x1^2*x3`; empty for the constant monomial.
pub(crate) fn monomial_body(m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, e)),
        }
    }
    parts.join("*")
}
