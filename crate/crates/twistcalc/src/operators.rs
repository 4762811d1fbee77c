//! Twisted differential operators in the divided-power basis.
//!
//! An operator is a finite sum `Σ z_k ∂^[k]` where `∂^[k](f)` is the
//! coefficient of the order-|k| Taylor jet of `f` at index `k`. The divided
//! powers are the canonical storage form; plain powers `∂^e` appear only
//! transiently in word rewriting and are converted on the way out.

use crate::coefficients::{q_factorial, Scalar};
use crate::error::{Error, Result};
use crate::jets::taylor;
use crate::poly::{monomials_up_to, Monomial, Poly};
use crate::twist::{TwistKind, TwistSpec};
use num::One;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt;

/// `Σ z_k ∂^[k]` with polynomial coefficients; immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistedOperator {
    coeffs: BTreeMap<Monomial, Poly>,
    spec: TwistSpec,
}

impl TwistedOperator {
    pub fn zero(spec: TwistSpec) -> Self {
        TwistedOperator { coeffs: BTreeMap::new(), spec }
    }

    pub fn identity(spec: TwistSpec) -> Self {
        let d = spec.arity();
        TwistedOperator::multiplication(Poly::one(d), spec)
    }

    /// The multiplication operator `f ↦ g·f`.
    pub fn multiplication(g: Poly, spec: TwistSpec) -> Self {
        let mut op = TwistedOperator::zero(spec);
        op.insert(Monomial::constant(op.spec.arity()), g);
        op
    }

    /// The divided power `∂^[k]` itself.
    pub fn divided_power(k: Monomial, spec: TwistSpec) -> Self {
        let mut op = TwistedOperator::zero(spec);
        let one = Poly::one(op.spec.arity());
        op.insert(k, one);
        op
    }

    /// Build from explicit coefficients, dropping zeros.
    pub fn from_coeffs(
        coeffs: impl IntoIterator<Item = (Monomial, Poly)>,
        spec: TwistSpec,
    ) -> Self {
        let mut op = TwistedOperator::zero(spec);
        for (k, c) in coeffs {
            op.insert(k, c);
        }
        op
    }

    pub fn spec(&self) -> &TwistSpec {
        &self.spec
    }

    pub fn arity(&self) -> usize {
        self.spec.arity()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Max |k| with a nonzero coefficient; 0 for the zero operator.
    pub fn order(&self) -> u32 {
        self.coeffs
            .keys()
            .map(Monomial::total_degree)
            .max()
            .unwrap_or(0)
    }

    /// Max total degree among coefficients; 0 for the zero operator.
    pub fn max_coeff_degree(&self) -> u32 {
        self.coeffs
            .values()
            .filter_map(Poly::total_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Poly)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, k: &Monomial) -> Poly {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.spec.arity()))
    }

    fn insert(&mut self, k: Monomial, c: Poly) {
        debug_assert_eq!(k.arity(), self.spec.arity());
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(k) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &TwistedOperator) -> Result<TwistedOperator> {
        ensure_same_spec(&self.spec, &other.spec)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.insert(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> TwistedOperator {
        TwistedOperator {
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), c.neg())).collect(),
            spec: self.spec.clone(),
        }
    }

    /// Left multiplication by a polynomial: `(g·) ∘ self`.
    pub fn scale_poly(&self, g: &Poly) -> TwistedOperator {
        let mut out = TwistedOperator::zero(self.spec.clone());
        for (k, c) in &self.coeffs {
            out.insert(k.clone(), c.mul(g));
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> TwistedOperator {
        self.scale_poly(&Poly::constant(self.spec.arity(), s.clone()))
    }

    /// Apply to a polynomial: one Taylor jet at the operator's order, then
    /// the coefficient pairing. Root-of-unity parameters cannot reach here;
    /// they are rejected when the spec is built.
    pub fn apply(&self, f: &Poly) -> Result<Poly> {
        let jet = taylor(f, self.order(), &self.spec)?;
        let mut out = Poly::zero(self.spec.arity());
        for (k, z) in &self.coeffs {
            out = out.add(&z.mul(&jet.coefficient(k)));
        }
        Ok(out)
    }

    /// JSON form used by the CLI: same shape as jets.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .map(|(k, c)| json!({"k": k.0, "coeff": c.to_string()}))
            .collect();
        json!({"order": self.order(), "terms": terms})
    }
}

impl fmt::Display for TwistedOperator {
    /// Round-trippable through the expression grammar: terms ascending,
    /// `coeff*dp[k1,..,kd]`, multi-term coefficients parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k.is_constant() {
                if c.terms().count() > 1 {
                    write!(f, "({c})")?;
                } else {
                    write!(f, "{c}")?;
                }
                continue;
            }
            let ks: Vec<String> = k.0.iter().map(u32::to_string).collect();
            let dp = format!("dp[{}]", ks.join(","));
            if c.is_one() {
                write!(f, "{dp}")?;
            } else if c.terms().count() > 1 {
                write!(f, "({c})*{dp}")?;
            } else {
                write!(f, "{c}*{dp}")?;
            }
        }
        Ok(())
    }
}

fn ensure_same_spec(a: &TwistSpec, b: &TwistSpec) -> Result<()> {
    if a != b {
        return Err(Error::Domain(
            "operators from different twist specs cannot be combined".into(),
        ));
    }
    Ok(())
}

/// Solve for the unique operator of order ≤ N whose action matches on all
/// monomials of degree ≤ N. No verification beyond that degree: the result
/// is exact on monomials of degree ≤ N and is silent about higher degrees.
///
/// The solve is triangular: `∂^[k](x^m)` vanishes unless k ≤ m
/// componentwise, and equals 1 at k = m.
pub fn truncated_expansion(
    action: &mut dyn FnMut(&Poly) -> Result<Poly>,
    n: u32,
    spec: &TwistSpec,
) -> Result<TwistedOperator> {
    let d = spec.arity();
    let mut op = TwistedOperator::zero(spec.clone());
    for m in monomials_up_to(d, n) {
        let xm = Poly::monomial(m.clone(), Scalar::one());
        let jet = taylor(&xm, n, spec)?;
        let mut z = action(&xm)?;
        for (k, c) in op.terms() {
            if k == &m {
                continue;
            }
            z = z.sub(&c.mul(&jet.coefficient(k)));
        }
        // ∂^[m](x^m) = 1, so the residual is the coefficient itself.
        op.insert(m, z);
    }
    Ok(op)
}

/// Recover an operator from its action, then verify the reconstruction by
/// sweeping every monomial of degree ≤ N + D. A residual means the action
/// was not an order-≤N operator (or needs a larger bound) and is an error.
pub fn recover_from_action(
    action: &mut dyn FnMut(&Poly) -> Result<Poly>,
    n: u32,
    d_bound: u32,
    spec: &TwistSpec,
) -> Result<TwistedOperator> {
    let op = truncated_expansion(action, n, spec)?;
    let arity = spec.arity();
    for m in monomials_up_to(arity, n + d_bound) {
        let xm = Poly::monomial(m.clone(), Scalar::one());
        let got = op.apply(&xm)?;
        let want = action(&xm)?;
        if got != want {
            return Err(Error::Reconstruction(format!(
                "residual action on {xm}: operator gives {got}, action gives {want}; order bound {n} too small"
            )));
        }
    }
    Ok(op)
}

/// Composition by action recovery: valid uniformly across twist kinds, with
/// order bound `order(p) + order(q)` guaranteed by the operator theory.
pub fn compose(p: &TwistedOperator, q: &TwistedOperator) -> Result<TwistedOperator> {
    ensure_same_spec(p.spec(), q.spec())?;
    let n = p.order() + q.order();
    let d_bound = p.max_coeff_degree() + q.max_coeff_degree();
    recover_from_action(
        &mut |f| p.apply(&q.apply(f)?),
        n,
        d_bound,
        p.spec(),
    )
}

/// A word in the generators: coefficients and single twisted derivations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Coeff(Poly),
    /// A single ∂_i (0-based variable index).
    D(usize),
}

/// Nonempty composition-ordered sequence of atoms (leftmost acts last).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorWord {
    pub atoms: Vec<Atom>,
}

impl OperatorWord {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("operator word must be nonempty".into()));
        }
        Ok(OperatorWord { atoms })
    }

    /// Apply the word directly, without normalizing.
    pub fn apply(&self, f: &Poly, spec: &TwistSpec) -> Result<Poly> {
        let mut out = f.clone();
        for atom in self.atoms.iter().rev() {
            out = match atom {
                Atom::Coeff(a) => a.mul(&out),
                Atom::D(i) => spec.derivation(&out, *i)?,
            };
        }
        Ok(out)
    }
}

/// Rewrite a word into divided-power normal form.
///
/// Right-to-left fold through the relations `∂_i ∘ a = ∂_i(a) + σ_i(a) ∂_i`
/// (coefficients move left) leaves `Σ c_e ∂^e` in plain powers; the final
/// conversion uses the closed form `∂^e = Π_i (e_i)!_{q_i} ∂^[e]` when every
/// variable has a scalar factorial (q-twist, shift, identity), and action
/// recovery otherwise (Mahler, custom).
pub fn normal_form(word: &OperatorWord, spec: &TwistSpec) -> Result<TwistedOperator> {
    let d = spec.arity();
    // plain-power accumulator: exponent of ∂^e -> coefficient
    let mut acc: BTreeMap<Monomial, Poly> = BTreeMap::new();
    acc.insert(Monomial::constant(d), Poly::one(d));
    for atom in word.atoms.iter().rev() {
        let mut next: BTreeMap<Monomial, Poly> = BTreeMap::new();
        let mut put = |k: Monomial, c: Poly| {
            if c.is_zero() {
                return;
            }
            use std::collections::btree_map::Entry;
            match next.entry(k) {
                Entry::Vacant(e) => {
                    e.insert(c);
                }
                Entry::Occupied(mut e) => {
                    let sum = e.get().add(&c);
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        };
        match atom {
            Atom::Coeff(a) => {
                for (e, c) in &acc {
                    put(e.clone(), a.mul(c));
                }
            }
            Atom::D(i) => {
                for (e, c) in &acc {
                    // ∂_i ∘ c ∂^e = ∂_i(c) ∂^e + σ_i(c) ∂^{e + e_i}
                    put(e.clone(), spec.derivation(c, *i)?);
                    let mut up = e.clone();
                    up.0[*i] += 1;
                    put(up, spec.sigma_apply(c, *i));
                }
            }
        }
        acc = next;
    }
    plain_powers_to_divided(&acc, spec)
}

/// Whether ∂_i^e = s·∂^[e e_i] for a scalar s in this variable's kind, and
/// that scalar. Holds for q-twists ((e)_q!), shifts and identity (e!).
fn scalar_factorial(kind: &TwistKind, e: u32) -> Option<Scalar> {
    match kind {
        TwistKind::QTwist { q } => Some(q_factorial(e, q)),
        TwistKind::Shift { .. } | TwistKind::Identity => {
            Some(q_factorial(e, &Scalar::one()))
        }
        TwistKind::Mahler { .. } | TwistKind::Custom { .. } => None,
    }
}

fn plain_powers_to_divided(
    acc: &BTreeMap<Monomial, Poly>,
    spec: &TwistSpec,
) -> Result<TwistedOperator> {
    let d = spec.arity();
    let all_scalar = (0..d).all(|i| scalar_factorial(spec.kind(i), 1).is_some());
    if all_scalar {
        let mut op = TwistedOperator::zero(spec.clone());
        for (e, c) in acc {
            let mut s = Scalar::one();
            for (i, &ei) in e.0.iter().enumerate() {
                s *= scalar_factorial(spec.kind(i), ei).expect("checked scalar kind");
            }
            op.insert(e.clone(), c.scale(&s));
        }
        return Ok(op);
    }
    // general kinds: recover from the plain-power action
    let order = acc.keys().map(Monomial::total_degree).max().unwrap_or(0);
    let coeff_deg = acc
        .values()
        .filter_map(Poly::total_degree)
        .max()
        .unwrap_or(0);
    let apply_plain = |f: &Poly| -> Result<Poly> {
        let mut out = Poly::zero(d);
        for (e, c) in acc {
            let mut v = f.clone();
            for (i, &ei) in e.0.iter().enumerate() {
                for _ in 0..ei {
                    v = spec.derivation(&v, i)?;
                }
            }
            out = out.add(&c.mul(&v));
        }
        Ok(out)
    };
    let op = truncated_expansion(&mut |f| apply_plain(f), order, spec)?;
    // self-consistent sweep: validate past the solve using the recovered
    // coefficient degrees as the budget
    let budget = op.max_coeff_degree().max(coeff_deg);
    for m in monomials_up_to(d, order + budget) {
        let xm = Poly::monomial(m, Scalar::one());
        if op.apply(&xm)? != apply_plain(&xm)? {
            return Err(Error::Reconstruction(
                "plain-power conversion left a residual".into(),
            ));
        }
    }
    Ok(op)
}
