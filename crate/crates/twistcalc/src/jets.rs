//! Jets: truncated principal parts in the twisted basis.
//!
//! The order-n jet algebra is spanned over `A = K[x]` by the twisted basis
//! elements `xi^(k) = prod_i prod_{j<k_i} (xi_i + x_i - sigma_i^j(x_i))`
//! for `|k| <= n`; reduction modulo the truncation ideal is literally
//! dropping twisted indices with `|k| > n`. The Taylor map sends `f` to
//! `f(x + xi)` written in that basis; its coefficient at `k` is the divided
//! derivative `d^[k](f)`, which is what every other module consumes.

use crate::coefficients::{binomial, Scalar};
use crate::error::{Error, Result};
use crate::poly::{monomial_body, Monomial, Poly};
use crate::twist::TwistSpec;
use num::One;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt;

/// Polynomial in the auxiliary variables `xi_1..xi_d` with `Poly`
/// coefficients; the expanded (monomial-basis) form of a jet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XiPoly {
    arity: usize,
    terms: BTreeMap<Monomial, Poly>,
}

impl XiPoly {
    pub fn zero(arity: usize) -> Self {
        XiPoly { arity, terms: BTreeMap::new() }
    }

    pub fn one(arity: usize) -> Self {
        XiPoly::scalar(Poly::one(arity))
    }

    /// A coefficient with no xi part.
    pub fn scalar(c: Poly) -> Self {
        let mut p = XiPoly::zero(c.arity());
        p.add_term(Monomial::constant(c.arity()), c);
        p
    }

    /// The variable `xi_i`.
    pub fn xi(arity: usize, i: usize) -> Self {
        let mut p = XiPoly::zero(arity);
        p.add_term(Monomial::var(arity, i), Poly::one(arity));
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree in the xi variables; `None` when zero.
    pub fn xi_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Poly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: &Monomial) -> Poly {
        self.terms
            .get(k)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.arity))
    }

    pub fn add_term(&mut self, k: Monomial, c: Poly) {
        debug_assert_eq!(k.arity(), self.arity);
        debug_assert_eq!(c.arity(), self.arity);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
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

    pub fn add(&self, other: &XiPoly) -> XiPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &XiPoly) -> XiPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.neg());
        }
        out
    }

    pub fn mul(&self, other: &XiPoly) -> XiPoly {
        let mut out = XiPoly::zero(self.arity);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.add_term(ka.mul(kb), ca.mul(cb));
            }
        }
        out
    }

    pub fn mul_poly(&self, c: &Poly) -> XiPoly {
        let mut out = XiPoly::zero(self.arity);
        for (k, a) in &self.terms {
            out.add_term(k.clone(), a.mul(c));
        }
        out
    }

    /// Substitute `xi_i ↦ value(x)` for every i, collapsing to a plain
    /// polynomial.
    pub fn evaluate_xi(&self, values: &[Poly]) -> Poly {
        debug_assert_eq!(values.len(), self.arity);
        let mut out = Poly::zero(self.arity);
        for (k, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in k.0.iter().enumerate() {
                term = term.mul(&values[i].pow(e));
            }
            out = out.add(&term);
        }
        out
    }
}

impl fmt::Display for XiPoly {
    /// Terms ascending in the xi monomial order; coefficients in
    /// parentheses when they have more than one term.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let xi = monomial_body(k).replace('x', "xi");
            let multi_term = c.terms().count() > 1;
            match (xi.is_empty(), multi_term) {
                (true, _) => write!(f, "{c}")?,
                (false, true) => write!(f, "({c})*{xi}")?,
                (false, false) if c.is_one() => write!(f, "{xi}")?,
                (false, false) => write!(f, "{c}*{xi}")?,
            }
        }
        Ok(())
    }
}

/// The expanded twisted basis element `xi^(k)`.
pub fn twisted_basis_element(k: &Monomial, spec: &TwistSpec) -> Result<XiPoly> {
    let d = spec.arity();
    debug_assert_eq!(k.arity(), d);
    let mut out = XiPoly::one(d);
    for (i, &ki) in k.0.iter().enumerate() {
        let x = Poly::var(d, i);
        for j in 0..ki {
            // factor xi_i + x_i - sigma_i^j(x_i)
            let mut factor = XiPoly::xi(d, i);
            factor.add_term(
                Monomial::constant(d),
                x.sub(&spec.power_image(i, j)?),
            );
            out = out.mul(&factor);
        }
    }
    Ok(out)
}

/// A jet: twisted-basis coefficients up to the stated order, together with
/// the spec that defines the basis. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jet {
    order: u32,
    coeffs: BTreeMap<Monomial, Poly>,
    spec: TwistSpec,
}

impl Jet {
    pub fn zero(order: u32, spec: TwistSpec) -> Self {
        Jet { order, coeffs: BTreeMap::new(), spec }
    }

    /// The jet with a single twisted-basis term `c · xi^(k)`.
    pub fn term(order: u32, k: Monomial, c: Poly, spec: TwistSpec) -> Result<Self> {
        if k.total_degree() > order {
            return Err(Error::Domain(format!(
                "index {:?} exceeds jet order {order}",
                k.0
            )));
        }
        let mut j = Jet::zero(order, spec);
        j.insert(k, c);
        Ok(j)
    }

    pub fn order(&self) -> u32 {
        self.order
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
        debug_assert!(k.total_degree() <= self.order);
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

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        ensure_same_spec(&self.spec, &other.spec)?;
        let mut out = self.clone();
        out.order = self.order.max(other.order);
        for (k, c) in &other.coeffs {
            out.insert(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Poly) -> Jet {
        // A-linear scaling on the left structure: multiplies coefficients.
        let mut out = Jet::zero(self.order, self.spec.clone());
        for (k, a) in &self.coeffs {
            out.insert(k.clone(), a.mul(c));
        }
        out
    }

    /// JSON form used by the CLI: deterministic term order, polynomial
    /// coefficients as canonical strings.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .map(|(k, c)| json!({"k": k.0, "coeff": c.to_string()}))
            .collect();
        json!({"order": self.order, "terms": terms})
    }
}

impl fmt::Display for Jet {
    /// Twisted-basis terms as `coeff*D[k]` markers, ascending in k.
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
            let ks: Vec<String> = k.0.iter().map(u32::to_string).collect();
            let multi = c.terms().count() > 1;
            if multi {
                write!(f, "({c})*xit[{}]", ks.join(","))?;
            } else if c.is_one() && !k.is_constant() {
                write!(f, "xit[{}]", ks.join(","))?;
            } else {
                write!(f, "{c}*xit[{}]", ks.join(","))?;
            }
        }
        Ok(())
    }
}

fn ensure_same_spec(a: &TwistSpec, b: &TwistSpec) -> Result<()> {
    if a != b {
        return Err(Error::Domain(
            "jets from different twist specs cannot be combined".into(),
        ));
    }
    Ok(())
}

/// Convert an expanded xi-polynomial to twisted-basis coefficients at the
/// given order. Indices above the order are reduced away (dropped), which
/// is exactly reduction modulo the truncation ideal.
pub fn to_twisted_basis(p: &XiPoly, order: u32, spec: &TwistSpec) -> Result<Jet> {
    let mut rem = p.clone();
    let mut jet = Jet::zero(order, spec.clone());
    // Peel the graded-lex-largest xi monomial each step; the twisted basis
    // element with that index has unit leading coefficient there, and all
    // its other terms are strictly smaller, so this terminates.
    while let Some((alpha, c)) = rem.terms.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) {
        let basis = twisted_basis_element(&alpha, spec)?;
        rem = rem.sub(&basis.mul_poly(&c));
        debug_assert!(rem.coefficient(&alpha).is_zero());
        if alpha.total_degree() <= order {
            jet.insert(alpha, c);
        }
    }
    Ok(jet)
}

/// Expand a jet back to its xi-monomial representative.
pub fn from_twisted_basis(jet: &Jet) -> Result<XiPoly> {
    let mut out = XiPoly::zero(jet.arity());
    for (k, c) in jet.terms() {
        out = out.add(&twisted_basis_element(k, jet.spec())?.mul_poly(c));
    }
    Ok(out)
}

/// The expanded Taylor lift `f(x + xi)` before any basis conversion.
fn taylor_expand(f: &Poly, d: usize) -> XiPoly {
    let mut out = XiPoly::zero(d);
    for (m, c) in f.terms() {
        let mut term = XiPoly::scalar(Poly::constant(d, c.clone()));
        for (i, &e) in m.0.iter().enumerate() {
            // (x_i + xi_i)^e expanded binomially
            let mut factor = XiPoly::zero(d);
            for j in 0..=e {
                let mut xm = Monomial::constant(d);
                xm.0[i] = e - j;
                let mut km = Monomial::constant(d);
                km.0[i] = j;
                factor.add_term(km, Poly::monomial(xm, binomial(e, j)));
            }
            term = term.mul(&factor);
        }
        out = out.add(&term);
    }
    out
}

/// The Taylor jet of `f` at order `n`: coefficients are the divided
/// derivatives `d^[k](f)`.
///
/// The first-order coefficients are checked against the difference-quotient
/// derivations; a mismatch would mean the coordinates are not classical and
/// surfaces as `Error::NonClassical`. No substitution twist triggers it.
pub fn taylor(f: &Poly, n: u32, spec: &TwistSpec) -> Result<Jet> {
    debug_assert_eq!(f.arity(), spec.arity());
    let jet = to_twisted_basis(&taylor_expand(f, spec.arity()), n, spec)?;
    if n >= 1 {
        for i in 0..spec.arity() {
            let e_i = Monomial::var(spec.arity(), i);
            if jet.coefficient(&e_i) != spec.derivation(f, i)? {
                return Err(Error::NonClassical(format!(
                    "Taylor coefficient at e_{} differs from the difference quotient for {f}",
                    i + 1
                )));
            }
        }
    }
    Ok(jet)
}

/// Product in the order-n jet algebra: multiply expanded representatives,
/// convert back, reduce.
pub fn jet_multiply(a: &Jet, b: &Jet, n: u32) -> Result<Jet> {
    ensure_same_spec(a.spec(), b.spec())?;
    let prod = from_twisted_basis(a)?.mul(&from_twisted_basis(b)?);
    to_twisted_basis(&prod, n, a.spec())
}

/// A bi-jet: coefficients on pairs `xi^(k) ⊗ xi'^(k')` with `|k| <= n`,
/// `|k'| <= m`. Left coefficients are plain polynomials; scalars move
/// across the tensor through the Taylor map (the ⊗' structure).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiJet {
    left_order: u32,
    right_order: u32,
    coeffs: BTreeMap<(Monomial, Monomial), Poly>,
    spec: TwistSpec,
}

impl BiJet {
    pub fn zero(n: u32, m: u32, spec: TwistSpec) -> Self {
        BiJet { left_order: n, right_order: m, coeffs: BTreeMap::new(), spec }
    }

    pub fn orders(&self) -> (u32, u32) {
        (self.left_order, self.right_order)
    }

    pub fn spec(&self) -> &TwistSpec {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Monomial, Monomial), &Poly)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, k: &Monomial, kp: &Monomial) -> Poly {
        self.coeffs
            .get(&(k.clone(), kp.clone()))
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.spec.arity()))
    }

    fn insert(&mut self, k: Monomial, kp: Monomial, c: Poly) {
        debug_assert!(k.total_degree() <= self.left_order);
        debug_assert!(kp.total_degree() <= self.right_order);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry((k, kp)) {
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
}

impl fmt::Display for BiJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((k, kp), c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let ks: Vec<String> = k.0.iter().map(u32::to_string).collect();
            let kps: Vec<String> = kp.0.iter().map(u32::to_string).collect();
            write!(f, "({c})*xit[{}]@xit'[{}]", ks.join(","), kps.join(","))?;
        }
        Ok(())
    }
}

/// Comultiplication `δ_{n,m}`: split a jet of order n+m across the tensor
/// square, sending `xi_i ↦ xi_i ⊗ 1 + 1 ⊗ xi'_i`.
///
/// The right factor is converted to its twisted basis first; the polynomial
/// conversion coefficients belong to the middle `A` and must cross into the
/// left factor through the Taylor lift `u(x) ↦ u(x + xi)` (the ⊗'-module
/// structure), not by staying put. Reducing both sides independently would
/// lose those cross terms.
pub fn comultiplication(jet: &Jet, n: u32, m: u32) -> Result<BiJet> {
    if jet.order() != n + m {
        return Err(Error::Domain(format!(
            "comultiplication needs a jet of order {} + {}, got {}",
            n,
            m,
            jet.order()
        )));
    }
    let spec = jet.spec().clone();
    let d = spec.arity();
    let rep = from_twisted_basis(jet)?;

    // Substitute xi ↦ xi + xi' and group by the xi' exponent gamma:
    // coefficient of xi'^gamma is an XiPoly in the unprimed xi.
    let mut by_gamma: BTreeMap<Monomial, XiPoly> = BTreeMap::new();
    for (beta, c) in rep.terms() {
        // (xi + xi')^beta = sum_{alpha <= beta} C(beta, alpha) xi^alpha xi'^(beta-alpha)
        for alpha in splits_below(beta) {
            let gamma = alpha.quotient(beta).expect("alpha <= beta");
            let mut coeff = Scalar::one();
            for i in 0..d {
                coeff *= binomial(beta.0[i], alpha.0[i]);
            }
            by_gamma
                .entry(gamma)
                .or_insert_with(|| XiPoly::zero(d))
                .add_term(alpha, c.scale(&coeff));
        }
    }

    // For each gamma, write xi'^gamma in the primed twisted basis and
    // transport each conversion coefficient u(x) into the left factor as
    // u(x + xi).
    let mut left_parts: BTreeMap<Monomial, XiPoly> = BTreeMap::new();
    for (gamma, left) in by_gamma {
        let mut gamma_poly = XiPoly::zero(d);
        gamma_poly.add_term(gamma, Poly::one(d));
        let right_jet = to_twisted_basis(&gamma_poly, m, &spec)?;
        for (kp, u) in right_jet.terms() {
            let transported = left.mul(&taylor_expand(u, d));
            left_parts
                .entry(kp.clone())
                .and_modify(|acc| *acc = acc.add(&transported))
                .or_insert(transported);
        }
    }

    // Convert each left part to the twisted basis at order n.
    let mut out = BiJet::zero(n, m, spec.clone());
    for (kp, left) in left_parts {
        let left_jet = to_twisted_basis(&left, n, &spec)?;
        for (k, c) in left_jet.terms() {
            out.insert(k.clone(), kp.clone(), c.clone());
        }
    }
    Ok(out)
}

/// All multi-indices `alpha <= beta` componentwise.
fn splits_below(beta: &Monomial) -> Vec<Monomial> {
    let mut out = vec![Monomial::constant(beta.arity())];
    for (i, &b) in beta.0.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for alpha in &out {
            for e in 0..=b {
                let mut a = alpha.clone();
                a.0[i] = e;
                next.push(a);
            }
        }
        out = next;
    }
    out
}

/// Outcome of the symmetry test; `witness` is the first differing index
/// pair when the two sides disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub witness: Option<(Monomial, Monomial)>,
}

/// Check `δ_{n,m}(Θ_{n+m}(f)) = 1 ⊗' Θ_m(f)` exactly.
///
/// The right side is assembled independently: expand `Θ_m(f) = Σ a_k'
/// xi'^(k')` and lift each coefficient into the left factor via
/// `Θ_n(a_k')`.
pub fn symmetric_check(f: &Poly, n: u32, m: u32, spec: &TwistSpec) -> Result<SymmetryReport> {
    let lhs = comultiplication(&taylor(f, n + m, spec)?, n, m)?;
    let inner = taylor(f, m, spec)?;
    let mut rhs = BiJet::zero(n, m, spec.clone());
    for (kp, a) in inner.terms() {
        let lifted = taylor(a, n, spec)?;
        for (k, c) in lifted.terms() {
            rhs.insert(k.clone(), kp.clone(), c.clone());
        }
    }
    if lhs == rhs {
        return Ok(SymmetryReport { symmetric: true, witness: None });
    }
    // locate the first index pair where the sides differ
    let keys: std::collections::BTreeSet<_> =
        lhs.coeffs.keys().chain(rhs.coeffs.keys()).cloned().collect();
    let witness = keys
        .into_iter()
        .find(|(k, kp)| lhs.coefficient(k, kp) != rhs.coefficient(k, kp));
    Ok(SymmetryReport { symmetric: false, witness })
}

/// Evaluation map `π_k`: substitute `xi_i ↦ σ_i^{k_i}(x_i) − x_i` in the
/// expanded representative. On Taylor jets this recovers `σ^k(f)`.
pub fn evaluate_pi(jet: &Jet, k: &[u32]) -> Result<Poly> {
    let spec = jet.spec();
    let d = spec.arity();
    debug_assert_eq!(k.len(), d);
    let total: u32 = k.iter().sum();
    if total > jet.order() {
        return Err(Error::Domain(format!(
            "pi index weight {total} exceeds jet order {}",
            jet.order()
        )));
    }
    let mut values = Vec::with_capacity(d);
    for (i, &ki) in k.iter().enumerate() {
        values.push(spec.power_image(i, ki)?.sub(&Poly::var(d, i)));
    }
    Ok(from_twisted_basis(jet)?.evaluate_xi(&values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{q_binomial, scalar_int, scalar_ratio, NormContext};
    use crate::poly::monomials_up_to;
    use crate::testutil::{random_poly, seeded_rng};

    fn x(d: usize, i: usize) -> Poly {
        Poly::var(d, i)
    }

    fn q_spec(d: usize, q: Scalar) -> TwistSpec {
        TwistSpec::q_twist(d, q, NormContext::Trivial).unwrap()
    }

    fn shift_spec(d: usize, h: Scalar) -> TwistSpec {
        TwistSpec::shift(d, h, NormContext::Trivial).unwrap()
    }

    fn mono(e: &[u32]) -> Monomial {
        Monomial(e.to_vec())
    }

    #[test]
    fn twisted_basis_fixtures() {
        // q-twist, k=2: xi^2 + (1-q)x xi
        let q = scalar_int(3);
        let s = q_spec(1, q.clone());
        let b = twisted_basis_element(&mono(&[2]), &s).unwrap();
        assert_eq!(b.coefficient(&mono(&[2])), Poly::one(1));
        assert_eq!(
            b.coefficient(&mono(&[1])),
            x(1, 0).scale(&(Scalar::one() - &q))
        );
        assert_eq!(b.coefficient(&mono(&[0])), Poly::zero(1));
        // k=0 is the empty product
        assert_eq!(twisted_basis_element(&mono(&[0]), &s).unwrap(), XiPoly::one(1));
        // shift h: xi(xi - h)
        let h = scalar_int(5);
        let s = shift_spec(1, h.clone());
        let b = twisted_basis_element(&mono(&[2]), &s).unwrap();
        assert_eq!(b.coefficient(&mono(&[2])), Poly::one(1));
        assert_eq!(b.coefficient(&mono(&[1])), Poly::constant(1, -h));
    }

    #[test]
    fn basis_conversion_fixtures() {
        // xi^2 in the q-twisted basis: {2: 1, 1: (q-1)x}
        let q = scalar_int(3);
        let s = q_spec(1, q.clone());
        let mut p = XiPoly::zero(1);
        p.add_term(mono(&[2]), Poly::one(1));
        let jet = to_twisted_basis(&p, 2, &s).unwrap();
        assert_eq!(jet.coefficient(&mono(&[2])), Poly::one(1));
        assert_eq!(
            jet.coefficient(&mono(&[1])),
            x(1, 0).scale(&(q - Scalar::one()))
        );
        // an expanded basis element converts to a single unit coefficient
        let b = twisted_basis_element(&mono(&[3]), &s).unwrap();
        let jet = to_twisted_basis(&b, 3, &s).unwrap();
        assert_eq!(jet.terms().count(), 1);
        assert_eq!(jet.coefficient(&mono(&[3])), Poly::one(1));
        // the constant 1
        let jet = to_twisted_basis(&XiPoly::one(1), 2, &s).unwrap();
        assert_eq!(jet.terms().count(), 1);
        assert_eq!(jet.coefficient(&mono(&[0])), Poly::one(1));
    }

    #[test]
    fn basis_round_trip_random() {
        let mut rng = seeded_rng();
        let s = q_spec(2, scalar_ratio(2, 3));
        for _ in 0..15 {
            // random xi-polynomial of xi-degree <= 4 with polynomial coeffs
            let mut p = XiPoly::zero(2);
            for k in monomials_up_to(2, 4) {
                let c = random_poly(&mut rng, 2, 2);
                p.add_term(k, c);
            }
            let deg = p.xi_degree().unwrap_or(0);
            let jet = to_twisted_basis(&p, deg, &s).unwrap();
            assert_eq!(from_twisted_basis(&jet).unwrap(), p, "to/from round trip");
        }
    }

    #[test]
    fn conversion_is_unitriangular() {
        // converting xi^beta yields a unit coefficient at beta and only
        // strictly smaller indices below it
        let s = shift_spec(2, scalar_int(1));
        for beta in monomials_up_to(2, 4) {
            let mut p = XiPoly::zero(2);
            p.add_term(beta.clone(), Poly::one(2));
            let jet = to_twisted_basis(&p, 4, &s).unwrap();
            assert_eq!(jet.coefficient(&beta), Poly::one(2));
            for (k, _) in jet.terms() {
                assert!(k <= &beta, "index {k:?} above the diagonal for {beta:?}");
            }
        }
    }

    #[test]
    fn taylor_fixtures() {
        // f = x: {0: x, 1: 1}
        let s = q_spec(1, scalar_int(2));
        let jet = taylor(&x(1, 0), 2, &s).unwrap();
        assert_eq!(jet.coefficient(&mono(&[0])), x(1, 0));
        assert_eq!(jet.coefficient(&mono(&[1])), Poly::one(1));
        assert_eq!(jet.coefficient(&mono(&[2])), Poly::zero(1));
        // f = x^2 under the q-twist: {0: x^2, 1: (1+q)x, 2: 1}
        let q = scalar_int(2);
        let jet = taylor(&x(1, 0).pow(2), 2, &s).unwrap();
        assert_eq!(jet.coefficient(&mono(&[0])), x(1, 0).pow(2));
        assert_eq!(
            jet.coefficient(&mono(&[1])),
            x(1, 0).scale(&(Scalar::one() + &q))
        );
        assert_eq!(jet.coefficient(&mono(&[2])), Poly::one(1));
        // constants
        let jet = taylor(&Poly::constant(1, scalar_int(7)), 3, &s).unwrap();
        assert_eq!(jet.terms().count(), 1);
        assert_eq!(jet.coefficient(&mono(&[0])), Poly::constant(1, scalar_int(7)));
    }

    #[test]
    fn taylor_zeroth_coefficient_is_f() {
        let mut rng = seeded_rng();
        let s = shift_spec(2, scalar_int(3));
        for _ in 0..10 {
            let f = random_poly(&mut rng, 2, 4);
            let jet = taylor(&f, 3, &s).unwrap();
            assert_eq!(jet.coefficient(&mono(&[0, 0])), f);
        }
    }

    #[test]
    fn divided_power_values_q_twist() {
        // coefficient of taylor(x^n) at k is binom(n,k)_q x^(n-k)
        let q = scalar_ratio(3, 2);
        let s = q_spec(1, q.clone());
        for n in 0..=5u32 {
            let jet = taylor(&x(1, 0).pow(n), n, &s).unwrap();
            for k in 0..=n {
                let expected = x(1, 0)
                    .pow(n - k)
                    .scale(&q_binomial(n, k, &q).unwrap());
                assert_eq!(jet.coefficient(&mono(&[k])), expected, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn jet_multiply_fixtures() {
        let q = scalar_int(2);
        let s = q_spec(1, q.clone());
        // taylor is a ring morphism: x * x = x^2 at order 2
        let a = taylor(&x(1, 0), 2, &s).unwrap();
        let prod = jet_multiply(&a, &a, 2).unwrap();
        assert_eq!(prod, taylor(&x(1, 0).pow(2), 2, &s).unwrap());
        // the unit jet is neutral
        let one = taylor(&Poly::one(1), 2, &s).unwrap();
        assert_eq!(jet_multiply(&one, &a, 2).unwrap(), a);
        // xi * xi at order 1: xi^2 = xi^(2) + (q-1)x xi reduces to (q-1)x xi
        let xi = Jet::term(1, mono(&[1]), Poly::one(1), s.clone()).unwrap();
        let prod = jet_multiply(&xi, &xi, 1).unwrap();
        assert_eq!(prod.terms().count(), 1);
        assert_eq!(
            prod.coefficient(&mono(&[1])),
            x(1, 0).scale(&(q - Scalar::one()))
        );
    }

    #[test]
    fn taylor_is_ring_morphism_random() {
        let mut rng = seeded_rng();
        let specs = vec![
            q_spec(2, scalar_ratio(5, 3)),
            shift_spec(2, scalar_int(2)),
        ];
        for s in specs {
            for _ in 0..15 {
                let f = random_poly(&mut rng, 2, 3);
                let g = random_poly(&mut rng, 2, 3);
                let n = 3;
                let lhs = taylor(&f.mul(&g), n, &s).unwrap();
                let rhs =
                    jet_multiply(&taylor(&f, n, &s).unwrap(), &taylor(&g, n, &s).unwrap(), n)
                        .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn comultiplication_fixtures() {
        let q = scalar_int(3);
        let s = q_spec(1, q.clone());
        // xi is primitive: xi ⊗ 1 + 1 ⊗ xi'
        let xi = Jet::term(2, mono(&[1]), Poly::one(1), s.clone()).unwrap();
        let b = comultiplication(&xi, 1, 1).unwrap();
        assert_eq!(b.coefficient(&mono(&[1]), &mono(&[0])), Poly::one(1));
        assert_eq!(b.coefficient(&mono(&[0]), &mono(&[1])), Poly::one(1));
        assert_eq!(b.terms().count(), 2);
        // constants are grouplike
        let c = Jet::term(2, mono(&[0]), x(1, 0), s.clone()).unwrap();
        let b = comultiplication(&c, 1, 1).unwrap();
        assert_eq!(b.terms().count(), 1);
        assert_eq!(b.coefficient(&mono(&[0]), &mono(&[0])), x(1, 0));
        // delta_{1,1}(xi^(2)) = (1+q) xi ⊗ xi'
        let xi2 = Jet::term(2, mono(&[2]), Poly::one(1), s.clone()).unwrap();
        let b = comultiplication(&xi2, 1, 1).unwrap();
        assert_eq!(b.terms().count(), 1);
        assert_eq!(
            b.coefficient(&mono(&[1]), &mono(&[1])),
            Poly::constant(1, Scalar::one() + &q)
        );
    }

    #[test]
    fn symmetric_check_fixtures() {
        let s = q_spec(1, scalar_int(3));
        assert!(symmetric_check(&x(1, 0).pow(2), 1, 1, &s).unwrap().symmetric);
        assert!(symmetric_check(&Poly::constant(1, scalar_int(4)), 2, 1, &s)
            .unwrap()
            .symmetric);
        // shift twist, f = x^3, n=1, m=2: regression value
        let s = shift_spec(1, scalar_int(2));
        assert!(symmetric_check(&x(1, 0).pow(3), 1, 2, &s).unwrap().symmetric);
    }

    #[test]
    fn symmetric_check_random() {
        let mut rng = seeded_rng();
        let specs = vec![q_spec(2, scalar_int(2)), shift_spec(2, scalar_int(1))];
        for s in specs {
            for _ in 0..5 {
                let f = random_poly(&mut rng, 2, 3);
                for (n, m) in [(1, 1), (2, 1), (1, 2)] {
                    assert!(
                        symmetric_check(&f, n, m, &s).unwrap().symmetric,
                        "f={f} n={n} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn evaluate_pi_fixtures() {
        // q-twist: pi_2(taylor(x)) = q^2 x
        let s = q_spec(1, scalar_int(3));
        let jet = taylor(&x(1, 0), 2, &s).unwrap();
        assert_eq!(evaluate_pi(&jet, &[2]).unwrap(), x(1, 0).scale(&scalar_int(9)));
        // k = 0 recovers f
        assert_eq!(evaluate_pi(&jet, &[0]).unwrap(), x(1, 0));
        // shift: pi_1(taylor(x^2)) = (x+h)^2
        let h = scalar_int(4);
        let s = shift_spec(1, h.clone());
        let jet = taylor(&x(1, 0).pow(2), 2, &s).unwrap();
        let expected = x(1, 0).add(&Poly::constant(1, h)).pow(2);
        assert_eq!(evaluate_pi(&jet, &[1]).unwrap(), expected);
    }

    #[test]
    fn pi_of_taylor_is_sigma_power() {
        let mut rng = seeded_rng();
        let s = q_spec(2, scalar_ratio(2, 5));
        for _ in 0..10 {
            let f = random_poly(&mut rng, 2, 3);
            for k in [[0u32, 0], [1, 0], [0, 2], [1, 1], [2, 1]] {
                let jet = taylor(&f, 3, &s).unwrap();
                assert_eq!(
                    evaluate_pi(&jet, &k).unwrap(),
                    s.sigma_power_apply(&f, &k).unwrap()
                );
            }
        }
    }

    #[test]
    fn pi_matrix_is_lower_triangular() {
        // pi_k kills xi^(j) unless j <= k componentwise
        let s = shift_spec(2, scalar_int(1));
        for j in monomials_up_to(2, 3) {
            let jet = Jet::term(3, j.clone(), Poly::one(2), s.clone()).unwrap();
            for k in monomials_up_to(2, 3) {
                let v = evaluate_pi(&jet, &k.0).unwrap();
                if !j.divides(&k) {
                    assert!(v.is_zero(), "pi_{k:?} on basis {j:?} should vanish");
                }
            }
        }
        // and the diagonal entries are nonzero (regular)
        for j in monomials_up_to(2, 3) {
            let jet = Jet::term(3, j.clone(), Poly::one(2), s.clone()).unwrap();
            assert!(!evaluate_pi(&jet, &j.0).unwrap().is_zero());
        }
    }

    #[test]
    fn jet_json_shape() {
        let s = q_spec(1, scalar_int(2));
        let jet = taylor(&x(1, 0).pow(2), 2, &s).unwrap();
        let v = jet.to_json();
        assert_eq!(v["order"], 2);
        let terms = v["terms"].as_array().unwrap();
        assert_eq!(terms.len(), 3);
        assert_eq!(terms[0]["k"].as_array().unwrap().len(), 1);
        assert_eq!(terms[0]["coeff"], "x1^2");
        assert_eq!(terms[1]["coeff"], "3*x1");
        assert_eq!(terms[2]["coeff"], "1");
    }
}
