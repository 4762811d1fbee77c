//! Transport of operators between a twist and the classical side.
//!
//! A twisted operator and its classical image are identified through their
//! shared action on polynomials: the image is the unique operator of order
//! at most N over the target twist whose action agrees on every monomial of
//! degree at most N. The identification is exact in that range and silent
//! above it; operators with no finite classical expansion (the substitution
//! σ itself, for instance) transport to their order-N truncation. The
//! [`ConfluencePair`] record audits how far the agreement actually extends
//! and never claims more.

use crate::analysis::{operator_eta_norm, rho_sigma, EtaRadius};
use crate::coefficients::{NormContext, NormValue, Scalar};
use crate::error::{Error, Result};
use crate::operators::{truncated_expansion, TwistedOperator};
use crate::poly::{monomials_up_to, Poly};
use crate::twist::TwistSpec;
use num::One;
use serde_json::json;

/// The classical counterpart of a spec: identity twist, same arity and norm.
pub fn classical_spec(spec: &TwistSpec) -> TwistSpec {
    TwistSpec::identity(spec.arity(), spec.norm().clone())
        .expect("identity twist is valid at every arity >= 1")
}

/// Re-expand an operator's action over a different twist of the same arity.
fn transport(op: &TwistedOperator, target: &TwistSpec, n: u32) -> Result<TwistedOperator> {
    if op.arity() != target.arity() {
        return Err(Error::ArityMismatch(format!(
            "operator has arity {}, target twist has arity {}",
            op.arity(),
            target.arity()
        )));
    }
    truncated_expansion(&mut |f| op.apply(f), n, target)
}

/// Classical image of a twisted operator: the unique classical operator of
/// order ≤ n with the same action on all monomials of degree ≤ n.
///
/// Multiplication operators pass through unchanged; operators that are
/// exactly classical of order ≤ n are recovered exactly at every degree;
/// everything else is truncated at order n.
pub fn to_classical(op: &TwistedOperator, n: u32) -> Result<TwistedOperator> {
    transport(op, &classical_spec(op.spec()), n)
}

/// Inverse direction: expand a classical operator over the twist `spec`.
pub fn from_classical(
    op: &TwistedOperator,
    spec: &TwistSpec,
    n: u32,
) -> Result<TwistedOperator> {
    transport(op, spec, n)
}

/// A twisted operator together with its classical image and an audit of the
/// degree range on which the two actions were verified to agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfluencePair {
    pub source: TwistedOperator,
    pub target: TwistedOperator,
    /// Order bound N of the transport; agreement on degree ≤ N is
    /// guaranteed by construction.
    pub truncation: u32,
    /// Extra audit depth D: agreement was tested through degree N + D.
    pub degree_bound: u32,
    /// Largest B ≤ N + D such that the actions agree on every monomial of
    /// degree ≤ B. Equals N + D exactly when the source is classically
    /// representable at order N.
    pub exact_to: u32,
}

/// Transport `op` to the classical side and audit action agreement degree
/// by degree through N + D, recording how far it extends.
pub fn confluence_pair(op: &TwistedOperator, n: u32, d_bound: u32) -> Result<ConfluencePair> {
    let target = to_classical(op, n)?;
    let arity = op.arity();
    let mut exact_to = n + d_bound;
    'audit: for deg in 0..=n + d_bound {
        for m in monomials_up_to(arity, deg) {
            if m.total_degree() != deg {
                continue;
            }
            let xm = Poly::monomial(m, Scalar::one());
            if op.apply(&xm)? != target.apply(&xm)? {
                exact_to = deg - 1;
                break 'audit;
            }
        }
    }
    Ok(ConfluencePair { source: op.clone(), target, truncation: n, degree_bound: d_bound, exact_to })
}

impl ConfluencePair {
    /// Whether agreement held through the full audited range N + D.
    pub fn fully_exact(&self) -> bool {
        self.exact_to == self.truncation + self.degree_bound
    }

    /// Error path for callers that require the full-range agreement: the
    /// bounds were insufficient to represent the source classically.
    pub fn ensure_full_agreement(&self) -> Result<()> {
        if self.fully_exact() {
            Ok(())
        } else {
            Err(Error::Reconstruction(format!(
                "actions diverge at degree {}; order bound {} cannot represent the source classically",
                self.exact_to + 1,
                self.truncation
            )))
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "N": self.truncation,
            "D": self.degree_bound,
            "exact_to": self.exact_to,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
        })
    }
}

/// One row of a confluence sweep: the classical image of the family member
/// at `q`, with its η-norm valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub q: Scalar,
    pub classical: TwistedOperator,
    pub eta_valuation: NormValue,
}

impl SweepRow {
    pub fn to_json(&self) -> serde_json::Value {
        let coefficients: Vec<_> = self
            .classical
            .terms()
            .map(|(k, c)| json!({"k": k.0, "poly": c.to_string()}))
            .collect();
        json!({
            "q": self.q.to_string(),
            "coefficients": coefficients,
            "eta_norm_valuation": self.eta_valuation.to_string(),
        })
    }
}

/// Evaluate an operator family at each q, transport every member to the
/// classical side at order n, and tabulate the images with their η-norm
/// valuations. Rows are exact; nothing is interpolated between q values.
pub fn confluence_sweep<F>(
    family: F,
    qs: &[Scalar],
    n: u32,
    eta: &EtaRadius,
    ctx: &NormContext,
) -> Result<Vec<SweepRow>>
where
    F: Fn(&Scalar) -> Result<TwistedOperator>,
{
    qs.iter()
        .map(|q| {
            let op = family(q)?;
            let classical = to_classical(&op, n)?;
            let eta_valuation = operator_eta_norm(&classical, eta, ctx);
            Ok(SweepRow { q: q.clone(), classical, eta_valuation })
        })
        .collect()
}

/// Comparison of the η-norm valuations of a pair's two sides, over the
/// represented terms only. Finite truncation cannot certify the sup over
/// all terms, so the report states agreement on computed data and no more.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometryReport {
    pub source_valuation: NormValue,
    pub target_valuation: NormValue,
    pub agree: bool,
    /// Order bound of the pair whose terms were compared.
    pub checked_order: u32,
}

impl IsometryReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "source_valuation": self.source_valuation.to_string(),
            "target_valuation": self.target_valuation.to_string(),
            "agree": self.agree,
            "checked_order": self.checked_order,
        })
    }
}

/// Compare operator η-norms on the two sides of a pair. Requires the
/// isometry regime `η ≥ ρ(σ)` for the source twist (the classical side has
/// ρ = 0, so only the source constrains η).
pub fn isometry_witness(
    pair: &ConfluencePair,
    eta: &EtaRadius,
    ctx: &NormContext,
) -> Result<IsometryReport> {
    if let NormValue::Finite(v_rho) = rho_sigma(pair.source.spec(), ctx) {
        if eta.ell() > &v_rho {
            return Err(Error::Domain(format!(
                "eta below the twist radius: ell = {} exceeds v(rho) = {v_rho}",
                eta.ell()
            )));
        }
    }
    let source_valuation = operator_eta_norm(&pair.source, eta, ctx);
    let target_valuation = operator_eta_norm(&pair.target, eta, ctx);
    Ok(IsometryReport {
        agree: source_valuation == target_valuation,
        source_valuation,
        target_valuation,
        checked_order: pair.truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{scalar_int, scalar_ratio};
    use crate::operators::compose;
    use crate::poly::Monomial;
    use crate::testutil::{random_poly, seeded_rng};
    use rand::Rng;

    fn q_spec(q: i64) -> TwistSpec {
        TwistSpec::q_twist(1, scalar_int(q), NormContext::Trivial).unwrap()
    }

    fn dp(k: u32, s: &TwistSpec) -> TwistedOperator {
        TwistedOperator::divided_power(Monomial(vec![k]), s.clone())
    }

    fn x() -> Poly {
        Poly::var(1, 0)
    }

    #[test]
    fn classical_divided_powers_are_binomial() {
        // the identity-twist basis is x^k/k! duality: dp[k](x^n) = C(n,k) x^(n-k)
        let id = classical_spec(&q_spec(3));
        let f = x().pow(4);
        assert_eq!(dp(2, &id).apply(&f).unwrap(), x().pow(2).scale(&scalar_int(6)));
        assert_eq!(dp(4, &id).apply(&f).unwrap(), Poly::one(1));
        assert_eq!(dp(5, &id).apply(&f).unwrap(), Poly::zero(1));
    }

    #[test]
    fn q_derivation_classical_image() {
        // oracle: (n)_q = sum_{k>=1} C(n,k)(q-1)^(k-1), so the image of the
        // q-derivation is sum_k (q-1)^(k-1) x^(k-1) dp[k]
        let s = q_spec(3);
        let img = to_classical(&dp(1, &s), 6).unwrap();
        let id = classical_spec(&s);
        let qm1 = scalar_int(2);
        let expected = TwistedOperator::from_coeffs(
            (1..=6u32).map(|k| {
                let mut c = Poly::one(1);
                for _ in 1..k {
                    c = c.mul(&x()).scale(&qm1);
                }
                (Monomial(vec![k]), c)
            }),
            id,
        );
        assert_eq!(img, expected);
    }

    #[test]
    fn multiplication_ops_pass_through() {
        let s = q_spec(3);
        let g = x().pow(2).add(&Poly::constant(1, scalar_int(3)));
        let mult = TwistedOperator::multiplication(g.clone(), s.clone());
        let img = to_classical(&mult, 3).unwrap();
        assert_eq!(img, TwistedOperator::multiplication(g.clone(), classical_spec(&s)));
        let back = from_classical(&img, &s, 3).unwrap();
        assert_eq!(back, mult);
    }

    #[test]
    fn sigma_transports_to_dilation_taylor() {
        // sigma = 1 + (q-1)x d in its own basis (order 1, exact); its
        // classical image is the dilation jet sum_k (q-1)^k x^k dp[k]
        let s = q_spec(3);
        let qm1 = scalar_int(2);
        let sigma = TwistedOperator::identity(s.clone())
            .add(&dp(1, &s).scale_poly(&x().scale(&qm1)))
            .unwrap();
        let img = to_classical(&sigma, 4).unwrap();
        let id = classical_spec(&s);
        let expected = TwistedOperator::from_coeffs(
            (0..=4u32).map(|k| {
                let mut c = Poly::one(1);
                for _ in 0..k {
                    c = c.mul(&x()).scale(&qm1);
                }
                (Monomial(vec![k]), c)
            }),
            id,
        );
        assert_eq!(img, expected);
    }

    fn random_op(
        rng: &mut rand_chacha::ChaCha8Rng,
        s: &TwistSpec,
        max_order: u32,
        max_deg: u32,
    ) -> TwistedOperator {
        let d = s.arity();
        let mut coeffs = Vec::new();
        for k in monomials_up_to(d, max_order) {
            if rng.gen_range(0..10) < 7 {
                coeffs.push((k, random_poly(rng, d, max_deg)));
            }
        }
        TwistedOperator::from_coeffs(coeffs, s.clone())
    }

    #[test]
    fn round_trip_order_two() {
        // both transports solve against action on degree <= 6; an order-2
        // source satisfies the same triangular system as the round trip, so
        // uniqueness forces exact equality
        let mut rng = seeded_rng();
        let s = q_spec(3);
        for _ in 0..10 {
            let op = random_op(&mut rng, &s, 2, 2);
            let there = to_classical(&op, 6).unwrap();
            let back = from_classical(&there, &s, 6).unwrap();
            assert_eq!(back, op);
        }
        // same in two variables with mixed kinds
        let s2 = TwistSpec::new(
            vec![
                crate::twist::TwistKind::QTwist { q: scalar_int(3) },
                crate::twist::TwistKind::Shift { h: scalar_int(1) },
            ],
            NormContext::Trivial,
        )
        .unwrap();
        for _ in 0..4 {
            let op = random_op(&mut rng, &s2, 2, 2);
            let there = to_classical(&op, 6).unwrap();
            let back = from_classical(&there, &s2, 6).unwrap();
            assert_eq!(back, op);
        }
    }

    #[test]
    fn from_classical_fixture_ddx() {
        // d/dx expands over the q-twist with leading coefficient exactly 1
        let s = q_spec(3);
        let ddx = dp(1, &classical_spec(&s));
        let img = from_classical(&ddx, &s, 4).unwrap();
        assert_eq!(img.coefficient(&Monomial(vec![1])), Poly::one(1));
        assert_eq!(img.coefficient(&Monomial(vec![0])), Poly::zero(1));
        // action equality on the guaranteed range
        for n in 0..=4u32 {
            let f = x().pow(n);
            assert_eq!(img.apply(&f).unwrap(), ddx.apply(&f).unwrap());
        }
    }

    #[test]
    fn a_linearity() {
        // to_classical({0:a} o p) = {0:a} o to_classical(p), exactly
        let mut rng = seeded_rng();
        let s = q_spec(3);
        let a = x().add(&Poly::constant(1, scalar_int(2)));
        for _ in 0..5 {
            let p = random_op(&mut rng, &s, 2, 2);
            let lhs = to_classical(
                &compose(&TwistedOperator::multiplication(a.clone(), s.clone()), &p).unwrap(),
                5,
            )
            .unwrap();
            let pc = to_classical(&p, 5).unwrap();
            let rhs = compose(
                &TwistedOperator::multiplication(a.clone(), pc.spec().clone()),
                &pc,
            )
            .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ring_map_property() {
        // exact coefficient equality on multiplication operators
        let s = q_spec(3);
        let g = TwistedOperator::multiplication(x().pow(2), s.clone());
        let h = TwistedOperator::multiplication(
            x().add(&Poly::constant(1, scalar_int(1))),
            s.clone(),
        );
        let lhs = to_classical(&compose(&g, &h).unwrap(), 4).unwrap();
        let rhs = compose(&to_classical(&g, 4).unwrap(), &to_classical(&h, 4).unwrap()).unwrap();
        assert_eq!(lhs, rhs);

        // action-level agreement for genuinely twisted operators in the
        // degree range both truncations cover
        let mut rng = seeded_rng();
        for _ in 0..3 {
            let p = random_op(&mut rng, &s, 1, 1);
            let q = random_op(&mut rng, &s, 1, 1);
            let lhs = to_classical(&compose(&p, &q).unwrap(), 6).unwrap();
            let rhs = compose(&to_classical(&p, 6).unwrap(), &to_classical(&q, 6).unwrap())
                .unwrap();
            for n in 0..=5u32 {
                let f = x().pow(n);
                assert_eq!(lhs.apply(&f).unwrap(), rhs.apply(&f).unwrap(), "degree {n}");
            }
        }
    }

    #[test]
    fn sweep_q_derivation() {
        // q -> 1 along 1+5^j: coefficient valuations (k-1)*j grow, the
        // operator valuation stays -ell
        let ctx = NormContext::padic(5).unwrap();
        let ell = EtaRadius::new(scalar_int(1)).unwrap();
        let qs = vec![scalar_int(6), scalar_int(26), scalar_int(126)];
        let rows = confluence_sweep(
            |q| {
                let s = TwistSpec::q_twist(1, q.clone(), ctx.clone())?;
                Ok(dp(1, &s))
            },
            &qs,
            4,
            &ell,
            &ctx,
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        for (j, row) in rows.iter().enumerate() {
            let v_q = scalar_int((j + 1) as i64);
            for k in 1..=4u32 {
                let c = row.classical.coefficient(&Monomial(vec![k]));
                let v = crate::twist::gauss_norm(&c, &ctx);
                let expected = &v_q * Scalar::from_integer((k - 1).into());
                assert_eq!(v, NormValue::Finite(expected), "q index {j}, k {k}");
            }
            assert_eq!(row.eta_valuation, NormValue::Finite(scalar_int(-1)));
        }
        // row JSON shape
        let v = rows[0].to_json();
        assert_eq!(v["q"], "6");
        assert_eq!(v["coefficients"][0]["k"][0], 1);
        assert_eq!(v["coefficients"][0]["poly"], "1");
        assert_eq!(v["eta_norm_valuation"], "-1");
    }

    #[test]
    fn sweep_constant_and_sigma_families() {
        let ctx = NormContext::padic(5).unwrap();
        let ell = EtaRadius::new(scalar_int(1)).unwrap();
        let qs = vec![scalar_int(6), scalar_int(26)];
        let g = x().pow(2);
        let rows = confluence_sweep(
            |q| {
                let s = TwistSpec::q_twist(1, q.clone(), ctx.clone())?;
                Ok(TwistedOperator::multiplication(g.clone(), s))
            },
            &qs,
            3,
            &ell,
            &ctx,
        )
        .unwrap();
        assert_eq!(rows[0].classical, rows[1].classical);

        // sigma - id kills constants, so the classical image has no
        // order-zero coefficient
        let rows = confluence_sweep(
            |q| {
                let s = TwistSpec::q_twist(1, q.clone(), ctx.clone())?;
                let qm1 = q - Scalar::one();
                Ok(dp(1, &s).scale_poly(&x().scale(&qm1)))
            },
            &qs,
            3,
            &ell,
            &ctx,
        )
        .unwrap();
        for row in &rows {
            assert!(row.classical.coefficient(&Monomial(vec![0])).is_zero());
        }
    }

    #[test]
    fn pair_audit_and_isometry() {
        let ctx = NormContext::padic(5).unwrap();
        // exactly classical source: full agreement through N + D
        let s26 = TwistSpec::q_twist(1, scalar_int(26), ctx.clone()).unwrap();
        let g = x().pow(2);
        let pair = confluence_pair(&TwistedOperator::multiplication(g, s26.clone()), 2, 3).unwrap();
        assert_eq!(pair.exact_to, 5);
        assert!(pair.ensure_full_agreement().is_ok());

        // the q-derivation has no finite classical expansion: agreement
        // stops exactly at the truncation order
        let pair = confluence_pair(&dp(1, &s26), 4, 4).unwrap();
        assert_eq!(pair.exact_to, 4);
        assert!(matches!(
            pair.ensure_full_agreement(),
            Err(Error::Reconstruction(_))
        ));

        // isometry: v(q-1) = 2, ell = 1 < 2: both sides -ell
        let ell = EtaRadius::new(scalar_int(1)).unwrap();
        let report = isometry_witness(&pair, &ell, &ctx).unwrap();
        assert!(report.agree);
        assert_eq!(report.source_valuation, NormValue::Finite(scalar_int(-1)));
        assert_eq!(report.target_valuation, NormValue::Finite(scalar_int(-1)));
        // fractional ell also agrees
        let report =
            isometry_witness(&pair, &EtaRadius::new(scalar_ratio(1, 2)).unwrap(), &ctx).unwrap();
        assert!(report.agree);
        assert_eq!(report.source_valuation, NormValue::Finite(scalar_ratio(-1, 2)));
        // eta below the radius is rejected
        assert!(matches!(
            isometry_witness(&pair, &EtaRadius::new(scalar_int(3)).unwrap(), &ctx),
            Err(Error::Domain(_))
        ));
    }
}
