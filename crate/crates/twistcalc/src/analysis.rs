//! Norms and radii in the exact log domain.
//!
//! Everything here is a valuation: a norm `p^{-v}` is represented by the
//! rational `v`, the disc radius `η = p^{-ℓ}` by `ℓ ≥ 0`, and every
//! comparison is exact. No output claims a limit; radius statements are
//! bounded-degree evidence and say so.

use crate::coefficients::{NormContext, NormValue, Scalar};
use crate::error::{Error, Result};
use crate::jets::{from_twisted_basis, taylor, Jet, XiPoly};
use crate::operators::TwistedOperator;
use crate::poly::Poly;
use crate::twist::{gauss_norm, TwistSpec};
use num::Zero;
use serde_json::json;
use std::fmt;

/// A disc radius `η = p^{-ℓ}` with `ℓ ≥ 0` (so `η ≤ 1`), stored as the
/// exact rational `ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaRadius {
    ell: Scalar,
}

impl EtaRadius {
    pub fn new(ell: Scalar) -> Result<Self> {
        if ell < Scalar::zero() {
            return Err(Error::Domain(format!(
                "eta valuation must be >= 0 (eta <= 1), got {ell}"
            )));
        }
        Ok(EtaRadius { ell })
    }

    /// η = 1 (ℓ = 0), the only radius available in the trivial context.
    pub fn one() -> Self {
        EtaRadius { ell: Scalar::zero() }
    }

    pub fn ell(&self) -> &Scalar {
        &self.ell
    }

    /// ℓ scaled by an integer weight |k|.
    fn weighted(&self, weight: u32) -> Scalar {
        &self.ell * Scalar::from_integer(weight.into())
    }
}

impl fmt::Display for EtaRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "eta = p^(-{})", self.ell)
    }
}

/// The x-radius of the twist: `max_i ‖x_i − σ_i(x_i)‖` under the Gauss
/// norm, returned as the min of the valuations. Identity twists give +∞
/// (radius zero).
pub fn rho_sigma(spec: &TwistSpec, ctx: &NormContext) -> NormValue {
    rho_sigma_power(spec, ctx, 1).expect("power 1 cannot overflow")
}

/// The x-radius of the n-th iterate `σ^n`, computed from the exact images.
pub fn rho_sigma_power(spec: &TwistSpec, ctx: &NormContext, n: u32) -> Result<NormValue> {
    let d = spec.arity();
    let mut min = NormValue::Infinite;
    for i in 0..d {
        let diff = Poly::var(d, i).sub(&spec.power_image(i, n)?);
        let v = gauss_norm(&diff, ctx);
        if v < min {
            min = v;
        }
    }
    Ok(min)
}

/// η-valuation of an expanded ξ-polynomial: `min_k (v(coeff_k) + |k|·ℓ)`,
/// the log form of the sup norm on the η-disc. Monomial basis only.
pub fn eta_norm_xi(p: &XiPoly, eta: &EtaRadius, ctx: &NormContext) -> NormValue {
    p.terms()
        .map(|(k, c)| gauss_norm(c, ctx).offset(&eta.weighted(k.total_degree())))
        .min()
        .unwrap_or(NormValue::Infinite)
}

/// η-valuation of a jet, computed in both the twisted and the monomial
/// basis.
///
/// In the isometry regime `η ≥ ρ(σ)` (that is `ℓ ≤ v(ρ)`) the two must
/// agree exactly, and a disagreement is reported as `BasisNormMismatch`
/// (diagnostic; unreachable for substitution twists). Below that regime the
/// twisted-basis value is returned as the definition, uncrosschecked.
pub fn eta_norm(jet: &Jet, eta: &EtaRadius, ctx: &NormContext) -> Result<NormValue> {
    let twisted = jet
        .terms()
        .map(|(k, z)| gauss_norm(z, ctx).offset(&eta.weighted(k.total_degree())))
        .min()
        .unwrap_or(NormValue::Infinite);
    let isometry_regime = match rho_sigma(jet.spec(), ctx) {
        NormValue::Infinite => true,
        NormValue::Finite(v_rho) => eta.ell <= v_rho,
    };
    if isometry_regime {
        let monomial = eta_norm_xi(&from_twisted_basis(jet)?, eta, ctx);
        if monomial != twisted {
            return Err(Error::BasisNormMismatch(format!(
                "twisted-basis valuation {twisted} vs monomial-basis {monomial} at ell = {}",
                eta.ell
            )));
        }
    }
    Ok(twisted)
}

/// Operator η-valuation: `min_k (v(z_k) − |k|·ℓ)`, the log form of
/// `sup_k ‖z_k‖ / η^{|k|}`.
pub fn operator_eta_norm(
    op: &TwistedOperator,
    eta: &EtaRadius,
    ctx: &NormContext,
) -> NormValue {
    op.terms()
        .map(|(k, z)| {
            gauss_norm(z, ctx).offset(&-eta.weighted(k.total_degree()))
        })
        .min()
        .unwrap_or(NormValue::Infinite)
}

/// One degree slice of a radius report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusRow {
    pub degree: u32,
    /// min over |k| = degree of the Gauss valuation of ∂^[k](f).
    pub min_valuation: NormValue,
    /// −v/s for finite rows: the log-radius this slice tolerates.
    pub evidence: Option<Scalar>,
}

/// Bounded-degree radius evidence for an element. Never a limit claim: the
/// report says what the data up to the truncation supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusReport {
    pub truncation: u32,
    pub rows: Vec<RadiusRow>,
    /// ℓ such that the computed rows are consistent with radius ≥ p^(−ℓ):
    /// max(0, max evidence).
    pub lower_bound_ell: Scalar,
    /// True when every row beyond degree 0 is +∞ (polynomial tail): the
    /// element is everywhere convergent as far as the data shows.
    pub entire_evidence: bool,
}

impl RadiusReport {
    pub fn lower_bound(&self) -> EtaRadius {
        EtaRadius { ell: self.lower_bound_ell.clone() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "deg": r.degree,
                    "min_valuation": r.min_valuation.to_string(),
                    "evidence": r
                        .evidence
                        .as_ref()
                        .map(|e| e.to_string())
                        .unwrap_or_else(|| "-inf".into()),
                })
            })
            .collect();
        json!({
            "D": self.truncation,
            "rows": rows,
            "lower_bound_log_radius": self.lower_bound_ell.to_string(),
        })
    }
}

/// Per-degree extremes of the divided derivatives of `f` up to degree `D`,
/// with the radius lower bound they support.
pub fn radius_estimate(
    f: &Poly,
    spec: &TwistSpec,
    ctx: &NormContext,
    truncation: u32,
) -> Result<RadiusReport> {
    let jet = taylor(f, truncation, spec)?;
    let mut rows = Vec::with_capacity(truncation as usize);
    let mut lower = Scalar::zero();
    let mut entire = true;
    for s in 1..=truncation {
        let min_v = jet
            .terms()
            .filter(|(k, _)| k.total_degree() == s)
            .map(|(_, z)| gauss_norm(z, ctx))
            .min()
            .unwrap_or(NormValue::Infinite);
        let evidence = match &min_v {
            NormValue::Infinite => None,
            NormValue::Finite(v) => {
                entire = false;
                let e = -v / Scalar::from_integer(s.into());
                if e > lower {
                    lower = e.clone();
                }
                Some(e)
            }
        };
        rows.push(RadiusRow { degree: s, min_valuation: min_v, evidence });
    }
    Ok(RadiusReport {
        truncation,
        rows,
        lower_bound_ell: lower,
        entire_evidence: entire,
    })
}

/// η-convergence table: `t_s = v_s + s·ℓ` per degree `s = 0..order`, built
/// from a jet's twisted coefficients.
pub fn jet_convergence_table(
    jet: &Jet,
    eta: &EtaRadius,
    ctx: &NormContext,
) -> Vec<(u32, NormValue)> {
    (0..=jet.order())
        .map(|s| {
            let v = jet
                .terms()
                .filter(|(k, _)| k.total_degree() == s)
                .map(|(_, z)| gauss_norm(z, ctx))
                .min()
                .unwrap_or(NormValue::Infinite);
            (s, v.offset(&eta.weighted(s)))
        })
        .collect()
}

/// Nondecreasing-tail test on a convergence table; +∞ absorbs. Returns the
/// first offending degree on failure.
pub fn table_is_nondecreasing(table: &[(u32, NormValue)]) -> (bool, Option<u32>) {
    for w in table.windows(2) {
        if w[1].1 < w[0].1 {
            return (false, Some(w[1].0));
        }
    }
    (true, None)
}

/// Outcome of [`eta_convergence_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub convergent: bool,
    pub table: Vec<(u32, NormValue)>,
    /// First degree where the table decreased, if any.
    pub witness: Option<u32>,
}

/// Check that `v(∂^[k](f)) + |k|·ℓ` is nondecreasing up to `D`; the bounded
/// below part is implied on finite data by the first entry.
pub fn eta_convergence_check(
    f: &Poly,
    eta: &EtaRadius,
    spec: &TwistSpec,
    ctx: &NormContext,
    truncation: u32,
) -> Result<ConvergenceReport> {
    let jet = taylor(f, truncation, spec)?;
    let table = jet_convergence_table(&jet, eta, ctx);
    let (convergent, witness) = table_is_nondecreasing(&table);
    Ok(ConvergenceReport { convergent, table, witness })
}
