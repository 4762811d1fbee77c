//! Twisted polynomial algebras: `K[x_1..x_d]` together with commuting
//! substitution endomorphisms, one per variable, and the difference
//! quotients they induce.
//!
//! Each variable carries its own twist `σ_i`, given by a univariate image
//! `s_i(x_i)`; variables never mix (σ_i fixes x_j for j ≠ i), which is what
//! makes the difference quotient an exact polynomial division.

use crate::coefficients::{NormContext, NormValue, Scalar};
use crate::error::{Error, Result};
use crate::poly::{monomials_up_to, Monomial, Poly};
use num::{One, Zero};
use std::fmt;

/// The substitution rule for a single variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwistKind {
    /// σ(x) = q·x with q ∉ {0, ±1}.
    QTwist { q: Scalar },
    /// σ(x) = x + h with h ≠ 0.
    Shift { h: Scalar },
    /// σ(x) = x^l with l ≥ 2.
    Mahler { l: u32 },
    /// σ(x) = image(x) for an arbitrary univariate polynomial ≠ x,
    /// supplied with arity 1.
    Custom { image: Poly },
    /// σ(x) = x. The difference quotient degenerates, so this kind uses the
    /// ordinary partial derivative; it exists for the classical side of
    /// confluence.
    Identity,
}

impl TwistKind {
    /// Reject parameter values that silently collapse to the identity or
    /// break invertibility assumptions.
    fn validate(&self) -> Result<()> {
        match self {
            TwistKind::QTwist { q } => {
                if q.is_zero() {
                    Err(Error::Domain("q-twist requires q != 0".into()))
                } else if q.is_one() {
                    Err(Error::IdentityTwist(
                        "q = 1 collapses to the identity twist; use TwistKind::Identity".into(),
                    ))
                } else if (-q).is_one() {
                    Err(Error::RootOfUnity(
                        "q = -1 is a root of unity; (2)_q = 0 breaks divided powers".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            TwistKind::Shift { h } => {
                if h.is_zero() {
                    Err(Error::IdentityTwist(
                        "h = 0 collapses to the identity twist; use TwistKind::Identity".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            TwistKind::Mahler { l } => match l {
                0 => Err(Error::Domain("Mahler twist requires l >= 2".into())),
                1 => Err(Error::IdentityTwist(
                    "l = 1 collapses to the identity twist; use TwistKind::Identity".into(),
                )),
                _ => Ok(()),
            },
            TwistKind::Custom { image } => {
                if image.arity() != 1 {
                    Err(Error::ArityMismatch(
                        "custom twist image must be univariate (arity 1)".into(),
                    ))
                } else if *image == Poly::var(1, 0) {
                    Err(Error::IdentityTwist(
                        "custom image x collapses to the identity twist".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            TwistKind::Identity => Ok(()),
        }
    }

    /// For the q-twist, its parameter.
    pub fn q(&self) -> Option<&Scalar> {
        match self {
            TwistKind::QTwist { q } => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for TwistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwistKind::QTwist { q } => write!(f, "q-twist(q={q})"),
            TwistKind::Shift { h } => write!(f, "shift(h={h})"),
            TwistKind::Mahler { l } => write!(f, "mahler(l={l})"),
            TwistKind::Custom { image } => write!(f, "custom(s={image})"),
            TwistKind::Identity => write!(f, "identity"),
        }
    }
}

/// A twisted algebra: dimension, one twist per variable, and the norm
/// context used for valuations. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistSpec {
    kinds: Vec<TwistKind>,
    /// Full-arity image s_i(x_i) of each variable, precomputed.
    images: Vec<Poly>,
    norm: NormContext,
}

impl TwistSpec {
    pub fn new(kinds: Vec<TwistKind>, norm: NormContext) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::ArityMismatch("at least one variable required".into()));
        }
        for k in &kinds {
            k.validate()?;
        }
        let d = kinds.len();
        let images = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| kind_image(k, d, i))
            .collect();
        Ok(TwistSpec { kinds, images, norm })
    }

    /// Uniform q-twist in `d` variables.
    pub fn q_twist(d: usize, q: Scalar, norm: NormContext) -> Result<Self> {
        TwistSpec::new(vec![TwistKind::QTwist { q }; d], norm)
    }

    /// Uniform shift twist in `d` variables.
    pub fn shift(d: usize, h: Scalar, norm: NormContext) -> Result<Self> {
        TwistSpec::new(vec![TwistKind::Shift { h }; d], norm)
    }

    /// Uniform Mahler twist in `d` variables.
    pub fn mahler(d: usize, l: u32, norm: NormContext) -> Result<Self> {
        TwistSpec::new(vec![TwistKind::Mahler { l }; d], norm)
    }

    /// Identity twist in every variable (the classical algebra).
    pub fn identity(d: usize, norm: NormContext) -> Result<Self> {
        TwistSpec::new(vec![TwistKind::Identity; d], norm)
    }

    pub fn arity(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, i: usize) -> &TwistKind {
        &self.kinds[i]
    }

    pub fn kinds(&self) -> &[TwistKind] {
        &self.kinds
    }

    pub fn norm(&self) -> &NormContext {
        &self.norm
    }

    pub fn is_identity(&self, i: usize) -> bool {
        matches!(self.kinds[i], TwistKind::Identity)
    }

    /// The image s_i(x_i) as a full-arity polynomial.
    pub fn image(&self, i: usize) -> &Poly {
        &self.images[i]
    }

    /// σ_i(x_i) − x_i, the denominator of the difference quotient.
    pub fn image_difference(&self, i: usize) -> Poly {
        self.images[i].sub(&Poly::var(self.arity(), i))
    }

    /// Image of x_i under σ_i^k, computed in closed form where one exists.
    pub fn power_image(&self, i: usize, k: u32) -> Result<Poly> {
        let d = self.arity();
        let x = Poly::var(d, i);
        match &self.kinds[i] {
            TwistKind::Identity => Ok(x),
            TwistKind::QTwist { q } => {
                let mut c = Scalar::one();
                for _ in 0..k {
                    c *= q;
                }
                Ok(x.scale(&c))
            }
            TwistKind::Shift { h } => {
                Ok(x.add(&Poly::constant(d, h * Scalar::from_integer(k.into()))))
            }
            TwistKind::Mahler { l } => {
                let e = l.checked_pow(k).ok_or_else(|| {
                    Error::Domain(format!("Mahler exponent {l}^{k} overflows"))
                })?;
                let mut m = Monomial::constant(d);
                m.0[i] = e;
                Ok(Poly::monomial(m, Scalar::one()))
            }
            TwistKind::Custom { .. } => {
                let mut img = x;
                for _ in 0..k {
                    img = img.substitute(i, &self.images[i]);
                }
                Ok(img)
            }
        }
    }

    /// Apply σ_i to a polynomial: substitute x_i ↦ s_i(x_i).
    pub fn sigma_apply(&self, f: &Poly, i: usize) -> Poly {
        self.check_poly_arity(f);
        f.substitute(i, &self.images[i])
    }

    /// Apply σ_i exactly k_i times for every i; order is irrelevant because
    /// transverse twists commute.
    pub fn sigma_power_apply(&self, f: &Poly, k: &[u32]) -> Result<Poly> {
        self.check_poly_arity(f);
        debug_assert_eq!(k.len(), self.arity());
        let mut out = f.clone();
        for (i, &ki) in k.iter().enumerate() {
            if ki == 0 {
                continue;
            }
            let img = self.power_image(i, ki)?;
            out = out.substitute(i, &img);
        }
        Ok(out)
    }

    /// The twisted derivation ∂_i(f) = (σ_i(f) − f) / (σ_i(x_i) − x_i).
    ///
    /// The quotient is exact for every substitution twist because t − s
    /// divides f(t) − f(s); for the identity kind this degenerates and the
    /// ordinary partial derivative is used instead.
    pub fn derivation(&self, f: &Poly, i: usize) -> Result<Poly> {
        self.check_poly_arity(f);
        if self.is_identity(i) {
            return Ok(f.partial(i));
        }
        let num = self.sigma_apply(f, i).sub(f);
        if num.is_zero() {
            return Ok(Poly::zero(self.arity()));
        }
        num.div_exact_univariate(&self.image_difference(i), i)
    }

    /// Gauss valuation under this spec's norm context.
    pub fn gauss_norm(&self, f: &Poly) -> NormValue {
        gauss_norm(f, &self.norm)
    }

    fn check_poly_arity(&self, f: &Poly) {
        debug_assert_eq!(
            f.arity(),
            self.arity(),
            "polynomial arity must match the spec dimension"
        );
    }
}

fn kind_image(kind: &TwistKind, d: usize, i: usize) -> Poly {
    let x = Poly::var(d, i);
    match kind {
        TwistKind::Identity => x,
        TwistKind::QTwist { q } => x.scale(q),
        TwistKind::Shift { h } => x.add(&Poly::constant(d, h.clone())),
        TwistKind::Mahler { l } => {
            let mut m = Monomial::constant(d);
            m.0[i] = *l;
            Poly::monomial(m, Scalar::one())
        }
        TwistKind::Custom { image } => {
            // Reindex the univariate pattern into variable i of arity d.
            let mut out = Poly::zero(d);
            for (m, c) in image.terms() {
                let mut e = Monomial::constant(d);
                e.0[i] = m.0[0];
                out.add_term(e, c.clone());
            }
            out
        }
    }
}

/// Gauss valuation of a polynomial: the minimum valuation over its
/// coefficients, `+∞` for zero. Smaller valuation means larger norm.
pub fn gauss_norm(f: &Poly, ctx: &NormContext) -> NormValue {
    f.terms()
        .map(|(_, c)| ctx.valuation(c))
        .min()
        .unwrap_or(NormValue::Infinite)
}

/// Per-variable coordinate diagnostics produced by [`check_coordinates`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableCoordinates {
    /// σ_i^n(x_i) − σ_i^k(x_i) ≠ 0 for all 0 ≤ k < n ≤ N; sufficient for
    /// "kind" over an integral domain.
    pub kind: bool,
    /// The same differences are units (nonzero constants); only the shift
    /// family achieves this over K[x].
    pub strong: bool,
    /// Degree bound to which the twisted Leibniz identity was verified on
    /// monomial pairs. Equals the requested bound when every pair passed;
    /// this is a verification record, not an assertion of classicality.
    pub classical_checked_to_degree: u32,
    /// (n, k) with σ_i^n(x_i) = σ_i^k(x_i), when `kind` fails.
    pub kind_witness: Option<(u32, u32)>,
    /// (n, k) whose difference is a non-unit, when `strong` fails.
    pub strong_witness: Option<(u32, u32)>,
}

/// Coordinate diagnostics for a whole spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateReport {
    pub bound: u32,
    pub vars: Vec<VariableCoordinates>,
}

impl CoordinateReport {
    pub fn all_kind(&self) -> bool {
        self.vars.iter().all(|v| v.kind)
    }

    pub fn all_strong(&self) -> bool {
        self.vars.iter().all(|v| v.strong)
    }
}

/// Check, exactly and exhaustively up to `bound`, that each variable is a
/// kind (and possibly strong) coordinate, and verify the twisted Leibniz
/// rule on all monomial pairs of degree ≤ `bound`.
pub fn check_coordinates(spec: &TwistSpec, bound: u32) -> Result<CoordinateReport> {
    let d = spec.arity();
    let monos = monomials_up_to(d, bound);
    let mut vars = Vec::with_capacity(d);
    for i in 0..d {
        let mut kind = true;
        let mut strong = true;
        let mut kind_witness = None;
        let mut strong_witness = None;
        'outer: for n in 1..=bound {
            for k in 0..n {
                let diff = spec.power_image(i, n)?.sub(&spec.power_image(i, k)?);
                if diff.is_zero() {
                    kind = false;
                    strong = false;
                    kind_witness = Some((n, k));
                    strong_witness = Some((n, k));
                    break 'outer;
                }
                if strong && diff.total_degree() != Some(0) {
                    strong = false;
                    strong_witness = Some((n, k));
                }
            }
        }
        // Twisted Leibniz on monomial pairs: ∂(fg) = f∂(g) + σ(g)∂(f).
        let mut checked = bound;
        'leibniz: for f in &monos {
            for g in &monos {
                let fp = Poly::monomial(f.clone(), Scalar::one());
                let gp = Poly::monomial(g.clone(), Scalar::one());
                let lhs = spec.derivation(&fp.mul(&gp), i)?;
                let rhs = fp
                    .mul(&spec.derivation(&gp, i)?)
                    .add(&spec.sigma_apply(&gp, i).mul(&spec.derivation(&fp, i)?));
                if lhs != rhs {
                    checked = f.total_degree().max(g.total_degree()).saturating_sub(1);
                    break 'leibniz;
                }
            }
        }
        vars.push(VariableCoordinates {
            kind,
            strong,
            classical_checked_to_degree: checked,
            kind_witness,
            strong_witness,
        });
    }
    Ok(CoordinateReport { bound, vars })
}

/// Outcome of [`contractivity_check`]; a failure carries the monomial and
/// variable that witnessed norm growth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractivityReport {
    pub contractive: bool,
    pub witness: Option<(usize, Monomial)>,
}

/// Verify ‖σ_i(m)‖ ≤ ‖m‖ (valuations: v(σ_i(m)) ≥ v(m)) under the Gauss
/// norm for every monomial of degree ≤ `bound` and every variable.
pub fn contractivity_check(spec: &TwistSpec, ctx: &NormContext, bound: u32) -> ContractivityReport {
    let monos = monomials_up_to(spec.arity(), bound);
    for i in 0..spec.arity() {
        for m in &monos {
            let p = Poly::monomial(m.clone(), Scalar::one());
            let vm = gauss_norm(&p, ctx);
            let vs = gauss_norm(&spec.sigma_apply(&p, i), ctx);
            if vs < vm {
                return ContractivityReport { contractive: false, witness: Some((i, m.clone())) };
            }
        }
    }
    ContractivityReport { contractive: true, witness: None }
}
