//! Twisted connections on free modules and their de Rham complex at a
//! truncation.
//!
//! A connection on `A^r` is given per variable by an r x r matrix `N_i`
//! whose column j is the image of the basis vector e_j under the i-th
//! derivation. General elements follow the module Leibniz law
//! `∇_i(a e) = ∂_i(a) e + σ_i(a) ∇_i(e)`, so coefficients twist as they
//! move past the derivation.

use crate::coefficients::Scalar;
use crate::error::{Error, Result};
use crate::linalg::rank;
use crate::poly::{monomials_up_to, Monomial, Poly};
use crate::twist::TwistSpec;
use num::One;

/// Free module of finite rank with a twisted connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionModule {
    rank: usize,
    /// matrices[i][r][c] = entry (r, c) of N_i; column c is ∇_i(e_c).
    matrices: Vec<Vec<Vec<Poly>>>,
    spec: TwistSpec,
}

impl ConnectionModule {
    pub fn new(rank: usize, matrices: Vec<Vec<Vec<Poly>>>, spec: TwistSpec) -> Result<Self> {
        let d = spec.arity();
        if matrices.len() != d {
            return Err(Error::ArityMismatch(format!(
                "expected {d} connection matrices, got {}",
                matrices.len()
            )));
        }
        for (i, m) in matrices.iter().enumerate() {
            if m.len() != rank || m.iter().any(|row| row.len() != rank) {
                return Err(Error::ArityMismatch(format!(
                    "matrix N_{} is not {rank}x{rank}",
                    i + 1
                )));
            }
            for row in m {
                for entry in row {
                    if entry.arity() != d {
                        return Err(Error::ArityMismatch(
                            "connection entries must share the spec arity".into(),
                        ));
                    }
                }
            }
        }
        Ok(ConnectionModule { rank, matrices, spec })
    }

    /// The trivial connection (all N_i = 0) of the given rank.
    pub fn trivial(rank: usize, spec: TwistSpec) -> Self {
        let d = spec.arity();
        let zero = Poly::zero(d);
        let m = vec![vec![vec![zero; rank]; rank]; d];
        ConnectionModule { rank, matrices: m, spec }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn spec(&self) -> &TwistSpec {
        &self.spec
    }

    pub fn matrix(&self, i: usize) -> &Vec<Vec<Poly>> {
        &self.matrices[i]
    }

    /// Largest total degree appearing in any N_i; `None` when all are zero.
    pub fn max_matrix_degree(&self) -> Option<u32> {
        self.matrices
            .iter()
            .flatten()
            .flatten()
            .filter_map(Poly::total_degree)
            .max()
    }

    /// Apply the i-th derivation to a module element.
    pub fn module_apply(&self, i: usize, v: &[Poly]) -> Result<Vec<Poly>> {
        if v.len() != self.rank {
            return Err(Error::ArityMismatch(format!(
                "vector length {} does not match module rank {}",
                v.len(),
                self.rank
            )));
        }
        let mut out = Vec::with_capacity(self.rank);
        for r in 0..self.rank {
            let mut entry = self.spec.derivation(&v[r], i)?;
            for (c, a) in v.iter().enumerate() {
                let twisted = self.spec.sigma_apply(a, i);
                entry = entry.add(&self.matrices[i][r][c].mul(&twisted));
            }
            out.push(entry);
        }
        Ok(out)
    }
}

/// Result of the integrability test; a failure carries the variable pair
/// and element that witnessed non-commuting actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub witness: Option<(usize, usize, Monomial, usize)>,
}

/// Check that the derivation actions commute: ∇_i∇_j = ∇_j∇_i on every
/// basis vector scaled by a monomial of degree ≤ `bound`.
pub fn integrability_check(
    module: &ConnectionModule,
    bound: u32,
) -> Result<IntegrabilityReport> {
    let d = module.spec().arity();
    let r = module.rank();
    for i in 0..d {
        for j in (i + 1)..d {
            for m in monomials_up_to(d, bound) {
                for basis in 0..r {
                    let mut v = vec![Poly::zero(d); r];
                    v[basis] = Poly::monomial(m.clone(), Scalar::one());
                    let ij = module.module_apply(i, &module.module_apply(j, &v)?)?;
                    let ji = module.module_apply(j, &module.module_apply(i, &v)?)?;
                    if ij != ji {
                        return Ok(IntegrabilityReport {
                            integrable: false,
                            witness: Some((i, j, m, basis)),
                        });
                    }
                }
            }
        }
    }
    Ok(IntegrabilityReport { integrable: true, witness: None })
}

/// Rank-1 closed-form integrability condition:
/// `∂_i(N_j) + σ_i(N_j)·N_i = ∂_j(N_i) + σ_j(N_i)·N_j` for all i < j.
/// Used as an independent oracle against [`integrability_check`].
pub fn rank1_integrability(module: &ConnectionModule) -> Result<bool> {
    if module.rank() != 1 {
        return Err(Error::Domain(
            "closed-form condition only applies to rank-1 modules".into(),
        ));
    }
    let spec = module.spec();
    let d = spec.arity();
    let n = |i: usize| module.matrix(i)[0][0].clone();
    for i in 0..d {
        for j in (i + 1)..d {
            let lhs = spec
                .derivation(&n(j), i)?
                .add(&spec.sigma_apply(&n(j), i).mul(&n(i)));
            let rhs = spec
                .derivation(&n(i), j)?
                .add(&spec.sigma_apply(&n(i), j).mul(&n(j)));
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Ranks of the truncated de Rham complex, one entry per complex degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeRhamReport {
    /// Requested domain truncation for degree 0.
    pub truncation: u32,
    /// Actual per-level degree bounds used (grown when images overflow the
    /// planned bound, as Mahler twists force).
    pub bounds: Vec<u32>,
    /// Space dimension, kernel rank, image rank of each ∇_n.
    pub levels: Vec<DeRhamLevel>,
    /// Whether ∇_{n+1} ∘ ∇_n vanished identically on every truncated basis
    /// element (it must; recorded as evidence).
    pub d_squared_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeRhamLevel {
    pub dim: usize,
    pub kernel_rank: usize,
    pub image_rank: usize,
}

impl DeRhamReport {
    /// H^n at the truncation: kernel of ∇_n minus image of ∇_{n-1}.
    pub fn cohomology_ranks(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.levels.len());
        for (n, level) in self.levels.iter().enumerate() {
            let incoming = if n == 0 {
                0
            } else {
                self.levels[n - 1].image_rank
            };
            out.push(level.kernel_rank - incoming);
        }
        out
    }
}

/// One basis element of M ⊗ Λ^n: module index, subset mask, monomial.
type FormBasis = Vec<(usize, u32, Monomial)>;

/// Compute exact kernel/image ranks of the truncated de Rham complex.
///
/// Degree-n forms carry coefficients of total degree ≤ B_n, where B_0 = D
/// and B_{n+1} = B_n + max(-1, deg N) with deg 0 = -1; when an image still
/// overflows the planned bound (degree-raising twists like Mahler), the
/// codomain bound grows to fit, so every matrix entry is exact.
pub fn de_rham_dims(module: &ConnectionModule, truncation: u32) -> Result<DeRhamReport> {
    let integ = integrability_check(module, truncation.min(4))?;
    if !integ.integrable {
        let (i, j, m, basis) = integ.witness.expect("failing check carries witness");
        return Err(Error::NonIntegrable(format!(
            "actions of variables {} and {} differ on {} e_{}",
            i + 1,
            j + 1,
            Poly::monomial(m, Scalar::one()),
            basis + 1
        )));
    }

    let spec = module.spec();
    let d = spec.arity();
    let r = module.rank();
    let growth: i64 = match module.max_matrix_degree() {
        None => -1,
        Some(g) => (g as i64).max(-1),
    };

    // subsets of {0..d-1} by cardinality
    let mut subsets_by_card: Vec<Vec<u32>> = vec![Vec::new(); d + 1];
    for mask in 0u32..(1 << d) {
        subsets_by_card[mask.count_ones() as usize].push(mask);
    }

    let enumerate_basis = |card: usize, bound: u32| -> FormBasis {
        let mut basis = Vec::new();
        if card > d {
            return basis;
        }
        for &mask in &subsets_by_card[card] {
            for rr in 0..r {
                for m in monomials_up_to(d, bound) {
                    basis.push((rr, mask, m));
                }
            }
        }
        basis
    };

    // apply ∇_n to a single basis element; returns (module index, mask) ->
    // polynomial pieces of the image
    let apply_nabla = |n: usize, rr: usize, mask: u32, m: &Monomial| -> Result<Vec<(usize, u32, Poly)>> {
        let mut v = vec![Poly::zero(d); r];
        v[rr] = Poly::monomial(m.clone(), Scalar::one());
        let global_sign = if n % 2 == 0 { 1i64 } else { -1 };
        let mut out = Vec::new();
        for i in 0..d {
            if mask & (1 << i) != 0 {
                continue; // e_i ∧ e_S = 0 when i ∈ S
            }
            // sign of e_i ∧ e_S with S kept in increasing order
            let below = (mask & ((1u32 << i) - 1)).count_ones();
            let sign = if below % 2 == 0 { global_sign } else { -global_sign };
            let image = module.module_apply(i, &v)?;
            let new_mask = mask | (1 << i);
            for (idx, p) in image.into_iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                out.push((idx, new_mask, p.scale(&Scalar::from_integer(sign.into()))));
            }
        }
        Ok(out)
    };

    // per-level degree bounds, growing codomains when images overflow
    let mut bounds: Vec<u32> = Vec::with_capacity(d + 2);
    bounds.push(truncation);
    let mut levels = Vec::new();
    let mut image_ranks = Vec::new();

    for n in 0..=d {
        let bound = bounds[n];
        let domain = enumerate_basis(n, bound);
        let dim = domain.len();

        // images, computed exactly
        let mut images: Vec<Vec<(usize, u32, Poly)>> = Vec::with_capacity(dim);
        let mut max_image_deg: i64 = -1;
        for (rr, mask, m) in &domain {
            let img = apply_nabla(n, *rr, *mask, m)?;
            for (_, _, p) in &img {
                if let Some(g) = p.total_degree() {
                    max_image_deg = max_image_deg.max(g as i64);
                }
            }
            images.push(img);
        }

        let planned = (bound as i64 + growth).max(0) as u32;
        let next_bound = planned.max(max_image_deg.max(0) as u32);
        bounds.push(next_bound);

        // codomain basis index
        let codomain = enumerate_basis(n + 1, next_bound);
        let mut index = std::collections::HashMap::new();
        for (pos, key) in codomain.iter().enumerate() {
            index.insert((key.0, key.1, key.2.clone()), pos);
        }

        // matrix rows = codomain coordinates, columns = domain basis
        let mut matrix = vec![vec![Scalar::from_integer(0.into()); dim]; codomain.len()];
        for (col, img) in images.iter().enumerate() {
            for (idx, mask, p) in img {
                for (mono, c) in p.terms() {
                    let row = index[&(*idx, *mask, mono.clone())];
                    matrix[row][col] = &matrix[row][col] + c;
                }
            }
        }
        let image_rank = rank(matrix);
        let kernel_rank = dim - image_rank;
        levels.push(DeRhamLevel { dim, kernel_rank, image_rank });
        image_ranks.push(image_rank);
    }

    // d² = 0 on the truncation: push every domain basis element through two
    // consecutive differentials exactly
    let mut d_squared_zero = true;
    'outer: for n in 0..d {
        for (rr, mask, m) in enumerate_basis(n, bounds[n]) {
            let first = apply_nabla(n, rr, mask, &m)?;
            // accumulate ∇_{n+1} of the image
            let mut acc: std::collections::HashMap<(usize, u32, Monomial), Scalar> =
                std::collections::HashMap::new();
            for (idx, mk, p) in first {
                for (mono, coeff) in p.terms() {
                    let second = apply_nabla(n + 1, idx, mk, mono)?;
                    for (idx2, mk2, p2) in second {
                        for (mono2, c2) in p2.terms() {
                            let e = acc
                                .entry((idx2, mk2, mono2.clone()))
                                .or_insert_with(|| Scalar::from_integer(0.into()));
                            *e = &*e + &(coeff * c2);
                        }
                    }
                }
            }
            if acc.values().any(|v| !num::Zero::is_zero(v)) {
                d_squared_zero = false;
                break 'outer;
            }
        }
    }

    Ok(DeRhamReport {
        truncation,
        bounds: bounds[..=d].to_vec(),
        levels,
        d_squared_zero,
    })
}
