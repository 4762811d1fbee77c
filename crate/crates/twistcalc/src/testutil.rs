//! Shared helpers for unit tests. The RNG honors `TWISTCALC_SEED` so any
//! randomized failure reproduces from its reported seed.

use crate::coefficients::{scalar_int, Scalar};
use crate::poly::{monomials_up_to, Poly};
use rand::{Rng, SeedableRng};

pub fn seeded_rng() -> rand_chacha::ChaCha8Rng {
    let seed = std::env::var("TWISTCALC_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0xC0FFEE);
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Random sparse polynomial with small integer coefficients, total degree
/// at most `max_deg`.
pub fn random_poly(rng: &mut impl Rng, d: usize, max_deg: u32) -> Poly {
    let mut p = Poly::zero(d);
    for m in monomials_up_to(d, max_deg) {
        if rng.gen_range(0..10) < 4 {
            let c = rng.gen_range(-9i64..=9);
            p.add_term(m, scalar_int(c));
        }
    }
    p
}

/// Random nonzero rational with small numerator and denominator.
pub fn random_scalar(rng: &mut impl Rng) -> Scalar {
    let num = rng.gen_range(-40i64..=40);
    let den = rng.gen_range(1i64..=12);
    Scalar::new(num.into(), den.into())
}
