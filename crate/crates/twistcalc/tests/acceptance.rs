//! Acceptance gate: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion summary lines. Oracles are computed independently inside
//! this file (q-Pascal recurrence, literal word evaluation, closed-form
//! coefficient assembly) rather than through the code paths under test.
//! Set TWISTCALC_SEED to vary the sampled inputs.

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use twistcalc::analysis::{operator_eta_norm, EtaRadius};
use twistcalc::coefficients::{scalar_int, scalar_ratio};
use twistcalc::confluence::{from_classical, to_classical};
use twistcalc::connection::{de_rham_dims, ConnectionModule};
use twistcalc::jets::{jet_multiply, taylor, to_twisted_basis, symmetric_check, XiPoly};
use twistcalc::operators::{compose, normal_form, Atom, OperatorWord, TwistedOperator};
use twistcalc::poly::monomials_up_to;
use twistcalc::{Error, Monomial, NormContext, NormValue, Poly, Scalar, TwistKind, TwistSpec};

fn rng() -> ChaCha8Rng {
    let seed = std::env::var("TWISTCALC_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5EED_CA1C);
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random polynomial of total degree <= max_deg with small rational
/// coefficients, occasionally divisible by 5 so p-adic valuations vary.
fn random_poly(rng: &mut ChaCha8Rng, d: usize, max_deg: u32) -> Poly {
    let mut p = Poly::zero(d);
    for _ in 0..rng.gen_range(1..=5) {
        let exps: Vec<u32> = (0..d).map(|_| rng.gen_range(0..=max_deg)).collect();
        if exps.iter().sum::<u32>() > max_deg {
            continue;
        }
        let num = rng.gen_range(-20i64..=20);
        if num == 0 {
            continue;
        }
        let den = rng.gen_range(1i64..=6);
        let c = scalar_ratio(num, den);
        p = p.add(&Poly::monomial(Monomial(exps), c));
    }
    p
}

fn q_spec(d: usize, q: i64, norm: NormContext) -> TwistSpec {
    TwistSpec::new(vec![TwistKind::QTwist { q: scalar_int(q) }; d], norm).unwrap()
}

fn shift_spec(d: usize, h: i64, norm: NormContext) -> TwistSpec {
    TwistSpec::new(vec![TwistKind::Shift { h: scalar_int(h) }; d], norm).unwrap()
}

fn mahler_spec(d: usize, l: u32) -> TwistSpec {
    TwistSpec::new(vec![TwistKind::Mahler { l }; d], NormContext::Trivial).unwrap()
}

fn p5() -> NormContext {
    NormContext::padic(5).unwrap()
}

/// Independent Gaussian binomial oracle: the q-Pascal recurrence
/// binom(n,k)_q = binom(n-1,k-1)_q + q^k binom(n-1,k)_q.
fn q_pascal(n: u32, k: u32, q: &Scalar) -> Scalar {
    if k > n {
        return Scalar::zero();
    }
    if k == 0 || k == n {
        return Scalar::one();
    }
    let qk = num::pow::pow(q.clone(), k as usize);
    q_pascal(n - 1, k - 1, q) + qk * q_pascal(n - 1, k, q)
}

/// q-factorial oracle: (k)_q! = prod_{j=1..k} (1 + q + ... + q^{j-1}).
fn q_factorial(k: u32, q: &Scalar) -> Scalar {
    let mut acc = Scalar::one();
    for j in 1..=k {
        let mut bracket = Scalar::zero();
        let mut qi = Scalar::one();
        for _ in 0..j {
            bracket += qi.clone();
            qi *= q.clone();
        }
        acc *= bracket;
    }
    acc
}

/// Literal left-to-right evaluation of an operator word: the rightmost
/// atom acts first.
fn eval_word_literal(w: &OperatorWord, f: &Poly, spec: &TwistSpec) -> Poly {
    let mut acc = f.clone();
    for atom in w.atoms.iter().rev() {
        acc = match atom {
            Atom::Coeff(c) => c.mul(&acc),
            Atom::D(i) => spec.derivation(&acc, *i).unwrap(),
        };
    }
    acc
}

/// Gauss valuation of a polynomial: minimum coefficient valuation.
fn gauss_val(p: &Poly, ctx: &NormContext) -> NormValue {
    p.terms()
        .map(|(_, c)| ctx.valuation(c))
        .min()
        .unwrap_or(NormValue::Infinite)
}

/// eta-norm valuation of a xi-polynomial in the monomial basis.
fn xi_val(p: &XiPoly, ell: &Scalar, ctx: &NormContext) -> NormValue {
    p.terms()
        .map(|(k, c)| {
            let weight = Scalar::from_integer(k.total_degree().into()) * ell.clone();
            gauss_val(c, ctx).offset(&weight)
        })
        .min()
        .unwrap_or(NormValue::Infinite)
}

fn random_operator(
    rng: &mut ChaCha8Rng,
    spec: &TwistSpec,
    order: u32,
    coeff_deg: u32,
) -> TwistedOperator {
    let d = spec.arity();
    let mut op = TwistedOperator::zero(spec.clone());
    for k in monomials_up_to(d, order) {
        if rng.gen_bool(0.4) {
            continue;
        }
        let c = random_poly(rng, d, coeff_deg);
        op = op
            .add(&TwistedOperator::divided_power(k, spec.clone()).scale_poly(&c))
            .unwrap();
    }
    op
}

#[test]
fn c01_twisted_leibniz() {
    let start = Instant::now();
    let mut rng = rng();
    let kinds: Vec<(&str, fn(usize) -> TwistSpec)> = vec![
        ("q=6 over 5-adic", |d| q_spec(d, 6, p5())),
        ("shift h=5", |d| shift_spec(d, 5, p5())),
        ("mahler l=2", |d| mahler_spec(d, 2)),
    ];
    for (label, make) in &kinds {
        for _ in 0..100 {
            let d = rng.gen_range(1..=3);
            let spec = make(d);
            let f = random_poly(&mut rng, d, 6);
            let g = random_poly(&mut rng, d, 6);
            let fg = f.mul(&g);
            for i in 0..d {
                let lhs = spec.derivation(&fg, i).unwrap();
                let rhs = f
                    .mul(&spec.derivation(&g, i).unwrap())
                    .add(&spec.sigma_apply(&g, i).mul(&spec.derivation(&f, i).unwrap()));
                assert_eq!(lhs, rhs, "Leibniz failed for {label}, i={i}");
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!("[criterion 01] pass: twisted Leibniz, 100 pairs per kind, d <= 3, deg <= 6 ({elapsed:?})");
}

#[test]
fn c02_taylor_is_algebra_morphism() {
    let start = Instant::now();
    let mut rng = rng();
    let specs = vec![
        q_spec(1, 6, p5()),
        q_spec(2, 3, NormContext::Trivial),
        shift_spec(2, 5, NormContext::Trivial),
        mahler_spec(1, 2),
    ];
    for i in 0..100 {
        let spec = &specs[i % specs.len()];
        let d = spec.arity();
        let n = rng.gen_range(0..=4);
        let f = random_poly(&mut rng, d, 4);
        let g = random_poly(&mut rng, d, 4);
        let lhs = taylor(&f.mul(&g), n, spec).unwrap();
        let rhs = jet_multiply(
            &taylor(&f, n, spec).unwrap(),
            &taylor(&g, n, spec).unwrap(),
            n,
        )
        .unwrap();
        assert_eq!(lhs, rhs, "morphism failed at n={n}, d={d}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("[criterion 02] pass: taylor(fg) = taylor(f)*taylor(g), 100 pairs, n <= 4 ({elapsed:?})");
}

#[test]
fn c03_divided_power_coefficients_d2() {
    let q1 = scalar_int(6);
    let q2 = scalar_int(26);
    let ctx = p5();
    let spec = TwistSpec::new(
        vec![
            TwistKind::QTwist { q: q1.clone() },
            TwistKind::QTwist { q: q2.clone() },
        ],
        ctx.clone(),
    )
    .unwrap();
    let mut checked = 0usize;
    for n in monomials_up_to(2, 6) {
        let f = Poly::monomial(n.clone(), Scalar::one());
        let jet = taylor(&f, n.total_degree(), &spec).unwrap();
        for (k, coeff) in jet.terms() {
            // the jet of a monomial is supported on k <= n componentwise
            assert!(k.0[0] <= n.0[0] && k.0[1] <= n.0[1], "k={k:?} beyond n={n:?}");
            let expected = Poly::monomial(
                Monomial(vec![n.0[0] - k.0[0], n.0[1] - k.0[1]]),
                q_pascal(n.0[0], k.0[0], &q1) * q_pascal(n.0[1], k.0[1], &q2),
            );
            assert_eq!(coeff, &expected, "coefficient at k={k:?} of x^{n:?}");
            // v_p(q_i - 1) > 0 here, so every coefficient is integral
            assert!(
                gauss_val(coeff, &ctx) >= NormValue::zero(),
                "negative valuation at k={k:?} of x^{n:?}"
            );
            checked += 1;
        }
    }
    println!("[criterion 03] pass: d=2 q-twist jet coefficients match the Gaussian binomial product ({checked} coefficients, |n| <= 6)");
}

#[test]
fn c04_normal_form() {
    let mut rng = rng();
    // fixture: normal_form(d . x) = 1 + q x d for the q-twist
    let q = scalar_int(3);
    let spec = q_spec(1, 3, NormContext::Trivial);
    let word = OperatorWord::new(vec![Atom::D(0), Atom::Coeff(Poly::var(1, 0))]).unwrap();
    let nf = normal_form(&word, &spec).unwrap();
    let expected = TwistedOperator::identity(spec.clone())
        .add(
            &TwistedOperator::divided_power(Monomial(vec![1]), spec.clone())
                .scale_poly(&Poly::var(1, 0).scale(&q)),
        )
        .unwrap();
    assert_eq!(nf, expected, "normal_form(d x) != 1 + q x d");

    // 50 random words: the normal form acts exactly as the literal word
    let specs = vec![
        q_spec(1, 3, NormContext::Trivial),
        q_spec(2, 6, p5()),
        shift_spec(2, 5, NormContext::Trivial),
    ];
    for i in 0..50 {
        let spec = &specs[i % specs.len()];
        let d = spec.arity();
        let len = rng.gen_range(1..=5);
        let atoms: Vec<Atom> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Atom::D(rng.gen_range(0..d))
                } else {
                    Atom::Coeff(random_poly(&mut rng, d, 2))
                }
            })
            .collect();
        let word = OperatorWord::new(atoms).unwrap();
        let nf = normal_form(&word, spec).unwrap();
        for m in monomials_up_to(d, 6) {
            let f = Poly::monomial(m, Scalar::one());
            assert_eq!(
                nf.apply(&f).unwrap(),
                eval_word_literal(&word, &f, spec),
                "word {i} disagrees on {f}"
            );
        }
    }
    println!("[criterion 04] pass: normal_form(d x) = 1 + q x d; 50 random words of length <= 5 act literally on deg <= 6");
}

#[test]
fn c05_q_factorial_divided_powers() {
    let q = scalar_int(3);
    let spec = q_spec(1, 3, NormContext::Trivial);
    let dq = TwistedOperator::divided_power(Monomial(vec![1]), spec.clone());
    let mut power = TwistedOperator::identity(spec.clone());
    for k in 0..=5u32 {
        let dp_k = TwistedOperator::divided_power(Monomial(vec![k]), spec.clone());
        let factorial = q_factorial(k, &q);
        for m in 0..=8u32 {
            let f = Poly::var(1, 0).pow(m);
            assert_eq!(
                power.apply(&f).unwrap(),
                dp_k.apply(&f).unwrap().scale(&factorial),
                "d^{k} != ({k})_q! dp[{k}] on x^{m}"
            );
        }
        power = compose(&power, &dq).unwrap();
    }
    println!("[criterion 05] pass: d^k = (k)_q! dp[k] for k <= 5 on monomials of degree <= 8");
}

#[test]
fn c06_schwarz_commutation() {
    let specs = vec![
        q_spec(3, 3, NormContext::Trivial),
        TwistSpec::new(
            vec![
                TwistKind::QTwist { q: scalar_int(3) },
                TwistKind::Shift { h: scalar_int(2) },
                TwistKind::Mahler { l: 2 },
            ],
            NormContext::Trivial,
        )
        .unwrap(),
    ];
    for spec in &specs {
        for m in monomials_up_to(3, 6) {
            let f = Poly::monomial(m, Scalar::one());
            for i in 0..3 {
                for j in 0..3 {
                    if i == j {
                        continue;
                    }
                    let didj = spec
                        .derivation(&spec.derivation(&f, j).unwrap(), i)
                        .unwrap();
                    let djdi = spec
                        .derivation(&spec.derivation(&f, i).unwrap(), j)
                        .unwrap();
                    assert_eq!(didj, djdi, "d{i} d{j} != d{j} d{i} on {f}");
                    let sidj = spec.sigma_apply(&spec.derivation(&f, j).unwrap(), i);
                    let djsi = spec
                        .derivation(&spec.sigma_apply(&f, i), j)
                        .unwrap();
                    assert_eq!(sidj, djsi, "s{i} d{j} != d{j} s{i} on {f}");
                }
            }
        }
    }
    println!("[criterion 06] pass: Schwarz and sigma/derivation commutation, d=3, all monomials of degree <= 6");
}

#[test]
fn c07_twisted_basis_isometry() {
    let mut rng = rng();
    let ctx = p5();
    let ell = Scalar::one();
    // v(x - qx) = v(5x) = 1 = ell, so eta sits exactly at the x-radius
    let specs = vec![q_spec(1, 6, p5()), q_spec(2, 6, p5())];
    for i in 0..100 {
        let spec = &specs[i % specs.len()];
        let d = spec.arity();
        let mut p = XiPoly::zero(d);
        for k in monomials_up_to(d, 4) {
            if rng.gen_bool(0.5) {
                continue;
            }
            p.add_term(k, random_poly(&mut rng, d, 3));
        }
        let monomial_side = xi_val(&p, &ell, &ctx);
        let jet = to_twisted_basis(&p, 4, spec).unwrap();
        let twisted_side = jet
            .terms()
            .map(|(k, c)| {
                let weight = Scalar::from_integer(k.total_degree().into()) * ell.clone();
                gauss_val(c, &ctx).offset(&weight)
            })
            .min()
            .unwrap_or(NormValue::Infinite);
        assert_eq!(monomial_side, twisted_side, "basis norms differ for {p:?}");
    }
    println!("[criterion 07] pass: twisted-basis eta-norm is an isometry at ell = 1 <= v(rho), 100 random xi-polynomials");
}

#[test]
fn c08_operator_norm_submultiplicative() {
    let mut rng = rng();
    let ctx = p5();
    let eta = EtaRadius::new(Scalar::one()).unwrap();
    let specs = vec![q_spec(1, 6, p5()), q_spec(2, 6, p5())];
    for i in 0..50 {
        let spec = &specs[i % specs.len()];
        let p = random_operator(&mut rng, spec, 2, 2);
        let q = random_operator(&mut rng, spec, 2, 2);
        let pq = compose(&p, &q).unwrap();
        let lhs = operator_eta_norm(&pq, &eta, &ctx);
        let rhs = operator_eta_norm(&p, &eta, &ctx).add(&operator_eta_norm(&q, &eta, &ctx));
        // log domain: v(p o q) >= v(p) + v(q) is the norm inequality
        assert!(lhs >= rhs, "submultiplicativity failed: {lhs} < {rhs}");
    }
    // dual-basis fixtures: v(dp[k]) = -|k| ell
    let spec = q_spec(2, 6, p5());
    for ell_num in [1i64, 2] {
        let eta = EtaRadius::new(scalar_int(ell_num)).unwrap();
        for k in monomials_up_to(2, 3) {
            let dp = TwistedOperator::divided_power(k.clone(), spec.clone());
            let expected = NormValue::finite(scalar_int(-(k.total_degree() as i64) * ell_num));
            assert_eq!(operator_eta_norm(&dp, &eta, &ctx), expected, "dp[{k:?}] at ell={ell_num}");
        }
    }
    println!("[criterion 08] pass: composition is norm-submultiplicative (50 pairs); ||dp[k]|| = eta^(-|k|) fixtures");
}

#[test]
fn c09_confluence_round_trip() {
    let start = Instant::now();
    let mut rng = rng();
    let specs = vec![
        q_spec(1, 6, p5()),
        q_spec(1, 3, NormContext::Trivial),
        TwistSpec::new(
            vec![
                TwistKind::QTwist { q: scalar_int(3) },
                TwistKind::Shift { h: Scalar::one() },
            ],
            NormContext::Trivial,
        )
        .unwrap(),
    ];
    for i in 0..25 {
        let spec = &specs[i % specs.len()];
        let op = random_operator(&mut rng, spec, 2, 3);
        let classical = to_classical(&op, 6).unwrap();
        let back = from_classical(&classical, spec, 6).unwrap();
        assert_eq!(back, op, "round trip failed for operator {i}");
    }

    // independently derived closed form: the q-derivation transports to
    // c_k = (q-1)^{k-1} x^{k-1} for k >= 1
    let q = scalar_int(6);
    let spec = q_spec(1, 6, p5());
    let dq = TwistedOperator::divided_power(Monomial(vec![1]), spec.clone());
    let image = to_classical(&dq, 6).unwrap();
    let classical = TwistSpec::identity(1, p5()).unwrap();
    let mut expected = TwistedOperator::zero(classical.clone());
    for k in 1..=6u32 {
        let c = Poly::var(1, 0)
            .pow(k - 1)
            .scale(&num::pow::pow(q.clone() - Scalar::one(), (k - 1) as usize));
        expected = expected
            .add(&TwistedOperator::divided_power(Monomial(vec![k]), classical.clone()).scale_poly(&c))
            .unwrap();
    }
    assert_eq!(image, expected, "q-derivation closed form");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("[criterion 09] pass: 25 round trips at N=6, D=6; q-derivation classical image matches the closed form ({elapsed:?})");
}

#[test]
fn c10_de_rham() {
    // q-line, trivial rank-1 connection, D=12: constants are the kernel
    let spec = q_spec(1, 6, p5());
    let module = ConnectionModule::new(1, vec![vec![vec![Poly::zero(1)]]], spec).unwrap();
    let report = de_rham_dims(&module, 12).unwrap();
    assert!(report.d_squared_zero);
    assert_eq!(report.cohomology_ranks(), vec![1, 0], "q-line cohomology");

    // d=2, trivial rank-1 connection, D=8: H^0 = 1
    let spec2 = q_spec(2, 3, NormContext::Trivial);
    let zero2 = vec![
        vec![vec![Poly::zero(2)]],
        vec![vec![Poly::zero(2)]],
    ];
    let module2 = ConnectionModule::new(1, zero2, spec2.clone()).unwrap();
    let report2 = de_rham_dims(&module2, 8).unwrap();
    assert!(report2.d_squared_zero);
    assert_eq!(report2.cohomology_ranks()[0], 1, "d=2 H^0");

    // the non-integrable fixture N1 = x2, N2 = 0 is rejected
    let bad = vec![
        vec![vec![Poly::var(2, 1)]],
        vec![vec![Poly::zero(2)]],
    ];
    let err = ConnectionModule::new(1, bad, spec2)
        .and_then(|m| de_rham_dims(&m, 4))
        .unwrap_err();
    assert!(matches!(err, Error::NonIntegrable(_)), "got {err}");
    println!("[criterion 10] pass: de Rham ranks (q-line D=12: 1,0; d=2 D=8: H^0=1), d^2 = 0, non-integrable fixture rejected");
}

#[test]
fn c11_symmetric_comultiplication() {
    let specs = vec![
        q_spec(2, 3, NormContext::Trivial),
        shift_spec(2, 2, NormContext::Trivial),
    ];
    for spec in &specs {
        for m in monomials_up_to(2, 4) {
            let f = Poly::monomial(m, Scalar::one());
            for n in 0..=4u32 {
                for mm in 0..=4 - n {
                    let report = symmetric_check(&f, n, mm, spec).unwrap();
                    assert!(
                        report.symmetric,
                        "asymmetric at ({n},{mm}) on {f}, witness {:?}",
                        report.witness
                    );
                }
            }
        }
    }
    println!("[criterion 11] pass: comultiplication symmetric for q and shift kinds, monomials of degree <= 4, n+m <= 4");
}

#[test]
fn c12_cli_golden() {
    let bin = env!("CARGO_BIN_EXE_twistcalc");
    let root = env!("CARGO_MANIFEST_DIR");
    let fixture = |name: &str| format!("{root}/tests/fixtures/{name}");
    let cases: Vec<(&str, Vec<String>)> = vec![
        ("check", vec!["check".into(), "--config".into(), fixture("qline.toml"), "--bound".into(), "6".into()]),
        ("apply", vec!["apply".into(), "--config".into(), fixture("qline.toml"), "--expr".into(), "d1".into(), "--f".into(), "x1^3".into()]),
        ("compose", vec!["compose".into(), "--config".into(), fixture("qline.toml"), "--expr".into(), "d1 d1".into()]),
        ("normalform", vec!["normalform".into(), "--config".into(), fixture("qline.toml"), "--expr".into(), "d1 x1".into()]),
        ("taylor", vec!["taylor".into(), "--config".into(), fixture("qline.toml"), "--f".into(), "x1^2".into(), "--n".into(), "2".into()]),
        ("pi", vec!["pi".into(), "--config".into(), fixture("qline.toml"), "--f".into(), "x1^2".into(), "--k".into(), "2".into()]),
        ("radius", vec!["radius".into(), "--config".into(), fixture("qline5.toml"), "--f".into(), "x1^4".into(), "--bound".into(), "5".into()]),
        ("etanorm_series", vec!["etanorm".into(), "--config".into(), fixture("qline5.toml"), "--f".into(), "5*x1^2".into(), "--eta".into(), "1".into()]),
        ("etanorm_operator", vec!["etanorm".into(), "--config".into(), fixture("qline5.toml"), "--expr".into(), "dp[2]".into(), "--eta".into(), "1".into()]),
        ("confluence", vec!["confluence".into(), "--config".into(), fixture("qline5.toml"), "--expr".into(), "d1".into(), "--n".into(), "4".into(), "--bound".into(), "4".into(), "--eta".into(), "1".into()]),
        ("confluence_sweep", vec!["confluence".into(), "--config".into(), fixture("qline5.toml"), "--expr".into(), "d1".into(), "--sweep".into(), "6,26,126".into(), "--eta".into(), "1".into()]),
        ("derham", vec!["derham".into(), "--config".into(), fixture("plane.toml"), "--expr".into(), "0; 0".into(), "--bound".into(), "8".into()]),
        ("symcheck", vec!["symcheck".into(), "--config".into(), fixture("plane.toml"), "--f".into(), "x1*x2^2".into(), "--n".into(), "3".into()]),
    ];
    for (name, args) in &cases {
        let run = |label: &str| {
            let out = std::process::Command::new(bin)
                .args(args)
                .arg("--json")
                .output()
                .unwrap_or_else(|e| panic!("{name} ({label}): cannot run binary: {e}"));
            assert!(
                out.status.success(),
                "{name} ({label}) exited with {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        };
        let first = run("first");
        let second = run("second");
        assert_eq!(first, second, "{name}: JSON differs between runs");
        let golden_path = format!("{root}/tests/golden/{name}.json");
        let golden = std::fs::read(&golden_path)
            .unwrap_or_else(|e| panic!("{name}: cannot read {golden_path}: {e}"));
        assert_eq!(
            String::from_utf8_lossy(&first),
            String::from_utf8_lossy(&golden),
            "{name}: output differs from the golden file"
        );
    }
    println!("[criterion 12] pass: {} golden CLI cases, byte-identical JSON across two runs", cases.len());
}
