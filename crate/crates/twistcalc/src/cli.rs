//! Batch command-line front end.
//!
//! Every command reads an algebra config, runs one computation, and emits
//! either a human-readable table (default) or canonical JSON (`--json`).
//! JSON is deterministic: object keys are sorted, term lists follow the
//! graded-lex order of the underlying maps, rationals print as "num/den".
//!
//! Exit codes: 0 success; 1 usage error (bad flags, malformed expressions
//! or configs); 2 domain error (invalid twist parameters, non-integrable
//! connections, reconstruction failures).

use crate::analysis::{
    eta_norm, jet_convergence_table, operator_eta_norm, radius_estimate, rho_sigma,
    table_is_nondecreasing, EtaRadius,
};
use crate::coefficients::{scalar_from_str, Scalar};
use crate::config::AlgebraConfig;
use crate::confluence::{confluence_pair, confluence_sweep, isometry_witness};
use crate::connection::{de_rham_dims, ConnectionModule};
use crate::error::{Error, Result};
use crate::jets::{evaluate_pi, symmetric_check, taylor};
use crate::operators::{normal_form, TwistedOperator};
use crate::parse::{expr_to_operator, expr_to_words, parse_expr, parse_poly, Expr};
use crate::poly::Poly;
use crate::twist::{check_coordinates, contractivity_check, TwistKind, TwistSpec};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "twistcalc",
    version,
    about = "Exact twisted differential calculus: q-difference, shift, and Mahler operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Args)]
struct Common {
    /// Algebra config file (TOML; `.json` files are parsed as JSON)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Emit canonical JSON instead of the human-readable form
    #[arg(long)]
    json: bool,
    /// Write output to a file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coordinate diagnostics: kind/strong flags, Leibniz verification,
    /// contractivity, and the twist radius valuation
    Check {
        #[command(flatten)]
        common: Common,
        /// Degree bound (default: config truncation)
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Apply an operator expression to a polynomial
    Apply {
        #[command(flatten)]
        common: Common,
        /// Operator expression, e.g. "d1 x1" or "dp[2,0] + x1*d2"
        #[arg(long)]
        expr: String,
        /// Polynomial argument
        #[arg(long)]
        f: String,
    },
    /// Evaluate an operator expression to canonical divided-power form
    Compose {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        expr: String,
    },
    /// Normal form of an operator word (coefficients to the left of
    /// divided powers), cross-checked against direct evaluation
    Normalform {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        expr: String,
    },
    /// Twisted Taylor expansion of a polynomial
    Taylor {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        /// Expansion order (default: config order)
        #[arg(long)]
        n: Option<u32>,
    },
    /// Evaluation map pi_k: substitute xi_i -> sigma_i^{k_i}(x_i) - x_i in
    /// the Taylor expansion, recovering sigma^k(f)
    Pi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        /// Multi-index, comma-separated, one entry per variable
        #[arg(long)]
        k: String,
    },
    /// Per-degree valuation extremes of the divided derivatives, with the
    /// radius lower bound the data supports
    Radius {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        /// Degree bound (default: config truncation)
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Eta-norm valuation of a Taylor jet (--f) or an operator (--expr)
    Etanorm {
        #[command(flatten)]
        common: Common,
        /// Polynomial: eta-norm of its order-n Taylor jet, with a
        /// convergence table
        #[arg(long)]
        f: Option<String>,
        /// Operator expression: its operator eta-norm
        #[arg(long)]
        expr: Option<String>,
        /// Log radius: eta = p^(-ell), as an exact rational >= 0
        #[arg(long, default_value = "0")]
        eta: String,
        /// Jet order for --f (default: config order)
        #[arg(long)]
        n: Option<u32>,
    },
    /// Transport an operator to the classical side; with --sweep, tabulate
    /// a q-family
    Confluence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        expr: String,
        /// Transport order N (default: config order)
        #[arg(long)]
        n: Option<u32>,
        /// Audit depth D beyond N (default: config truncation)
        #[arg(long)]
        bound: Option<u32>,
        /// Log radius for norm columns and the isometry report
        #[arg(long)]
        eta: Option<String>,
        /// Comma-separated q values; replaces the q of every q-twist
        /// variable and tabulates the classical images
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Truncated de Rham dimensions of a twisted connection. The
    /// expression lists one matrix per variable, ';'-separated: either a
    /// bare polynomial (rank 1) or rows like "[[0, x1], [1, 0]]"
    Derham {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        expr: String,
        /// Domain truncation (default: config truncation)
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Symmetry of the comultiplication on all splittings n + m <= bound
    Symcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: String,
        /// Total order bound (default: config order)
        #[arg(long)]
        n: Option<u32>,
    },
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) | Error::Config(_) => 1,
                _ => 2,
            }
        }
    }
}

struct Rendered {
    json: serde_json::Value,
    human: String,
}

fn emit(r: Rendered, common: &Common) -> Result<()> {
    let mut text = if common.json {
        serde_json::to_string(&r.json).expect("serialization of built values cannot fail")
    } else {
        r.human
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(common: &Common) -> Result<(AlgebraConfig, TwistSpec)> {
    let cfg = AlgebraConfig::from_path(&common.config)?;
    let spec = cfg.to_spec()?;
    Ok((cfg, spec))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Check { common, bound } => {
            let (cfg, spec) = load(&common)?;
            let r = cmd_check(&spec, bound.unwrap_or(cfg.truncation))?;
            emit(r, &common)
        }
        Cmd::Apply { common, expr, f } => {
            let (_, spec) = load(&common)?;
            let r = cmd_apply(&spec, &expr, &f)?;
            emit(r, &common)
        }
        Cmd::Compose { common, expr } => {
            let (_, spec) = load(&common)?;
            let op = expr_to_operator(&parse_expr(&expr)?, &spec)?;
            emit(Rendered { json: op.to_json(), human: op.to_string() }, &common)
        }
        Cmd::Normalform { common, expr } => {
            let (_, spec) = load(&common)?;
            let r = cmd_normalform(&spec, &expr)?;
            emit(r, &common)
        }
        Cmd::Taylor { common, f, n } => {
            let (cfg, spec) = load(&common)?;
            let r = cmd_taylor(&spec, &f, n.unwrap_or(cfg.order))?;
            emit(r, &common)
        }
        Cmd::Pi { common, f, k } => {
            let (_, spec) = load(&common)?;
            let r = cmd_pi(&spec, &f, &k)?;
            emit(r, &common)
        }
        Cmd::Radius { common, f, bound } => {
            let (cfg, spec) = load(&common)?;
            let r = cmd_radius(&spec, &f, bound.unwrap_or(cfg.truncation))?;
            emit(r, &common)
        }
        Cmd::Etanorm { common, f, expr, eta, n } => {
            let (cfg, spec) = load(&common)?;
            let r = cmd_etanorm(&spec, f.as_deref(), expr.as_deref(), &eta, n.unwrap_or(cfg.order))?;
            emit(r, &common)
        }
        Cmd::Confluence { common, expr, n, bound, eta, sweep } => {
            let (cfg, spec) = load(&common)?;
            let r = cmd_confluence(
                &cfg,
                &spec,
                &expr,
                n.unwrap_or(cfg.order),
                bound.unwrap_or(cfg.truncation),
                eta.as_deref(),
                sweep.as_deref(),
            )?;
            emit(r, &common)
        }
        Cmd::Derham { common, expr, bound } => {
            let (cfg, spec) = load(&common)?;
            let r = cmd_derham(&spec, &expr, bound.unwrap_or(cfg.truncation))?;
            emit(r, &common)
        }
        Cmd::Symcheck { common, f, n } => {
            let (cfg, spec) = load(&common)?;
            let r = cmd_symcheck(&spec, &f, n.unwrap_or(cfg.order))?;
            emit(r, &common)
        }
    }
}

fn parse_eta(text: &str) -> Result<EtaRadius> {
    EtaRadius::new(scalar_from_str(text)?)
}

fn parse_csv_u32(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("invalid index `{}` in CSV", t.trim())))
        })
        .collect()
}

fn parse_csv_scalars(text: &str) -> Result<Vec<Scalar>> {
    text.split(',').map(|t| scalar_from_str(t.trim())).collect()
}

fn cmd_check(spec: &TwistSpec, bound: u32) -> Result<Rendered> {
    let coords = check_coordinates(spec, bound)?;
    let contr = contractivity_check(spec, spec.norm(), bound);
    let rho = rho_sigma(spec, spec.norm());
    let vars: Vec<_> = coords
        .vars
        .iter()
        .map(|v| {
            json!({
                "classical_checked_to_degree": v.classical_checked_to_degree,
                "kind": v.kind,
                "kind_witness": v.kind_witness,
                "strong": v.strong,
                "strong_witness": v.strong_witness,
            })
        })
        .collect();
    let contr_witness = contr
        .witness
        .as_ref()
        .map(|(i, m)| json!({"monomial": m.0, "var": i + 1}));
    let json = json!({
        "bound": coords.bound,
        "contractive": contr.contractive,
        "contractivity_witness": contr_witness,
        "rho_valuation": rho.to_string(),
        "vars": vars,
    });
    let mut human = format!(
        "bound: {}\nrho valuation: {}\ncontractive: {}\n",
        coords.bound, rho, contr.contractive
    );
    for (i, v) in coords.vars.iter().enumerate() {
        let _ = writeln!(
            human,
            "x{}: kind={} strong={} leibniz_checked_to={}",
            i + 1,
            v.kind,
            v.strong,
            v.classical_checked_to_degree
        );
    }
    Ok(Rendered { json, human })
}

fn cmd_apply(spec: &TwistSpec, expr: &str, f: &str) -> Result<Rendered> {
    let op = expr_to_operator(&parse_expr(expr)?, spec)?;
    let arg = parse_poly(f, spec.arity())?;
    let result = op.apply(&arg)?;
    Ok(Rendered {
        json: json!({"result": result.to_string()}),
        human: result.to_string(),
    })
}

fn cmd_normalform(spec: &TwistSpec, expr: &str) -> Result<Rendered> {
    let e = parse_expr(expr)?;
    let op = normalize_expr(&e, spec)?;
    Ok(Rendered { json: op.to_json(), human: op.to_string() })
}

/// Word route when the expression is free of dp[...] atoms, with a
/// cross-check against direct operator evaluation; operator route
/// otherwise.
fn normalize_expr(e: &Expr, spec: &TwistSpec) -> Result<TwistedOperator> {
    if e.has_divided_power() {
        return expr_to_operator(e, spec);
    }
    let words = expr_to_words(e, spec.arity())?;
    let mut acc = TwistedOperator::zero(spec.clone());
    for w in &words {
        acc = acc.add(&normal_form(w, spec)?)?;
    }
    let direct = expr_to_operator(e, spec)?;
    if acc != direct {
        return Err(Error::Reconstruction(
            "word-route normal form disagrees with operator evaluation".into(),
        ));
    }
    Ok(acc)
}

fn cmd_taylor(spec: &TwistSpec, f: &str, n: u32) -> Result<Rendered> {
    let f = parse_poly(f, spec.arity())?;
    let jet = taylor(&f, n, spec)?;
    let mut human = String::new();
    for (k, c) in jet.terms() {
        let _ = writeln!(human, "{:?}: {c}", k.0);
    }
    if human.is_empty() {
        human.push('0');
    }
    Ok(Rendered { json: jet.to_json(), human })
}

fn cmd_pi(spec: &TwistSpec, f: &str, k: &str) -> Result<Rendered> {
    let f = parse_poly(f, spec.arity())?;
    let k = parse_csv_u32(k)?;
    if k.len() != spec.arity() {
        return Err(Error::Parse(format!(
            "--k has {} entries, the configured dimension is {}",
            k.len(),
            spec.arity()
        )));
    }
    let order: u32 = k.iter().sum();
    let jet = taylor(&f, order, spec)?;
    let result = evaluate_pi(&jet, &k)?;
    Ok(Rendered {
        json: json!({"k": k, "result": result.to_string()}),
        human: result.to_string(),
    })
}

fn cmd_radius(spec: &TwistSpec, f: &str, bound: u32) -> Result<Rendered> {
    let f = parse_poly(f, spec.arity())?;
    let report = radius_estimate(&f, spec, spec.norm(), bound)?;
    let mut human = String::new();
    for row in &report.rows {
        let evidence = row
            .evidence
            .as_ref()
            .map(|e| e.to_string())
            .unwrap_or_else(|| "-inf".into());
        let _ = writeln!(
            human,
            "deg {}: min valuation {}  evidence {evidence}",
            row.degree, row.min_valuation
        );
    }
    let _ = write!(human, "lower bound log radius: {}", report.lower_bound_ell);
    Ok(Rendered { json: report.to_json(), human })
}

fn cmd_etanorm(
    spec: &TwistSpec,
    f: Option<&str>,
    expr: Option<&str>,
    eta: &str,
    n: u32,
) -> Result<Rendered> {
    let eta = parse_eta(eta)?;
    match (f, expr) {
        (Some(f), None) => {
            let f = parse_poly(f, spec.arity())?;
            let jet = taylor(&f, n, spec)?;
            let valuation = eta_norm(&jet, &eta, spec.norm())?;
            let table = jet_convergence_table(&jet, &eta, spec.norm());
            let (convergent, witness) = table_is_nondecreasing(&table);
            let json = json!({
                "convergent": convergent,
                "ell": eta.ell().to_string(),
                "kind": "series",
                "valuation": valuation.to_string(),
                "witness": witness,
            });
            let human = format!("valuation: {valuation}\nconvergent: {convergent}");
            Ok(Rendered { json, human })
        }
        (None, Some(expr)) => {
            let op = expr_to_operator(&parse_expr(expr)?, spec)?;
            let valuation = operator_eta_norm(&op, &eta, spec.norm());
            let json = json!({
                "ell": eta.ell().to_string(),
                "kind": "operator",
                "valuation": valuation.to_string(),
            });
            Ok(Rendered { json, human: format!("valuation: {valuation}") })
        }
        _ => Err(Error::Parse(
            "etanorm takes exactly one of --f (series) or --expr (operator)".into(),
        )),
    }
}

fn cmd_confluence(
    cfg: &AlgebraConfig,
    spec: &TwistSpec,
    expr: &str,
    n: u32,
    d_bound: u32,
    eta: Option<&str>,
    sweep: Option<&str>,
) -> Result<Rendered> {
    let e = parse_expr(expr)?;
    if let Some(sweep) = sweep {
        let qs = parse_csv_scalars(sweep)?;
        if !cfg.twists.iter().any(|k| matches!(k, TwistKind::QTwist { .. })) {
            return Err(Error::Domain(
                "--sweep requires at least one q-twist variable in the config".into(),
            ));
        }
        let eta = parse_eta(eta.unwrap_or("0"))?;
        let rows = confluence_sweep(
            |q| {
                let kinds: Vec<TwistKind> = cfg
                    .twists
                    .iter()
                    .map(|k| match k {
                        TwistKind::QTwist { .. } => TwistKind::QTwist { q: q.clone() },
                        other => other.clone(),
                    })
                    .collect();
                let s = TwistSpec::new(kinds, cfg.norm.clone())?;
                expr_to_operator(&e, &s)
            },
            &qs,
            n,
            &eta,
            spec.norm(),
        )?;
        let mut human = String::new();
        for row in &rows {
            let _ = writeln!(
                human,
                "q={}  eta valuation {}  classical {}",
                row.q, row.eta_valuation, row.classical
            );
        }
        let json = json!({"rows": rows.iter().map(|r| r.to_json()).collect::<Vec<_>>()});
        Ok(Rendered { json, human })
    } else {
        let op = expr_to_operator(&e, spec)?;
        let pair = confluence_pair(&op, n, d_bound)?;
        let iso = eta
            .map(|l| isometry_witness(&pair, &parse_eta(l)?, spec.norm()))
            .transpose()?;
        let mut json = pair.to_json();
        json["isometry"] = iso
            .as_ref()
            .map(|r| r.to_json())
            .unwrap_or(serde_json::Value::Null);
        let mut human = format!(
            "N: {}\nD: {}\nactions agree to degree: {}\nclassical: {}",
            pair.truncation, pair.degree_bound, pair.exact_to, pair.target
        );
        if let Some(r) = iso {
            let _ = write!(
                human,
                "\nisometry: source {} target {} agree {}",
                r.source_valuation, r.target_valuation, r.agree
            );
        }
        Ok(Rendered { json, human })
    }
}

fn cmd_derham(spec: &TwistSpec, expr: &str, bound: u32) -> Result<Rendered> {
    let module = parse_connection(expr, spec)?;
    let report = de_rham_dims(&module, bound)?;
    let cohomology = report.cohomology_ranks();
    let levels: Vec<_> = report
        .levels
        .iter()
        .map(|l| json!({"dim": l.dim, "image_rank": l.image_rank, "kernel_rank": l.kernel_rank}))
        .collect();
    let json = json!({
        "bounds": report.bounds,
        "cohomology": cohomology,
        "d_squared_zero": report.d_squared_zero,
        "levels": levels,
        "truncation": report.truncation,
    });
    let mut human = format!("truncation: {}\n", report.truncation);
    for (i, h) in cohomology.iter().enumerate() {
        let _ = writeln!(human, "H^{i} = {h}");
    }
    let _ = write!(human, "d^2 = 0: {}", report.d_squared_zero);
    Ok(Rendered { json, human })
}

fn cmd_symcheck(spec: &TwistSpec, f: &str, total: u32) -> Result<Rendered> {
    let f = parse_poly(f, spec.arity())?;
    let mut witnesses = Vec::new();
    for n in 0..=total {
        for m in 0..=total - n {
            let report = symmetric_check(&f, n, m, spec)?;
            if let Some((k, kp)) = report.witness {
                witnesses.push(json!({"k": k.0, "kp": kp.0, "m": m, "n": n}));
            }
        }
    }
    let symmetric = witnesses.is_empty();
    let json = json!({"bound": total, "symmetric": symmetric, "witnesses": witnesses});
    let human = format!("symmetric for all n + m <= {total}: {symmetric}");
    Ok(Rendered { json, human })
}

/// Connection syntax: one matrix per variable, ';'-separated. A bare
/// polynomial is a 1x1 matrix; otherwise "[[p, q], [r, s]]" rows.
fn parse_connection(expr: &str, spec: &TwistSpec) -> Result<ConnectionModule> {
    let pieces = split_top_level(expr, ';');
    if pieces.len() != spec.arity() {
        return Err(Error::Parse(format!(
            "connection lists {} matrices, the configured dimension is {}",
            pieces.len(),
            spec.arity()
        )));
    }
    let d = spec.arity();
    let mut matrices = Vec::with_capacity(d);
    for piece in &pieces {
        let piece = piece.trim();
        let matrix = if piece.starts_with('[') {
            parse_matrix(piece, d)?
        } else {
            vec![vec![parse_poly(piece, d)?]]
        };
        matrices.push(matrix);
    }
    let rank = matrices[0].len();
    ConnectionModule::new(rank, matrices, spec.clone())
}

fn strip_brackets(s: &str) -> Result<&str> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        Ok(inner)
    } else {
        Err(Error::Parse(format!("expected [...] around `{s}`")))
    }
}

fn parse_matrix(s: &str, d: usize) -> Result<Vec<Vec<Poly>>> {
    let inner = strip_brackets(s)?;
    let mut rows = Vec::new();
    for row in split_top_level(inner, ',') {
        let entries = split_top_level(strip_brackets(&row)?, ',');
        let row: Result<Vec<Poly>> = entries.iter().map(|e| parse_poly(e, d)).collect();
        rows.push(row?);
    }
    Ok(rows)
}

/// Split on a separator at bracket/paren depth zero.
fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in s.chars() {
        match c {
            '[' | '(' => {
                depth += 1;
                current.push(c);
            }
            ']' | ')' => {
                depth -= 1;
                current.push(c);
            }
            c if c == sep && depth == 0 => {
                out.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    out.push(current);
    out
}
