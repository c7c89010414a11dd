//! `mvrel`: command-line front end for the linear-relation calculus.
//!
//! Loads subspaces, relations, matrices and least-squares problems from JSON
//! files, runs any operation of the library, and drives the seeded
//! theorem-verification battery. Exit codes: 0 on success, 1 on assertion or
//! verification failure, 2 on usage, parse or dimension errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use mvrel_core::io::{
    AffineSetJson, MatrixJson, RelationJson, SubspaceJson, VectorJson, WlssAnswerJson,
    WlssProblemJson,
};
use mvrel_core::verify::{self, format_residual, VerifyConfig};
use mvrel_core::{decomposition, projection, semiclosed, wlss};
use mvrel_core::{Error, LinearRelation, Scalar, ScalarKind, Subspace};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalarArg {
    Real,
    Complex,
}

impl ScalarArg {
    fn kind(self) -> ScalarKind {
        match self {
            ScalarArg::Real => ScalarKind::Real,
            ScalarArg::Complex => ScalarKind::Complex,
        }
    }
}

#[derive(Parser)]
#[command(name = "mvrel", version, about = "Calculus of linear relations and multivalued projections")]
struct Cli {
    /// Relative rank tolerance for every construction.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Scalar field of the input files.
    #[arg(long, global = true, value_enum, default_value_t = ScalarArg::Real)]
    scalar: ScalarArg,
    /// Master seed of the verification battery.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Trials per verification suite.
    #[arg(long, global = true, default_value_t = 200)]
    trials: usize,
    /// Largest ambient dimension drawn by the battery.
    #[arg(long = "max-dim", global = true, default_value_t = 8)]
    max_dim: usize,
    /// Restrict the battery to named suites (repeatable).
    #[arg(long = "suite", global = true)]
    suites: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Operations on linear relations.
    Relation {
        #[command(subcommand)]
        op: RelationOp,
    },
    /// Multivalued projections P_{M,N}.
    Mvproj {
        #[command(subcommand)]
        op: MvprojOp,
    },
    /// Operator-range structure through Γ = (AA* + BB*)^{1/2}.
    Semiclosed {
        #[command(subcommand)]
        op: SemiclosedOp,
    },
    /// Weighted least squares with singular psd weights.
    Wlss {
        #[command(subcommand)]
        op: WlssOp,
    },
    /// Run the seeded theorem-verification battery.
    Verify {
        /// Replay the failure dumps of a previous report instead of running.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RelationOp {
    /// Product R·T of two relations (T acts first).
    Compose { r: PathBuf, t: PathBuf },
    /// Block swap T⁻¹.
    Inverse { t: PathBuf },
    /// Adjoint T*.
    Adjoint { t: PathBuf },
    /// Domain, range, kernel and multivalued part.
    Parts { t: PathBuf },
    /// Apply T to a vector, producing an affine set.
    Apply { t: PathBuf, x: PathBuf },
    /// Moore–Penrose inverse through the relation formula.
    Pinv { a: PathBuf },
}

#[derive(Subcommand)]
enum MvprojOp {
    /// Build P_{M,N} and report its parts.
    Build { m: PathBuf, n: PathBuf },
    /// Classify a square relation with certificates.
    Classify { t: PathBuf },
    /// Greville's formula, checked against the direct construction.
    Greville { m: PathBuf, n: PathBuf },
    /// Pták's formula, checked against the direct construction.
    Ptak { m: PathBuf, n: PathBuf },
    /// Componentwise decomposition P_{M⊖(M∩N) // N} ⊕̂ ({0} × M∩N).
    Decompose { m: PathBuf, n: PathBuf },
    /// Compress P_{M,N} by an orthogonal projector F.
    Compress { f: PathBuf, m: PathBuf, n: PathBuf },
    /// Friedrichs cosine, operator norm and the continuity criterion.
    Continuity { m: PathBuf, n: PathBuf },
}

#[derive(Subcommand)]
enum SemiclosedOp {
    /// Left polar data of the row [A B]: Γ, C_A, C_B.
    Polar { a: PathBuf, b: PathBuf },
    /// Both Ando-style forms of P_{ran A, ran B}.
    Ando { a: PathBuf, b: PathBuf },
    /// Conjugate P_{M,N} by a matrix Γ with ran Γ = M + N.
    Conjugate { g: PathBuf, m: PathBuf, n: PathBuf },
    /// Quasi-affinity normal form on the frame M + N.
    Quasiaffine { a: PathBuf, b: PathBuf },
    /// Direct splitting M+N = Γ(ker C_B*) ∔ Γ(ker C_A*) ∔ M∩N.
    Split { a: PathBuf, b: PathBuf },
    /// Orthogonalized form: Γ⁻¹ P Γ = P₀ ⊕̂ ({0} × S).
    Orthogonalize { a: PathBuf, b: PathBuf },
    /// De Branges–Rovnyak complement of a contraction.
    Debranges { t: PathBuf },
}

#[derive(Subcommand)]
enum WlssOp {
    /// Solve min ‖Ax − b‖_W through A⁻¹ P_{W,ran A} b.
    Solve { problem: PathBuf },
    /// Weighted residual ‖Ax − b‖_W at a given point.
    Residual { problem: PathBuf, x: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Parse(_) | Error::DimensionMismatch(_) => ExitCode::from(2),
                Error::Precondition(_) | Error::Inconsistent(_) => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<Value, Error> {
    if let Command::Verify { replay } = &cli.command {
        return run_verify(cli, replay.as_deref());
    }
    match cli.scalar.kind() {
        ScalarKind::Real => run_typed::<f64>(cli),
        ScalarKind::Complex => run_typed::<Complex64>(cli),
    }
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_subspace<S: Scalar>(path: &Path, tol: f64) -> Result<Subspace<S>, Error> {
    load::<SubspaceJson>(path)?.to_subspace(tol)
}

fn load_relation<S: Scalar>(path: &Path, tol: f64) -> Result<LinearRelation<S>, Error> {
    load::<RelationJson>(path)?.to_relation(tol)
}

fn load_matrix<S: Scalar>(path: &Path) -> Result<nalgebra::DMatrix<S>, Error> {
    load::<MatrixJson>(path)?.to_matrix()
}

fn subspace_value<S: Scalar>(s: &Subspace<S>) -> Value {
    json!({
        "dim": s.dim(),
        "subspace": SubspaceJson::from_subspace(s),
    })
}

fn parts_value<S: Scalar>(t: &LinearRelation<S>) -> Value {
    let parts = t.parts();
    json!({
        "dom": subspace_value(&parts.dom),
        "ran": subspace_value(&parts.ran),
        "ker": subspace_value(&parts.ker),
        "mul": subspace_value(&parts.mul),
        "is_operator": parts.is_operator,
        "graph_dim": t.graph_dim(),
    })
}

fn run_typed<S: Scalar>(cli: &Cli) -> Result<Value, Error> {
    let tol = cli.tol;
    match &cli.command {
        Command::Relation { op } => match op {
            RelationOp::Compose { r, t } => {
                let outer = load_relation::<S>(r, tol)?;
                let inner = load_relation::<S>(t, tol)?;
                let product = outer.compose(&inner)?;
                Ok(json!({
                    "relation": RelationJson::from_relation(&product),
                    "parts": parts_value(&product),
                }))
            }
            RelationOp::Inverse { t } => {
                let t = load_relation::<S>(t, tol)?;
                let inv = t.inverse();
                Ok(json!({
                    "relation": RelationJson::from_relation(&inv),
                    "parts": parts_value(&inv),
                }))
            }
            RelationOp::Adjoint { t } => {
                let t = load_relation::<S>(t, tol)?;
                let star = t.adjoint();
                Ok(json!({
                    "relation": RelationJson::from_relation(&star),
                    "parts": parts_value(&star),
                }))
            }
            RelationOp::Parts { t } => {
                let t = load_relation::<S>(t, tol)?;
                Ok(parts_value(&t))
            }
            RelationOp::Apply { t, x } => {
                let t = load_relation::<S>(t, tol)?;
                let x = load::<VectorJson>(x)?.to_vector::<S>()?;
                let set = t.apply(&x)?;
                Ok(serde_json::to_value(AffineSetJson::from_set(&set))
                    .expect("affine set serializes"))
            }
            RelationOp::Pinv { a } => {
                let a = load_matrix::<S>(a)?;
                let pinv = mvrel_core::relation::relation_pinv(&a, tol)?;
                Ok(json!({ "matrix": MatrixJson::from_matrix(&pinv) }))
            }
        },
        Command::Mvproj { op } => match op {
            MvprojOp::Build { m, n } => {
                let m = load_subspace::<S>(m, tol)?;
                let n = load_subspace::<S>(n, tol)?;
                let p = projection::MvProjection::new(&m, &n)?;
                Ok(json!({
                    "relation": RelationJson::from_relation(p.relation()),
                    "parts": parts_value(p.relation()),
                }))
            }
            MvprojOp::Classify { t } => {
                let t = load_relation::<S>(t, tol)?;
                let report = projection::classify(&t)?;
                Ok(json!({
                    "class": report.class.to_string(),
                    "is_idempotent": report.is_idempotent,
                    "ran_in_dom": report.ran_in_dom,
                    "ran_in_dom_residual": format_residual(report.ran_in_dom_residual),
                    "identity_in_graph": report.identity_in_graph,
                    "identity_in_graph_residual": format_residual(report.identity_in_graph_residual),
                    "ran_in_ker": report.ran_in_ker,
                    "ran_in_ker_residual": format_residual(report.ran_in_ker_residual),
                }))
            }
            MvprojOp::Greville { m, n } => {
                let m = load_subspace::<S>(m, tol)?;
                let n = load_subspace::<S>(n, tol)?;
                let rel = projection::greville(&m, &n)?;
                let direct = projection::MvProjection::new(&m, &n)?;
                Ok(json!({
                    "relation": RelationJson::from_relation(&rel),
                    "distance_to_direct": format_residual(rel.graph_distance(direct.relation())),
                }))
            }
            MvprojOp::Ptak { m, n } => {
                let m = load_subspace::<S>(m, tol)?;
                let n = load_subspace::<S>(n, tol)?;
                let out = projection::ptak(&m, &n)?;
                let direct = projection::MvProjection::new(&m, &n)?;
                Ok(json!({
                    "relation": RelationJson::from_relation(&out.relation),
                    "distance_to_direct": format_residual(out.relation.graph_distance(direct.relation())),
                    "kernel_of_residual": subspace_value(&out.kernel_of_residual),
                }))
            }
            MvprojOp::Decompose { m, n } => {
                let m = load_subspace::<S>(m, tol)?;
                let n = load_subspace::<S>(n, tol)?;
                let dec = decomposition::decompose_mv(&m, &n)?;
                Ok(json!({
                    "inputs": { "m": subspace_value(&m), "n": subspace_value(&n) },
                    "operator_term": RelationJson::from_relation(&dec.operator_term),
                    "residual_term": RelationJson::from_relation(&dec.residual_term),
                    "kind": "componentwise",
                }))
            }
            MvprojOp::Compress { f, m, n } => {
                let f = load_matrix::<S>(f)?;
                let m = load_subspace::<S>(m, tol)?;
                let n = load_subspace::<S>(n, tol)?;
                let report = decomposition::compress(&f, &m, &n)?;
                Ok(json!({
                    "inputs": {
                        "f": MatrixJson::from_matrix(&f),
                        "m": subspace_value(&m),
                        "n": subspace_value(&n),
                    },
                    "overlap_in_kernel": report.overlap_in_kernel,
                    "domain_splits": report.domain_splits,
                    "image_contained": report.image_contained,
                    "is_projection": report.is_projection,
                    "witness_is_operator": report.witness_is_operator,
                    "witness_is_idempotent": report.witness_is_idempotent,
                    "relation": report.relation.as_ref().map(RelationJson::from_relation),
                }))
            }
            MvprojOp::Continuity { m, n } => {
                let m = load_subspace::<S>(m, tol)?;
                let n = load_subspace::<S>(n, tol)?;
                let report = decomposition::continuity_report(&m, &n)?;
                Ok(json!({
                    "inputs": { "m": subspace_value(&m), "n": subspace_value(&n) },
                    "cosine": format_residual(report.cosine),
                    "op_norm": format_residual(report.op_norm),
                    "criterion_ok": report.criterion_ok,
                }))
            }
        },
        Command::Semiclosed { op } => match op {
            SemiclosedOp::Polar { a, b } => {
                let pair = load_pair::<S>(a, b, tol)?;
                Ok(json!({
                    "gamma": MatrixJson::from_matrix(pair.gamma()),
                    "c_a": MatrixJson::from_matrix(pair.c_a()),
                    "c_b": MatrixJson::from_matrix(pair.c_b()),
                    "m": subspace_value(pair.range_m()),
                    "n": subspace_value(pair.range_n()),
                }))
            }
            SemiclosedOp::Ando { a, b } => {
                let pair = load_pair::<S>(a, b, tol)?;
                let forms = semiclosed::ando_projection(&pair)?;
                let direct = pair.direct_projection()?;
                Ok(json!({
                    "via_gamma": RelationJson::from_relation(&forms.via_gamma),
                    "via_adjoint": RelationJson::from_relation(&forms.via_adjoint),
                    "operator_part": RelationJson::from_relation(&forms.operator_part),
                    "distance_to_direct": format_residual(
                        forms.via_gamma.graph_distance(direct.relation())
                    ),
                }))
            }
            SemiclosedOp::Conjugate { g, m, n } => {
                let gamma = load_matrix::<S>(g)?;
                let m = load_subspace::<S>(m, tol)?;
                let n = load_subspace::<S>(n, tol)?;
                let gamma_rel = LinearRelation::graph_of(&gamma, tol);
                let out = semiclosed::conjugate(&gamma_rel, &m, &n)?;
                Ok(json!({
                    "relation": RelationJson::from_relation(&out.relation),
                    "preimage_m": subspace_value(&out.preimage_m),
                    "preimage_n": subspace_value(&out.preimage_n),
                }))
            }
            SemiclosedOp::Quasiaffine { a, b } => {
                let pair = load_pair::<S>(a, b, tol)?;
                let form = semiclosed::quasi_affine_form(&pair)?;
                Ok(json!({
                    "frame": subspace_value(&form.frame),
                    "x_frame": MatrixJson::from_matrix(&form.x_frame),
                    "c_frame": MatrixJson::from_matrix(&form.c_frame),
                    "overlap_s": subspace_value(&form.overlap_s),
                }))
            }
            SemiclosedOp::Split { a, b } => {
                let pair = load_pair::<S>(a, b, tol)?;
                let split = semiclosed::gamma_splitting(&pair)?;
                Ok(json!({
                    "in_m": subspace_value(&split.in_m),
                    "in_n": subspace_value(&split.in_n),
                    "overlap": subspace_value(&split.overlap),
                    "projection_part": RelationJson::from_relation(&split.projection_part),
                }))
            }
            SemiclosedOp::Orthogonalize { a, b } => {
                let pair = load_pair::<S>(a, b, tol)?;
                let out = semiclosed::orthogonalize(&pair)?;
                Ok(json!({
                    "p0": MatrixJson::from_matrix(&out.p0),
                    "s": subspace_value(&out.s),
                    "conjugated": RelationJson::from_relation(&out.conjugated),
                }))
            }
            SemiclosedOp::Debranges { t } => {
                let t = load_matrix::<S>(t)?;
                let out = semiclosed::debranges(&t, tol)?;
                Ok(json!({
                    "s": subspace_value(&out.space),
                    "s_prime": subspace_value(&out.complement_space),
                    "overlap": subspace_value(&out.overlap),
                    "relation": RelationJson::from_relation(&out.relation),
                    "op_norm": format_residual(out.op_norm),
                    "norm_bound_ok": out.norm_bound_ok,
                }))
            }
        },
        Command::Wlss { op } => match op {
            WlssOp::Solve { problem } => {
                let (w, a, b) = load::<WlssProblemJson>(problem)?.decode::<S>()?;
                let set = wlss::solve(&w, &a, &b, tol)?;
                let (residual, normal_eq_residual) = match set.point() {
                    Some(point) => {
                        let res = wlss::residual(&w, &a, point, &b, tol)?;
                        let gram = a.adjoint() * &w * &a;
                        let rhs = a.adjoint() * (&w * &b);
                        let neq = (gram * point - rhs).norm();
                        (res, neq)
                    }
                    None => (f64::NAN, f64::NAN),
                };
                Ok(serde_json::to_value(WlssAnswerJson::new(&set, residual, normal_eq_residual))
                    .expect("answer serializes"))
            }
            WlssOp::Residual { problem, x } => {
                let (w, a, b) = load::<WlssProblemJson>(problem)?.decode::<S>()?;
                let x = load::<VectorJson>(x)?.to_vector::<S>()?;
                let value = wlss::residual(&w, &a, &x, &b, tol)?;
                Ok(json!({ "residual": format_residual(value) }))
            }
        },
        Command::Verify { .. } => unreachable!("handled before scalar dispatch"),
    }
}

fn load_pair<S: Scalar>(
    a: &Path,
    b: &Path,
    tol: f64,
) -> Result<semiclosed::RangePair<S>, Error> {
    let a = load_matrix::<S>(a)?;
    let b = load_matrix::<S>(b)?;
    semiclosed::RangePair::new(a, b, tol)
}

fn run_verify(cli: &Cli, replay: Option<&Path>) -> Result<Value, Error> {
    let config = VerifyConfig {
        seed: cli.seed,
        trials: cli.trials,
        max_dim: cli.max_dim,
        tol: cli.tol,
        scalar: cli.scalar.kind(),
        suites: cli.suites.clone(),
    };
    if let Some(path) = replay {
        return run_replay(&config, path);
    }
    let report = verify::run(&config)?;
    let value = report.to_json();
    if !report.passed() {
        let failed: Vec<&str> = report
            .suites
            .iter()
            .filter(|s| !s.passed())
            .map(|s| s.suite.as_str())
            .collect();
        println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
        return Err(Error::Inconsistent(format!("failed suites: {}", failed.join(", "))));
    }
    Ok(value)
}

fn run_replay(config: &VerifyConfig, path: &Path) -> Result<Value, Error> {
    let report: Value = load(path)?;
    let suites = report["suites"]
        .as_array()
        .ok_or_else(|| Error::Parse("replay file has no 'suites' array".into()))?;
    let mut results = Vec::new();
    let mut mismatches = 0usize;
    for suite in suites {
        let tag = suite["suite"].as_str().unwrap_or_default().to_string();
        for dump in suite["failure_dumps"].as_array().into_iter().flatten() {
            let outcome =
                verify::replay(&tag, config.scalar, config.tol, &dump["instance"])?;
            let recorded = dump["residual"].as_str().unwrap_or_default();
            let reproduced = format_residual(outcome.residual);
            let matches = !outcome.pass && recorded == reproduced;
            if !matches {
                mismatches += 1;
            }
            results.push(json!({
                "suite": tag,
                "trial": dump["trial"],
                "reproduced_failure": !outcome.pass,
                "recorded_residual": recorded,
                "replayed_residual": reproduced,
                "matches": matches,
            }));
        }
    }
    if mismatches > 0 {
        return Err(Error::Inconsistent(format!(
            "{mismatches} failure dumps did not reproduce"
        )));
    }
    Ok(json!({ "replayed": results.len(), "results": results }))
}
