//! Batch command-line surface for the calibra engine: canonical forms,
//! two-form decompositions, subspace and connection classification, comass
//! searches, Yang-Mills checks, Chern pairings, torus Fourier transforms and
//! the full acceptance selftest.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 malformed input,
//! 3 dimension/grade mismatch.

use calibra_core::algebra::AlgebraLevel;
use calibra_core::calibrate::{chern_pairing, classify_ym_calibrated, comass_estimate, ym_quadratic};
use calibra_core::exterior::Multivector;
use calibra_core::forms::CanonicalFormSet;
use calibra_core::groups::{
    classify_connection, decompose_two_forms, decompose_two_forms_im_octonion, CurvatureTensor,
    TwoFormDecomposition,
};
use calibra_core::selftest::{run_selftest, SelftestConfig};
use calibra_core::subspace::{
    classify_special_lagrangian, find_lagrangian_witness, is_a_subspace, lambda_determinant,
    LambdaKind, Subspace,
};
use calibra_core::torus::{
    cohomology_fourier_form, fiberwise_fourier, fiberwise_fourier_inverse, FlatTorus, MixedForm,
};
use calibra_core::CalibraError;
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Deserialize;
use std::io::Read;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "calibra", version, about = "Flat-space geometry over the normed division algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgebraArg {
    /// real numbers
    R,
    /// complex numbers
    C,
    /// quaternions
    H,
    /// octonions on R^8
    O,
    /// octonions restricted to the imaginary part, R^7
    O7,
}

impl AlgebraArg {
    fn level(self) -> AlgebraLevel {
        match self {
            AlgebraArg::R => AlgebraLevel::REAL,
            AlgebraArg::C => AlgebraLevel::COMPLEX,
            AlgebraArg::H => AlgebraLevel::QUATERNION,
            AlgebraArg::O | AlgebraArg::O7 => AlgebraLevel::OCTONION,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical parallel forms of a flat model space.
    Forms {
        #[arg(long, value_enum)]
        algebra: AlgebraArg,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Emit a single named form as JSON.
        #[arg(long)]
        name: Option<String>,
    },
    /// Print the irreducible two-form decomposition (dimensions and
    /// eigenvalues).
    Decompose {
        #[arg(long, value_enum)]
        algebra: AlgebraArg,
        #[arg(long, default_value_t = 1)]
        rank: usize,
    },
    /// Classify an oriented subspace (JSON frame) against its ambient model.
    ClassifySubspace {
        /// Path to a subspace JSON file, or '-' for stdin.
        #[arg(long)]
        input: String,
        #[arg(long, value_enum)]
        algebra: AlgebraArg,
    },
    /// Classify a curvature tensor against the two-form decomposition.
    ClassifyConnection {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum)]
        algebra: AlgebraArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Multi-start comass estimate of a pure-grade form.
    Comass {
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Spectrum and calibration bounds of the Yang-Mills quadratic form.
    YmCheck {
        /// The (m−4)-form Φ.
        #[arg(long)]
        input: String,
        /// Optional curvature tensor to test for the calibration equality.
        #[arg(long)]
        curvature: Option<String>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        orientation: f64,
    },
    /// Chern-character pairing of a constant curvature against a form.
    Chern {
        #[arg(long)]
        curvature: String,
        #[arg(long)]
        phi: String,
        /// Lattice JSON {"lattice": [[generator], ...]}; defaults to the
        /// square torus.
        #[arg(long)]
        lattice: Option<String>,
    },
    /// Fiberwise or cohomology-level Fourier transform of a mixed form.
    Fourier {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value_t = KernelArg::Syz)]
        kernel: KernelArg,
        /// Apply the reverse-orientation transform (dual side back).
        #[arg(long)]
        inverse: bool,
    },
    /// Run the acceptance criteria and print one line per criterion.
    Selftest {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Comma-separated name fragments selecting criteria to run.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Syz,
    Cohomology,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<CalibraError> for Failure {
    fn from(e: CalibraError) -> Self {
        let code = match e {
            CalibraError::DimensionMismatch(_)
            | CalibraError::GradeMismatch(_)
            | CalibraError::NotMiddleDimensional
            | CalibraError::LevelMismatch
            | CalibraError::RequiresLevel { .. }
            | CalibraError::UnsupportedLevel(_) => 3,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::new(2, format!("cannot read stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::new(2, format!("cannot read {path}: {e}")))
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| {
        // dimension-flavoured deserialization problems map to exit 3
        let msg = e.to_string();
        let code = if msg.contains("dimension") || msg.contains("grade") {
            3
        } else {
            2
        };
        Failure::new(code, format!("malformed {what}: {msg}"))
    })
}

fn main() {
    calibra_core::par::configure_threads_from_env();
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, code)) => {
            let out = text;
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, out + "\n") {
                        eprintln!("error: cannot write output: {e}");
                        std::process::exit(2);
                    }
                }
                None => println!("{out}"),
            }
            std::process::exit(code);
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn run(cli: &Cli) -> Result<(String, i32), Failure> {
    match &cli.command {
        Command::Forms {
            algebra,
            rank,
            name,
        } => cmd_forms(cli, *algebra, *rank, name.as_deref()),
        Command::Decompose { algebra, rank } => cmd_decompose(cli, *algebra, *rank),
        Command::ClassifySubspace { input, algebra } => {
            cmd_classify_subspace(cli, input, *algebra)
        }
        Command::ClassifyConnection {
            input,
            algebra,
            tol,
        } => cmd_classify_connection(cli, input, *algebra, *tol),
        Command::Comass {
            input,
            restarts,
            seed,
        } => cmd_comass(cli, input, *restarts, *seed),
        Command::YmCheck {
            input,
            curvature,
            orientation,
        } => cmd_ym_check(cli, input, curvature.as_deref(), *orientation),
        Command::Chern {
            curvature,
            phi,
            lattice,
        } => cmd_chern(cli, curvature, phi, lattice.as_deref()),
        Command::Fourier {
            input,
            kernel,
            inverse,
        } => cmd_fourier(cli, input, *kernel, *inverse),
        Command::Selftest {
            seed,
            restarts,
            only,
        } => cmd_selftest(cli, *seed, *restarts, only.as_deref()),
    }
}

fn build_form_set(algebra: AlgebraArg, rank: usize) -> Result<CanonicalFormSet, Failure> {
    Ok(CanonicalFormSet::build(algebra.level(), rank)?)
}

fn cmd_forms(
    cli: &Cli,
    algebra: AlgebraArg,
    rank: usize,
    name: Option<&str>,
) -> Result<(String, i32), Failure> {
    let set = build_form_set(algebra, rank)?;
    let named = set.named_forms();
    if let Some(wanted) = name {
        let form = named
            .iter()
            .find(|(n, _)| *n == wanted)
            .map(|(_, f)| *f)
            .ok_or_else(|| {
                Failure::new(
                    2,
                    format!(
                        "no form named '{wanted}' here; available: {}",
                        named.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
                    ),
                )
            })?;
        return Ok((serde_json::to_string_pretty(form).unwrap(), 0));
    }
    match cli.format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = named
                .iter()
                .map(|(n, f)| (n.to_string(), serde_json::to_value(f).unwrap()))
                .collect();
            Ok((serde_json::to_string_pretty(&map).unwrap(), 0))
        }
        _ => {
            let mut lines = vec![format!(
                "canonical forms for {}^{} (ambient R^{})",
                algebra.level().name(),
                rank,
                set.ambient_dim
            )];
            lines.push(format!("{:<16} {:>6} {:>7}", "name", "grade", "terms"));
            for (n, f) in &named {
                let grade = f
                    .pure_grade()
                    .map(|g| g.to_string())
                    .unwrap_or_else(|| "mixed".into());
                lines.push(format!("{:<16} {:>6} {:>7}", n, grade, f.term_count()));
            }
            Ok((lines.join("\n"), 0))
        }
    }
}

fn build_decomposition(algebra: AlgebraArg, rank: usize) -> Result<TwoFormDecomposition, Failure> {
    Ok(match algebra {
        AlgebraArg::O7 => decompose_two_forms_im_octonion()?,
        other => decompose_two_forms(other.level(), rank)?,
    })
}

fn cmd_decompose(cli: &Cli, algebra: AlgebraArg, rank: usize) -> Result<(String, i32), Failure> {
    let dec = build_decomposition(algebra, rank)?;
    match cli.format {
        Format::Json => {
            let comps: Vec<serde_json::Value> = dec
                .components
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "name": c.name,
                        "dimension": c.basis.ncols(),
                        "eigenvalue": c.eigenvalue,
                        "in_g": c.in_g,
                        "in_h": c.in_h,
                        "in_s": c.in_s,
                    })
                })
                .collect();
            Ok((
                serde_json::to_string_pretty(&serde_json::json!({
                    "label": dec.label,
                    "ambient_dim": dec.ambient_dim,
                    "two_form_dim": dec.total_two_form_dim(),
                    "components": comps,
                }))
                .unwrap(),
                0,
            ))
        }
        Format::Csv => {
            let mut lines = vec!["name,dimension,eigenvalue,in_g,in_h,in_s".to_string()];
            for c in &dec.components {
                lines.push(format!(
                    "{},{},{},{},{},{}",
                    c.name,
                    c.basis.ncols(),
                    c.eigenvalue.map(|e| format!("{e:.9}")).unwrap_or_default(),
                    c.in_g,
                    c.in_h,
                    c.in_s
                ));
            }
            Ok((lines.join("\n"), 0))
        }
        Format::Text => {
            let mut lines = vec![format!(
                "two-form decomposition of {} (Λ² dimension {})",
                dec.label,
                dec.total_two_form_dim()
            )];
            lines.push(format!(
                "{:<22} {:>4} {:>12} {:>5} {:>5} {:>5}",
                "component", "dim", "eigenvalue", "g", "h", "s"
            ));
            for c in &dec.components {
                lines.push(format!(
                    "{:<22} {:>4} {:>12} {:>5} {:>5} {:>5}",
                    c.name,
                    c.basis.ncols(),
                    c.eigenvalue
                        .map(|e| format!("{e:+.6}"))
                        .unwrap_or_else(|| "-".into()),
                    c.in_g,
                    c.in_h,
                    c.in_s
                ));
            }
            Ok((lines.join("\n"), 0))
        }
    }
}

fn cmd_classify_subspace(
    cli: &Cli,
    input: &str,
    algebra: AlgebraArg,
) -> Result<(String, i32), Failure> {
    let text = read_input(input)?;
    let plane: Subspace = parse_json(&text, "subspace")?;
    let level = algebra.level();
    let m = plane.ambient_dim();
    let (forms, _rank) = match algebra {
        AlgebraArg::O7 => {
            if m != 7 {
                return Err(Failure::new(
                    3,
                    format!("octonion-special classification needs ambient R^7, got R^{m}"),
                ));
            }
            (CanonicalFormSet::build(level, 1)?, 1)
        }
        AlgebraArg::O => {
            if m != 8 {
                return Err(Failure::new(
                    3,
                    format!("octonionic classification needs ambient R^8, got R^{m}"),
                ));
            }
            (CanonicalFormSet::build(level, 1)?, 1)
        }
        other => {
            let d = other.level().dim();
            if m % d != 0 || m == 0 {
                return Err(Failure::new(
                    3,
                    format!("ambient dimension {m} is not a multiple of {d}"),
                ));
            }
            (CanonicalFormSet::build(level, m / d)?, m / d)
        }
    };
    let classification = classify_special_lagrangian(&plane, &forms, 1e-9)?;
    // witness and algebra-stability data where the notions apply
    let a_subspace = if algebra != AlgebraArg::O7 && level != AlgebraLevel::REAL {
        Some(is_a_subspace(&plane, level)?)
    } else {
        None
    };
    let witness = if algebra != AlgebraArg::O7
        && level != AlgebraLevel::REAL
        && 2 * plane.dim() == m
    {
        find_lagrangian_witness(&plane, level)?
    } else {
        None
    };
    let lambda = if witness.is_some() {
        lambda_determinant(&plane, level, &forms).ok()
    } else {
        None
    };

    let mut summary_parts = vec![classification.primary.clone()];
    if let Some(l) = &lambda {
        match &l.kind {
            LambdaKind::ComplexPhase(p) => summary_parts.push(format!("phase {p:.3}")),
            LambdaKind::QuaternionicLine(u) => summary_parts.push(format!(
                "complex-structure line ±({:+.3} e1 {:+.3} e2 {:+.3} e3)",
                u.coeffs()[1],
                u.coeffs()[2],
                u.coeffs()[3]
            )),
            LambdaKind::OctonionicSelf => {}
        }
    }
    let summary = summary_parts.join("; ");

    match cli.format {
        Format::Json => {
            let witness_json = witness.as_ref().map(|w| {
                serde_json::json!({
                    "kernel_dim": w.kernel_dim,
                    "residual": w.residual,
                    "generators": w.generators.iter().map(|g| g.coeffs().to_vec()).collect::<Vec<_>>(),
                })
            });
            Ok((
                serde_json::to_string_pretty(&serde_json::json!({
                    "ambient": classification.ambient,
                    "summary": summary,
                    "a_subspace": a_subspace,
                    "verdicts": classification.verdicts,
                    "residuals": classification.residuals,
                    "phase": classification.phase,
                    "witness": witness_json,
                }))
                .unwrap(),
                0,
            ))
        }
        _ => {
            let mut lines = vec![
                format!("ambient:  {}", classification.ambient),
                format!("verdict:  {summary}"),
            ];
            if let Some(a) = a_subspace {
                lines.push(format!("algebra-stable subspace: {a}"));
            }
            for (name, v) in &classification.verdicts {
                lines.push(format!("  {name:<28} {v}"));
            }
            lines.push("residuals:".into());
            for (name, r) in &classification.residuals {
                lines.push(format!("  {name:<28} {:.3e}", r.abs()));
            }
            if let Some(w) = &witness {
                lines.push(format!(
                    "witness:  kernel dimension {}, restriction residual {:.3e}",
                    w.kernel_dim,
                    w.residual.abs()
                ));
            }
            Ok((lines.join("\n"), 0))
        }
    }
}

fn cmd_classify_connection(
    cli: &Cli,
    input: &str,
    algebra: AlgebraArg,
    tol: f64,
) -> Result<(String, i32), Failure> {
    let text = read_input(input)?;
    let f: CurvatureTensor = parse_json(&text, "curvature tensor")?;
    let rank = match algebra {
        AlgebraArg::O7 => {
            if f.dim != 7 {
                return Err(Failure::new(3, "octonion-special curvature lives on R^7"));
            }
            1
        }
        other => {
            let d = other.level().dim();
            if f.dim % d != 0 {
                return Err(Failure::new(
                    3,
                    format!("curvature dimension {} is not a multiple of {d}", f.dim),
                ));
            }
            f.dim / d
        }
    };
    let dec = build_decomposition(algebra, rank)?;
    let class = classify_connection(&f, &dec, tol)?;
    match cli.format {
        Format::Json => Ok((serde_json::to_string_pretty(&class).unwrap(), 0)),
        _ => {
            let mut lines = vec![
                format!("decomposition: {}", dec.label),
                format!("algebra connection: {}", class.is_a_connection),
                format!(
                    "special connection: {}",
                    class
                        .is_special
                        .map(|b| b.to_string())
                        .unwrap_or_else(|| "n/a".into())
                ),
                "component residuals:".into(),
            ];
            for (name, r) in &class.residuals {
                lines.push(format!("  {name:<22} {r:.3e}"));
            }
            Ok((lines.join("\n"), 0))
        }
    }
}

fn cmd_comass(
    cli: &Cli,
    input: &str,
    restarts: usize,
    seed: u64,
) -> Result<(String, i32), Failure> {
    let text = read_input(input)?;
    let form: Multivector = parse_json(&text, "form")?;
    let report = comass_estimate(&form, restarts, seed)?;
    match cli.format {
        Format::Json => Ok((serde_json::to_string_pretty(&report).unwrap(), 0)),
        Format::Csv => Ok((
            format!(
                "estimate,restarts,converged,seed\n{:.12},{},{},{}",
                report.estimate, report.restarts, report.converged, report.seed
            ),
            0,
        )),
        Format::Text => {
            let mut lines = vec![
                format!("comass estimate: {:.12}", report.estimate),
                format!(
                    "restarts: {}  converged: {}  seed: {}",
                    report.restarts, report.converged, report.seed
                ),
                "argmax plane (columns):".into(),
            ];
            let frame = report.argmax_plane.frame();
            for j in 0..frame.ncols() {
                let col: Vec<String> = (0..frame.nrows())
                    .map(|i| format!("{:+.6}", frame[(i, j)]))
                    .collect();
                lines.push(format!("  [{}]", col.join(", ")));
            }
            Ok((lines.join("\n"), 0))
        }
    }
}

fn cmd_ym_check(
    cli: &Cli,
    input: &str,
    curvature: Option<&str>,
    orientation: f64,
) -> Result<(String, i32), Failure> {
    let text = read_input(input)?;
    let phi: Multivector = parse_json(&text, "form")?;
    let q = ym_quadratic(&phi, orientation)?;
    let spectrum = q.spectrum(1e-8);
    let slack_report = match curvature {
        Some(path) => {
            let ctext = read_input(path)?;
            let f: CurvatureTensor = parse_json(&ctext, "curvature tensor")?;
            Some(classify_ym_calibrated(&f, &phi, orientation, 1e-9)?)
        }
        None => None,
    };
    match cli.format {
        Format::Json => Ok((
            serde_json::to_string_pretty(&serde_json::json!({
                "spectrum": spectrum,
                "top_eigenvalue": q.top_eigenvalue(),
                "min_eigenvalue": q.min_eigenvalue(),
                "scalar_calibrating": q.is_calibrating_scalar(),
                "connection_calibrating": q.is_calibrating_for_connections(),
                "connection_normalization": q.connection_normalization(),
                "curvature": slack_report,
            }))
            .unwrap(),
            0,
        )),
        _ => {
            let mut lines = vec!["q_Φ spectrum (eigenvalue, multiplicity):".to_string()];
            for (l, mult) in &spectrum {
                lines.push(format!("  {l:+.9} × {mult}"));
            }
            lines.push(format!(
                "scalar bound q ≤ |φ|²: {}   connection bound −q ≤ |φ|²: {}",
                q.is_calibrating_scalar(),
                q.is_calibrating_for_connections()
            ));
            lines.push(format!(
                "connection normalization c = {:+.9}",
                q.connection_normalization()
            ));
            if let Some(r) = slack_report {
                lines.push(format!(
                    "curvature: calibrated {}  slack {:.3e}  q {:.6}  energy {:.6}",
                    r.is_calibrated, r.slack, r.q_value, r.energy
                ));
            }
            Ok((lines.join("\n"), 0))
        }
    }
}

#[derive(Deserialize)]
struct LatticeJson {
    lattice: Vec<Vec<f64>>,
    #[serde(default)]
    orientation: Option<f64>,
}

fn parse_torus(path: Option<&str>, n: usize) -> Result<FlatTorus, Failure> {
    match path {
        None => Ok(FlatTorus::standard(n)),
        Some(p) => {
            let text = read_input(p)?;
            let raw: LatticeJson = parse_json(&text, "lattice")?;
            if raw.lattice.len() != n || raw.lattice.iter().any(|c| c.len() != n) {
                return Err(Failure::new(3, format!("lattice must be {n}×{n}")));
            }
            let m = DMatrix::from_fn(n, n, |i, j| raw.lattice[j][i]);
            let torus = FlatTorus::new(m)?;
            Ok(match raw.orientation {
                Some(o) => torus.with_orientation(o),
                None => torus,
            })
        }
    }
}

fn cmd_chern(
    cli: &Cli,
    curvature: &str,
    phi: &str,
    lattice: Option<&str>,
) -> Result<(String, i32), Failure> {
    let f: CurvatureTensor = parse_json(&read_input(curvature)?, "curvature tensor")?;
    let phi: Multivector = parse_json(&read_input(phi)?, "form")?;
    let torus = parse_torus(lattice, f.dim)?;
    let value = chern_pairing(&f, &phi, &torus)?;
    match cli.format {
        Format::Json => Ok((
            serde_json::to_string_pretty(&serde_json::json!({
                "pairing": value,
                "covolume": torus.covolume(),
            }))
            .unwrap(),
            0,
        )),
        _ => Ok((format!("chern pairing: {value:+.12e}"), 0)),
    }
}

fn cmd_fourier(
    cli: &Cli,
    input: &str,
    kernel: KernelArg,
    inverse: bool,
) -> Result<(String, i32), Failure> {
    let form: MixedForm = parse_json(&read_input(input)?, "mixed form")?;
    let out = match (kernel, inverse) {
        (KernelArg::Syz, false) => fiberwise_fourier(&form),
        (KernelArg::Syz, true) => fiberwise_fourier_inverse(&form),
        (KernelArg::Cohomology, _) => cohomology_fourier_form(&form),
    };
    // transform-domain violations are grade/degree bookkeeping failures
    let out = out.map_err(|e| Failure::new(3, e.to_string()))?;
    match cli.format {
        Format::Text => {
            let names = MixedForm::variable_names(form.n());
            let mut lines = vec![format!("transformed form on {} symbols:", 3 * form.n())];
            for (mask, c) in out.terms() {
                let mono: Vec<&str> = (0..(3 * form.n()))
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| names[b].as_str())
                    .collect();
                let mono = if mono.is_empty() {
                    "1".to_string()
                } else {
                    mono.join("∧")
                };
                lines.push(format!("  ({:+.9} {:+.9}i) {mono}", c.re, c.im));
            }
            if out.is_zero() {
                lines.push("  0".into());
            }
            Ok((lines.join("\n"), 0))
        }
        _ => Ok((serde_json::to_string_pretty(&out).unwrap(), 0)),
    }
}

fn cmd_selftest(
    cli: &Cli,
    seed: u64,
    restarts: usize,
    only: Option<&str>,
) -> Result<(String, i32), Failure> {
    let cfg = SelftestConfig {
        seed,
        comass_restarts: restarts,
        only: only.map(|s| s.split(',').map(|t| t.trim().to_string()).collect()),
    };
    let reports = run_selftest(&cfg);
    if reports.is_empty() {
        return Err(Failure::new(2, "no criteria matched the --only filter"));
    }
    let all_passed = reports.iter().all(|r| r.passed);
    let code = if all_passed { 0 } else { 1 };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "seed": seed,
            "restarts": restarts,
            "conventions": calibra_core::convention_ledger(),
            "criteria": reports,
            "passed": all_passed,
        }))
        .unwrap(),
        Format::Csv => {
            let mut lines = vec!["id,name,passed,expected,observed,tolerance,millis".to_string()];
            for r in &reports {
                let clean = |s: &str| s.replace(',', ";");
                lines.push(format!(
                    "{},{},{},{},{},{},{}",
                    r.id,
                    r.name,
                    r.passed,
                    clean(&r.expected),
                    clean(&r.observed),
                    clean(&r.tolerance),
                    r.millis
                ));
            }
            lines.join("\n")
        }
        Format::Text => {
            let mut lines = vec![format!("selftest  seed={seed}  restarts={restarts}")];
            lines.push("conventions:".into());
            for c in calibra_core::convention_ledger() {
                lines.push(format!("  - {c}"));
            }
            for r in &reports {
                lines.push(format!(
                    "[{}] {:2} {:<28} expected: {} | observed: {} | tol: {} | {} ms",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.id,
                    r.name,
                    r.expected,
                    r.observed,
                    r.tolerance,
                    r.millis
                ));
            }
            lines.push(format!(
                "{}/{} criteria passed",
                reports.iter().filter(|r| r.passed).count(),
                reports.len()
            ));
            lines
                .join("\n")
        }
    };
    Ok((text, code))
}
