//! `kreinlab analyze`: load a metric and a Hamiltonian, decide dynamical
//! stability, and classify any supplied candidate symmetries.

use std::path::PathBuf;

use clap::Args;
use kreinlab::csym::{find_csymmetry, is_csymmetry, reduce_hamiltonian, CsymError};
use kreinlab::gradekit::classify_gapped_2d;
use kreinlab::krein::{is_eta_selfadjoint, KreinMetric};
use kreinlab::numkit::{complex_schur, sorted_spectrum};
use kreinlab::symclass::classify_involutive_symmetry;
use serde::Serialize;

use crate::docs::{load_json, MatrixDocument, SCHEMA_VERSION};
use crate::error::CliError;

#[derive(Args)]
pub struct AnalyzeArgs {
    /// fundamental-symmetry document (eta* = eta = eta^-1)
    #[arg(long)]
    pub metric: PathBuf,
    /// operator to analyze
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// candidate symmetries to classify (repeatable)
    #[arg(long = "symmetry")]
    pub symmetries: Vec<PathBuf>,
    /// residual tolerance; defaults to KREINLAB_TOL or 1e-9
    #[arg(long)]
    pub tol: Option<f64>,
    /// emit the report as JSON (default)
    #[arg(long, conflicts_with = "table")]
    pub json: bool,
    /// emit the report as plain text
    #[arg(long)]
    pub table: bool,
}

/// Tolerance resolution order: flag, KREINLAB_TOL, built-in default.
pub fn resolve_tol(flag: Option<f64>) -> Result<f64, CliError> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("KREINLAB_TOL") {
            Ok(text) => text
                .parse::<f64>()
                .map_err(|_| CliError::Parse(format!("KREINLAB_TOL is not a number: {text}")))?,
            Err(_) => 1e-9,
        },
    };
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Parse(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(tol)
}

#[derive(Serialize)]
struct CertificateReport {
    involution_residual: f64,
    positivity_min_eig: f64,
    reduced_hermitian_residual: f64,
    metric_commutation_residual: f64,
    isospectral: bool,
}

#[derive(Serialize)]
struct SymmetryRow {
    file: String,
    name: String,
    varpi: i8,
    wp: i8,
    epsilon: Option<i8>,
    c: Option<i8>,
    degenerate: bool,
}

#[derive(Serialize)]
struct AnalysisReport {
    schema: u32,
    tolerance: f64,
    dimension: usize,
    signature: [usize; 2],
    eta_selfadjoint_residual: f64,
    spectrum: Vec<[f64; 2]>,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    obstruction: Option<String>,
    /// signs of the two eigenvalues, dimension two only
    #[serde(skip_serializing_if = "Option::is_none")]
    component: Option<[i8; 2]>,
    symmetries: Vec<SymmetryRow>,
}

fn sign_char(s: i8) -> char {
    if s >= 0 {
        '+'
    } else {
        '-'
    }
}

fn print_table(report: &AnalysisReport) {
    println!("dimension            {}", report.dimension);
    println!(
        "signature            ({}, {})",
        report.signature[0], report.signature[1]
    );
    println!("eta-sa residual      {:.6e}", report.eta_selfadjoint_residual);
    println!("verdict              {}", report.verdict);
    if let Some(cert) = &report.certificate {
        println!("  involution residual   {:.6e}", cert.involution_residual);
        println!("  positivity min eig    {:.6e}", cert.positivity_min_eig);
        println!("  reduced herm residual {:.6e}", cert.reduced_hermitian_residual);
        println!("  metric commutation    {:.6e}", cert.metric_commutation_residual);
        println!("  isospectral           {}", cert.isospectral);
    }
    if let Some(obs) = &report.obstruction {
        println!("  obstruction           {obs}");
    }
    if let Some([a, b]) = report.component {
        println!("component            ({}, {})", sign_char(a), sign_char(b));
    }
    println!("spectrum");
    for [re, im] in &report.spectrum {
        println!("  {re:+.9e} {im:+.9e}i");
    }
    if !report.symmetries.is_empty() {
        println!("symmetries");
        for row in &report.symmetries {
            let eps = row.epsilon.map(|e| sign_char(e).to_string()).unwrap_or_else(|| "·".into());
            let c = row.c.map(|s| sign_char(s).to_string()).unwrap_or_else(|| "·".into());
            let note = if row.degenerate { "  (degenerate)" } else { "" };
            println!(
                "  {}  varpi={} wp={} eps={} c={}  {}{}",
                row.file,
                sign_char(row.varpi),
                sign_char(row.wp),
                eps,
                c,
                row.name,
                note
            );
        }
    }
}

pub fn run(args: &AnalyzeArgs) -> Result<i32, CliError> {
    let tol = resolve_tol(args.tol)?;

    let metric_doc: MatrixDocument = load_json(&args.metric)?;
    let eta = metric_doc.to_matrix()?;
    let metric = KreinMetric::new(eta, tol.max(1e-10))
        .map_err(|e| CliError::Analysis(format!("metric document: {e}")))?;

    let h_doc: MatrixDocument = load_json(&args.hamiltonian)?;
    let h = h_doc.to_matrix()?;
    if h.dim() != metric.dim() {
        return Err(CliError::Dimension(format!(
            "hamiltonian is {}x{} but the metric is {}x{}",
            h.dim(),
            h.dim(),
            metric.dim(),
            metric.dim()
        )));
    }

    let sa = is_eta_selfadjoint(&h, &metric, tol);
    let schur = complex_schur(&h, 1e-12).map_err(|e| CliError::Analysis(e.to_string()))?;
    let spectrum: Vec<[f64; 2]> = sorted_spectrum(&schur.eigenvalues)
        .iter()
        .map(|z| [z.re, z.im])
        .collect();

    let mut verdict = "stable";
    let mut certificate = None;
    let mut obstruction = None;
    let mut component = None;
    match find_csymmetry(&h, &metric, tol) {
        Ok(xi) => {
            let check = is_csymmetry(xi.xi(), &metric, tol.max(1e-8));
            let cert = reduce_hamiltonian(&h, &xi, tol.max(1e-8))
                .map_err(|e| CliError::Analysis(e.to_string()))?;
            let comm = {
                let eta = metric.eta();
                (&(&cert.h_tilde * eta) - &(eta * &cert.h_tilde)).norm_fro()
            };
            certificate = Some(CertificateReport {
                involution_residual: check.involution_residual,
                positivity_min_eig: check.min_eig,
                reduced_hermitian_residual: cert.h_tilde.herm_residual(),
                metric_commutation_residual: comm,
                isospectral: kreinlab::csym::certificate_isospectral(&cert, &h, 1e-6),
            });
            if h.dim() == 2 {
                component = classify_gapped_2d(&h, &xi, tol).ok().map(|(a, b)| [a, b]);
            }
        }
        Err(CsymError::NotDynamicallyStable { obstruction: obs }) => {
            verdict = "unstable";
            obstruction = Some(obs.to_string());
        }
        Err(e) => return Err(CliError::Analysis(e.to_string())),
    }

    let mut rows = Vec::new();
    for path in &args.symmetries {
        let doc: MatrixDocument = load_json(path)?;
        let op = doc.to_operator()?;
        if op.dim() != metric.dim() {
            return Err(CliError::Dimension(format!(
                "symmetry {} is {}x{} but the metric is {}x{}",
                path.display(),
                op.dim(),
                op.dim(),
                metric.dim(),
                metric.dim()
            )));
        }
        let class = classify_involutive_symmetry(&op, &metric, Some(&h), tol)
            .map_err(|e| CliError::Analysis(format!("symmetry {}: {e}", path.display())))?;
        rows.push(SymmetryRow {
            file: path.display().to_string(),
            name: class.name,
            varpi: class.signature.varpi,
            wp: class.signature.wp,
            epsilon: class.signature.epsilon,
            c: class.signature.c,
            degenerate: class.degenerate,
        });
    }

    let report = AnalysisReport {
        schema: SCHEMA_VERSION,
        tolerance: tol,
        dimension: h.dim(),
        signature: [metric.kappa_plus(), metric.kappa_minus()],
        eta_selfadjoint_residual: sa.residual,
        spectrum,
        verdict,
        certificate,
        obstruction,
        component,
        symmetries: rows,
    };

    if args.table {
        print_table(&report);
    } else {
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Internal(format!("serialization: {e}")))?;
        println!("{text}");
    }
    Ok(if report.verdict == "stable" { 0 } else { 1 })
}
