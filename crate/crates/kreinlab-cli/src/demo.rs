//! `kreinlab demo`: canned end-to-end demonstrations. Each writes one JSON
//! report into the output directory and prints a short summary. Exit code 6
//! means a mathematical identity the demo relies on failed numerically.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use kreinlab::csym::CSymmetry;
use kreinlab::gradekit::{
    classify_gapped_2d, family_csymmetry, family_unitary, gradation_swap_path,
    swap_path_continuity, Gradation,
};
use kreinlab::krein::KreinMetric;
use kreinlab::models::{build_maxwell, dirichlet_laplacian, discretize_heps, Grid1D};
use kreinlab::numkit::{c64, complex_schur, sorted_spectrum, spectral_norm, ComplexMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::docs::{save_json, MatrixDocument, SCHEMA_VERSION};
use crate::error::CliError;

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    /// closed-form two-dimensional family: norms, components, constraint contrast
    TwoLevel,
    /// sign-indefinite weighted wave operator with stability certificate
    Maxwell,
    /// complex-potential spectra across the exponent sweep
    PtSpectrum,
    /// swap homotopy between a pair of gradations on the doubled space
    Homotopy,
}

#[derive(Args)]
pub struct DemoArgs {
    #[arg(value_enum)]
    name: DemoName,
    /// directory receiving the report file
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// seed for the randomized parts
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn run(args: &DemoArgs) -> Result<i32, CliError> {
    match args.name {
        DemoName::TwoLevel => two_level(&args.out, args.seed),
        DemoName::Maxwell => maxwell(&args.out, args.seed),
        DemoName::PtSpectrum => pt_spectrum(&args.out, args.seed),
        DemoName::Homotopy => homotopy(&args.out, args.seed),
    }?;
    Ok(0)
}

fn internal(msg: String) -> CliError {
    CliError::Internal(msg)
}

// --------------------------------------------------------------------------
// two-level

#[derive(Serialize)]
struct NormRow {
    r: f64,
    target: f64,
    unitary_residual: f64,
    csymmetry_residual: f64,
}

#[derive(Serialize)]
struct ComponentRow {
    u: f64,
    v: f64,
    signs: [i8; 2],
}

#[derive(Serialize)]
struct ContrastPoint {
    theta: f64,
    commutator: f64,
    expected: f64,
    gradation_residual: f64,
}

#[derive(Serialize)]
struct TwoLevelReport {
    schema: u32,
    seed: u64,
    norms: Vec<NormRow>,
    components: Vec<ComponentRow>,
    contrast: Vec<ContrastPoint>,
    endpoints_in_constraint: bool,
    interior_leaves_constraint: bool,
    endpoint_components: [[i8; 2]; 2],
}

fn two_level(out: &Path, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric = KreinMetric::standard(1, 1);

    let mut norms = Vec::new();
    for r in [0.0f64, 0.5, 1.0, 2.0, 10.0] {
        let target = r + (1.0 + r * r).sqrt();
        let alpha = rng.gen_range(-PI..PI);
        let beta = rng.gen_range(-PI..PI);
        let delta = rng.gen_range(-PI..PI);
        let theta = rng.gen_range(-PI..PI);
        let u = family_unitary(r, alpha, beta, delta).map_err(|e| internal(e.to_string()))?;
        let xi = family_csymmetry(r, theta).map_err(|e| internal(e.to_string()))?;
        let unitary_residual = (spectral_norm(&u) - target).abs();
        let csymmetry_residual = (spectral_norm(&xi) - target).abs();
        if unitary_residual > 1e-10 || csymmetry_residual > 1e-10 {
            return Err(internal(format!(
                "norm formula failed at r = {r}: residuals {unitary_residual:.3e}, {csymmetry_residual:.3e}"
            )));
        }
        norms.push(NormRow { r, target, unitary_residual, csymmetry_residual });
    }

    let r0 = rng.gen_range(0.0..2.0);
    let theta0 = rng.gen_range(-PI..PI);
    let xi_mat = family_csymmetry(r0, theta0).map_err(|e| internal(e.to_string()))?;
    let xi = CSymmetry::new(xi_mat, metric.clone(), 1e-9).map_err(|e| internal(e.to_string()))?;
    let mut components = Vec::new();
    for (u, v) in [(2.0, 1.0), (1.0, 2.0), (-1.0, -2.0), (-2.0, -1.0)] {
        let h = &ComplexMatrix::identity(2).scaled(c64::new(u, 0.0))
            + &xi.xi().scaled(c64::new(v, 0.0));
        let signs = classify_gapped_2d(&h, &xi, 1e-9).map_err(|e| internal(e.to_string()))?;
        let expected = (
            if u + v > 0.0 { 1 } else { -1 },
            if u - v > 0.0 { 1 } else { -1 },
        );
        if signs != expected {
            return Err(internal(format!(
                "component of ({u}, {v}) came out {signs:?}, expected {expected:?}"
            )));
        }
        components.push(ComponentRow { u, v, signs: [signs.0, signs.1] });
    }

    // the reflection path cos(t) eta + sin(t) X: every point is a gradation,
    // but it commutes with eta only at its endpoints, which lie in the two
    // components (+,-) and (-,+)
    let eta = metric.eta();
    let mut contrast = Vec::new();
    let mut endpoints_ok = true;
    let mut interior_ok = true;
    let points = 50usize;
    for k in 0..points {
        let theta = PI * (k as f64) / ((points - 1) as f64);
        let (s, c) = theta.sin_cos();
        let g = ComplexMatrix::from_rows(
            2,
            &[c64::new(c, 0.0), c64::new(s, 0.0), c64::new(s, 0.0), c64::new(-c, 0.0)],
        );
        let gradation_residual = g
            .herm_residual()
            .max((&(&g * &g) - &ComplexMatrix::identity(2)).norm_fro());
        if gradation_residual > 1e-12 {
            return Err(internal(format!(
                "path point {k} is not a gradation (residual {gradation_residual:.3e})"
            )));
        }
        let commutator = (&(&g * eta) - &(eta * &g)).norm_fro();
        let expected = 2.0 * 2.0_f64.sqrt() * s.abs();
        if (commutator - expected).abs() > 1e-10 {
            return Err(internal(format!(
                "commutator norm at theta = {theta} came out {commutator:.12e}, expected {expected:.12e}"
            )));
        }
        let in_constraint = commutator <= 1e-12;
        if k == 0 || k == points - 1 {
            endpoints_ok &= in_constraint;
        } else {
            interior_ok &= !in_constraint;
        }
        contrast.push(ContrastPoint { theta, commutator, expected, gradation_residual });
    }
    if !endpoints_ok || !interior_ok {
        return Err(internal(
            "constraint contrast failed: the path must satisfy the commutation constraint exactly at its endpoints".into(),
        ));
    }
    let trivial = CSymmetry::trivial(metric.clone());
    let first = classify_gapped_2d(eta, &trivial, 1e-9).map_err(|e| internal(e.to_string()))?;
    let last = classify_gapped_2d(&eta.scaled(c64::new(-1.0, 0.0)), &trivial, 1e-9)
        .map_err(|e| internal(e.to_string()))?;
    if first == last {
        return Err(internal("path endpoints landed in the same component".into()));
    }

    let report = TwoLevelReport {
        schema: SCHEMA_VERSION,
        seed,
        norms,
        components,
        contrast,
        endpoints_in_constraint: endpoints_ok,
        interior_leaves_constraint: interior_ok,
        endpoint_components: [[first.0, first.1], [last.0, last.1]],
    };
    let path = out.join("two-level.json");
    save_json(&path, &report)?;

    // a ready-made input bundle for `analyze`: metric, a stable operator in
    // the (+,-) component, and two of its symmetries (one anti-linear)
    let xi_ref = family_csymmetry(1.0, 0.0).map_err(|e| internal(e.to_string()))?;
    let h_ref = &ComplexMatrix::identity(2) + &xi_ref.scaled(c64::new(2.0, 0.0));
    let conjugation = kreinlab::krein::RealLinearOp::antilinear(ComplexMatrix::identity(2));
    save_json(
        &out.join("two-level-metric.json"),
        &MatrixDocument::from_matrix(metric.eta(), Some("metric")),
    )?;
    save_json(
        &out.join("two-level-hamiltonian.json"),
        &MatrixDocument::from_matrix(&h_ref, Some("hamiltonian")),
    )?;
    save_json(
        &out.join("two-level-symmetry.json"),
        &MatrixDocument::from_matrix(&xi_ref, Some("symmetry")),
    )?;
    save_json(
        &out.join("two-level-conjugation.json"),
        &MatrixDocument::from_operator(&conjugation, Some("symmetry")),
    )?;

    let worst = report
        .norms
        .iter()
        .map(|row| row.unitary_residual.max(row.csymmetry_residual))
        .fold(0.0, f64::max);
    println!("norm formula residuals: worst {worst:.3e} over r in {{0, 0.5, 1, 2, 10}}");
    println!("components realized: (+,+) (+,-) (-,+) (-,-)");
    println!(
        "constraint contrast: endpoints ({},{}) and ({},{}), interior leaves the commutant",
        sign_char(first.0),
        sign_char(first.1),
        sign_char(last.0),
        sign_char(last.1)
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn sign_char(s: i8) -> char {
    if s >= 0 {
        '+'
    } else {
        '-'
    }
}

// --------------------------------------------------------------------------
// maxwell

#[derive(Serialize)]
struct MaxwellDemoReport {
    schema: u32,
    seed: u64,
    size: usize,
    signature: [usize; 2],
    stable: bool,
    eta_selfadjoint_residual: f64,
    involution_residual: f64,
    positivity_min_eig: f64,
    commutation_residual: f64,
    max_imag_eigenvalue: f64,
    weight_bounds: [f64; 4],
    automatic: [String; 2],
}

fn maxwell(out: &Path, seed: u64) -> Result<(), CliError> {
    let n = 64;
    let grid = Grid1D::new(n, 1.0).map_err(|e| internal(e.to_string()))?;
    let m0 = {
        let lap = dirichlet_laplacian(&grid);
        &lap + &ComplexMatrix::identity(n)
    };
    let w = ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            c64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let model = build_maxwell(&m0, &w, 1e-9).map_err(|e| internal(e.to_string()))?;
    if model.csym.is_none() {
        return Err(internal("alternating-weight model failed to produce a certificate".into()));
    }
    let report = MaxwellDemoReport {
        schema: SCHEMA_VERSION,
        seed,
        size: n,
        signature: [model.eta_w.kappa_plus(), model.eta_w.kappa_minus()],
        stable: model.csym.is_some(),
        eta_selfadjoint_residual: model.report.eta_selfadjoint_residual,
        involution_residual: model.report.involution_residual,
        positivity_min_eig: model.report.positivity_min_eig,
        commutation_residual: model.report.commutation_residual,
        max_imag_eigenvalue: model.report.max_imag_eigenvalue,
        weight_bounds: [model.a_plus, model.b_plus, model.a_minus, model.b_minus],
        automatic: [model.report.automatic[0].to_string(), model.report.automatic[1].to_string()],
    };
    let path = out.join("maxwell.json");
    save_json(&path, &report)?;
    save_json(
        &out.join("maxwell-metric.json"),
        &MatrixDocument::from_matrix(model.eta_w.eta(), Some("metric")),
    )?;
    save_json(
        &out.join("maxwell-operator.json"),
        &MatrixDocument::from_matrix(&model.m, Some("hamiltonian")),
    )?;
    println!(
        "weighted operator of size {n}: signature ({}, {}), stable = {}",
        report.signature[0], report.signature[1], report.stable
    );
    println!(
        "certificate residuals: involution {:.3e}, commutation {:.3e}, min eig of eta*xi {:.3e}",
        report.involution_residual, report.commutation_residual, report.positivity_min_eig
    );
    println!("largest imaginary eigenvalue part: {:.3e}", report.max_imag_eigenvalue);
    println!("wrote {}", path.display());
    Ok(())
}

// --------------------------------------------------------------------------
// pt-spectrum

#[derive(Serialize)]
struct SweepRow {
    epsilon: f64,
    nonreal_count: usize,
    lowest: Vec<[f64; 2]>,
    conjugation_symmetric: bool,
}

#[derive(Serialize)]
struct PtSpectrumReport {
    schema: u32,
    seed: u64,
    size: usize,
    half_length: f64,
    rows: Vec<SweepRow>,
}

fn pt_spectrum(out: &Path, seed: u64) -> Result<(), CliError> {
    let n = 32;
    let l = 6.0;
    let grid = Grid1D::new(n, l).map_err(|e| internal(e.to_string()))?;
    let mut rows = Vec::new();
    for k in 0..13 {
        let epsilon = 1.0 + 0.25 * (k as f64);
        let (h, _metric) = discretize_heps(&grid, epsilon, |x| x).map_err(|e| internal(e.to_string()))?;
        let schur = complex_schur(&h, 1e-12).map_err(|e| internal(e.to_string()))?;
        let spectrum = sorted_spectrum(&schur.eigenvalues);
        let scale = spectrum.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let nonreal_count = spectrum.iter().filter(|z| z.im.abs() > 1e-7 * scale).count();
        let conj: Vec<c64> = spectrum.iter().map(|z| z.conj()).collect();
        let conjugation_symmetric =
            kreinlab::numkit::spectra_match(&spectrum, &conj, 1e-5 * scale);
        if !conjugation_symmetric {
            return Err(internal(format!(
                "spectrum at exponent {epsilon} is not closed under conjugation"
            )));
        }
        let lowest = spectrum.iter().take(5).map(|z| [z.re, z.im]).collect();
        rows.push(SweepRow { epsilon, nonreal_count, lowest, conjugation_symmetric });
    }
    let report = PtSpectrumReport { schema: SCHEMA_VERSION, seed, size: n, half_length: l, rows };
    let path = out.join("pt-spectrum.json");
    save_json(&path, &report)?;
    for row in &report.rows {
        println!(
            "exponent {:>4.2}: {} nonreal eigenvalues, lowest {:+.6e}{:+.6e}i",
            row.epsilon, row.nonreal_count, row.lowest[0][0], row.lowest[0][1]
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

// --------------------------------------------------------------------------
// homotopy

#[derive(Serialize)]
struct PathPoint {
    theta: f64,
    distance_from_start: f64,
    distance_to_end: f64,
}

#[derive(Serialize)]
struct HomotopyReport {
    schema: u32,
    seed: u64,
    points: Vec<PathPoint>,
    endpoint_swap_verified: bool,
    max_jump: f64,
}

fn homotopy(out: &Path, seed: u64) -> Result<(), CliError> {
    let g0 = Gradation::new(ComplexMatrix::diag_real(&[1.0, -1.0]), None, 1e-12)
        .map_err(|e| internal(e.to_string()))?;
    let g1 = Gradation::new(ComplexMatrix::diag_real(&[-1.0, 1.0]), None, 1e-12)
        .map_err(|e| internal(e.to_string()))?;
    let start = ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]);
    let end = ComplexMatrix::diag_real(&[-1.0, 1.0, 1.0, -1.0]);

    let points = 50usize;
    let mut rows = Vec::new();
    for k in 0..points {
        let theta = 0.5 * PI * (k as f64) / ((points - 1) as f64);
        // every point of the path revalidates as a gradation on construction
        let g = gradation_swap_path(&g0, &g1, theta).map_err(|e| internal(e.to_string()))?;
        rows.push(PathPoint {
            theta,
            distance_from_start: (g.gamma() - &start).norm_fro(),
            distance_to_end: (g.gamma() - &end).norm_fro(),
        });
    }
    let swapped = rows.first().map(|p| p.distance_from_start < 1e-12).unwrap_or(false)
        && rows.last().map(|p| p.distance_to_end < 1e-12).unwrap_or(false);
    if !swapped {
        return Err(internal("swap path does not join the two direct-sum orders".into()));
    }
    let max_jump =
        swap_path_continuity(&g0, &g1, points - 1).map_err(|e| internal(e.to_string()))?;

    let report = HomotopyReport {
        schema: SCHEMA_VERSION,
        seed,
        points: rows,
        endpoint_swap_verified: swapped,
        max_jump,
    };
    let path = out.join("homotopy.json");
    save_json(&path, &report)?;
    println!("swap path on the doubled space: {points} points, endpoint swap verified");
    println!("largest step in operator norm: {max_jump:.6e}");
    println!("wrote {}", path.display());
    Ok(())
}
