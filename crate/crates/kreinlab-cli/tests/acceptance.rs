//! Acceptance gate: one test per numbered criterion. Each test prints a
//! single `criterion N: PASS (...)` line with its measured evidence; the
//! tolerances and instance counts are fixed and must not be loosened.

use std::time::Instant;

use kreinlab::csym::{
    find_csymmetry, g_from_xi, q_from_xi, reduce_hamiltonian, xi_from_q, CSymmetry, CsymError,
    Obstruction,
};
use kreinlab::gradekit::{
    classify_gapped_2d, family_csymmetry, family_hamiltonian, family_unitary, theta_map,
    Gradation,
};
use kreinlab::krein::{KreinMetric, RealLinearOp};
use kreinlab::models::{build_maxwell, dirichlet_laplacian, Grid1D};
use kreinlab::numkit::{
    c64, complex_schur, herm_eig, matsign_newton, sorted_spectrum, spectra_match, spectral_norm,
    ComplexMatrix,
};
use kreinlab::symclass::{classify_isometry_type, transform_symmetry};
use kreinlab::twistkit::{
    clifford_absorb, kgroup_point, reduce_data, tau_hat, validate_twist, FiniteGroupData,
    GroupChoice, KGroupDescriptor, Phase, PointScenario, SignMap, TwistData,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..1.0)
}

/// Hermitian generator anticommuting with diag(1_p, -1_m): off-diagonal
/// blocks only. `scale` caps the entry magnitude.
fn random_generator(rng: &mut ChaCha8Rng, p: usize, m: usize, scale: f64) -> ComplexMatrix {
    let n = p + m;
    let mut q = ComplexMatrix::zeros(n);
    for i in 0..p {
        for j in 0..m {
            let z = c64::new(unit(rng), unit(rng)).scale(scale);
            q[(i, p + j)] = z;
            q[(p + j, i)] = z.conj();
        }
    }
    q
}

/// Hermitian commuting with diag(1_p, -1_m): diagonal blocks only.
fn random_block_hermitian(rng: &mut ChaCha8Rng, p: usize, m: usize, scale: f64) -> ComplexMatrix {
    let n = p + m;
    let mut h = ComplexMatrix::zeros(n);
    let mut fill = |h: &mut ComplexMatrix, lo: usize, hi: usize| {
        for i in lo..hi {
            h[(i, i)] = c64::new(unit(rng) * scale, 0.0);
            for j in (i + 1)..hi {
                let z = c64::new(unit(rng), unit(rng)).scale(scale);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
    };
    fill(&mut h, 0, p);
    fill(&mut h, p, n);
    h
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n);
    for i in 0..n {
        h[(i, i)] = c64::new(unit(rng) * scale, 0.0);
        for j in (i + 1)..n {
            let z = c64::new(unit(rng), unit(rng)).scale(scale);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let k = random_hermitian(rng, n, 1.0);
    herm_eig(&k, 1e-12).unwrap().assemble_complex(|x| c64::from_polar(1.0, x))
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_generator_involution_round_trips() {
    let mut rng = rng(101);
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=16);
        let p = rng.gen_range(1..n);
        let m = n - p;
        let metric = KreinMetric::standard(p, m);
        let scale = 0.8 / ((p * m) as f64).sqrt();

        let q = random_generator(&mut rng, p, m, scale);
        let xi = xi_from_q(&q, &metric, 1e-11).unwrap();
        let q_back = q_from_xi(&xi).unwrap();
        worst = worst.max((&q_back - &q).norm_fro());

        let xi2 = xi_from_q(&random_generator(&mut rng, p, m, scale), &metric, 1e-11).unwrap();
        let q2 = q_from_xi(&xi2).unwrap();
        let xi2_back = xi_from_q(&q2, &metric, 1e-11).unwrap();
        worst = worst.max((xi2_back.xi() - xi2.xi()).norm_fro());
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-9, "worst round-trip error {worst:.3e}");
    assert!(elapsed.as_secs_f64() < 2.0, "round trips took {elapsed:?}");
    println!(
        "criterion 1: PASS (100 generator/involution round trips both ways, worst error {worst:.3e}, {elapsed:.2?})"
    );
}

#[test]
fn criterion_02_commuting_pairs_reduce_cleanly() {
    let mut rng = rng(202);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=16);
        let p = rng.gen_range(1..n);
        let m = n - p;
        let metric = KreinMetric::standard(p, m);
        let eta = metric.eta();
        let scale = 0.8 / ((p * m) as f64).sqrt();
        let xi = xi_from_q(&random_generator(&mut rng, p, m, scale), &metric, 1e-11).unwrap();

        let g = g_from_xi(&xi).unwrap();
        let g_inv = &(eta * &g) * eta;
        // G = G*
        worst = worst.max(g.herm_residual());
        // G# = G^-1
        let g_sharp = &(eta * &g.adjoint()) * eta;
        worst = worst.max((&(&g_sharp * &g) - &ComplexMatrix::identity(n)).norm_fro());
        // G Xi G^-1 = eta
        worst = worst.max((&(&(&g * xi.xi()) * &g_inv) - eta).norm_fro());

        // a Hamiltonian commuting with Xi, via the inverse similarity
        let flat = random_block_hermitian(&mut rng, p, m, 0.5);
        let h = &(&g_inv * &flat) * &g;
        let cert = reduce_hamiltonian(&h, &xi, 1e-9).unwrap();
        worst = worst.max(cert.h_tilde.herm_residual());
        worst = worst.max((&(&cert.h_tilde * eta) - &(eta * &cert.h_tilde)).norm_fro());
    }
    assert!(worst < 1e-9, "worst reduction residual {worst:.3e}");
    println!("criterion 2: PASS (100 commuting pairs, worst residual {worst:.3e})");
}

/// A plain unitary (optionally anti-linear) with `U eta = wp eta U` over the
/// balanced standard metric: block-diagonal for wp = +1, block-off-diagonal
/// for wp = -1.
fn reduced_symmetry(rng: &mut ChaCha8Rng, p: usize, varpi: i8, wp: i8) -> RealLinearOp {
    let n = 2 * p;
    let mut mat = ComplexMatrix::zeros(n);
    let a = random_unitary(rng, p);
    let b = random_unitary(rng, p);
    for i in 0..p {
        for j in 0..p {
            if wp == 1 {
                mat[(i, j)] = a[(i, j)];
                mat[(p + i, p + j)] = b[(i, j)];
            } else {
                mat[(i, p + j)] = a[(i, j)];
                mat[(p + i, j)] = b[(i, j)];
            }
        }
    }
    if varpi == 1 {
        RealLinearOp::linear(mat)
    } else {
        RealLinearOp::antilinear(mat)
    }
}

#[test]
fn criterion_03_compatible_symmetries_of_all_four_types() {
    let mut rng = rng(303);
    let mut worst = 0.0_f64;
    for _ in 0..25 {
        let p = rng.gen_range(1..=4);
        let metric = KreinMetric::standard(p, p);
        let eta = metric.eta();
        let scale = 0.8 / (p as f64);
        let xi = xi_from_q(&random_generator(&mut rng, p, p, scale), &metric, 1e-11).unwrap();
        let g_op = RealLinearOp::linear(g_from_xi(&xi).unwrap());
        let g_inv_op = RealLinearOp::linear(&(eta * &g_op.mat) * eta);

        for (varpi, wp) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let tilde = reduced_symmetry(&mut rng, p, varpi, wp);
            let u = g_inv_op.compose(&tilde).compose(&g_op);

            let (wp_in, varpi_in) = classify_isometry_type(&u, &metric, 1e-8).unwrap();
            assert_eq!((varpi_in, wp_in), (varpi, wp), "input type must be ({varpi}, {wp})");

            let (out, verdict) = transform_symmetry(&u, &xi, 1e-8).unwrap();
            assert!(verdict.compatible, "generated symmetry must commute with xi up to wp");
            worst = worst.max(verdict.unitarity_residual).max(verdict.eta_relation_residual);

            let (wp_out, varpi_out) = classify_isometry_type(&out, &metric, 1e-8).unwrap();
            assert_eq!((varpi_out, wp_out), (varpi, wp), "type must survive the transform");
        }
    }
    assert!(worst < 1e-9, "worst transformed-symmetry residual {worst:.3e}");
    println!(
        "criterion 3: PASS (25 instances x 4 types: unitarity and sign relation within {worst:.3e}, types preserved)"
    );
}

#[test]
fn criterion_04_two_dimensional_closed_forms() {
    let mut rng = rng(404);
    let metric = KreinMetric::standard(1, 1);
    let eta = metric.eta();

    // operator norms across a 20-point radius grid
    let mut worst_norm = 0.0_f64;
    for k in 0..20 {
        let r = 0.5 * k as f64;
        let target = r + (1.0 + r * r).sqrt();
        let angles: Vec<f64> = (0..4).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let u = family_unitary(r, angles[0], angles[1], angles[2]).unwrap();
        let xi = family_csymmetry(r, angles[3]).unwrap();
        worst_norm = worst_norm
            .max((spectral_norm(&u) - target).abs())
            .max((spectral_norm(&xi) - target).abs());
    }
    assert!(worst_norm < 1e-10, "worst norm-formula error {worst_norm:.3e}");

    // eigenvalues of the commutant family are u + v and u - v
    let mut worst_eig = 0.0_f64;
    for _ in 0..100 {
        let r = rng.gen_range(0.0..2.0);
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let xi_mat = family_csymmetry(r, theta).unwrap();
        let u = rng.gen_range(-3.0..3.0);
        let v = rng.gen_range(-3.0..3.0);
        let h = &ComplexMatrix::identity(2).scaled(c64::new(u, 0.0))
            + &xi_mat.scaled(c64::new(v, 0.0));
        let eigs = sorted_spectrum(&complex_schur(&h, 1e-12).unwrap().eigenvalues);
        let mut want = [c64::new(u - v, 0.0), c64::new(u + v, 0.0)];
        want.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (got, want) in eigs.iter().zip(&want) {
            worst_eig = worst_eig.max((got - want).norm());
        }
    }
    assert!(worst_eig < 1e-10, "worst eigenvalue error {worst_eig:.3e}");

    // 1000 gapped samples against the sign oracle
    let mut mismatches = 0usize;
    for _ in 0..1000 {
        let r = rng.gen_range(0.0..2.0);
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let xi = CSymmetry::new(family_csymmetry(r, theta).unwrap(), metric.clone(), 1e-9).unwrap();
        let (u, v) = loop {
            let u: f64 = rng.gen_range(-2.0..2.0);
            let v: f64 = rng.gen_range(-2.0..2.0);
            if (u + v).abs() > 0.05 && (u - v).abs() > 0.05 {
                break (u, v);
            }
        };
        let h = &ComplexMatrix::identity(2).scaled(c64::new(u, 0.0))
            + &xi.xi().scaled(c64::new(v, 0.0));
        let got = classify_gapped_2d(&h, &xi, 1e-9).unwrap();
        let want = (
            if u + v > 0.0 { 1 } else { -1 },
            if u - v > 0.0 { 1 } else { -1 },
        );
        if got != want {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0, "component classification disagreed with the sign oracle");

    // the reflection path is a gradation everywhere but obeys the
    // metric-commutation constraint only at its endpoints
    let points = 50usize;
    for k in 0..points {
        let theta = std::f64::consts::PI * (k as f64) / ((points - 1) as f64);
        let (s, c) = theta.sin_cos();
        let gamma = ComplexMatrix::from_rows(
            2,
            &[c64::new(c, 0.0), c64::new(s, 0.0), c64::new(s, 0.0), c64::new(-c, 0.0)],
        );
        assert!(gamma.herm_residual() < 1e-12);
        assert!((&(&gamma * &gamma) - &ComplexMatrix::identity(2)).norm_fro() < 1e-12);
        let comm = (&(&gamma * eta) - &(eta * &gamma)).norm_fro();
        assert!(
            (comm - 2.0 * 2.0_f64.sqrt() * s.abs()).abs() < 1e-10,
            "commutator norm off the closed form at point {k}"
        );
        if k == 0 || k == points - 1 {
            assert!(comm < 1e-12, "endpoint {k} must satisfy the constraint");
        } else {
            assert!(comm > 1e-3, "interior point {k} must leave the constraint");
        }
    }
    let trivial = CSymmetry::trivial(metric.clone());
    let first = classify_gapped_2d(eta, &trivial, 1e-9).unwrap();
    let last = classify_gapped_2d(&eta.scaled(c64::new(-1.0, 0.0)), &trivial, 1e-9).unwrap();
    assert_ne!(first, last, "path endpoints must lie in different components");

    println!(
        "criterion 4: PASS (norms within {worst_norm:.3e}, eigenvalues within {worst_eig:.3e}, 1000/1000 components, 50-point constraint contrast)"
    );
}

#[test]
fn criterion_05_flattening_map_spectra() {
    let mut rng = rng(505);
    let mut worst_grad = 0.0_f64;
    for trial in 0..50 {
        let p = rng.gen_range(1..=8);
        let q_dim = rng.gen_range(1..=8);
        let n = p + q_dim;
        let v = random_unitary(&mut rng, n);
        let mut flat = ComplexMatrix::zeros(n);
        for i in 0..n {
            flat[(i, i)] = c64::new(if i < p { 1.0 } else { -1.0 }, 0.0);
        }
        let gamma_mat = &(&v * &flat) * &v.adjoint();
        let gamma = Gradation::new(gamma_mat, None, 1e-9).unwrap();

        // odd Hermitian argument with spectrum inside [-1, 1]
        let mut odd = ComplexMatrix::zeros(n);
        for i in 0..p {
            for j in 0..q_dim {
                let z = c64::new(unit(&mut rng), unit(&mut rng));
                odd[(i, p + j)] = z;
                odd[(p + j, i)] = z.conj();
            }
        }
        let odd = &(&v * &odd) * &v.adjoint();
        let top = spectral_norm(&odd);
        let a = odd.scaled(c64::new(0.9 / top.max(1e-6), 0.0));

        let out = theta_map(&a, &gamma, 1e-9).unwrap();
        worst_grad = worst_grad
            .max(out.gamma().herm_residual())
            .max((&(out.gamma() * out.gamma()) - &ComplexMatrix::identity(n)).norm_fro());

        let ag = &a * gamma.gamma();
        let left = complex_schur(&ag, 1e-12).unwrap().eigenvalues;
        let right: Vec<c64> = herm_eig(&a, 1e-12)
            .unwrap()
            .values
            .iter()
            .map(|x| c64::new(0.0, *x))
            .collect();
        assert!(
            spectra_match(&left, &right, 1e-8),
            "trial {trial}: spectrum of the product must be i times the spectrum of the argument"
        );
    }
    assert!(worst_grad < 1e-8, "flattened image strayed from a gradation: {worst_grad:.3e}");
    println!(
        "criterion 5: PASS (50 flattenings are gradations within {worst_grad:.3e}, spectra match as multisets within 1e-8)"
    );
}

fn z2_twist(wp: [i8; 2], c: [i8; 2]) -> TwistData {
    let mut t = TwistData::untwisted(FiniteGroupData::cyclic2());
    t.set_wp(wp.to_vec());
    t.set_c(c.to_vec());
    t
}

fn assert_tau_hat_involutes(t: &TwistData) {
    let twice = tau_hat(&tau_hat(t));
    let n = t.group().order();
    for a in 0..n {
        for b in 0..n {
            assert_eq!(twice.tau(a, b), t.tau(a, b), "tau-hat must be a bit-exact involution");
        }
    }
}

#[test]
fn criterion_06_reduction_table_and_cocycle_identities() {
    // frozen sign table of the reduced metric-split scenario, element order
    // (+1,+1), (-1,+1), (+1,-1), (-1,-1)
    let frozen: [i8; 16] = [
        1, 1, 1, 1,
        1, 1, 1, 1,
        1, -1, 1, -1,
        1, -1, 1, -1,
    ];
    let reduced = reduce_data(&z2_twist([1, -1], [1, -1])).unwrap();
    assert_eq!(reduced.group().order(), 4);
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(
                reduced.tau(a, b),
                Phase::from_sign(frozen[a * 4 + b]),
                "reduced table entry ({a}, {b})"
            );
        }
    }

    // every reduction / absorption output passes the full structural check
    let mut checked = 0usize;
    for wp in [[1, 1], [1, -1]] {
        for c in [[1, 1], [1, -1]] {
            let base = reduce_data(&z2_twist(wp, c)).unwrap();
            let v = validate_twist(&base);
            assert!(v.ok, "reduced data failed validation: {:?}", v.failure);
            assert_tau_hat_involutes(&base);
            checked += 1;
            let mut t = base;
            let mut sig = (2usize, 3usize);
            while sig.0 + sig.1 > 0 {
                let (next, rest) = clifford_absorb(&t, sig).unwrap();
                let v = validate_twist(&next);
                assert!(v.ok, "absorption output failed validation: {:?}", v.failure);
                assert_tau_hat_involutes(&next);
                checked += 1;
                t = next;
                sig = rest;
            }
        }
    }
    println!(
        "criterion 6: PASS (frozen 4x4 table reproduced bit-exactly; {checked} pipeline outputs validate exhaustively; tau-hat involutes bit-exactly)"
    );
}

#[test]
fn criterion_07_point_kgroups_follow_the_closed_forms() {
    let start = Instant::now();
    let mut computed = 0usize;

    // metric-reversing scenario alternates Z / 0 with the parity of s - r
    for c in [SignMap::Trivial, SignMap::Id] {
        for r in 0..=6usize {
            for s in 0..=(6 - r) {
                let sc = PointScenario {
                    group: GroupChoice::Z2,
                    varpi: SignMap::Trivial,
                    wp: SignMap::Id,
                    c,
                    r,
                    s,
                };
                let out = kgroup_point(&sc).unwrap();
                let want = if (r + s) % 2 == 0 { KGroupDescriptor::Z } else { KGroupDescriptor::Zero };
                assert_eq!(out.descriptor, want, "(r, s) = ({r}, {s}), c = {c:?}");
                assert_eq!(out.sectors, 1);
                computed += 1;
            }
        }
    }

    // signature shift (r, s) -> (r+1, s+1) never changes the answer
    for group in [GroupChoice::Trivial, GroupChoice::Z2] {
        for wp in [SignMap::Trivial, SignMap::Id] {
            for c in [SignMap::Trivial, SignMap::Id] {
                for r in 0..=3usize {
                    for s in 0..=(3 - r) {
                        let base = PointScenario { group, varpi: SignMap::Trivial, wp, c, r, s };
                        let shifted = PointScenario { r: r + 1, s: s + 1, ..base };
                        assert_eq!(
                            kgroup_point(&base).unwrap().descriptor,
                            kgroup_point(&shifted).unwrap().descriptor,
                            "{base:?}"
                        );
                        computed += 2;
                    }
                }
            }
        }
    }

    // metric-preserving scenarios split into two sectors, shifted by the
    // parity character
    for group in [GroupChoice::Trivial, GroupChoice::Z2] {
        for c in [SignMap::Trivial, SignMap::Id] {
            let delta = usize::from(matches!(group, GroupChoice::Z2) && matches!(c, SignMap::Id));
            for r in 0..=6usize {
                for s in 0..=(6 - r) {
                    let sc = PointScenario { group, varpi: SignMap::Trivial, wp: SignMap::Trivial, c, r, s };
                    let out = kgroup_point(&sc).unwrap();
                    let want = if (r + s + delta) % 2 == 0 {
                        KGroupDescriptor::ZPlusZ
                    } else {
                        KGroupDescriptor::Zero
                    };
                    assert_eq!(out.descriptor, want, "{sc:?}");
                    assert_eq!(out.sectors, 2, "{sc:?}");
                    computed += 1;
                }
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "K-group sweep took {elapsed:?}");
    println!(
        "criterion 7: PASS ({computed} point scenarios through the full pipeline in {elapsed:.2?}: parity alternation, shift invariance, sector splitting)"
    );
}

/// Matrix sign via the Schur factorization and the Parlett recurrence:
/// entirely independent of the Newton iteration it cross-checks.
fn schur_sign(h: &ComplexMatrix) -> ComplexMatrix {
    let schur = complex_schur(h, 1e-12).unwrap();
    let t = &schur.t;
    let n = t.dim();
    let mut f = ComplexMatrix::zeros(n);
    for i in 0..n {
        f[(i, i)] = c64::new(if t[(i, i)].re >= 0.0 { 1.0 } else { -1.0 }, 0.0);
    }
    for d in 1..n {
        for i in 0..(n - d) {
            let j = i + d;
            let mut num = t[(i, j)] * (f[(i, i)] - f[(j, j)]);
            for k in (i + 1)..j {
                num += f[(i, k)] * t[(k, j)] - t[(i, k)] * f[(k, j)];
            }
            f[(i, j)] = num / (t[(i, i)] - t[(j, j)]);
        }
    }
    &(&schur.q * &f) * &schur.q.adjoint()
}

/// Distinct real diagonal values bounded away from zero and from each other.
fn separated_diagonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let magnitude = 0.3 + 0.4 * i as f64;
            if rng.gen_bool(0.5) {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect()
}

struct StableInstance {
    h: ComplexMatrix,
    metric: KreinMetric,
}

fn stable_instance(rng: &mut ChaCha8Rng, n: usize) -> StableInstance {
    let p = rng.gen_range(1..n);
    let m = n - p;
    let metric = KreinMetric::standard(p, m);
    let eta = metric.eta();
    let scale = 0.7 / ((p * m) as f64).sqrt();
    let xi = xi_from_q(&random_generator(rng, p, m, scale), &metric, 1e-11).unwrap();
    let g = g_from_xi(&xi).unwrap();
    let g_inv = &(eta * &g) * eta;
    let d = ComplexMatrix::diag_real(&separated_diagonal(rng, n));
    let h = &(&g_inv * &d) * &g;
    StableInstance { h, metric }
}

/// Schur-based acceptance oracle: real spectrum and full eigenspaces
/// (geometric multiplicity equals cluster size) decide stability without
/// consulting the certificate construction.
fn oracle_accepts(h: &ComplexMatrix) -> bool {
    let schur = complex_schur(h, 1e-12).unwrap();
    let n = h.dim();
    let scale = h.norm_fro().max(1.0);
    if schur.eigenvalues.iter().any(|z| z.im.abs() > 1e-8 * scale) {
        return false;
    }
    let mut values: Vec<f64> = schur.eigenvalues.iter().map(|z| z.re).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gap = 1e-5 * scale;
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= gap {
            end += 1;
        }
        let lambda = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        let shifted = h - &ComplexMatrix::identity(n).scaled(c64::new(lambda, 0.0));
        let gram = &shifted.adjoint() * &shifted;
        let eig = herm_eig(&gram, 1e-13).unwrap();
        let null_dim = eig
            .values
            .iter()
            .filter(|v| v.max(0.0).sqrt() < 1e-6 * scale)
            .count();
        if null_dim != end - start {
            return false;
        }
        start = end;
    }
    true
}

#[test]
fn criterion_08_numerical_cross_oracles() {
    let mut rng = rng(808);

    // sign function: Newton vs Schur-Parlett on 100 stable instances
    let mut worst_sign = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=32);
        let inst = stable_instance(&mut rng, n);
        let newton = matsign_newton(&inst.h, 1e-12, 120).unwrap();
        let reference = schur_sign(&inst.h);
        worst_sign = worst_sign.max((&newton - &reference).norm_fro());
    }
    assert!(worst_sign < 1e-8, "sign-function oracles disagree: {worst_sign:.3e}");

    // stability detection vs the diagonalizability oracle
    let mut disagreements = 0usize;
    let mut stable_count = 0usize;
    let mut unstable_count = 0usize;
    let mut check = |h: &ComplexMatrix, metric: &KreinMetric| {
        let found = find_csymmetry(h, metric, 1e-9).is_ok();
        let accepted = oracle_accepts(h);
        if found != accepted {
            disagreements += 1;
        }
        if accepted {
            stable_count += 1;
        } else {
            unstable_count += 1;
        }
    };

    for _ in 0..200 {
        let n = rng.gen_range(2..=12);
        let inst = stable_instance(&mut rng, n);
        check(&inst.h, &inst.metric);
    }

    // 25 instances with a complex-conjugate eigenvalue pair
    for k in 0..25 {
        let d = rng.gen_range(-0.5..0.5);
        let y = 1.0 + rng.gen_range(0.0..1.0);
        let phi = rng.gen_range(0.0..std::f64::consts::PI);
        let block = family_hamiltonian(d, -d, y * phi.cos(), y * phi.sin());
        if k % 2 == 0 {
            check(&block, &KreinMetric::standard(1, 1));
        } else {
            check(&embed_with_stable_tail(&mut rng, &block), &embedded_metric());
        }
    }

    // 25 defective exceptional points, the canonical nilpotent-shift case first
    for k in 0..25 {
        let block = if k == 0 {
            family_hamiltonian(1.0, -1.0, 1.0, 0.0)
        } else {
            let d = 0.5 + rng.gen_range(0.0..1.0);
            let phi = rng.gen_range(0.0..std::f64::consts::PI);
            let c = rng.gen_range(-1.0..1.0);
            family_hamiltonian(c + d, c - d, d * phi.cos(), d * phi.sin())
        };
        if k % 2 == 0 {
            check(&block, &KreinMetric::standard(1, 1));
        } else {
            check(&embed_with_stable_tail(&mut rng, &block), &embedded_metric());
        }
    }

    assert_eq!(stable_count, 200, "every generated stable instance must pass the oracle");
    assert_eq!(unstable_count, 50, "every generated unstable instance must fail the oracle");
    assert_eq!(disagreements, 0, "stability detection disagreed with the oracle");
    println!(
        "criterion 8: PASS (sign oracles within {worst_sign:.3e} on 100 instances; 200 stable + 50 unstable with zero disagreements)"
    );
}

/// The 2x2 block in the top corner, a well-separated stable pair below,
/// under the metric diag(1, -1, 1, -1).
fn embed_with_stable_tail(rng: &mut ChaCha8Rng, block: &ComplexMatrix) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            h[(i, j)] = block[(i, j)];
        }
    }
    h[(2, 2)] = c64::new(20.0 + rng.gen_range(0.0..1.0), 0.0);
    h[(3, 3)] = c64::new(-20.0 - rng.gen_range(0.0..1.0), 0.0);
    h
}

fn embedded_metric() -> KreinMetric {
    KreinMetric::new(ComplexMatrix::diag_real(&[1.0, -1.0, 1.0, -1.0]), 1e-12).unwrap()
}

#[test]
fn criterion_09_weighted_model_certificate() {
    let start = Instant::now();
    let n = 64;
    let grid = Grid1D::new(n, 1.0).unwrap();
    let m0 = &dirichlet_laplacian(&grid) + &ComplexMatrix::identity(n);
    let w = ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            c64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let model = build_maxwell(&m0, &w, 1e-9).unwrap();
    let xi = model.xi.clone().expect("alternating weight must yield a certificate");
    let m = &model.m;
    let m_norm = spectral_norm(m);

    let involution = (&(&xi * &xi) - &ComplexMatrix::identity(n)).norm_fro();
    assert!(involution < 1e-7, "involution residual {involution:.3e}");
    let commutation = (&(&xi * m) - &(m * &xi)).norm_fro();
    assert!(commutation < 1e-7 * m_norm, "commutation residual {commutation:.3e}");

    // positivity in the weighted geometry; the unimodular weight makes the
    // weighted and flat pairings coincide
    let ex = model.eta_w.eta() * &xi;
    let herm = (&ex + &ex.adjoint()).scaled(c64::new(0.5, 0.0));
    let min_eig = herm_eig(&herm, 1e-12).unwrap().values[0];
    assert!(min_eig > 0.0, "eta*xi must be positive definite, min eig {min_eig:.3e}");

    let max_imag = complex_schur(m, 1e-12)
        .unwrap()
        .eigenvalues
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    assert!(max_imag < 1e-7 * m_norm, "imaginary spectrum {max_imag:.3e}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "weighted model took {elapsed:?}");
    println!(
        "criterion 9: PASS (size-64 certificate: involution {involution:.3e}, commutation {commutation:.3e}, min eig {min_eig:.3e}, max imag {max_imag:.3e}, {elapsed:.2?})"
    );
}

#[test]
fn criterion_10_docs_state_the_scale_limitation() {
    let readme_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md");
    let readme = std::fs::read_to_string(readme_path).expect("workspace README must exist");
    let lower = readme.to_lowercase();
    assert!(
        lower.contains("desk scale"),
        "the README must state the desk-scale limitation"
    );
    assert!(
        lower.contains("finite-dimensional") || lower.contains("finite dimensional"),
        "the README must scope the library to finite dimensions"
    );
    println!("criterion 10: PASS (README states the desk-scale, finite-dimensional limitation)");
}

#[test]
fn obstruction_reporting_names_the_defect() {
    // companion check for criterion 8: the defective case must be reported
    // as such, not merely rejected
    let h = family_hamiltonian(1.0, -1.0, 1.0, 0.0);
    match find_csymmetry(&h, &KreinMetric::standard(1, 1), 1e-9) {
        Err(CsymError::NotDynamicallyStable {
            obstruction: Obstruction::DefectiveEigenvalue { condition },
        }) => assert!(condition > 1e9),
        other => panic!("expected a defectiveness obstruction, got {other:?}"),
    }
}
