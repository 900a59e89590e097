//! Operator-bundle structure: the exact quadrature identities, spectral
//! interlacing, and the Jacobian certificate of the whitened drift.

use nalgebra::DVector;
use rank1_core::fields::{random_admissible, Field};
use rank1_core::operators::{assemble_bundle, verify_structure};
use rank1_core::quadrature::SampleSet;
use rank1_core::spaces::SpaceId;

fn all_spaces() -> Vec<SpaceId> {
    vec![SpaceId::CH2, SpaceId::CH3, SpaceId::HH2, SpaceId::OH2]
}

#[test]
fn structural_identities_are_exact() {
    for id in all_spaces() {
        let space = id.space();
        let n_samples = if space.is_octonionic() { 1024 } else { 2048 };
        for trial in 0..3u64 {
            let seed = 900 + trial;
            let set = SampleSet::antithetic(space.dim(), n_samples, seed);
            let (field, _y) = random_admissible(&space, 1.5, 0.05, seed + 17);
            let mut v = DVector::zeros(space.dim());
            for (k, c) in v.iter_mut().enumerate() {
                *c = 0.3 * ((k as f64) + 1.0).sin();
            }
            let x = space.exp_basepoint(&v);
            let b = assemble_bundle(&space, &field, &x, &set);
            let rep = verify_structure(&space, &b, &set, seed + 99);

            let dn = space.dim() as f64;
            assert!(
                (rep.trace_q - dn).abs() < 1e-9,
                "{}: tr Q = {} != {}",
                id.name(),
                rep.trace_q,
                dn
            );
            assert!(
                (rep.trace_q_hat - dn).abs() < 1e-9,
                "{}: tr Q-hat = {} != {}",
                id.name(),
                rep.trace_q_hat,
                dn
            );
            assert!(
                rep.avg_identity_residual < 1e-10,
                "{}: averaging identity residual {}",
                id.name(),
                rep.avg_identity_residual
            );
            if let Some(r) = rep.oct_block_residual {
                assert!(r < 1e-10, "{}: block constancy residual {}", id.name(), r);
            }
            assert!(
                rep.e_kills_perp < 1e-9,
                "{}: E on the orthocomplement: {}",
                id.name(),
                rep.e_kills_perp
            );
            assert!(
                rep.e_on_v_residual < 1e-10,
                "{}: E on coordinate fields: {}",
                id.name(),
                rep.e_on_v_residual
            );
            assert!(
                rep.a_two_path_residual < 1e-10,
                "{}: two assemblies of A disagree by {}",
                id.name(),
                rep.a_two_path_residual
            );
            assert!(rep.u_root_residual < 1e-9, "{}: root of Q", id.name());
            assert!(
                rep.interlacing_ok,
                "{}: interlacing failed: λ ∈ [{}, {}], η ∈ [{}, {}]",
                id.name(),
                rep.lambda_min,
                rep.lambda_max,
                rep.eta_min,
                rep.eta_max
            );
            assert!(
                rep.amgm_log_margin > -1e-12,
                "{}: AM-GM margin {}",
                id.name(),
                rep.amgm_log_margin
            );
            assert!(
                rep.e_norm <= rep.e_norm_bound + 1e-10,
                "{}: ‖E‖ = {} > {}",
                id.name(),
                rep.e_norm,
                rep.e_norm_bound
            );
        }
    }
}

#[test]
fn whitened_drift_reproduces_q() {
    for id in all_spaces() {
        let space = id.space();
        let set = SampleSet::antithetic(space.dim(), 512, 31);
        let (field, _) = random_admissible(&space, 1.0, 0.05, 77);
        let x = space.exp_basepoint(&DVector::from_element(space.dim(), 0.1));
        let b = assemble_bundle(&space, &field, &x, &set);
        let n = space.n as f64;
        let scale = ((n + 1.0) / n) * ((n + 1.0) / n);
        let gram = &b.e_whitened * b.e_whitened.transpose();
        let resid = (&gram - &b.q * scale).norm();
        assert!(resid < 1e-10, "{}: EEᵀ vs Q residual {}", id.name(), resid);
    }
}

#[test]
fn jacobian_certificate_two_routes_agree_and_contract() {
    for id in all_spaces() {
        let space = id.space();
        let n_samples = if space.is_octonionic() { 1024 } else { 2048 };
        for trial in 0..3u64 {
            let seed = 400 + 13 * trial;
            let set = SampleSet::antithetic(space.dim(), n_samples, seed);
            let (field, _) = random_admissible(&space, 1.5, 0.08, seed);
            let x = space.exp_basepoint(
                &(DVector::from_element(space.dim(), -0.07) * ((trial as f64) + 1.0)),
            );
            let b = assemble_bundle(&space, &field, &x, &set);
            let (j_svd, j_closed) = b.jacobian_ae(&space);
            assert!(
                (j_svd - j_closed).abs() < 1e-8 * j_closed.max(1e-8),
                "{}: SVD route {} vs closed route {}",
                id.name(),
                j_svd,
                j_closed
            );
            assert!(
                j_svd <= 1.0 + 1e-10,
                "{}: Jacobian exceeds one: {}",
                id.name(),
                j_svd
            );
        }
    }
}

#[test]
fn jacobian_is_one_at_embedded_points() {
    // With φ = Φ_y the weights at x = y are identically one, Q is the plain
    // second-moment matrix of the nodes, and the Jacobian deficit is
    // quadratic in ‖Q − id‖ — so it vanishes at the Monte Carlo rate².
    for id in all_spaces() {
        let space = id.space();
        // deficit ≈ ¼‖Q − id‖² ∝ dn²/N, so the node count grows with dn²
        let n_samples = 256 * space.dim() * space.dim();
        let set = SampleSet::antithetic(space.dim(), n_samples, 5);
        let mut v = DVector::zeros(space.dim());
        v[0] = 0.9;
        v[space.dim() - 1] = -0.4;
        let y = space.exp_basepoint(&v);
        let field = Field::Embed(y.clone());
        let b = assemble_bundle(&space, &field, &y, &set);
        for r in &b.weights.rho {
            assert!((r - 1.0).abs() < 1e-10, "{}: weight at center", id.name());
        }
        let (j_svd, _) = b.jacobian_ae(&space);
        assert!(
            j_svd <= 1.0 + 1e-10 && j_svd > 1.0 - 5e-3,
            "{}: Jacobian at the embedded point: {}",
            id.name(),
            j_svd
        );
    }
}

#[test]
fn mass_and_weights_match_direct_integration() {
    let space = SpaceId::HH2.space();
    let set = SampleSet::antithetic(space.dim(), 256, 123);
    let (field, _) = random_admissible(&space, 1.0, 0.05, 9);
    let x = space.exp_basepoint(&DVector::from_element(space.dim(), 0.12));
    let b = assemble_bundle(&space, &field, &x, &set);
    let m = (space.dim() + space.d()) as f64;
    let direct = rank1_core::quadrature::integrate_mu_x(&space, &x, &set, |s| {
        (m * (rank1_core::busemann::busemann(&space, s, &x) - field.eval(&space, s))).exp()
    });
    assert!((b.weights.mass - direct).abs() < 1e-12 * direct.abs());
    let sum: f64 = set
        .weights
        .iter()
        .zip(b.weights.rho_bar.iter())
        .map(|(w, r)| w * r)
        .sum();
    assert!((sum - 1.0).abs() < 1e-12);
}
