//! Projection solver contract, derivative identity, interpolation
//! invariance, and the compression certificates.

use nalgebra::DVector;
use rank1_core::fields::{random_admissible, random_bumps, Field};
use rank1_core::operators::assemble_bundle;
use rank1_core::projection::{
    certified_projection, compress, compress_derivative, compress_jacobian, derivative_check,
    det_critical_check, dp_apply, height, project, project_multistart, radial_map,
    torus_patch_volume, CompressionConfig, ProjectionSolver,
};
use rank1_core::quadrature::SampleSet;
use rank1_core::spaces::SpaceId;

fn solver() -> ProjectionSolver {
    ProjectionSolver::default()
}

#[test]
fn projection_inverts_the_embedding() {
    for id in [SpaceId::CH2, SpaceId::CH3, SpaceId::HH2, SpaceId::OH2] {
        let space = id.space();
        let set = SampleSet::antithetic(space.dim(), 1024, 17);
        for trial in 0..3 {
            let mut v = DVector::zeros(space.dim());
            for (k, c) in v.iter_mut().enumerate() {
                *c = 0.5 * ((trial * 7 + k + 1) as f64).sin();
            }
            let x = space.exp_basepoint(&v);
            let res = project(&space, &Field::Embed(x.clone()), &set, &solver(), None);
            assert!(res.converged && res.iterations <= 40, "{}", id.name());
            // coordinate comparison: the acosh distance has a √eps noise
            // floor near coincident points
            let diff = (space.log_basepoint(&res.x) - space.log_basepoint(&x)).norm();
            assert!(diff < 1e-9, "{}: |P(Φ(x)) − x| = {}", id.name(), diff);

            // adding a constant rescales ρ uniformly; the zero is unchanged
            let shifted = Field::Embed(x.clone()).plus(Field::Const(0.7));
            let res2 = project(&space, &shifted, &set, &solver(), None);
            let diff2 = (space.log_basepoint(&res2.x) - space.log_basepoint(&x)).norm();
            assert!(diff2 < 1e-9, "{}: constant shift moved the zero", id.name());
        }
    }
}

#[test]
fn random_fields_project_uniquely() {
    for id in [SpaceId::CH2, SpaceId::HH2, SpaceId::OH2] {
        let space = id.space();
        let set = SampleSet::antithetic(space.dim(), 1024, 29);
        for trial in 0..2u64 {
            let (field, _) = random_admissible(&space, 1.5, 0.05, 100 + trial);
            let (best, spread) =
                project_multistart(&space, &field, &set, &solver(), 3.0, 5, 55 + trial);
            assert!(best.converged && best.residual <= 1e-10, "{}", id.name());
            assert!(spread < 1e-6, "{}: multistart spread {}", id.name(), spread);

            // idempotence through the embedding
            let re = project(&space, &Field::Embed(best.x.clone()), &set, &solver(), None);
            let diff = (space.log_basepoint(&re.x) - space.log_basepoint(&best.x)).norm();
            assert!(diff < 1e-7, "{}: idempotence failed by {}", id.name(), diff);
        }
    }
}

#[test]
fn derivative_identity_matches_finite_differences() {
    for id in [SpaceId::CH2, SpaceId::HH2] {
        let space = id.space();
        let set = SampleSet::antithetic(space.dim(), 1024, 41);
        let (field, _) = random_admissible(&space, 1.0, 0.05, 7);
        let worst = derivative_check(&space, &field, &set, &solver(), 4, 1e-5, 1000);
        assert!(worst < 1e-4, "{}: derivative residual {}", id.name(), worst);
    }
}

#[test]
fn derivative_special_directions_at_embedded_points() {
    let space = SpaceId::CH2.space();
    let set = SampleSet::antithetic(space.dim(), 2048, 51);
    let x = space.exp_basepoint(&DVector::from_element(space.dim(), 0.2));
    let field = Field::Embed(x.clone());
    let b = assemble_bundle(&space, &field, &x, &set);
    let coords = b.coordinate_fields(&set);

    // X = dΦ(v) maps back to v (differentiated inverse of the embedding),
    // up to the Monte Carlo error of Q ≈ id
    let v = DVector::from_fn(space.dim(), |i, _| if i == 0 { 1.0 } else { 0.0 });
    let out = dp_apply(&space, &b, &set, &coords[0]);
    assert!((out - &v).norm() < 0.05);

    // a field G-orthogonal to all coordinate fields is annihilated
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut y: Vec<f64> = (0..set.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let k = coords.len();
    let mut gram = nalgebra::DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for i in 0..k {
        rhs[i] = b.g_inner(&space, &set, &y, &coords[i]);
        for j in 0..k {
            gram[(i, j)] = b.g_inner(&space, &set, &coords[i], &coords[j]);
        }
    }
    let sol = gram.lu().solve(&rhs).unwrap();
    for (i, xc) in coords.iter().enumerate() {
        for (yy, xx) in y.iter_mut().zip(xc.iter()) {
            *yy -= sol[i] * xx;
        }
    }
    assert!(dp_apply(&space, &b, &set, &y).norm() < 1e-10);
}

#[test]
fn interpolation_family_fixes_the_projection() {
    for id in [SpaceId::CH2, SpaceId::OH2] {
        let space = id.space();
        let set = SampleSet::antithetic(space.dim(), 1024, 61);
        let (field, _) = random_admissible(&space, 1.0, 0.05, 19);
        let base = project(&space, &field, &set, &solver(), None);
        assert!(base.converged);
        for t in [0.25, 0.5, 0.75] {
            let ft = Field::Interp {
                base: Box::new(field.clone()),
                x: base.x.clone(),
                t,
            };
            let res = project(&space, &ft, &set, &solver(), None);
            let diff = (space.log_basepoint(&res.x) - space.log_basepoint(&base.x)).norm();
            assert!(diff < 1e-7, "{}: t = {} moved P by {}", id.name(), t, diff);
        }
        // endpoint identities of the family itself
        let f0 = Field::Interp {
            base: Box::new(field.clone()),
            x: base.x.clone(),
            t: 0.0,
        };
        let f1 = Field::Interp {
            base: Box::new(field.clone()),
            x: base.x.clone(),
            t: 1.0,
        };
        for s in set.dirs.iter().take(10) {
            let phi_x = rank1_core::busemann::busemann(&space, s, &base.x);
            assert!((f0.eval(&space, s) - phi_x).abs() < 1e-12);
            assert!((f1.eval(&space, s) - field.eval(&space, s)).abs() < 1e-10);
        }
    }
}

#[test]
fn det_critical_at_the_projection() {
    for id in [SpaceId::CH2, SpaceId::HH2] {
        let space = id.space();
        let set = SampleSet::antithetic(space.dim(), 4096, 71);
        let (field, _) = random_admissible(&space, 1.0, 0.02, 23);
        let (da, dh) = det_critical_check(&space, &field, &set, &solver(), 1e-3);
        assert!(da.abs() <= 1e-3, "{}: det A drift {}", id.name(), da);
        assert!(dh.abs() <= 1e-3, "{}: det Â drift {}", id.name(), dh);
    }
}

#[test]
fn height_vanishes_exactly_on_the_image() {
    let space = SpaceId::HH2.space();
    let set = SampleSet::antithetic(space.dim(), 1024, 81);
    let x = space.exp_basepoint(&DVector::from_element(space.dim(), 0.15));
    let field = Field::Embed(x.clone());
    let res = project(&space, &field, &set, &solver(), None);
    let h = height(&space, &field, &res.x, &set);
    assert!(h < 1e-8, "height off the solver fixed point: {}", h);

    // a growing bump grows the height monotonically
    let mut prev = 0.0;
    for k in 1..=4 {
        let amp = 0.05 * k as f64;
        let bump = random_bumps(space.dim(), 1, amp, 5);
        let f = Field::Embed(x.clone()).plus(bump);
        let r = project(&space, &f, &set, &solver(), None);
        let h = height(&space, &f, &r.x, &set);
        assert!(h > prev, "height not monotone at amp {}", amp);
        prev = h;
    }
}

#[test]
fn compression_maps_and_their_jacobians() {
    for id in [SpaceId::CH2, SpaceId::OH2] {
        let space = id.space();
        let cfg = CompressionConfig::new(0.1, 2.0);
        let mut v = DVector::zeros(space.dim());
        v[0] = 1.1;
        v[1] = -0.6;
        let p = space.exp_basepoint(&v);

        // h = 0 is the identity; the basepoint is fixed
        let q0 = compress(&space, &cfg, &p, 0.0);
        assert!((space.log_basepoint(&q0) - space.log_basepoint(&p)).norm() < 1e-12);
        let qb = compress(&space, &cfg, &space.basepoint(), 0.3);
        assert!(space.log_basepoint(&qb).norm() < 1e-12);

        for h in [0.1, 0.3, 0.5] {
            // analytic derivative vs finite differences in frame coordinates
            let (dp, dh) = compress_derivative(&space, &cfg, &p, h);
            let center = compress(&space, &cfg, &p, h);
            // fd must stay well above the acosh noise floor of log_at
            let fd = 1e-3;
            for k in 0..space.dim() {
                let mut e = DVector::zeros(space.dim());
                e[k] = fd;
                let pp = space.exp_at(&p, &e);
                let pm = space.exp_at(&p, &(-e.clone()));
                let col = (space.log_at(&center, &compress(&space, &cfg, &pp, h))
                    - space.log_at(&center, &compress(&space, &cfg, &pm, h)))
                    / (2.0 * fd);
                assert!(
                    (col - dp.column(k)).norm() < 1e-4,
                    "{}: dQ/dp column {} at h={}",
                    id.name(),
                    k,
                    h
                );
            }
            let colh = (space.log_at(&center, &compress(&space, &cfg, &p, h + fd))
                - space.log_at(&center, &compress(&space, &cfg, &p, h - fd)))
                / (2.0 * fd);
            assert!(
                (colh - &dh).norm() < 1e-4,
                "{}: dQ/dh at h={}",
                id.name(),
                h
            );

            // Jacobian over dn-subspaces of the joint domain is below the
            // contraction bound
            let (jac, bound) = compress_jacobian(&space, &cfg, &p, h);
            assert!(jac <= bound + 1e-3, "{}: {} > {}", id.name(), jac, bound);
        }
    }
}

#[test]
fn certified_projection_contracts_off_the_image() {
    let space = SpaceId::CH2.space();
    let set = SampleSet::antithetic(space.dim(), 2048, 91);
    let cfg = CompressionConfig::new(0.1, 2.0);

    // on the image: h = 0 and the certificate sits at the equality case
    let x = space.exp_basepoint(&DVector::from_element(space.dim(), 0.25));
    let cert = certified_projection(
        &space,
        &Field::Embed(x.clone()),
        &set,
        &solver(),
        &cfg,
        1e-2,
    );
    assert!(cert.pass && cert.h < 1e-8);
    assert!((cert.jacobian - 1.0).abs() < 1e-2);
    let dd = (space.log_basepoint(&cert.x_compressed) - space.log_basepoint(&x)).norm();
    assert!(dd < 1e-9);

    // off the image: strict decay beating the c·h² margin
    for seed in 0..5u64 {
        let bump = random_bumps(space.dim(), 3, 0.15, 200 + seed);
        let f = Field::Embed(x.clone()).plus(bump);
        let cert = certified_projection(&space, &f, &set, &solver(), &cfg, 1e-2);
        assert!(cert.h > 0.01, "seed {}: degenerate height", seed);
        assert!(cert.pass, "seed {}: certificate failed", seed);
        assert!(cert.jacobian < 1.0, "seed {}: no strict decay", seed);
    }
}

#[test]
fn radial_map_endpoints() {
    let space = SpaceId::HH2.space();
    let mut v = DVector::zeros(space.dim());
    v[2] = 0.8;
    let p = space.exp_basepoint(&v);
    let a1 = radial_map(&space, &p, 1.0);
    assert!((space.log_basepoint(&a1) - &v).norm() < 1e-10);
    let a0 = radial_map(&space, &p, 0.0);
    assert!(space.log_basepoint(&a0).norm() < 1e-12);
    let half = radial_map(&space, &p, 0.5);
    assert!((space.log_basepoint(&half) - &v * 0.5).norm() < 1e-10);
}

#[test]
fn torus_patch_volume_is_non_increasing() {
    let space = SpaceId::CH2.space();
    let set = SampleSet::antithetic(space.dim(), 512, 91);
    let cfg = CompressionConfig::new(0.1, 2.0);
    let noise = random_bumps(space.dim(), 2, 0.05, 9);
    let (patch, image) = torus_patch_volume(&space, &set, &solver(), &cfg, &noise, 2, 0.2);
    assert!(patch > 0.0 && image > 0.0);
    // the composed map is 1-Lipschitz into L∞, so the compressed projection
    // cannot grow the patch (up to the FD slack of the image volume)
    assert!(
        image <= patch * (1.0 + 1e-2),
        "image volume {} exceeds patch volume {}",
        image,
        patch
    );
}
