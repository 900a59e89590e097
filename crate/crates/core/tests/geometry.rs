//! Geometry-layer validation: exp/log, transvections, closed-form distances
//! and Busemann functions against their limit oracles, curvature pinching,
//! and the exact hinge laws inside and across the structure lines.

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rank1_core::busemann::*;
use rank1_core::quadrature::SampleSet;
use rank1_core::spaces::{Point, Space, SpaceId};
use rank1_core::{jordan, Oct};

const SPACES: [SpaceId; 4] = [SpaceId::CH2, SpaceId::CH3, SpaceId::HH2, SpaceId::OH2];

fn rng_unit(dim: usize, rng: &mut impl Rng) -> DVector<f64> {
    loop {
        let mut v = DVector::zeros(dim);
        for c in v.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

fn rng_point(space: &Space, radius: f64, rng: &mut impl Rng) -> Point {
    let v = rng_unit(space.dim(), rng) * rng.gen_range(0.0..radius);
    space.exp_basepoint(&v)
}

#[test]
fn exp_log_roundtrip_at_basepoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for id in SPACES {
        let space = id.space();
        for _ in 0..50 {
            let xi = rng_unit(space.dim(), &mut rng) * rng.gen_range(0.0..4.0);
            let p = space.exp_basepoint(&xi);
            let back = space.log_basepoint(&p);
            assert!((back - &xi).norm() < 1e-9 * (1.0 + xi.norm()), "{:?}", id);
            assert!((space.distance(&space.basepoint(), &p) - xi.norm()).abs() < 1e-9);
        }
    }
}

#[test]
fn transvections_carry_basepoint_and_preserve_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for id in SPACES {
        let space = id.space();
        for _ in 0..25 {
            let x = rng_point(&space, 3.0, &mut rng);
            let iso = space.transvection_to(&x);
            let img = space.apply(&iso, &space.basepoint());
            // coincidence measured by distance sits at the acosh noise floor
            // (~sqrt(eps)); 1e-6 is far above it while still conclusive
            assert!(space.distance(&img, &x) < 1e-6, "{:?}", id);

            let p = rng_point(&space, 2.0, &mut rng);
            let q = rng_point(&space, 2.0, &mut rng);
            let d0 = space.distance(&p, &q);
            let d1 = space.distance(&space.apply(&iso, &p), &space.apply(&iso, &q));
            assert!((d0 - d1).abs() < 1e-8, "{:?}: {d0} vs {d1}", id);

            // inverse really inverts
            let inv = space.invert(&iso);
            let back = space.apply(&inv, &space.apply(&iso, &p));
            assert!(space.distance(&back, &p) < 1e-6);
        }
    }
}

#[test]
fn exp_log_roundtrip_at_general_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for id in SPACES {
        let space = id.space();
        for _ in 0..25 {
            let x = rng_point(&space, 2.5, &mut rng);
            let xi = rng_unit(space.dim(), &mut rng) * rng.gen_range(0.0..2.0);
            let y = space.exp_at(&x, &xi);
            assert!((space.distance(&x, &y) - xi.norm()).abs() < 1e-8);
            let back = space.log_at(&x, &y);
            assert!((back - &xi).norm() < 1e-7 * (1.0 + xi.norm()), "{:?}", id);
        }
    }
}

#[test]
fn octonion_plane_matrix_and_vector_models_agree() {
    let space = SpaceId::OH2.space();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let x = rng_point(&space, 3.0, &mut rng);
        let y = rng_point(&space, 3.0, &mut rng);
        let (t1, a1, b1) = match &x {
            Point::CayVec { theta, a, b } => (*theta, *a, *b),
            _ => unreachable!(),
        };
        let (t2, a2, b2) = match &y {
            Point::CayVec { theta, a, b } => (*theta, *a, *b),
            _ => unreachable!(),
        };
        // full matrix route: build both idempotents, Jordan-multiply, trace
        let xm = jordan::from_vector(t1, &a1, &b1);
        let ym = jordan::from_vector(t2, &a2, &b2);
        let tr = xm.jordan(&ym).trace();
        let d_mat = 0.5 * rank1_core::spaces::acosh_stable(2.0 * tr - 1.0);
        let d_vec = space.distance(&x, &y);
        assert!((d_mat - d_vec).abs() < 1e-9 * (1.0 + d_vec));
    }
}

#[test]
fn busemann_closed_form_matches_limit_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for id in SPACES {
        let space = id.space();
        for _ in 0..40 {
            let x = rng_point(&space, 3.0, &mut rng);
            let s = rng_unit(space.dim(), &mut rng);
            let phi = busemann(&space, &s, &x);
            let oracle = busemann_limit(&space, &s, &x, 30.0);
            assert!((phi - oracle).abs() < 1e-8, "{:?}: {phi} vs {oracle}", id);
            // basepoint normalization
            assert!(busemann(&space, &s, &space.basepoint()).abs() < 1e-14);
        }
    }
}

#[test]
fn busemann_gradient_is_unit_and_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for id in SPACES {
        let space = id.space();
        for _ in 0..15 {
            let x = rng_point(&space, 2.0, &mut rng);
            let s = rng_unit(space.dim(), &mut rng);
            let g = grad_busemann(&space, &s, &x);
            assert!((g.norm() - 1.0).abs() < 1e-8, "{:?}", id);
            let h = 1e-5;
            for _ in 0..4 {
                let xi = rng_unit(space.dim(), &mut rng);
                let fp = busemann(&space, &s, &space.exp_at(&x, &(&xi * h)));
                let fm = busemann(&space, &s, &space.exp_at(&x, &(&xi * -h)));
                let fd = (fp - fm) / (2.0 * h);
                assert!((fd - g.dot(&xi)).abs() < 1e-6, "{:?}", id);
            }
        }
    }
}

#[test]
fn pulled_nodes_have_frame_aligned_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for id in SPACES {
        let space = id.space();
        let set = SampleSet::antithetic(space.dim(), 16, 99);
        let x = rng_point(&space, 2.0, &mut rng);
        let nodes = rank1_core::quadrature::pull_to(&space, &x, &set);
        for (v, s) in set.dirs.iter().zip(nodes.boundary.iter()) {
            let g = grad_busemann(&space, s, &x);
            assert!((g - v).norm() < 1e-8, "{:?}", id);
        }
    }
}

#[test]
fn curvature_is_pinched_and_exact_on_structure_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for id in SPACES {
        let space = id.space();
        let d = space.d();
        // plane inside one structure line: curvature −4
        let x = rng_point(&space, 1.5, &mut rng);
        let e0 = DVector::from_fn(space.dim(), |i, _| if i == 0 { 1.0 } else { 0.0 });
        let e1 = DVector::from_fn(space.dim(), |i, _| if i == 1 { 1.0 } else { 0.0 });
        let k4 = sectional_curvature_probe(&space, &x, &e0, &e1, 1e-2);
        assert!((k4 + 4.0).abs() < 1e-3, "{:?}: {k4}", id);
        // plane across components: curvature −1
        let ed = DVector::from_fn(space.dim(), |i, _| if i == d { 1.0 } else { 0.0 });
        let k1 = sectional_curvature_probe(&space, &x, &e0, &ed, 1e-2);
        assert!((k1 + 1.0).abs() < 1e-3, "{:?}: {k1}", id);
        // random planes stay pinched
        for _ in 0..20 {
            let v = rng_unit(space.dim(), &mut rng);
            let w = rng_unit(space.dim(), &mut rng);
            if (v.dot(&w)).abs() > 0.99 {
                continue;
            }
            let k = sectional_curvature_probe(&space, &x, &v, &w, 1e-2);
            assert!((-4.05..=-0.95).contains(&k), "{:?}: {k}", id);
        }
    }
}

#[test]
fn hinge_laws_hold_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for id in SPACES {
        let space = id.space();
        let d = space.d();
        for _ in 0..40 {
            let t1: f64 = rng.gen_range(0.1..1.5);
            let t2: f64 = rng.gen_range(0.1..1.5);
            // directions in the same structure line through component 0
            let mut a = Oct::ZERO;
            let mut b = Oct::ZERO;
            for t in 0..d {
                a.0[t] = rng.gen_range(-1.0..1.0);
                b.0[t] = rng.gen_range(-1.0..1.0);
            }
            let (a, b) = (a.scale(1.0 / a.norm()), b.scale(1.0 / b.norm()));
            let mk = |o: &Oct| {
                let mut v = DVector::zeros(space.dim());
                for t in 0..d {
                    v[t] = o.0[t];
                }
                v
            };
            let x = space.exp_basepoint(&(mk(&a) * t1));
            let y = space.exp_basepoint(&(mk(&b) * t2));
            let dd = space.distance(&x, &y);
            let want = (2.0 * t1).cosh() * (2.0 * t2).cosh()
                - (2.0 * t1).sinh() * (2.0 * t2).sinh() * a.inner(&b);
            assert!(
                ((2.0 * dd).cosh() - want).abs() < 1e-9 * want.abs().max(1.0),
                "{:?}",
                id
            );
            // right-angle hinge across components: curvature −1 law
            let mut w = DVector::zeros(space.dim());
            w[d] = 1.0;
            let z = space.exp_basepoint(&(w * t2));
            let dz = space.distance(&x, &z);
            assert!(
                (dz.cosh() - t1.cosh() * t2.cosh()).abs() < 1e-10,
                "{:?}",
                id
            );
        }
    }
}

#[test]
fn cayley_projector_is_a_projector_containing_its_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..100 {
        let v = rng_unit(16, &mut rng);
        let p = cayley_projector(&v);
        assert!((&p * &v - &v).norm() < 1e-12);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((&p - p.transpose()).norm() < 1e-12);
        assert!((p.trace() - 8.0).abs() < 1e-10);
    }
}

#[test]
fn axs_spectrum_is_two_and_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for id in SPACES {
        let space = id.space();
        let g = rng_unit(space.dim(), &mut rng);
        let a = axs_operator(&space, &g);
        assert!((a.trace() - (space.dim() + space.d()) as f64).abs() < 1e-10);
        let eig = nalgebra::SymmetricEigen::new(a.clone()).eigenvalues;
        let mut twos = 0;
        let mut ones = 0;
        for l in eig.iter() {
            if (l - 2.0).abs() < 1e-9 {
                twos += 1;
            } else if (l - 1.0).abs() < 1e-9 {
                ones += 1;
            }
        }
        assert_eq!(twos, space.d(), "{:?}", id);
        assert_eq!(ones, space.dim() - space.d(), "{:?}", id);
    }
}

#[test]
fn boundary_action_matches_far_point_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for id in [SpaceId::CH2, SpaceId::HH2] {
        let space = id.space();
        for _ in 0..20 {
            let x = rng_point(&space, 2.5, &mut rng);
            let s = rng_unit(space.dim(), &mut rng);
            // T is capped by conditioning of the projective representative
            // (entries ~e^T, so q-values carry ~e^{2T} eps of noise)
            let iso = space.transvection_to(&x);
            let exact = space.apply_boundary(&iso, &s);
            let far = space.apply(&iso, &space.exp_basepoint(&(&s * 12.0)));
            let mut approx = space.log_basepoint(&far);
            approx /= approx.norm();
            assert!((exact - approx).norm() < 1e-8, "{:?}", id);
        }
    }
}

#[test]
fn antithetic_sets_are_paired_and_normalized() {
    let set = SampleSet::antithetic(8, 64, 5);
    assert_eq!(set.len(), 64);
    assert!((set.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    for k in 0..32 {
        assert!((&set.dirs[2 * k] + &set.dirs[2 * k + 1]).norm() < 1e-15);
        assert!((set.dirs[2 * k].norm() - 1.0).abs() < 1e-12);
    }
    // determinism
    let again = SampleSet::antithetic(8, 64, 5);
    for (a, b) in set.dirs.iter().zip(again.dirs.iter()) {
        assert_eq!(a, b);
    }
}
