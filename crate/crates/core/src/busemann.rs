//! Busemann functions, their gradients and the visual densities.
//!
//! Primary evaluators are closed-form:
//!   - projective models: Φ_s(x) = ln |q(u_x, (1, s))|,
//!   - octonion plane:    Φ_s(x) = ½ ln B(x, s) with B the rank-one trace
//!     pairing against the null vector of s.
//!
//! A large-t oracle (distance to a far point on the ray minus the parameter)
//! backs both up in tests. Gradients come from the frame transport: in the
//! coordinates at x, grad Φ_s is minus the unit vector pointing at s.

use crate::algebra::Oct;
use crate::spaces::{herm_q, Point, Space};
use nalgebra::{DMatrix, DVector};

/// Closed-form Busemann function Φ_s(x), normalized by Φ_s(x0) = 0.
pub fn busemann(space: &Space, s: &DVector<f64>, x: &Point) -> f64 {
    match x {
        Point::Proj(u) => {
            let comps = space.coords_to_components(s);
            let mut zeta = vec![Oct::one()];
            zeta.extend(comps);
            herm_q(u, &zeta).norm().ln()
        }
        Point::CayVec { theta, a, b } => {
            let c = Oct::from_slice(&s.as_slice()[0..8]);
            let d = Oct::from_slice(&s.as_slice()[8..16]);
            let bb = theta * theta - 2.0 * theta * (a.inner(&c) + b.inner(&d))
                + a.norm_sq() * c.norm_sq()
                + b.norm_sq() * d.norm_sq()
                + 2.0 * a.conj().mul(b).inner(&c.conj().mul(&d));
            0.5 * bb.ln()
        }
    }
}

/// Limit-definition oracle: d(x, γ_s(t)) − t at a large parameter t.
pub fn busemann_limit(space: &Space, s: &DVector<f64>, x: &Point, t: f64) -> f64 {
    let far = space.exp_basepoint(&(s * t));
    space.distance(x, &far) - t
}

/// Gradient of Φ_s at x in the frame coordinates at x (unit norm).
pub fn grad_busemann(space: &Space, s: &DVector<f64>, x: &Point) -> DVector<f64> {
    let inv = space.invert(&space.transvection_to(x));
    -space.apply_boundary(&inv, s)
}

/// Visual density λ(x, s) = e^{−(dn+d−2) Φ_s(x)} of dμ_x against ds.
pub fn visual_density(space: &Space, s: &DVector<f64>, x: &Point) -> f64 {
    (-(space.entropy() as f64) * busemann(space, s, x)).exp()
}

/// The d right-multiplication structure matrices J_0 = id, J_t = (· e_t) on
/// R^{dn}, block-diagonal over the n algebra components. (C and H only.)
pub fn j_matrices(space: &Space) -> Vec<DMatrix<f64>> {
    assert!(!space.is_octonionic());
    let d = space.d();
    let dn = space.dim();
    let mut out = Vec::with_capacity(d);
    for t in 0..d {
        let r = crate::algebra::right_mul_matrix(&Oct::basis(t));
        let mut m = DMatrix::zeros(dn, dn);
        for l in 0..space.n {
            for i in 0..d {
                for j in 0..d {
                    m[(l * d + i, l * d + j)] = r[(i, j)];
                }
            }
        }
        out.push(m);
    }
    out
}

/// Orthonormal basis (as a 16x8 matrix) of the Cayley line through a nonzero
/// v = (a, b) in O²: the lines O·(1, a⁻¹b), resp. O·(b⁻¹a, 1) when |b| > |a|.
pub fn cayley_basis(v: &DVector<f64>) -> DMatrix<f64> {
    let a = Oct::from_slice(&v.as_slice()[0..8]);
    let b = Oct::from_slice(&v.as_slice()[8..16]);
    let mut f = DMatrix::zeros(16, 8);
    if a.norm_sq() >= b.norm_sq() {
        let c = a.inverse().mul(&b);
        let z = 1.0 / (1.0 + c.norm_sq()).sqrt();
        for t in 0..8 {
            let lo = Oct::basis(t).mul(&c);
            f[(t, t)] = z;
            for i in 0..8 {
                f[(8 + i, t)] = z * lo.0[i];
            }
        }
    } else {
        let c = b.inverse().mul(&a);
        let z = 1.0 / (1.0 + c.norm_sq()).sqrt();
        for t in 0..8 {
            let hi = Oct::basis(t).mul(&c);
            f[(8 + t, t)] = z;
            for i in 0..8 {
                f[(i, t)] = z * hi.0[i];
            }
        }
    }
    f
}

/// Orthogonal projector onto the Cayley line of v.
pub fn cayley_projector(v: &DVector<f64>) -> DMatrix<f64> {
    let f = cayley_basis(v);
    &f * f.transpose()
}

/// Closed-form orthogonal projection of w onto the Cayley line of v, without
/// forming a basis: for the line {(λ, λc)}, π(u, y) = (λ*, λ*c) with
/// λ* = (u + y c̄)/(1 + |c|²); mirrored when the line is steep (|b| > |a|).
pub fn cayley_project(v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    let a = Oct::from_slice(&v.as_slice()[0..8]);
    let b = Oct::from_slice(&v.as_slice()[8..16]);
    let u = Oct::from_slice(&w.as_slice()[0..8]);
    let y = Oct::from_slice(&w.as_slice()[8..16]);
    let mut out = DVector::zeros(16);
    if a.norm_sq() >= b.norm_sq() {
        let c = a.inverse().mul(&b);
        let lam = u.add(&y.mul(&c.conj())).scale(1.0 / (1.0 + c.norm_sq()));
        let lo = lam.mul(&c);
        for i in 0..8 {
            out[i] = lam.0[i];
            out[8 + i] = lo.0[i];
        }
    } else {
        let c = b.inverse().mul(&a);
        let mu = y.add(&u.mul(&c.conj())).scale(1.0 / (1.0 + c.norm_sq()));
        let hi = mu.mul(&c);
        for i in 0..8 {
            out[i] = hi.0[i];
            out[8 + i] = mu.0[i];
        }
    }
    out
}

/// Closed-form Hessian of e^{2Φ_s}/2 at x, in the frame coordinates at x:
/// e^{2Φ}(id + Σ_t (J_t g)(J_t g)ᵀ) over C/H, e^{2Φ}(id + Π_{Cay(g)}) over O,
/// where g = grad Φ_s(x).
pub fn hessian_half_exp2(space: &Space, s: &DVector<f64>, x: &Point) -> DMatrix<f64> {
    let g = grad_busemann(space, s, x);
    let phi = busemann(space, s, x);
    let dn = space.dim();
    let mut m = DMatrix::identity(dn, dn);
    if space.is_octonionic() {
        m += cayley_projector(&g);
    } else {
        for j in j_matrices(space) {
            let jg = &j * &g;
            m += &jg * jg.transpose();
        }
    }
    m * (2.0 * phi).exp()
}

/// The structure operator A_{x,s} = id + (projection onto the J-orbit /
/// Cayley line of grad Φ_s(x)); eigenvalues are 2 (d-fold) and 1 (dn−d).
pub fn axs_operator(space: &Space, grad: &DVector<f64>) -> DMatrix<f64> {
    let dn = space.dim();
    let mut m = DMatrix::identity(dn, dn);
    if space.is_octonionic() {
        m += cayley_projector(grad);
    } else {
        for j in j_matrices(space) {
            let jg = &j * grad;
            m += &jg * jg.transpose();
        }
    }
    m
}

/// Sectional curvature probe from the quadrilateral defect of tiny geodesic
/// hinges, with one Richardson step: K(t) = 3(t²|v−w|² − d²)/t⁴ for
/// orthonormal v, w, and K ≈ (4K(t/2) − K(t))/3.
pub fn sectional_curvature_probe(
    space: &Space,
    x: &Point,
    v: &DVector<f64>,
    w: &DVector<f64>,
    t: f64,
) -> f64 {
    let v = v / v.norm();
    let mut w = w - &v * v.dot(w);
    w /= w.norm();
    let k_at = |h: f64| {
        let p = space.exp_at(x, &(&v * h));
        let q = space.exp_at(x, &(&w * h));
        let d = space.distance(&p, &q);
        3.0 * (2.0 * h * h - d * d) / (h * h * h * h)
    };
    (4.0 * k_at(t / 2.0) - k_at(t)) / 3.0
}
