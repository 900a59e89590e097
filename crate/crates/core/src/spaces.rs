//! Model geometry of the negatively curved rank-one symmetric spaces over
//! C, H (projective null-quadric model) and O (vector / Jordan-matrix model
//! of the hyperbolic plane), normalized to sectional curvature in [-4, -1].
//!
//! All tangent data is carried in flat coordinates R^{dn} attached to the
//! basepoint: the tangent space at any point x is identified with R^{dn}
//! through the transvection Ψ_x along [x0, x], and boundary-at-infinity
//! points are stored as the unit vector at x0 pointing at them. This keeps
//! every downstream computation (Busemann gradients, operator assembly,
//! Jacobians) in one fixed orthonormal frame.

use crate::algebra::{Algebra, Oct};
use crate::jordan;
use nalgebra::DVector;

/// Named model spaces exposed by the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SpaceId {
    CH2,
    CH3,
    HH2,
    OH2,
}

impl SpaceId {
    pub fn space(self) -> Space {
        match self {
            SpaceId::CH2 => Space::new(Algebra::C, 2),
            SpaceId::CH3 => Space::new(Algebra::C, 3),
            SpaceId::HH2 => Space::new(Algebra::H, 2),
            SpaceId::OH2 => Space::new(Algebra::O, 2),
        }
    }

    pub fn parse(s: &str) -> Option<SpaceId> {
        match s {
            "CH2" => Some(SpaceId::CH2),
            "CH3" => Some(SpaceId::CH3),
            "HH2" => Some(SpaceId::HH2),
            "OH2" => Some(SpaceId::OH2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceId::CH2 => "CH2",
            SpaceId::CH3 => "CH3",
            SpaceId::HH2 => "HH2",
            SpaceId::OH2 => "OH2",
        }
    }
}

/// Descriptor of a rank-one space: base algebra and (quotient) rank n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Space {
    pub field: Algebra,
    pub n: usize,
}

impl Space {
    pub fn new(field: Algebra, n: usize) -> Space {
        match field {
            Algebra::C | Algebra::H => assert!(n >= 2),
            Algebra::O => assert_eq!(n, 2, "the octonion plane is the only O-model"),
            Algebra::R => panic!("real hyperbolic space is out of scope"),
        }
        Space { field, n }
    }

    /// Real dimension d of the base algebra.
    pub fn d(&self) -> usize {
        self.field.dim()
    }

    /// Real dimension dn of the space.
    pub fn dim(&self) -> usize {
        self.d() * self.n
    }

    /// Volume entropy dn + d - 2 of the curvature-normalized metric.
    pub fn entropy(&self) -> usize {
        self.dim() + self.d() - 2
    }

    pub fn is_octonionic(&self) -> bool {
        self.field == Algebra::O
    }

    pub fn name(&self) -> String {
        let tag = match self.field {
            Algebra::R => "RH",
            Algebra::C => "CH",
            Algebra::H => "HH",
            Algebra::O => "OH",
        };
        format!("{}{}", tag, self.n)
    }
}

/// A point of the model.
///
/// Projective points are stored as an ambient representative u in K^{n+1}
/// with q(u,u) = 1, gauged so u_0 is real and positive. Octonion-plane
/// points live in the vector model {θ² − |a|² − |b|² = 1, θ ≥ 1}.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Proj(Vec<Oct>),
    CayVec { theta: f64, a: Oct, b: Oct },
}

/// An isometry usable as a frame transport: the transvection from the
/// basepoint to a target point, or its inverse.
#[derive(Clone, Debug)]
pub enum Isometry {
    /// q-unitary matrix over C or H (entries act on the left).
    Matrix(Vec<Vec<Oct>>),
    /// σ_m ∘ σ_{x0} on the octonion plane (m = midpoint of [x0, x]);
    /// `inverse` selects σ_{x0} ∘ σ_m instead.
    JordanPair { mid: Point, inverse: bool },
}

/// Hermitian form q(u, w) = ū_0 w_0 − Σ ū_j w_j on K^{n+1}.
pub fn herm_q(u: &[Oct], w: &[Oct]) -> Oct {
    let mut acc = u[0].conj().mul(&w[0]);
    for j in 1..u.len() {
        acc = acc.sub(&u[j].conj().mul(&w[j]));
    }
    acc
}

/// acosh with a series branch that stays accurate for arguments near 1.
pub fn acosh_stable(x: f64) -> f64 {
    let u = x - 1.0;
    if u <= 0.0 {
        return 0.0;
    }
    if u < 1e-4 {
        // acosh(1+u) = sqrt(2u)(1 - u/12 + 3u²/160 - 5u³/896 + ...)
        (2.0 * u).sqrt() * (1.0 - u / 12.0 + 3.0 * u * u / 160.0 - 5.0 * u * u * u / 896.0)
    } else {
        x.acosh()
    }
}

impl Space {
    pub fn basepoint(&self) -> Point {
        if self.is_octonionic() {
            Point::CayVec {
                theta: 1.0,
                a: Oct::ZERO,
                b: Oct::ZERO,
            }
        } else {
            let mut u = vec![Oct::ZERO; self.n + 1];
            u[0] = Oct::one();
            Point::Proj(u)
        }
    }

    /// Split flat coordinates R^{dn} into n algebra components.
    pub fn coords_to_components(&self, xi: &DVector<f64>) -> Vec<Oct> {
        let d = self.d();
        (0..self.n)
            .map(|l| Oct::from_slice(&xi.as_slice()[l * d..(l + 1) * d]))
            .collect()
    }

    pub fn components_to_coords(&self, comps: &[Oct]) -> DVector<f64> {
        let d = self.d();
        let mut v = DVector::zeros(self.dim());
        for (l, c) in comps.iter().enumerate() {
            for t in 0..d {
                v[l * d + t] = c.0[t];
            }
        }
        v
    }

    /// Restore the gauge of a projective representative: q(u,u) = 1 and u_0
    /// real positive. Panics on non-spacelike representatives.
    pub fn normalize_point(&self, p: &Point) -> Point {
        match p {
            Point::Proj(u) => {
                let qv = herm_q(u, u).re();
                let mag: f64 = u.iter().map(|c| c.norm_sq()).sum();
                assert!(
                    qv > -1e-6 * mag,
                    "representative is not a point of the model"
                );
                // For far representatives q(u,u) is pure cancellation noise;
                // the unit rescale would be garbage, and nothing downstream
                // (directions, ratios) depends on it. Only fix small drift.
                let s = if (qv - 1.0).abs() < 0.5 {
                    qv.sqrt()
                } else {
                    1.0
                };
                let u: Vec<Oct> = u.iter().map(|c| c.scale(1.0 / s)).collect();
                let lam = u[0].conj().scale(1.0 / u[0].norm().max(1e-300));
                Point::Proj(u.iter().map(|c| c.mul(&lam)).collect())
            }
            Point::CayVec { theta, a, b } => {
                let msq = theta * theta - a.norm_sq() - b.norm_sq();
                // Same cancellation guard as above.
                let m = if (msq - 1.0).abs() < 0.5 {
                    msq.sqrt()
                } else {
                    1.0
                };
                Point::CayVec {
                    theta: theta / m,
                    a: a.scale(1.0 / m),
                    b: b.scale(1.0 / m),
                }
            }
        }
    }

    pub fn exp_basepoint(&self, xi: &DVector<f64>) -> Point {
        let r = xi.norm();
        if r < 1e-300 {
            return self.basepoint();
        }
        let dir = xi / r;
        if self.is_octonionic() {
            let a = Oct::from_slice(&dir.as_slice()[0..8]).scale(r.sinh());
            let b = Oct::from_slice(&dir.as_slice()[8..16]).scale(r.sinh());
            Point::CayVec {
                theta: r.cosh(),
                a,
                b,
            }
        } else {
            let comps = self.coords_to_components(&dir);
            let mut u = vec![Oct::ZERO; self.n + 1];
            u[0] = Oct::real(r.cosh());
            for (l, c) in comps.iter().enumerate() {
                u[l + 1] = c.scale(r.sinh());
            }
            Point::Proj(u)
        }
    }

    pub fn log_basepoint(&self, p: &Point) -> DVector<f64> {
        match p {
            Point::CayVec { theta, a, b } => {
                let t = acosh_stable(*theta);
                let mut v = DVector::zeros(16);
                let nn = (a.norm_sq() + b.norm_sq()).sqrt();
                if nn < 1e-300 {
                    return v;
                }
                for i in 0..8 {
                    v[i] = a.0[i] / nn;
                    v[8 + i] = b.0[i] / nn;
                }
                v * t
            }
            Point::Proj(_) => {
                let pn = self.normalize_point(p);
                let u = match &pn {
                    Point::Proj(u) => u,
                    _ => unreachable!(),
                };
                let t = acosh_stable(u[0].re());
                let mut comps = vec![Oct::ZERO; self.n];
                let s: f64 = u[1..].iter().map(|c| c.norm_sq()).sum::<f64>().sqrt();
                if s < 1e-300 {
                    return DVector::zeros(self.dim());
                }
                for l in 0..self.n {
                    comps[l] = u[l + 1].scale(1.0 / s);
                }
                self.components_to_coords(&comps) * t
            }
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match (x, y) {
            (Point::Proj(u), Point::Proj(w)) => acosh_stable(herm_q(u, w).norm()),
            (
                Point::CayVec { theta, a, b },
                Point::CayVec {
                    theta: t2,
                    a: c,
                    b: d,
                },
            ) => {
                let tr = trace_pairing(*theta, a, b, *t2, c, d);
                0.5 * acosh_stable(2.0 * tr - 1.0)
            }
            _ => panic!("mixed point models"),
        }
    }

    /// Transvection Ψ_x carrying the basepoint (and its frame) to x.
    pub fn transvection_to(&self, x: &Point) -> Isometry {
        match x {
            Point::Proj(_) => {
                let xn = self.normalize_point(x);
                let u = match &xn {
                    Point::Proj(u) => u.clone(),
                    _ => unreachable!(),
                };
                let t = acosh_stable(u[0].re());
                let (ch, sh) = (t.cosh(), t.sinh());
                let mut v = vec![Oct::ZERO; self.n];
                if sh > 1e-150 {
                    let s: f64 = u[1..].iter().map(|c| c.norm_sq()).sum::<f64>().sqrt();
                    for l in 0..self.n {
                        v[l] = u[l + 1].scale(1.0 / s);
                    }
                }
                let mut m = vec![vec![Oct::ZERO; self.n + 1]; self.n + 1];
                m[0][0] = Oct::real(ch);
                for j in 0..self.n {
                    m[0][j + 1] = v[j].conj().scale(sh);
                    m[j + 1][0] = v[j].scale(sh);
                    for i in 0..self.n {
                        let vv = v[i].mul(&v[j].conj()).scale(ch - 1.0);
                        m[i + 1][j + 1] = if i == j { vv.add(&Oct::one()) } else { vv };
                    }
                }
                Isometry::Matrix(m)
            }
            Point::CayVec { .. } => {
                let xi = self.log_basepoint(x);
                let mid = self.exp_basepoint(&(xi * 0.5));
                Isometry::JordanPair {
                    mid,
                    inverse: false,
                }
            }
        }
    }

    pub fn invert(&self, iso: &Isometry) -> Isometry {
        match iso {
            Isometry::Matrix(m) => {
                // inverse of a q-unitary matrix: η M* η with η = diag(1,−I)
                let k = m.len();
                let mut inv = vec![vec![Oct::ZERO; k]; k];
                for i in 0..k {
                    for j in 0..k {
                        let s = if (i == 0) ^ (j == 0) { -1.0 } else { 1.0 };
                        inv[i][j] = m[j][i].conj().scale(s);
                    }
                }
                Isometry::Matrix(inv)
            }
            Isometry::JordanPair { mid, inverse } => Isometry::JordanPair {
                mid: mid.clone(),
                inverse: !inverse,
            },
        }
    }

    pub fn apply(&self, iso: &Isometry, p: &Point) -> Point {
        match iso {
            Isometry::Matrix(m) => {
                let u = match p {
                    Point::Proj(u) => u,
                    _ => panic!("matrix isometry on non-projective point"),
                };
                let k = m.len();
                let mut out = vec![Oct::ZERO; k];
                for (i, row) in m.iter().enumerate().take(k) {
                    let mut acc = Oct::ZERO;
                    for (j, mij) in row.iter().enumerate().take(k) {
                        acc = acc.add(&mij.mul(&u[j]));
                    }
                    out[i] = acc;
                }
                self.normalize_point(&Point::Proj(out))
            }
            Isometry::JordanPair { mid, inverse } => {
                let refl_base = |q: &Point| match q {
                    Point::CayVec { theta, a, b } => Point::CayVec {
                        theta: *theta,
                        a: a.scale(-1.0),
                        b: b.scale(-1.0),
                    },
                    _ => panic!("jordan isometry on non-octonionic point"),
                };
                let refl_mid = |q: &Point| {
                    let (tm, am, bm) = match mid {
                        Point::CayVec { theta, a, b } => (*theta, *a, *b),
                        _ => unreachable!(),
                    };
                    let (tq, aq, bq) = match q {
                        Point::CayVec { theta, a, b } => (*theta, *a, *b),
                        _ => panic!("jordan isometry on non-octonionic point"),
                    };
                    let xm = jordan::from_vector(tm, &am, &bm);
                    let xq = jordan::from_vector(tq, &aq, &bq);
                    let img = jordan::point_symmetry(&xm, &xq);
                    let (t, a, b) = jordan::to_vector(&img);
                    self.normalize_point(&Point::CayVec { theta: t, a, b })
                };
                if *inverse {
                    refl_base(&refl_mid(p))
                } else {
                    refl_mid(&refl_base(p))
                }
            }
        }
    }

    /// Action of an isometry on the boundary at infinity. Boundary points
    /// are unit vectors at the basepoint; for C/H this is the exact action
    /// on null lines, for O a far-point evaluation along the ray.
    pub fn apply_boundary(&self, iso: &Isometry, s: &DVector<f64>) -> DVector<f64> {
        match iso {
            Isometry::Matrix(m) => {
                let comps = self.coords_to_components(s);
                let mut zeta = vec![Oct::one()];
                zeta.extend(comps);
                let k = m.len();
                let mut out = vec![Oct::ZERO; k];
                for (i, row) in m.iter().enumerate().take(k) {
                    let mut acc = Oct::ZERO;
                    for (j, mij) in row.iter().enumerate().take(k) {
                        acc = acc.add(&mij.mul(&zeta[j]));
                    }
                    out[i] = acc;
                }
                let lam = out[0].inverse();
                let comps: Vec<Oct> = out[1..].iter().map(|c| c.mul(&lam)).collect();
                let mut v = self.components_to_coords(&comps);
                let nn = v.norm();
                v /= nn;
                v
            }
            Isometry::JordanPair { .. } => {
                const FAR_T: f64 = 35.0;
                let far = self.exp_basepoint(&(s * FAR_T));
                let img = self.apply(iso, &far);
                let mut v = self.log_basepoint(&img);
                let nn = v.norm();
                v /= nn;
                v
            }
        }
    }

    pub fn geodesic(&self, x: &Point, v: &DVector<f64>, t: f64) -> Point {
        self.apply(&self.transvection_to(x), &self.exp_basepoint(&(v * t)))
    }

    pub fn exp_at(&self, x: &Point, xi: &DVector<f64>) -> Point {
        self.apply(&self.transvection_to(x), &self.exp_basepoint(xi))
    }

    pub fn log_at(&self, x: &Point, y: &Point) -> DVector<f64> {
        let inv = self.invert(&self.transvection_to(x));
        self.log_basepoint(&self.apply(&inv, y))
    }

    /// Forward endpoint on the boundary of the geodesic t ↦ exp_x(t v).
    pub fn boundary_endpoint(&self, x: &Point, v: &DVector<f64>) -> DVector<f64> {
        self.apply_boundary(&self.transvection_to(x), v)
    }
}

/// tr(X_x ∘ X_y) for octonion-plane vectors, in closed form.
pub fn trace_pairing(t1: f64, a: &Oct, b: &Oct, t2: f64, c: &Oct, d: &Oct) -> f64 {
    t1 * t1 * t2 * t2 - 2.0 * t1 * t2 * (a.inner(c) + b.inner(d))
        + a.norm_sq() * c.norm_sq()
        + b.norm_sq() * d.norm_sq()
        + 2.0 * a.conj().mul(b).inner(&c.conj().mul(d))
}
