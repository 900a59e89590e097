//! Boundary fields: real functions on the sphere at infinity, kept in
//! closed form so they can be evaluated at arbitrary boundary points (the
//! pulled quadrature nodes move with the evaluation point).

use crate::busemann;
use crate::spaces::{Point, Space};
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub enum Field {
    Const(f64),
    /// s ↦ Φ_s(x): the canonical embedding of a point.
    Embed(Point),
    /// Smooth bump amp·exp(−(1 − ⟨s, c⟩)/width²) around a boundary point c.
    Bump {
        center: DVector<f64>,
        width: f64,
        amp: f64,
    },
    /// Linear coordinate function ⟨s, u⟩.
    Linear(DVector<f64>),
    Scale(f64, Box<Field>),
    Sum(Vec<Field>),
    /// The geodesic of densities through `base` at parameter t, anchored at
    /// the point x: φ_t(s) = Φ_s(x) − ln(1 − t + t·e^{(dn+d)(Φ_s(x) − φ(s))})/(dn+d).
    Interp {
        base: Box<Field>,
        x: Point,
        t: f64,
    },
}

impl Field {
    pub fn eval(&self, space: &Space, s: &DVector<f64>) -> f64 {
        match self {
            Field::Const(c) => *c,
            Field::Embed(x) => busemann::busemann(space, s, x),
            Field::Bump { center, width, amp } => {
                let u = 1.0 - s.dot(center);
                amp * (-u / (width * width)).exp()
            }
            Field::Linear(u) => s.dot(u),
            Field::Scale(t, f) => t * f.eval(space, s),
            Field::Sum(fs) => fs.iter().map(|f| f.eval(space, s)).sum(),
            Field::Interp { base, x, t } => {
                let m = (space.dim() + space.d()) as f64;
                let phi_x = busemann::busemann(space, s, x);
                let arg = 1.0 - t + t * (m * (phi_x - base.eval(space, s))).exp();
                assert!(arg > 0.0, "interpolation left the density cone");
                phi_x - arg.ln() / m
            }
        }
    }

    pub fn eval_nodes(&self, space: &Space, nodes: &[DVector<f64>]) -> Vec<f64> {
        nodes.iter().map(|s| self.eval(space, s)).collect()
    }

    pub fn plus(self, other: Field) -> Field {
        Field::Sum(vec![self, other])
    }
}

/// A reproducible random smooth perturbation: a sum of `k` bumps with
/// centers uniform on the sphere, widths in [0.6, 1.2] and signed
/// amplitudes of size `amp`.
pub fn random_bumps(dim: usize, k: usize, amp: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::with_capacity(k);
    for _ in 0..k {
        let mut c = DVector::zeros(dim);
        for v in c.iter_mut() {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            *v = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
        c /= c.norm();
        let width = rng.gen_range(0.6..1.2);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        parts.push(Field::Bump {
            center: c,
            width,
            amp: sign * amp,
        });
    }
    Field::Sum(parts)
}

/// A random field in the admissible ball: Φ(y) + small smooth noise, with y
/// drawn in the metric ball of the given radius around the basepoint.
pub fn random_admissible(space: &Space, radius: f64, amp: f64, seed: u64) -> (Field, Point) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15));
    let dn = space.dim();
    let mut v = DVector::zeros(dn);
    for c in v.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    let nn = v.norm();
    if nn > 1e-12 {
        let r = radius * rng.gen_range(0.0f64..1.0).powf(1.0 / dn as f64);
        v *= r / nn;
    }
    let y = space.exp_basepoint(&v);
    let noise = random_bumps(dn, 4, amp, seed);
    (Field::Embed(y.clone()).plus(noise), y)
}
