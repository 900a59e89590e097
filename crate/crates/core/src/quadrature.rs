//! Deterministic antithetic Monte Carlo quadrature on the boundary sphere
//! S^{dn-1}, and its pullbacks: the conditional measures μ_x are integrated
//! as uniform averages over the transported frame directions at x, so the
//! visual density never enters operator assembly.

use crate::busemann;
use crate::spaces::{Point, Space};
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform nodes on S^{dim-1} in antithetic pairs, with equal weights
/// summing to one. Bit-reproducible for a fixed (dim, n, seed).
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub dim: usize,
    pub dirs: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    pub seed: u64,
}

impl SampleSet {
    pub fn antithetic(dim: usize, n: usize, seed: u64) -> SampleSet {
        assert!(
            n >= 2 && n.is_multiple_of(2),
            "antithetic sets need an even size"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dirs = Vec::with_capacity(n);
        for _ in 0..n / 2 {
            let v = loop {
                let mut v = DVector::zeros(dim);
                for c in v.iter_mut() {
                    // Box-Muller keeps us independent of distribution crates.
                    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.gen_range(0.0..1.0);
                    *c = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                }
                let nn = v.norm();
                if nn > 1e-6 {
                    v /= nn;
                    break v;
                }
            };
            dirs.push(-&v);
            dirs.push(v);
        }
        let w = 1.0 / n as f64;
        SampleSet {
            dim,
            weights: vec![w; n],
            dirs,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Plain quadrature of per-node values against ds.
    pub fn integrate(&self, vals: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(vals.iter())
            .map(|(w, v)| w * v)
            .sum()
    }

    /// RFC 4180 serialization: header then one row per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("index,weight");
        for k in 0..self.dim {
            out.push_str(&format!(",v{k}"));
        }
        out.push_str("\r\n");
        for (i, (d, w)) in self.dirs.iter().zip(self.weights.iter()).enumerate() {
            out.push_str(&format!("{i},{w}"));
            for c in d.iter() {
                out.push_str(&format!(",{c}"));
            }
            out.push_str("\r\n");
        }
        out
    }
}

/// The sample set pulled to a point x: node i of μ_x is the backward
/// endpoint of the transported direction v_i, for which grad Φ(x) = +v_i
/// exactly in the frame coordinates at x.
#[derive(Clone, Debug)]
pub struct PulledNodes {
    /// Boundary points (unit vectors at the basepoint).
    pub boundary: Vec<DVector<f64>>,
    /// Φ_{s_i}(x) at each node.
    pub phi_at_x: Vec<f64>,
}

pub fn pull_to(space: &Space, x: &Point, set: &SampleSet) -> PulledNodes {
    let iso = space.transvection_to(x);
    let mut boundary = Vec::with_capacity(set.len());
    let mut phi_at_x = Vec::with_capacity(set.len());
    for v in &set.dirs {
        let s = space.apply_boundary(&iso, &(-v));
        phi_at_x.push(busemann::busemann(space, &s, x));
        boundary.push(s);
    }
    PulledNodes { boundary, phi_at_x }
}

/// ∫_S f dμ_x in pullback form (uniform average over the frame directions
/// at x). For x = x0 this is the plain weighted average over the nodes.
pub fn integrate_mu_x<F: FnMut(&DVector<f64>) -> f64>(
    space: &Space,
    x: &Point,
    set: &SampleSet,
    mut f: F,
) -> f64 {
    let nodes = pull_to(space, x, set);
    set.weights
        .iter()
        .zip(nodes.boundary.iter())
        .map(|(w, s)| w * f(s))
        .sum()
}
