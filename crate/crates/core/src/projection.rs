//! The barycentric projection: the Newton solve of Ω_φ(x) = 0, its
//! derivative identity, the height of a field over the embedded image, and
//! the height-compressed projection with its Jacobian certificate.
//!
//! The solve runs on pullback grids. At the current iterate x the pulled
//! node gradients are exactly the sample directions, so the residual Σ w ρ v
//! vanishes identically (not just to quadrature accuracy) when φ lies on the
//! embedded image and ρ ≡ 1 — the solver inverts the embedding exactly. For
//! derivatives the grid is frozen at the solution: the frozen functional
//! Ω(y) = Σ c_i grad(e^{2Φ_i}/2)(y) has the closed pointwise Hessian
//! e^{2Φ}A_{y,s}, so its Newton operator mass·Â is the exact discrete
//! derivative and d_φP = Â⁻¹E holds without moving-node corrections.

use crate::busemann::{busemann, cayley_projector, j_matrices};
use crate::fields::Field;
use crate::operators::{assemble_bundle, OperatorBundle};
use crate::quadrature::{pull_to, PulledNodes, SampleSet};
use crate::spaces::{Point, Space};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub struct ProjectionSolver {
    /// convergence threshold on ‖Ω‖/mass in the frame norm
    pub tol: f64,
    pub max_iter: usize,
    /// step clamp in the frame norm
    pub trust_radius: f64,
}

impl Default for ProjectionSolver {
    fn default() -> Self {
        ProjectionSolver {
            tol: 1e-12,
            max_iter: 60,
            trust_radius: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProjectionResult {
    pub x: Point,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A quadrature grid anchored at a point: the nodes pulled to the anchor
/// and the field coefficients c_i = w_i e^{(dn+d−2)Φ_i(anchor) − (dn+d)φ(s_i)},
/// so that c_i e^{2Φ_i(y)} grad Φ_i(y) integrates Ω against μ_{x₀}.
pub struct AnchoredGrid {
    pub nodes: PulledNodes,
    pub coeff: Vec<f64>,
}

pub fn anchored_grid(
    space: &Space,
    field: &Field,
    anchor: &Point,
    set: &SampleSet,
) -> AnchoredGrid {
    let m = (space.dim() + space.d()) as f64;
    let delta = m - 2.0;
    let nodes = pull_to(space, anchor, set);
    let coeff = set
        .weights
        .iter()
        .zip(nodes.boundary.iter().zip(nodes.phi_at_x.iter()))
        .map(|(w, (s, phi))| w * (delta * phi - m * field.eval(space, s)).exp())
        .collect();
    AnchoredGrid { nodes, coeff }
}

/// The frozen functional Ω(y) = Σ c_i e^{2Φ_i(y)} grad Φ_i(y) of an anchored
/// grid, with its mass Σ c_i e^{2Φ_i(y)}; the frame is the one at y.
pub fn omega_frozen(space: &Space, grid: &AnchoredGrid, y: &Point) -> (DVector<f64>, f64) {
    let inv = space.invert(&space.transvection_to(y));
    let mut out = DVector::zeros(space.dim());
    let mut mass = 0.0;
    for (c, s) in grid.coeff.iter().zip(grid.nodes.boundary.iter()) {
        let wgt = c * (2.0 * busemann(space, s, y)).exp();
        out -= space.apply_boundary(&inv, s) * wgt;
        mass += wgt;
    }
    (out, mass)
}

/// The exact discrete gradient of the frozen functional at y:
/// ∇Ω(y) = Σ c_i e^{2Φ_i(y)} A_{y,s_i} = mass·id + Σ wgt Π(g_i).
pub fn omega_frozen_gradient(space: &Space, grid: &AnchoredGrid, y: &Point) -> DMatrix<f64> {
    let dn = space.dim();
    let inv = space.invert(&space.transvection_to(y));
    let mut h = DMatrix::zeros(dn, dn);
    let mut mass = 0.0;
    for (c, s) in grid.coeff.iter().zip(grid.nodes.boundary.iter()) {
        let wgt = c * (2.0 * busemann(space, s, y)).exp();
        let g = -space.apply_boundary(&inv, s);
        mass += wgt;
        if space.is_octonionic() {
            h += cayley_projector(&g) * wgt;
        } else {
            for j in j_matrices(space) {
                let jg = &j * &g;
                h.ger(wgt, &jg, &jg, 1.0);
            }
        }
    }
    h + DMatrix::identity(dn, dn) * mass
}

/// The self-anchored residual Σ w ρ v and mass at x: the frozen functional
/// of the grid anchored at x itself, where the pulled gradients collapse to
/// the sample directions exactly.
pub fn omega(space: &Space, field: &Field, x: &Point, set: &SampleSet) -> (DVector<f64>, f64) {
    let grid = anchored_grid(space, field, x, set);
    let mut out = DVector::zeros(space.dim());
    let mut mass = 0.0;
    for ((c, phi), v) in grid
        .coeff
        .iter()
        .zip(grid.nodes.phi_at_x.iter())
        .zip(set.dirs.iter())
    {
        let wgt = c * (2.0 * phi).exp();
        out += v * wgt;
        mass += wgt;
    }
    (out, mass)
}

/// Newton solve of Ω_φ = 0 from an optional seed (default x₀). Each step
/// re-anchors the grid at the iterate, takes the Newton direction of the
/// frozen functional (whose Jacobian mass·Â is exact there) and backtracks
/// on the frozen residual before re-anchoring.
pub fn project(
    space: &Space,
    field: &Field,
    set: &SampleSet,
    solver: &ProjectionSolver,
    init: Option<&Point>,
) -> ProjectionResult {
    let mut x = init.cloned().unwrap_or_else(|| space.basepoint());
    for it in 0..solver.max_iter {
        let grid = anchored_grid(space, field, &x, set);
        let mut om = DVector::zeros(space.dim());
        let mut mass = 0.0;
        let dn = space.dim();
        let mut h = DMatrix::zeros(dn, dn);
        for ((c, phi), v) in grid
            .coeff
            .iter()
            .zip(grid.nodes.phi_at_x.iter())
            .zip(set.dirs.iter())
        {
            let wgt = c * (2.0 * phi).exp();
            om += v * wgt;
            mass += wgt;
            if space.is_octonionic() {
                h += cayley_projector(v) * wgt;
            } else {
                for j in j_matrices(space) {
                    let jv = &j * v;
                    h.ger(wgt, &jv, &jv, 1.0);
                }
            }
        }
        h += DMatrix::identity(dn, dn) * mass;
        let residual = om.norm() / mass;
        if residual < solver.tol {
            return ProjectionResult {
                x,
                residual,
                iterations: it,
                converged: true,
            };
        }
        // ∇Ω = mass·(id + PSD) keeps the Newton floor A ≥ id automatically;
        // the Cholesky below would fail if the quadrature ever broke it
        let mut step = -h
            .cholesky()
            .expect("Newton operator must be positive definite")
            .solve(&om);
        let sn = step.norm();
        if sn > solver.trust_radius {
            step *= solver.trust_radius / sn;
        }
        // backtrack against the frozen residual: the step is its exact
        // Newton direction, so a decrease is always available
        let mut lam = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let cand = space.exp_at(&x, &(&step * lam));
            let (omc, massc) = omega_frozen(space, &grid, &cand);
            if omc.norm() / massc < residual {
                accepted = Some(cand);
                break;
            }
            lam *= 0.5;
        }
        match accepted {
            Some(cand) => x = cand,
            None => break,
        }
    }
    let (om, mass) = omega(space, field, &x, set);
    ProjectionResult {
        residual: om.norm() / mass,
        converged: om.norm() / mass < solver.tol,
        iterations: solver.max_iter,
        x,
    }
}

/// Newton solve of the frozen functional of an anchored grid; used to
/// finite-difference the projection without moving the grid.
pub fn project_frozen(
    space: &Space,
    grid: &AnchoredGrid,
    start: &Point,
    solver: &ProjectionSolver,
) -> ProjectionResult {
    let mut x = start.clone();
    for it in 0..solver.max_iter {
        let (om, mass) = omega_frozen(space, grid, &x);
        let residual = om.norm() / mass;
        if residual < solver.tol {
            return ProjectionResult {
                x,
                residual,
                iterations: it,
                converged: true,
            };
        }
        let step = -omega_frozen_gradient(space, grid, &x)
            .cholesky()
            .expect("Newton operator must be positive definite")
            .solve(&om);
        x = space.exp_at(&x, &step);
    }
    let (om, mass) = omega_frozen(space, grid, &x);
    ProjectionResult {
        residual: om.norm() / mass,
        converged: om.norm() / mass < solver.tol,
        iterations: solver.max_iter,
        x,
    }
}

/// Multistart uniqueness probe: Newton from `count` random seeds in
/// B(x₀, radius); returns the best result and the maximal pairwise distance
/// between the found zeros.
pub fn project_multistart(
    space: &Space,
    field: &Field,
    set: &SampleSet,
    solver: &ProjectionSolver,
    radius: f64,
    count: usize,
    seed: u64,
) -> (ProjectionResult, f64) {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dn = space.dim();
    let mut results: Vec<ProjectionResult> = Vec::with_capacity(count);
    for k in 0..count {
        let x0 = if k == 0 {
            space.basepoint()
        } else {
            let mut v: DVector<f64> = DVector::zeros(dn);
            for c in v.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
            let nn = v.norm();
            let r = radius * rng.gen_range(0.0f64..1.0);
            space.exp_basepoint(&(v * (r / nn.max(1e-12))))
        };
        results.push(project(space, field, set, solver, Some(&x0)));
    }
    let mut spread: f64 = 0.0;
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            spread = spread.max(space.distance(&results[i].x, &results[j].x));
        }
    }
    let best = results
        .into_iter()
        .min_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap())
        .unwrap();
    (best, spread)
}

/// Derivative of the projection at x = P(φ): d_φP(X) = Â⁻¹ E(X) for a
/// variation field X given by node values on the pulled grid of x.
pub fn dp_apply(
    space: &Space,
    bundle: &OperatorBundle,
    set: &SampleSet,
    xvals: &[f64],
) -> DVector<f64> {
    bundle
        .a_hat
        .clone()
        .cholesky()
        .expect("Newton operator must be positive definite")
        .solve(&bundle.e_apply(space, set, xvals))
}

/// Finite-difference validation of the derivative identity over random
/// bump directions: the grid is frozen at the solution, the perturbed
/// projections are re-solved on it, and the difference quotient is compared
/// with Â⁻¹E. Returns the worst frame-norm residual per unit h.
pub fn derivative_check(
    space: &Space,
    field: &Field,
    set: &SampleSet,
    solver: &ProjectionSolver,
    n_dirs: usize,
    h: f64,
    seed: u64,
) -> f64 {
    let base = project(space, field, set, solver, None);
    assert!(base.converged, "projection failed at the base field");
    let bundle = assemble_bundle(space, field, &base.x, set);
    let mut worst: f64 = 0.0;
    for k in 0..n_dirs {
        let dir = crate::fields::random_bumps(space.dim(), 3, 1.0, seed + k as u64);
        let plus = field.clone().plus(Field::Scale(h, Box::new(dir.clone())));
        let minus = field.clone().plus(Field::Scale(-h, Box::new(dir.clone())));
        let gp = anchored_grid(space, &plus, &base.x, set);
        let gm = anchored_grid(space, &minus, &base.x, set);
        let pp = project_frozen(space, &gp, &base.x, solver);
        let pm = project_frozen(space, &gm, &base.x, solver);
        assert!(pp.converged && pm.converged);
        let fd = (space.log_at(&base.x, &pp.x) - space.log_at(&base.x, &pm.x)) / (2.0 * h);
        let vals = dir.eval_nodes(space, &bundle.nodes.boundary);
        let analytic = dp_apply(space, &bundle, set, &vals);
        worst = worst.max((fd - analytic).norm());
    }
    worst
}

/// Central finite differences at t = 0 of det A_{φ_t} and det Â_{φ_t}
/// along the interpolation family anchored at x = P(φ); both vanish at the
/// unperturbed metric.
pub fn det_critical_check(
    space: &Space,
    field: &Field,
    set: &SampleSet,
    solver: &ProjectionSolver,
    h: f64,
) -> (f64, f64) {
    let base = project(space, field, set, solver, None);
    assert!(base.converged);
    let det_at = |t: f64| -> (f64, f64) {
        let ft = Field::Interp {
            base: Box::new(field.clone()),
            x: base.x.clone(),
            t,
        };
        let b = assemble_bundle(space, &ft, &base.x, set);
        (b.a_direct.determinant(), b.a_hat.determinant())
    };
    let (ap, hp) = det_at(h);
    let (am, hm) = det_at(-h);
    (((ap - am) / (2.0 * h)), ((hp - hm) / (2.0 * h)))
}

/// Height h(φ) = ‖φ − Φ(P(φ))‖_{L²(S)}, evaluated on the raw sample grid
/// (at the basepoint the node directions are uniform on S).
pub fn height(space: &Space, field: &Field, x_proj: &Point, set: &SampleSet) -> f64 {
    let mut acc = 0.0;
    for (w, s) in set.weights.iter().zip(set.dirs.iter()) {
        let d = field.eval(space, s) - busemann(space, s, x_proj);
        acc += w * d * d;
    }
    acc.sqrt()
}

/// Radial homothety A_t(p) = exp_{x₀}(t·log_{x₀} p).
pub fn radial_map(space: &Space, p: &Point, t: f64) -> Point {
    let v = space.log_basepoint(p);
    space.exp_basepoint(&(v * t))
}

/// Derivative of A_t at p in frame coordinates (frame at p → frame at
/// A_t(p)): t on the radial line, sinh(2tr)/sinh(2r) on the curvature −4
/// block of the radial direction, sinh(tr)/sinh(r) on the curvature −1
/// block.
pub fn radial_map_derivative(space: &Space, p: &Point, t: f64) -> DMatrix<f64> {
    let dn = space.dim();
    let v = space.log_basepoint(p);
    let r = v.norm();
    if r < 1e-9 {
        return DMatrix::identity(dn, dn) * t;
    }
    let u = &v / r;
    let uut = &u * u.transpose();
    let mut p4 = DMatrix::zeros(dn, dn);
    if space.is_octonionic() {
        p4 += cayley_projector(&u) - &uut;
    } else {
        for j in j_matrices(space).iter().skip(1) {
            let ju = j * &u;
            p4 += &ju * ju.transpose();
        }
    }
    let p1 = DMatrix::identity(dn, dn) - &uut - &p4;
    let s4 = (2.0 * t * r).sinh() / (2.0 * r).sinh();
    let s1 = (t * r).sinh() / r.sinh();
    uut * t + p4 * s4 + p1 * s1
}

/// Compression parameters: the homothety exponent σ and the decay constant
/// c = σ³/3 it certifies.
#[derive(Clone, Copy, Debug)]
pub struct CompressionConfig {
    pub sigma: f64,
    pub r: f64,
}

impl CompressionConfig {
    pub fn new(sigma: f64, r: f64) -> CompressionConfig {
        assert!(sigma > 0.0 && r > 0.0);
        CompressionConfig { sigma, r }
    }

    pub fn c(&self) -> f64 {
        self.sigma * self.sigma * self.sigma / 3.0
    }

    /// contraction exponent at height h
    pub fn t(&self, h: f64) -> f64 {
        1.0 / (1.0 + self.sigma * h * h)
    }
}

/// The height-compressed homothety Q_σ(p, h) = A_{(1+σh²)⁻¹}(p).
pub fn compress(space: &Space, cfg: &CompressionConfig, p: &Point, h: f64) -> Point {
    let r = space.log_basepoint(p).norm();
    assert!(
        r <= 4.0 / cfg.sigma.sqrt() + 1e-9,
        "compression input out of its radius hypothesis"
    );
    radial_map(space, p, cfg.t(h))
}

/// Analytic derivative of (p, h) ↦ Q_σ(p, h): the dn×dn block with respect
/// to p in frame coordinates, and the column with respect to h (the image
/// slides along the radial geodesic with speed r·dt/dh).
pub fn compress_derivative(
    space: &Space,
    cfg: &CompressionConfig,
    p: &Point,
    h: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let t = cfg.t(h);
    let dp = radial_map_derivative(space, p, t);
    let v = space.log_basepoint(p);
    let r = v.norm();
    let dt = -2.0 * cfg.sigma * h * t * t;
    let dh = if r < 1e-9 {
        DVector::zeros(space.dim())
    } else {
        (&v / r) * (r * dt)
    };
    (dp, dh)
}

/// Jacobian of the joint map (p, h) ↦ Q_σ(p, h) over dn-dimensional
/// subspaces of the (dn+1)-dimensional domain, with its certified bound
/// (1 + σh²)⁻¹.
pub fn compress_jacobian(space: &Space, cfg: &CompressionConfig, p: &Point, h: f64) -> (f64, f64) {
    let (dp, dh) = compress_derivative(space, cfg, p, h);
    let dn = space.dim();
    let mut d = DMatrix::zeros(dn, dn + 1);
    d.view_mut((0, 0), (dn, dn)).copy_from(&dp);
    d.set_column(dn, &dh);
    let jac: f64 = d.singular_values().iter().product();
    (jac, cfg.t(h))
}

/// A certificate of the compressed projection P_σ(φ) = Q_σ(P(φ), σ·h(φ)).
#[derive(Clone, Debug)]
pub struct CompressionCertificate {
    pub x_proj: Point,
    pub x_compressed: Point,
    pub h: f64,
    /// Jacobian of φ ↦ P_σ(φ) over its top dn-dimensional subspace, in the
    /// G_φ geometry of the domain
    pub jacobian: f64,
    /// the decay bound 1 − c·h²
    pub bound: f64,
    pub newton_residual: f64,
    pub pass: bool,
}

/// Projection, height, compression and the composite Jacobian in one pass.
/// `slack` is the quadrature allowance added to the decay bound.
pub fn certified_projection(
    space: &Space,
    field: &Field,
    set: &SampleSet,
    solver: &ProjectionSolver,
    cfg: &CompressionConfig,
    slack: f64,
) -> CompressionCertificate {
    let res = project(space, field, set, solver, None);
    assert!(res.converged, "projection did not converge");
    let h = height(space, field, &res.x, set);
    let h_arg = cfg.sigma * h;
    let x_compressed = compress(space, cfg, &res.x, h_arg);

    let bundle = assemble_bundle(space, field, &res.x, set);
    let a_chol = bundle
        .a_hat
        .clone()
        .cholesky()
        .expect("Newton operator must be positive definite");
    // derivative of P in whitened field coordinates
    let dp_w = &a_chol.inverse() * &bundle.e_whitened;

    let (dqp, dqh) = compress_derivative(space, cfg, &res.x, h_arg);
    let mut d_total = &dqp * &dp_w;

    if h > 1e-9 {
        // h-coupling row: dh(X) = (1/h)⟨δ, X − dΦ(dP X)⟩_{L²(S)} against the
        // whitened node basis, where δ = φ − Φ(P(φ)) on the pulled grid
        let delta_vals: Vec<f64> = bundle
            .nodes
            .boundary
            .iter()
            .zip(bundle.nodes.phi_at_x.iter())
            .map(|(s, phi)| field.eval(space, s) - phi)
            .collect();
        let dly = space.entropy() as f64;
        let nd = (space.n * space.d()) as f64;
        let mut omega_w = Vec::with_capacity(set.len());
        let mut tot = 0.0;
        for (w, phi) in set.weights.iter().zip(bundle.nodes.phi_at_x.iter()) {
            let ww = w * (dly * phi).exp();
            omega_w.push(ww);
            tot += ww;
        }
        // a = Σ_j ω_j δ_j v_j collects the dΦ-part of every column at once
        let mut a = DVector::zeros(space.dim());
        for ((om, dv), v) in omega_w.iter().zip(delta_vals.iter()).zip(set.dirs.iter()) {
            a += v * (om * dv / tot);
        }
        let second = a.transpose() * &dp_w;
        let mut dh_row = DVector::zeros(set.len());
        for (i, ((om, dv), (w, rb))) in omega_w
            .iter()
            .zip(delta_vals.iter())
            .zip(set.weights.iter().zip(bundle.weights.rho_bar.iter()))
            .enumerate()
        {
            let direct = om * dv / (tot * (nd * w * rb).sqrt());
            dh_row[i] = (direct - second[i]) / h;
        }
        d_total += &dqh * (dh_row.transpose() * cfg.sigma);
    }

    let jacobian: f64 = d_total.singular_values().iter().take(space.dim()).product();
    let bound = 1.0 - cfg.c() * h * h;
    CompressionCertificate {
        x_proj: res.x,
        x_compressed,
        h,
        jacobian,
        bound,
        newton_residual: res.residual,
        pass: jacobian <= bound + slack,
    }
}

/// Volume sanity of the compressed projection along a torus patch: a grid
/// of fields u ↦ Φ(exp_{x₀}(Σ u_k b_k)) + ψ with the b_k scaled so the map
/// is 1-Lipschitz into L^∞(S); returns (patch volume, image volume), the
/// image volume computed by finite differences of the composed map.
pub fn torus_patch_volume(
    space: &Space,
    set: &SampleSet,
    solver: &ProjectionSolver,
    cfg: &CompressionConfig,
    noise: &Field,
    grid: usize,
    width: f64,
) -> (f64, f64) {
    let dn = space.dim();
    // exp expands in negative curvature: scale the frame so |dΦ(v)|_∞ ≤ 1
    let rad = width * (dn as f64).sqrt();
    let scale = 1.0 / (2.0 * rad).cosh();
    let field_at = |u: &[f64]| -> Field {
        let mut v = DVector::zeros(dn);
        for (k, c) in u.iter().enumerate() {
            v[k] = c * scale;
        }
        Field::Embed(space.exp_basepoint(&v)).plus(noise.clone())
    };
    let map_at = |u: &[f64]| -> Point {
        let f = field_at(u);
        let res = project(space, &f, set, solver, None);
        assert!(res.converged);
        let h = height(space, &f, &res.x, set);
        compress(space, cfg, &res.x, cfg.sigma * h)
    };

    let cell = width / grid as f64;
    let fd = cell * 0.5;
    let mut patch_vol = 0.0;
    let mut image_vol = 0.0;
    let mut idx = vec![0usize; dn];
    loop {
        let u: Vec<f64> = idx.iter().map(|&i| (i as f64 + 0.5) * cell).collect();
        let center = map_at(&u);
        let mut m = DMatrix::zeros(dn, dn);
        for k in 0..dn {
            let mut up = u.clone();
            let mut um = u.clone();
            up[k] += fd;
            um[k] -= fd;
            let col = (space.log_at(&center, &map_at(&up)) - space.log_at(&center, &map_at(&um)))
                / (2.0 * fd);
            m.set_column(k, &col);
        }
        let cell_vol = cell.powi(dn as i32);
        patch_vol += cell_vol;
        image_vol += m.determinant().abs() * cell_vol;
        // odometer over the grid
        let mut k = 0;
        loop {
            if k == dn {
                return (patch_vol, image_vol);
            }
            idx[k] += 1;
            if idx[k] < grid {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
