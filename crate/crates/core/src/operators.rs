//! The operator calculus attached to a weighted boundary measure: density
//! weights ρ_φ, the Gram operator Q and its structure average Q̂, the drift
//! operator E, the Newton operator A, Jacobian certificates, and the exact
//! structural identities they satisfy under pullback quadrature.
//!
//! Everything here is plain linear algebra over the quadrature nodes: the
//! geometry enters only through the pulled node directions, for which the
//! Busemann gradients are exactly the frame directions.

use crate::busemann::{cayley_basis, cayley_project, j_matrices};
use crate::fields::Field;
use crate::ledger::ConstantsLedger;
use crate::quadrature::{pull_to, PulledNodes, SampleSet};
use crate::spaces::{Point, Space};
use nalgebra::{DMatrix, DVector};

/// Density weights of a field at the pulled nodes of a point x:
/// ρ(s) = e^{(dn+d)(Φ_s(x) − φ(s))}, plus the normalized weights ρ̄.
#[derive(Clone, Debug)]
pub struct WeightProfile {
    pub rho: Vec<f64>,
    pub rho_bar: Vec<f64>,
    /// quadrature mass ∫ρ dμ_x
    pub mass: f64,
}

pub fn weight_profile(
    space: &Space,
    field: &Field,
    nodes: &PulledNodes,
    set: &SampleSet,
) -> WeightProfile {
    let m = (space.dim() + space.d()) as f64;
    let rho: Vec<f64> = nodes
        .boundary
        .iter()
        .zip(nodes.phi_at_x.iter())
        .map(|(s, phi)| (m * (phi - field.eval(space, s))).exp())
        .collect();
    let mass: f64 = set.weights.iter().zip(rho.iter()).map(|(w, r)| w * r).sum();
    let rho_bar = rho.iter().map(|r| r / mass).collect();
    WeightProfile { rho, rho_bar, mass }
}

/// All operators of the pair (φ, x) over one sample set.
#[derive(Clone, Debug)]
pub struct OperatorBundle {
    pub x: Point,
    pub nodes: PulledNodes,
    pub weights: WeightProfile,
    /// Gram operator Q = nd ∫ ρ̄ g gᵀ dμ_x (g = Busemann gradients).
    pub q: DMatrix<f64>,
    /// Structure average Q̂ = n (Â − id).
    pub q_hat: DMatrix<f64>,
    /// Newton operator ∫ ρ̄ A_{x,s} dμ_x assembled node by node.
    pub a_direct: DMatrix<f64>,
    /// The same operator through the averaged route id + Q̂/n.
    pub a_hat: DMatrix<f64>,
    /// Principal symmetric PSD root of Q.
    pub u_root: DMatrix<f64>,
    /// Whitened drift matrix: column i is (dn+d)√(w_i ρ̄_i/(nd)) v_i, so it
    /// maps G_φ-orthonormal coordinates to the tangent space at x.
    pub e_whitened: DMatrix<f64>,
    pub q_eigs: DVector<f64>,
    pub q_hat_eigs: DVector<f64>,
}

pub fn assemble_bundle(space: &Space, field: &Field, x: &Point, set: &SampleSet) -> OperatorBundle {
    let nodes = pull_to(space, x, set);
    let weights = weight_profile(space, field, &nodes, set);
    let dn = space.dim();
    let d = space.d() as f64;
    let n = space.n as f64;
    let nd = n * d;

    let mut q = DMatrix::zeros(dn, dn);
    let mut a_direct = DMatrix::identity(dn, dn);
    for ((v, w), rb) in set
        .dirs
        .iter()
        .zip(set.weights.iter())
        .zip(weights.rho_bar.iter())
    {
        let c = w * rb;
        q.ger(nd * c, v, v, 1.0);
        // direct Newton assembly: node operator id + Π(v) from outer products
        if space.is_octonionic() {
            let f = cayley_basis(v);
            for k in 0..8 {
                let col = f.column(k).clone_owned();
                a_direct.ger(c, &col, &col, 1.0);
            }
        } else {
            for j in j_matrices(space) {
                let jv = &j * v;
                a_direct.ger(c, &jv, &jv, 1.0);
            }
        }
    }

    // averaged route to Q̂: conjugation over the structure rotations (C/H)
    // or per-node Cayley projectors through the closed projection formula (O)
    let q_hat = if space.is_octonionic() {
        let mut qh = DMatrix::zeros(dn, dn);
        for ((v, w), rb) in set
            .dirs
            .iter()
            .zip(set.weights.iter())
            .zip(weights.rho_bar.iter())
        {
            let mut p = DMatrix::zeros(dn, dn);
            for k in 0..dn {
                let e = DVector::from_fn(dn, |i, _| if i == k { 1.0 } else { 0.0 });
                p.set_column(k, &cayley_project(v, &e));
            }
            qh += p * (n * w * rb);
        }
        qh
    } else {
        let mut qh = DMatrix::zeros(dn, dn);
        for j in j_matrices(space) {
            qh += &j * &q * j.transpose();
        }
        qh / d
    };
    let a_hat = DMatrix::identity(dn, dn) + &q_hat / n;

    let eq = nalgebra::SymmetricEigen::new(q.clone());
    let mut u_root = DMatrix::zeros(dn, dn);
    for k in 0..dn {
        let lk = eq.eigenvalues[k].max(0.0).sqrt();
        let col = eq.eigenvectors.column(k).clone_owned();
        u_root.ger(lk, &col, &col, 1.0);
    }

    let npts = set.len();
    let mut e_whitened = DMatrix::zeros(dn, npts);
    let m = (dn as f64) + d;
    for (i, ((v, w), rb)) in set
        .dirs
        .iter()
        .zip(set.weights.iter())
        .zip(weights.rho_bar.iter())
        .enumerate()
    {
        let c = m * (w * rb / nd).sqrt();
        e_whitened.set_column(i, &(v * c));
    }

    let mut q_eigs = eq.eigenvalues.clone();
    q_eigs
        .as_mut_slice()
        .sort_by(|a, b| a.partial_cmp(b).unwrap());
    // a degenerate Gram operator means the sample set is broken, not a
    // marginal case to clamp
    assert!(
        q_eigs[0] > 1e-8,
        "Gram operator is numerically singular: quadrature failure"
    );
    let mut q_hat_eigs = nalgebra::SymmetricEigen::new(q_hat.clone()).eigenvalues;
    q_hat_eigs
        .as_mut_slice()
        .sort_by(|a, b| a.partial_cmp(b).unwrap());

    OperatorBundle {
        x: x.clone(),
        nodes,
        weights,
        q,
        q_hat,
        a_direct,
        a_hat,
        u_root,
        e_whitened,
        q_eigs,
        q_hat_eigs,
    }
}

impl OperatorBundle {
    /// Drift E_φ(X) = (dn+d) ∫ X ρ̄ grad Φ dμ_x for node values X.
    pub fn e_apply(&self, space: &Space, set: &SampleSet, xvals: &[f64]) -> DVector<f64> {
        let m = (space.dim() + space.d()) as f64;
        let mut out = DVector::zeros(space.dim());
        for ((v, w), (rb, xv)) in set
            .dirs
            .iter()
            .zip(set.weights.iter())
            .zip(self.weights.rho_bar.iter().zip(xvals.iter()))
        {
            out += v * (m * w * rb * xv);
        }
        out
    }

    /// Weighted Gram form G_φ(X, Y) = nd ∫ X Y ρ̄ dμ_x on node values.
    pub fn g_inner(&self, space: &Space, set: &SampleSet, xv: &[f64], yv: &[f64]) -> f64 {
        let nd = (space.n * space.d()) as f64;
        set.weights
            .iter()
            .zip(self.weights.rho_bar.iter())
            .zip(xv.iter().zip(yv.iter()))
            .map(|((w, rb), (a, b))| nd * w * rb * a * b)
            .sum()
    }

    /// Node values of the coordinate fields X_I(s) = ⟨grad Φ_s(x), e_I⟩;
    /// column I is exactly the I-th coordinates of the node directions.
    pub fn coordinate_fields(&self, set: &SampleSet) -> Vec<Vec<f64>> {
        let dn = set.dim;
        (0..dn)
            .map(|cap_i| set.dirs.iter().map(|v| v[cap_i]).collect())
            .collect()
    }

    /// Jacobian of Â⁻¹E over its top dn-dimensional subspace, both by SVD of
    /// the whitened restriction and by the closed determinant chain.
    pub fn jacobian_ae(&self, space: &Space) -> (f64, f64) {
        let n = space.n as f64;
        let dn = space.dim();
        let a_inv = self
            .a_hat
            .clone()
            .cholesky()
            .expect("Newton operator must be positive definite")
            .inverse();
        let mw = &a_inv * &self.e_whitened;
        let sv = mw.singular_values();
        let j_svd: f64 = sv.iter().take(dn).product();
        let ln_det_q: f64 = self.q_eigs.iter().map(|l| l.max(1e-300).ln()).sum();
        let ln_det_ahat: f64 = self.q_hat_eigs.iter().map(|l| (1.0 + l / n).ln()).sum();
        let j_closed = ((dn as f64) * ((n + 1.0) / n).ln() + 0.5 * ln_det_q - ln_det_ahat).exp();
        (j_svd, j_closed)
    }
}

/// Structural residuals of a bundle; every entry is an exact identity of the
/// quadrature (zero up to roundoff) except the interlacing margins.
#[derive(Clone, Debug, serde::Serialize)]
pub struct StructureReport {
    pub trace_q: f64,
    pub trace_q_hat: f64,
    pub avg_identity_residual: f64,
    pub oct_block_residual: Option<f64>,
    pub e_kills_perp: f64,
    pub e_on_v_residual: f64,
    pub a_two_path_residual: f64,
    pub u_root_residual: f64,
    pub interlacing_ok: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub amgm_log_margin: f64,
    pub e_norm: f64,
    pub e_norm_bound: f64,
    pub jac_svd: f64,
    pub jac_closed: f64,
}

pub fn verify_structure(
    space: &Space,
    bundle: &OperatorBundle,
    set: &SampleSet,
    seed: u64,
) -> StructureReport {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dn = space.dim();
    let n = space.n as f64;
    let d = space.d() as f64;

    // averaged-identity residual
    let avg_identity_residual = if space.is_octonionic() {
        // Q̂ block over random Cayley lines equals the averaged Q block
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let mut v = DVector::zeros(16);
            for c in v.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
            v /= v.norm();
            let f = cayley_basis(&v);
            let qb = f.transpose() * &bundle.q * &f;
            let qhb = f.transpose() * &bundle.q_hat * &f;
            let mut avg = DMatrix::zeros(8, 8);
            for t in 0..8 {
                let l = crate::algebra::left_mul_matrix(&crate::algebra::Oct::basis(t));
                avg += l.transpose() * &qb * &l;
            }
            avg /= 8.0;
            worst = worst.max((qhb - avg).norm());
        }
        worst
    } else {
        let mut avg = DMatrix::zeros(dn, dn);
        for j in j_matrices(space) {
            avg += &j * &bundle.q * j.transpose();
        }
        (avg / d - &bundle.q_hat).norm()
    };

    // octonion case: in the frame of any Cayley line and its orthogonal
    // complement (itself a Cayley line), Q̂ takes the form
    // (λ·id, L; Lᵀ, η·id) — both diagonal blocks are scalar
    let oct_block_residual = if space.is_octonionic() {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let mut v = DVector::zeros(16);
            let mut w = DVector::zeros(16);
            for c in v.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
            for c in w.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
            v /= v.norm();
            let mut wp = &w - cayley_project(&v, &w);
            wp /= wp.norm();
            let f1 = cayley_basis(&v);
            let f2 = cayley_basis(&wp);
            let mut frame = DMatrix::zeros(16, 16);
            frame.view_mut((0, 0), (16, 8)).copy_from(&f1);
            frame.view_mut((0, 8), (16, 8)).copy_from(&f2);
            worst = worst.max((frame.transpose() * &frame - DMatrix::identity(16, 16)).norm());
            let conj = frame.transpose() * &bundle.q_hat * &frame;
            for blk in 0..2 {
                let b = conj.view((8 * blk, 8 * blk), (8, 8));
                let mean = b.trace() / 8.0;
                worst = worst.max((b - DMatrix::identity(8, 8) * mean).norm());
            }
        }
        Some(worst)
    } else {
        None
    };

    // E annihilates fields G-orthogonal to the coordinate fields
    let coords = bundle.coordinate_fields(set);
    let mut e_kills_perp: f64 = 0.0;
    for _ in 0..5 {
        let mut y: Vec<f64> = (0..set.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // G-project out the coordinate fields (they are not G-orthogonal to
        // each other, so solve the small Gram system)
        let k = coords.len();
        let mut gram = DMatrix::zeros(k, k);
        let mut rhs = DVector::zeros(k);
        for i in 0..k {
            rhs[i] = bundle.g_inner(space, set, &y, &coords[i]);
            for j in 0..k {
                gram[(i, j)] = bundle.g_inner(space, set, &coords[i], &coords[j]);
            }
        }
        let sol = gram.lu().solve(&rhs).unwrap();
        for (i, xc) in coords.iter().enumerate() {
            for (yy, xx) in y.iter_mut().zip(xc.iter()) {
                *yy -= sol[i] * xx;
            }
        }
        e_kills_perp = e_kills_perp.max(bundle.e_apply(space, set, &y).norm());
    }

    // E on the coordinate fields reproduces ((n+1)/n) Q column by column
    let mut e_on_v_residual: f64 = 0.0;
    for (cap_i, xc) in coords.iter().enumerate() {
        let e = bundle.e_apply(space, set, xc);
        let want = bundle.q.column(cap_i) * ((n + 1.0) / n);
        e_on_v_residual = e_on_v_residual.max((e - want).norm());
    }

    let a_two_path_residual = (&bundle.a_direct - &bundle.a_hat).norm();
    let u_root_residual = (&bundle.u_root * &bundle.u_root - &bundle.q).norm();

    let lambda_min = bundle.q_eigs[0];
    let lambda_max = bundle.q_eigs[dn - 1];
    let eta_min = bundle.q_hat_eigs[0];
    let eta_max = bundle.q_hat_eigs[dn - 1];
    let tol = 1e-10;
    let interlacing_ok = lambda_min <= eta_min + tol
        && eta_min <= 1.0 + tol
        && 1.0 <= eta_max + tol
        && eta_max <= lambda_max + tol
        && lambda_max <= dn as f64 + tol;

    let ln_det_q: f64 = bundle.q_eigs.iter().map(|l| l.max(1e-300).ln()).sum();
    let ln_det_ahat: f64 = bundle.q_hat_eigs.iter().map(|l| (1.0 + l / n).ln()).sum();
    let amgm_log_margin = ln_det_ahat - (dn as f64) * ((n + 1.0) / n).ln() - ln_det_q / (n + 1.0);

    let e_norm = bundle.e_whitened.singular_values()[0];
    let e_norm_bound = (n + 1.0) * (d / n).sqrt();

    let (jac_svd, jac_closed) = bundle.jacobian_ae(space);

    StructureReport {
        trace_q: bundle.q.trace(),
        trace_q_hat: bundle.q_hat.trace(),
        avg_identity_residual,
        oct_block_residual,
        e_kills_perp,
        e_on_v_residual,
        a_two_path_residual,
        u_root_residual,
        interlacing_ok,
        lambda_min,
        lambda_max,
        eta_min,
        eta_max,
        amgm_log_margin,
        e_norm,
        e_norm_bound,
        jac_svd,
        jac_closed,
    }
}

/// ‖f‖_{L²(S)} of node values on the pulled grid of a bundle: the round
/// sphere measure relates to μ_x through the visual density, so each node
/// carries weight w_i e^{δΦ_i} (renormalized).
pub fn l2_s_norm(space: &Space, bundle: &OperatorBundle, set: &SampleSet, vals: &[f64]) -> f64 {
    let delta = space.entropy() as f64;
    let mut tot = 0.0;
    let mut acc = 0.0;
    for ((w, phi), v) in set
        .weights
        .iter()
        .zip(bundle.nodes.phi_at_x.iter())
        .zip(vals.iter())
    {
        let ww = w * (delta * phi).exp();
        tot += ww;
        acc += ww * v * v;
    }
    (acc / tot).sqrt()
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct EigenFloorReport {
    pub lambda1: f64,
    pub ln_floor: f64,
    pub ln_margin: f64,
    pub pass: bool,
}

/// Spectral floor of the Gram operator against the ledger constant; the
/// floor is astronomically small, so the margin is reported in logs.
pub fn eigen_floor(bundle: &OperatorBundle, ledger: &ConstantsLedger) -> EigenFloorReport {
    let lambda1 = bundle.q_eigs[0];
    let ln_margin = lambda1.max(1e-300).ln() - ledger.ln_cap_c2;
    EigenFloorReport {
        lambda1,
        ln_floor: ledger.ln_cap_c2,
        ln_margin,
        pass: ln_margin >= 0.0,
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct NormComparisonReport {
    pub ln_ratio: f64,
    pub ln_floor: f64,
    pub pass: bool,
}

/// Comparison of the G_φ norm against the L²(S) norm from below:
/// √(dn/2 · c₀⁻² e^{−(dn+d−2)R₁}) ‖X‖_{L²(S)} ≤ ‖X‖_{G_φ}, in logs.
pub fn norm_comparison(
    space: &Space,
    bundle: &OperatorBundle,
    set: &SampleSet,
    ledger: &ConstantsLedger,
    vals: &[f64],
) -> NormComparisonReport {
    let dn = space.dim() as f64;
    let delta = space.entropy() as f64;
    let g = bundle.g_inner(space, set, vals, vals).sqrt();
    let l2 = l2_s_norm(space, bundle, set, vals);
    let ln_ratio = g.max(1e-300).ln() - l2.max(1e-300).ln();
    let ln_floor = 0.5 * (dn / 2.0).ln() - ledger.ln_c0 - 0.5 * delta * ledger.r1;
    NormComparisonReport {
        ln_ratio,
        ln_floor,
        pass: ln_ratio >= ln_floor,
    }
}

fn inv_sqrt_gram(
    space: &Space,
    bundle: &OperatorBundle,
    set: &SampleSet,
    fields: &[Vec<f64>],
) -> DMatrix<f64> {
    let k = fields.len();
    let mut s = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            s[(i, j)] = bundle.g_inner(space, set, &fields[i], &fields[j]);
        }
    }
    let es = nalgebra::SymmetricEigen::new(s);
    let mut out = DMatrix::zeros(k, k);
    for t in 0..k {
        let l = es.eigenvalues[t];
        assert!(l > 1e-12, "rank-deficient field subspace");
        let col = es.eigenvectors.column(t).clone_owned();
        out.ger(1.0 / l.sqrt(), &col, &col, 1.0);
    }
    out
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct RefinedJacobianReport {
    /// det(Â⁻¹) · Jac_{G,W} E over the supplied subspace
    pub left: f64,
    /// 1 − C₁‖X − dΦ(Â⁻¹E X)‖²_{L²(S)} for the supplied unit field
    pub bound_residual: f64,
    /// Jacobian of the G-orthogonal projection W → V
    pub projection_jac: f64,
    /// 1 − C₃·max‖X^⊥‖² over G-unit X ∈ W (worst principal angle)
    pub bound_projection: f64,
    pub pass: bool,
}

/// The two refinements of the Jacobian certificate over an arbitrary
/// dn-dimensional field subspace W: the drift Jacobian against the
/// residual-penalty bound, and the projection Jacobian against the
/// principal-angle penalty.
pub fn refined_jacobian_bound(
    space: &Space,
    bundle: &OperatorBundle,
    set: &SampleSet,
    w_fields: &[Vec<f64>],
    x_field: &[f64],
    ledger: &ConstantsLedger,
) -> RefinedJacobianReport {
    let dn = space.dim();
    let n = space.n as f64;
    assert_eq!(w_fields.len(), dn, "the subspace must have dimension dn");

    let s_mhalf = inv_sqrt_gram(space, bundle, set, w_fields);
    let mut img = DMatrix::zeros(dn, dn);
    for (j, f) in w_fields.iter().enumerate() {
        img.set_column(j, &bundle.e_apply(space, set, f));
    }
    let img = img * &s_mhalf;
    let ln_det_a: f64 = bundle.q_hat_eigs.iter().map(|l| (1.0 + l / n).ln()).sum();
    let left = (-ln_det_a).exp() * img.determinant().abs();

    // residual-penalty side with the supplied field, G-normalized
    let xg = bundle.g_inner(space, set, x_field, x_field).sqrt();
    let xn: Vec<f64> = x_field.iter().map(|v| v / xg).collect();
    let rhs = bundle.e_apply(space, set, &xn);
    let xi = bundle
        .a_hat
        .clone()
        .cholesky()
        .expect("Newton operator must be positive definite")
        .solve(&rhs);
    let resid: Vec<f64> = xn
        .iter()
        .zip(set.dirs.iter())
        .map(|(v, dir)| v - xi.dot(dir))
        .collect();
    let r_l2 = l2_s_norm(space, bundle, set, &resid);
    let bound_residual = 1.0 - ledger.ln_cap_c1.exp() * r_l2 * r_l2;

    // principal angles between W and the coordinate subspace V
    let coords = bundle.coordinate_fields(set);
    let v_mhalf = inv_sqrt_gram(space, bundle, set, &coords);
    let mut cross = DMatrix::zeros(dn, dn);
    for i in 0..dn {
        for j in 0..dn {
            cross[(i, j)] = bundle.g_inner(space, set, &coords[i], &w_fields[j]);
        }
    }
    let cosines = (&v_mhalf * cross * &s_mhalf).singular_values();
    let projection_jac: f64 = cosines.iter().map(|c| c.min(1.0)).product();
    let sigma_min = cosines.iter().cloned().fold(1.0f64, f64::min).min(1.0);
    let c3 = ledger.cap_c3;
    let bound_projection = 1.0 - c3 * (1.0 - sigma_min * sigma_min);

    let tol = 5e-3;
    RefinedJacobianReport {
        left,
        bound_residual,
        projection_jac,
        bound_projection,
        pass: left <= bound_residual + tol && projection_jac <= bound_projection + tol,
    }
}
