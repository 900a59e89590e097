//! Generic matrix facts used by the perturbation arguments, checked by
//! randomized property testing: log-concavity of the determinant on the
//! positive cone, an explicit determinant-perturbation bound for trace-free
//! symmetric matrices, and eigenvalue interlacing under orthogonal averaging
//! and principal truncation.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct MatrixLemmaReport {
    pub trials: usize,
    pub violations: usize,
    /// min over trials of det(avg) − 1 for equal-determinant PD inputs (≥ 0)
    pub worst_logconcavity_margin: f64,
    /// equality branch: |det(avg) − 1| with all inputs equal
    pub equality_branch_residual: f64,
    /// min over trials of (bound − |Δdet|) / bound
    pub worst_perturbation_margin: f64,
    /// min over trials of the interlacing slacks
    pub worst_interlacing_margin: f64,
    pub pass: bool,
}

fn random_symmetric(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-scale..scale));
    (&g + g.transpose()) * 0.5
}

fn random_orthogonal(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    });
    g.qr().q()
}

fn spectral_norm(h: &DMatrix<f64>) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |a, l| a.max(l.abs()))
}

/// Perturbation constant K(m, R) = m!·2^m(2^m − 1)(2R+1)^{m−2}.
pub fn perturbation_constant(m: usize, r: f64) -> f64 {
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    let p = (2.0f64).powi(m as i32);
    fact * p * (p - 1.0) * (2.0 * r + 1.0).powi(m as i32 - 2)
}

/// Run `trials` random checks of each fact, over sizes 2..=16.
pub fn matrix_lemma_suite(seed: u64, trials: usize) -> MatrixLemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut worst_logconcavity_margin = f64::INFINITY;
    let mut worst_perturbation_margin = f64::INFINITY;
    let mut worst_interlacing_margin = f64::INFINITY;

    // equality branch once: identical inputs give back the common determinant
    let eq_avg = (DMatrix::<f64>::identity(6, 6) + DMatrix::identity(6, 6)) * 0.5;
    let equality_branch_residual = (eq_avg.determinant() - 1.0).abs();

    for t in 0..trials {
        let m = 2 + (t % 15);

        // (i) det of an average of equal-determinant PD matrices is ≥ that
        // determinant (log-concavity of det on the PD cone)
        let k = 2 + (t % 3);
        let mut avg = DMatrix::zeros(m, m);
        for _ in 0..k {
            let b = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
            let mut a = &b * b.transpose() + DMatrix::identity(m, m) * 0.05;
            let det: f64 = a.determinant();
            a *= det.powf(-1.0 / m as f64);
            avg += a;
        }
        avg /= k as f64;
        let margin = avg.determinant() - 1.0;
        worst_logconcavity_margin = worst_logconcavity_margin.min(margin);
        if margin < -1e-9 {
            violations += 1;
        }

        // (ii) |det(I+H₁+H₂) − det(I+H₁)| ≤ K(m,R)‖H₂‖(‖H₁‖+‖H₂‖) for
        // trace-free symmetric H_i with spectral norm ≤ R
        let r_cap: f64 = rng.gen_range(0.2..2.0);
        let mut hs = Vec::with_capacity(2);
        for _ in 0..2 {
            let mut h = random_symmetric(&mut rng, m, 1.0);
            let tr = h.trace() / m as f64;
            for i in 0..m {
                h[(i, i)] -= tr;
            }
            let nn = spectral_norm(&h);
            let target = rng.gen_range(0.0..r_cap);
            if nn > 1e-12 {
                h *= target / nn;
            }
            hs.push(h);
        }
        let id = DMatrix::<f64>::identity(m, m);
        let lhs = ((&id + &hs[0] + &hs[1]).determinant() - (&id + &hs[0]).determinant()).abs();
        let n2 = spectral_norm(&hs[1]);
        let bound = perturbation_constant(m, r_cap) * n2 * (spectral_norm(&hs[0]) + n2);
        let pm = if bound > 0.0 {
            (bound - lhs) / bound
        } else {
            0.0
        };
        worst_perturbation_margin = worst_perturbation_margin.min(pm);
        if lhs > bound * (1.0 + 1e-9) + 1e-12 {
            violations += 1;
        }

        // (iii) interlacing: orthogonal averaging and principal truncation
        // both stay inside [λ_min(A), λ_max(A)]
        let a = random_symmetric(&mut rng, m, 1.5);
        let ea = a.clone().symmetric_eigenvalues();
        let (amin, amax) = (
            ea.iter().cloned().fold(f64::INFINITY, f64::min),
            ea.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let kq = 2 + (t % 4);
        let mut avgc = DMatrix::zeros(m, m);
        for _ in 0..kq {
            let u = random_orthogonal(&mut rng, m);
            avgc += &u * &a * u.transpose();
        }
        avgc /= kq as f64;
        let ec = avgc.symmetric_eigenvalues();
        let (cmin, cmax) = (
            ec.iter().cloned().fold(f64::INFINITY, f64::min),
            ec.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let p = 1 + (t % (m - 1));
        let b = a.view((0, 0), (p, p)).clone_owned();
        let eb = b.symmetric_eigenvalues();
        let (bmin, bmax) = (
            eb.iter().cloned().fold(f64::INFINITY, f64::min),
            eb.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        let slack = (cmin - amin)
            .min(amax - cmax)
            .min(bmin - amin)
            .min(amax - bmax);
        worst_interlacing_margin = worst_interlacing_margin.min(slack);
        if slack < -1e-9 {
            violations += 1;
        }
    }

    MatrixLemmaReport {
        trials,
        violations,
        worst_logconcavity_margin,
        equality_branch_residual,
        worst_perturbation_margin,
        worst_interlacing_margin,
        pass: violations == 0 && equality_branch_residual < 1e-12,
    }
}
