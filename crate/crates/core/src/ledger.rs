//! The constants ledger: every explicit constant of the quantitative
//! estimates, carried in log-space because the chain R → R₁ → c₀ → …
//! escalates double-exponentially (c₀ alone overflows f64 for any useful
//! radius). Each entry records its provenance: a closed-form expression, a
//! configured choice, or a numerical estimate.

use crate::busemann::busemann;
use crate::quadrature::SampleSet;
use crate::spaces::Space;
use nalgebra::DVector;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Configured,
    NumericallyEstimated,
}

/// One ledger row. `value` is the plain f64 when it is representable;
/// otherwise it over/underflows to ±∞ or 0 and `ln_value` is authoritative.
#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub name: String,
    pub value: f64,
    pub ln_value: f64,
    pub provenance: Provenance,
}

/// All constants for one space at admissible radius R. Log-space fields are
/// prefixed `ln_`; the remaining fields are of moderate size and kept plain.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsLedger {
    pub space: String,
    pub r: f64,
    /// shadow-mass floor, estimated by minimizing ∫ e^{2Φ_s(x)} ds over a
    /// probe grid in B(x₀, R)
    pub r0: f64,
    /// a-priori radius of the projection: R₁ = 2 e^{2(dn+d)R} / r₀
    pub r1: f64,
    /// ln c₀ with c₀ = (dn+d) e^{(dn+d)(R + R₁)}
    pub ln_c0: f64,
    /// spherical-cap fraction c₂(n) = |{⟨w, v⟩ ≥ 1/2}| / |S^{dn−1}|
    pub c2: f64,
    /// ln C₂ with C₂ = (dn/4) c₂(n) c₀⁻²
    pub ln_cap_c2: f64,
    /// ln c₃, the drift-comparison constant
    pub ln_c3: f64,
    /// ln C₁′ = ln[(1/2 − 1/(n+1)) · (1/4) · C₂^{dn−2} · c₃⁻²]
    pub ln_cap_c1_prime: f64,
    /// C₃ = ½ (1 − 1/dn)^{dn/2 − 1}, the only order-one decay constant
    pub cap_c3: f64,
    /// ln c₄ = ln[(dn/2) c₀⁻² e^{−(dn+d−2)R₁} C₃]
    pub ln_c4: f64,
    /// ln C₁ = ln[½ min(½C₁′, ½c₄)]
    pub ln_cap_c1: f64,
    /// ln c₅ (sum of two exponential terms, combined by log-sum-exp)
    pub ln_c5: f64,
    /// C₅ ≤ 0, already a log-domain quantity (the final smallness exponent)
    pub cap_c5: f64,
    /// configured placeholder for the metric-perturbation constant
    pub cap_c6: f64,
    pub sigma: f64,
    /// compression decay c = σ³/3
    pub c: f64,
}

/// Probe minimization behind r₀: minimum over x in B(x₀, r_max) of the
/// boundary average of e^{2Φ_s(x)}, on a radial grid of random directions.
pub fn shadow_mass_floor(space: &Space, r_max: f64, set: &SampleSet, seed: u64) -> f64 {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dn = space.dim();
    let mut best = f64::INFINITY;
    for dir in 0..8 {
        let mut u = DVector::zeros(dn);
        if dir == 0 {
            u[0] = 1.0;
        } else {
            for c in u.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
            u /= u.norm();
        }
        for k in 0..=10 {
            let t = r_max * (k as f64) / 10.0;
            let x = space.exp_basepoint(&(&u * t));
            let avg: f64 = set
                .weights
                .iter()
                .zip(set.dirs.iter())
                .map(|(w, s)| w * (2.0 * busemann(space, s, &x)).exp())
                .sum();
            best = best.min(avg);
        }
    }
    best
}

/// Fraction of the unit sphere S^{m−1} lying in the cap ⟨w, v⟩ ≥ 1/2,
/// by Simpson quadrature of the 1-D marginal (1 − t²)^{(m−3)/2}.
pub fn cap_fraction(m: usize) -> f64 {
    assert!(m >= 2);
    if m == 2 {
        // the circle marginal has endpoint singularities; use the arc length
        return (0.5f64).acos() / std::f64::consts::PI;
    }
    let p = (m as f64 - 3.0) / 2.0;
    let simpson = |a: f64, b: f64| -> f64 {
        let steps = 4000;
        let h = (b - a) / steps as f64;
        let f = |t: f64| (1.0 - t * t).max(0.0).powf(p);
        let mut acc = f(a) + f(b);
        for i in 1..steps {
            let t = a + h * i as f64;
            acc += f(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    simpson(0.5, 1.0) / simpson(-1.0, 1.0)
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn build_ledger(
    space: &Space,
    r: f64,
    sigma: f64,
    cap_c6: f64,
    set: &SampleSet,
    seed: u64,
) -> ConstantsLedger {
    let dn = space.dim() as f64;
    let n = space.n as f64;
    let m = dn + space.d() as f64; // dn + d
    let delta = m - 2.0; // volume entropy

    let floor = shadow_mass_floor(space, r, set, seed);
    let r0 = (-m * r).exp() * floor;
    let r1 = 2.0 * (2.0 * m * r).exp() / r0;
    assert!(r1.is_finite(), "a-priori radius overflowed; reduce R");

    let ln_c0 = m * (r + r1) + m.ln();
    let c2 = cap_fraction(space.dim());
    let ln_cap_c2 = (dn / 4.0).ln() + c2.ln() - 2.0 * ln_c0;
    // c₃ = √(2 dn⁻¹ c₀² e^{δR₁}) · √dn · ((n+1)/n)² · C₂^{−1/2}
    let ln_c3 = 0.5 * (2.0f64.ln() - dn.ln() + 2.0 * ln_c0 + delta * r1)
        + 0.5 * dn.ln()
        + 2.0 * ((n + 1.0) / n).ln()
        - 0.5 * ln_cap_c2;
    let ln_cap_c1_prime =
        (0.5 - 1.0 / (n + 1.0)).ln() + 0.25f64.ln() + (dn - 2.0) * ln_cap_c2 - 2.0 * ln_c3;
    let cap_c3 = 0.5 * (1.0 - 1.0 / dn).powf(dn / 2.0 - 1.0);
    let ln_c4 = (dn / 2.0).ln() - 2.0 * ln_c0 - delta * r1 + cap_c3.ln();
    let ln_cap_c1 = -2.0 * 2.0f64.ln() + ln_cap_c1_prime.min(ln_c4);
    let ln_c5 = log_sum_exp(
        0.5 * (2.0f64.ln() - dn.ln() + 2.0 * ln_c0 + delta * r1),
        (2.0 * (n + 1.0) / n).ln() + 0.5 * (2.0f64.ln() + delta * r1),
    );
    let ln_scale = (2.0 * m / dn.sqrt()).ln();
    let cap_c5 = (0.5 * ln_cap_c1 + (1.0 - 2.0 * dn) / 2.0 * ln_scale)
        .min(-ln_c5 - dn * ln_scale)
        .min(0.0);

    ConstantsLedger {
        space: space.name(),
        r,
        r0,
        r1,
        ln_c0,
        c2,
        ln_cap_c2,
        ln_c3,
        ln_cap_c1_prime,
        cap_c3,
        ln_c4,
        ln_cap_c1,
        ln_c5,
        cap_c5,
        cap_c6,
        sigma,
        c: sigma * sigma * sigma / 3.0,
    }
}

impl ConstantsLedger {
    /// Flat, ordered rows for reporting. Plain values that over/underflow
    /// f64 appear as ±∞/0 with the log value authoritative.
    pub fn entries(&self) -> Vec<LedgerEntry> {
        let row = |name: &str, ln: f64, prov: Provenance| LedgerEntry {
            name: name.to_string(),
            value: ln.exp(),
            ln_value: ln,
            provenance: prov,
        };
        use Provenance::*;
        vec![
            row("R", self.r.ln(), Configured),
            row("r_0", self.r0.ln(), NumericallyEstimated),
            row("R_1", self.r1.ln(), NumericallyEstimated),
            row("c_0", self.ln_c0, ClosedForm),
            row("c_2", self.c2.ln(), NumericallyEstimated),
            row("C_2", self.ln_cap_c2, ClosedForm),
            row("c_3", self.ln_c3, ClosedForm),
            row("C_1_prime", self.ln_cap_c1_prime, ClosedForm),
            row("C_3", self.cap_c3.ln(), ClosedForm),
            row("c_4", self.ln_c4, ClosedForm),
            row("C_1", self.ln_cap_c1, ClosedForm),
            row("c_5", self.ln_c5, ClosedForm),
            // C₅ is itself an exponent; report it in the value column
            LedgerEntry {
                name: "C_5".to_string(),
                value: self.cap_c5,
                ln_value: self.cap_c5,
                provenance: ClosedForm,
            },
            row("C_6", self.cap_c6.ln(), Configured),
            row("sigma", self.sigma.ln(), Configured),
            row("c", self.c.ln(), ClosedForm),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,ln_value,provenance\r\n");
        for e in self.entries() {
            let prov = match e.provenance {
                Provenance::ClosedForm => "closed-form",
                Provenance::Configured => "configured",
                Provenance::NumericallyEstimated => "numerically-estimated",
            };
            out.push_str(&format!(
                "{},{},{},{}\r\n",
                e.name, e.value, e.ln_value, prov
            ));
        }
        out
    }
}
