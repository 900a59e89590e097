//! Normed division algebras R, C, H, O via Cayley-Dickson doubling.
//!
//! A single 8-slot coefficient type represents elements of every algebra in
//! the tower: the doubling construction guarantees that the first 1, 2 and 4
//! basis elements span closed subalgebras (R, C, H). Multiplication uses
//! structure tables built once by recursive doubling with `e4` as the unit
//! that doubles H into O, i.e. `(a, b)(c, d) = (ac - d̄b, da + bc̄)`.

use std::sync::OnceLock;

pub const OCT_DIM: usize = 8;

/// Which algebra a model space is built over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Algebra {
    R,
    C,
    H,
    O,
}

impl Algebra {
    /// Real dimension d of the algebra.
    pub fn dim(self) -> usize {
        match self {
            Algebra::R => 1,
            Algebra::C => 2,
            Algebra::H => 4,
            Algebra::O => 8,
        }
    }
}

/// Structure constants: e_i * e_j = SIGN[i][j] * e_{IDX[i][j]}.
struct MulTable {
    sign: [[i8; 8]; 8],
    idx: [[usize; 8]; 8],
}

fn build_table() -> MulTable {
    // Recursive doubling on index pairs. Split i = (lo, hi) with hi selecting
    // the doubled half; in the half-dimension algebra of size m:
    //   (a,b)(c,d) = (ac - d̄ b, d a + b c̄)
    // where conjugation negates every basis element except e_0.
    fn mul(dim: usize, i: usize, j: usize) -> (i8, usize) {
        if dim == 1 {
            return (1, 0);
        }
        let m = dim / 2;
        let (ia, ib) = (i % m, i / m);
        let (ja, jb) = (j % m, j / m);
        // conj sign of basis element k in dimension m
        let cj = |k: usize| -> i8 {
            if k == 0 {
                1
            } else {
                -1
            }
        };
        match (ib, jb) {
            // a*c contributes to the low half; d*a and b*c̄ to the high half.
            (0, 0) => mul(m, ia, ja),
            (0, 1) => {
                // b = 0, d = e_jb-part: (a, 0)(0, d) = (0, d a)
                let (s, k) = mul(m, ja, ia);
                (s, k + m)
            }
            (1, 0) => {
                // (0, b)(c, 0) = (0, b c̄)
                let (s, k) = mul(m, ia, ja);
                (s * cj(ja), k + m)
            }
            (1, 1) => {
                // (0, b)(0, d) = (-d̄ b, 0)
                let (s, k) = mul(m, ja, ia);
                (-s * cj(ja), k)
            }
            _ => unreachable!(),
        }
    }
    let mut sign = [[0i8; 8]; 8];
    let mut idx = [[0usize; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let (s, k) = mul(8, i, j);
            sign[i][j] = s;
            idx[i][j] = k;
        }
    }
    MulTable { sign, idx }
}

fn table() -> &'static MulTable {
    static TABLE: OnceLock<MulTable> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

/// An element of O (or of a subalgebra, with trailing coefficients zero).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Oct(pub [f64; 8]);

impl Oct {
    pub const ZERO: Oct = Oct([0.0; 8]);

    pub fn one() -> Oct {
        Oct::real(1.0)
    }

    pub fn real(t: f64) -> Oct {
        let mut c = [0.0; 8];
        c[0] = t;
        Oct(c)
    }

    pub fn basis(k: usize) -> Oct {
        let mut c = [0.0; 8];
        c[k] = 1.0;
        Oct(c)
    }

    pub fn re(&self) -> f64 {
        self.0[0]
    }

    pub fn conj(&self) -> Oct {
        let mut c = self.0;
        for v in c.iter_mut().skip(1) {
            *v = -*v;
        }
        Oct(c)
    }

    pub fn add(&self, o: &Oct) -> Oct {
        let mut c = self.0;
        for (v, w) in c.iter_mut().zip(o.0.iter()) {
            *v += w;
        }
        Oct(c)
    }

    pub fn sub(&self, o: &Oct) -> Oct {
        let mut c = self.0;
        for (v, w) in c.iter_mut().zip(o.0.iter()) {
            *v -= w;
        }
        Oct(c)
    }

    pub fn scale(&self, t: f64) -> Oct {
        let mut c = self.0;
        for v in c.iter_mut() {
            *v *= t;
        }
        Oct(c)
    }

    pub fn mul(&self, o: &Oct) -> Oct {
        let t = table();
        let mut out = [0.0; 8];
        for i in 0..8 {
            let xi = self.0[i];
            if xi == 0.0 {
                continue;
            }
            let srow = &t.sign[i];
            let krow = &t.idx[i];
            for j in 0..8 {
                let yj = o.0[j];
                if yj == 0.0 {
                    continue;
                }
                out[krow[j]] += (srow[j] as f64) * xi * yj;
            }
        }
        Oct(out)
    }

    /// Euclidean inner product; coincides with Re(a b̄).
    pub fn inner(&self, o: &Oct) -> f64 {
        self.0.iter().zip(o.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inverse(&self) -> Oct {
        self.conj().scale(1.0 / self.norm_sq())
    }

    /// Coefficients restricted to the first `d` slots.
    pub fn from_slice(v: &[f64]) -> Oct {
        let mut c = [0.0; 8];
        c[..v.len()].copy_from_slice(v);
        Oct(c)
    }

    /// True if all coefficients beyond the first `d` vanish (tolerantly).
    pub fn lies_in(&self, alg: Algebra) -> bool {
        self.0[alg.dim()..].iter().all(|v| v.abs() < 1e-12)
    }
}

/// 8x8 matrix of left multiplication by `a` in the coefficient basis.
pub fn left_mul_matrix(a: &Oct) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(8, 8);
    for j in 0..8 {
        let col = a.mul(&Oct::basis(j));
        for i in 0..8 {
            m[(i, j)] = col.0[i];
        }
    }
    m
}

/// 8x8 matrix of right multiplication by `a`.
pub fn right_mul_matrix(a: &Oct) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(8, 8);
    for j in 0..8 {
        let col = Oct::basis(j).mul(a);
        for i in 0..8 {
            m[(i, j)] = col.0[i];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng_oct(rng: &mut impl rand::Rng) -> Oct {
        let mut c = [0.0; 8];
        for v in c.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        Oct(c)
    }

    #[test]
    fn table_is_division_algebra_grade() {
        let t = table();
        // e_0 is the identity, basis products are signed basis elements,
        // and the table is a Latin square in the index component.
        for i in 0..8 {
            assert_eq!(t.idx[0][i], i);
            assert_eq!(t.sign[0][i], 1);
            assert_eq!(t.idx[i][0], i);
            assert_eq!(t.sign[i][0], 1);
            let mut seen = [false; 8];
            for j in 0..8 {
                assert!(!seen[t.idx[i][j]]);
                seen[t.idx[i][j]] = true;
            }
        }
        // e_i^2 = -1 for i > 0.
        for i in 1..8 {
            assert_eq!(t.idx[i][i], 0);
            assert_eq!(t.sign[i][i], -1);
        }
    }

    #[test]
    fn subalgebras_close() {
        // C spans {e0,e1}, H spans {e0..e3}.
        for (d, _) in [(2usize, "C"), (4usize, "H")] {
            let t = table();
            for i in 0..d {
                for j in 0..d {
                    assert!(t.idx[i][j] < d);
                }
            }
        }
    }

    #[test]
    fn quaternion_subalgebra_is_associative() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut take = |d: usize| {
                let mut o = rng_oct(&mut rng);
                for v in o.0.iter_mut().skip(d) {
                    *v = 0.0;
                }
                o
            };
            let (a, b, c) = (take(4), take(4), take(4));
            let lhs = a.mul(&b).mul(&c);
            let rhs = a.mul(&b.mul(&c));
            assert!(lhs.sub(&rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn composition_norm() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let a = rng_oct(&mut rng);
            let b = rng_oct(&mut rng);
            let err = (a.mul(&b).norm() - a.norm() * b.norm()).abs();
            assert!(err < 1e-12 * (1.0 + a.norm() * b.norm()));
        }
    }
}
