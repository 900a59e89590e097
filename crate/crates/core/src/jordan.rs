//! The exceptional Jordan-algebra machinery behind the octonion hyperbolic
//! plane: 3x3 octonion matrices X with I X* I = X for I = diag(1,-1,-1),
//! their Jordan product, the rank-one idempotents X_v built from model
//! vectors, and the quadratic-representation symmetries used as transvections.

use crate::algebra::Oct;

/// 3x3 matrix with octonion entries.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanMat {
    pub m: [[Oct; 3]; 3],
}

impl JordanMat {
    pub fn zeros() -> Self {
        JordanMat {
            m: [[Oct::ZERO; 3]; 3],
        }
    }

    pub fn identity() -> Self {
        let mut x = Self::zeros();
        for i in 0..3 {
            x.m[i][i] = Oct::one();
        }
        x
    }

    pub fn add(&self, o: &JordanMat) -> Self {
        let mut x = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                x.m[i][j] = self.m[i][j].add(&o.m[i][j]);
            }
        }
        x
    }

    pub fn sub(&self, o: &JordanMat) -> Self {
        let mut x = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                x.m[i][j] = self.m[i][j].sub(&o.m[i][j]);
            }
        }
        x
    }

    pub fn scale(&self, t: f64) -> Self {
        let mut x = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                x.m[i][j] = self.m[i][j].scale(t);
            }
        }
        x
    }

    /// Ordinary (non-commutative, non-associative) matrix product.
    pub fn matmul(&self, o: &JordanMat) -> Self {
        let mut x = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Oct::ZERO;
                for k in 0..3 {
                    acc = acc.add(&self.m[i][k].mul(&o.m[k][j]));
                }
                x.m[i][j] = acc;
            }
        }
        x
    }

    /// Jordan product (XY + YX)/2.
    pub fn jordan(&self, o: &JordanMat) -> Self {
        self.matmul(o).add(&o.matmul(self)).scale(0.5)
    }

    /// Real trace (imaginary parts of the diagonal cancel for admissible X).
    pub fn trace(&self) -> f64 {
        self.m[0][0].re() + self.m[1][1].re() + self.m[2][2].re()
    }

    /// Residual of the defining constraint I X* I = X, I = diag(1,-1,-1).
    pub fn admissibility_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                // (I X* I)_{ij} = s_i s_j conj(X_{ji}) with s = (1,-1,-1)
                let s = if (i == 0) ^ (j == 0) { -1.0 } else { 1.0 };
                let want = self.m[j][i].conj().scale(s);
                r = r.max(want.sub(&self.m[i][j]).norm());
            }
        }
        r
    }

    /// Residual of idempotency X∘X = X.
    pub fn idempotency_residual(&self) -> f64 {
        let sq = self.jordan(self);
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                r = r.max(sq.m[i][j].sub(&self.m[i][j]).norm());
            }
        }
        r
    }
}

/// Rank-one matrix I_{1,2} v* v of the row vector v = (θ, b, c).
pub fn from_vector(theta: f64, b: &Oct, c: &Oct) -> JordanMat {
    let v = [Oct::real(theta), *b, *c];
    let mut x = JordanMat::zeros();
    for i in 0..3 {
        let s = if i == 0 { 1.0 } else { -1.0 };
        for j in 0..3 {
            x.m[i][j] = v[i].conj().mul(&v[j]).scale(s);
        }
    }
    x
}

/// Recover (θ, b, c) with θ > 0 from a rank-one idempotent with X_11 > 0.
pub fn to_vector(x: &JordanMat) -> (f64, Oct, Oct) {
    let theta = x.m[0][0].re().max(0.0).sqrt();
    let b = x.m[0][1].scale(1.0 / theta);
    let c = x.m[0][2].scale(1.0 / theta);
    (theta, b, c)
}

/// Classification of a trace-one idempotent by the sign of X_11.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum PointClass {
    /// X_11 >= 1: point of the hyperbolic plane.
    Inner,
    /// X_11 <= 0: point of the "outer" companion space.
    Outer,
    /// 0 < X_11 < 1: neither sheet (not attained by admissible idempotents).
    Indeterminate,
}

pub fn classify(x: &JordanMat) -> PointClass {
    let t = x.m[0][0].re();
    if t >= 1.0 - 1e-9 {
        PointClass::Inner
    } else if t <= 1e-9 {
        PointClass::Outer
    } else {
        PointClass::Indeterminate
    }
}

/// Quadratic representation U_a(y) = 2 a∘(a∘y) − (a∘a)∘y.
///
/// For a = 2X − I with X a trace-one idempotent, a∘a = I and U_a is the
/// geodesic symmetry of the plane at X (an automorphism of the Jordan
/// structure fixing X with differential −id).
pub fn quad_rep(a: &JordanMat, y: &JordanMat) -> JordanMat {
    let ay = a.jordan(y);
    let aay = a.jordan(&ay);
    let aa = a.jordan(a);
    aay.scale(2.0).sub(&aa.jordan(y))
}

/// Geodesic symmetry at the idempotent X applied to Y.
pub fn point_symmetry(x: &JordanMat, y: &JordanMat) -> JordanMat {
    let a = x.scale(2.0).sub(&JordanMat::identity());
    quad_rep(&a, y)
}
