//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet`] carries the Taylor coefficients of a smooth function of two chart
//! variables `(u, v)` around a base point, up to total degree 6. Arithmetic on
//! jets propagates exact derivatives, which is what lets the analytic oracle
//! evaluate sixth-order quantities like the bilaplacian of the mean curvature
//! without any finite differencing.

/// Maximum total degree carried by a jet.
pub const ORDER: usize = 6;

/// Number of coefficients for a bivariate polynomial of total degree `<= ORDER`.
pub const LEN: usize = (ORDER + 1) * (ORDER + 2) / 2;

/// Coefficient index for the monomial `du^i dv^j`, `i + j <= ORDER`.
///
/// Coefficients are grouped by total degree `d = i + j` and ordered by `j`
/// within each group.
#[inline]
pub const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Taylor coefficients `c[idx(i,j)] = (1/(i! j!)) d^{i+j} f / du^i dv^j` at the
/// base point.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub c: [f64; LEN],
}

impl Jet {
    pub const fn zero() -> Self {
        Jet { c: [0.0; LEN] }
    }

    pub fn constant(x: f64) -> Self {
        let mut j = Jet::zero();
        j.c[0] = x;
        j
    }

    /// The chart variable `u` around base value `u0`.
    pub fn var_u(u0: f64) -> Self {
        let mut j = Jet::zero();
        j.c[0] = u0;
        j.c[idx(1, 0)] = 1.0;
        j
    }

    /// The chart variable `v` around base value `v0`.
    pub fn var_v(v0: f64) -> Self {
        let mut j = Jet::zero();
        j.c[0] = v0;
        j.c[idx(0, 1)] = 1.0;
        j
    }

    /// Value at the base point.
    #[inline]
    pub fn val(&self) -> f64 {
        self.c[0]
    }

    /// Exact partial derivative `d^{i+j} f / du^i dv^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        let mut fact = 1.0;
        for k in 2..=i {
            fact *= k as f64;
        }
        for k in 2..=j {
            fact *= k as f64;
        }
        self.c[idx(i, j)] * fact
    }

    /// Derivative with respect to `u`. Degree-`ORDER` coefficients of the
    /// result are unknown and set to zero, so each differentiation consumes
    /// one order of validity.
    pub fn du(&self) -> Self {
        let mut out = Jet::zero();
        for i in 0..ORDER {
            for j in 0..ORDER - i {
                out.c[idx(i, j)] = (i + 1) as f64 * self.c[idx(i + 1, j)];
            }
        }
        out
    }

    /// Derivative with respect to `v`.
    pub fn dv(&self) -> Self {
        let mut out = Jet::zero();
        for i in 0..ORDER {
            for j in 0..ORDER - i {
                out.c[idx(i, j)] = (j + 1) as f64 * self.c[idx(i, j + 1)];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for c in out.c.iter_mut() {
            *c *= s;
        }
        out
    }

    /// Composition `g(self)` where `derivs[k] = g^(k)` evaluated at the value
    /// of `self`. Evaluated by Horner's rule in the nilpotent part.
    pub fn compose(&self, derivs: [f64; ORDER + 1]) -> Self {
        // Taylor coefficients of g around self.val().
        let mut coeff = [0.0; ORDER + 1];
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate() {
            if k > 1 {
                fact *= k as f64;
            }
            coeff[k] = d / fact;
        }
        let mut x = *self;
        x.c[0] = 0.0;
        let mut r = Jet::constant(coeff[ORDER]);
        for k in (0..ORDER).rev() {
            r = r * x + Jet::constant(coeff[k]);
        }
        r
    }

    /// Multiplicative inverse. The constant term must be nonzero.
    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut derivs = [0.0; ORDER + 1];
        let mut d = 1.0 / a0;
        for k in 0..=ORDER {
            derivs[k] = d;
            // d^(k+1) = -(k+1)/a0 * d^(k)
            d *= -((k + 1) as f64) / a0;
        }
        self.compose(derivs)
    }

    /// Square root. The constant term must be positive.
    pub fn sqrt(&self) -> Self {
        let a0 = self.c[0];
        let r = a0.sqrt();
        let mut derivs = [0.0; ORDER + 1];
        let mut d = r;
        let mut p = 0.5;
        for k in 0..=ORDER {
            derivs[k] = d;
            d *= p / a0;
            p -= 1.0;
        }
        self.compose(derivs)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c, s, c, -s])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s, c, -s, -c])
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, n: usize) -> Self {
        let mut r = Jet::constant(1.0);
        for _ in 0..n {
            r = r * *self;
        }
        r
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut out = self;
        for (a, b) in out.c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        out
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let mut out = self;
        for (a, b) in out.c.iter_mut().zip(rhs.c.iter()) {
            *a -= b;
        }
        out
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = Jet::zero();
        for d1 in 0..=ORDER {
            for j1 in 0..=d1 {
                let i1 = d1 - j1;
                let a = self.c[idx(i1, j1)];
                if a == 0.0 {
                    continue;
                }
                for d2 in 0..=ORDER - d1 {
                    for j2 in 0..=d2 {
                        let i2 = d2 - j2;
                        out.c[idx(i1 + i2, j1 + j2)] += a * rhs.c[idx(i2, j2)];
                    }
                }
            }
        }
        out
    }
}

impl std::ops::Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}
