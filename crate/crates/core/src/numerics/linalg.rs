//! Fixed-size complex vectors and matrices.
//!
//! Only dimensions 2 (the driven qubit manifold) and 3 (the full transmon
//! ladder) are used, so everything is stack allocated and written out by hand.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use super::Complex;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Column vector of `N` complex amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec<const N: usize>(pub [Complex; N]);

/// `N x N` complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat<const N: usize>(pub [[Complex; N]; N]);

pub type CVec2 = CVec<2>;
pub type CVec3 = CVec<3>;
pub type CMat2 = CMat<2>;
pub type CMat3 = CMat<3>;

impl<const N: usize> CVec<N> {
    pub const fn new(components: [Complex; N]) -> Self {
        CVec(components)
    }

    pub fn zeros() -> Self {
        CVec([ZERO; N])
    }

    /// Unit vector along basis index `i`.
    pub fn basis(i: usize) -> Self {
        let mut v = Self::zeros();
        v.0[i] = ONE;
        v
    }

    pub fn from_real(components: [f64; N]) -> Self {
        CVec(components.map(|x| Complex::new(x, 0.0)))
    }

    /// Hermitian inner product `<self|other>` (conjugates `self`).
    pub fn inner(&self, other: &Self) -> Complex {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    /// Bilinear contraction without conjugation; used when `self` already
    /// holds the components of a bra.
    pub fn contract(&self, other: &Self) -> Complex {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(ZERO, |acc, (a, b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn conj(&self) -> Self {
        CVec(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: Complex) -> Self {
        CVec(self.0.map(|z| z * s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        CVec(self.0.map(|z| z * s))
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale_real(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Outer product `|self><other|`.
    pub fn outer(&self, other: &Self) -> CMat<N> {
        let mut m = CMat::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[i] * other.0[j].conj();
            }
        }
        m
    }

    /// Row vector `self` (bra components) acting on the matrix from the left.
    pub fn row_mul(&self, m: &CMat<N>) -> Self {
        let mut out = Self::zeros();
        for j in 0..N {
            out.0[j] = (0..N).fold(ZERO, |acc, i| acc + self.0[i] * m.0[i][j]);
        }
        out
    }
}

impl<const N: usize> CMat<N> {
    pub const fn new(rows: [[Complex; N]; N]) -> Self {
        CMat(rows)
    }

    pub fn zeros() -> Self {
        CMat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    /// Dyad `|ket><bra|` where `bra` holds bra components (no conjugation).
    pub fn dyad(ket: &CVec<N>, bra: &CVec<N>) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = ket.0[i] * bra.0[j];
            }
        }
        m
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex {
        (0..N).fold(ZERO, |acc, i| acc + self.0[i][i])
    }

    pub fn scale(&self, s: Complex) -> Self {
        CMat(self.0.map(|row| row.map(|z| z * s)))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        CMat(self.0.map(|row| row.map(|z| z * s)))
    }

    pub fn mul_vec(&self, v: &CVec<N>) -> CVec<N> {
        let mut out = CVec::zeros();
        for i in 0..N {
            out.0[i] = (0..N).fold(ZERO, |acc, j| acc + self.0[i][j] * v.0[j]);
        }
        out
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] = (0..N).fold(ZERO, |acc, k| acc + self.0[i][k] * other.0[k][j]);
            }
        }
        out
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul_mat(other) - other.mul_mat(self)
    }

    /// `{self, other} = self*other + other*self`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul_mat(other) + other.mul_mat(self)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Expectation value `<v|self|v>` (not normalized).
    pub fn expectation(&self, v: &CVec<N>) -> Complex {
        v.inner(&self.mul_vec(v))
    }
}

impl CMat<3> {
    pub fn determinant(&self) -> Complex {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Eigenvalues of the Hermitian part, ascending (cyclic complex Jacobi).
    pub fn hermitian_eigenvalues(&self) -> [f64; 3] {
        let mut h = (*self + self.dagger()).scale_real(0.5);
        let scale = h.norm().max(f64::MIN_POSITIVE);
        for _ in 0..50 {
            let off = h.0[0][1].norm_sqr() + h.0[0][2].norm_sqr() + h.0[1][2].norm_sqr();
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                let apq = h.0[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let theta = (h.0[q][q].re - h.0[p][p].re) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut u = Self::identity();
                u.0[p][p] = Complex::new(c, 0.0);
                u.0[q][q] = Complex::new(c, 0.0);
                u.0[p][q] = phase * s;
                u.0[q][p] = -phase.conj() * s;
                h = u.dagger().mul_mat(&h).mul_mat(&u);
            }
        }
        let mut ev = [h.0[0][0].re, h.0[1][1].re, h.0[2][2].re];
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl<const N: usize> Index<usize> for CVec<N> {
    type Output = Complex;
    fn index(&self, i: usize) -> &Complex {
        &self.0[i]
    }
}

impl<const N: usize> IndexMut<usize> for CVec<N> {
    fn index_mut(&mut self, i: usize) -> &mut Complex {
        &mut self.0[i]
    }
}

impl<const N: usize> Index<(usize, usize)> for CMat<N> {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            self.0[i] += rhs.0[i];
        }
        self
    }
}

impl<const N: usize> AddAssign for CVec<N> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..N {
            self.0[i] += rhs.0[i];
        }
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            self.0[i] -= rhs.0[i];
        }
        self
    }
}

impl<const N: usize> Neg for CVec<N> {
    type Output = Self;
    fn neg(self) -> Self {
        CVec(self.0.map(|z| -z))
    }
}

impl<const N: usize> Mul<Complex> for CVec<N> {
    type Output = Self;
    fn mul(self, s: Complex) -> Self {
        self.scale(s)
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> AddAssign for CMat<N> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for CMat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        CMat(self.0.map(|row| row.map(|z| -z)))
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_mat(&rhs)
    }
}

impl<const N: usize> Mul<CVec<N>> for CMat<N> {
    type Output = CVec<N>;
    fn mul(self, rhs: CVec<N>) -> CVec<N> {
        self.mul_vec(&rhs)
    }
}

impl<const N: usize> Mul<Complex> for CMat<N> {
    type Output = Self;
    fn mul(self, s: Complex) -> Self {
        self.scale(s)
    }
}
