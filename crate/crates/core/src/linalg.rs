//! Small dense complex matrices (irrep blocks are at most 2x2).

use crate::C64;
use std::ops::Mul;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    a: Vec<C64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            a: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Row-major entries.
    pub fn from_rows(n: usize, a: Vec<C64>) -> Self {
        assert_eq!(a.len(), n * n, "matrix data has wrong length");
        Mat { n, a }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.a[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.a
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[j * n + i] = self.a[i * n + j].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Mat {
            n: self.n,
            a: self.a.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat {
            n: self.n,
            a: self.a.iter().map(|z| z * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.n, other.n);
        self.a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for &Mat {
    type Output = Mat;

    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.a[i * n + k];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m.a[i * n + j] += x * rhs.a[k * n + j];
                }
            }
        }
        m
    }
}
