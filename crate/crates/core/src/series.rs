//! Truncated power series in one variable.

use crate::scalar::Scalar;

/// Coefficients `c[0] + c[1] x + …`, truncated at a fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub c: Vec<T>,
}

impl<T: Scalar> Series<T> {
    pub fn new(mut c: Vec<T>, len: usize) -> Self {
        c.resize(len, T::zero());
        Self { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        let mut out = vec![T::zero(); n];
        for (i, a) in self.c.iter().take(n).enumerate() {
            for (j, b) in other.c.iter().take(n - i).enumerate() {
                out[i + j] += *a * *b;
            }
        }
        Self { c: out }
    }

    /// `self^p` for a series with nonzero constant term (J. C. P. Miller's
    /// recurrence).
    pub fn powf(&self, p: T) -> Self {
        let n = self.len();
        let a0 = self.c[0];
        let mut out = vec![T::zero(); n];
        out[0] = a0.powf(p);
        for k in 1..n {
            let kk = T::from_usize(k).unwrap();
            let mut acc = T::zero();
            for j in 1..=k {
                let jj = T::from_usize(j).unwrap();
                acc += ((p + T::one()) * jj - kk) * self.c[j] * out[k - j];
            }
            out[k] = acc / (kk * a0);
        }
        Self { c: out }
    }

    /// `1 / self`.
    pub fn recip(&self) -> Self {
        self.powf(-T::one())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            c: self.c.iter().map(|v| *v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            c: self.c.iter().zip(&other.c).map(|(a, b)| *a + *b).collect(),
        }
    }
}
