use std::fmt;

use crate::error::{Error, Result};

/// A decision vector, optionally carrying a row-major matrix shape.
#[derive(Clone, PartialEq)]
pub struct Point {
    data: Vec<f64>,
    shape: Option<(usize, usize)>,
}

impl Point {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        check_finite(&data, "point")?;
        Ok(Self { data, shape: None })
    }

    /// Wraps a row-major `rows x cols` matrix.
    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        check_finite(&data, "matrix point")?;
        Ok(Self {
            data,
            shape: Some((rows, cols)),
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![0.0; dim],
            shape: None,
        }
    }

    pub fn zeros_like(other: &Point) -> Self {
        Self {
            data: vec![0.0; other.len()],
            shape: other.shape,
        }
    }

    /// Builds a point without the finiteness scan. Callers guarantee finite data.
    pub(crate) fn from_raw(data: Vec<f64>, shape: Option<(usize, usize)>) -> Self {
        debug_assert!(shape.is_none_or(|(m, n)| m * n == data.len()));
        Self { data, shape }
    }

    pub fn with_shape(mut self, shape: Option<(usize, usize)>) -> Result<Self> {
        if let Some((m, n)) = shape {
            if m * n != self.data.len() {
                return Err(Error::DimensionMismatch {
                    expected: m * n,
                    got: self.data.len(),
                });
            }
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm_l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self += scale * other`
    pub fn axpy(&mut self, scale: f64, other: &Point) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scaled(&self, scale: f64) -> Point {
        Point::from_raw(self.data.iter().map(|v| v * scale).collect(), self.shape)
    }

    /// Convex-combination step `self + gamma * (target - self)`.
    pub fn step_toward(&mut self, target: &Point, gamma: f64) {
        for (a, b) in self.data.iter_mut().zip(&target.data) {
            *a += gamma * (b - *a);
        }
    }

    pub fn distance_l2(&self, other: &Point) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// 64-bit FNV-1a digest of the little-endian bit patterns, as 16 hex digits.
    pub fn digest(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        for v in &self.data {
            for byte in v.to_bits().to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(PRIME);
            }
        }
        format!("{hash:016x}")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("Point");
        if let Some(shape) = self.shape {
            s.field("shape", &shape);
        }
        s.field("data", &self.data).finish()
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.data
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_shape_must_match_length() {
        assert!(Point::matrix(2, 3, vec![0.0; 5]).is_err());
        assert!(Point::matrix(2, 3, vec![0.0; 6]).is_ok());
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn digest_distinguishes_signed_zero() {
        let a = Point::new(vec![0.0]).unwrap();
        let b = Point::new(vec![-0.0]).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn step_toward_is_convex_combination() {
        let mut x = Point::new(vec![0.0, 2.0]).unwrap();
        let v = Point::new(vec![1.0, 0.0]).unwrap();
        x.step_toward(&v, 0.25);
        assert_eq!(x.as_slice(), &[0.25, 1.5]);
    }
}
