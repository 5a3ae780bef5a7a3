use std::ops::{Add, Sub};

use super::VecError;

/// Dense real vector. Arithmetic runs in `f64` so that sums of stored `f32`
/// rows are exact in the common cases (`b - a + a == b`).
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Self {
        Vector(components)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn from_f32(components: &[f32]) -> Self {
        Vector(components.iter().map(|&c| f64::from(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add_assign(&mut self, other: &Vector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    /// Squared Euclidean distance.
    pub fn sq_dist(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Component-wise mean; `None` for an empty input.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Vector>) -> Option<Vector> {
        let mut iter = vectors.into_iter();
        let mut acc = iter.next()?.clone();
        let mut n = 1usize;
        for v in iter {
            acc.add_assign(v);
            n += 1;
        }
        Some(acc.scale(1.0 / n as f64))
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// `1 - cos(u, v)`, clamped to `[0, 2]`.
pub fn cosine_distance(u: &Vector, v: &Vector) -> Result<f64, VecError> {
    if u.dim() != v.dim() {
        return Err(VecError::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let (uu, vv) = (u.dot(u), v.dot(v));
    if uu == 0.0 || vv == 0.0 {
        return Err(VecError::ZeroVector);
    }
    Ok(cosine_from_parts(u.dot(v), uu, vv))
}

/// `sqrt(uu * vv)` rather than `|u| |v|` keeps the self-distance at exactly 0.
pub(crate) fn cosine_from_parts(uv: f64, uu: f64, vv: f64) -> f64 {
    (1.0 - uv / (uu * vv).sqrt()).clamp(0.0, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::new(xs.to_vec())
    }

    #[test]
    fn cosine_basics() {
        let u = v(&[1.0, 2.0, 3.0]);
        assert_eq!(cosine_distance(&u, &u).unwrap(), 0.0);
        assert!((cosine_distance(&u, &u.scale(-1.0)).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(cosine_distance(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(cosine_distance(&u, &Vector::zeros(3)), Err(VecError::ZeroVector));
        assert!(matches!(
            cosine_distance(&u, &v(&[1.0])),
            Err(VecError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mean_and_ops() {
        let a = v(&[1.0, 2.0]);
        let b = v(&[3.0, 6.0]);
        assert_eq!(Vector::mean([&a, &b]).unwrap(), v(&[2.0, 4.0]));
        assert_eq!(&b - &a, v(&[2.0, 4.0]));
        assert_eq!(&a + &b, v(&[4.0, 8.0]));
        assert!(Vector::mean(std::iter::empty()).is_none());
    }
}
