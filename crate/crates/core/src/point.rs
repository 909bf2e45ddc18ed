//! Points of complex n-space.
//!
//! A [`Point`] is a finite vector of complex coordinates. The Hermitian
//! product is `⟨z, w⟩ = Σ z_j · conj(w_j)`, linear in the first slot.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        ensure!(!coords.is_empty(), Parameter, "a point needs at least one coordinate");
        ensure!(
            coords.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            Validation,
            "point has non-finite coordinates"
        );
        Ok(Self(coords))
    }

    /// Builds a point without validation. Callers guarantee finiteness.
    pub(crate) fn from_vec_unchecked(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn origin(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// `t · e_axis` in complex n-space.
    pub fn on_axis(n: usize, axis: usize, t: f64) -> Self {
        let mut p = Self::origin(n);
        p.0[axis] = Complex64::new(t, 0.0);
        p
    }

    /// Builds a point from interleaved `(re₁, im₁, …, re_n, im_n)`.
    pub fn from_reals(reals: &[f64]) -> Result<Self> {
        ensure!(
            !reals.is_empty() && reals.len() % 2 == 0,
            Validation,
            "expected an even, non-zero number of reals, got {}",
            reals.len()
        );
        Self::new(
            reals
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        neumaier(self.0.iter().map(|c| c.norm_sqr()))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian product `⟨self, other⟩ = Σ self_j · conj(other_j)`.
    pub fn inner(&self, other: &Point) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        let (re, im) = compensated_inner(Complex64::new(0.0, 0.0), 1.0, self, other);
        Complex64::new(re, im)
    }

    /// `1 − ⟨self, other⟩`, with the constant folded into the compensated sum.
    pub fn one_minus_inner(&self, other: &Point) -> Complex64 {
        let (re, im) = compensated_inner(Complex64::new(1.0, 0.0), -1.0, self, other);
        Complex64::new(re, im)
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|c| c * s).collect())
    }

    pub fn scale_complex(&self, s: Complex64) -> Point {
        Point(self.0.iter().map(|c| c * s).collect())
    }

    pub fn neg(&self) -> Point {
        Point(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn conj(&self) -> Point {
        Point(self.0.iter().map(|c| c.conj()).collect())
    }

    /// One CSV row of `2n` reals.
    pub fn to_csv_row(&self) -> String {
        self.to_reals()
            .iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let reals = row
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Validation(format!("bad real {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_reals(&reals)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_reals().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let reals = Vec::<f64>::deserialize(deserializer)?;
        Point::from_reals(&reals).map_err(serde::de::Error::custom)
    }
}

/// `start + sign·⟨z, w⟩`.
fn compensated_inner(start: Complex64, sign: f64, z: &Point, w: &Point) -> (f64, f64) {
    // Each product contributes two real terms per component; keep them
    // separate so the compensation sees the individual magnitudes.
    let re_terms = std::iter::once(start.re).chain(
        z.0.iter()
            .zip(&w.0)
            .flat_map(move |(a, b)| [sign * a.re * b.re, sign * a.im * b.im]),
    );
    let im_terms = std::iter::once(start.im).chain(
        z.0.iter()
            .zip(&w.0)
            .flat_map(move |(a, b)| [sign * a.im * b.re, -(sign * a.re * b.im)]),
    );
    (neumaier(re_terms), neumaier(im_terms))
}

/// Neumaier's compensated summation.
pub fn neumaier<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Every partial sum of [`neumaier`], in one pass; the last equals it.
pub fn neumaier_prefix<I: IntoIterator<Item = f64>>(terms: I) -> Vec<f64> {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut out = Vec::new();
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums_end_in_the_total() {
        let terms: Vec<f64> = (1..200).map(|k| (-(k as f64)).exp() * if k % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let prefix = neumaier_prefix(terms.iter().copied());
        assert_eq!(prefix.len(), terms.len());
        for k in [1, 17, 199] {
            assert_eq!(prefix[k - 1], neumaier(terms[..k].iter().copied()));
        }
    }

    #[test]
    fn inner_is_conjugate_linear_in_second_slot() {
        let z = Point::from_reals(&[0.1, 0.2, -0.3, 0.05]).unwrap();
        let w = Point::from_reals(&[0.4, -0.1, 0.2, 0.3]).unwrap();
        let zw = z.inner(&w);
        let wz = w.inner(&z);
        assert_eq!(zw, wz.conj());
        let expected = z.coords()[0] * w.coords()[0].conj() + z.coords()[1] * w.coords()[1].conj();
        assert!((zw - expected).norm() < 1e-15);
    }

    #[test]
    fn one_minus_inner_matches_direct_form() {
        let z = Point::from_reals(&[0.6, 0.0]).unwrap();
        let w = Point::from_reals(&[0.3, 0.4]).unwrap();
        let direct = Complex64::new(1.0, 0.0) - z.inner(&w);
        assert!((z.one_minus_inner(&w) - direct).norm() < 1e-15);
    }

    #[test]
    fn csv_row_round_trip() {
        let p = Point::from_reals(&[0.125, -0.5, 1e-9, 0.3]).unwrap();
        assert_eq!(Point::from_csv_row(&p.to_csv_row()).unwrap(), p);
    }

    #[test]
    fn rejects_odd_real_count_and_nan() {
        assert!(Point::from_reals(&[0.1, 0.2, 0.3]).is_err());
        assert!(Point::from_reals(&[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let s = neumaier([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }
}
