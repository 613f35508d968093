//! Polynomials over GF(2) and the circulant matrices they generate.

use super::{words_for, BitMatrix};
use crate::error::{Error, Result};
use std::fmt;

/// A polynomial with GF(2) coefficients, stored as a packed bit sequence
/// indexed by exponent. Trailing zero words are always trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_exponents(&[0])
    }

    /// Sum of `x^e` over the given exponents; repeated exponents cancel.
    pub fn from_exponents(exponents: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exponents {
            p.flip(e);
        }
        p
    }

    /// `x^ell + 1`, which equals `x^ell - 1` over GF(2).
    pub fn cyclic_modulus(ell: usize) -> Self {
        Self::from_exponents(&[0, ell])
    }

    fn flip(&mut self, e: usize) {
        let need = e / 64 + 1;
        if self.words.len() < need {
            self.words.resize(need, 0);
        }
        self.words[e / 64] ^= 1 << (e % 64);
        self.trim();
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn coeff(&self, e: usize) -> bool {
        self.words.get(e / 64).is_some_and(|w| (w >> (e % 64)) & 1 == 1)
    }

    pub fn exponents(&self) -> Vec<usize> {
        (0..self.degree().map_or(0, |d| d + 1))
            .filter(|&e| self.coeff(e))
            .collect()
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let n = self.words.len().max(other.words.len());
        let mut words = vec![0; n];
        for (i, w) in words.iter_mut().enumerate() {
            *w = self.words.get(i).copied().unwrap_or(0) ^ other.words.get(i).copied().unwrap_or(0);
        }
        let mut p = Gf2Poly { words };
        p.trim();
        p
    }

    /// Carry-less product.
    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Gf2Poly::zero();
        };
        let mut words = vec![0u64; words_for(da + db + 1)];
        for e in self.exponents() {
            // Shift `other` by e and XOR in.
            let (ws, bs) = (e / 64, e % 64);
            for (i, &w) in other.words.iter().enumerate() {
                words[i + ws] ^= w << bs;
                if bs != 0 && i + ws + 1 < words.len() {
                    words[i + ws + 1] ^= w >> (64 - bs);
                }
            }
        }
        let mut p = Gf2Poly { words };
        p.trim();
        p
    }

    /// Quotient and remainder of polynomial long division.
    pub fn div_rem(&self, divisor: &Gf2Poly) -> Result<(Gf2Poly, Gf2Poly)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let mut rem = self.clone();
        let mut quot = Gf2Poly::zero();
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let shift = dr - dd;
            quot.flip(shift);
            rem = rem.add(&divisor.shifted(shift));
        }
        Ok((quot, rem))
    }

    fn shifted(&self, by: usize) -> Gf2Poly {
        Gf2Poly::from_exponents(&self.exponents().iter().map(|e| e + by).collect::<Vec<_>>())
    }

    /// Reduction modulo `x^ell + 1` by folding exponents.
    pub fn reduce_cyclic(&self, ell: usize) -> Gf2Poly {
        assert!(ell > 0, "cyclic reduction needs ell > 0");
        Gf2Poly::from_exponents(&self.exponents().iter().map(|e| e % ell).collect::<Vec<_>>())
    }
}

/// Greatest common divisor by Euclid's algorithm.
pub fn poly_gcd(a: &Gf2Poly, b: &Gf2Poly) -> Result<Gf2Poly> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::UndefinedGcd);
    }
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let (_, r) = x.div_rem(&y)?;
        x = y;
        y = r;
    }
    Ok(x)
}

/// The `ell × ell` circulant `Σ p_m P^m`, where `P` is the right cyclic
/// shift with `P[i][j] = 1` iff `j ≡ i - 1 (mod ell)`. Entry `(i, j)` is
/// therefore the coefficient of `x^((i - j) mod ell)`.
pub fn circulant(ell: usize, p: &Gf2Poly) -> Result<BitMatrix> {
    if ell == 0 {
        return Err(Error::InvalidParameter("circulant size must be positive".into()));
    }
    let p = p.reduce_cyclic(ell);
    let mut m = BitMatrix::zeros(ell, ell);
    for e in p.exponents() {
        for i in 0..ell {
            m.set(i, (i + ell - e) % ell, true);
        }
    }
    Ok(m)
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .exponents()
            .into_iter()
            .map(|e| match e {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{e}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}
