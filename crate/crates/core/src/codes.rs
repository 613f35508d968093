//! CSS code construction, validation and persistence.

use crate::error::{Error, Result};
use crate::gf2::{circulant, poly_gcd, BitMatrix, Gf2Poly};
use crate::io::write_atomic;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A validated `[[n, k, d]]` CSS code with a matching set of logical
/// operators (`L_X · L_Zᵀ = I_k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub h_x: BitMatrix,
    pub h_z: BitMatrix,
    pub l_x: BitMatrix,
    pub l_z: BitMatrix,
    /// Reported distance. Never verified for large codes.
    pub claimed_distance: Option<usize>,
}

impl CssCode {
    pub fn rank_x(&self) -> usize {
        self.h_x.rank()
    }

    pub fn rank_z(&self) -> usize {
        self.h_z.rank()
    }

    /// Physical photons per logical qubit.
    pub fn overhead(&self) -> f64 {
        self.n as f64 / self.k as f64
    }

    pub fn with_claimed_distance(mut self, d: Option<usize>) -> Self {
        self.claimed_distance = d;
        self
    }

    /// Same code with redundant parity rows dropped (rows replaced by the
    /// nonzero rows of their reduced echelon form).
    pub fn row_reduced(&self) -> Result<CssCode> {
        let code = validate_css(&self.name, self.h_x.row_basis(), self.h_z.row_basis())?;
        Ok(code.with_claimed_distance(self.claimed_distance))
    }

    pub fn to_file(&self) -> CodeFile {
        CodeFile {
            name: self.name.clone(),
            n: self.n,
            claimed_distance: self.claimed_distance,
            h_x: self.h_x.to_dense(),
            h_z: self.h_z.to_dense(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::to_json_pretty(&self.to_file())
    }

    pub fn from_json(text: &str) -> Result<CssCode> {
        let file: CodeFile = serde_json::from_str(text)?;
        file.into_code()
    }
}

/// On-disk representation. Logical operators are recomputed on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFile {
    pub name: String,
    pub n: usize,
    pub claimed_distance: Option<usize>,
    pub h_x: Vec<Vec<u8>>,
    pub h_z: Vec<Vec<u8>>,
}

impl CodeFile {
    pub fn into_code(self) -> Result<CssCode> {
        let h_x = BitMatrix::from_dense(self.n, &self.h_x)
            .ok_or_else(|| Error::Parse(format!("h_x is not a 0/1 table with {} columns", self.n)))?;
        let h_z = BitMatrix::from_dense(self.n, &self.h_z)
            .ok_or_else(|| Error::Parse(format!("h_z is not a 0/1 table with {} columns", self.n)))?;
        Ok(validate_css(&self.name, h_x, h_z)?.with_claimed_distance(self.claimed_distance))
    }
}

pub fn load_code(path: impl AsRef<Path>) -> Result<CssCode> {
    CssCode::from_json(&std::fs::read_to_string(path)?)
}

pub fn save_code(code: &CssCode, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), code.to_json()?.as_bytes())
}

/// Checks `H_X · H_Zᵀ = 0`, computes `k` and attaches logical operators.
pub fn validate_css(name: &str, h_x: BitMatrix, h_z: BitMatrix) -> Result<CssCode> {
    if h_x.cols() != h_z.cols() {
        return Err(Error::DimensionMismatch(format!(
            "H_X has {} columns, H_Z has {}",
            h_x.cols(),
            h_z.cols()
        )));
    }
    let n = h_x.cols();
    let overlap = h_x.mul_transpose(&h_z);
    for x_row in 0..overlap.rows() {
        if let Some(z_row) = (0..overlap.cols()).find(|&z| overlap.get(x_row, z)) {
            return Err(Error::NotOrthogonal { x_row, z_row });
        }
    }
    let (l_x, l_z) = logical_operators(&h_x, &h_z)?;
    let k = l_x.rows();
    if k == 0 {
        return Err(Error::NoLogicalQubits);
    }
    Ok(CssCode {
        name: name.to_string(),
        n,
        k,
        h_x,
        h_z,
        l_x,
        l_z,
        claimed_distance: None,
    })
}

/// Kernel vectors of `commuting_with` that are independent modulo the row
/// space of `stabilizers`, taken in kernel-basis order.
fn independent_logicals(stabilizers: &BitMatrix, commuting_with: &BitMatrix) -> BitMatrix {
    let base = stabilizers.row_basis();
    let mut span = base.clone();
    let mut chosen = Vec::new();
    for candidate in commuting_with.kernel().row_iter() {
        if span.solve_in_row_span(&candidate).is_none() {
            span = span.vstack(&BitMatrix::from_rows(candidate.len(), std::slice::from_ref(&candidate)));
            chosen.push(candidate);
        }
    }
    BitMatrix::from_rows(stabilizers.cols(), &chosen)
}

/// Logical operator pairs for the CSS code `(H_X, H_Z)`.
///
/// X-type logicals are kernel vectors of `H_Z` outside the row space of
/// `H_X` (and symmetrically for Z), read off the reduced echelon form. The
/// Z set is then re-based by the inverse of the pairing matrix so that
/// `L_X · L_Zᵀ = I_k`.
pub fn logical_operators(h_x: &BitMatrix, h_z: &BitMatrix) -> Result<(BitMatrix, BitMatrix)> {
    if !h_x.mul_transpose(h_z).is_zero() {
        return Err(Error::InvalidParameter("H_X · H_Zᵀ ≠ 0".into()));
    }
    let n = h_x.cols();
    let l_x = independent_logicals(h_x, h_z);
    let l_z = independent_logicals(h_z, h_x);
    let k = l_x.rows();
    debug_assert_eq!(k, l_z.rows());
    if k == 0 {
        return Ok((BitMatrix::zeros(0, n), BitMatrix::zeros(0, n)));
    }
    let pairing = l_x.mul_transpose(&l_z);
    let inv = pairing
        .inverse()
        .ok_or_else(|| Error::InvalidParameter("degenerate logical pairing".into()))?;
    let l_z = inv.transpose().mul(&l_z);
    Ok((l_x, l_z))
}

/// `[[7,1,3]]` Steane code with both check matrices equal to the Hamming
/// parity-check matrix.
pub fn steane() -> CssCode {
    let h = BitMatrix::from_strs(&["1010101", "0110011", "0001111"]);
    validate_css("steane", h.clone(), h)
        .expect("Steane code is valid")
        .with_claimed_distance(Some(3))
}

/// Toric code on a `d × d` periodic lattice, `n = 2d²`.
///
/// Edge indexing: horizontal edge `(r, c)` joining vertices `(r, c)` and
/// `(r, c+1)` is `r·d + c`; vertical edge `(r, c)` joining `(r, c)` and
/// `(r+1, c)` is `d² + r·d + c`. `H_X` holds one star per vertex and `H_Z`
/// one plaquette per face (top-left corner `(r, c)`), row-major, including
/// the redundant row of each.
pub fn toric(d: usize) -> Result<CssCode> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("toric code needs d >= 2, got {d}")));
    }
    let n = 2 * d * d;
    let h = |r: usize, c: usize| (r % d) * d + (c % d);
    let v = |r: usize, c: usize| d * d + (r % d) * d + (c % d);
    let mut h_x = BitMatrix::zeros(d * d, n);
    let mut h_z = BitMatrix::zeros(d * d, n);
    for r in 0..d {
        for c in 0..d {
            let row = r * d + c;
            for e in [h(r, c), h(r, c + d - 1), v(r, c), v(r + d - 1, c)] {
                h_x.set(row, e, true);
            }
            for e in [h(r, c), h(r + 1, c), v(r, c), v(r, c + 1)] {
                h_z.set(row, e, true);
            }
        }
    }
    Ok(validate_css(&format!("toric{d}"), h_x, h_z)?.with_claimed_distance(Some(d)))
}

/// Generalized bicycle code `H_X = [A, B]`, `H_Z = [Bᵀ, Aᵀ]` from the
/// circulants of `a` and `b`.
pub fn generalized_bicycle(ell: usize, a: &Gf2Poly, b: &Gf2Poly) -> Result<CssCode> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be positive".into()));
    }
    if a.is_zero() || b.is_zero() {
        return Err(Error::InvalidParameter("GB polynomials must be nonzero".into()));
    }
    let ca = circulant(ell, a)?;
    let cb = circulant(ell, b)?;
    let h_x = ca.hstack(&cb);
    let h_z = cb.transpose().hstack(&ca.transpose());
    let code = validate_css(&format!("gb{}", 2 * ell), h_x, h_z)?;
    let expected = 2 * gb_gcd(ell, a, b)?.degree().unwrap_or(0);
    if code.k != expected {
        return Err(Error::InvalidParameter(format!(
            "GB dimension {} disagrees with 2·deg gcd = {expected}",
            code.k
        )));
    }
    Ok(code)
}

/// `gcd(a, b, x^ell + 1)`.
pub fn gb_gcd(ell: usize, a: &Gf2Poly, b: &Gf2Poly) -> Result<Gf2Poly> {
    poly_gcd(a, &poly_gcd(b, &Gf2Poly::cyclic_modulus(ell))?)
}

/// The `[[48,6,8]]` instance: `ell = 24`, `a = 1 + x² + x⁸ + x¹⁵`,
/// `b = 1 + x² + x¹² + x¹⁷`.
pub fn gb48() -> CssCode {
    generalized_bicycle(
        24,
        &Gf2Poly::from_exponents(&[0, 2, 8, 15]),
        &Gf2Poly::from_exponents(&[0, 2, 12, 17]),
    )
    .expect("gb48 parameters are valid")
    .with_claimed_distance(Some(8))
}
