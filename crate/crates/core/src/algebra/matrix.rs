//! Dense matrices over `R`, `C` or `H`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quaternion::Quaternion;
use crate::error::{Error, Result};

/// The division algebra of the entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    R,
    C,
    H,
}

impl Field {
    /// Real dimension `d` of the algebra.
    pub fn d(self) -> usize {
        match self {
            Field::R => 1,
            Field::C => 2,
            Field::H => 4,
        }
    }

    pub fn from_d(d: usize) -> Result<Field> {
        match d {
            1 => Ok(Field::R),
            2 => Ok(Field::C),
            4 => Ok(Field::H),
            _ => Err(Error::InvalidParameter(format!("no division algebra of dimension {d}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::R => "R",
            Field::C => "C",
            Field::H => "H",
        }
    }

    pub fn contains(self, x: Quaternion) -> bool {
        match self {
            Field::R => x.b == 0.0 && x.c == 0.0 && x.d == 0.0,
            Field::C => x.c == 0.0 && x.d == 0.0,
            Field::H => true,
        }
    }

    /// Drop the components that do not belong to the field.
    pub fn project(self, x: Quaternion) -> Quaternion {
        match self {
            Field::R => Quaternion::real(x.a),
            Field::C => Quaternion::new(x.a, x.b, 0.0, 0.0),
            Field::H => x,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Field> {
        match s {
            "R" | "r" => Ok(Field::R),
            "C" | "c" => Ok(Field::C),
            "H" | "h" => Ok(Field::H),
            _ => Err(Error::InvalidParameter(format!("unknown field '{s}'"))),
        }
    }
}

/// A `rows x cols` matrix with entries in `field`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixF {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl MatrixF {
    pub fn new(field: Field, rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| !field.contains(**x)) {
            let _ = bad;
            return Err(Error::WrongField { field: field.name() });
        }
        Ok(MatrixF { field, rows, cols, data })
    }

    /// Build from entries, silently dropping components outside the field.
    pub fn from_projected(field: Field, rows: usize, cols: usize, data: Vec<Quaternion>) -> Self {
        assert_eq!(data.len(), rows * cols);
        let data = data.into_iter().map(|x| field.project(x)).collect();
        MatrixF { field, rows, cols, data }
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        MatrixF { field, rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = MatrixF::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = Quaternion::ONE;
        }
        m
    }

    pub fn from_real(field: Field, rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let data = entries.iter().map(|&x| Quaternion::real(x)).collect();
        MatrixF::new(field, rows, cols, data)
    }

    pub fn diag(field: Field, diagonal: &[f64]) -> Self {
        let n = diagonal.len();
        let mut m = MatrixF::zeros(field, n, n);
        for (i, &x) in diagonal.iter().enumerate() {
            m.data[i * n + i] = Quaternion::real(x);
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Quaternion] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Quaternion) {
        debug_assert!(self.field.contains(x));
        self.data[i * self.cols + j] = x;
    }

    pub fn adjoint(&self) -> MatrixF {
        let mut out = MatrixF::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &MatrixF) -> MatrixF {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let field = wider(self.field, other.field);
        let mut out = MatrixF::zeros(field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Quaternion::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &MatrixF) -> MatrixF {
        self.zip(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &MatrixF) -> MatrixF {
        self.zip(other, |x, y| x - y)
    }

    pub fn scale(&self, s: f64) -> MatrixF {
        MatrixF {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.scale(s)).collect(),
        }
    }

    fn zip(&self, other: &MatrixF, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> MatrixF {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        MatrixF {
            field: wider(self.field, other.field),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    /// Reinterpret the entries in a larger field.
    pub fn promote(&self, field: Field) -> MatrixF {
        assert!(field.d() >= self.field.d(), "cannot demote {} to {}", self.field, field);
        MatrixF { field, ..self.clone() }
    }

    /// `Re tr(x)`.
    pub fn trace_re(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).a).sum()
    }

    /// `(x|y) = Re tr(x* y)`.
    pub fn inner(&self, other: &MatrixF) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(x, y)| x.dot(*y)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &MatrixF) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (*x - *y).norm())
            .fold(0.0, f64::max)
    }

    /// Top-left `j x j` block.
    pub fn leading_block(&self, j: usize) -> MatrixF {
        self.block(0, 0, j, j)
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatrixF {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut out = MatrixF::zeros(self.field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out.data[i * cols + j] = self.get(r0 + i, c0 + j);
            }
        }
        out
    }

    /// `(x + x*) / 2`.
    pub fn hermitian_part(&self) -> MatrixF {
        assert!(self.is_square());
        let n = self.rows;
        let mut out = self.clone();
        for i in 0..n {
            for j in i..n {
                let h = (self.get(i, j) + self.get(j, i).conj()).scale(0.5);
                out.data[i * n + j] = h;
                out.data[j * n + i] = h.conj();
            }
        }
        out
    }

    /// Relative distance from Hermitian, `|x - x*|_F / max(1, |x|_F)`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        acc.sqrt() / self.frobenius_norm().max(1.0)
    }

    /// Complex matrix representing `self`.
    ///
    /// Real and complex matrices map to themselves. A quaternion entry
    /// `z1 + z2 j` (with `z1 = a + b i`, `z2 = c + d i`) becomes the block
    /// `[[z1, z2], [-conj(z2), conj(z1)]]`; so `j` maps to `[[0, 1], [-1, 0]]`
    /// and the map is multiplicative and sends adjoints to conjugate
    /// transposes.
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self.field {
            Field::R | Field::C => {
                DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_complex())
            }
            Field::H => {
                let mut m = DMatrix::zeros(2 * self.rows, 2 * self.cols);
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let (z1, z2) = self.get(i, j).to_complex_pair();
                        m[(2 * i, 2 * j)] = z1;
                        m[(2 * i, 2 * j + 1)] = z2;
                        m[(2 * i + 1, 2 * j)] = -z2.conj();
                        m[(2 * i + 1, 2 * j + 1)] = z1.conj();
                    }
                }
                m
            }
        }
    }

    /// Inverse of [`MatrixF::to_complex`]. For `H` each 2x2 block is read back
    /// by averaging its two copies of `z1` and `z2`.
    pub fn from_complex(field: Field, m: &DMatrix<Complex64>) -> MatrixF {
        match field {
            Field::R => {
                let data = m.transpose().iter().map(|z| Quaternion::real(z.re)).collect();
                MatrixF { field, rows: m.nrows(), cols: m.ncols(), data }
            }
            Field::C => {
                let data = m.transpose().iter().map(|&z| Quaternion::from_complex(z)).collect();
                MatrixF { field, rows: m.nrows(), cols: m.ncols(), data }
            }
            Field::H => {
                let (rows, cols) = (m.nrows() / 2, m.ncols() / 2);
                let mut out = MatrixF::zeros(field, rows, cols);
                for i in 0..rows {
                    for j in 0..cols {
                        let z1 = (m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)].conj()) * 0.5;
                        let z2 = (m[(2 * i, 2 * j + 1)] - m[(2 * i + 1, 2 * j)].conj()) * 0.5;
                        out.data[i * cols + j] = Quaternion::from_complex_pair(z1, z2);
                    }
                }
                out
            }
        }
    }
}

/// The smaller of two fields containing both.
pub fn wider(a: Field, b: Field) -> Field {
    if a.d() >= b.d() {
        a
    } else {
        b
    }
}
