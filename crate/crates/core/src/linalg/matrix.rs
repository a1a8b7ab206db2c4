use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GwError, Result};

/// Scalar field a matrix is constrained to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Field of a value built from operands over `self` and `other`.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = GwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(GwError::InvalidMatrix(format!("unknown field {other:?}"))),
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense complex matrix with a field tag.
///
/// When the tag is [`Field::Real`] every imaginary part is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: DMatrix<Complex64>,
    field: Field,
}

impl Matrix {
    /// Wraps complex data, checking the real-field constraint.
    pub fn new(data: DMatrix<Complex64>, field: Field) -> Result<Self> {
        if field == Field::Real {
            if let Some(z) = data.iter().find(|z| z.im != 0.0) {
                return Err(GwError::InvalidMatrix(format!(
                    "real matrix has nonzero imaginary part {}",
                    z.im
                )));
            }
        }
        Ok(Self { data, field })
    }

    pub fn from_complex(data: DMatrix<Complex64>) -> Self {
        Self {
            data,
            field: Field::Complex,
        }
    }

    pub fn from_real(data: &DMatrix<f64>) -> Self {
        Self {
            data: data.map(|x| Complex64::new(x, 0.0)),
            field: Field::Real,
        }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(
        rows: usize,
        cols: usize,
        field: Field,
        entries: &[Complex64],
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(GwError::InvalidMatrix(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries), field)
    }

    pub fn identity(d: usize, field: Field) -> Self {
        Self {
            data: DMatrix::identity(d, d),
            field,
        }
    }

    pub fn zeros(rows: usize, cols: usize, field: Field) -> Self {
        Self {
            data: DMatrix::zeros(rows, cols),
            field,
        }
    }

    /// Diagonal matrix with real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut data = DMatrix::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            data[(i, i)] = Complex64::new(x, 0.0);
        }
        Self {
            data,
            field: Field::Real,
        }
    }

    /// Column vector from complex entries. Tagged real if every entry is real.
    pub fn column_vector(entries: &[Complex64]) -> Self {
        let field = if entries.iter().all(|z| z.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        };
        Self {
            data: DMatrix::from_column_slice(entries.len(), 1, entries),
            field,
        }
    }

    /// Standard basis vector `e_i` in dimension `d`.
    pub fn basis_vector(d: usize, i: usize) -> Self {
        let mut data = DMatrix::zeros(d, 1);
        data[(i, 0)] = Complex64::new(1.0, 0.0);
        Self {
            data,
            field: Field::Real,
        }
    }

    /// The dyad `x·y*`.
    pub fn dyad(x: &Matrix, y: &Matrix) -> Matrix {
        x * &y.adjoint()
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Writes one entry; the caller keeps real-field matrices real.
    pub(crate) fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[(i, j)] = z;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.data
    }

    /// Real parts as a real matrix; only meaningful for real-field matrices.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.data.map(|z| z.re)
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Matrix {
        Matrix {
            data: self.data.columns(j, 1).into_owned(),
            field: self.field,
        }
    }

    /// Columns `start..start + count`.
    pub fn columns(&self, start: usize, count: usize) -> Matrix {
        Matrix {
            data: self.data.columns(start, count).into_owned(),
            field: self.field,
        }
    }

    /// Matrix whose columns are the given column vectors.
    pub fn from_columns(cols: &[Matrix]) -> Result<Matrix> {
        let Some(first) = cols.first() else {
            return Err(GwError::InvalidMatrix("no columns given".into()));
        };
        let rows = first.rows();
        let mut data = DMatrix::zeros(rows, cols.len());
        let mut field = Field::Real;
        for (j, c) in cols.iter().enumerate() {
            if c.rows() != rows || c.cols() != 1 {
                return Err(GwError::DimensionMismatch(format!(
                    "column {j} is {}x{}, expected {rows}x1",
                    c.rows(),
                    c.cols()
                )));
            }
            data.set_column(j, &c.data.column(0));
            field = field.join(c.field);
        }
        Ok(Matrix { data, field })
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix {
            data: self.data.adjoint(),
            field: self.field,
        }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Matrix {
        match self.field {
            Field::Real => self.clone(),
            Field::Complex => Matrix {
                data: self.data.map(|z| z.conj()),
                field: Field::Complex,
            },
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            data: self.data.map(|z| z * s),
            field: self.field,
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Matrix {
        if s.im == 0.0 {
            return self.scale(s.re);
        }
        Matrix {
            data: self.data.map(|z| z * s),
            field: Field::Complex,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |a_ij − b_ij|`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.data.shape(), other.data.shape());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖A − B‖_F`.
    pub fn distance(&self, other: &Matrix) -> f64 {
        assert_eq!(self.data.shape(), other.data.shape());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖M − M*‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[(i, j)] - self.data[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Matrix {
        Matrix {
            data: (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0),
            field: self.field,
        }
    }

    /// `‖V*V − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.adjoint() * self;
        gram.distance(&Matrix::identity(gram.rows(), Field::Real))
    }

    /// Euclidean norm of a column vector (Frobenius norm in general).
    pub fn norm(&self) -> f64 {
        self.frobenius_norm()
    }

    /// Matrix exponential.
    pub fn exp(&self) -> Matrix {
        match self.field {
            Field::Real => Matrix::from_real(&self.real_part().exp()),
            Field::Complex => Matrix::from_complex(self.data.clone().exp()),
        }
    }

    /// Canonical byte key: every real and imaginary part rounded to 12
    /// decimal places. Used for memoization and table lookup.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 16 * self.data.len());
        out.extend_from_slice(&(self.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols() as u64).to_le_bytes());
        for z in self.row_major() {
            for part in [z.re, z.im] {
                let r = (part * 1e12).round() as i64;
                out.extend_from_slice(&r.to_le_bytes());
            }
        }
        out
    }
}

impl<'a> Mul<&'a Matrix> for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &'a Matrix) -> Matrix {
        Matrix {
            data: &self.data * &rhs.data,
            field: self.field.join(rhs.field),
        }
    }
}

impl<'a> Add<&'a Matrix> for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &'a Matrix) -> Matrix {
        Matrix {
            data: &self.data + &rhs.data,
            field: self.field.join(rhs.field),
        }
    }
}

impl<'a> Sub<&'a Matrix> for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &'a Matrix) -> Matrix {
        Matrix {
            data: &self.data - &rhs.data,
            field: self.field.join(rhs.field),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        Matrix {
            data: -&self.data,
            field: self.field,
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr<Matrix> for Matrix {
            type Output = Matrix;
            fn $m(self, rhs: Matrix) -> Matrix {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Matrix> for Matrix {
            type Output = Matrix;
            fn $m(self, rhs: &'a Matrix) -> Matrix {
                (&self).$m(rhs)
            }
        }
    )*};
}

forward_owned!(Mul::mul, Add::add, Sub::sub);

/// Wire form of a matrix.
///
/// ```json
/// {"rows": 2, "cols": 2, "field": "real", "data": [[1,0],[0,0],[0,0],[1,0]]}
/// ```
///
/// `kind` and `rank` are present only on serialized projections.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub field: Field,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            field: m.field(),
            data: m
                .row_major()
                .into_iter()
                .map(|z| [z.re, if m.field == Field::Real { 0.0 } else { z.im }])
                .collect(),
            kind: None,
            rank: None,
        }
    }
}

impl TryFrom<&MatrixJson> for Matrix {
    type Error = GwError;

    fn try_from(j: &MatrixJson) -> Result<Matrix> {
        if j.rows == 0 || j.cols == 0 {
            return Err(GwError::InvalidMatrix(format!(
                "matrix shape {}x{} must be positive",
                j.rows, j.cols
            )));
        }
        let entries: Vec<Complex64> = j
            .data
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GwError::InvalidMatrix("non-finite entry".into()));
        }
        Matrix::from_row_major(j.rows, j.cols, j.field, &entries)
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        Matrix::try_from(&j).map_err(serde::de::Error::custom)
    }
}
