use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major f64 tensor. The crate only ever needs rank 1 and 2, but the
/// shape is kept as a vector so gradients and parameters share one type.
///
/// Invariant: `data.len() == shape.iter().product()` and every entry is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorRepr")]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct TensorRepr {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TryFrom<TensorRepr> for Tensor {
    type Error = String;

    fn try_from(raw: TensorRepr) -> std::result::Result<Self, String> {
        Tensor::new(raw.shape, raw.data).map_err(|e| e.to_string())
    }
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if expect != data.len() {
            return Err(Error::Shape(format!(
                "shape {:?} needs {} entries, got {}",
                shape,
                expect,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite entry {bad} in tensor data")));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Tensor::new(vec![rows.len(), cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Rows of a rank-2 tensor.
    pub fn nrows(&self) -> usize {
        assert_eq!(self.shape.len(), 2, "nrows on rank-{} tensor", self.shape.len());
        self.shape[0]
    }

    /// Columns of a rank-2 tensor.
    pub fn ncols(&self) -> usize {
        assert_eq!(self.shape.len(), 2, "ncols on rank-{} tensor", self.shape.len());
        self.shape[1]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.ncols();
        &self.data[i * c..(i + 1) * c]
    }

    /// Horizontally concatenate two matrices with equal row counts.
    pub fn concat_cols(a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.nrows() != b.nrows() {
            return Err(Error::Shape(format!(
                "concat_cols: {} vs {} rows",
                a.nrows(),
                b.nrows()
            )));
        }
        let (ca, cb) = (a.ncols(), b.ncols());
        let mut data = Vec::with_capacity(a.nrows() * (ca + cb));
        for r in 0..a.nrows() {
            data.extend_from_slice(a.row(r));
            data.extend_from_slice(b.row(r));
        }
        Ok(Tensor {
            shape: vec![a.nrows(), ca + cb],
            data,
        })
    }

    /// Copy of columns `start..end` of a matrix.
    pub fn slice_cols(&self, start: usize, end: usize) -> Tensor {
        let c = self.ncols();
        assert!(start <= end && end <= c, "slice_cols {start}..{end} of {c}");
        let mut data = Vec::with_capacity(self.nrows() * (end - start));
        for r in 0..self.nrows() {
            data.extend_from_slice(&self.row(r)[start..end]);
        }
        Tensor {
            shape: vec![self.nrows(), end - start],
            data,
        }
    }

    /// New matrix built from the given row indices (repeats allowed).
    pub fn gather_rows(&self, idx: &[usize]) -> Tensor {
        let c = self.ncols();
        let mut data = Vec::with_capacity(idx.len() * c);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Tensor {
            shape: vec![idx.len(), c],
            data,
        }
    }
}

/// Neumaier compensated sum; keeps grid-mass bookkeeping exact to ~1 ulp
/// even for thousands of addends.
pub(crate) fn csum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_bad_len_and_nonfinite() {
        assert!(Tensor::new(vec![2, 2], vec![1.0; 3]).is_err());
        assert!(Tensor::new(vec![2], vec![1.0, f64::NAN]).is_err());
        assert!(Tensor::new(vec![2], vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn concat_and_slice_round_trip() {
        let a = Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::new(vec![2, 1], vec![5.0, 6.0]).unwrap();
        let c = Tensor::concat_cols(&a, &b).unwrap();
        assert_eq!(c.data(), &[1.0, 2.0, 5.0, 3.0, 4.0, 6.0]);
        assert_eq!(c.slice_cols(0, 2), a);
        assert_eq!(c.slice_cols(2, 3), b);
    }

    #[test]
    fn gather_rows_repeats() {
        let a = Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = a.gather_rows(&[1, 1, 0]);
        assert_eq!(g.data(), &[3.0, 4.0, 3.0, 4.0, 1.0, 2.0]);
    }

    #[test]
    fn compensated_sum_is_exact_on_adversarial_input() {
        // 1.0 + 2^-60 * 2^60 == 2.0; a naive sum loses every tiny addend.
        let tiny = (2.0f64).powi(-60);
        let mut xs = vec![1.0];
        xs.extend(std::iter::repeat(tiny).take(1 << 20));
        let got = csum(xs.iter().copied());
        let expect = 1.0 + tiny * (1 << 20) as f64;
        assert_eq!(got, expect);
    }

    #[test]
    fn serde_rejects_corrupt_tensor() {
        let bad = r#"{"shape":[2,2],"data":[1.0,2.0,3.0]}"#;
        assert!(serde_json::from_str::<Tensor>(bad).is_err());
        let good = r#"{"shape":[2,1],"data":[1.0,2.0]}"#;
        assert!(serde_json::from_str::<Tensor>(good).is_ok());
    }
}
