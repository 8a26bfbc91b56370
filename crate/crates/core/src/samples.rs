/// Dense row-major table of `len()` points in `dim()` dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    data: Vec<f64>,
    dim: usize,
}

impl Samples {
    /// Panics if `data.len()` is not a multiple of `dim` or `dim == 0`.
    pub fn new(data: Vec<f64>, dim: usize) -> Self {
        assert!(dim > 0, "samples need at least one dimension");
        assert_eq!(data.len() % dim, 0, "ragged sample table");
        Samples { data, dim }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            assert_eq!(r.as_ref().len(), dim, "ragged sample table");
            data.extend_from_slice(r.as_ref());
        }
        Samples::new(data, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for r in self.rows() {
            for (a, x) in m.iter_mut().zip(r) {
                *a += x;
            }
        }
        let n = self.len().max(1) as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Maximum-likelihood (1/n) covariance, row-major `dim × dim`.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let m = self.mean();
        let mut c = vec![0.0; d * d];
        for r in self.rows() {
            for i in 0..d {
                let di = r[i] - m[i];
                for j in 0..=i {
                    c[i * d + j] += di * (r[j] - m[j]);
                }
            }
        }
        let n = self.len().max(1) as f64;
        for i in 0..d {
            for j in 0..=i {
                c[i * d + j] /= n;
                c[j * d + i] = c[i * d + j];
            }
        }
        c
    }
}
