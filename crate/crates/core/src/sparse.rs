//! Minimal compressed-sparse-row matrix used to assemble the FDFD operator.

use faer::sparse::{SparseColMat, Triplet};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Builds a matrix from `(row, col, value)` entries, summing duplicates and
    /// dropping exact zeros.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut data: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self { nrows, ncols, indptr, indices, data }.pruned()
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self { nrows: n, ncols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), data: values.to_vec() }
    }

    fn pruned(self) -> Self {
        let mut indptr = vec![0; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.data[k] != 0.0 {
                    indices.push(self.indices[k]);
                    data.push(self.data[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        Self { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.data.iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn matmul(&self, rhs: &Csr) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "inner dimensions differ");
        let mut entries = Vec::new();
        let mut acc = vec![0.0; rhs.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![usize::MAX; rhs.ncols];
        for r in 0..self.nrows {
            touched.clear();
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (mid, a) = (self.indices[k], self.data[k]);
                for q in rhs.indptr[mid]..rhs.indptr[mid + 1] {
                    let c = rhs.indices[q];
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        touched.push(c);
                    }
                    acc[c] += a * rhs.data[q];
                }
            }
            entries.extend(touched.iter().map(|&c| (r, c, acc[c])));
        }
        Self::from_triplets(self.nrows, rhs.ncols, entries)
    }

    pub fn add(&self, rhs: &Csr) -> Self {
        self.axpy(1.0, rhs)
    }

    fn axpy(&self, s: f64, rhs: &Csr) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let mut entries = self.triplets();
        entries.extend(rhs.triplets().into_iter().map(|(r, c, v)| (r, c, s * v)));
        Self::from_triplets(self.nrows, self.ncols, entries)
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out.push((r, self.indices[k], self.data[k]));
            }
        }
        out
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn block2(a: &Csr, b: &Csr, c: &Csr, d: &Csr) -> Self {
        assert_eq!(a.nrows, b.nrows);
        assert_eq!(c.nrows, d.nrows);
        assert_eq!(a.ncols, c.ncols);
        assert_eq!(b.ncols, d.ncols);
        let (r0, c0) = (a.nrows, a.ncols);
        let mut entries = a.triplets();
        entries.extend(b.triplets().into_iter().map(|(r, c, v)| (r, c + c0, v)));
        entries.extend(c.triplets().into_iter().map(|(r, c, v)| (r + r0, c, v)));
        entries.extend(d.triplets().into_iter().map(|(r, c, v)| (r + r0, c + c0, v)));
        Self::from_triplets(a.nrows + c.nrows, a.ncols + b.ncols, entries)
    }

    /// Kronecker product `a (x) b`.
    pub fn kron(a: &Csr, b: &Csr) -> Self {
        let mut entries = Vec::with_capacity(a.nnz() * b.nnz());
        for (ra, ca, va) in a.triplets() {
            for (rb, cb, vb) in b.triplets() {
                entries.push((ra * b.nrows + rb, ca * b.ncols + cb, va * vb));
            }
        }
        Self::from_triplets(a.nrows * b.nrows, a.ncols * b.ncols, entries)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| (self.indptr[r]..self.indptr[r + 1]).map(|k| self.data[k] * x[self.indices[k]]).sum())
            .collect()
    }

    /// `self - shift * I` as a faer column-major matrix.
    pub fn shifted_faer(&self, shift: f64) -> Result<SparseColMat<usize, f64>, String> {
        assert_eq!(self.nrows, self.ncols);
        let mut entries: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(self.nnz() + self.nrows);
        for r in 0..self.nrows {
            let mut has_diag = false;
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                let v = if c == r {
                    has_diag = true;
                    self.data[k] - shift
                } else {
                    self.data[k]
                };
                entries.push(Triplet::new(r, c, v));
            }
            if !has_diag {
                entries.push(Triplet::new(r, r, -shift));
            }
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &entries).map_err(|e| format!("{e:?}"))
    }
}
