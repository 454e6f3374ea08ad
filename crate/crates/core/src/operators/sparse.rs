use nalgebra::DMatrix;
use num_complex::Complex64;

/// Compressed sparse row matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if rows.last() == Some(&r) && indices.last() == Some(&c) {
                *data.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                indices.push(c);
                data.push(v);
            }
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_idx = Vec::with_capacity(rows.len());
        let mut keep_data = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(data) {
            if v != 0.0 {
                keep_rows.push(r);
                keep_idx.push(c);
                keep_data.push(v);
            }
        }
        for &r in &keep_rows {
            indptr[r + 1] += 1;
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self { nrows, ncols, indptr, indices: keep_idx, data: keep_data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.data[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v)).collect())
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scaled(&self, left: &[f64], right: &[f64]) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(i, j, v)| (i, j, left[i] * v * right[j])).collect(),
        )
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let mut triplets = Vec::new();
        for i in 0..self.nrows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    triplets.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, triplets)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()).collect())
    }

    /// `out += self * x`.
    pub fn mul_add_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.nrows) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in self.row(i) {
                acc += x[j] * v;
            }
            *o += acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_prune() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (0, 1, -1.0), (1, 0, 2.0), (1, 0, 0.5)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), 2.5);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn product_matches_dense() {
        let a = CsrMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, -2.0), (1, 1, 3.0)]);
        let b = CsrMatrix::from_triplets(3, 2, vec![(0, 1, 4.0), (1, 0, 1.0), (2, 0, 0.5), (2, 1, 1.0)]);
        assert_eq!(a.matmul(&b).to_dense(), a.to_dense() * b.to_dense());
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
    }
}
