use crate::scalar::Real;

/// Square sparse matrix in compressed-row storage with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n: usize,
    row_offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds an `n × n` matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_offsets = vec![0usize; n + 1];
        let mut columns = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) out of range for n = {n}");
            if last == Some((i, j)) {
                let lv = values.last_mut().unwrap();
                *lv = *lv + v;
            } else {
                columns.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        SparseMatrix {
            n,
            row_offsets,
            columns,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.columns[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|p| vals[p]).unwrap_or_else(|_| T::zero())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).fold(T::zero(), |acc, (&j, &v)| acc + v * x[j]);
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Checks `|a_ij - a_ji| <= tol * max|a|`.
    pub fn is_symmetric(&self, tol: T) -> bool {
        let scale = self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .all(|(&j, &v)| (v - self.get(j, i)).abs() <= tol * scale)
        })
    }

    /// Restriction to the given (sorted) index set.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_offsets = Vec::with_capacity(keep.len() + 1);
        row_offsets.push(0);
        let mut columns = Vec::new();
        let mut values = Vec::new();
        for &i in keep {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if map[j] != usize::MAX {
                    columns.push(map[j]);
                    values.push(v);
                }
            }
            row_offsets.push(columns.len());
        }
        SparseMatrix {
            n: keep.len(),
            row_offsets,
            columns,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}
