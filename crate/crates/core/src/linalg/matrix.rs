use crate::error::{Error, Result};

/// A real linear operator that can be applied to a vector.
///
/// Implementors must be symmetric for the eigensolvers in this crate to
/// return meaningful results.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Computes `y = A x`. Both slices have length `dim()`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Adapts a closure `|x, y| ...` into a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// One stored upper-triangle entry of a sparse symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub value: f64,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Packed upper triangle, row by row: row `i` holds columns `i..dim`.
    Dense(Vec<f64>),
    /// Upper-triangle coordinate list sorted by `(row, col)` without duplicates.
    Sparse(Vec<Entry>),
}

/// Real symmetric matrix storing only its upper triangle.
///
/// Symmetry therefore holds by construction; every stored value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    storage: Storage,
}

#[inline]
fn packed_index(dim: usize, row: usize, col: usize) -> usize {
    debug_assert!(row <= col);
    row * dim - row * row.saturating_sub(1) / 2 + col - row
}

impl SymmetricMatrix {
    /// Builds a dense matrix from `f(i, j)`, which is only evaluated for `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("matrix dimension must be positive".into()));
        }
        let mut packed = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::Input(format!("non-finite entry {v} at ({i}, {j})")));
                }
                packed.push(v);
            }
        }
        Ok(Self {
            dim,
            storage: Storage::Dense(packed),
        })
    }

    /// Builds a dense matrix from a full row-major buffer, reading the upper triangle.
    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Input(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Self::from_fn(dim, |i, j| data[i * dim + j])
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let entries = diag
            .iter()
            .enumerate()
            .map(|(i, &value)| Entry {
                value,
                row: i,
                col: i,
            })
            .collect();
        Self::from_entries(diag.len(), entries)
    }

    /// Builds a sparse matrix from coordinate triplets.
    ///
    /// Entries in the lower triangle are mirrored into the upper triangle and
    /// duplicates are summed, so callers may pass either half.
    pub fn from_entries(dim: usize, entries: Vec<Entry>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("matrix dimension must be positive".into()));
        }
        let mut entries: Vec<Entry> = entries
            .into_iter()
            .map(|e| {
                if e.row < e.col {
                    e
                } else {
                    Entry {
                        value: e.value,
                        row: e.col,
                        col: e.row,
                    }
                }
            })
            .collect();
        for e in &entries {
            if e.col >= dim {
                return Err(Error::Input(format!(
                    "entry ({}, {}) outside a {dim}x{dim} matrix",
                    e.row, e.col
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::Input(format!(
                    "non-finite entry {} at ({}, {})",
                    e.value, e.row, e.col
                )));
            }
        }
        entries.sort_by_key(|e| (e.row, e.col));
        let mut merged: Vec<Entry> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.row == e.row && last.col == e.col => last.value += e.value,
                _ => merged.push(e),
            }
        }
        Ok(Self {
            dim,
            storage: Storage::Sparse(merged),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Stored upper-triangle entries; `None` for dense storage.
    pub fn entries(&self) -> Option<&[Entry]> {
        match &self.storage {
            Storage::Sparse(e) => Some(e),
            Storage::Dense(_) => None,
        }
    }

    pub fn nnz_stored(&self) -> usize {
        match &self.storage {
            Storage::Sparse(e) => e.len(),
            Storage::Dense(p) => p.len(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (r, c) = if row <= col { (row, col) } else { (col, row) };
        assert!(c < self.dim, "index ({row}, {col}) out of bounds");
        match &self.storage {
            Storage::Dense(p) => p[packed_index(self.dim, r, c)],
            Storage::Sparse(e) => e
                .binary_search_by_key(&(r, c), |x| (x.row, x.col))
                .map(|i| e[i].value)
                .unwrap_or(0.0),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        let mut add = |r: usize, c: usize, v: f64| {
            acc += if r == c { v * v } else { 2.0 * v * v };
        };
        match &self.storage {
            Storage::Dense(p) => {
                let mut k = 0;
                for i in 0..self.dim {
                    for j in i..self.dim {
                        add(i, j, p[k]);
                        k += 1;
                    }
                }
            }
            Storage::Sparse(e) => e.iter().for_each(|x| add(x.row, x.col, x.value)),
        }
        acc.sqrt()
    }

    /// Full row-major copy of the matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        match &self.storage {
            Storage::Dense(p) => {
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        out[i * n + j] = p[k];
                        out[j * n + i] = p[k];
                        k += 1;
                    }
                }
            }
            Storage::Sparse(e) => {
                for x in e {
                    out[x.row * n + x.col] = x.value;
                    out[x.col * n + x.row] = x.value;
                }
            }
        }
        out
    }

    /// Restricts the matrix to the rows and columns listed in `indices`.
    ///
    /// `indices` must be strictly increasing; the result keeps this
    /// matrix's storage kind.
    pub fn submatrix(&self, indices: &[usize]) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input(
                "submatrix indices must be strictly increasing".into(),
            ));
        }
        if indices.last().is_some_and(|&i| i >= self.dim) {
            return Err(Error::Input("submatrix index out of range".into()));
        }
        match &self.storage {
            Storage::Dense(_) => {
                Self::from_fn(indices.len(), |i, j| self.get(indices[i], indices[j]))
            }
            Storage::Sparse(e) => {
                let mut map = vec![usize::MAX; self.dim];
                for (new, &old) in indices.iter().enumerate() {
                    map[old] = new;
                }
                let entries = e
                    .iter()
                    .filter_map(|x| {
                        let (r, c) = (map[x.row], map[x.col]);
                        (r != usize::MAX && c != usize::MAX).then_some(Entry {
                            value: x.value,
                            row: r,
                            col: c,
                        })
                    })
                    .collect();
                Self::from_entries(indices.len(), entries)
            }
        }
    }
}

impl LinearOperator for SymmetricMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = 0.0);
        match &self.storage {
            Storage::Sparse(e) => {
                for &Entry { value, row, col } in e {
                    y[row] += value * x[col];
                    if row != col {
                        y[col] += value * x[row];
                    }
                }
            }
            Storage::Dense(p) => {
                let n = self.dim;
                let mut k = 0;
                for i in 0..n {
                    let row = &p[k..k + n - i];
                    let xi = x[i];
                    let mut acc = row[0] * xi;
                    for (off, &a) in row.iter().enumerate().skip(1) {
                        let j = i + off;
                        acc += a * x[j];
                        y[j] += a * xi;
                    }
                    y[i] += acc;
                    k += n - i;
                }
            }
        }
    }
}
