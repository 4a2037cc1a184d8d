//! Dense matrices over an arbitrary [`Field`]: reduced row echelon form, rank
//! and row-space membership.

use crate::field::Field;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let data = vec![field.zero(); rows * cols];
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(field: F, cols: usize, rows: &[Vec<F::Elem>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            data.extend_from_slice(r);
        }
        Matrix {
            field,
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> F::Elem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F::Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[F::Elem]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduces in place to RREF; returns the pivot column of each nonzero row.
    pub fn reduce(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| !f.is_zero(self.get(r, c))) else {
                continue;
            };
            self.swap_rows(lead, p);
            let inv = f.inv(self.get(lead, c)).expect("nonzero pivot");
            for k in c..self.cols {
                let v = f.mul(self.get(lead, k), inv);
                self.set(lead, k, v);
            }
            for r in 0..self.rows {
                if r == lead {
                    continue;
                }
                let factor = self.get(r, c);
                if f.is_zero(factor) {
                    continue;
                }
                for k in c..self.cols {
                    let v = f.sub(self.get(r, k), f.mul(factor, self.get(lead, k)));
                    self.set(r, k, v);
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.reduce();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn is_rref(&self) -> bool {
        let f = &self.field;
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero_row = false;
        for r in 0..self.rows {
            let lead = (0..self.cols).find(|&c| !f.is_zero(self.get(r, c)));
            match lead {
                None => seen_zero_row = true,
                Some(c) => {
                    if seen_zero_row || last_pivot.is_some_and(|p| p >= c) {
                        return false;
                    }
                    if self.get(r, c) != f.one() {
                        return false;
                    }
                    if (0..self.rows).any(|o| o != r && !f.is_zero(self.get(o, c))) {
                        return false;
                    }
                    last_pivot = Some(c);
                }
            }
        }
        true
    }

    pub fn row_space_contains(&self, v: &[F::Elem]) -> bool {
        let mut aug = self.clone();
        aug.push_row(v);
        aug.rank() == self.rank()
    }

    /// Columns `j` such that the unit vector `e_j` lies in the row space.
    ///
    /// In RREF a vector of the row space is fixed by its pivot coordinates, so
    /// `e_j` is present exactly when some reduced row equals it.
    pub fn unit_vectors_in_row_space(&self) -> Vec<usize> {
        let (r, pivots) = self.rref();
        let f = &self.field;
        pivots
            .iter()
            .enumerate()
            .filter(|&(row, &c)| (0..r.cols).all(|k| k == c || f.is_zero(r.get(row, k))))
            .map(|(_, &c)| c)
            .collect()
    }
}
