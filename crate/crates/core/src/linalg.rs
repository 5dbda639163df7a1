use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A dense column vector with at least one entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vector<S> {
    entries: Vec<S>,
}

impl<S: Scalar> Vector<S> {
    pub fn new(entries: Vec<S>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch(
                "vector must have positive dimension".into(),
            ));
        }
        Ok(Vector { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &S {
        &self.entries[i]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(S::is_zero)
    }

    pub fn scale(&self, k: &S) -> Self {
        Vector {
            entries: self.entries.iter().map(|e| e.clone() * k.clone()).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add vectors of dimension {} and {}",
                self.dim(),
                rhs.dim()
            )));
        }
        Ok(Vector {
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn dot(&self, rhs: &Self) -> Result<S> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot pair vectors of dimension {} and {}",
                self.dim(),
                rhs.dim()
            )));
        }
        let zero = self.entries[0].zero_of();
        Ok(self
            .entries
            .iter()
            .zip(&rhs.entries)
            .fold(zero, |acc, (a, b)| acc + a.clone() * b.clone()))
    }
}

/// A dense row-major matrix with positive dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    entries: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn new(rows: usize, cols: usize, entries: Vec<S>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(
                "matrix must have positive dimensions".into(),
            ));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(Matrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Matrix::new(height, width, rows.into_iter().flatten().collect())
    }

    pub fn identity(context: &S, n: usize) -> Result<Self> {
        let mut entries = vec![context.zero_of(); n * n];
        for i in 0..n {
            entries[i * n + i] = context.one_of();
        }
        Matrix::new(n, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: S) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mat_vec(&self, v: &Vector<S>) -> Result<Vector<S>> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot act on a vector of dimension {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let zero = self.entries[0].zero_of();
        let entries = (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v.entries())
                    .fold(zero.clone(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect();
        Vector::new(entries)
    }

    pub fn mat_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let zero = self.entries[0].zero_of();
        let mut entries = Vec::with_capacity(self.rows * rhs.cols);
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                let mut acc = zero.clone();
                for k in 0..self.cols {
                    acc = acc + self.get(r, k).clone() * rhs.get(k, c).clone();
                }
                entries.push(acc);
            }
        }
        Matrix::new(self.rows, rhs.cols, entries)
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.rows * self.cols);
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, k: &S) {
        for c in 0..self.cols {
            let v = self.get(r, c).clone() * k.clone();
            self.set(r, c, v);
        }
    }

    /// row r -= k * row src
    fn row_sub_scaled(&mut self, r: usize, src: usize, k: &S) {
        for c in 0..self.cols {
            let v = self.get(r, c).clone() - k.clone() * self.get(src, c).clone();
            self.set(r, c, v);
        }
    }
}

/// Result of Gauss-Jordan elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref<S> {
    pub reduced: Matrix<S>,
    pub rank: usize,
    pub pivot_columns: Vec<usize>,
}

/// Reduced row echelon form with deterministic pivoting: for each column the
/// first unused row holding a nonzero entry becomes the pivot row.
pub fn rref<S: Scalar>(m: &Matrix<S>) -> Rref<S> {
    let mut a = m.clone();
    let mut pivot_columns = Vec::new();
    let mut pivot_row = 0;
    for col in 0..a.cols {
        if pivot_row == a.rows {
            break;
        }
        let Some(src) = (pivot_row..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
            continue;
        };
        a.swap_rows(pivot_row, src);
        let inv = a.get(pivot_row, col).inv().expect("pivot is nonzero");
        a.scale_row(pivot_row, &inv);
        for r in 0..a.rows {
            if r != pivot_row && !a.get(r, col).is_zero() {
                let factor = a.get(r, col).clone();
                a.row_sub_scaled(r, pivot_row, &factor);
            }
        }
        pivot_columns.push(col);
        pivot_row += 1;
    }
    Rref {
        reduced: a,
        rank: pivot_columns.len(),
        pivot_columns,
    }
}

/// Determinant by elimination; exact over any `Scalar` field.
pub fn det<S: Scalar>(m: &Matrix<S>) -> Result<S> {
    if m.rows != m.cols {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let ctx = m.entries[0].clone();
    let mut a = m.clone();
    let mut acc = ctx.one_of();
    let mut negate = false;
    for col in 0..a.cols {
        let Some(src) = (col..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
            return Ok(ctx.zero_of());
        };
        if src != col {
            a.swap_rows(col, src);
            negate = !negate;
        }
        let pivot = a.get(col, col).clone();
        let inv = pivot.inv().expect("pivot is nonzero");
        acc = acc * pivot;
        for r in (col + 1)..a.rows {
            if !a.get(r, col).is_zero() {
                let factor = a.get(r, col).clone() * inv.clone();
                a.row_sub_scaled(r, col, &factor);
            }
        }
    }
    Ok(if negate { -acc } else { acc })
}

/// The solution set of `a x = b` written as a particular solution plus the
/// span of a basis of the homogeneous kernel. Free variables are the
/// non-pivot columns in ascending order; basis vector `i` has a 1 in the
/// `i`-th free variable and 0 in the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolutionSpace<S> {
    particular: Vector<S>,
    homogeneous_basis: Vec<Vector<S>>,
}

impl<S: Scalar> AffineSolutionSpace<S> {
    pub fn particular(&self) -> &Vector<S> {
        &self.particular
    }

    pub fn homogeneous_basis(&self) -> &[Vector<S>] {
        &self.homogeneous_basis
    }

    pub fn dimension(&self) -> usize {
        self.homogeneous_basis.len()
    }

    /// The element `particular + sum_i params[i] * basis[i]`.
    pub fn element_at(&self, params: &[S]) -> Result<Vector<S>> {
        if params.len() != self.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "space has {} free parameters, got {}",
                self.dimension(),
                params.len()
            )));
        }
        let mut out = self.particular.clone();
        for (k, basis) in params.iter().zip(&self.homogeneous_basis) {
            out = out.add(&basis.scale(k))?;
        }
        Ok(out)
    }
}

/// Solve `a x = b` exactly. Errors `NoSolution` when inconsistent.
pub fn solve_affine<S: Scalar>(a: &Matrix<S>, b: &Vector<S>) -> Result<AffineSolutionSpace<S>> {
    if a.rows != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} equations but {} right-hand sides",
            a.rows,
            b.dim()
        )));
    }
    let mut augmented = Vec::with_capacity(a.rows * (a.cols + 1));
    for r in 0..a.rows {
        augmented.extend(a.row(r).iter().cloned());
        augmented.push(b.get(r).clone());
    }
    let reduced = rref(&Matrix::new(a.rows, a.cols + 1, augmented)?);
    if reduced.pivot_columns.contains(&a.cols) {
        return Err(Error::NoSolution);
    }
    let zero = a.entries[0].zero_of();
    let one = a.entries[0].one_of();
    let free: Vec<usize> = (0..a.cols)
        .filter(|c| !reduced.pivot_columns.contains(c))
        .collect();

    let mut particular = vec![zero.clone(); a.cols];
    for (row, &col) in reduced.pivot_columns.iter().enumerate() {
        particular[col] = reduced.reduced.get(row, a.cols).clone();
    }

    let homogeneous_basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![zero.clone(); a.cols];
            v[f] = one.clone();
            for (row, &col) in reduced.pivot_columns.iter().enumerate() {
                v[col] = -reduced.reduced.get(row, f).clone();
            }
            Vector::new(v).expect("matrix has positive width")
        })
        .collect();

    Ok(AffineSolutionSpace {
        particular: Vector::new(particular)?,
        homogeneous_basis,
    })
}

/// Tensor product in row-major order: entry `i * dim(v) + j` is `u[i] * v[j]`.
pub fn tensor_vec<S: Scalar>(u: &Vector<S>, v: &Vector<S>) -> Vector<S> {
    let entries = u
        .entries()
        .iter()
        .flat_map(|a| v.entries().iter().map(move |b| a.clone() * b.clone()))
        .collect();
    Vector::new(entries).expect("dimensions are positive")
}

/// True iff the vectors are as many as their common dimension and linearly
/// independent.
pub fn is_basis<S: Scalar>(vectors: &[Vector<S>]) -> Result<bool> {
    let Some(first) = vectors.first() else {
        return Err(Error::DimensionMismatch("no vectors given".into()));
    };
    let dim = first.dim();
    if vectors.iter().any(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch(
            "vectors have differing dimensions".into(),
        ));
    }
    if vectors.len() != dim {
        return Ok(false);
    }
    let rows = vectors.iter().map(|v| v.entries().to_vec()).collect();
    Ok(!det(&Matrix::from_rows(rows)?)?.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldElement, PrimeField};
    use crate::rational::Rational;

    fn f5v(entries: &[i64]) -> Vector<FieldElement> {
        let f = PrimeField::new(5).unwrap();
        Vector::new(entries.iter().map(|&n| f.element(n)).collect()).unwrap()
    }

    fn f5m(rows: &[&[i64]]) -> Matrix<FieldElement> {
        let f = PrimeField::new(5).unwrap();
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&n| f.element(n)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn qm(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&n| Rational::from_integer(n)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rref_finds_rank_and_pivots() {
        let out = rref(&f5m(&[&[1, 2], &[2, 4]]));
        assert_eq!(out.rank, 1);
        assert_eq!(out.pivot_columns, vec![0]);
        assert_eq!(out.reduced, f5m(&[&[1, 2], &[0, 0]]));

        let out = rref(&f5m(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]));
        assert_eq!(out.rank, 3);
        assert_eq!(out.pivot_columns, vec![0, 1, 2]);
    }

    #[test]
    fn rref_is_idempotent() {
        let m = qm(&[&[2, 4, 1], &[1, 2, 0], &[0, 0, 3]]);
        let once = rref(&m);
        let twice = rref(&once.reduced);
        assert_eq!(once.reduced, twice.reduced);
        assert_eq!(once.pivot_columns, twice.pivot_columns);
    }

    #[test]
    fn det_examples() {
        assert_eq!(det(&f5m(&[&[1, 1], &[0, 1]])).unwrap().value(), 1);
        assert_eq!(det(&f5m(&[&[1, 2], &[2, 4]])).unwrap().value(), 0);
        assert_eq!(
            det(&qm(&[&[0, 1], &[1, 0]])).unwrap(),
            Rational::from_integer(-1)
        );
        assert_eq!(
            det(&qm(&[&[2, 0, 0], &[0, 3, 0], &[0, 0, 5]])).unwrap(),
            Rational::from_integer(30)
        );
        assert_eq!(
            det(&qm(&[&[1, 2, 3]])),
            Err(Error::NotSquare { rows: 1, cols: 3 })
        );
    }

    #[test]
    fn det_is_multiplicative() {
        let a = qm(&[&[1, 2], &[3, 5]]);
        let b = qm(&[&[0, 1], &[7, -2]]);
        let ab = a.mat_mul(&b).unwrap();
        assert_eq!(
            det(&ab).unwrap(),
            det(&a).unwrap() * det(&b).unwrap()
        );
    }

    #[test]
    fn solve_affine_unique_solution() {
        let a = qm(&[&[1, 1], &[1, -1]]);
        let b = Vector::new(vec![Rational::from_integer(3), Rational::from_integer(1)]).unwrap();
        let space = solve_affine(&a, &b).unwrap();
        assert_eq!(space.dimension(), 0);
        assert_eq!(
            space.particular().entries(),
            &[Rational::from_integer(2), Rational::from_integer(1)]
        );
    }

    #[test]
    fn solve_affine_reports_inconsistency() {
        let a = qm(&[&[1, 1], &[2, 2]]);
        let b = Vector::new(vec![Rational::from_integer(1), Rational::from_integer(3)]).unwrap();
        assert_eq!(solve_affine(&a, &b), Err(Error::NoSolution));
    }

    #[test]
    fn solve_affine_parametrizes_underdetermined_systems() {
        // x + y + z = 1 over the rationals: two free variables.
        let a = qm(&[&[1, 1, 1]]);
        let b = Vector::new(vec![Rational::one()]).unwrap();
        let space = solve_affine(&a, &b).unwrap();
        assert_eq!(space.dimension(), 2);
        // Free variables are the non-pivot columns 1 and 2, in that order.
        assert_eq!(space.homogeneous_basis()[0].get(1), &Rational::one());
        assert_eq!(space.homogeneous_basis()[1].get(2), &Rational::one());
        // Every generated element satisfies the system.
        for (s, t) in [(0, 0), (1, 0), (0, 1), (-3, 7)] {
            let x = space
                .element_at(&[Rational::from_integer(s), Rational::from_integer(t)])
                .unwrap();
            assert_eq!(a.mat_vec(&x).unwrap().entries(), b.entries());
        }
    }

    #[test]
    fn solve_affine_with_zero_matrix_spans_everything() {
        let f = PrimeField::new(5).unwrap();
        let a = Matrix::new(1, 2, vec![f.zero(), f.zero()]).unwrap();
        let b = Vector::new(vec![f.zero()]).unwrap();
        let space = solve_affine(&a, &b).unwrap();
        assert_eq!(space.dimension(), 2);
        assert!(space.particular().is_zero());
    }

    #[test]
    fn tensor_is_row_major() {
        let u = f5v(&[0, 1]);
        let v = f5v(&[1, 0]);
        let values: Vec<u64> = tensor_vec(&u, &v).entries().iter().map(|e| e.value()).collect();
        assert_eq!(values, vec![0, 0, 1, 0]);
        let w = tensor_vec(&f5v(&[1, 2]), &f5v(&[3, 4]));
        let values: Vec<u64> = w.entries().iter().map(|e| e.value()).collect();
        assert_eq!(values, vec![3, 4, 6 % 5, 8 % 5]);
    }

    #[test]
    fn basis_detection() {
        assert!(is_basis(&[f5v(&[1, 0]), f5v(&[0, 1])]).unwrap());
        assert!(is_basis(&[f5v(&[1, 0]), f5v(&[1, 1])]).unwrap());
        assert!(!is_basis(&[f5v(&[1, 0]), f5v(&[2, 0])]).unwrap());
        assert!(!is_basis(&[f5v(&[1, 0])]).unwrap());
        assert!(is_basis::<FieldElement>(&[]).is_err());
    }

    #[test]
    fn constructors_reject_bad_shapes() {
        assert!(Vector::<Rational>::new(vec![]).is_err());
        assert!(Matrix::new(2, 2, vec![Rational::one(); 3]).is_err());
        assert!(Matrix::from_rows(vec![vec![Rational::one()], vec![]]).is_err());
    }
}
