use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{decode_into, encode, joint_size, Dim, ALGEBRA_TOL};
use crate::error::{domain, Result};

/// A dense operator between two qudit registers, `out x in` in shape.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    in_dims: Vec<Dim>,
    out_dims: Vec<Dim>,
    matrix: DMatrix<Complex64>,
}

impl LinearOperator {
    pub fn new(in_dims: Vec<Dim>, out_dims: Vec<Dim>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let (n_in, n_out) = (joint_size(&in_dims)?, joint_size(&out_dims)?);
        if matrix.shape() != (n_out, n_in) {
            return domain(format!(
                "matrix shape {:?} does not match dims ({n_out}, {n_in})",
                matrix.shape()
            ));
        }
        Ok(LinearOperator {
            in_dims,
            out_dims,
            matrix,
        })
    }

    pub fn square(dims: Vec<Dim>, matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(dims.clone(), dims, matrix)
    }

    pub fn identity(dims: Vec<Dim>) -> Result<Self> {
        let n = joint_size(&dims)?;
        Self::square(dims, DMatrix::identity(n, n))
    }

    /// Permutation operator sending `|digits>` to `|map(digits)>`.
    pub fn permutation<F>(dims: Vec<Dim>, mut map: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<usize>,
    {
        let n = joint_size(&dims)?;
        let mut m = DMatrix::zeros(n, n);
        let mut digits = vec![0; dims.len()];
        for col in 0..n {
            decode_into(&dims, col, &mut digits);
            let row = encode(&dims, &map(&digits))?;
            m[(row, col)] = Complex64::new(1.0, 0.0);
        }
        let op = Self::square(dims, m)?;
        if !op.is_permutation() {
            return domain("basis map is not a bijection");
        }
        Ok(op)
    }

    pub fn in_dims(&self) -> &[Dim] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[Dim] {
        &self.out_dims
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> LinearOperator {
        LinearOperator {
            in_dims: self.out_dims.clone(),
            out_dims: self.in_dims.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * rhs`, i.e. `rhs` acts first.
    pub fn compose(&self, rhs: &LinearOperator) -> Result<LinearOperator> {
        if self.in_dims != rhs.out_dims {
            return domain("operator composition with mismatched dims");
        }
        Ok(LinearOperator {
            in_dims: rhs.in_dims.clone(),
            out_dims: self.out_dims.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn pow(&self, k: u32) -> Result<LinearOperator> {
        let mut acc = LinearOperator::identity(self.in_dims.clone())?;
        for _ in 0..k {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Largest entry of `|U^dagger U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix;
        let n = g.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.in_dims == self.out_dims && self.unitarity_residual() < ALGEBRA_TOL
    }

    /// Every column and row holds exactly one entry equal to 1, the rest 0.
    pub fn is_permutation(&self) -> bool {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if self.matrix.nrows() != self.matrix.ncols() {
            return false;
        }
        let n = self.matrix.nrows();
        let mut row_hits = vec![0usize; n];
        for col in 0..n {
            let mut hits = 0;
            for row in 0..n {
                let v = self.matrix[(row, col)];
                if v == one {
                    hits += 1;
                    row_hits[row] += 1;
                } else if v != zero {
                    return false;
                }
            }
            if hits != 1 {
                return false;
            }
        }
        row_hits.iter().all(|&h| h == 1)
    }

    /// Largest entry-wise absolute difference; `inf` for mismatched shapes.
    pub fn max_abs_diff(&self, other: &LinearOperator) -> f64 {
        if self.matrix.shape() != other.matrix.shape()
            || self.in_dims != other.in_dims
            || self.out_dims != other.out_dims
        {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn shape_is_checked() {
        assert!(LinearOperator::square(vec![d(2)], DMatrix::identity(3, 3)).is_err());
        assert!(LinearOperator::new(vec![d(2)], vec![d(3)], DMatrix::zeros(3, 2)).is_ok());
    }

    #[test]
    fn permutation_builder() {
        let x = LinearOperator::permutation(vec![d(3)], |v| vec![(v[0] + 1) % 3]).unwrap();
        assert!(x.is_permutation());
        assert!(x.is_unitary());
        assert_eq!(
            x.pow(3)
                .unwrap()
                .max_abs_diff(&LinearOperator::identity(vec![d(3)]).unwrap()),
            0.0
        );
        assert!(LinearOperator::permutation(vec![d(3)], |_| vec![0]).is_err());
    }

    #[test]
    fn identity_application_is_noop() {
        let s = crate::algebra::PureState::basis(&[d(3), d(2)], &[2, 1]).unwrap();
        let id = LinearOperator::identity(vec![d(2)]).unwrap();
        assert_eq!(s.apply_local(&id, &[1]).unwrap(), s);
        let id3 = LinearOperator::identity(vec![d(3)]).unwrap();
        assert!(s.apply_local(&id3, &[1]).is_err());
        assert!(s.apply_local(&id, &[5]).is_err());
    }
}
