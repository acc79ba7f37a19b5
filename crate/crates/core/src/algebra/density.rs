use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::apply_local_raw;
use super::{
    check_factors, complement, decode_into, joint_size, sub_offsets, Dim, LinearOperator,
    PureState, ALGEBRA_TOL,
};
use crate::error::{domain, Result};

/// Smallest eigenvalue tolerated by [`DensityMatrix::validate`].
pub const EIGEN_FLOOR: f64 = -1e-10;

/// Dense density matrix over a qudit register. Trace may be below one for
/// sub-normalized (post-selected) states.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<Dim>,
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Builds and validates a density matrix.
    pub fn new(dims: Vec<Dim>, m: DMatrix<Complex64>) -> Result<Self> {
        let n = joint_size(&dims)?;
        if m.shape() != (n, n) {
            return domain(format!(
                "density matrix shape {:?} != ({n}, {n})",
                m.shape()
            ));
        }
        let dm = DensityMatrix { dims, m };
        dm.validate()?;
        Ok(dm)
    }

    pub(crate) fn from_parts(dims: Vec<Dim>, m: DMatrix<Complex64>) -> Self {
        DensityMatrix { dims, m }
    }

    /// Hermitian within 1e-12, eigenvalues above -1e-10, trace at most 1 + 1e-12.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_residual();
        if h > ALGEBRA_TOL {
            return domain(format!("density matrix not Hermitian (residual {h:e})"));
        }
        let tr = self.trace();
        if tr > 1.0 + ALGEBRA_TOL {
            return domain(format!("density matrix trace {tr} exceeds 1"));
        }
        let lo = self.min_eigenvalue();
        if lo < EIGEN_FLOOR {
            return domain(format!("density matrix has negative eigenvalue {lo:e}"));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.m.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        joint_size(&dims)?;
        Ok(DensityMatrix {
            dims,
            m: self.m.kronecker(&other.m),
        })
    }

    /// Reduced state on the `keep` factors (kept in increasing index order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return domain("partial trace must keep at least one factor");
        }
        check_factors(self.dims.len(), keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let traced = complement(self.dims.len(), &keep);
        let k_offs = sub_offsets(&self.dims, &keep);
        let t_offs = sub_offsets(&self.dims, &traced);
        let n = k_offs.len();
        let mut out = DMatrix::zeros(n, n);
        for (i, &ki) in k_offs.iter().enumerate() {
            for (j, &kj) in k_offs.iter().enumerate() {
                out[(i, j)] = t_offs.iter().map(|&t| self.m[(ki + t, kj + t)]).sum();
            }
        }
        Ok(DensityMatrix {
            dims: keep.iter().map(|&f| self.dims[f]).collect(),
            m: out,
        })
    }

    /// `<target|rho|target>` for a normalized target.
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        if target.dims() != self.dims.as_slice() {
            return domain("fidelity target has different dims");
        }
        let v = target.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            if vi.norm_sqr() == 0.0 {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                acc += vi.conj() * self.m[(i, j)] * vj;
            }
        }
        Ok(acc.re)
    }

    /// `U rho U^dagger` with `U = op` on the targeted factors.
    pub fn conjugate_local(&self, op: &LinearOperator, targets: &[usize]) -> Result<DensityMatrix> {
        check_factors(self.dims.len(), targets)?;
        if op.in_dims() != op.out_dims()
            || op.in_dims().len() != targets.len()
            || op
                .in_dims()
                .iter()
                .zip(targets)
                .any(|(d, &t)| *d != self.dims[t])
        {
            return domain("operator dims do not match the targeted factors");
        }
        let n = self.m.nrows();
        let mut left = DMatrix::zeros(n, n);
        for j in 0..n {
            let col: Vec<Complex64> = self.m.column(j).iter().copied().collect();
            let out = apply_local_raw(&self.dims, &col, op, targets);
            left.set_column(j, &nalgebra::DVector::from_vec(out));
        }
        // rows of (A U^dagger) are conj(U conj(row))
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let row: Vec<Complex64> = left.row(i).iter().map(|z| z.conj()).collect();
            let out = apply_local_raw(&self.dims, &row, op, targets);
            for (j, z) in out.into_iter().enumerate() {
                m[(i, j)] = z.conj();
            }
        }
        Ok(DensityMatrix {
            dims: self.dims.clone(),
            m,
        })
    }

    /// `P rho P` for the computational-basis projector onto digit strings
    /// accepted by `keep`. The trace drops to the accepted probability.
    pub fn project<F>(&self, mut keep: F) -> DensityMatrix
    where
        F: FnMut(&[usize]) -> bool,
    {
        let n = self.m.nrows();
        let mut digits = vec![0; self.dims.len()];
        let mask: Vec<bool> = (0..n)
            .map(|i| {
                decode_into(&self.dims, i, &mut digits);
                keep(&digits)
            })
            .collect();
        let mut m = self.m.clone();
        for i in 0..n {
            for j in 0..n {
                if !(mask[i] && mask[j]) {
                    m[(i, j)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        DensityMatrix {
            dims: self.dims.clone(),
            m,
        }
    }

    pub fn scaled(&self, s: f64) -> DensityMatrix {
        DensityMatrix {
            dims: self.dims.clone(),
            m: &self.m * Complex64::new(s, 0.0),
        }
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.m.shape() != other.m.shape() {
            return f64::INFINITY;
        }
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
