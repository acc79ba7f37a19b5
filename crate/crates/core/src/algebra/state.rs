use num_complex::Complex64;

use super::{
    check_factors, complement, decode_into, encode, joint_size, sub_offsets, DensityMatrix, Dim,
    LinearOperator, ALGEBRA_TOL, PHASE_EQ_TOL,
};
use crate::error::{domain, Result};

/// A pure state of a qudit register together with the probability mass of
/// the branch it represents.
///
/// Post-selection keeps the amplitudes normalized and moves the surviving
/// probability into `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<Dim>,
    amps: Vec<Complex64>,
    weight: f64,
}

/// One outcome of a computational-basis measurement on part of a register.
#[derive(Debug, Clone)]
pub struct MeasurementBranch {
    /// Measured digits, in the order the factors were requested.
    pub outcome: Vec<usize>,
    /// Post-measurement state of the unmeasured factors; its weight is the
    /// parent weight times the outcome probability.
    pub state: PureState,
}

impl PureState {
    pub fn new(dims: Vec<Dim>, amps: Vec<Complex64>, weight: f64) -> Result<Self> {
        let n = joint_size(&dims)?;
        if amps.len() != n {
            return domain(format!(
                "amplitude vector has length {}, register needs {n}",
                amps.len()
            ));
        }
        if !(weight >= 0.0) || !weight.is_finite() {
            return domain(format!(
                "branch weight must be finite and nonnegative, got {weight}"
            ));
        }
        Ok(PureState { dims, amps, weight })
    }

    /// Computational basis state `|digits>` with weight 1.
    pub fn basis(dims: &[Dim], digits: &[usize]) -> Result<Self> {
        let n = joint_size(dims)?;
        let idx = encode(dims, digits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(PureState {
            dims: dims.to_vec(),
            amps,
            weight: 1.0,
        })
    }

    /// Normalized superposition built from `(digits, amplitude)` terms.
    pub fn from_terms<'a, I>(dims: &[Dim], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [usize], Complex64)>,
    {
        let n = joint_size(dims)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        for (digits, a) in terms {
            amps[encode(dims, digits)?] += a;
        }
        let s = PureState {
            dims: dims.to_vec(),
            amps,
            weight: 1.0,
        };
        if s.norm2() == 0.0 {
            return domain("superposition has zero norm");
        }
        Ok(s.normalized().with_weight(1.0))
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        debug_assert!(weight >= 0.0);
        self.weight = weight;
        self
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<Complex64> {
        Ok(self.amps[encode(&self.dims, digits)?])
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// `<a|b>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dims != other.dims {
            return domain("inner product of states with different dims");
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm2(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm2() - 1.0).abs() <= ALGEBRA_TOL
    }

    /// Rescales the amplitudes to unit norm and multiplies the weight by the
    /// removed squared norm. A zero vector stays zero and gets weight 0.
    pub fn normalized(mut self) -> Self {
        let n2 = self.norm2();
        if n2 == 0.0 {
            self.weight = 0.0;
            return self;
        }
        let inv = 1.0 / n2.sqrt();
        for a in &mut self.amps {
            *a *= inv;
        }
        self.weight *= n2;
        self
    }

    /// Kronecker product; dims concatenate and weights multiply.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        joint_size(&dims)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            if *a == Complex64::new(0.0, 0.0) {
                amps.extend(std::iter::repeat_n(
                    Complex64::new(0.0, 0.0),
                    other.amps.len(),
                ));
            } else {
                amps.extend(other.amps.iter().map(|b| a * b));
            }
        }
        Ok(PureState {
            dims,
            amps,
            weight: self.weight * other.weight,
        })
    }

    /// Applies `op` to the listed factors, in order; other factors untouched.
    pub fn apply_local(&self, op: &LinearOperator, targets: &[usize]) -> Result<PureState> {
        check_factors(self.dims.len(), targets)?;
        if op.in_dims().len() != targets.len()
            || op
                .in_dims()
                .iter()
                .zip(targets)
                .any(|(d, &t)| *d != self.dims[t])
        {
            return domain("operator dims do not match the targeted factors");
        }
        if op.in_dims() != op.out_dims() {
            return domain("local application needs a square operator");
        }
        let out = apply_local_raw(&self.dims, &self.amps, op, targets);
        Ok(PureState {
            dims: self.dims.clone(),
            amps: out,
            weight: self.weight,
        })
    }

    /// Zeroes every basis component whose digits fail `keep`, then
    /// renormalizes. The surviving squared norm multiplies the weight.
    pub fn postselect<F>(&self, mut keep: F) -> PureState
    where
        F: FnMut(&[usize]) -> bool,
    {
        let mut digits = vec![0usize; self.dims.len()];
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(idx, &a)| {
                if a.norm_sqr() == 0.0 {
                    return a;
                }
                decode_into(&self.dims, idx, &mut digits);
                if keep(&digits) {
                    a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let before = self.norm2();
        let s = PureState {
            dims: self.dims.clone(),
            amps,
            weight: self.weight,
        };
        // Fold in the original norm so unnormalized inputs keep their mass.
        let s = s.normalized();
        let w = if before > 0.0 { s.weight / before } else { 0.0 };
        s.with_weight(w)
    }

    /// Relabels basis states through `map`, which returns the new digits for
    /// a basis state or `None` when that basis state must carry no amplitude.
    pub fn map_basis<F>(&self, mut map: F) -> Result<PureState>
    where
        F: FnMut(&[usize]) -> Option<Vec<usize>>,
    {
        let mut digits = vec![0usize; self.dims.len()];
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            decode_into(&self.dims, idx, &mut digits);
            match map(&digits) {
                Some(to) => amps[encode(&self.dims, &to)?] += a,
                None => return domain(format!("basis state {digits:?} has no image")),
            }
        }
        Ok(PureState {
            dims: self.dims.clone(),
            amps,
            weight: self.weight,
        })
    }

    /// Measures the listed factors in the computational basis.
    ///
    /// Returns one branch per outcome with nonzero probability, in
    /// mixed-radix order of the outcome digits. Branch states live on the
    /// unmeasured factors (in their original order) and are normalized.
    pub fn measure(&self, factors: &[usize]) -> Result<Vec<MeasurementBranch>> {
        check_factors(self.dims.len(), factors)?;
        let kept = complement(self.dims.len(), factors);
        if kept.is_empty() {
            return domain("measurement must leave at least one factor");
        }
        let k_offs = sub_offsets(&self.dims, &kept);
        let m_offs = sub_offsets(&self.dims, factors);
        let kept_dims: Vec<Dim> = kept.iter().map(|&f| self.dims[f]).collect();
        let m_dims: Vec<Dim> = factors.iter().map(|&f| self.dims[f]).collect();
        let total = self.norm2();
        if total == 0.0 {
            return Ok(Vec::new());
        }

        let mut out = Vec::new();
        for (o_idx, &mo) in m_offs.iter().enumerate() {
            let amps: Vec<Complex64> = k_offs.iter().map(|&ko| self.amps[mo + ko]).collect();
            let mass: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if mass == 0.0 {
                continue;
            }
            let state = PureState {
                dims: kept_dims.clone(),
                amps,
                weight: self.weight / total,
            }
            .normalized();
            let mut outcome = vec![0; m_dims.len()];
            decode_into(&m_dims, o_idx, &mut outcome);
            out.push(MeasurementBranch { outcome, state });
        }
        Ok(out)
    }

    /// Equality up to global phase: `|<a|b>|^2 >= 1 - 1e-10` after normalizing.
    pub fn same_ray(&self, other: &PureState) -> bool {
        let (na, nb) = (self.norm2(), other.norm2());
        if na == 0.0 || nb == 0.0 {
            return false;
        }
        match self.inner(other) {
            Ok(ip) => ip.norm_sqr() / (na * nb) >= 1.0 - PHASE_EQ_TOL,
            Err(_) => false,
        }
    }

    /// `|psi><psi|` of the normalized amplitudes, scaled by the weight.
    pub fn to_density(&self) -> DensityMatrix {
        let e = WeightedEnsemble {
            dims: self.dims.clone(),
            branches: vec![self.clone()],
        };
        e.to_density()
    }
}

/// Factor-local `op` on a raw amplitude vector; dims already validated.
pub(crate) fn apply_local_raw(
    dims: &[Dim],
    amps: &[Complex64],
    op: &LinearOperator,
    targets: &[usize],
) -> Vec<Complex64> {
    let t_offs = sub_offsets(dims, targets);
    let rest = complement(dims.len(), targets);
    let r_offs = sub_offsets(dims, &rest);
    let m = op.matrix();
    let dt = t_offs.len();

    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    let mut v = vec![Complex64::new(0.0, 0.0); dt];
    for &base in &r_offs {
        for (slot, &o) in v.iter_mut().zip(&t_offs) {
            *slot = amps[base + o];
        }
        if v.iter().all(|a| a.norm_sqr() == 0.0) {
            continue;
        }
        for (row, &o) in t_offs.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, x) in v.iter().enumerate() {
                acc += m[(row, col)] * x;
            }
            out[base + o] = acc;
        }
    }
    out
}

/// A mixed state held as a list of weighted pure branches.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnsemble {
    dims: Vec<Dim>,
    branches: Vec<PureState>,
}

impl WeightedEnsemble {
    pub fn new(branches: Vec<PureState>) -> Result<Self> {
        let Some(first) = branches.first() else {
            return domain("ensemble needs at least one branch");
        };
        let dims = first.dims.clone();
        if branches.iter().any(|b| b.dims != dims) {
            return domain("ensemble branches have different dims");
        }
        let total: f64 = branches.iter().map(|b| b.weight).sum();
        if total > 1.0 + ALGEBRA_TOL {
            return domain(format!("ensemble weights sum to {total} > 1"));
        }
        Ok(WeightedEnsemble { dims, branches })
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn branches(&self) -> &[PureState] {
        &self.branches
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }

    /// `<target|rho|target>` without building `rho`.
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        if target.dims != self.dims {
            return domain("fidelity target has different dims");
        }
        let mut f = 0.0;
        for b in &self.branches {
            let n2 = b.norm2();
            if n2 == 0.0 || b.weight == 0.0 {
                continue;
            }
            f += b.weight * target.inner(b)?.norm_sqr() / n2;
        }
        Ok(f)
    }

    /// `sum_i w_i |psi_i><psi_i|` with each branch normalized first.
    pub fn to_density(&self) -> DensityMatrix {
        let n = self.branches[0].amps.len();
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
        for b in &self.branches {
            let n2 = b.norm2();
            if n2 == 0.0 || b.weight == 0.0 {
                continue;
            }
            let scale = b.weight / n2;
            for (i, ai) in b.amps.iter().enumerate() {
                if ai.norm_sqr() == 0.0 {
                    continue;
                }
                for (j, aj) in b.amps.iter().enumerate() {
                    m[(i, j)] += ai * aj.conj() * scale;
                }
            }
        }
        DensityMatrix::from_parts(self.dims.clone(), m)
    }
}
