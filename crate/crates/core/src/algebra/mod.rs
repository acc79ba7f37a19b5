//! Dense complex linear algebra over registers of qudits.
//!
//! Every register is addressed in mixed radix with the leftmost factor most
//! significant: digits `[d0, d1, ..., dn]` over dims `[D0, ..., Dn]` live at
//! flat index `((d0 * D1 + d1) * D2 + d2) ...`.

mod density;
mod operator;
mod state;

pub use density::DensityMatrix;
pub use operator::LinearOperator;
pub use state::{MeasurementBranch, PureState, WeightedEnsemble};

use std::fmt;

use crate::error::{domain, resource, Result};

pub use num_complex::Complex64;

/// Absolute tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Absolute tolerance for simulation-vs-closed-form comparisons.
pub const SIM_TOL: f64 = 1e-9;
/// Overlap threshold for equality up to global phase: `|<a|b>|^2 >= 1 - PHASE_EQ_TOL`.
pub const PHASE_EQ_TOL: f64 = 1e-10;

/// Largest qudit dimension accepted by [`Dim::new`].
pub const DEFAULT_MAX_DIM: usize = 8;
/// Largest joint register size, in amplitudes.
pub const MAX_AMPLITUDES: usize = 1 << 24;

/// A qudit dimension `D >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dim(usize);

impl Dim {
    /// Builds a dimension under the default guard of [`DEFAULT_MAX_DIM`].
    pub fn new(d: usize) -> Result<Self> {
        Self::with_limit(d, DEFAULT_MAX_DIM)
    }

    pub fn with_limit(d: usize, limit: usize) -> Result<Self> {
        if d < 2 {
            return domain(format!("qudit dimension must be at least 2, got {d}"));
        }
        if d > limit {
            return resource(format!("qudit dimension {d} exceeds the guard of {limit}"));
        }
        Ok(Dim(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// `(i + j) mod D` for in-range arguments.
    #[inline]
    pub fn add(self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.0 && j < self.0);
        (i + j) % self.0
    }

    /// `(i - j) mod D` for in-range arguments, the `⊖` of the qudit CNOT.
    #[inline]
    pub fn sub(self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.0 && j < self.0);
        (i + self.0 - j) % self.0
    }

    pub fn index(self, value: usize) -> Result<ModIndex> {
        ModIndex::new(value, self)
    }

    /// All values `0..D`.
    pub fn values(self) -> std::ops::Range<usize> {
        0..self.0
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A residue in `[0, D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModIndex(usize);

impl ModIndex {
    pub fn new(value: usize, dim: Dim) -> Result<Self> {
        if value >= dim.get() {
            return domain(format!("index {value} out of range for D = {dim}"));
        }
        Ok(ModIndex(value))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Add,
    Sub,
}

/// `(i ± j) mod D`, validating that both operands are residues of `D`.
pub fn mod_arith(i: usize, j: usize, dim: Dim, sign: Sign) -> Result<ModIndex> {
    let (i, j) = (dim.index(i)?, dim.index(j)?);
    let v = match sign {
        Sign::Add => dim.add(i.get(), j.get()),
        Sign::Sub => dim.sub(i.get(), j.get()),
    };
    Ok(ModIndex(v))
}

/// Product of dims with the memory guard applied.
pub(crate) fn joint_size(dims: &[Dim]) -> Result<usize> {
    let mut n: usize = 1;
    for d in dims {
        n = match n.checked_mul(d.get()) {
            Some(v) if v <= MAX_AMPLITUDES => v,
            _ => {
                return resource(format!(
                    "joint register size exceeds the guard of {MAX_AMPLITUDES} amplitudes"
                ))
            }
        };
    }
    Ok(n)
}

/// Per-factor strides under the leftmost-most-significant convention.
pub(crate) fn strides(dims: &[Dim]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1].get();
    }
    s
}

/// Flat index of `digits` in the register `dims`.
pub fn encode(dims: &[Dim], digits: &[usize]) -> Result<usize> {
    if dims.len() != digits.len() {
        return domain(format!(
            "expected {} digits, got {}",
            dims.len(),
            digits.len()
        ));
    }
    let mut idx = 0usize;
    for (d, &x) in dims.iter().zip(digits) {
        if x >= d.get() {
            return domain(format!("digit {x} out of range for D = {d}"));
        }
        idx = idx * d.get() + x;
    }
    Ok(idx)
}

/// Inverse of [`encode`]; writes the digits of `idx` into `out`.
pub(crate) fn decode_into(dims: &[Dim], mut idx: usize, out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        let d = dims[k].get();
        out[k] = idx % d;
        idx /= d;
    }
}

pub fn decode(dims: &[Dim], idx: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    decode_into(dims, idx, &mut out);
    out
}

/// Flat offsets contributed by every digit assignment of the selected factors.
///
/// The result is ordered so that entry `t` corresponds to the mixed-radix
/// index `t` over the selected factors taken in the given order.
pub(crate) fn sub_offsets(dims: &[Dim], factors: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut offs = vec![0usize];
    for &f in factors {
        let d = dims[f].get();
        let mut next = Vec::with_capacity(offs.len() * d);
        for &o in &offs {
            for x in 0..d {
                next.push(o + x * st[f]);
            }
        }
        offs = next;
    }
    offs
}

/// Validates a list of distinct, in-range factor indices.
pub(crate) fn check_factors(n_factors: usize, factors: &[usize]) -> Result<()> {
    for (k, &f) in factors.iter().enumerate() {
        if f >= n_factors {
            return domain(format!(
                "factor index {f} out of range for a {n_factors}-factor register"
            ));
        }
        if factors[..k].contains(&f) {
            return domain(format!("factor index {f} listed twice"));
        }
    }
    Ok(())
}

/// Factors of `0..n` not listed in `factors`, in increasing order.
pub(crate) fn complement(n: usize, factors: &[usize]) -> Vec<usize> {
    (0..n).filter(|f| !factors.contains(f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn modular_examples() {
        assert_eq!(mod_arith(2, 1, d(3), Sign::Sub).unwrap().get(), 1);
        assert_eq!(mod_arith(0, 2, d(3), Sign::Sub).unwrap().get(), 1);
        assert_eq!(mod_arith(5, 5, d(7), Sign::Add).unwrap().get(), 3);
    }

    #[test]
    fn modular_rejects_out_of_range() {
        assert!(matches!(
            mod_arith(3, 0, d(3), Sign::Add),
            Err(crate::Error::Domain(_))
        ));
        assert!(mod_arith(0, 7, d(7), Sign::Sub).is_err());
    }

    #[test]
    fn dim_guard() {
        assert!(matches!(Dim::new(1), Err(crate::Error::Domain(_))));
        assert!(matches!(Dim::new(9), Err(crate::Error::ResourceLimit(_))));
        assert_eq!(Dim::with_limit(12, 16).unwrap().get(), 12);
    }

    #[test]
    fn mixed_radix_convention() {
        assert_eq!(encode(&[d(3), d(3)], &[1, 2]).unwrap(), 5);
        assert_eq!(encode(&[d(2), d(2), d(2)], &[1, 0, 1]).unwrap(), 5);
        assert_eq!(decode(&[d(2), d(3), d(4)], 23), vec![1, 2, 3]);
        assert!(encode(&[d(2)], &[2]).is_err());
        assert!(encode(&[d(2), d(2)], &[0]).is_err());
    }

    #[test]
    fn sub_offsets_follow_factor_order() {
        let dims = [d(2), d(3)];
        assert_eq!(sub_offsets(&dims, &[1, 0]), vec![0, 3, 1, 4, 2, 5]);
        assert_eq!(sub_offsets(&dims, &[]), vec![0]);
    }

    #[test]
    fn joint_size_guard() {
        let dims = vec![d(8); 9];
        assert!(matches!(
            joint_size(&dims),
            Err(crate::Error::ResourceLimit(_))
        ));
        assert_eq!(joint_size(&vec![d(8); 8]).unwrap(), 1 << 24);
    }
}
