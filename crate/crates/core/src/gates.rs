//! Named operators and states: qudit CNOT, Fourier transform, phase gate,
//! generalized Bell states and their diagonal mixtures, and the
//! angular-momentum conserving pair states.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{Dim, LinearOperator, PureState, WeightedEnsemble, ALGEBRA_TOL};
use crate::error::{domain, Result};

/// Label `(k, j)` of the Bell state `|Psi_kj>`: `k` is the phase index, `j`
/// the shift index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellLabel {
    pub k: usize,
    pub j: usize,
}

/// Probability weights over a family of orthogonal pair states, indexed by
/// the shift label `i` of `|Psi_0i>` (or by position for other families).
#[derive(Debug, Clone, PartialEq)]
pub struct BellWeights(Vec<f64>);

impl BellWeights {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return domain("weight vector is empty");
        }
        if q.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return domain(format!("weights must be finite and nonnegative: {q:?}"));
        }
        let s: f64 = q.iter().sum();
        if (s - 1.0).abs() > ALGEBRA_TOL {
            return domain(format!("weights sum to {s}, expected 1"));
        }
        Ok(BellWeights(q))
    }

    /// Renormalizes a nonnegative vector; fails on an all-zero input.
    pub fn normalize(q: Vec<f64>) -> Result<Self> {
        let s: f64 = q.iter().sum();
        if !(s > 0.0) {
            return domain("cannot normalize an all-zero weight vector");
        }
        Self::new(q.into_iter().map(|x| x / s).collect())
    }

    /// Two-state family `(F, 1 - F)`.
    pub fn two_state(f: f64) -> Result<Self> {
        check_fidelity(f)?;
        Self::new(vec![f, 1.0 - f])
    }

    /// `q_0 = F`, the remaining `D - 1` shift labels share `1 - F` evenly.
    pub fn isotropic(f: f64, dim: Dim) -> Result<Self> {
        check_fidelity(f)?;
        let rest = (1.0 - f) / (dim.get() - 1) as f64;
        let mut q = vec![rest; dim.get()];
        q[0] = f;
        Self::new(q)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn fidelity(&self) -> f64 {
        self.0[0]
    }
}

pub(crate) fn check_fidelity(f: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&f) {
        return domain(format!("fidelity {f} outside [0, 1]"));
    }
    Ok(())
}

fn omega(dim: Dim, power: i64) -> Complex64 {
    let d = dim.get() as i64;
    let p = power.rem_euclid(d);
    Complex64::from_polar(1.0, 2.0 * PI * p as f64 / d as f64)
}

/// `|i>|j> -> |i>|i - j mod D>` on two qudits.
pub fn cnot_operator(dim: Dim) -> Result<LinearOperator> {
    LinearOperator::permutation(vec![dim, dim], |v| vec![v[0], dim.sub(v[0], v[1])])
}

/// `U[y][k] = exp(2 pi i k y / D) / sqrt(D)`.
pub fn qft_operator(dim: Dim) -> Result<LinearOperator> {
    let d = dim.get();
    let norm = 1.0 / (d as f64).sqrt();
    let m = DMatrix::from_fn(d, d, |y, k| omega(dim, (y * k) as i64) * norm);
    LinearOperator::square(vec![dim], m)
}

/// Diagonal `|y> -> exp(-2 pi i s y / D) |y>`; undoes the phase label `s`.
pub fn phase_z(dim: Dim, s: i64) -> LinearOperator {
    let d = dim.get();
    let diag = nalgebra::DVector::from_fn(d, |y, _| omega(dim, -s * y as i64));
    LinearOperator::square(vec![dim], DMatrix::from_diagonal(&diag))
        .expect("single-qudit diagonal always matches its dims")
}

/// `|Psi_kj> = D^{-1/2} sum_y exp(2 pi i k y / D) |y>|y - j>`.
pub fn bell(k: usize, j: usize, dim: Dim) -> Result<PureState> {
    let (k, j) = (dim.index(k)?.get(), dim.index(j)?.get());
    let d = dim.get();
    let norm = 1.0 / (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for y in 0..d {
        amps[y * d + dim.sub(y, j)] = omega(dim, (k * y) as i64) * norm;
    }
    PureState::new(vec![dim, dim], amps, 1.0)
}

pub fn bell_state(label: BellLabel, dim: Dim) -> Result<PureState> {
    bell(label.k, label.j, dim)
}

/// `sum_i q_i |Psi_0i><Psi_0i|` as an ensemble.
pub fn bell_mixture(q: &BellWeights, dim: Dim) -> Result<WeightedEnsemble> {
    if q.len() > dim.get() {
        return domain(format!(
            "{} weights given but only {} Bell states |Psi_0i> exist",
            q.len(),
            dim
        ));
    }
    let branches = q
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &w)| Ok(bell(0, i, dim)?.with_weight(w)))
        .collect::<Result<Vec<_>>>()?;
    WeightedEnsemble::new(branches)
}

/// The conserving pair `|Phi_C>` and its non-conserving complement `|Psi_NC>`.
///
/// `|Phi_C> = D^{-1/2} sum_i |i>|D-1-i>`;
/// `|Psi_NC>` is the uniform superposition of every `|i>|j>` with `j != D-1-i`.
pub fn conserving_states(dim: Dim) -> Result<(PureState, PureState)> {
    let d = dim.get();
    let dims = [dim, dim];
    let conserved: Vec<[usize; 2]> = (0..d).map(|i| [i, d - 1 - i]).collect();
    let rest: Vec<[usize; 2]> = (0..d)
        .flat_map(|i| (0..d).map(move |j| [i, j]))
        .filter(|p| p[1] != d - 1 - p[0])
        .collect();
    let one = Complex64::new(1.0, 0.0);
    let phi_c = PureState::from_terms(&dims, conserved.iter().map(|p| (&p[..], one)))?;
    let psi_nc = PureState::from_terms(&dims, rest.iter().map(|p| (&p[..], one)))?;
    Ok((phi_c, psi_nc))
}

/// `F |Phi_C><Phi_C| + (1 - F) |Psi_NC><Psi_NC|`.
pub fn conserving_mixture(f: f64, dim: Dim) -> Result<WeightedEnsemble> {
    check_fidelity(f)?;
    let (phi_c, psi_nc) = conserving_states(dim)?;
    WeightedEnsemble::new(vec![phi_c.with_weight(f), psi_nc.with_weight(1.0 - f)])
}

/// CNOT on Alice's `(control, target)` factors and on Bob's.
pub fn bilateral_cnot(
    s: &PureState,
    alice: (usize, usize),
    bob: (usize, usize),
) -> Result<PureState> {
    let idx = [alice.0, alice.1, bob.0, bob.1];
    for (k, f) in idx.iter().enumerate() {
        if idx[..k].contains(f) {
            return domain(format!("bilateral CNOT factor {f} used twice"));
        }
        if *f >= s.dims().len() {
            return domain(format!("bilateral CNOT factor {f} out of range"));
        }
    }
    let dim = s.dims()[alice.0];
    let cx = cnot_operator(dim)?;
    s.apply_local(&cx, &[alice.0, alice.1])?
        .apply_local(&cx, &[bob.0, bob.1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-14)
    }

    #[test]
    fn cnot_examples() {
        for (dim, input, out) in [
            (2, [1, 0], [1, 1]),
            (3, [2, 1], [2, 1]),
            (3, [1, 2], [1, 2]),
        ] {
            let s = PureState::basis(&[d(dim); 2], &input).unwrap();
            let got = s
                .apply_local(&cnot_operator(d(dim)).unwrap(), &[0, 1])
                .unwrap();
            assert_eq!(got, PureState::basis(&[d(dim); 2], &out).unwrap());
        }
    }

    #[test]
    fn cnot_order() {
        let id = |n| LinearOperator::identity(vec![d(n); 2]).unwrap();
        assert_eq!(cnot_operator(d(2)).unwrap().pow(2).unwrap(), id(2));
        for n in 3..=6 {
            let cx = cnot_operator(d(n)).unwrap();
            // |i>|j> -> |i>|i-j> is an involution for every D
            assert_eq!(cx.pow(2).unwrap(), id(n));
            assert!(cx.is_permutation());
        }
    }

    #[test]
    fn qft_examples() {
        let s = PureState::basis(&[d(2)], &[0]).unwrap();
        let got = s.apply_local(&qft_operator(d(2)).unwrap(), &[0]).unwrap();
        assert!(close(got.amplitudes(), &[c(FRAC_1_SQRT_2, 0.0); 2]));

        let u = qft_operator(d(3)).unwrap();
        let want = Complex64::from_polar(1.0, 2.0 * PI / 3.0) / 3f64.sqrt();
        assert!((u.matrix()[(1, 1)] - want).norm() < 1e-15);

        assert!(qft_operator(d(5)).unwrap().unitarity_residual() < 1e-12);
    }

    #[test]
    fn phase_examples() {
        assert!(
            phase_z(d(4), 0).max_abs_diff(&LinearOperator::identity(vec![d(4)]).unwrap()) < 1e-15
        );
        let z = phase_z(d(2), 1);
        assert!(close(
            z.matrix().as_slice(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]
        ));
        let fixed = bell(1, 1, d(3))
            .unwrap()
            .apply_local(&phase_z(d(3), 1), &[0])
            .unwrap();
        assert!(fixed.same_ray(&bell(0, 1, d(3)).unwrap()));
    }

    #[test]
    fn bell_examples() {
        let h = FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        assert!(close(
            bell(0, 0, d(2)).unwrap().amplitudes(),
            &[c(h, 0.0), z, z, c(h, 0.0)]
        ));
        assert!(close(
            bell(1, 1, d(2)).unwrap().amplitudes(),
            &[z, c(h, 0.0), c(-h, 0.0), z]
        ));
        let t = 1.0 / 3f64.sqrt();
        // (|02> + |10> + |21>)/sqrt3
        let mut want = vec![z; 9];
        want[2] = c(t, 0.0);
        want[3] = c(t, 0.0);
        want[7] = c(t, 0.0);
        assert!(close(bell(0, 1, d(3)).unwrap().amplitudes(), &want));
        assert!(bell(3, 0, d(3)).is_err());
    }

    #[test]
    fn bell_orthogonality_d3() {
        // brute-force sum over the terms of |Psi_00> and |Psi_01>
        let a = bell(0, 0, d(3)).unwrap();
        let b = bell(0, 1, d(3)).unwrap();
        assert!(a.inner(&b).unwrap().norm() < 1e-15);
    }

    #[test]
    fn mixture_examples() {
        let pure = bell_mixture(&BellWeights::new(vec![1.0]).unwrap(), d(3)).unwrap();
        assert_eq!(pure.branches().len(), 1);
        assert!((pure.fidelity(&bell(0, 0, d(3)).unwrap()).unwrap() - 1.0).abs() < 1e-12);

        let q = BellWeights::isotropic(0.7, d(3)).unwrap();
        assert_eq!(q.as_slice().len(), 3);
        assert!((q.as_slice()[1] - 0.15).abs() < 1e-15 && (q.as_slice()[2] - 0.15).abs() < 1e-15);
        let e = bell_mixture(&q, d(3)).unwrap();
        assert!((e.fidelity(&bell(0, 0, d(3)).unwrap()).unwrap() - 0.7).abs() < 1e-12);

        let too_long = BellWeights::new(vec![0.25; 4]).unwrap();
        assert!(bell_mixture(&too_long, d(3)).is_err());
        assert!(BellWeights::new(vec![0.5, 0.6]).is_err());
        assert!(BellWeights::new(vec![1.5, -0.5]).is_err());
        assert!(BellWeights::normalize(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn conserving_examples() {
        let h = FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        let (phi, psi) = conserving_states(d(2)).unwrap();
        assert!(close(phi.amplitudes(), &[z, c(h, 0.0), c(h, 0.0), z]));
        assert!(close(psi.amplitudes(), &[c(h, 0.0), z, z, c(h, 0.0)]));

        let (phi, psi) = conserving_states(d(4)).unwrap();
        assert!(phi.inner(&psi).unwrap().norm() < 1e-15);
        assert!(phi.is_normalized() && psi.is_normalized());

        let phi_c = conserving_states(d(3)).unwrap().0;
        for (f, want) in [(1.0, 1.0), (0.0, 0.0), (0.6, 0.6)] {
            let e = conserving_mixture(f, d(3)).unwrap();
            assert!((e.fidelity(&phi_c).unwrap() - want).abs() < 1e-12);
        }
        assert!(conserving_mixture(1.1, d(3)).is_err());
    }

    #[test]
    fn bilateral_examples() {
        let dims = [d(3); 4];
        let s = PureState::basis(&dims, &[1, 1, 0, 2]).unwrap();
        let got = bilateral_cnot(&s, (0, 2), (1, 3)).unwrap();
        assert_eq!(got, PureState::basis(&dims, &[1, 1, 1, 2]).unwrap());
        assert!(bilateral_cnot(&s, (0, 2), (0, 3)).is_err());
        assert!(bilateral_cnot(&s, (0, 2), (1, 4)).is_err());
    }

    #[test]
    fn bilateral_on_conserving_pairs() {
        // target pair lands on |00> with probability 1/D
        let (phi, _) = conserving_states(d(2)).unwrap();
        let s = bilateral_cnot(&phi.tensor(&phi).unwrap(), (0, 2), (1, 3)).unwrap();
        let hit: f64 = s
            .measure(&[2, 3])
            .unwrap()
            .into_iter()
            .filter(|b| b.outcome == [0, 0])
            .map(|b| b.state.weight())
            .sum();
        assert!((hit - 0.5).abs() < 1e-12, "hit = {hit}");

        // identical Bell pairs: target outcomes always coincide
        let b = bell(0, 0, d(3)).unwrap();
        let s = bilateral_cnot(&b.tensor(&b).unwrap(), (0, 2), (1, 3)).unwrap();
        for br in s.measure(&[2, 3]).unwrap() {
            assert_eq!(br.outcome[0], br.outcome[1]);
        }
    }
}
