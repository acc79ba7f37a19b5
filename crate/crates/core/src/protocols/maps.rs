//! Closed-form fidelity recursions and their fixed-point behaviour.

use super::AcceptanceRule;
use crate::algebra::Dim;
use crate::error::{domain, Result};
use crate::gates::{check_fidelity, BellWeights};

/// `q'_i = q_i^2 / sum_j q_j^2`.
pub fn bbpssw_analytic(q: &[f64]) -> Result<BellWeights> {
    if q.iter().any(|&x| !(x >= 0.0)) {
        return domain(format!("weights must be nonnegative: {q:?}"));
    }
    let norm: f64 = q.iter().map(|x| x * x).sum();
    if norm == 0.0 {
        return domain("all-zero weight vector");
    }
    BellWeights::normalize(q.iter().map(|x| x * x / norm).collect())
}

/// Success probability of one BBPSSW round: `sum_j q_j^2`.
pub fn bbpssw_success(q: &[f64]) -> f64 {
    q.iter().map(|x| x * x).sum()
}

/// BBPSSW on `q = (F, (1-F)/(D-1), ...)`: `F^2 / (F^2 + (1-F)^2/(D-1))`.
pub fn bbpssw_fidelity(f: f64, dim: Dim) -> f64 {
    let a = f * f;
    let b = (1.0 - f) * (1.0 - f) / (dim.get() - 1) as f64;
    a / (a + b)
}

/// BBPSSW on the two-state family `(F, 1-F)`.
pub fn bbpssw_m2(f: f64) -> f64 {
    let a = f * f;
    a / (a + (1.0 - f) * (1.0 - f))
}

/// Single-step beam-splitter protocol:
/// `F^D / (F^D + (D-1) ((1-F)/(D-1))^D)`.
pub fn oambs_fidelity(f: f64, dim: Dim) -> f64 {
    let d = dim.get() as i32;
    let a = f.powi(d);
    let b = (d - 1) as f64 * ((1.0 - f) / (d - 1) as f64).powi(d);
    a / (a + b)
}

/// Output fidelity under literal channel-by-channel coincidence: the
/// accepted phase label `s = 2 sum(m)` is uniform over `gcd(2, D)`-spaced
/// residues, so only that fraction of the accepted mass has `s = 0`.
pub fn oambs_literal_fidelity(f: f64, dim: Dim) -> f64 {
    let d = dim.get();
    let classes = if d % 2 == 0 { d / 2 } else { d };
    oambs_fidelity(f, dim) / classes as f64
}

/// Accepted probability of the beam-splitter protocol for Bell weights `q`.
///
/// All-equal post-selection keeps `D^{1-D}` of every uncrossed branch
/// (mass `sum q_i^D`); the rule then accepts `1/D` (sum-zero), all
/// (corrected) or `D^{1-D}` (literal) of the rotated-basis outcomes.
pub fn oambs_success(q: &BellWeights, dim: Dim, rule: AcceptanceRule) -> f64 {
    let d = dim.get() as i32;
    let df = d as f64;
    let uncrossed: f64 = q.as_slice().iter().map(|x| x.powi(d)).sum();
    let emc = df.powi(1 - d);
    let accepted = match rule {
        AcceptanceRule::SumZero => 1.0 / df,
        AcceptanceRule::Corrected => 1.0,
        AcceptanceRule::LiteralCoincidence => df.powi(1 - d),
    };
    uncrossed * emc * accepted
}

/// Conserving-pair distillation reproduces the BBPSSW isotropic recursion.
pub fn conserving_fidelity(f: f64, dim: Dim) -> f64 {
    bbpssw_fidelity(f, dim)
}

/// `F^2/D + (1-F)^2/(D(D-1))`: the mass landing on target outcome `|00>`.
pub fn conserving_success(f: f64, dim: Dim) -> f64 {
    let d = dim.get() as f64;
    f * f / d + (1.0 - f) * (1.0 - f) / (d * (d - 1.0))
}

/// BBPSSW recursion on the odds `r = (1-F)/F`: `r -> r^2/(D-1)`.
pub fn bbpssw_odds(r: f64, dim: Dim) -> f64 {
    r * r / (dim.get() - 1) as f64
}

/// Beam-splitter recursion on the odds: `r -> r^D/(D-1)^(D-1)`.
pub fn oambs_odds(r: f64, dim: Dim) -> f64 {
    let d = dim.get() as i32;
    r.powi(d) / ((d - 1) as f64).powi(d - 1)
}

/// `{0, 1/D, 1}`: 0 and 1 attract, `1/D` repels.
pub fn fixed_points(dim: Dim) -> [f64; 3] {
    [0.0, 1.0 / dim.get() as f64, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecursionMap {
    /// Two-pair BBPSSW on the isotropic Bell family.
    Bbpssw,
    /// Single-step `D`-pair beam-splitter protocol.
    Oambs,
}

impl RecursionMap {
    pub fn apply(self, f: f64, dim: Dim) -> f64 {
        match self {
            RecursionMap::Bbpssw => bbpssw_fidelity(f, dim),
            RecursionMap::Oambs => oambs_fidelity(f, dim),
        }
    }
}

/// Trajectory `[F0, F1, ..., Fk]`.
pub fn iterate_map(map: RecursionMap, f0: f64, dim: Dim, k: usize) -> Result<Vec<f64>> {
    check_fidelity(f0)?;
    if k == 0 {
        return domain("iteration count must be at least 1");
    }
    let mut out = Vec::with_capacity(k + 1);
    out.push(f0);
    let mut f = f0;
    for _ in 0..k {
        f = map.apply(f, dim);
        out.push(f);
    }
    Ok(out)
}

/// `(one beam-splitter step at D = 2^k, k BBPSSW steps at D = 2^k)`.
pub fn acceleration_check(f: f64, k: u32) -> Result<(f64, f64)> {
    check_fidelity(f)?;
    if !(1..=3).contains(&k) {
        return domain(format!("acceleration check needs k in 1..=3, got {k}"));
    }
    let dim = Dim::new(1 << k)?;
    let lhs = oambs_fidelity(f, dim);
    let rhs = *iterate_map(RecursionMap::Bbpssw, f, dim, k as usize)?
        .last()
        .expect("trajectory is never empty");
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    #[test]
    fn bbpssw_examples() {
        assert_abs_diff_eq!(bbpssw_fidelity(0.5, d(3)), 2.0 / 3.0, epsilon = 1e-15);
        for n in 2..=8 {
            assert_eq!(bbpssw_fidelity(1.0, d(n)), 1.0);
        }
        assert_abs_diff_eq!(bbpssw_m2(0.7), 0.49 / 0.58, epsilon = 1e-15);
        let q = bbpssw_analytic(&[0.5, 0.25, 0.25]).unwrap();
        for (a, b) in q.as_slice().iter().zip([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(bbpssw_analytic(&[0.0, 0.0]).is_err());
        assert_abs_diff_eq!(bbpssw_success(&[0.5, 0.25, 0.25]), 0.375, epsilon = 1e-15);
    }

    #[test]
    fn oambs_examples() {
        assert_abs_diff_eq!(oambs_fidelity(1.0 / 3.0, d(3)), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(oambs_fidelity(0.5, d(4)), 27.0 / 28.0, epsilon = 1e-15);
        assert_abs_diff_eq!(oambs_fidelity(0.5, d(3)), 0.8, epsilon = 1e-15);
        assert_eq!(fixed_points(d(3)), [0.0, 1.0 / 3.0, 1.0]);
    }

    #[test]
    fn conserving_examples() {
        assert_abs_diff_eq!(conserving_fidelity(0.5, d(2)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            conserving_fidelity(0.9, d(4)),
            0.81 / (0.81 + 0.01 / 3.0),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(conserving_fidelity(0.5, d(3)), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn iteration_examples() {
        let t = iterate_map(RecursionMap::Bbpssw, 0.5, d(4), 2).unwrap();
        assert_abs_diff_eq!(t[1], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(t[2], 27.0 / 28.0, epsilon = 1e-15);

        for n in 2..=8 {
            let p = 1.0 / n as f64;
            for map in [RecursionMap::Bbpssw, RecursionMap::Oambs] {
                for f in iterate_map(map, p, d(n), 5).unwrap() {
                    assert_abs_diff_eq!(f, p, epsilon = 1e-9);
                }
            }
        }

        let t = iterate_map(RecursionMap::Oambs, 0.4, d(2), 40).unwrap();
        assert!(t.last().unwrap().abs() < 1e-12);

        assert!(iterate_map(RecursionMap::Oambs, 0.4, d(2), 0).is_err());
        assert!(iterate_map(RecursionMap::Oambs, 1.4, d(2), 3).is_err());
    }

    #[test]
    fn acceleration_examples() {
        let (l, r) = acceleration_check(0.5, 2).unwrap();
        assert_abs_diff_eq!(l, 27.0 / 28.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 27.0 / 28.0, epsilon = 1e-15);
        for k in 1..=3 {
            assert_eq!(acceleration_check(1.0, k).unwrap(), (1.0, 1.0));
        }
        let (l, r) = acceleration_check(0.6, 1).unwrap();
        assert_abs_diff_eq!(l, 0.36 / 0.52, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 0.36 / 0.52, epsilon = 1e-15);
        assert!(acceleration_check(0.5, 4).is_err());
    }

    #[test]
    fn success_closed_forms() {
        let q = BellWeights::isotropic(1.0, d(3)).unwrap();
        assert_abs_diff_eq!(
            oambs_success(&q, d(3), AcceptanceRule::SumZero),
            1.0 / 27.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            oambs_success(&q, d(3), AcceptanceRule::Corrected),
            1.0 / 9.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(conserving_success(0.0, d(3)), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(conserving_success(1.0, d(3)), 1.0 / 3.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn trajectories_are_monotone(f0 in 0.0f64..=1.0, n in 2usize..=8, k in 1usize..12) {
            let dim = d(n);
            let p = 1.0 / n as f64;
            prop_assume!((f0 - p).abs() > 1e-6);
            for map in [RecursionMap::Bbpssw, RecursionMap::Oambs] {
                let t = iterate_map(map, f0, dim, k).unwrap();
                for w in t.windows(2) {
                    if f0 > p {
                        prop_assert!(w[1] >= w[0] - 1e-15);
                    } else {
                        prop_assert!(w[1] <= w[0] + 1e-15);
                    }
                }
            }
        }

        #[test]
        fn odds_form_matches(f in 0.01f64..0.99, n in 2usize..=8) {
            let dim = d(n);
            let r = (1.0 - f) / f;
            let back = |r: f64| 1.0 / (1.0 + r);
            prop_assert!((back(bbpssw_odds(r, dim)) - bbpssw_fidelity(f, dim)).abs() < 1e-12);
            prop_assert!((back(oambs_odds(r, dim)) - oambs_fidelity(f, dim)).abs() < 1e-12);
        }
    }
}
