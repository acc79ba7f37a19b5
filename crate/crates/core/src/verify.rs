//! Self-contained invariant suite over every layer of the crate.
//!
//! Inputs are fixed grids and a deterministic quasi-random sequence, so two
//! runs report identical numbers.

use std::fmt;

use num_complex::Complex64;

use crate::algebra::{
    Dim, LinearOperator, PureState, WeightedEnsemble, ALGEBRA_TOL, PHASE_EQ_TOL, SIM_TOL,
};
use crate::beam_splitter::{
    enumerate_configs, postselect, t_as_operator, ChannelConfig, ModeSuperposition, PostselectRule,
    MAX_ENUM_DIM,
};
use crate::gates::{
    bell, bell_mixture, cnot_operator, conserving_states, phase_z, qft_operator, BellWeights,
};
use crate::protocols::*;
use crate::Result;

/// One named invariant with its worst observed deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub group: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}/{}: {}", self.group, self.name, self.detail)
    }
}

fn dims(range: std::ops::RangeInclusive<usize>) -> impl Iterator<Item = Dim> {
    range.map(|n| Dim::new(n).expect("suite dims are in range"))
}

fn f_grid(dim: Dim) -> [f64; 7] {
    [0.1, 0.3, 1.0 / dim.get() as f64, 0.5, 0.7, 0.9, 1.0]
}

/// Worst deviation seen against a tolerance.
struct Worst(f64);

impl Worst {
    fn new() -> Self {
        Worst(0.0)
    }

    fn see(&mut self, x: f64) {
        // NaN must never pass
        if !(x <= self.0) {
            self.0 = if x.is_nan() { f64::INFINITY } else { x };
        }
    }

    fn verdict(&self, tol: f64) -> (bool, String) {
        (
            self.0 < tol,
            format!("max deviation {:.3e} (tol {tol:e})", self.0),
        )
    }
}

/// Additive quasi-random sequence; fixed so the suite is reproducible.
fn weight_vectors(len: usize, count: usize) -> Vec<BellWeights> {
    const STEP: f64 = 0.618_033_988_749_894_9;
    let mut x = 0.5;
    (0..count)
        .map(|_| {
            let raw: Vec<f64> = (0..len)
                .map(|_| {
                    x = (x + STEP) % 1.0;
                    0.02 + x
                })
                .collect();
            BellWeights::normalize(raw).expect("positive raw weights")
        })
        .collect()
}

fn example_state(dims_: &[Dim], seed: usize) -> Result<PureState> {
    let len: usize = dims_.iter().map(|d| d.get()).product();
    let amps = (0..len)
        .map(|k| {
            let t = (k + 1 + seed) as f64;
            Complex64::new((t * 0.37).sin(), (t * 0.11).cos())
        })
        .collect();
    Ok(PureState::new(dims_.to_vec(), amps, 1.0)?
        .normalized()
        .with_weight(1.0))
}

fn algebra_unitarity() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=8) {
        let mut ops: Vec<LinearOperator> =
            vec![qft_operator(dim)?, cnot_operator(dim)?, t_as_operator(dim)?];
        ops.extend((0..dim.get() as i64).map(|s| phase_z(dim, s)));
        for op in &ops {
            w.see(op.unitarity_residual());
        }
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn algebra_tensor() -> Result<(bool, String)> {
    // dyadic amplitudes multiply exactly, so equality is a layout check
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let d2 = Dim::new(2)?;
    let d3 = Dim::new(3)?;
    let a = PureState::new(vec![d2], vec![c(0.5, 0.5), c(0.5, -0.5)], 1.0)?;
    let b = PureState::new(vec![d3], vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.5)], 1.0)?;
    let z = c(0.0, 0.0);
    let h = c(0.5, 0.0);
    let e = PureState::new(vec![d2, d3], vec![h, z, h, c(0.0, -0.5), z, h], 1.0)?;
    let left = a.tensor(&b)?.tensor(&e)?;
    let right = a.tensor(&b.tensor(&e)?)?;
    let exact = left.dims() == right.dims() && left.amplitudes() == right.amplitudes();
    Ok((
        exact,
        format!("associative on {} amplitudes: {exact}", left.len()),
    ))
}

fn algebra_norm_and_trace() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=4) {
        let s = example_state(&[dim, dim, dim], dim.get())?;
        let qft = qft_operator(dim)?;
        let cx = cnot_operator(dim)?;
        w.see((s.apply_local(&qft, &[1])?.norm2() - 1.0).abs());
        w.see((s.apply_local(&cx, &[2, 0])?.norm2() - 1.0).abs());
        let rho = s.to_density();
        for keep in [&[0][..], &[1, 2], &[0, 2]] {
            w.see((rho.partial_trace(keep)?.trace() - rho.trace()).abs());
        }
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn algebra_ensemble_density() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=4) {
        let target = bell(0, 0, dim)?;
        for q in weight_vectors(dim.get(), 5) {
            let ens = bell_mixture(&q, dim)?;
            w.see((ens.fidelity(&target)? - ens.to_density().fidelity(&target)?).abs());
        }
        let mixed = WeightedEnsemble::new(vec![
            example_state(&[dim, dim], 3)?.with_weight(0.25),
            example_state(&[dim, dim], 9)?.with_weight(0.75),
        ])?;
        w.see((mixed.fidelity(&target)? - mixed.to_density().fidelity(&target)?).abs());
    }
    Ok(w.verdict(PHASE_EQ_TOL))
}

fn gates_bell_gram() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=8) {
        let d = dim.get();
        let states: Vec<PureState> = (0..d * d)
            .map(|x| bell(x / d, x % d, dim))
            .collect::<Result<_>>()?;
        for (a, sa) in states.iter().enumerate() {
            for (b, sb) in states.iter().enumerate().skip(a) {
                let want = if a == b { 1.0 } else { 0.0 };
                w.see((sa.inner(sb)? - want).norm());
            }
        }
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn gates_bell_construction() -> Result<(bool, String)> {
    let mut bad = 0;
    let mut total = 0;
    for dim in dims(2..=8) {
        let qft = qft_operator(dim)?;
        let cx = cnot_operator(dim)?;
        for k in dim.values() {
            for j in dim.values() {
                let built = PureState::basis(&[dim, dim], &[k, j])?
                    .apply_local(&qft, &[0])?
                    .apply_local(&cx, &[0, 1])?;
                total += 1;
                if !built.same_ray(&bell(k, j, dim)?) {
                    bad += 1;
                }
            }
        }
    }
    Ok((
        bad == 0,
        format!("{} of {total} labels match up to phase", total - bad),
    ))
}

fn gates_conserving_swap() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=8) {
        let (phi, psi) = conserving_states(dim)?;
        let swapped = phi.map_basis(|x| Some(vec![x[1], x[0]]))?;
        let relabeled = phi.map_basis(|x| {
            let top = dim.get() - 1;
            Some(vec![top - x[0], top - x[1]])
        })?;
        w.see((swapped.inner(&phi)?.norm_sqr() - 1.0).abs());
        w.see((relabeled.inner(&phi)?.norm_sqr() - 1.0).abs());
        w.see(phi.inner(&psi)?.norm());
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn gates_cnot_involution() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=8) {
        let cx = cnot_operator(dim)?;
        let sq = cx.pow(2)?;
        w.see(sq.max_abs_diff(&LinearOperator::identity(vec![dim, dim])?));
        if !cx.is_permutation() {
            w.see(f64::INFINITY);
        }
    }
    let (ok, detail) = w.verdict(f64::MIN_POSITIVE);
    Ok((ok, format!("CNOT^2 = I exactly: {detail}")))
}

fn bs_census() -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for dim in dims(2..=MAX_ENUM_DIM) {
        let c = enumerate_configs(dim)?;
        let fact: usize = (1..=dim.get()).product();
        let empty_ok = c.counterexamples.is_empty() == (dim.get() == 2);
        if c.count_occupied != fact || c.count_all_equal != dim.get() || !empty_ok {
            bad.push(dim.get());
        }
    }
    let d3 = Dim::new(3)?;
    let witness = ChannelConfig::new(vec![0, 2, 1], d3)?;
    let has_witness = enumerate_configs(d3)?.counterexamples.contains(&witness);
    Ok((
        bad.is_empty() && has_witness,
        format!(
            "(D!, D) for D = 2..={MAX_ENUM_DIM}, failing {bad:?}; (0,2,1) listed: {has_witness}"
        ),
    ))
}

fn bs_equal_implies_occupied() -> Result<(bool, String)> {
    let mut seen = 0usize;
    for dim in dims(2..=MAX_ENUM_DIM) {
        let d = dim.get();
        let mut values = vec![0usize; d];
        for _ in 0..d.pow(d as u32) {
            let c = ChannelConfig::new(values.clone(), dim)?;
            if c.all_equal() && !c.all_occupied() {
                return Ok((false, format!("{values:?} equal but not occupied")));
            }
            seen += 1;
            for slot in values.iter_mut().rev() {
                *slot += 1;
                if *slot < d {
                    break;
                }
                *slot = 0;
            }
        }
    }
    Ok((
        true,
        format!("implication holds on all {seen} configurations"),
    ))
}

fn bs_prop1() -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for dim in dims(2..=8) {
        let t = t_as_operator(dim)?;
        let c = cnot_operator(dim)?;
        if t.matrix() != c.matrix() || !t.is_permutation() {
            bad.push(dim.get());
        }
    }
    Ok((
        bad.is_empty(),
        format!("entrywise equal for D = 2..=8, failing {bad:?}"),
    ))
}

fn bs_postselect_idempotent() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=5) {
        let u = ModeSuperposition::uniform(dim)?;
        for rule in [PostselectRule::OccupationOnly, PostselectRule::AllEqual] {
            let once = postselect(&u, rule);
            let twice = postselect(&once, rule);
            w.see((once.weight() - twice.weight()).abs());
            if once.terms().len() != twice.terms().len() {
                w.see(f64::INFINITY);
            }
            for (c, a) in once.terms() {
                let b = twice.terms().get(c).copied().unwrap_or_default();
                w.see((a - b).norm());
            }
        }
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn bs_routing_values() -> Result<(bool, String)> {
    let mut checked = 0usize;
    for dim in dims(2..=6) {
        let u = ModeSuperposition::uniform(dim)?;
        for c in u.terms().keys() {
            if let Some(out) = c.routed() {
                let mut a = c.values().to_vec();
                let mut b = out.values().to_vec();
                a.sort_unstable();
                b.sort_unstable();
                if a != b {
                    return Ok((false, format!("values changed for {:?}", c.values())));
                }
                checked += 1;
            }
        }
    }
    Ok((
        true,
        format!("{checked} routed configurations keep their values"),
    ))
}

fn proto_oambs_oracle() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=4) {
        for f in f_grid(dim) {
            for rule in [AcceptanceRule::SumZero, AcceptanceRule::Corrected] {
                w.see((oambs_step_sim(f, dim, rule)?.f_out - oambs_fidelity(f, dim)).abs());
            }
        }
    }
    Ok(w.verdict(SIM_TOL))
}

fn proto_rule_relations() -> Result<(bool, String)> {
    let mut w = Worst::new();
    let mut literal_exact = true;
    for dim in dims(2..=4) {
        for f in f_grid(dim) {
            let sz = oambs_step_sim(f, dim, AcceptanceRule::SumZero)?;
            let co = oambs_step_sim(f, dim, AcceptanceRule::Corrected)?;
            w.see((sz.f_out - co.f_out).abs());
            w.see((co.p_success - dim.get() as f64 * sz.p_success).abs());
            for (a, b) in sz
                .weights_out
                .as_slice()
                .iter()
                .zip(co.weights_out.as_slice())
            {
                w.see((a - b).abs());
            }
            if dim.get() == 2 {
                let lit = oambs_step_sim(f, dim, AcceptanceRule::LiteralCoincidence)?;
                literal_exact &= lit.f_out == sz.f_out
                    && lit.p_success == sz.p_success
                    && lit.weights_out == sz.weights_out;
            }
        }
    }
    let (ok, detail) = w.verdict(SIM_TOL);
    Ok((
        ok && literal_exact,
        format!("{detail}; literal = sum-zero at D = 2: {literal_exact}"),
    ))
}

fn proto_crossed() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=4) {
        for f in f_grid(dim) {
            w.see(
                oambs_step_sim(f, dim, AcceptanceRule::Corrected)?
                    .crossed_weight
                    .unwrap_or(f64::NAN),
            );
        }
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn proto_bbpssw() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=5) {
        for q in weight_vectors(dim.get(), 100) {
            let sim = bbpssw_step_sim(&q, dim)?;
            let ana = bbpssw_analytic(q.as_slice())?;
            for (a, b) in sim.weights_out.as_slice().iter().zip(ana.as_slice()) {
                w.see((a - b).abs());
            }
        }
    }
    Ok(w.verdict(SIM_TOL))
}

fn proto_conserving() -> Result<(bool, String)> {
    let mut w = Worst::new();
    let mut crossed = Worst::new();
    for dim in dims(2..=CONSERVING_MAX_DIM) {
        for f in f_grid(dim) {
            let sim = conserving_step_sim(f, dim)?;
            let ana = conserving_step_analytic(f, dim)?;
            w.see((sim.f_out - conserving_fidelity(f, dim)).abs());
            for (a, b) in sim.unnormalized.iter().zip(&ana.unnormalized) {
                w.see((a - b).abs());
            }
            crossed.see(sim.crossed_weight.unwrap_or(f64::NAN));
        }
    }
    let (ok, detail) = w.verdict(SIM_TOL);
    let (ok2, detail2) = crossed.verdict(ALGEBRA_TOL);
    Ok((ok && ok2, format!("{detail}; cross branches {detail2}")))
}

fn proto_odds() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=8) {
        for f in f_grid(dim).into_iter().filter(|&f| f > 0.0 && f < 1.0) {
            let r = (1.0 - f) / f;
            let odds = |g: f64| (1.0 - g) / g;
            let b = RecursionMap::Bbpssw.apply(f, dim);
            let o = RecursionMap::Oambs.apply(f, dim);
            w.see((odds(b) - bbpssw_odds(r, dim)).abs());
            w.see((odds(o) - oambs_odds(r, dim)).abs());
        }
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn proto_conservation() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=4) {
        for f in f_grid(dim) {
            let q = BellWeights::isotropic(f, dim)?;
            let mut runs = vec![
                bbpssw_step_sim(&q, dim)?,
                conserving_step_sim(f, dim)?,
                bbpssw_step_density(&q, dim)?,
                conserving_step_density(f, dim)?,
            ];
            for rule in AcceptanceRule::ALL {
                runs.push(oambs_step_sim(f, dim, rule)?);
            }
            for r in runs {
                w.see((r.p_success + r.p_reject - 1.0).abs());
            }
        }
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn proto_degenerate() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=4) {
        let q = BellWeights::isotropic(1.0, dim)?;
        w.see((bbpssw_step_sim(&q, dim)?.f_out - 1.0).abs());
        w.see((conserving_step_sim(1.0, dim)?.f_out - 1.0).abs());
        for rule in [AcceptanceRule::SumZero, AcceptanceRule::Corrected] {
            w.see((oambs_step_sim(1.0, dim, rule)?.f_out - 1.0).abs());
        }
    }
    for dim in dims(2..=8) {
        let c = 1.0 / dim.get() as f64;
        for map in [RecursionMap::Bbpssw, RecursionMap::Oambs] {
            w.see((map.apply(c, dim) - c).abs());
        }
    }
    Ok(w.verdict(ALGEBRA_TOL))
}

fn proto_fixed_points() -> Result<(bool, String)> {
    let mut w = Worst::new();
    let mut converged = true;
    for dim in dims(2..=8) {
        for map in [RecursionMap::Bbpssw, RecursionMap::Oambs] {
            for c in fixed_points(dim) {
                w.see((map.apply(c, dim) - c).abs());
            }
            let c = 1.0 / dim.get() as f64;
            let up = iterate_map(map, c + 0.01, dim, 60)?;
            let down = iterate_map(map, c - 0.01, dim, 60)?;
            converged &= (up[up.len() - 1] - 1.0).abs() < 1e-6;
            converged &= down[down.len() - 1].abs() < 1e-6;
        }
    }
    let (ok, detail) = w.verdict(ALGEBRA_TOL);
    Ok((
        ok && converged,
        format!("{detail}; basins reached in 60 steps: {converged}"),
    ))
}

fn proto_acceleration() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for k in 1..=3u32 {
        let dim = Dim::new(1 << k)?;
        for f in f_grid(dim) {
            let (one, many) = acceleration_check(f, k)?;
            w.see((one - many).abs());
        }
    }
    let (one, many) = acceleration_check(0.5, 2)?;
    w.see((one - 27.0 / 28.0).abs());
    w.see((many - 27.0 / 28.0).abs());
    Ok(w.verdict(SIM_TOL))
}

fn proto_engines() -> Result<(bool, String)> {
    let mut w = Worst::new();
    for dim in dims(2..=4) {
        for f in f_grid(dim) {
            let q = BellWeights::isotropic(f, dim)?;
            w.see((bbpssw_step_sim(&q, dim)?.f_out - bbpssw_step_density(&q, dim)?.f_out).abs());
            w.see(
                (conserving_step_sim(f, dim)?.f_out - conserving_step_density(f, dim)?.f_out).abs(),
            );
        }
    }
    Ok(w.verdict(PHASE_EQ_TOL))
}

type CheckFn = fn() -> Result<(bool, String)>;

const SUITE: &[(&str, &str, CheckFn)] = &[
    ("algebra", "unitarity", algebra_unitarity),
    ("algebra", "tensor-associativity", algebra_tensor),
    (
        "algebra",
        "norm-and-trace-preservation",
        algebra_norm_and_trace,
    ),
    (
        "algebra",
        "ensemble-density-fidelity",
        algebra_ensemble_density,
    ),
    ("gates", "bell-orthonormal", gates_bell_gram),
    ("gates", "bell-from-qft-and-cnot", gates_bell_construction),
    ("gates", "conserving-swap-symmetry", gates_conserving_swap),
    ("gates", "cnot-involution", gates_cnot_involution),
    ("beam-splitter", "config-census", bs_census),
    (
        "beam-splitter",
        "all-equal-occupied",
        bs_equal_implies_occupied,
    ),
    ("beam-splitter", "splitter-is-cnot", bs_prop1),
    (
        "beam-splitter",
        "postselect-idempotent",
        bs_postselect_idempotent,
    ),
    ("beam-splitter", "routing-keeps-values", bs_routing_values),
    ("protocols", "oambs-oracle", proto_oambs_oracle),
    ("protocols", "rule-relations", proto_rule_relations),
    ("protocols", "crossed-cancellation", proto_crossed),
    ("protocols", "bbpssw-weights", proto_bbpssw),
    ("protocols", "conserving-recursion", proto_conserving),
    ("protocols", "odds-form", proto_odds),
    ("protocols", "probability-conservation", proto_conservation),
    ("protocols", "degenerate-inputs", proto_degenerate),
    ("protocols", "fixed-points", proto_fixed_points),
    ("protocols", "acceleration", proto_acceleration),
    ("protocols", "engine-agreement", proto_engines),
];

/// Runs every check in a fixed order. Errors raised inside a check are
/// reported as failures, never propagated.
pub fn run_suite() -> Vec<Check> {
    SUITE
        .iter()
        .map(|&(group, name, f)| {
            let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
            Check {
                group,
                name,
                passed,
                detail,
            }
        })
        .collect()
}
