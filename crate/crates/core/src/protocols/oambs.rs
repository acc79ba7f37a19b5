//! Single-step distillation with one generalized beam splitter per party.
//!
//! `D` pairs `rho^(D)` are fed, pair `d` into input channel `d` of Alice's
//! and Bob's beam splitters. Each party post-selects on all `D` values being
//! equal, then measures output channels `1..D` in the rotated basis
//! `U_F^{-1}|m>` and the two compare results; output channel 0 keeps the
//! distilled pair.
//!
//! Register order inside the simulation is `a0 b0 a1 b1 ... a_{D-1} b_{D-1}`,
//! indexed by input channel before routing and by output channel after it.

use num_complex::Complex64;

use super::maps::oambs_success;
use super::{family_weights, shift_masses, AcceptanceRule, EngineKind, StepOutcome};
use crate::algebra::{Dim, PureState, WeightedEnsemble};
use crate::beam_splitter::{ChannelConfig, PostselectRule};
use crate::error::{domain, resource, Result};
use crate::gates::{bell, phase_z, qft_operator, BellWeights};

/// Largest `D` for the full `D^{2D}`-amplitude enumeration.
pub const OAMBS_FULL_MAX_DIM: usize = 4;
/// Largest `D` for the grouped enumeration.
pub const OAMBS_GROUPED_MAX_DIM: usize = 7;

/// Isotropic input `q = (F, (1-F)/(D-1), ...)`, engine chosen by `D`.
pub fn oambs_step_sim(f: f64, dim: Dim, rule: AcceptanceRule) -> Result<StepOutcome> {
    let q = BellWeights::isotropic(f, dim)?;
    oambs_step(&q, dim, rule)
}

/// Full enumeration up to `D = 4`, grouped enumeration up to `D = 7`.
pub fn oambs_step(q: &BellWeights, dim: Dim, rule: AcceptanceRule) -> Result<StepOutcome> {
    match dim.get() {
        d if d <= OAMBS_FULL_MAX_DIM => oambs_step_full(q, dim, rule),
        d if d <= OAMBS_GROUPED_MAX_DIM => oambs_step_grouped(q, dim, rule),
        d => resource(format!(
            "beam-splitter enumeration limited to D <= {OAMBS_GROUPED_MAX_DIM}, got {d}"
        )),
    }
}

fn check(q: &BellWeights, dim: Dim, max: usize) -> Result<()> {
    if dim.get() > max {
        return resource(format!(
            "this beam-splitter engine is limited to D <= {max}, got {dim}"
        ));
    }
    if q.len() > dim.get() {
        return domain(format!("{} weights exceed D = {dim}", q.len()));
    }
    Ok(())
}

/// Every label vector in `Z_m^n`, last entry fastest.
fn label_vectors(m: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = m.pow(n as u32);
    let mut cur = vec![0usize; n];
    (0..total).map(move |_| {
        let out = cur.clone();
        for slot in cur.iter_mut().rev() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
        out
    })
}

fn party(x: &[usize], offset: usize) -> Vec<usize> {
    x.iter().skip(offset).step_by(2).copied().collect()
}

/// Rule decision for outcomes `m` (Alice) and `n` (Bob): `Some(s)` accepts
/// and asks for `phase_z(s)` on Alice's surviving qudit.
fn decide(rule: AcceptanceRule, dim: Dim, m: &[usize], n: &[usize]) -> Option<usize> {
    let s = m.iter().chain(n).sum::<usize>() % dim.get();
    match rule {
        AcceptanceRule::SumZero => (s == 0).then_some(0),
        AcceptanceRule::Corrected => Some(s),
        AcceptanceRule::LiteralCoincidence => (m == n).then_some(0),
    }
}

/// Neumaier summation; the grouped engine adds up to `7^7` small terms.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Default)]
struct Tally {
    accepted: Vec<PureState>,
    p_success: f64,
    p_reject: f64,
    crossed: f64,
}

impl Tally {
    fn accept(&mut self, state: PureState, phase: usize, dim: Dim) -> Result<()> {
        let state = if phase == 0 {
            state
        } else {
            state.apply_local(&phase_z(dim, phase as i64), &[0])?
        };
        self.p_success += state.weight();
        self.accepted.push(state);
        Ok(())
    }

    fn finish(
        self,
        q: &BellWeights,
        dim: Dim,
        rule: AcceptanceRule,
        engine: EngineKind,
    ) -> Result<StepOutcome> {
        if self.accepted.is_empty() {
            return domain("no outcome was accepted");
        }
        let ens = WeightedEnsemble::new(self.accepted)?;
        let masses = shift_masses(&ens, q.len(), dim)?;
        let f_out = ens.fidelity(&bell(0, 0, dim)?)? / self.p_success;
        Ok(StepOutcome {
            f_in: q.fidelity(),
            f_out,
            p_success: self.p_success,
            p_reject: self.p_reject,
            weights_out: family_weights(&masses, self.p_success)?,
            unnormalized: masses,
            crossed_weight: Some(self.crossed),
            rule: Some(rule),
            engine,
        })
    }
}

/// Builds every branch of `rho^(D)` as a `D^{2D}` state vector and carries it
/// through post-selection, routing, rotation and measurement.
pub fn oambs_step_full(q: &BellWeights, dim: Dim, rule: AcceptanceRule) -> Result<StepOutcome> {
    check(q, dim, OAMBS_FULL_MAX_DIM)?;
    let d = dim.get();
    let pairs: Vec<PureState> = (0..q.len())
        .map(|i| bell(0, i, dim))
        .collect::<Result<_>>()?;
    let qft = qft_operator(dim)?;
    let measured: Vec<usize> = (2..2 * d).collect();
    let emc = PostselectRule::AllEqual;

    let mut tally = Tally::default();
    for labels in label_vectors(q.len(), d) {
        let w: f64 = labels.iter().map(|&i| q.as_slice()[i]).product();
        if w == 0.0 {
            continue;
        }
        let mut branch = pairs[labels[0]].clone();
        for &i in &labels[1..] {
            branch = branch.tensor(&pairs[i])?;
        }
        let branch = branch.with_weight(w);

        let kept = branch.postselect(|x| {
            emc.accepts_values(dim, &party(x, 0)) && emc.accepts_values(dim, &party(x, 1))
        });
        tally.p_reject += w - kept.weight();
        if labels.windows(2).any(|p| p[0] != p[1]) {
            tally.crossed += kept.weight();
        }
        if kept.weight() == 0.0 {
            continue;
        }

        let routed = kept.map_basis(|x| {
            let a = ChannelConfig::new(party(x, 0), dim).ok()?.routed()?;
            let b = ChannelConfig::new(party(x, 1), dim).ok()?.routed()?;
            Some(
                a.values()
                    .iter()
                    .zip(b.values())
                    .flat_map(|(&u, &v)| [u, v])
                    .collect(),
            )
        })?;

        let mut rotated = routed;
        for &f in &measured {
            rotated = rotated.apply_local(&qft, &[f])?;
        }
        for b in rotated.measure(&measured)? {
            let (m, n) = (party(&b.outcome, 0), party(&b.outcome, 1));
            match decide(rule, dim, &m, &n) {
                Some(phase) => tally.accept(b.state, phase, dim)?,
                None => tally.p_reject += b.state.weight(),
            }
        }
    }
    tally.finish(q, dim, rule, EngineKind::Enumeration)
}

/// Residue counts of digit sums: `out[r] = #{x in Z_D^len : (scale * sum x) = r mod D}`.
fn residue_counts(dim: Dim, len: usize, scale: usize) -> Vec<f64> {
    let d = dim.get();
    let mut counts = vec![0.0; d];
    counts[0] = 1.0;
    for _ in 0..len {
        let mut next = vec![0.0; d];
        for (r, &c) in counts.iter().enumerate() {
            for x in 0..d {
                next[(r + scale * x) % d] += c;
            }
        }
        counts = next;
    }
    counts
}

/// One outcome class: a representative outcome, the number of outcomes it
/// stands for, and the rule's verdict on them.
struct OutcomeClass {
    m: Vec<usize>,
    n: Vec<usize>,
    count: f64,
}

fn outcome_classes(rule: AcceptanceRule, dim: Dim) -> Vec<OutcomeClass> {
    let d = dim.get();
    let k = d - 1;
    let rep = |lead: usize| {
        let mut v = vec![0; k];
        v[0] = lead;
        v
    };
    match rule {
        // every outcome tuple with the same sum s leaves the same state
        AcceptanceRule::SumZero | AcceptanceRule::Corrected => residue_counts(dim, 2 * k, 1)
            .into_iter()
            .enumerate()
            .map(|(s, count)| OutcomeClass {
                m: rep(s),
                n: vec![0; k],
                count,
            })
            .collect(),
        AcceptanceRule::LiteralCoincidence => {
            let mut classes: Vec<OutcomeClass> = residue_counts(dim, k, 1)
                .into_iter()
                .enumerate()
                .map(|(t, count)| OutcomeClass {
                    m: rep(t),
                    n: rep(t),
                    count,
                })
                .collect();
            let coincident: f64 = classes.iter().map(|c| c.count).sum();
            let all = (d as f64).powi(2 * k as i32);
            classes.push(OutcomeClass {
                m: rep(1),
                n: vec![0; k],
                count: all - coincident,
            });
            classes
        }
    }
}

/// Exploits the structure of `rho^(D)`: post-selection is evaluated on
/// Alice's `D` constant configurations only, and rotated-basis outcomes are
/// grouped into classes that leave the same channel-0 state.
pub fn oambs_step_grouped(q: &BellWeights, dim: Dim, rule: AcceptanceRule) -> Result<StepOutcome> {
    check(q, dim, OAMBS_GROUPED_MAX_DIM)?;
    let d = dim.get();
    let u = qft_operator(dim)?.matrix().clone();
    let emc = PostselectRule::AllEqual;
    // every basis term of a product of D Bell pairs has |amplitude|^2 = D^-D
    let term_mass = (d as f64).powi(-(d as i32));

    let mut tally = Tally::default();
    let mut rejected = CompensatedSum::default();
    let mut survivors: Vec<(usize, f64)> = Vec::new();
    for labels in label_vectors(q.len(), d) {
        let w: f64 = labels.iter().map(|&i| q.as_slice()[i]).product();
        if w == 0.0 {
            continue;
        }
        // Alice's value y in every channel pairs with Bob's y - i_d
        let hits = dim
            .values()
            .filter(|&y| {
                let bob: Vec<usize> = labels.iter().map(|&i| dim.sub(y, i)).collect();
                emc.accepts_values(dim, &vec![y; d]) && emc.accepts_values(dim, &bob)
            })
            .count();
        let survival = hits as f64 * term_mass;
        rejected.add(w * (1.0 - survival));
        if labels.windows(2).any(|p| p[0] != p[1]) {
            tally.crossed += w * survival;
        } else if survival > 0.0 {
            survivors.push((labels[0], w * survival));
        }
    }

    tally.p_reject = rejected.total();

    let classes = outcome_classes(rule, dim);
    let amp = 1.0 / (d as f64).sqrt();
    for (i, weight) in survivors {
        for class in &classes {
            let mut phi = vec![Complex64::new(0.0, 0.0); d * d];
            for y in dim.values() {
                let a = ChannelConfig::constant(y, dim)?
                    .routed()
                    .expect("constant configurations occupy every channel");
                let b = ChannelConfig::constant(dim.sub(y, i), dim)?
                    .routed()
                    .expect("constant configurations occupy every channel");
                let mut z = Complex64::new(amp, 0.0);
                for c in 1..d {
                    z *= u[(class.m[c - 1], a.values()[c])] * u[(class.n[c - 1], b.values()[c])];
                }
                phi[a.values()[0] * d + b.values()[0]] += z;
            }
            let state = PureState::new(vec![dim, dim], phi, 1.0)?.normalized();
            let mass = weight * class.count * state.weight();
            match decide(rule, dim, &class.m, &class.n) {
                Some(phase) if mass > 0.0 => tally.accept(state.with_weight(mass), phase, dim)?,
                Some(_) => {}
                None => tally.p_reject += mass,
            }
        }
    }
    tally.finish(q, dim, rule, EngineKind::Grouped)
}

/// Closed-form step: `q'_i = q_i^D / sum_j q_j^D`.
pub fn oambs_step_analytic(q: &BellWeights, dim: Dim, rule: AcceptanceRule) -> Result<StepOutcome> {
    if q.len() > dim.get() {
        return domain(format!("{} weights exceed D = {dim}", q.len()));
    }
    let p = dim.get() as i32;
    let powered: Vec<f64> = q.as_slice().iter().map(|x| x.powi(p)).collect();
    let weights_out = BellWeights::normalize(powered)?;
    let p_success = oambs_success(q, dim, rule);
    let mut f_out = weights_out.fidelity();
    if rule == AcceptanceRule::LiteralCoincidence {
        let d = dim.get();
        f_out /= if d % 2 == 0 { d / 2 } else { d } as f64;
    }
    Ok(StepOutcome {
        f_in: q.fidelity(),
        f_out,
        p_success,
        p_reject: 1.0 - p_success,
        unnormalized: weights_out
            .as_slice()
            .iter()
            .map(|x| x * p_success)
            .collect(),
        weights_out,
        crossed_weight: Some(0.0),
        rule: Some(rule),
        engine: EngineKind::Analytic,
    })
}
