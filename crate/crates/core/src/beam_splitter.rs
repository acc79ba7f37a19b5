//! Mode-routing model of the generalized (orbital angular momentum) beam
//! splitter `T_D`.
//!
//! A photon carrying qudit value `l` that enters input channel `i` leaves on
//! output channel `l - i mod D` with its value unchanged. One distinguishable
//! photon enters each of the `D` input channels, so a multi-photon input is a
//! [`ChannelConfig`] and a coherent input is a [`ModeSuperposition`] over them.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{Dim, LinearOperator, ModIndex};
use crate::error::{domain, resource, Result};

/// Largest `D` for which [`enumerate_configs`] walks all `D^D` inputs.
pub const MAX_ENUM_DIM: usize = 7;

/// Output channel of a photon with value `l` entering channel `i`.
pub fn route(l: usize, i: usize, dim: Dim) -> Result<ModIndex> {
    let (l, i) = (dim.index(l)?, dim.index(i)?);
    dim.index(dim.sub(l.get(), i.get()))
}

/// The beam splitter as an operator on `value ⊗ channel`:
/// `|l>|i> -> |l>|l - i>`.
pub fn t_as_operator(dim: Dim) -> Result<LinearOperator> {
    LinearOperator::permutation(vec![dim, dim], |v| {
        let (l, i) = (v[0], v[1]);
        vec![l, dim.sub(l, i)]
    })
}

/// Qudit values carried by the photons in input channels `0..D`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelConfig {
    dim: Dim,
    values: Vec<usize>,
}

impl ChannelConfig {
    pub fn new(values: Vec<usize>, dim: Dim) -> Result<Self> {
        if values.len() != dim.get() {
            return domain(format!(
                "channel config needs {} values, got {}",
                dim,
                values.len()
            ));
        }
        if let Some(v) = values.iter().find(|&&v| v >= dim.get()) {
            return domain(format!("value {v} out of range for D = {dim}"));
        }
        Ok(ChannelConfig { dim, values })
    }

    /// Every value `l` in every channel.
    pub fn constant(l: usize, dim: Dim) -> Result<Self> {
        Self::new(vec![l; dim.get()], dim)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// `out[d]` is the output channel of the photon entering channel `d`.
    pub fn output_channels(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .map(|(d, &y)| self.dim.sub(y, d))
            .collect()
    }

    /// True iff every output channel receives exactly one photon.
    pub fn all_occupied(&self) -> bool {
        let mut seen = vec![false; self.dim.get()];
        for c in self.output_channels() {
            if std::mem::replace(&mut seen[c], true) {
                return false;
            }
        }
        true
    }

    pub fn all_equal(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// Values indexed by output channel after passing the beam splitter, or
    /// `None` when two photons share an output channel.
    pub fn routed(&self) -> Option<ChannelConfig> {
        let mut out = vec![usize::MAX; self.dim.get()];
        for (c, &y) in self.output_channels().into_iter().zip(&self.values) {
            if out[c] != usize::MAX {
                return None;
            }
            out[c] = y;
        }
        Some(ChannelConfig {
            dim: self.dim,
            values: out,
        })
    }
}

/// Post-selection applied to beam-splitter configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PostselectRule {
    /// Keep configurations with every output channel occupied. This is the
    /// naive qudit extension of the qubit four-mode condition; it lets
    /// unequal inputs through for `D >= 3`.
    OccupationOnly,
    /// Keep configurations in which all `2D` mode states are equal: the
    /// projector onto `span{|l>^D}`.
    AllEqual,
}

impl PostselectRule {
    pub fn accepts(self, c: &ChannelConfig) -> bool {
        match self {
            PostselectRule::OccupationOnly => c.all_occupied(),
            PostselectRule::AllEqual => c.all_equal() && c.all_occupied(),
        }
    }

    /// Same predicate on raw digit strings of one party's `D` values.
    pub(crate) fn accepts_values(self, dim: Dim, values: &[usize]) -> bool {
        match self {
            PostselectRule::AllEqual => values.windows(2).all(|w| w[0] == w[1]),
            PostselectRule::OccupationOnly => {
                let mut seen = vec![false; dim.get()];
                values
                    .iter()
                    .enumerate()
                    .all(|(d, &y)| !std::mem::replace(&mut seen[dim.sub(y, d)], true))
            }
        }
    }
}

/// Coherent superposition of channel configurations, with a branch weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSuperposition {
    dim: Dim,
    terms: BTreeMap<ChannelConfig, Complex64>,
    weight: f64,
}

impl ModeSuperposition {
    /// Builds a normalized superposition (amplitudes are rescaled).
    pub fn new<I>(dim: Dim, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ChannelConfig, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (c, a) in terms {
            if c.dim != dim {
                return domain("channel config with a different dimension");
            }
            *map.entry(c).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        let n2: f64 = map.values().map(|a| a.norm_sqr()).sum();
        if n2 == 0.0 {
            return domain("mode superposition has zero norm");
        }
        let inv = 1.0 / n2.sqrt();
        for a in map.values_mut() {
            *a *= inv;
        }
        Ok(ModeSuperposition {
            dim,
            terms: map,
            weight: 1.0,
        })
    }

    /// Equal-amplitude superposition over every one of the `D^D` configurations.
    pub fn uniform(dim: Dim) -> Result<Self> {
        let configs = all_configs(dim)?;
        Self::new(
            dim,
            configs.into_iter().map(|c| (c, Complex64::new(1.0, 0.0))),
        )
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn terms(&self) -> &BTreeMap<ChannelConfig, Complex64> {
        &self.terms
    }

    pub fn norm2(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }
}

/// Drops every term failing `rule`. The returned weight is the input weight
/// times the surviving squared norm; surviving amplitudes are renormalized.
pub fn postselect(s: &ModeSuperposition, rule: PostselectRule) -> ModeSuperposition {
    let kept: BTreeMap<_, _> = s
        .terms
        .iter()
        .filter(|(c, a)| rule.accepts(c) && a.norm_sqr() > 0.0)
        .map(|(c, a)| (c.clone(), *a))
        .collect();
    let survived: f64 = kept.values().map(|a| a.norm_sqr()).sum();
    let total = s.norm2();
    if survived == 0.0 || total == 0.0 {
        return ModeSuperposition {
            dim: s.dim,
            terms: BTreeMap::new(),
            weight: 0.0,
        };
    }
    let inv = 1.0 / survived.sqrt();
    ModeSuperposition {
        dim: s.dim,
        terms: kept.into_iter().map(|(c, a)| (c, a * inv)).collect(),
        weight: s.weight * survived / total,
    }
}

/// Outcome of walking all `D^D` input configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigCensus {
    pub count_occupied: usize,
    pub count_all_equal: usize,
    /// Occupation-complete configurations with unequal values, in
    /// lexicographic order.
    pub counterexamples: Vec<ChannelConfig>,
}

fn all_configs(dim: Dim) -> Result<Vec<ChannelConfig>> {
    let d = dim.get();
    if d > MAX_ENUM_DIM {
        return resource(format!(
            "enumerating {d}^{d} configurations exceeds the guard D <= {MAX_ENUM_DIM}"
        ));
    }
    let total = d.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    let mut values = vec![0usize; d];
    for _ in 0..total {
        out.push(ChannelConfig {
            dim,
            values: values.clone(),
        });
        // odometer, last channel fastest
        for slot in values.iter_mut().rev() {
            *slot += 1;
            if *slot < d {
                break;
            }
            *slot = 0;
        }
    }
    Ok(out)
}

/// Counts occupation-complete and all-equal inputs over every configuration.
pub fn enumerate_configs(dim: Dim) -> Result<ConfigCensus> {
    let mut census = ConfigCensus {
        count_occupied: 0,
        count_all_equal: 0,
        counterexamples: Vec::new(),
    };
    for c in all_configs(dim)? {
        let occ = c.all_occupied();
        let eq = c.all_equal();
        census.count_occupied += occ as usize;
        census.count_all_equal += eq as usize;
        if occ && !eq {
            census.counterexamples.push(c);
        }
    }
    Ok(census)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::cnot_operator;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    fn cfg(v: &[usize]) -> ChannelConfig {
        ChannelConfig::new(v.to_vec(), d(v.len())).unwrap()
    }

    #[test]
    fn route_examples() {
        assert_eq!(route(0, 0, d(3)).unwrap().get(), 0);
        assert_eq!(route(2, 1, d(3)).unwrap().get(), 1);
        assert_eq!(route(2, 0, d(3)).unwrap().get(), 2);
        assert!(route(3, 0, d(3)).is_err());
    }

    #[test]
    fn operator_matches_cnot() {
        for n in 2..=8 {
            let t = t_as_operator(d(n)).unwrap();
            assert_eq!(t, cnot_operator(d(n)).unwrap());
        }
    }

    #[test]
    fn qubit_operator_is_pbs_permutation() {
        // basis |value, channel>: V=0, H=1; V stays in its channel, H swaps
        let t = t_as_operator(d(2)).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let expected = [(0, 0), (1, 1), (3, 2), (2, 3)];
        for (row, col) in expected {
            assert_eq!(t.matrix()[(row, col)], one);
        }
        assert!(t.is_permutation());
    }

    #[test]
    fn predicate_examples() {
        let c = cfg(&[0, 2, 1]);
        assert_eq!(c.output_channels(), vec![0, 1, 2]);
        assert!(c.all_occupied() && !c.all_equal());

        let c = cfg(&[1, 1, 1]);
        assert_eq!(c.output_channels(), vec![1, 0, 2]);
        assert!(c.all_occupied() && c.all_equal());

        let c = cfg(&[0, 1]);
        assert_eq!(c.output_channels(), vec![0, 0]);
        assert!(!c.all_occupied());
        assert!(c.routed().is_none());
    }

    #[test]
    fn config_validation() {
        assert!(ChannelConfig::new(vec![0, 1], d(3)).is_err());
        assert!(ChannelConfig::new(vec![0, 3, 1], d(3)).is_err());
    }

    #[test]
    fn routing_preserves_values() {
        let c = cfg(&[0, 2, 1]);
        let r = c.routed().unwrap();
        // photon with value 2 in channel 1 stays in channel 1; value 1 in
        // channel 2 goes to 1 - 2 = 2
        assert_eq!(r.values(), &[0, 2, 1]);
        let c = cfg(&[2, 2, 2]);
        assert_eq!(c.routed().unwrap().values(), &[2, 2, 2]);
    }

    #[test]
    fn postselect_examples() {
        let u = ModeSuperposition::uniform(d(2)).unwrap();
        let s = postselect(&u, PostselectRule::AllEqual);
        assert!((s.weight() - 0.5).abs() < 1e-15);
        let kept: Vec<_> = s.terms().keys().map(|c| c.values().to_vec()).collect();
        assert_eq!(kept, vec![vec![0, 0], vec![1, 1]]);

        let one = Complex64::new(1.0, 0.0);
        let single = ModeSuperposition::new(d(3), [(cfg(&[0, 2, 1]), one)]).unwrap();
        assert_eq!(
            postselect(&single, PostselectRule::OccupationOnly).weight(),
            1.0
        );
        let gone = postselect(&single, PostselectRule::AllEqual);
        assert_eq!(gone.weight(), 0.0);
        assert!(gone.terms().is_empty());
    }

    #[test]
    fn census_examples() {
        let c2 = enumerate_configs(d(2)).unwrap();
        assert_eq!((c2.count_occupied, c2.count_all_equal), (2, 2));
        assert!(c2.counterexamples.is_empty());

        let c3 = enumerate_configs(d(3)).unwrap();
        assert_eq!((c3.count_occupied, c3.count_all_equal), (6, 3));
        assert!(c3.counterexamples.contains(&cfg(&[0, 2, 1])));

        let c4 = enumerate_configs(d(4)).unwrap();
        assert_eq!((c4.count_occupied, c4.count_all_equal), (24, 4));
        assert_eq!(c4.counterexamples.len(), 20);

        assert!(matches!(
            enumerate_configs(d(8)),
            Err(crate::Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn raw_predicate_agrees() {
        for n in 2..=4 {
            for c in all_configs(d(n)).unwrap() {
                for rule in [PostselectRule::AllEqual, PostselectRule::OccupationOnly] {
                    assert_eq!(rule.accepts(&c), rule.accepts_values(d(n), c.values()));
                }
            }
        }
    }
}
