//! Online clustering layers with adaptive selection thresholds.
//!
//! Every neuron owns a weight vector and a scalar threshold that acts as the
//! radius of its receptive field. Within a winner-take-all group the neuron
//! closest to the input (Euclidean distance) among those whose distance lies
//! inside their threshold spikes and adapts towards the input, contracting
//! its threshold. When no neuron is eligible the closest neuron still spikes,
//! but nothing adapts and the thresholds of the group open up instead.
//!
//! Besides this unsupervised rule, recently active neurons are pulled back
//! towards the context of their last eligible win in proportion to the
//! broadcast TD error and their activation trace ([`ClusterLayer::modulate_td`]).

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::DecaySchedule;

/// Traces at or below this value are skipped by TD modulation.
pub const TRACE_CUTOFF: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterNeuron {
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub trace: f64,
    pub last_win_context: Option<Vec<f64>>,
    pub last_win_value: Option<f64>,
}

impl ClusterNeuron {
    pub fn new(weights: Vec<f64>, threshold: f64) -> Self {
        Self {
            weights,
            threshold,
            trace: 0.0,
            last_win_context: None,
            last_win_value: None,
        }
    }

    fn record_win(&mut self, context: &[f64], value: f64) {
        match &mut self.last_win_context {
            Some(ctx) => ctx.copy_from_slice(context),
            None => self.last_win_context = Some(context.to_vec()),
        }
        self.last_win_value = Some(value);
        self.trace = 1.0;
    }
}

/// Neurons sharing one winner-take-all domain over a slice of the layer input.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterGroup {
    pub neurons: Vec<ClusterNeuron>,
    pub input_slice: Range<usize>,
}

impl ClusterGroup {
    pub fn new(neurons: Vec<ClusterNeuron>, input_slice: Range<usize>) -> Result<Self> {
        if neurons.is_empty() {
            return Err(Error::config("neurons", "a group needs at least one neuron"));
        }
        let dim = input_slice.len();
        for n in &neurons {
            if n.weights.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: n.weights.len(),
                });
            }
        }
        Ok(Self {
            neurons,
            input_slice,
        })
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.neurons.iter().map(|n| n.threshold).collect()
    }
}

/// Whether `θ_open` is applied to the ineligible group only or to the whole layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpenScope {
    #[default]
    Group,
    Layer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerParams {
    pub eta: DecaySchedule,
    pub eta_th: f64,
    pub theta_open: DecaySchedule,
    pub eta_td: f64,
    pub tau_trace: f64,
    #[serde(default)]
    pub open_scope: OpenScope,
}

impl LayerParams {
    pub fn validate(&self, key: &str) -> Result<()> {
        self.eta.validate(&format!("{key}.eta"))?;
        self.theta_open.validate(&format!("{key}.theta_open"))?;
        if !(self.eta_th > 0.0 && self.eta_th <= 1.0) {
            return Err(Error::config(
                format!("{key}.eta_th"),
                format!("must lie in (0, 1], got {}", self.eta_th),
            ));
        }
        if !(self.eta_td >= 0.0 && self.eta_td.is_finite()) {
            return Err(Error::config(
                format!("{key}.eta_td"),
                format!("must be finite and >= 0, got {}", self.eta_td),
            ));
        }
        if !(self.tau_trace > 1.0 && self.tau_trace.is_finite()) {
            return Err(Error::config(
                format!("{key}.tau_trace"),
                format!("must be > 1, got {}", self.tau_trace),
            ));
        }
        Ok(())
    }
}

/// How much of the clustering plasticity a forward pass may apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plasticity {
    /// Pure evaluation, no state changes.
    Frozen,
    /// Thresholds open and eligible winners are tagged (trace and snapshot),
    /// but winners do not adapt their weights or thresholds.
    TagOnly,
    /// Full unsupervised adaptation.
    Learn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerActivation {
    pub winners: Vec<usize>,
    pub eligible_flags: Vec<bool>,
    pub one_hot: Vec<f64>,
}

impl LayerActivation {
    /// Layer-wide index of the winner of `group`.
    pub fn flat_winner(&self, offsets: &[usize], group: usize) -> usize {
        offsets[group] + self.winners[group]
    }
}

/// Euclidean distance between each neuron's weights and the group's slice of the input.
pub fn compute_values(group: &ClusterGroup, context: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(group.neurons.len());
    compute_values_into(group, context, &mut out)?;
    Ok(out)
}

fn compute_values_into(group: &ClusterGroup, context: &[f64], out: &mut Vec<f64>) -> Result<()> {
    let dim = group.input_slice.len();
    if context.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: context.len(),
        });
    }
    if let Some((d, &v)) = context.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteInput {
            dim: group.input_slice.start + d,
            value: v,
        });
    }
    out.clear();
    out.extend(group.neurons.iter().map(|n| {
        n.weights
            .iter()
            .zip(context)
            .map(|(w, x)| (w - x) * (w - x))
            .sum::<f64>()
            .sqrt()
    }));
    Ok(())
}

/// Returns the winner index and whether it was eligible (value within threshold).
/// Ties go to the lowest index.
pub fn select_winner(values: &[f64], thresholds: &[f64]) -> Result<(usize, bool)> {
    if values.is_empty() {
        return Err(Error::config("neurons", "cannot select a winner from an empty group"));
    }
    if values.len() != thresholds.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: thresholds.len(),
        });
    }
    Ok(pick_winner(values, |i| thresholds[i]))
}

fn pick_winner(values: &[f64], threshold: impl Fn(usize) -> f64) -> (usize, bool) {
    let mut best_eligible: Option<usize> = None;
    let mut best_any = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best_any] {
            best_any = i;
        }
        if v <= threshold(i) && best_eligible.is_none_or(|b| v < values[b]) {
            best_eligible = Some(i);
        }
    }
    match best_eligible {
        Some(i) => (i, true),
        None => (best_any, false),
    }
}

pub fn open_thresholds(group: &mut ClusterGroup, theta_open: f64) {
    for n in &mut group.neurons {
        n.threshold += theta_open;
    }
}

/// Moves an eligible winner towards the input and its threshold towards the
/// observed distance, then tags it (trace = 1, last-win snapshot).
pub fn adapt_winner(neuron: &mut ClusterNeuron, context: &[f64], value: f64, eta: f64, eta_th: f64) {
    neuron.threshold = (neuron.threshold + eta_th * (value - neuron.threshold)).max(0.0);
    for (w, x) in neuron.weights.iter_mut().zip(context) {
        *w += eta * (x - *w);
    }
    neuron.record_win(context, value);
}

#[derive(Clone, Debug)]
pub struct ClusterLayer {
    groups: Vec<ClusterGroup>,
    offsets: Vec<usize>,
    input_dim: usize,
    params: LayerParams,
    eta: f64,
    theta_open: f64,
    values: Vec<f64>,
}

impl ClusterLayer {
    pub fn from_groups(groups: Vec<ClusterGroup>, input_dim: usize, params: LayerParams) -> Result<Self> {
        params.validate("layer")?;
        if groups.is_empty() {
            return Err(Error::config("layer", "a layer needs at least one group"));
        }
        for g in &groups {
            if g.input_slice.end > input_dim {
                return Err(Error::DimensionMismatch {
                    expected: input_dim,
                    got: g.input_slice.end,
                });
            }
        }
        let mut offsets = Vec::with_capacity(groups.len());
        let mut total = 0;
        for g in &groups {
            offsets.push(total);
            total += g.neurons.len();
        }
        Ok(Self {
            groups,
            offsets,
            input_dim,
            eta: params.eta.initial,
            theta_open: params.theta_open.initial,
            params,
            values: Vec::new(),
        })
    }

    /// One group of `neurons` reading the whole input. Weights are drawn
    /// uniformly from [0, 1), thresholds start at zero.
    pub fn fully_connected<R: Rng + ?Sized>(
        input_dim: usize,
        neurons: usize,
        params: LayerParams,
        rng: &mut R,
    ) -> Result<Self> {
        let group = ClusterGroup::new(random_neurons(neurons, input_dim, rng), 0..input_dim)?;
        Self::from_groups(vec![group], input_dim, params)
    }

    /// One group of `neurons_per_group` neurons for every input dimension.
    pub fn per_dimension<R: Rng + ?Sized>(
        input_dim: usize,
        neurons_per_group: usize,
        params: LayerParams,
        rng: &mut R,
    ) -> Result<Self> {
        let groups = (0..input_dim)
            .map(|d| ClusterGroup::new(random_neurons(neurons_per_group, 1, rng), d..d + 1))
            .collect::<Result<Vec<_>>>()?;
        Self::from_groups(groups, input_dim, params)
    }

    pub fn groups(&self) -> &[ClusterGroup] {
        &self.groups
    }

    pub fn groups_mut(&mut self) -> &mut [ClusterGroup] {
        &mut self.groups
    }

    pub fn neurons(&self) -> impl Iterator<Item = &ClusterNeuron> {
        self.groups.iter().flat_map(|g| g.neurons.iter())
    }

    fn neurons_mut(&mut self) -> impl Iterator<Item = &mut ClusterNeuron> {
        self.groups.iter_mut().flat_map(|g| g.neurons.iter_mut())
    }

    pub fn neuron_count(&self) -> usize {
        self.groups.iter().map(|g| g.neurons.len()).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn params(&self) -> &LayerParams {
        &self.params
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn theta_open(&self) -> f64 {
        self.theta_open
    }

    /// Recomputes the scheduled rates for `episode`.
    pub fn set_episode(&mut self, episode: usize) {
        self.eta = self.params.eta.value_at(episode);
        self.theta_open = self.params.theta_open.value_at(episode);
    }

    pub fn set_all_thresholds(&mut self, threshold: f64) {
        for n in self.neurons_mut() {
            n.threshold = threshold;
        }
    }

    pub fn forward(&mut self, context: &[f64], learn: bool) -> Result<LayerActivation> {
        let mode = if learn {
            Plasticity::Learn
        } else {
            Plasticity::Frozen
        };
        self.forward_with(context, mode)
    }

    pub fn forward_with(&mut self, context: &[f64], mode: Plasticity) -> Result<LayerActivation> {
        if context.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: context.len(),
            });
        }
        let n_groups = self.groups.len();
        let mut activation = LayerActivation {
            winners: Vec::with_capacity(n_groups),
            eligible_flags: Vec::with_capacity(n_groups),
            one_hot: vec![0.0; self.neuron_count()],
        };
        let mut any_ineligible = false;
        let mut values = std::mem::take(&mut self.values);
        for (g, group) in self.groups.iter_mut().enumerate() {
            let slice = &context[group.input_slice.clone()];
            compute_values_into(group, slice, &mut values)?;
            let (winner, eligible) = select_winner_in(&values, group);
            activation.winners.push(winner);
            activation.eligible_flags.push(eligible);
            activation.one_hot[self.offsets[g] + winner] = 1.0;

            match (mode, eligible) {
                (Plasticity::Frozen, _) => {}
                (Plasticity::Learn, true) => {
                    adapt_winner(&mut group.neurons[winner], slice, values[winner], self.eta, self.params.eta_th)
                }
                (Plasticity::TagOnly, true) => group.neurons[winner].record_win(slice, values[winner]),
                (_, false) => {
                    any_ineligible = true;
                    if self.params.open_scope == OpenScope::Group {
                        open_thresholds(group, self.theta_open);
                    }
                }
            }
        }
        self.values = values;
        if any_ineligible && self.params.open_scope == OpenScope::Layer {
            let theta_open = self.theta_open;
            for g in &mut self.groups {
                open_thresholds(g, theta_open);
            }
        }
        Ok(activation)
    }

    /// Winner per group without touching any state.
    pub fn evaluate(&self, context: &[f64]) -> Result<Vec<usize>> {
        if context.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: context.len(),
            });
        }
        let mut values = Vec::new();
        self.groups
            .iter()
            .map(|g| {
                compute_values_into(g, &context[g.input_slice.clone()], &mut values)?;
                Ok(select_winner_in(&values, g).0)
            })
            .collect()
    }

    pub fn group_offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Pulls every recently tagged neuron towards its last-win snapshot,
    /// scaled by `eta_td * |delta| * trace`.
    pub fn modulate_td(&mut self, delta: f64) -> Result<()> {
        if !delta.is_finite() {
            return Err(Error::Numerical(format!("non-finite TD error {delta}")));
        }
        let base = self.params.eta_td * delta.abs();
        if base == 0.0 {
            return Ok(());
        }
        for n in self.neurons_mut() {
            if n.trace <= TRACE_CUTOFF {
                continue;
            }
            let (Some(ctx), Some(v)) = (&n.last_win_context, n.last_win_value) else {
                continue;
            };
            let rate = base * n.trace;
            n.threshold = (n.threshold + rate * (v - n.threshold)).max(0.0);
            for (w, x) in n.weights.iter_mut().zip(ctx) {
                *w += rate * (x - *w);
            }
        }
        Ok(())
    }

    pub fn decay_traces(&mut self) {
        let tau = self.params.tau_trace;
        for n in self.neurons_mut() {
            n.trace -= n.trace / tau;
        }
    }

    pub fn reset_traces(&mut self) {
        for n in self.neurons_mut() {
            n.trace = 0.0;
        }
    }

    pub fn snapshot(&self) -> LayerSnapshot {
        LayerSnapshot {
            neurons: self
                .neurons()
                .map(|n| NeuronState {
                    weights: n.weights.clone(),
                    threshold: n.threshold,
                })
                .collect(),
        }
    }
}

fn select_winner_in(values: &[f64], group: &ClusterGroup) -> (usize, bool) {
    pick_winner(values, |i| group.neurons[i].threshold)
}

fn random_neurons<R: Rng + ?Sized>(count: usize, dim: usize, rng: &mut R) -> Vec<ClusterNeuron> {
    (0..count)
        .map(|_| ClusterNeuron::new((0..dim).map(|_| rng.gen::<f64>()).collect(), 0.0))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    pub weights: Vec<f64>,
    pub threshold: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerSnapshot {
    pub neurons: Vec<NeuronState>,
}

impl LayerSnapshot {
    pub fn mean_threshold(&self) -> f64 {
        if self.neurons.is_empty() {
            return 0.0;
        }
        self.neurons.iter().map(|n| n.threshold).sum::<f64>() / self.neurons.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> LayerParams {
        LayerParams {
            eta: DecaySchedule::constant(0.01),
            eta_th: 0.01,
            theta_open: DecaySchedule::constant(0.01),
            eta_td: 0.1,
            tau_trace: 10.0,
            open_scope: OpenScope::Group,
        }
    }

    fn group(weights: &[&[f64]], thresholds: &[f64]) -> ClusterGroup {
        let dim = weights[0].len();
        let neurons = weights
            .iter()
            .zip(thresholds)
            .map(|(w, &t)| ClusterNeuron::new(w.to_vec(), t))
            .collect();
        ClusterGroup::new(neurons, 0..dim).unwrap()
    }

    #[test]
    fn values_are_euclidean() {
        let g = group(&[&[0.0, 0.0], &[3.0, 4.0], &[1.0, 1.0]], &[0.0; 3]);
        assert_eq!(compute_values(&g, &[3.0, 4.0]).unwrap(), vec![5.0, 0.0, 13f64.sqrt()]);
        assert_eq!(compute_values(&g, &[1.0, 2.0]).unwrap()[2], 1.0);
    }

    #[test]
    fn values_reject_bad_input() {
        let g = group(&[&[0.0, 0.0]], &[0.0]);
        assert!(matches!(
            compute_values(&g, &[0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(
            compute_values(&g, &[0.0, f64::NAN]),
            Err(Error::NonFiniteInput { dim: 1, .. })
        ));
    }

    #[test]
    fn winner_selection() {
        assert_eq!(select_winner(&[0.5, 0.2, 0.9], &[0.4, 0.3, 1.0]).unwrap(), (1, true));
        assert_eq!(select_winner(&[0.2, 0.3], &[0.1, 0.5]).unwrap(), (1, true));
        assert_eq!(select_winner(&[0.5, 0.6], &[0.1, 0.1]).unwrap(), (0, false));
        assert_eq!(select_winner(&[0.3, 0.3], &[1.0, 1.0]).unwrap(), (0, true));
        assert!(select_winner(&[], &[]).is_err());
    }

    #[test]
    fn thresholds_open_uniformly() {
        let mut g = group(&[&[0.0], &[1.0]], &[0.1, 0.1]);
        open_thresholds(&mut g, 0.01);
        assert_eq!(g.thresholds(), vec![0.11, 0.11]);
        let mut g = group(&[&[0.0], &[1.0]], &[0.0, 0.5]);
        open_thresholds(&mut g, 0.1);
        assert_eq!(g.thresholds(), vec![0.1, 0.6]);
    }

    #[test]
    fn zero_theta_open_rejected() {
        let mut p = params();
        p.theta_open = DecaySchedule::constant(0.0);
        assert!(matches!(p.validate("layer"), Err(Error::Config { .. })));
        let mut p = params();
        p.tau_trace = 1.0;
        assert!(p.validate("layer").is_err());
    }

    #[test]
    fn winner_adaptation() {
        let mut n = ClusterNeuron::new(vec![0.0], 0.5);
        adapt_winner(&mut n, &[1.0], 0.3, 0.01, 0.1);
        assert!((n.threshold - 0.48).abs() < 1e-15);
        assert!((n.weights[0] - 0.01).abs() < 1e-15);
        assert_eq!(n.trace, 1.0);
        assert_eq!(n.last_win_context.as_deref(), Some(&[1.0][..]));
        assert_eq!(n.last_win_value, Some(0.3));

        let mut n = ClusterNeuron::new(vec![0.3, -2.0], 0.0);
        adapt_winner(&mut n, &[0.7, 5.0], 1.0, 1.0, 0.5);
        assert_eq!(n.weights, vec![0.7, 5.0]);
    }

    fn single_neuron_layer(w: f64, threshold: f64, trace: f64) -> ClusterLayer {
        let mut n = ClusterNeuron::new(vec![w], threshold);
        n.trace = trace;
        ClusterLayer::from_groups(vec![ClusterGroup::new(vec![n], 0..1).unwrap()], 1, params()).unwrap()
    }

    #[test]
    fn trace_decay() {
        let mut layer = single_neuron_layer(0.0, 0.0, 1.0);
        layer.decay_traces();
        assert!((layer.groups()[0].neurons[0].trace - 0.9).abs() < 1e-15);
        layer.decay_traces();
        assert!((layer.groups()[0].neurons[0].trace - 0.81).abs() < 1e-15);
        let mut layer = single_neuron_layer(0.0, 0.0, 0.0);
        layer.decay_traces();
        assert_eq!(layer.groups()[0].neurons[0].trace, 0.0);
    }

    #[test]
    fn td_modulation_arithmetic() {
        let mut layer = single_neuron_layer(0.5, 0.2, 1.0);
        {
            let n = &mut layer.groups_mut()[0].neurons[0];
            n.last_win_context = Some(vec![1.0]);
            n.last_win_value = Some(0.2);
        }
        let before = layer.groups()[0].clone();
        layer.modulate_td(0.0).unwrap();
        assert_eq!(layer.groups()[0], before);

        layer.modulate_td(-1.0).unwrap();
        let n = &layer.groups()[0].neurons[0];
        assert!((n.weights[0] - 0.55).abs() < 1e-15);
        assert!((n.threshold - 0.2).abs() < 1e-15);
        assert!(layer.modulate_td(f64::NAN).is_err());
    }

    #[test]
    fn td_modulation_needs_trace() {
        let mut layer = single_neuron_layer(0.5, 0.2, 0.0);
        {
            let n = &mut layer.groups_mut()[0].neurons[0];
            n.last_win_context = Some(vec![1.0]);
            n.last_win_value = Some(0.2);
        }
        let before = layer.groups()[0].clone();
        layer.modulate_td(5.0).unwrap();
        assert_eq!(layer.groups()[0], before);
    }

    #[test]
    fn multi_hot_with_two_groups() {
        let g0 = ClusterGroup::new(
            vec![ClusterNeuron::new(vec![0.1], 1.0), ClusterNeuron::new(vec![0.9], 1.0)],
            0..1,
        )
        .unwrap();
        let g1 = ClusterGroup::new(
            vec![ClusterNeuron::new(vec![0.2], 1.0), ClusterNeuron::new(vec![0.8], 1.0)],
            1..2,
        )
        .unwrap();
        let mut layer = ClusterLayer::from_groups(vec![g0, g1], 2, params()).unwrap();
        let act = layer.forward(&[0.95, 0.1], true).unwrap();
        assert_eq!(act.winners, vec![1, 0]);
        assert_eq!(act.eligible_flags, vec![true, true]);
        assert_eq!(act.one_hot, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn evaluation_mode_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut layer = ClusterLayer::fully_connected(2, 5, params(), &mut rng).unwrap();
        let before = layer.groups().to_vec();
        for _ in 0..50 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            layer.forward(&x, false).unwrap();
        }
        assert_eq!(layer.groups(), &before[..]);
    }

    #[test]
    fn fully_connected_spikes_at_eligible_argmin() {
        let g = group(&[&[0.0], &[0.5], &[1.0]], &[1.0, 1.0, 1.0]);
        let mut layer = ClusterLayer::from_groups(vec![g], 1, params()).unwrap();
        let act = layer.forward(&[0.6], true).unwrap();
        assert_eq!(act.one_hot, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn ineligible_winner_spikes_without_adapting() {
        let g = group(&[&[0.0], &[1.0]], &[0.0, 0.0]);
        let mut layer = ClusterLayer::from_groups(vec![g], 1, params()).unwrap();
        let act = layer.forward(&[0.3], true).unwrap();
        assert_eq!(act.winners, vec![0]);
        assert_eq!(act.eligible_flags, vec![false]);
        let n = &layer.groups()[0].neurons[0];
        assert_eq!(n.weights, vec![0.0]);
        assert_eq!(n.trace, 0.0);
        assert!(n.last_win_context.is_none());
        assert_eq!(layer.groups()[0].thresholds(), vec![0.01, 0.01]);
    }

    #[test]
    fn layer_scope_opens_every_group() {
        let g0 = group(&[&[0.0]], &[0.0]);
        let mut g1 = group(&[&[0.5]], &[1.0]);
        g1.input_slice = 1..2;
        let mut p = params();
        p.open_scope = OpenScope::Layer;
        let mut layer = ClusterLayer::from_groups(vec![g0, g1], 2, p).unwrap();
        // group 0 ineligible, group 1 eligible
        layer.forward_with(&[0.9, 0.5], Plasticity::TagOnly).unwrap();
        assert!((layer.groups()[0].neurons[0].threshold - 0.01).abs() < 1e-15);
        assert!((layer.groups()[1].neurons[0].threshold - 1.01).abs() < 1e-15);
        // tag only: eligible winner tagged but not adapted
        assert_eq!(layer.groups()[1].neurons[0].trace, 1.0);
        assert_eq!(layer.groups()[1].neurons[0].threshold, 1.01);
    }

    #[test]
    fn repeated_context_contracts_geometrically() {
        let mut n = ClusterNeuron::new(vec![0.0, 0.0], 2.0);
        let x = [0.6, 0.8];
        let (eta, eta_th) = (0.1, 0.05);
        let mut prev_dist = 1.0;
        for _ in 0..20 {
            let v = n.weights.iter().zip(&x).map(|(w, x)| (w - x) * (w - x)).sum::<f64>().sqrt();
            adapt_winner(&mut n, &x, v, eta, eta_th);
            let d = n.weights.iter().zip(&x).map(|(w, x)| (w - x) * (w - x)).sum::<f64>().sqrt();
            assert!((d - (1.0 - eta) * prev_dist).abs() < 1e-12);
            prev_dist = d;
        }
    }

    #[test]
    fn starvation_opens_by_k_theta_open() {
        let g = group(&[&[0.0], &[0.1]], &[0.0, 0.0]);
        let mut layer = ClusterLayer::from_groups(vec![g], 1, params()).unwrap();
        for _ in 0..7 {
            let act = layer.forward(&[1.0], true).unwrap();
            assert!(!act.eligible_flags[0]);
        }
        for t in layer.groups()[0].thresholds() {
            assert!((t - 0.07).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn one_spike_per_group(
            seed in any::<u64>(),
            groups in 1usize..5,
            per_group in 1usize..6,
            xs in proptest::collection::vec(0.0f64..1.0, 4),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = groups;
            let mut layer = ClusterLayer::per_dimension(dim, per_group, params(), &mut rng).unwrap();
            let x: Vec<f64> = (0..dim).map(|d| xs[d % xs.len()]).collect();
            for _ in 0..3 {
                let act = layer.forward(&x, true).unwrap();
                let pop = act.one_hot.iter().filter(|&&v| v == 1.0).count();
                prop_assert_eq!(pop, groups);
                prop_assert_eq!(act.one_hot.iter().filter(|&&v| v != 0.0).count(), groups);
                for (g, &w) in act.winners.iter().enumerate() {
                    prop_assert!(w < layer.groups()[g].neurons.len());
                }
            }
        }

        #[test]
        fn thresholds_and_traces_stay_in_range(
            seed in any::<u64>(),
            ops in proptest::collection::vec((0u8..3, -50.0f64..50.0, 0.0f64..1.0), 1..200),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = params();
            p.eta_td = 0.9;
            let mut layer = ClusterLayer::fully_connected(1, 4, p, &mut rng).unwrap();
            for (op, delta, x) in ops {
                match op {
                    0 => { layer.forward(&[x], true).unwrap(); }
                    1 => layer.modulate_td(delta).unwrap(),
                    _ => layer.decay_traces(),
                }
                for n in layer.neurons() {
                    prop_assert!(n.threshold >= 0.0);
                    prop_assert!((0.0..=1.0).contains(&n.trace));
                    if let Some(ctx) = &n.last_win_context {
                        prop_assert_eq!(ctx.len(), n.weights.len());
                    }
                }
            }
        }
    }
}
