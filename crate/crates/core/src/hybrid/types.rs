use crate::kinetics::KineticScheme;

use super::HybridError;

/// State index of every channel, ordered by site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelConfig {
    states: Vec<usize>,
}

impl ChannelConfig {
    pub fn new(scheme: &KineticScheme, states: Vec<usize>) -> Result<Self, HybridError> {
        if let Some(&s) = states.iter().find(|&&s| s >= scheme.n_states()) {
            return Err(HybridError::InvalidState {
                state: s,
                n_states: scheme.n_states(),
            });
        }
        Ok(Self { states })
    }

    /// Every channel in the same state.
    pub fn uniform(
        scheme: &KineticScheme,
        channels: usize,
        state: usize,
    ) -> Result<Self, HybridError> {
        Self::new(scheme, vec![state; channels])
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Class label of every channel.
    pub fn aggregate(&self, scheme: &KineticScheme) -> AggregatedConfig {
        AggregatedConfig {
            labels: self.states.iter().map(|&s| scheme.class_of(s)).collect(),
        }
    }
}

/// Class label of every channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregatedConfig {
    labels: Vec<usize>,
}

impl AggregatedConfig {
    pub fn new(scheme: &KineticScheme, labels: Vec<usize>) -> Result<Self, HybridError> {
        if let Some(&j) = labels.iter().find(|&&j| j >= scheme.n_classes()) {
            return Err(HybridError::InvalidState {
                state: j,
                n_states: scheme.n_classes(),
            });
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// One channel transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: usize,
    pub from: usize,
    pub to: usize,
}
