use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intra-layer neighborhood aggregator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntraAgg {
    Mean,
    Sum,
    Max,
}

/// Inter-layer aggregator: how earlier layers' embeddings of the same
/// node are combined with the fresh neighborhood aggregate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterAgg {
    None,
    Skip,
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimProfile {
    Low,
    Mid,
    High,
}

impl DimProfile {
    pub fn width(self) -> usize {
        match self {
            DimProfile::Low => 16,
            DimProfile::Mid => 64,
            DimProfile::High => 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub intra: IntraAgg,
    pub inter: InterAgg,
    pub layers: usize,
    pub perceptron_depth: usize,
    pub profile: DimProfile,
    /// Overrides the profile's bottleneck width.
    pub bottleneck_dim: Option<usize>,
    /// Output width of each layer; the last entry is the bottleneck.
    pub hidden_dims: Option<Vec<usize>>,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self::refined()
    }
}

/// Input/output width of one encoder layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerShape {
    pub intra: usize,
    pub input: usize,
    pub output: usize,
}

impl EncoderConfig {
    /// Mean intra, dense inter, low-dimensional bottleneck.
    pub fn refined() -> Self {
        Self {
            intra: IntraAgg::Mean,
            inter: InterAgg::Dense,
            layers: 3,
            perceptron_depth: 2,
            profile: DimProfile::Low,
            bottleneck_dim: None,
            hidden_dims: None,
        }
    }

    /// GCN-style baseline: mean aggregation with a skip connection and a
    /// wide output.
    pub fn gcn() -> Self {
        Self {
            intra: IntraAgg::Mean,
            inter: InterAgg::Skip,
            profile: DimProfile::High,
            ..Self::refined()
        }
    }

    /// GraphSAGE-style baseline: max aggregation with a skip connection.
    pub fn sage() -> Self {
        Self {
            intra: IntraAgg::Max,
            inter: InterAgg::Skip,
            profile: DimProfile::High,
            ..Self::refined()
        }
    }

    pub fn bottleneck(&self) -> usize {
        self.bottleneck_dim.unwrap_or_else(|| self.profile.width())
    }

    /// Output width per layer. Layers share the bottleneck width, except
    /// without inter-layer aggregation, where widths halve layer by layer
    /// down to the bottleneck so every layer still narrows its input.
    pub fn output_widths(&self) -> Vec<usize> {
        if let Some(h) = &self.hidden_dims {
            return h.clone();
        }
        let b = self.bottleneck();
        (1..=self.layers)
            .map(|k| match self.inter {
                InterAgg::None => b << (self.layers - k),
                _ => b,
            })
            .collect()
    }

    /// Per-layer widths for `feature_dim` input features. History for the
    /// inter-layer stage is `[x, h1, ..., h(k-1)]`.
    pub fn layer_shapes(&self, feature_dim: usize) -> Result<Vec<LayerShape>> {
        self.check_basic()?;
        let outs = self.output_widths();
        let mut history = vec![feature_dim];
        let mut shapes = Vec::with_capacity(self.layers);
        for (k, &output) in outs.iter().enumerate() {
            let intra = *history.last().unwrap();
            let input = match self.inter {
                InterAgg::None => intra,
                InterAgg::Skip => intra + intra,
                InterAgg::Dense => intra + history.iter().sum::<usize>(),
            };
            if output >= input {
                return Err(Error::Encoder(format!(
                    "layer {} bottleneck width {output} must be below its input width {input}",
                    k + 1
                )));
            }
            shapes.push(LayerShape { intra, input, output });
            history.push(output);
        }
        Ok(shapes)
    }

    fn check_basic(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::Encoder("layers must be at least 1".into()));
        }
        if self.perceptron_depth == 0 {
            return Err(Error::Encoder("perceptron_depth must be at least 1".into()));
        }
        if self.bottleneck() == 0 {
            return Err(Error::Encoder("bottleneck_dim must be positive".into()));
        }
        if let Some(h) = &self.hidden_dims {
            if h.len() != self.layers {
                return Err(Error::Encoder(format!(
                    "hidden_dims has {} entries for {} layers",
                    h.len(),
                    self.layers
                )));
            }
            if h.contains(&0) {
                return Err(Error::Encoder("hidden_dims must be positive".into()));
            }
            if h.last() != Some(&self.bottleneck()) {
                return Err(Error::Encoder(
                    "last hidden dim must equal the bottleneck width".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn validate(&self, feature_dim: usize) -> Result<()> {
        self.layer_shapes(feature_dim).map(|_| ())
    }

    /// Short tag such as `mean-dense-low`.
    pub fn tag(&self) -> String {
        format!(
            "{}-{}-{}",
            self.intra.as_str(),
            self.inter.as_str(),
            self.profile.as_str()
        )
    }
}

impl IntraAgg {
    pub fn as_str(self) -> &'static str {
        match self {
            IntraAgg::Mean => "mean",
            IntraAgg::Sum => "sum",
            IntraAgg::Max => "max",
        }
    }
}

impl InterAgg {
    pub fn as_str(self) -> &'static str {
        match self {
            InterAgg::None => "none",
            InterAgg::Skip => "skip",
            InterAgg::Dense => "dense",
        }
    }
}

impl DimProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            DimProfile::Low => "low",
            DimProfile::Mid => "mid",
            DimProfile::High => "high",
        }
    }
}
