//! Backbone architecture hyperparameters.

use serde::{Deserialize, Serialize};

/// Dimensions of a contrastive vision-language encoder with a ResNet-style
/// visual tower and attention pooling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackboneConfig {
    /// Joint embedding dimension shared by text and visual features.
    pub embed_dim: usize,
    /// Square input resolution of the visual tower.
    pub image_resolution: usize,
    /// Bottleneck blocks per stage.
    pub vision_layers: [usize; 4],
    /// Stem width; stage 4 outputs `vision_width * 32` channels.
    pub vision_width: usize,
    /// Token context window.
    pub context_length: usize,
    /// Token vocabulary size (BPE base + merges + specials).
    pub vocab_size: usize,
    /// Transformer width == token embedding dimension.
    pub text_width: usize,
    pub text_heads: usize,
    pub text_layers: usize,
}

impl BackboneConfig {
    /// The reference backbone: ResNet-50 visual tower with attention
    /// pooling and a 12-layer width-512 text transformer, joint dim 1024.
    pub fn rn50() -> Self {
        Self {
            embed_dim: 1024,
            image_resolution: 224,
            vision_layers: [3, 4, 6, 3],
            vision_width: 64,
            context_length: 77,
            vocab_size: 49408,
            text_width: 512,
            text_heads: 8,
            text_layers: 12,
        }
    }

    /// A desk-scale configuration for tests and smoke runs. Same topology,
    /// tiny widths; pairs with the byte-level tokenizer (no merges).
    pub fn tiny() -> Self {
        Self {
            embed_dim: 32,
            image_resolution: 64,
            vision_layers: [1, 1, 1, 1],
            vision_width: 8,
            context_length: 77,
            vocab_size: 514,
            text_width: 16,
            text_heads: 2,
            text_layers: 2,
        }
    }

    /// Side length of the pre-pooling feature grid (stride-32 tower).
    pub fn grid_size(&self) -> usize {
        self.image_resolution / 32
    }

    /// Channels of the pre-pooling grid.
    pub fn vision_feat_dim(&self) -> usize {
        self.vision_width * 32
    }

    /// Attention-pooling heads (head dim 64, as in the reference tower).
    pub fn vision_heads(&self) -> usize {
        (self.vision_feat_dim() / 64).max(1)
    }
}

/// Per-channel input normalization published with the reference weights.
pub const IMAGE_MEAN: [f32; 3] = [0.481_454_66, 0.457_827_5, 0.408_210_73];
pub const IMAGE_STD: [f32; 3] = [0.268_629_54, 0.261_302_58, 0.275_777_11];
