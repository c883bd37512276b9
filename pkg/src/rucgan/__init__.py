"""Referenceless, color-controllable semantic image synthesis.

A generator is conditioned on a segmentation mask and a per-label color
palette instead of a reference style image: palettes extracted from images
(or picked from a color bank) are broadcast into mask regions and drive
spatially varying normalization inside every generator block. Training pairs
a hue-mixing augmentation with a hinge-adversarial, perceptual, and
feature-matching objective under two-time-scale updates.
"""

from .augment import MixSelection, hue_jitter, select_labels, semantic_color_mix
from .dataio import (DatasetManifest, SampleRecord, load_image_png,
                     load_manifest, load_mask_png, one_hot, save_image_png,
                     save_mask_png)
from .errors import (CheckpointError, ConfigurationError, DimensionError,
                     LabelRangeError, ParameterError, TrainingDiverged)
from .metrics import (ConfusionMatrix, EmbeddingSet, frechet_distance,
                      lpips_adapter, pooled_color_embedding,
                      segmentation_scores, style_relevance)
from .models import (DiscriminatorConfig, Generator, GeneratorConfig,
                     MultiScaleDiscriminator, count_parameters,
                     synthesize_image)
from .netblocks import PaletteNorm, PaletteNormResBlock, batch_style_map
from .objectives import (GeneratorLossParts, IdentityBackbone, LossWeights,
                         VggFeatureBackbone, feature_matching_loss,
                         hinge_d_loss, hinge_g_loss, load_backbone,
                         perceptual_loss, total_g_loss)
from .palette import (ColorBank, PaletteVector, SegmentationMask,
                      bank_rgb_to_unit, default_color_bank, downsample_mask,
                      extract_palette, render_palette_map, semantic_sampling,
                      unit_rgb_to_bank)
from .trainer import (CHECKPOINT_MAGIC, TrainConfig, Trainer, load_checkpoint,
                      load_generator, load_train_config)

__version__ = "0.1.0"

__all__ = [
    "CHECKPOINT_MAGIC",
    "CheckpointError",
    "ColorBank",
    "ConfigurationError",
    "ConfusionMatrix",
    "DatasetManifest",
    "DimensionError",
    "DiscriminatorConfig",
    "EmbeddingSet",
    "Generator",
    "GeneratorConfig",
    "GeneratorLossParts",
    "IdentityBackbone",
    "LabelRangeError",
    "LossWeights",
    "MixSelection",
    "MultiScaleDiscriminator",
    "PaletteNorm",
    "PaletteNormResBlock",
    "PaletteVector",
    "ParameterError",
    "SampleRecord",
    "SegmentationMask",
    "TrainConfig",
    "Trainer",
    "TrainingDiverged",
    "VggFeatureBackbone",
    "bank_rgb_to_unit",
    "batch_style_map",
    "count_parameters",
    "default_color_bank",
    "downsample_mask",
    "extract_palette",
    "feature_matching_loss",
    "frechet_distance",
    "hinge_d_loss",
    "hinge_g_loss",
    "hue_jitter",
    "load_backbone",
    "load_checkpoint",
    "load_generator",
    "load_image_png",
    "load_manifest",
    "load_mask_png",
    "load_train_config",
    "lpips_adapter",
    "one_hot",
    "perceptual_loss",
    "pooled_color_embedding",
    "render_palette_map",
    "save_image_png",
    "save_mask_png",
    "segmentation_scores",
    "select_labels",
    "semantic_color_mix",
    "semantic_sampling",
    "style_relevance",
    "synthesize_image",
    "total_g_loss",
    "unit_rgb_to_bank",
]
