"""Augmentation and evaluation toolkit for multiclass wildfire segmentation."""
from .imgcore import ASH, BACKGROUND, CLASSES, FIRE, VEGETATION, SamplePair
from .dehaze import DehazeParams, dehaze_pipeline
from .augment import AugmentConfig, FixedPlacement, RandomPlacement, build_dataset
from .evalmoo import rank_methods, roc_weights, weighted_score

__version__ = "0.1.0"
