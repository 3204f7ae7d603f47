"""Wrist accelerometry pipeline for post-stroke upper-limb severity.

Raw 30 Hz tri-axial recordings are trimmed to a fixed analysis horizon,
cut into 12.8 s epochs, summarized by eight features per epoch, averaged
over 15 to 120 minute windows, and used to train six binary classifiers of
paretic-limb severity evaluated by ROC/AUC.
"""

__version__ = "0.1.0"
