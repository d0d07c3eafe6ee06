"""Dermoscopy lesion segmentation, ABCD-style feature extraction and
two-stage melanoma risk classification."""

__version__ = "0.1.0"
