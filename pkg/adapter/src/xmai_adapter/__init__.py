"""Model adapter for the xmai augmentation pipeline.

Serves mask-fill, text/image embedding, and part-of-speech requests over
the newline-delimited JSON protocol that xmai's remote providers speak,
and exports detection / image-embedding files for offline runs.  Ships
deterministic toy backends for development and testing; real pretrained
checkpoints are loaded lazily when configured.
"""

from .config import AdapterConfig

__all__ = ["AdapterConfig"]
__version__ = "0.1.0"
