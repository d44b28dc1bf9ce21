"""Mongolian TTS front-end toolkit.

Everything upstream of a neural acoustic model for a low-resource Mongolian
voice: script transliteration (Latin romanization -> traditional script ->
Cyrillic), a word-aligned translation pivot, automatic prosody annotation
from paired audio and text, a trainable word-level break predictor, word-to-
character length regulation, corpus ingestion/validation, and evaluation
metrics. See the ``cli`` module or the ``mntts-frontend`` command for the
batch pipeline.
"""

__version__ = "0.1.0"
