"""Ontology-driven audio clip curation and label-noise tools."""

from clipcurate._core import (
    CurationError,
    Labeler,
    Manifest,
    ManifestError,
    Ontology,
    OntologyError,
    Split,
    TextPipeline,
    __version__,
    confidence_half_width,
    encode_wav,
    inject_noise,
    mix_substitution,
    noise_breakdown,
    noise_breakdown_counts,
    selection_count,
    tokenise,
    verify_audio,
)

__all__ = [
    "CurationError",
    "Labeler",
    "Manifest",
    "ManifestError",
    "Ontology",
    "OntologyError",
    "Split",
    "TextPipeline",
    "__version__",
    "confidence_half_width",
    "encode_wav",
    "inject_noise",
    "mix_substitution",
    "noise_breakdown",
    "noise_breakdown_counts",
    "selection_count",
    "tokenise",
    "verify_audio",
]
