"""Speech emotion recognition toolkit.

End-to-end pipeline: WAV decoding and conditioning, frame-level acoustic
descriptors, utterance-level statistical functionals, a small neural
network engine with manual backpropagation, a model zoo, and a training
and evaluation harness with a command-line front end.
"""

__version__ = "0.1.0"

from .audio import (
    AudioClip,
    CLIP_SAMPLES,
    CLIP_SECONDS,
    ConditionedClip,
    PIPELINE_RATE,
    condition,
    condition_wav,
    decode_wav,
    encode_wav,
    resample,
)
from .errors import SerkitError
from .functionals import (
    FUNCTIONAL_NAMES,
    FeatureVector,
    FunctionalSet,
    apply_functionals,
    builtin_sets,
    export_feature_csv,
    get_builtin_set,
    import_feature_csv,
)
from .lld import FEATURE_NAMES, LldMatrix, extract_llds

__all__ = [
    "AudioClip", "ConditionedClip", "SerkitError",
    "CLIP_SAMPLES", "CLIP_SECONDS", "PIPELINE_RATE",
    "condition", "condition_wav", "decode_wav", "encode_wav", "resample",
    "FEATURE_NAMES", "LldMatrix", "extract_llds",
    "FUNCTIONAL_NAMES", "FeatureVector", "FunctionalSet",
    "apply_functionals", "builtin_sets", "export_feature_csv",
    "get_builtin_set", "import_feature_csv",
    "__version__",
]
