"""Physical-consistency scoring of channel augmentations for image time series.

The package measures whether channel augmentation techniques (brightness,
solarize, grayscale, ...) keep the pixel signatures of multispectral image
time series within the natural deviation observed across acquisition
timestamps.  See the README for the pipeline walk-through.
"""

from .augment import AugmentDraw, AugmentSpec, Technique, apply, sample_draw
from .errors import AugscoreError
from .preprocess import (
    ChannelStats,
    compute_p99,
    invert_deviation_to_uint16,
    quantize_bundle,
    quantize_to_uint8,
)
from .raster import (
    BandImage,
    MaskRect,
    PixelSignature,
    TimeSeries,
    TimeSeriesBundle,
    extract_signature,
    filter_cloudy,
    filter_cloudy_bundle,
    load_bundle,
    save_bundle,
)
from .report import TrainingResult, read_training_csv, render_plot, write_csv, write_json
from .scoring import (
    AugScore,
    DeviationRecord,
    NoaugScore,
    ScoreSummary,
    deviation,
    is_consistent,
    score_aug,
    score_noaug,
    sweep,
)
from .streams import CounterStream
from .synth import SynthParams, generate_bundle

__version__ = "0.1.0"

__all__ = [
    "AugScore",
    "AugmentDraw",
    "AugmentSpec",
    "AugscoreError",
    "BandImage",
    "ChannelStats",
    "CounterStream",
    "DeviationRecord",
    "MaskRect",
    "NoaugScore",
    "PixelSignature",
    "ScoreSummary",
    "SynthParams",
    "Technique",
    "TimeSeries",
    "TimeSeriesBundle",
    "TrainingResult",
    "apply",
    "compute_p99",
    "deviation",
    "extract_signature",
    "filter_cloudy",
    "filter_cloudy_bundle",
    "generate_bundle",
    "invert_deviation_to_uint16",
    "is_consistent",
    "load_bundle",
    "quantize_bundle",
    "quantize_to_uint8",
    "read_training_csv",
    "render_plot",
    "sample_draw",
    "save_bundle",
    "score_aug",
    "score_noaug",
    "sweep",
    "write_csv",
    "write_json",
]
