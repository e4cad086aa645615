"""Token-based clone detection over a parametric curve of search configurations.

Several search instances, each a (similarity threshold, block length range)
configuration, are run over one tokenized corpus and their pairs merged.
Upper length bounds let each instance skip pairs that another instance is
guaranteed to report, without losing any pair.
"""

from .curve import (
    PRESETS,
    ParametricCurve,
    SearchConfig,
    apply_upper_bounds,
    format_curve,
    parse_curve,
    preset,
    read_curve,
    validate,
)
from .engine import BlockSet, ClonePair, TokenIndex, build_index, run_instance, similarity
from .harness import (
    GenSpec,
    GroundTruth,
    LabeledPair,
    calibrate_curve,
    generate_corpus,
    oracle_detect,
    score,
)
from .orchestrator import CloneReport, merge, overlap_stats, run_curve
from .tokenizer import CodeBlock, SourceFile, TokenBag, extract_blocks, load_corpus, tokenize

__version__ = "0.1.0"

__all__ = [
    "BlockSet",
    "ClonePair",
    "CloneReport",
    "CodeBlock",
    "GenSpec",
    "GroundTruth",
    "LabeledPair",
    "PRESETS",
    "ParametricCurve",
    "SearchConfig",
    "SourceFile",
    "TokenBag",
    "TokenIndex",
    "apply_upper_bounds",
    "build_index",
    "calibrate_curve",
    "extract_blocks",
    "format_curve",
    "generate_corpus",
    "load_corpus",
    "merge",
    "oracle_detect",
    "overlap_stats",
    "parse_curve",
    "preset",
    "read_curve",
    "run_curve",
    "run_instance",
    "score",
    "similarity",
    "tokenize",
    "validate",
]
