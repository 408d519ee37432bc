"""Reference external pair scorer.

Fine-tunes a pretrained sequence-pair classifier on a formlink pairs
file and serves positive-class probabilities over the line-delimited
JSON wire protocol (stdin/stdout).
"""

__version__ = "0.1.0"

from .config import ScorerConfig
from .finetune import finetune, read_pairs_file
from .serve import serve
