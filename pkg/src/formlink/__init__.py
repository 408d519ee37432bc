"""Form entity linking toolkit.

Parses FUNSD-style form annotations, generates per-answer candidate
questions geometrically, scores question-answer pairs with pluggable
scorers, decodes links with a closest-question tie-break, and evaluates
predictions with F1, mAP, and mRank.
"""

__version__ = "0.1.0"

from .errors import FormlinkError
from .funsd import (BBox, Entity, EntityLabel, Form, GoldLinkSet, Word,
                    gold_links, load_corpus, parse_form, parse_form_file,
                    serialize_form, validate_corpus)
from .geometry import (Candidate, CandidateSet, DistanceMode, bbox_distance,
                       candidate_recall, candidates_for)
from .linking import (Link, LinkPrediction, decode, decode_corpus, decode_form,
                      read_predictions, write_predictions)
from .metrics import (AnswerRanking, LinkCounts, MetricsReport,
                      average_precision, evaluate, link_counts, prf1,
                      rank_value)
from .pairs import (NegativePolicy, PairExample, PairLabel, build_pairs,
                    inference_pairs, normalize_text, read_pairs, write_pairs)
from .scoring import (BaselineModel, ConstantScorer, ExternalScorerSession,
                      OracleScorer, PairScore, score_pairs, train_baseline)
