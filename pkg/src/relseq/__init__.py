"""Relationship-aware sequential pattern mining over taxonomy-annotated sequences."""

from .hierminer import RefinementResult, refine_all
from .model import (
    Event,
    ParseError,
    RefinedPattern,
    Schema,
    Sequence,
    TypePattern,
    format_pattern,
    load_schema,
    make_sequence,
    parse_pattern,
    parse_sequence_db,
    pattern_matches,
)
from .taxonomy import Taxonomy, parse_taxonomy
from .typeminer import FrequentTypePattern, MinerConfig, mine_type_patterns

__version__ = "0.1.0"
