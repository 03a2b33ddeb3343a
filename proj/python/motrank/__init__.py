"""Pairwise ranking models for motivation factor prediction.

Thin wrapper over the C++ core. Feature matrices are plain lists of lists;
scores are per-row Likert means. See train(), cross_validate() and
grid_search() for the main entry points.
"""

import json as _json

from ._core import (
    Ranker,
    UserError,
    __version__,
    generate_synthetic,
    kfold,
    train,
    transform,
)
from ._core import cross_validate_json as _cross_validate_json
from ._core import grid_search_json as _grid_search_json


def cross_validate(features, scores, **kwargs):
    """Leakage-safe k-fold evaluation; returns the report as a dict."""
    return _json.loads(_cross_validate_json(features, scores, **kwargs))


def grid_search(features, scores, **kwargs):
    """Evaluates every grid cell on shared folds; returns {cells, best_index}."""
    return _json.loads(_grid_search_json(features, scores, **kwargs))


__all__ = [
    "Ranker",
    "UserError",
    "__version__",
    "cross_validate",
    "generate_synthetic",
    "grid_search",
    "kfold",
    "train",
    "transform",
]
