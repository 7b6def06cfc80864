"""Automatic DBSCAN parameter search with recursive reinforcement learning."""

from ._drld import (
    ari,
    dbscan,
    gradcheck,
    nmi,
    normalize,
    online,
    random_search,
    search,
    synthetic_stream,
)

__all__ = [
    "ari",
    "dbscan",
    "gradcheck",
    "nmi",
    "normalize",
    "online",
    "random_search",
    "search",
    "synthetic_stream",
]
