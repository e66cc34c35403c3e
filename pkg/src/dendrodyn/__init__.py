"""Exact dynamics of piecewise-linear Markov maps on finite metric trees.

Everything is computed with :class:`fractions.Fraction`; floats are refused.
"""
from .covering import CoveringGraph, build_graph, classify, is_transitive
from .decomposition import Decomposition, terminal_decomposition, verify_decomposition
from .markov import MarkovMap, PLMap, build, sup_distance
from .tree import Arc, MetricTree, Subtree, TreePoint, interval, star

__all__ = [
    "Arc",
    "CoveringGraph",
    "Decomposition",
    "MarkovMap",
    "MetricTree",
    "PLMap",
    "Subtree",
    "TreePoint",
    "build",
    "build_graph",
    "classify",
    "interval",
    "is_transitive",
    "star",
    "sup_distance",
    "terminal_decomposition",
    "verify_decomposition",
]
