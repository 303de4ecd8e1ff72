"""Concept-role query expansion: linguistic analysis, collocate and
lexical-semantic pooling, role-weighted retrieval and GA weight tuning."""

__version__ = "0.1.0"
