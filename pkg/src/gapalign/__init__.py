"""Directed answer-graph alignment for gap identification in student answers.

The pipeline: triples -> answer graphs -> predicate canonicalization ->
similarity-flooding alignment -> filter pruning -> gap inference -> evaluation.
"""

__version__ = "0.1.0"
