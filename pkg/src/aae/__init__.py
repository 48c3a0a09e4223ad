"""Active auto-estimator for graph storage tuning.

Predicts whether a proposed storage configuration executes a graph
workload cheaper than the current one, using small neural classifiers
trained actively against a deterministic cost oracle.
"""

__version__ = "0.1.0"
