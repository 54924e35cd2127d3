"""Multi-vehicle lake monitoring simulator.

Surface vehicles plan sampling paths over a lake grid with swarm rules,
estimate the contamination field with a Gaussian process, and optionally
split the work across per-zone federated model nodes.
"""

__version__ = "0.1.0"
