"""Exact equivariant Gromov-Witten invariants of GKM targets.

The engine enumerates decorated graphs over a moment graph, evaluates each
fixed-locus contribution in exact rational-function arithmetic, and sums to
(twisted) equivariant genus-zero invariants.  On top of that it computes
fixed-point restrictions of the small J-function, verifies their pole
recursion, and compares projective-bundle targets with matching Chern data.
"""

__version__ = "0.1.0"
