"""Response bounds for structures computed directly from stress-strain data.

The package solves truss and hexahedral continuum models against a material
*dataset* instead of a constitutive law.  Its core is a sequential-linear-
programming driver that constrains each member's strain-stress state to an
adaptively shrunk local convex hull of data points and extracts upper/lower
bounds of structural responses, with a classical distance-minimising direct
search as baseline and infeasibility fallback.
"""

__version__ = "0.1.0"

from .phase import DataSet, PhasePoint, ScalingMatrix  # noqa: F401
