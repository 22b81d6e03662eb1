"""Density-driven Delone sets on the integer lattice and the finite-scale
quantities that probe them: Delone constants, Lipschitz and bi-Lipschitz
distortion, co-uniformity moduli, regularity constants, certified distortion
lower bounds, minimal-distortion assignments, and renormalized
counting-measure diagnostics."""

__version__ = "0.1.0"

from .construction import (DeloneSet, Level, ScaleSchedule, audit, build,
                           fill_cell, required_points, validate_schedule)
from .density import (Bilinear, Constant, Density, SampledGrid,
                      TrigOscillation, cell_quota, density_from_json)
from .distortion import (BijectionTable, co_uniformity, counting_lower_bound,
                         escape_check, lipschitz_constants,
                         modulus_from_samples, order_gate,
                         regularity_constant)
from .geometry import (Annulus, Box, DeloneConstants, Homothety, PointSet,
                       Rect, SeparatedSet, ball_query, delone_constants,
                       max_separated_subset, sup_dist)
from .matching import (MatchInstance, MatchResult, brute_force_min, feasible,
                       min_lipschitz)
from .measures import (CountingMeasure, NormalizedPatch, cells_family,
                       discrepancy, dyadic_family, grid_measure, mass_loss,
                       measure, normalize_map, normalize_patch,
                       patch_measure, pushforward, symdiff_band)

__all__ = [name for name in dir() if not name.startswith("_")]
