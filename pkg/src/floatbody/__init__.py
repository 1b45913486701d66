"""Convex floating bodies of polytopes, isotropic position and
logarithmic Hausdorff distances."""

from .body import (ConvexBody, GeometryError, HalfSpace, affine_image, body_from_dict,
                   body_to_dict, hrep_to_vrep, make_standard_body, membership, polar,
                   ray_shoot, support, vrep_to_hrep)
from .distances import (DistanceReport, bm_upper, hausdorff, log_hausdorff,
                        log_hausdorff_at, polar_duality_check)
from .floating import (CapBoundBreakdown, FloatingBodyApprox, cap_bound_breakdown,
                       direction_set, floating_body, inner_bound_check, theorem1_sandwich)
from .isotropic import IsotropicForm, isotropic_constant, to_isotropic
from .logconcave import PiecewiseLogLinearDensity, make_density
from .measure import (ball_volume, cap_quantile, cap_volume_fraction, centroid, covariance,
                      decompose, median_depth, sample_uniform, section_profile, volume)

__version__ = "0.1.0"
