"""Time/space separation of Lorentzian spacetimes via a Riemannian metric.

A Riemannian metric ``h`` turns the Lorentzian ``g`` into a self-adjoint map
with a single negative eigendirection: the time line.  The lines form a
line bundle whose triviality (probed by Z/2 holonomy along loops) is time
orientability; sections of it and of its complement drive time and space
covariant differentiation.
"""
from .bilinear import (CausalClass, Signature, classify, evaluate_form, jacobi_eigen,
                       orthogonal_complement, restrict_to_complement, signature)
from .covariant import (VectorField, christoffel_at, covariant_derivative,
                        metric_compatibility_residual, space_derivative, space_frame_at,
                        time_derivative)
from .dsl import differentiate, evaluate, parse, to_source
from .separation import (TimeLine, riemann_from_timelike, roundtrip_check,
                         timelike_from_riemann)
from .spacetime import SpacetimeSpec, g_at, h_at, load_spec, validate
from .time_bundle import (PartialSection, evaluate_section, holonomy, line_at,
                          orientability, transport_line)

__version__ = "0.1.0"
