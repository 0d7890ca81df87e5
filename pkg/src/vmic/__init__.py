"""Vehicle magnetic-induction channel statistics and cellular power control."""

from .circuit import CoilSpec, LinkGeometry, aligned_channel, reference_coils
from .fading import (
    DomainError,
    FadingLaw,
    LinkBudget,
    cdf_bcs,
    cdf_general,
    expectation_bcs,
    expectation_general,
    outage_probability,
    pdf_bcs,
    pdf_general,
    polarization_gain,
)
from .vibration import BoundaryDistribution, bcs_distribution

__version__ = "0.1.0"
