"""Market simulation of renewable-electrolyzer plants under DC optimal power flow."""

__version__ = "0.1.0"

from .bidcurve import (
    BidCurve,
    BidPiece,
    RepConfig,
    derive_bid_curve,
    hydrogen_revenue,
    marginal_cost_at,
    opportunity_cost_exact,
)
from .errors import (
    ConcavityViolation,
    DomainError,
    InfeasibleMarket,
    MissingFactor,
    ModelError,
    NumericalFailure,
    ParseError,
    RepMarketError,
    ValidationError,
)
from .h2curve import (
    PiecewiseConcaveCurve,
    SampledHydrogenCurve,
    fit_piecewise_concave,
    uniform_breakpoints,
)
from .opf import (
    Branch,
    Bus,
    Generator,
    MarketOutcome,
    NetworkModel,
    aggregate_loads,
    build_dcopf,
    clear_market,
    reduce_network,
)

__all__ = [
    "BidCurve",
    "BidPiece",
    "Branch",
    "Bus",
    "ConcavityViolation",
    "DomainError",
    "Generator",
    "InfeasibleMarket",
    "MarketOutcome",
    "MissingFactor",
    "ModelError",
    "NetworkModel",
    "NumericalFailure",
    "ParseError",
    "PiecewiseConcaveCurve",
    "RepConfig",
    "RepMarketError",
    "SampledHydrogenCurve",
    "ValidationError",
    "aggregate_loads",
    "build_dcopf",
    "clear_market",
    "derive_bid_curve",
    "fit_piecewise_concave",
    "hydrogen_revenue",
    "marginal_cost_at",
    "opportunity_cost_exact",
    "reduce_network",
    "uniform_breakpoints",
]
