from .base import Manifold, as_generator
from .fixed_stationary import FixedStationaryManifold
from .multinomial import MultinomialManifold

__all__ = ["Manifold", "MultinomialManifold", "FixedStationaryManifold", "as_generator"]
