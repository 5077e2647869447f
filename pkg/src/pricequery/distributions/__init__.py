from . import checkers
from . import hard_instances
from . import registry

from .families import (
    DiscreteAtoms,
    Distribution,
    DistributionWarning,
    PiecewiseCdf,
    PointMass,
    TruncatedExponential,
)
from .checkers import OptResult, brute_force_opt, target_price
from .hard_instances import GeneralFamily, MhrPair, RegularPair
