from . import distributions
from . import harness
from . import learners
from . import oracle
from . import utils

from .harness import ExperimentConfig, TrialReport
from .oracle import PricingOracle
from .io import IO
