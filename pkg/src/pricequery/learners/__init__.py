from . import estimation
from . import grid_search
from . import instantiation
from . import unified_search

from .estimation import EstimateBudgets
from .unified_search import RunTrace, SearchParams
from .instantiation import SETTINGS
