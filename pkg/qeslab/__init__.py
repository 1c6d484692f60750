"Exact ES/QES operator lab for the n-sphere and its Euclidean contraction."

# Exported classes
from .config import Config, Prefs, Subcommand
from .error import ConfigError, DomainError, Error
from .models import EuclidParams, SphereParams

# Exported modules
from . import config, diffop, exactalg, models, repspace, separation, verify
