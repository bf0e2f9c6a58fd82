from .config import RunConfig, load_config, settings
from .errors import ConfigError, DataError, DivergenceError, StgncdeError

__version__ = settings.VERSION

__all__ = ['RunConfig', 'load_config', 'settings', 'ConfigError', 'DataError', 'DivergenceError', 'StgncdeError']
