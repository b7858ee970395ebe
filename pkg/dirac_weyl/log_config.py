import logging.config
import sys
import threading

from dirac_weyl.app_dirs import DATA_DIR

LOG_PATH = DATA_DIR / "dirac_weyl.log"
IS_DEV = "diracw" not in sys.argv[0]


class DuplicateMessageFilter(logging.Filter):
    """Drop consecutive repeats of noisy numerical warnings.

    Tracked per thread, because λ-workers run side by side and each of them
    may legitimately hit the same ill-conditioned region once.

    Example (one worker thread):
        λ=(0+1j): converged at L=10
        Ill-conditioned fundamental matrix at x=31.5
        Ill-conditioned fundamental matrix at x=32.0
        Ill-conditioned fundamental matrix at x=32.5
        λ=(0+2j): converged at L=10

    becomes:
        λ=(0+1j): converged at L=10
        Ill-conditioned fundamental matrix at x=31.5
        λ=(0+2j): converged at L=10
    """
    NOISY = ("Ill-conditioned fundamental matrix", "Step size underflow")

    def __init__(self):
        super().__init__()
        self.state = threading.local()  # .prefix: previous record of this thread, None if not noisy

    def filter(self, record: logging.LogRecord):
        msg = record.msg if isinstance(record.msg, str) else ""
        prefix = next((p for p in self.NOISY if msg.startswith(p)), None)
        repeat = prefix is not None and getattr(self.state, "prefix", None) == prefix
        self.state.prefix = prefix
        return not repeat


class ModuleFilter(logging.Filter):
    """Minimum log level per module, filled from `logging.module_levels`."""
    min_levels = {}

    def filter(self, record: logging.LogRecord):
        return record.levelno >= self.min_levels.get(record.module, -1)


LOGGING_CONF = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} - {levelname} - {threadName} - {module} - {message}',
            'style': '{'
        },
    },
    'filters': {
        'duplicatemessagefilter': {
            '()': DuplicateMessageFilter,
        },
        'modulesfilter': {
            '()': ModuleFilter
        }
    },
    'handlers': {
        'file': {
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': LOG_PATH,
            'maxBytes': 1048576,
            'backupCount': 3,
            'mode': 'a',
            'level': 'DEBUG',
            'formatter': 'verbose',
            'filters': ['duplicatemessagefilter', 'modulesfilter']
        },
        'console': {
            # stderr, so that stdout stays clean for data
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'level': 'WARNING',
            'formatter': 'verbose',
            'filters': ['duplicatemessagefilter', 'modulesfilter']
        }
    },
    'loggers': {
        'dirac_weyl': {
            'handlers': ['console' if IS_DEV else 'file'],
            'level': 'DEBUG'
        }
    }
}
