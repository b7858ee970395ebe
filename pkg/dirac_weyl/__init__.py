import logging
import logging.config
import sys
import threading

import confuse

APP_NAME = 'dirac-weyl'

from dirac_weyl.log_config import LOGGING_CONF, ModuleFilter  # noqa: E402
from dirac_weyl.__version__ import __version__  # noqa: E402,F401

logging.config.dictConfig(LOGGING_CONF)
logger = logging.getLogger("dirac_weyl")


def register_exception_handler():
    """Exception handler to log all errors from λ-worker threads."""
    def error_logger(*exc_info):
        logger.exception("Unhandled exception", exc_info=exc_info)

    def thread_excepthook(args):
        if args.exc_type == SystemExit:
            return
        error_logger(args.exc_type, args.exc_value, args.exc_traceback)

    threading.excepthook = thread_excepthook


register_exception_handler()

config = confuse.Configuration("dirac-weyl", "dirac_weyl")

user_sources = [s for s in config.sources if not s.default]
if user_sources:
    temp_root = confuse.RootView(user_sources)
    if "version" in temp_root and temp_root["version"].get() != config.sources[-1]["version"]:
        logger.warning(
            "Config version mismatch! Check configs at "
            f"{config.sources[-1].filename} and {config.user_config_path()}"
        )

try:
    ModuleFilter.min_levels = {
        module: logging.getLevelName(level.upper())
        for module, level in config["logging"]["module_levels"].get(dict).items()
    }
except confuse.ConfigError as e:
    print(f"Ignoring logging.module_levels: {e}", file=sys.stderr)
