import os.path
from logging import DEBUG, WARN, Formatter, StreamHandler, getLogger, handlers

import appdirs
from pkg_resources import get_distribution

__version__ = get_distribution(__name__).version

# default name of the run archive
DEFAULT_ARCHIVE_NAME = "runs"

# names of the built-in parameter sets
PARAMETER_SETS = ("set1", "set2", "set3", "set4", "set5")

OUTPUT_FORMATS = ("csv", "json")

# environment variable capping internal parallelism
THREADS_ENV_VAR = "RLNN_THREADS"

CONFIG_DIR = appdirs.user_config_dir(__name__)
DATA_DIR = appdirs.user_data_dir(__name__)
LOG_DIR = appdirs.user_log_dir(__name__)

CONFIG_FILEPATH = os.path.join(CONFIG_DIR, "config")

LOG_FILENAME = "rlnn.log"
LOG_FILE_MAX_BYTES = 10_000_000
LOG_FILE_BACKUPS = 3

# Training and bound estimation log progress at DEBUG level; the terminal only
# shows warnings unless the CLI runs verbosely.
LOGGER = getLogger(__name__)
LOGGER.setLevel(DEBUG)
FORMATTER = Formatter(
    fmt="%(asctime)s %(levelname)-7s %(name)s:%(funcName)s %(message)s"
)
_terminal = StreamHandler()
_terminal.setLevel(WARN)
LOGGER.addHandler(_terminal)


def init_logger(name):
    """Return the logger of module 'name', attached to the package logger."""
    logger = getLogger(name)
    logger.setLevel(DEBUG)
    if logger is not LOGGER and not name.startswith(f"{LOGGER.name}."):
        logger.parent = LOGGER
    logger.propagate = True
    return logger


def setup_log_file_handler(log_dir=LOG_DIR):
    """Write all package log records to a rotating file in 'log_dir', which is
    created if necessary.
    """
    os.makedirs(log_dir, exist_ok=True)
    file_handler = handlers.RotatingFileHandler(
        os.path.join(log_dir, LOG_FILENAME),
        maxBytes=LOG_FILE_MAX_BYTES,
        backupCount=LOG_FILE_BACKUPS,
    )
    file_handler.setFormatter(FORMATTER)
    LOGGER.addHandler(file_handler)
    return file_handler


def make_log_stream_handler_verbose():
    _terminal.setLevel(DEBUG)
    _terminal.setFormatter(FORMATTER)
