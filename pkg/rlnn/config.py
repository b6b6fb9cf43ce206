"""Configuration of the rlnn application."""
import os
from configparser import ConfigParser

from . import OUTPUT_FORMATS, PARAMETER_SETS, THREADS_ENV_VAR, init_logger
from .exceptions import InvalidConfigError
from .network import INPUT_SPACES, TrainConfig

logger = init_logger(__name__)

# options of the explicit model block
MODEL_OPTIONS = (
    "spot",
    "rate",
    "dividend",
    "vol",
    "corr",
    "maturity",
    "dates",
    "kind",
    "strike",
    "weights",
    "barrier",
)

# section -> option -> (default, type); options of type str are not converted
DEFAULTS = {
    "TRAINING": {
        "learning_rate": ("0.001", float),
        "batch_fraction": ("0.1", float),
        "patience": ("6", int),
        "split": ("0.7", float),
        "max_epochs": ("3000", int),
        "adam_beta1": ("0.9", float),
        "adam_beta2": ("0.999", float),
        "adam_eps": ("1e-8", float),
        "input_space": ("log", str),
    },
    "SIMULATION": {
        "n_train": ("50000", int),
        "n_eval": ("200000", int),
        "threads": ("1", int),
    },
    "EXPERIMENT": {
        "set": ("set1", str),
        "hidden": ("32", str),
        "seeds": ("0", str),
    },
    "OUTPUT": {
        "format": ("csv", str),
    },
    "MODEL": {option: ("", str) for option in MODEL_OPTIONS},
}


class Configuration:
    """Typed view on the DEFAULTS, with values overridden by an optional INI
    file. Options of the file that are unknown to DEFAULTS are ignored.

    :raises: InvalidConfigError if the file is missing or holds invalid values
    """

    def __init__(self, filepath=None):
        self._filepath = filepath
        self._parser = ConfigParser()
        self._parser.read_dict(
            {
                section: {option: default for option, (default, _) in options.items()}
                for section, options in DEFAULTS.items()
            }
        )
        if filepath is not None:
            self._override_from(filepath)
        self._validate()

    def _override_from(self, filepath):
        logger.debug(f"Reading configuration from {filepath}")
        custom = ConfigParser()
        if custom.read(filepath) != [filepath]:
            raise InvalidConfigError("Config filepath does not exist!")

        for section, options in DEFAULTS.items():
            if not custom.has_section(section):
                continue
            for option in options:
                if custom.has_option(section, option):
                    self._parser[section][option] = custom.get(
                        section, option, raw=True
                    )

    def get_section(self, section):
        """Return all options of 'section' as dict of converted values."""
        return {o: self.get_option(section, o) for o in DEFAULTS[section]}

    def get_option(self, section, option):
        """Return the value of 'option' in 'section', converted to its type."""
        _, convert = DEFAULTS[section][option]
        return convert(self._parser.get(section, option))

    def train_config(self):
        """TrainConfig from the TRAINING section."""
        section = self.get_section("TRAINING")
        section.pop("input_space")
        return TrainConfig.from_section(section)

    def threads(self):
        """Number of worker threads; the environment variable takes precedence.

        :raises: InvalidConfigError if the environment variable is no integer
        """
        value = os.environ.get(THREADS_ENV_VAR)
        if value is None:
            return self.get_option("SIMULATION", "threads")
        try:
            return int(value)
        except ValueError:
            raise InvalidConfigError(
                f"Environment variable {THREADS_ENV_VAR} must be an integer."
            )

    def model_block(self):
        """Options of the MODEL section, or None if no spot is configured."""
        section = self.get_section("MODEL")
        if not section["spot"].strip():
            return None
        return section

    def _validate(self):
        for section, options in DEFAULTS.items():
            for option, (_, convert) in options.items():
                if convert is str:
                    continue
                try:
                    self.get_option(section, option)
                except ValueError:
                    raise InvalidConfigError(
                        f"Option {option} in section {section} must be of type "
                        f"{convert.__name__}."
                    )

        parameter_set = self.get_option("EXPERIMENT", "set")
        if parameter_set not in PARAMETER_SETS:
            raise InvalidConfigError(f"Unknown parameter set: {parameter_set}")

        output_format = self.get_option("OUTPUT", "format")
        if output_format not in OUTPUT_FORMATS:
            raise InvalidConfigError(f"Unknown output format: {output_format}")

        input_space = self.get_option("TRAINING", "input_space")
        if input_space not in INPUT_SPACES:
            raise InvalidConfigError(f"Unknown input space: {input_space}")

        # range checks of the training hyperparameters
        self.train_config()

        for option in ("n_train", "n_eval", "threads"):
            if self.get_option("SIMULATION", option) < 1:
                raise InvalidConfigError(
                    f"Option {option} in section SIMULATION must be positive."
                )
