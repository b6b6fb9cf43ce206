"""Command line interface of the rlnn application."""
# PYTHON_ARGCOMPLETE_OK
import argparse
import os
import sys

import argcomplete
from rich.console import Console

import rlnn

from . import (
    OUTPUT_FORMATS,
    PARAMETER_SETS,
    __version__,
    clients,
    config,
    exceptions,
    init_logger,
    make_log_stream_handler_verbose,
    report,
    setup_log_file_handler,
)
from .network import INPUT_SPACES
from .presets import HEDGE_DEFAULTS
from .rich import richify_response

logger = init_logger(__name__)

# Exit codes
SUCCESS = 0
FAILURE = 1

# separator of end-exclusive seed ranges, e.g. 0..30
SEED_RANGE_SEPARATOR = ".."

# flags holding comma separated lists, and the type of their elements
LIST_OPTIONS = {"hidden": int, "barrier": float, "moneyness": float}


def main():
    """Main command line entry point of the application.

    The data directory is created. A FileHandler is added to the package logger.
    The program configuration is loaded.
    Relevant command line arguments and options are parsed and passed to
    'run()'.
    """
    os.makedirs(rlnn.DATA_DIR, exist_ok=True)

    # Adding the FileHandler here avoids cluttering the log during tests
    setup_log_file_handler()

    args = _parse_command()
    try:
        configuration = config.Configuration(args.pop("config_filepath"))
        exit_code = run(configuration=configuration, **args)

    except exceptions.InvalidConfigError as e:
        logger.critical(f"Invalid configuration: {e}")
        exit_code = FAILURE

    sys.exit(exit_code)


def run(command, configuration, verbose=False, sinks=None, **params):
    """Run 'command' request using additional 'params'.

    The 'params' are completed with defaults from 'configuration' (a
    config.Configuration object) and turned into the request passed to
    'Client.safely_run()'. Output options are not forwarded.

    If 'verbose' is set, debug level log messages are printed to the terminal.

    'sinks' is an optional Client.Sinks object to direct program output to.
    By default, responses are printed as tables to the terminal and, if an
    output path is given, written to file.

    :return: UNIX return code (zero for success, non-zero otherwise)
    """
    if verbose:
        make_log_stream_handler_verbose()

    output = {}

    def _info(response):
        """Write the response to the output file if requested, and print it to
        stdout. The original response is logged at DEBUG-level.
        """
        logger.debug(response)
        text = None
        if isinstance(response, dict):
            text = report.prettify(response, output["format"])
            if output["path"] is not None:
                report.write(output["path"], text)
                logger.info(f"Wrote {output['format']} output to {output['path']}")

        formatted = _format_response(response, output["format"], output["path"], text)
        if isinstance(formatted, str):
            print(formatted)
        else:  # pragma: no cover
            Console().print(formatted)

    sinks = sinks or clients.Client.Sinks(_info, logger.error)

    try:
        _preprocess(params)
        experiment = ExperimentConfig.from_params(command, params, configuration)
    except exceptions.PreprocessingError as e:
        sinks.error(e)
        return FAILURE

    output["path"] = experiment.output_path
    output["format"] = experiment.output_format

    exit_code = FAILURE
    client = clients.create(configuration=configuration, sinks=sinks)
    if client.safely_run(command, **experiment.request(command)):
        exit_code = SUCCESS

    client.shutdown()

    return exit_code


def _parse_list(value, convert, name):
    """Convert a comma separated string into a tuple of 'convert'ed values.

    :raises: PreprocessingError
    """
    try:
        items = tuple(convert(v) for v in str(value).split(",") if v.strip())
    except ValueError:
        raise exceptions.PreprocessingError(f"Invalid {name} list: {value}")
    if not items:
        raise exceptions.PreprocessingError(f"Empty {name} list given.")
    return items


def _parse_seeds(value):
    """Parse a single seed, a comma separated list of seeds, or an end-exclusive
    range 'a..b'.

    :raises: PreprocessingError
    """
    value = str(value).strip()
    try:
        if SEED_RANGE_SEPARATOR in value:
            start, stop = value.split(SEED_RANGE_SEPARATOR)
            seeds = tuple(range(int(start), int(stop)))
        else:
            seeds = tuple(int(v) for v in value.split(","))
    except ValueError:
        raise exceptions.PreprocessingError(f"Invalid seeds: {value}")

    if not seeds:
        raise exceptions.PreprocessingError(f"Empty seed range: {value}")
    if any(s < 0 for s in seeds):
        raise exceptions.PreprocessingError(f"Seeds must not be negative: {value}")
    return seeds


def _preprocess(data):
    """Preprocess data to be passed to Client (convert list options and seeds,
    check positive sizes).

    :raises: PreprocessingError if preprocessing failed.
    """
    for name, convert in LIST_OPTIONS.items():
        value = data.get(name)
        if value is not None:
            data[name] = _parse_list(value, convert, name)

    seeds = data.get("seeds")
    if seeds is not None:
        data["seeds"] = _parse_seeds(seeds)

    for name in ("hidden", "n_train", "n_eval", "n_paths", "rebalances", "date"):
        value = data.get(name)
        if value is None:
            continue
        values = value if isinstance(value, tuple) else (value,)
        if any(v < 1 for v in values):
            raise exceptions.PreprocessingError(f"Option {name} must be positive.")

    for name in ("s0", "strike"):
        value = data.get(name)
        if value is not None and value <= 0:
            raise exceptions.PreprocessingError(f"Option {name} must be positive.")


class ExperimentConfig:
    """Fully resolved experiment: command line options completed by the
    configuration."""

    def __init__(
        self,
        *,
        set_name=None,
        model_block=None,
        s0=None,
        dim=None,
        strike=None,
        barrier=None,
        hidden=(32,),
        n_train=50000,
        n_eval=200000,
        seeds=(0,),
        input_space="log",
        train_config=None,
        threads=1,
        output_path=None,
        output_format="csv",
        **extra,
    ):
        self.set_name = set_name
        self.model_block = model_block
        self.s0 = s0
        self.dim = dim
        self.strike = strike
        self.barrier = barrier
        self.hidden = tuple(hidden)
        self.n_train = n_train
        self.n_eval = n_eval
        self.seeds = tuple(seeds)
        self.input_space = input_space
        self.train_config = train_config
        self.threads = threads
        self.output_path = output_path
        self.output_format = output_format
        # command specific options (run ID, date index, hedge columns...)
        self.extra = extra

    @classmethod
    def from_params(cls, command, params, configuration):
        """Complete the preprocessed 'params' of 'command' by configuration
        values. A parameter set given on the command line takes precedence over
        a model block in the configuration.

        :raises: PreprocessingError for options unsuitable for the experiment
        """
        params = dict(params)
        experiment = configuration.get_section("EXPERIMENT")

        set_name = params.pop("set", None)
        model_block = None
        if set_name is None:
            model_block = configuration.model_block()
            set_name = experiment["set"]

        hidden = params.pop("hidden", None)
        seeds = params.pop("seeds", None)
        n_train = params.pop("n_train", None)
        n_eval = params.pop("n_eval", None)
        input_space = params.pop("input_space", None)
        output_format = params.pop("format", None)

        barrier = params.pop("barrier", None)
        if command == "hedge":
            params["columns"] = barrier if set_name == "set5" else None
            barrier = None
        elif barrier is not None:
            if len(barrier) > 1:
                raise exceptions.PreprocessingError(
                    f"A single barrier is required for command {command}."
                )
            barrier = barrier[0]
        params["counts"] = hidden

        return cls(
            set_name=set_name,
            model_block=model_block,
            s0=params.pop("s0", None),
            dim=params.pop("dim", None),
            strike=params.pop("strike", None),
            barrier=barrier,
            hidden=hidden
            or _parse_list(experiment["hidden"], int, "hidden (configuration)"),
            n_train=n_train or configuration.get_option("SIMULATION", "n_train"),
            n_eval=n_eval or configuration.get_option("SIMULATION", "n_eval"),
            seeds=seeds or _parse_seeds(experiment["seeds"]),
            input_space=input_space
            or configuration.get_option("TRAINING", "input_space"),
            train_config=configuration.train_config(),
            threads=configuration.threads(),
            output_path=params.pop("out", None),
            output_format=output_format
            or configuration.get_option("OUTPUT", "format"),
            **params,
        )

    def _experiment(self):
        return {
            "set_name": self.set_name,
            "s0": self.s0,
            "dim": self.dim,
            "strike": self.strike,
            "barrier": self.barrier,
            "model_block": self.model_block,
        }

    def _hedge_request(self):
        defaults = HEDGE_DEFAULTS.get(self.set_name, {})
        columns = self.extra.get("columns")
        if columns is None:
            columns = self.extra.get("moneyness") or defaults.get("columns", ())
        return {
            "set_name": self.set_name,
            "columns": columns,
            "counts": self.extra.get("counts") or defaults.get("counts", ()),
            "train_config": self.train_config,
            "seed": self.seeds[0],
            "n_train": self.n_train,
            "n_paths": self.extra.get("n_paths"),
            "rebalances": self.extra.get("rebalances")
            or defaults.get("rebalances", 1),
            "threads": self.threads,
        }

    def request(self, command):
        """Keyword arguments of the engine request for 'command'."""
        if command == "price":
            return {
                "experiment": self._experiment(),
                "hidden": self.hidden,
                "seeds": self.seeds,
                "n_train": self.n_train,
                "n_eval": self.n_eval,
                "train_config": self.train_config,
                "input_space": self.input_space,
                "threads": self.threads,
                "archive": self.extra.get("archive", False),
            }
        if command == "bounds":
            return {
                "run_id": self.extra.get("run"),
                "n_eval": self.n_eval,
                "seeds": self.seeds,
                "threads": self.threads,
            }
        if command == "hedge":
            return self._hedge_request()
        if command == "export-portfolio":
            request = {"date": self.extra.get("date"), "threads": self.threads}
            if self.extra.get("run") is not None:
                request["run_id"] = self.extra["run"]
            else:
                request.update(
                    {
                        "experiment": self._experiment(),
                        "hidden": self.hidden[0],
                        "seed": self.seeds[0],
                        "n_train": self.n_train,
                        "train_config": self.train_config,
                        "input_space": self.input_space,
                    }
                )
            return request
        return {}


def _format_response(response, output_format="csv", output_path=None, text=None):
    """Format the given response (dict or str) for the terminal.
    If the response is a string, it is immediately returned. JSON output that
    is not written to file is returned as text; anything else is rendered as
    rich table.
    """
    if isinstance(response, str):
        return response

    if output_format == "json" and output_path is None:
        return text if text is not None else report.prettify(response, "json")

    return richify_response(response)


def _parse_command(args=None):
    """Parse the given list of args and return the result as dict."""

    parser = argparse.ArgumentParser(
        description="Price and hedge Bermudan options with regress-later "
        "neural networks, with lower and upper bounds."
    )

    parser.add_argument(
        "-V",
        "--version",
        action="version",
        version=f"rlnn version {__version__}",
        help="display version info and exit",
    )  # pragma: no cover

    subparsers = parser.add_subparsers(
        dest="command",
        metavar="command",
    )
    subparsers.required = True

    price_parser = subparsers.add_parser(
        "price", help="train networks and estimate bounds of an instrument"
    )
    bounds_parser = subparsers.add_parser(
        "bounds", help="estimate bounds of an archived run on fresh paths"
    )
    hedge_parser = subparsers.add_parser(
        "hedge", help="backtest static against delta hedging"
    )
    export_parser = subparsers.add_parser(
        "export-portfolio", help="show the static hedge portfolio of a date"
    )
    subparsers.add_parser("selftest", help="run fast oracle and invariant checks")
    subparsers.add_parser("runs", help="list archived training runs")

    for subparser in [price_parser, export_parser]:
        subparser.add_argument(
            "--set",
            choices=PARAMETER_SETS,
            default=None,
            help="built-in parameter set (default: from configuration)",
        )
        subparser.add_argument("--s0", type=float, help="spot of every asset")
        subparser.add_argument("--dim", type=int, help="number of assets (set3)")
        subparser.add_argument("--strike", type=float, help="strike of the claim")
        subparser.add_argument(
            "--barrier", help="barrier of the down-and-out call (set5)"
        )
        subparser.add_argument(
            "--input-space",
            choices=INPUT_SPACES,
            help="network input coordinates (default: from configuration)",
        )

    hedge_parser.add_argument(
        "--set",
        choices=list(HEDGE_DEFAULTS),
        default="set4",
        help="set4 for the European put, set5 for the barrier option "
        "(default: set4)",
    )
    hedge_parser.add_argument(
        "--moneyness",
        help="comma separated strike/spot ratios (set4). Default: 0.5,1,1.5",
    )
    hedge_parser.add_argument(
        "--barrier",
        help="comma separated barrier levels (set5). Default: 0.91,0.93,0.95,0.97",
    )
    hedge_parser.add_argument(
        "--n-paths",
        type=int,
        default=50000,
        help="number of backtest paths. Default: 50000",
    )
    hedge_parser.add_argument(
        "--rebalances",
        type=int,
        help="rebalances of the delta hedge (default: 25 for set4, 12 for set5)",
    )

    for subparser in [price_parser, hedge_parser, export_parser]:
        subparser.add_argument(
            "--hidden",
            help="comma separated hidden unit counts; hedge uses them as options "
            "counts (default: from configuration)",
        )
        subparser.add_argument(
            "--n-train",
            type=int,
            help="number of training paths (default: from configuration)",
        )

    for subparser in [price_parser, bounds_parser]:
        subparser.add_argument(
            "--n-eval",
            type=int,
            help="number of fresh evaluation paths (default: from configuration)",
        )

    for subparser in [price_parser, bounds_parser, hedge_parser, export_parser]:
        subparser.add_argument(
            "--seeds",
            help="seed, comma separated seeds, or end-exclusive range like 0..30 "
            "(default: from configuration)",
        )

    price_parser.add_argument(
        "--archive",
        action="store_true",
        help="store the trained networks in the run archive",
    )
    bounds_parser.add_argument(
        "--run", type=int, required=True, help="ID of the archived run"
    )
    export_parser.add_argument(
        "--run", type=int, default=None, help="ID of the archived run"
    )
    export_parser.add_argument(
        "--date", type=int, required=True, help="monitoring date index (1..M)"
    )

    # Add common options to subparsers
    for subparser in subparsers.choices.values():
        subparser.add_argument(
            "-C",
            "--config-filepath",
            default=rlnn.CONFIG_FILEPATH
            if os.path.exists(rlnn.CONFIG_FILEPATH)
            else None,
            help=f"path to config file. Default: {rlnn.CONFIG_FILEPATH}",
        )
        subparser.add_argument(
            "--verbose", action="store_true", help="Be verbose about internal workings"
        )
        subparser.add_argument("-o", "--out", default=None, help="output file path")
        subparser.add_argument(
            "-f",
            "--format",
            choices=OUTPUT_FORMATS,
            default=None,
            help="output file format (default: from configuration)",
        )

    argcomplete.autocomplete(parser)
    return vars(parser.parse_args(args=args))
