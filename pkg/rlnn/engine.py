"""Command dispatcher running pricing, bounds, hedging and archive requests."""
from . import archive, exceptions, init_logger
from .bounds import estimate_bounds, summarize_runs
from .hedge import (
    barrier_hedge_experiment,
    european_hedge_experiment,
    extract_portfolio,
    portfolio_table,
)
from .network import LOG_PRICE
from .presets import model_from_block, parameter_set
from .pricer import rlnn_backward
from .report import bound_row, portfolio_rows
from .selftest import run_checks

logger = init_logger(__name__)

# label of experiments defined by an explicit model block
CUSTOM_LABEL = "custom"


def _summary_row(label, s0, hidden, rows):
    return {"instrument": label, "s0": float(s0), "p": hidden, **summarize_runs(rows)}


class Engine:
    """Engine class holding the ``TinyDbArchive`` of training runs.

    Kwargs (f.i. data_dir) are passed to the TinyDbArchive member, which is
    opened on first use.
    """

    def __init__(self, **kwargs):
        self._archive = None
        self._archive_kwargs = kwargs

    def run(self, command, **kwargs):
        """The method corresponding to the given `command` is called. All
        `kwargs` are passed on. A json-like response is returned.

        Wrap this in a 'broad' try-except block to catch any unexpected errors.
        :return: dict
            key is one of 'rows', 'table', 'portfolio', 'checks', 'runs', 'error'
        """
        logger.debug(f"Running '{command}' with {kwargs}")

        try:
            if command == "price":
                return self._price(**kwargs)
            elif command == "bounds":
                return self._bounds(**kwargs)
            elif command == "hedge":
                return self._hedge(**kwargs)
            elif command == "export-portfolio":
                return self._export_portfolio(**kwargs)
            elif command == "selftest":
                return self._selftest()
            elif command == "runs":
                return {"runs": self._get_archive().get_runs()}
            elif command == "stop":
                # graceful shutdown, invoke closing of files
                if self._archive is not None:
                    self._archive.close()
                return {}
            else:
                return {"error": f"Engine: unknown command '{command}'"}

        except exceptions.RlnnException as e:
            return {"error": e}

    def _get_archive(self):
        if self._archive is None:
            self._archive = archive.TinyDbArchive(**self._archive_kwargs)
        return self._archive

    @staticmethod
    def _experiment(
        set_name=None, s0=None, dim=None, strike=None, barrier=None, model_block=None
    ):
        """Resolve the experiment into its label, model, schedule and claim."""
        if model_block is not None:
            return (CUSTOM_LABEL,) + model_from_block(model_block)
        return (set_name,) + parameter_set(
            set_name, s0=s0, dim=dim, strike=strike, barrier=barrier
        )

    def _price(
        self,
        experiment,
        hidden,
        seeds,
        n_train,
        n_eval,
        train_config,
        input_space=LOG_PRICE,
        threads=1,
        archive=False,
    ):
        """Train and bound the experiment once per hidden-unit count and seed.

        :return: dict with 'rows', 'summary' (one row per hidden-unit count if
            there are several seeds) and 'run_ids'
        """
        label, model, schedule, spec = self._experiment(**experiment)
        s0 = model.spot[0]

        rows, summary, run_ids = [], [], []
        for p in hidden:
            group = []
            for seed in seeds:
                result = rlnn_backward(
                    model,
                    schedule,
                    spec,
                    n_train,
                    p,
                    train_config,
                    seed,
                    input_space=input_space,
                    threads=threads,
                )
                report = estimate_bounds(result, n_eval, seed, threads=threads)
                group.append(bound_row(label, s0, p, seed, report))
                if archive:
                    run_ids.append(self._get_archive().add_run(result, label))

            rows.extend(group)
            if len(group) > 1:
                summary.append(_summary_row(label, s0, p, group))

        return {"rows": rows, "summary": summary, "run_ids": run_ids}

    def _bounds(self, run_id, n_eval, seeds, threads=1):
        """Bound an archived run on fresh paths of every seed."""
        if run_id is None:
            raise exceptions.InvalidRequest("A run ID is required.")
        archive_ = self._get_archive()
        result = archive_.get_run(run_id)
        label = archive_.get_label(run_id)
        s0 = result.model.spot[0]

        rows = [
            bound_row(
                label,
                s0,
                result.hidden,
                seed,
                estimate_bounds(result, n_eval, seed, threads=threads),
            )
            for seed in seeds
        ]
        summary = []
        if len(rows) > 1:
            summary.append(_summary_row(label, s0, result.hidden, rows))
        return {"rows": rows, "summary": summary, "run_ids": []}

    @staticmethod
    def _hedge(
        set_name,
        columns,
        counts,
        train_config,
        seed,
        n_train,
        n_paths,
        rebalances,
        threads=1,
    ):
        """Backtest static against delta hedging.

        :raises: InvalidRequest for parameter sets without hedging experiment
        """
        if set_name == "set4":
            experiment = european_hedge_experiment
        elif set_name == "set5":
            experiment = barrier_hedge_experiment
        else:
            raise exceptions.InvalidRequest(
                f"No hedging experiment for parameter set {set_name}."
            )
        stats = experiment(
            columns,
            counts,
            train_config,
            seed,
            n_train=n_train,
            n_paths=n_paths,
            rebalances=rebalances,
            threads=threads,
        )
        return {"table": portfolio_table(stats, columns), "columns": list(columns)}

    def _export_portfolio(
        self,
        date,
        run_id=None,
        experiment=None,
        hidden=None,
        seed=0,
        n_train=None,
        train_config=None,
        input_space=LOG_PRICE,
        threads=1,
    ):
        """Static hedge portfolio of the network at date index 'date', from an
        archived run or from a fresh training run of the experiment.
        """
        if run_id is not None:
            result = self._get_archive().get_run(run_id)
        else:
            _, model, schedule, spec = self._experiment(**experiment)
            result = rlnn_backward(
                model,
                schedule,
                spec,
                n_train,
                hidden,
                train_config,
                seed,
                input_space=input_space,
                threads=threads,
            )

        if date not in result.nets:
            raise exceptions.InvalidRequest(
                f"Date index must be between 1 and {result.schedule.n_dates}."
            )
        port = extract_portfolio(
            result.nets[date], result.schedule.times[date], result.scale
        )
        return {"portfolio": portfolio_rows(port), "dim": port.dim}

    @staticmethod
    def _selftest():
        checks = [
            {"name": name, "passed": passed, "detail": detail}
            for name, passed, detail in run_checks()
        ]
        failed = [c["name"] for c in checks if not c["passed"]]
        if failed:
            return {
                "error": f"{len(failed)} of {len(checks)} checks failed: "
                + ", ".join(failed)
            }
        return {"checks": checks}
