"""Archive of training runs, persisted in a TinyDB database."""
import os.path

from marshmallow import Schema, ValidationError, fields, validate
from tinydb import TinyDB, storages

from . import DEFAULT_ARCHIVE_NAME, exceptions, init_logger
from .pricer import RlnnResult, RlnnResultSchema

logger = init_logger(__name__)


class RunSchema(Schema):
    label = fields.String(required=True, validate=validate.Length(min=1))
    result = fields.Nested(RlnnResultSchema, required=True)


class TinyDbArchive:
    def __init__(self, name=None, data_dir=None, **kwargs):
        """Create an archive with a TinyDB database backend, identified by
        'name'. If 'data_dir' is given, the database storage type is JSON (the
        storage filepath is derived from the archive's name). Otherwise the data
        is stored in memory.
        Keyword args are passed to the TinyDB constructor.
        """
        self._name = name or DEFAULT_ARCHIVE_NAME

        if data_dir is None:
            args = []
            kwargs["storage"] = storages.MemoryStorage
        else:
            args = [os.path.join(data_dir, f"{self.name}.json")]
            kwargs["storage"] = storages.JSONStorage

        self._db = TinyDB(*args, **kwargs)

    @property
    def name(self):
        return self._name

    @staticmethod
    def _validate_run(document):
        """Validate a run document by loading it.

        :raise: ArchiveValidationFailure naming the invalid fields
        """
        try:
            RunSchema().load(document)
        except ValidationError as e:
            infos = [f"{field}: {messages}" for field, messages in e.messages.items()]
            raise exceptions.ArchiveValidationFailure(
                "Invalid run document:\n{}".format("\n".join(infos))
            )

    def add_run(self, result, label):
        """Store a training run.

        :type result: RlnnResult
        :param label: name of the experiment (parameter set or 'custom')
        :raise: ArchiveValidationFailure
        :return: TinyDB ID of the new run (int)
        """
        document = {"label": label, "result": result.to_dict()}
        self._validate_run(document)
        run_id = self._db.insert(document)
        logger.info(f"Archived run {run_id} ({label}, p={result.hidden})")
        return run_id

    def get_run(self, run_id):
        """Restore the training run stored under 'run_id'.

        :raise: RunNotFound
        :return: RlnnResult
        """
        document = self._db.get(doc_id=int(run_id))
        if document is None:
            raise exceptions.RunNotFound(f"Run {run_id} not found.")
        return RlnnResult.from_dict(document["result"])

    def get_label(self, run_id):
        document = self._db.get(doc_id=int(run_id))
        if document is None:
            raise exceptions.RunNotFound(f"Run {run_id} not found.")
        return document["label"]

    def get_runs(self):
        """Summaries of all stored runs, ordered by ID.

        :return: list of dict
        """
        runs = []
        for document in self._db.all():
            result = document["result"]
            runs.append(
                {
                    "id": document.doc_id,
                    "label": document["label"],
                    "kind": result["payoff"]["kind"],
                    "dim": len(result["model"]["spot"]),
                    "dates": len(result["schedule"]["times"]) - 1,
                    "hidden": result["hidden"],
                    "seed": result["seed"],
                    "direct": result["direct_estimate"],
                }
            )
        return sorted(runs, key=lambda r: r["id"])

    def close(self):
        """Close underlying database."""
        self._db.close()
