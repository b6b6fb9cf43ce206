"""Clients submitting requests to an in-process engine and routing the
responses to output sinks."""
import traceback
from collections import namedtuple

import rlnn

from . import engine, exceptions

logger = rlnn.init_logger(__name__)


def create(*, configuration, sinks):
    """Return the client for 'configuration'. Pricing always runs in-process."""
    return LocalEngineClient(configuration=configuration, sinks=sinks)


class Client:
    """Base client. Subclasses provide a 'proxy' with a 'run(command, **params)'
    method returning the engine response.
    """

    # info receives response dicts, error receives exceptions or messages
    Sinks = namedtuple("Sinks", ["info", "error"])

    def __init__(self, *, configuration, sinks):
        self.configuration = configuration
        self.sinks = sinks
        self.proxy = None
        self.latest_exception = None

    def safely_run(self, command, **params):
        """Send 'command' with 'params' to the proxy and pass the response to
        the info sink. Failed requests go to the error sink, and the exception
        is kept as 'latest_exception'.

        :return: whether the request succeeded
        """
        try:
            response = self.proxy.run(command, **params)
        except (exceptions.InvalidRequest, exceptions.CommunicationError) as e:
            self.latest_exception = e
            self.sinks.error(e)
            return False
        except Exception as e:
            self.latest_exception = e
            self.sinks.error(f"Unexpected error: {traceback.format_exc()}")
            return False

        self.latest_exception = None
        self.sinks.info(response)
        return True

    def shutdown(self):
        pass


class LocalProxy(engine.Engine):
    """Engine whose error responses are raised as exceptions."""

    def run(self, command, **kwargs):
        """
        :raises: InvalidRequest if the engine answers with an error
                 CommunicationError if the engine fails unexpectedly
        """
        try:
            response = super().run(command, **kwargs)
        except Exception:
            logger.exception(f"Engine failed on '{command}'")
            raise exceptions.CommunicationError(f"Engine failed on '{command}'")

        error = response.get("error")
        if error is not None:
            raise exceptions.InvalidRequest(f"Invalid request: {error}")
        return response


class LocalEngineClient(Client):
    """Client owning a LocalProxy whose archive lives in the data directory."""

    def __init__(self, *, configuration, sinks):
        super().__init__(configuration=configuration, sinks=sinks)
        self.proxy = LocalProxy(data_dir=rlnn.DATA_DIR)

    def shutdown(self):
        """Close the archive."""
        self.proxy.run("stop")
