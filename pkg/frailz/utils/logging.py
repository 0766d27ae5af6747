import logging
import sys

HANDLER_NAME = "frailz-stderr"
LOG_FORMAT = "%(asctime)s %(levelname).1s [%(name)s] %(message)s"
# fold fits and residual replicates log from pool threads
DEBUG_FORMAT = "%(asctime)s %(levelname).1s [%(name)s/%(threadName)s] %(message)s"


def _replace_handler(logger: logging.Logger, handler: logging.Handler) -> None:
    for old in [h for h in logger.handlers if h.get_name() == HANDLER_NAME]:
        logger.removeHandler(old)
    logger.addHandler(handler)


def configure_logging(debug: bool = False, quiet: bool = False) -> logging.Logger:
    """
    Attach one stderr handler to the ``frailz`` logger and set its level.

    quiet -> WARNING and up
    debug -> DEBUG, with the thread name in each line
    default -> INFO

    Repeated calls swap the handler rather than adding another. Python warnings
    (scipy optimizer, numpy floating point) go to the same stream.
    """
    level = logging.WARNING if quiet else (logging.DEBUG if debug else logging.INFO)
    handler = logging.StreamHandler(sys.stderr)
    handler.set_name(HANDLER_NAME)
    handler.setFormatter(
        logging.Formatter(DEBUG_FORMAT if debug else LOG_FORMAT, datefmt="%H:%M:%S")
    )

    logger = logging.getLogger("frailz")
    _replace_handler(logger, handler)
    logger.setLevel(level)

    logging.captureWarnings(True)
    warnings_logger = logging.getLogger("py.warnings")
    _replace_handler(warnings_logger, handler)
    warnings_logger.setLevel(logging.WARNING)

    # matplotlib logs font discovery at DEBUG
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    return logger
