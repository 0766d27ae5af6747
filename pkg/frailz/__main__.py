# -----------------------------------------------------------------------------
# frailz: shared gamma frailty Cox models with cross-validatory Z-residuals.
#
# License:     MIT License
#
# Description:
#   Fits shared gamma frailty proportional-hazards models to clustered,
#   right-censored survival data, computes No-CV, K-fold and LOOCV Z-residuals
#   with Shapiro-Wilk, tail-probability and Cox-Snell diagnostics, and runs the
#   simulation studies that compare the three residual regimes.
#
# Usage:
#   frailz [--seed N] [--out DIR] <fit|zresid|simulate|dataset|folds> [options]
#
# Exit codes:
#   0 success, 2 invalid input or config, 3 fit did not converge, 4 internal error
#
# Dependencies:
#   - Python 3.11+
#   - numpy, scipy, pandas
#   - matplotlib
#   - tqdm
#
# -----------------------------------------------------------------------------

import sys
import logging
from typing import Optional, Sequence

from frailz.cli import main_with_args
from frailz.errors import FrailzError
from frailz.utils.argparse_setup import get_arg_parser
from frailz.utils.logging import configure_logging

INTERNAL_ERROR = 4


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console script / module entry point. Returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = get_arg_parser().parse_args(argv)
    configure_logging(debug=getattr(args, "debug", False), quiet=getattr(args, "quiet", False))
    logger = logging.getLogger("frailz")
    try:
        return main_with_args(args, argv)
    except FrailzError as e:
        logger.error("Fatal: %s", e)
        # No traceback shown unless debug enabled
        if getattr(args, "debug", False):
            raise
        return e.exit_code
    except Exception as e:
        logger.error("Fatal: %s", e)
        if getattr(args, "debug", False):
            raise
        return INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
