import argparse

from frailz.constants import CV_PATTERN, ROWS_PATTERN, THETA_PATTERN, VERSION


# Argument parsing setup
def cv_type(s: str) -> str:
    """
    argparse “type” function: returns the normalised regime string if it
    matches, otherwise raises ArgumentTypeError.
    """
    value = s.strip().lower()
    if not CV_PATTERN.fullmatch(value):
        msg = f"invalid CV regime {s!r}; must be none, nocv, loocv or kfold:K, e.g. kfold:10"
        raise argparse.ArgumentTypeError(msg)
    if value.startswith("kfold:") and int(value.split(":", 1)[1]) < 2:
        raise argparse.ArgumentTypeError(f"invalid CV regime {s!r}; K must be at least 2")
    return value


def theta_type(s: str) -> str:
    value = s.strip().lower()
    if not THETA_PATTERN.fullmatch(value):
        msg = f"invalid theta mode {s!r}; must be profile, none or fixed:<theta>, e.g. fixed:0.5"
        raise argparse.ArgumentTypeError(msg)
    return value


def rows_type(s: str) -> str:
    value = s.replace(" ", "")
    if not ROWS_PATTERN.fullmatch(value):
        raise argparse.ArgumentTypeError(
            f"invalid row list {s!r}; must be comma-separated row ids, e.g. 20,42"
        )
    return value


def positive_int(s: str) -> int:
    try:
        value = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"{s!r} must be >= 1")
    return value


def categorical_type(s: str) -> tuple:
    """NAME=LEVEL1,LEVEL2,... -> (name, (levels...)); the first level is the reference."""
    name, sep, levels = s.partition("=")
    parts = tuple(p.strip() for p in levels.split(",") if p.strip())
    if not sep or not name.strip() or len(parts) < 2:
        raise argparse.ArgumentTypeError(
            f"invalid categorical {s!r}; must be NAME=LEVEL1,LEVEL2[,...]"
        )
    return name.strip(), parts


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("data")
    group.add_argument(
        "--data",
        "-d",
        metavar="CSV",
        help="Input CSV; the embedded kidney data is used when omitted",
    )
    group.add_argument("--time-col", default="time", help="Column holding follow-up times")
    group.add_argument("--status-col", default="status", help="Column holding 0/1 event flags")
    group.add_argument("--cluster-col", default="cluster", help="Column holding cluster labels")
    group.add_argument(
        "--row-id-col", default=None, help="Column holding row ids (default: file row numbers)"
    )
    group.add_argument(
        "--numeric",
        metavar="NAME",
        action="append",
        default=[],
        help="Numeric covariate column (repeatable)",
    )
    group.add_argument(
        "--categorical",
        metavar="NAME=L1,L2",
        type=categorical_type,
        action="append",
        default=[],
        help="Categorical covariate with its levels, reference first (repeatable)",
    )
    group.add_argument(
        "--drop-rows", type=rows_type, default=None, help="Row ids to leave out, e.g. 20,42"
    )


def _add_fit_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model")
    group.add_argument(
        "--theta",
        type=theta_type,
        default=None,
        help="Frailty variance: profile (default), none, or fixed:<theta>",
    )
    group.add_argument(
        "--method",
        choices=("newton", "em"),
        default="newton",
        help="Fixed-theta solver",
    )


def get_arg_parser() -> argparse.ArgumentParser:
    """
    Create and return the argument parser for the frailz command line.
    """
    parser = argparse.ArgumentParser(
        prog="frailz",
        description="Shared gamma frailty Cox models and cross-validatory Z-residual diagnostics.",
    )
    parser.add_argument("--seed", type=int, default=None, help="Master seed for all randomness")
    parser.add_argument(
        "--threads", type=positive_int, default=None, help="Worker threads (env FRAILZ_THREADS)"
    )
    parser.add_argument("--config", metavar="TOML", default=None, help="Configuration file")
    parser.add_argument("--out", "-o", default=".", help="Output directory")
    parser.add_argument(
        "--quiet", "-q", action="store_true", help="Run in quiet mode (warnings and errors only)"
    )
    parser.add_argument("--debug", action="store_true")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")

    commands = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    fit = commands.add_parser("fit", help="Fit the frailty model and print a coefficient table")
    _add_data_arguments(fit)
    _add_fit_arguments(fit)

    zresid = commands.add_parser("zresid", help="Compute Z-residuals and their diagnostics")
    _add_data_arguments(zresid)
    _add_fit_arguments(zresid)
    zresid.add_argument(
        "--cv", type=cv_type, default="none", help="Regime: none, kfold:K or loocv"
    )
    zresid.add_argument(
        "--replicates",
        "-r",
        type=positive_int,
        default=None,
        help="Seeds for the replicated Shapiro-Wilk p-values",
    )
    zresid.add_argument(
        "--threshold", type=float, default=None, help="Outlier threshold on |z| (default 3)"
    )

    simulate = commands.add_parser("simulate", help="Run a simulation study from a TOML config")
    simulate.add_argument(
        "--replicates", "-r", type=positive_int, default=None, help="Override the config"
    )

    commands.add_parser("dataset", help="Export the embedded kidney infection data")

    folds = commands.add_parser("folds", help="Emit a fold plan")
    _add_data_arguments(folds)
    folds.add_argument("--cv", type=cv_type, default="kfold:10", help="kfold:K or loocv")
    return parser
