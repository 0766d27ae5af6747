# ——— Standard library ———
import os
import logging
from typing import Callable, Dict, List, Optional, Sequence

# ——— Third party ———
import pandas as pd

# ——— Local ———
from frailz.crossval.FoldPlan import FoldPlan
from frailz.crossval.cv_pipeline import cv_predictive
from frailz.crossval.fold_logic import make_kfold, make_loocv
from frailz.data.CovariateSchema import CovariateSchema, CovariateSpec
from frailz.data.SurvivalDataset import SurvivalDataset, censoring_rate
from frailz.data.csv_io import load_csv, write_csv
from frailz.data.kidney import KIDNEY_COLUMNS, kidney_dataset
from frailz.diagnostics.DiagnosticsReport import diagnose, outlier_frequency, replicated_sw
from frailz.errors import ConfigError, ConvergenceError, ValidationError
from frailz.model.FrailtyFit import FrailtyFit
from frailz.model.FrailtyFitter import FrailtyFitter
from frailz.residuals.PredictiveSurvival import PredictiveSurvival, predictive_nocv
from frailz.residuals.ResidualSet import Regime
from frailz.simulate.experiment import METRICS, combine, run_experiment, write_table
from frailz.simulate.ScenarioConfig import AMBIENT_KEYS, simulation_plan_from_dict
from frailz.utils.Defaults import Defaults, load_config
from frailz.utils.manifest import RunManifest
from frailz.utils.utils import derive_seed, ensure_dir, parse_rows, write_json

logger = logging.getLogger("frailz.main")

# Sub-seed stream for fold assignment, shared by `zresid` and `folds`.
FOLD_STREAM = 1

Handler = Callable[[object, Defaults, RunManifest, str], List[str]]


def main_with_args(args, argv: Optional[Sequence[str]] = None) -> int:
    config = load_config(args.config)
    defaults = Defaults(args=args, config=config)
    out_dir = ensure_dir(args.out)

    manifest = RunManifest(argv=list(argv or []))
    manifest.config = {
        "command": args.command,
        "arguments": {k: v for k, v in sorted(vars(args).items())},
        "config_file": config,
    }
    if args.config:
        manifest.add_input(args.config)

    outputs = COMMANDS[args.command](args, defaults, manifest, out_dir)
    manifest.add_outputs(outputs)
    path = manifest.write(out_dir)
    logger.info("Wrote %d file(s) and %s to %s", len(outputs), os.path.basename(path), out_dir)
    return 0


# ——— Shared helpers ———

def _schema(args) -> CovariateSchema:
    specs = [CovariateSpec.numeric(name) for name in args.numeric]
    specs += [CovariateSpec.categorical(name, levels) for name, levels in args.categorical]
    return CovariateSchema(tuple(specs))


def _load_data(args, manifest: RunManifest) -> SurvivalDataset:
    if args.data is None:
        data = kidney_dataset()
        manifest.inputs["kidney (embedded)"] = data.fingerprint()
        source = "embedded kidney data"
    else:
        column_map = {
            "time": args.time_col,
            "status": args.status_col,
            "cluster": args.cluster_col,
        }
        if args.row_id_col:
            column_map["row_id"] = args.row_id_col
        try:
            data = load_csv(args.data, _schema(args), column_map)
        except FileNotFoundError:
            raise ValidationError(f"data file not found: {args.data}") from None
        manifest.add_input(args.data)
        source = args.data
    if args.drop_rows:
        data = data.drop_rows(parse_rows(args.drop_rows))
    logger.info(
        "Loaded %s: %d rows, %d clusters, %d events (%.0f%% censored)",
        source, data.n, data.g, data.n_events, 100 * censoring_rate(data),
    )
    return data


def _fit(data: SurvivalDataset, defaults: Defaults, method: str) -> FrailtyFit:
    fit = FrailtyFitter(defaults.theta_mode, method=method).fit(data)
    if not fit.converged:
        raise ConvergenceError(
            f"fit did not converge after {fit.iterations} iterations (theta={fit.theta:.4g})"
        )
    return fit


def _fold_plan(data: SurvivalDataset, regime: Regime, seed: int) -> FoldPlan:
    if regime.kind == "loocv":
        return make_loocv(data)
    if regime.kind == "kfold":
        return make_kfold(data, regime.k, derive_seed(seed, FOLD_STREAM))
    return FoldPlan.resubstitution(data)


# ——— Commands ———

def cmd_fit(args, defaults: Defaults, manifest: RunManifest, out_dir: str) -> List[str]:
    data = _load_data(args, manifest)
    fit = _fit(data, defaults, args.method)
    print(fit.summary())

    fit_path = os.path.join(out_dir, "fit.json")
    table_path = os.path.join(out_dir, "coefficients.csv")
    write_json(fit.to_dict(), fit_path)
    fit.summary_frame().to_csv(table_path, index=False, lineterminator="\n")
    return [fit_path, table_path]


def cmd_zresid(args, defaults: Defaults, manifest: RunManifest, out_dir: str) -> List[str]:
    from frailz.utils import plots

    data = _load_data(args, manifest)
    seed, threads, threshold = defaults.seed, defaults.threads, defaults.threshold
    regime = Regime.parse(args.cv)
    manifest.seeds = {"seed": seed}

    full_fit = _fit(data, defaults, args.method)
    predictive: PredictiveSurvival
    if regime.is_cv:
        plan = _fold_plan(data, regime, seed)
        manifest.seeds["fold_seed"] = plan.seed
        if plan.n_na:
            logger.info("%d observation(s) cannot be held out and stay NA", plan.n_na)
        predictive = cv_predictive(
            data,
            plan,
            defaults.theta_mode,
            method=args.method,
            init=full_fit,
            workers=threads,
            progress=defaults.progress,
        )
    else:
        predictive = predictive_nocv(full_fit, data)

    residuals = predictive.residuals(seed)
    seeds = [seed + r for r in range(defaults.replicates)]
    manifest.seeds["replicate_seeds"] = [seeds[0], seeds[-1]]
    p_values = replicated_sw(predictive, seeds=seeds, workers=threads, progress=defaults.progress)
    report = diagnose(residuals, threshold, replicated_p=p_values)
    frequency = outlier_frequency(
        predictive, seeds=seeds, threshold=threshold, workers=threads, progress=defaults.progress
    )

    def out(name: str) -> str:
        return os.path.join(out_dir, name)

    written = [out("residuals.csv"), out("diagnostics.json"), out("outlier_frequency.csv")]
    residuals.to_csv(written[0])
    report.to_json(written[1])
    frequency.to_csv(written[2], index=False, lineterminator="\n")
    written += plots.residual_scatter(residuals, out("scatter.svg"), threshold)
    if report.qq.x.size:
        written += plots.qq_plot(report.qq, out("qq.svg"), f"{regime.label} Z-residuals")
    written += plots.sw_histogram(p_values, out("replicated_sw.svg"))
    if report.cs_chf.x.size:
        written += plots.cs_chf_plot(report.cs_chf, out("cs_chf.svg"))

    print(f"{regime.label} Z-residuals, seed {seed}: {report.n_used} of {len(residuals)} used")
    print(f"  Shapiro-Wilk W = {report.sw_stat:.4f}, p = {report.sw_p:.4g}")
    print(f"  tail probability (|z| > {threshold:g}) = {report.tail_prob:.4f}")
    print(f"  flagged rows: {report.outlier_rows or 'none'}")
    print(
        f"  SW rejection rate over {len(seeds)} seeds: {report.replicated_rejection_rate:.3f}"
    )
    if report.failed_folds:
        logger.warning("%d fold(s) failed; their observations are NA", report.failed_folds)
    return written


def cmd_simulate(args, defaults: Defaults, manifest: RunManifest, out_dir: str) -> List[str]:
    from frailz.utils import plots

    if not args.config:
        raise ConfigError("simulate needs --config <file.toml>")
    plan = simulation_plan_from_dict(
        {k: v for k, v in defaults.config.items() if k not in AMBIENT_KEYS}
    )
    base = plan.base.with_(
        seed=defaults.seed,
        replicates=args.replicates or plan.base.replicates,
    )
    manifest.seeds = {"seed": base.seed}
    manifest.config["resolved"] = {**plan.to_dict(), **base.to_dict()}

    tables = []
    for config in (base.with_(m=m) for m in plan.cluster_sizes):
        tables.append(
            run_experiment(
                config,
                plan.regimes,
                plan.models,
                plan.theta_mode,
                method=plan.method,
                workers=defaults.threads,
                progress=defaults.progress,
            )
        )

    summary = combine(tables)
    replicates = pd.concat(
        [t.replicates_frame().assign(n=t.config.n) for t in tables], ignore_index=True
    )
    written = [os.path.join(out_dir, "experiment.csv"), os.path.join(out_dir, "replicates.csv")]
    write_table(summary, written[0])
    write_table(replicates, written[1])
    for metric in (*METRICS, "auc"):
        if (summary["metric"] == metric).any():
            written += plots.experiment_curve(
                summary, metric, os.path.join(out_dir, f"{metric}.svg")
            )

    rejection = summary[summary["metric"] == "rejection_rate"]
    for row in rejection.itertuples(index=False):
        print(f"n={row.n:<5} {row.regime:<8} {row.model:<13} rejection rate {row.value:.3f}")
    return written


def cmd_dataset(args, defaults: Defaults, manifest: RunManifest, out_dir: str) -> List[str]:
    data = kidney_dataset()
    path = os.path.join(out_dir, "kidney.csv")
    write_csv(data, path, KIDNEY_COLUMNS, include_row_id=False)
    manifest.inputs["kidney (embedded)"] = data.fingerprint()
    logger.info("Kidney data written to %s", path)
    return [path]


def cmd_folds(args, defaults: Defaults, manifest: RunManifest, out_dir: str) -> List[str]:
    data = _load_data(args, manifest)
    regime = Regime.parse(args.cv)
    if not regime.is_cv:
        raise ValidationError("folds needs --cv kfold:K or --cv loocv")
    plan = _fold_plan(data, regime, defaults.seed)
    manifest.seeds = {"seed": defaults.seed, "fold_seed": plan.seed}
    path = os.path.join(out_dir, "folds.csv")
    plan.to_csv(path)
    logger.info(
        "%s plan: %d fold(s), %d NA observation(s)", regime.label, len(list(plan.folds())), plan.n_na
    )
    return [path]


COMMANDS: Dict[str, Handler] = {
    "fit": cmd_fit,
    "zresid": cmd_zresid,
    "simulate": cmd_simulate,
    "dataset": cmd_dataset,
    "folds": cmd_folds,
}
