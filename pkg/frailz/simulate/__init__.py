from frailz.simulate.ScenarioConfig import (
    Contamination,
    ScenarioConfig,
    SimulationPlan,
    load_simulation_config,
    simulation_plan_from_dict,
)
from frailz.simulate.generators import (
    SimulatedDataset,
    calibrate_censoring,
    gen_nonlinear,
    gen_outlier_scenario,
    generate,
)
from frailz.simulate.experiment import ExperimentTable, combine, run_experiment, write_table

__all__ = [
    "Contamination",
    "ScenarioConfig",
    "SimulationPlan",
    "load_simulation_config",
    "simulation_plan_from_dict",
    "SimulatedDataset",
    "calibrate_censoring",
    "gen_nonlinear",
    "gen_outlier_scenario",
    "generate",
    "ExperimentTable",
    "combine",
    "run_experiment",
    "write_table",
]
