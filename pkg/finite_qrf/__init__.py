from pathlib import Path
from typing import Optional, Union

from finite_qrf.checks import check_registry, run_scenario
from finite_qrf.names import report_format_json, toolkit_version
from finite_qrf.options import DEFAULT_SEED, ToolkitOptions
from finite_qrf.report import Report, emit_report
from finite_qrf.scenario import Scenario, load_scenario

__version__ = toolkit_version
__all__ = ["Report", "Scenario", "ToolkitOptions", "check_registry", "emit_report", "load_scenario", "run_scenario",
           "verify_scenario"]


def verify_scenario(path: Union[str, Path],
                    tolerance: Optional[float] = None,
                    seed: int = DEFAULT_SEED,
                    n_jobs: int = 1,
                    parallel_backend: str = "threading",
                    show_progress: bool = False,
                    include_timings: bool = False,
                    report_path: Optional[Union[str, Path]] = None,
                    report_format: str = report_format_json) -> Report:
    # Load and validate all declarations, then run the declared checks
    scenario = load_scenario(path)
    options = ToolkitOptions(tolerance=tolerance if tolerance is not None else scenario.tolerance,
                             seed=seed,
                             n_jobs=n_jobs,
                             parallel_backend=parallel_backend,
                             show_progress=show_progress,
                             include_timings=include_timings)
    report = run_scenario(scenario, options)

    if report_path is not None:
        Path(report_path).write_bytes(emit_report(report, report_format))
    return report
