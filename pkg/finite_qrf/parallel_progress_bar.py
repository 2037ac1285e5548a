from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

from joblib import Parallel, delayed
from tqdm.asyncio import tqdm

_Result = TypeVar("_Result")


class ProgressParallel(Parallel):
    """
    Runs the checks of a scenario through joblib and counts the completed ones in a tqdm progress bar.
    """

    def __init__(self, show_progress: bool = True, total: Optional[int] = None, desc: str = "checks", **kwargs):
        """
        :param show_progress: Set to false to run without a progress bar.
        :param total: (Optional) the number of checks; taken from the dispatched tasks when missing.
        :param desc: The label shown in front of the progress bar, usually the scenario name.
        :param kwargs: Keyword arguments for joblib.Parallel, e.g. n_jobs and backend.
        """
        self.show_progress = show_progress
        self.bar_options: Dict[str, Any] = {"total": total, "desc": desc, "unit": "check"}
        super().__init__(**kwargs)

    def __call__(self, iterable):
        with tqdm(disable=not self.show_progress, **self.bar_options) as self._bar:
            return super().__call__(iterable)

    def print_progress(self):
        # Called by joblib whenever a batch completes.
        if self._bar.total is None:
            self._bar.total = self.n_dispatched_tasks
        self._bar.n = self.n_completed_tasks
        self._bar.refresh()


def run_in_order(task: Callable[..., _Result], arguments: Sequence[tuple], n_jobs: int = 1,
                 backend: str = "threading", show_progress: bool = False, desc: str = "checks") -> List[_Result]:
    """
    Runs task(*args) for every argument tuple and returns the results in the order of the arguments.
    """
    parallel = ProgressParallel(show_progress=show_progress, total=len(arguments), desc=desc, n_jobs=n_jobs,
                                backend=backend)
    return list(parallel(delayed(task)(*args) for args in arguments))
