DEFAULT_TOLERANCE = 1e-10
DEFAULT_DIMENSION_CAP = 4096
DEFAULT_EIGEN_DIMENSION_LIMIT = 64
DEFAULT_SEED = 42


class ToolkitOptions:
    """
    A class for all options which can be set when running scenario checks.
    """

    def __init__(
        self,
        tolerance: float = DEFAULT_TOLERANCE,
        dimension_cap: int = DEFAULT_DIMENSION_CAP,
        eigen_dimension_limit: int = DEFAULT_EIGEN_DIMENSION_LIMIT,
        seed: int = DEFAULT_SEED,
        n_jobs: int = 1,
        parallel_backend: str = "threading",
        show_progress: bool = False,
        include_timings: bool = False,
    ):
        """
        Initializes the toolkit options.
        :param tolerance: Absolute tolerance used to decide whether an identity holds.
        :param dimension_cap: Largest Hilbert space dimension a tensor product may produce.
        :param eigen_dimension_limit: Largest dimension for which spectra are checked by eigenvalues. Above it
            only the Gershgorin bound is used.
        :param seed: Seed for the random inputs drawn by checks.
        :param n_jobs: The number of jobs used to run checks.
        :param parallel_backend: The joblib backend used when n_jobs > 1.
        :param show_progress: Set to true to show a progress bar while running checks.
        :param include_timings: Set to true to write check runtimes into reports (makes reports non-reproducible).
        """
        if tolerance <= 0:
            raise ValueError("Tolerance must be positive.")
        self.tolerance = tolerance
        self.dimension_cap = dimension_cap
        self.eigen_dimension_limit = eigen_dimension_limit
        self.seed = seed
        self.n_jobs = n_jobs
        self.parallel_backend = parallel_backend
        self.show_progress = show_progress
        self.include_timings = include_timings
