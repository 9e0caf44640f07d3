import numpy as np

from cheshire.model import ModelParams


def random_params(rng: np.random.Generator) -> ModelParams:
    """A valid parameter set spanning weak- and strong-measurement regimes."""
    Delta = float(10 ** rng.uniform(0, 3))
    delta = float(Delta * 10 ** rng.uniform(-2, 0.5))
    return ModelParams(
        Delta=Delta,
        delta=delta,
        eps_c=float(rng.uniform(0.0, 1.0)),
        eps_t=float(rng.uniform(0.0, 1.0)),
        u=float(rng.uniform(-2.0, 2.0) * Delta),
        v=float(rng.uniform(-2.0, 2.0) * Delta),
        p=float(rng.uniform(0.05, 0.95)),
    )


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
