from __future__ import annotations

import sys

import pytest

from chemopattern import ModelParams, cubic_coefficients, lambda_critical, make_critical_geometry


@pytest.fixture(scope="session")
def bench():
    """The balanced degenerate critical point: mu = 8*alpha = 8 on the (1, 1)
    resonant rectangle, where lambda_c = 18 and the quadratic coefficient
    vanishes.  Most closed-form expectations in the suite are frozen here."""
    p = ModelParams(mu=8.0, alpha=1.0, lam=18.0)
    g = make_critical_geometry(1, 1, p)
    crit = lambda_critical(p, g, k_max=16)
    rc = cubic_coefficients(p, g, 1, 1)
    return p, g, crit, rc


#: pass/fail lines collected by the acceptance suite; echoed in the final
#: terminal summary so they are visible regardless of output capturing
acceptance_log: list[str] = []


def announce(text: str) -> None:
    """Write a line to the real stdout, bypassing pytest capture, so the
    acceptance pass/fail lines always appear in the console log."""
    sys.__stdout__.write(text + "\n")
    sys.__stdout__.flush()
    acceptance_log.append(text)


def pytest_terminal_summary(terminalreporter):
    if acceptance_log:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log:
            terminalreporter.write_line(line)
