import functools

import pytest

from fractal_ac import cli, complexnet

ACCEPTANCE_LINES = []


def pytest_addoption(parser):
    parser.addoption("--regen-golden", action="store_true", default=False,
                     help="rewrite tests/golden/*.csv from the current code")


@pytest.fixture
def regen_golden(request):
    return request.config.getoption("--regen-golden")


def energy_gap(graph, sol):
    edge_sum = complexnet.power_dissipation(graph, sol)
    inflow = complexnet.boundary_input_power(sol)
    return edge_sum, inflow, abs(edge_sum - inflow) / max(1.0, abs(inflow))


def _checked(solve):
    @functools.wraps(solve)
    def wrapper(graph, boundary):
        sol = solve(graph, boundary)
        edge_sum, inflow, gap = energy_gap(graph, sol)
        assert gap <= 1e-10, f"energy balance violated: {edge_sum} vs {inflow}"
        if all(e.z.real == 0 for e in graph.edges):
            assert abs(edge_sum) <= 1e-12 and abs(inflow) <= 1e-12
        return sol
    return wrapper


@pytest.fixture(autouse=True)
def energy_balance_guard(monkeypatch):
    """Every Dirichlet solve made anywhere in the suite must balance power."""
    raw = complexnet.solve_dirichlet
    monkeypatch.setattr(complexnet, "solve_dirichlet", _checked(raw))
    monkeypatch.setattr(cli, "solve_dirichlet", _checked(raw))


@pytest.fixture
def report():
    def _report(name, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{name:<42} {'PASS' if passed else 'FAIL'}  {detail}")
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
