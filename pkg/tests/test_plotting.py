import pytest

from ensemble_su2.analysis import theorem1_sweep
from ensemble_su2.plotting import plot_bump, plot_convergence, plot_final_errors, plot_populations, plot_sweep
from ensemble_su2.schedule import build_theorem1
from ensemble_su2.simulator import SimConfig, ensemble_propagate


@pytest.fixture(scope="module")
def result(half_pi):
    sched = build_theorem1(half_pi, 0.1, 3)
    return ensemble_propagate(sched, SimConfig((0.6, 0.8), record_stride=100), workers=1)


@pytest.mark.parametrize("fn", [plot_populations, plot_convergence, plot_final_errors])
def test_result_figures_are_deterministic_svg(result, tmp_path, fn):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    fn(result, a)
    fn(result, b)
    text = a.read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text
    assert a.read_bytes() == b.read_bytes()


def test_sweep_and_bump_figures(half_pi, tmp_path):
    rep = theorem1_sweep(half_pi, [0.1], [2, 4], [0.7])
    plot_sweep(rep, tmp_path / "sweep.svg")
    plot_bump(half_pi, tmp_path / "bump.svg")
    assert (tmp_path / "sweep.svg").stat().st_size > 1000
    assert (tmp_path / "bump.svg").stat().st_size > 1000
