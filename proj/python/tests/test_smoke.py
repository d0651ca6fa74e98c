import math
from pathlib import Path

import pytest

import htail

FIXTURES = Path(__file__).resolve().parents[2] / "fixtures"


def test_pareto_tail():
    d = htail.Distribution.pareto(2.0, 1.0)
    assert d.tail(10.0) == 0.01
    assert d.tail_quantile(0.5) == pytest.approx(math.sqrt(2.0))


def test_invalid_parameters():
    with pytest.raises(ValueError):
        htail.Distribution.pareto(-1.0, 1.0)


def test_oracle_and_big_jump():
    p = htail.WeightedSum([htail.Distribution.pareto(1.0)] * 2, [1.0, 1.0])
    exact = 2 / 10 + 2 * math.log(9) / 100
    oracle = htail.convolution_oracle(p, 10.0)
    assert abs(oracle.value - exact) <= oracle.error_bound
    bj = htail.big_jump_mc(p, 10.0, samples=100_000, seed=5)
    assert abs(bj.value - exact) <= 3 * bj.std_error
    assert htail.asymptotic_approx(p, 100.0) == pytest.approx(0.02)


def test_big_jump_rejects_dependence():
    p = htail.WeightedSum([htail.Distribution.pareto(2.0)] * 2, [1.0, 1.0], htail.Dependence.fgm(0.5))
    with pytest.raises(ValueError, match="estimator-requires-independence"):
        htail.big_jump_mc(p, 10.0, samples=100)
    assert 0 <= htail.crude_mc(p, 10.0, functional="M", samples=10_000).value <= 1


def test_construct_h():
    h = htail.construct_h(htail.Distribution.pareto(1.0), count=2)
    assert h.knots == [2.0, 12.0]
    assert h(7.0) == 2.5
    with pytest.raises(htail.NotLongTailedError):
        htail.construct_h(htail.Distribution.exponential(1.0), count=3)


def test_ruin():
    c = htail.discount_factors([0.05, 0.05])
    assert c == pytest.approx([1 / 1.05, 1 / 1.05**2])
    losses = [htail.Distribution.pareto(2.0)] * 2
    assert htail.ruin_asymptotic(100.0, [0.05, 0.05], losses) == pytest.approx(1.729732e-4, rel=1e-6)
    psi = htail.simulate_ruin(100.0, [0.05, 0.05], losses, samples=200_000)
    assert psi.method == "big_jump_mc"
    assert abs(psi.value / 1.729732e-4 - 1) < 0.1


def test_cli_run(tmp_path):
    code, artifacts, message = htail.run(
        "equivalence", str(FIXTURES / "pareto2_n2.json"), str(tmp_path), seed=7, samples=100_000
    )
    assert code in (0, 2), message
    assert len(artifacts) == 2
    assert Path(artifacts[0]).read_text().startswith("# htail ")
