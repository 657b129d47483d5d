import numpy as np
import pytest
from hypothesis import given, strategies as st

from gptctx.core import make_simplex, minimal_tensor
from gptctx.measures import (
    classical_excess,
    compare,
    composite_certificate,
    noisy_bit_pom_formula,
    pom_excess_witness,
    pom_value,
    pom_yield,
)
from gptctx.optimize.seesaw import SeesawConfig, seesaw_excess
from gptctx.simulation import compose, simplex_product_iso, tensor_with_classical, validate_simulation
from gptctx.zoo import make_noisy_bit, make_square_gbit, make_toy_bit

FAST = SeesawConfig(restarts=4, max_iters=60)


class TestClassicalExcess:
    def test_trit_embeds_in_itself(self):
        sweep = classical_excess(make_simplex(3), 4)
        assert [e.m for e in sweep.estimates] == [1, 2, 3, 4]
        assert sweep.upper_at(3) <= 1e-9 and sweep.upper_at(4) <= 1e-9
        assert sweep.stabilized_value <= 1e-9

    def test_toy_bit_reaches_zero_at_four(self):
        sweep = classical_excess(make_toy_bit(), 5)
        assert sweep.upper_at(4) <= 1e-6 and sweep.upper_at(5) <= 1e-6
        assert sweep.upper_at(1) == pytest.approx(0.5, abs=1e-7)

    def test_squit_lower_bound_in_every_row(self):
        sweep = classical_excess(make_square_gbit(), 3, FAST)
        for e in sweep.estimates:
            assert e.lower >= 0.25 - 1e-6
            assert e.lower <= e.upper + 1e-6
            assert 0 <= e.upper <= 1

    def test_upper_bounds_never_increase(self):
        uppers = [e.upper for e in classical_excess(make_square_gbit(), 4, FAST).estimates]
        assert all(b <= a + 1e-12 for a, b in zip(uppers, uppers[1:]))

    def test_stabilised_flag(self):
        sweep = classical_excess(make_simplex(2), 4, FAST)
        assert sweep.stabilized
        assert not classical_excess(make_simplex(2), 2, FAST).stabilized

    def test_rejects_empty_sweep(self):
        with pytest.raises(ValueError):
            classical_excess(make_simplex(2), 0)

    def test_certificates_back_the_numbers(self):
        for e in classical_excess(make_noisy_bit(0.2), 3, FAST).estimates:
            assert validate_simulation(e.certificate) == pytest.approx(e.upper, abs=1e-7)


class TestWitness:
    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_classical_systems_give_nothing(self, d):
        assert pom_excess_witness(make_simplex(d), 2, FAST) == 0.0

    def test_squit(self):
        assert pom_excess_witness(make_square_gbit(), 2, FAST) == pytest.approx(0.25, abs=1e-9)

    def test_noisy_bit(self):
        assert pom_excess_witness(make_noisy_bit(0.25), 2, FAST) == 0.0

    def test_needs_two_bits(self):
        with pytest.raises(ValueError):
            pom_excess_witness(make_simplex(2), 1)

    def test_three_bit_witness_stays_sound_for_classical_systems(self):
        assert pom_excess_witness(make_simplex(4), 3, FAST) <= 1e-7


class TestPomValue:
    @pytest.mark.parametrize("sys,n,expected", [
        (make_simplex(2), 2, 0.75),
        (make_noisy_bit(0.1), 2, 0.70),
        (make_noisy_bit(0.1), 3, 0.6333333333333333),
    ], ids=["bit", "noisy-2", "noisy-3"])
    def test_examples(self, sys, n, expected):
        assert pom_value(sys, n, FAST)[0] == pytest.approx(expected, abs=1e-6)

    @given(st.floats(0.01, 0.49))
    def test_noisy_bit_matches_formula(self, alpha):
        value, _ = pom_value(make_noisy_bit(alpha), 2, SeesawConfig(restarts=2, max_iters=30))
        assert value == pytest.approx(noisy_bit_pom_formula(alpha, 2), abs=1e-6)


class TestYield:
    def test_noisy_bit_recovers_classical_value(self):
        result = pom_yield(make_noisy_bit(0.25), 2, 3, FAST)
        assert result.value == pytest.approx(0.75, abs=1e-6)
        assert result.per_d[0][1] == pytest.approx(0.625, abs=1e-6)
        assert result.stabilized

    def test_bit(self):
        assert pom_yield(make_simplex(2), 2, 2, FAST).value == pytest.approx(0.75, abs=1e-6)

    def test_squit(self):
        assert pom_yield(make_square_gbit(), 2, 2, FAST).value == pytest.approx(1.0, abs=1e-9)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            pom_yield(make_simplex(2), 2, 0)


class TestCompare:
    def test_trit_below_bit(self):
        ev = compare(make_simplex(3), make_simplex(2), 2)
        assert ev.verdict == "holds" and ev.n_free == 2
        assert validate_simulation(ev.certificate) <= 1e-6

    @pytest.mark.parametrize("sys", [make_toy_bit(), make_square_gbit(), make_noisy_bit(0.3)], ids=lambda s: s.label)
    def test_reflexive(self, sys):
        ev = compare(sys, sys, 1, FAST)
        assert ev.verdict == "holds" and ev.n_free == 1

    def test_squit_above_bit(self):
        ev = compare(make_square_gbit(), make_simplex(2), 2, FAST)
        assert ev.verdict == "refuted"
        assert ev.lower_source == pytest.approx(0.25, abs=1e-9)
        assert ev.lower_source > ev.upper_target + 1e-3

    def test_inconclusive_when_nothing_separates(self):
        ev = compare(make_simplex(3), make_noisy_bit(0.25), 1, FAST)
        assert ev.verdict == "inconclusive"
        assert ev.to_dict()["verdict"] == "inconclusive"

    def test_composite_respect(self):
        first = compare(make_simplex(3), make_simplex(2), 2)
        second = compare(make_noisy_bit(0.25), make_square_gbit(), 1, FAST)
        cert = composite_certificate(first, second)
        assert cert.source.dim == 6
        assert cert.target.blocks.n == 2
        assert validate_simulation(cert) <= 2e-6

    def test_composite_needs_holds(self):
        refuted = compare(make_square_gbit(), make_simplex(2), 1, FAST)
        with pytest.raises(ValueError):
            composite_certificate(refuted, refuted)


class TestFormula:
    @pytest.mark.parametrize("alpha,n,expected", [(0.25, 2, 0.625), (0.5, 2, 0.5), (1e-12, 3, 2 / 3)])
    def test_values(self, alpha, n, expected):
        assert noisy_bit_pom_formula(alpha, n) == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("alpha,n", [(0.0, 2), (0.7, 2), (0.2, 1)])
    def test_domain(self, alpha, n):
        with pytest.raises(ValueError):
            noisy_bit_pom_formula(alpha, n)


def test_classical_factor_adds_no_excess():
    # heuristic: both sides are see-saw upper bounds
    cfg = SeesawConfig(restarts=4, max_iters=60)
    sq = make_square_gbit()
    eps, cert = seesaw_excess(sq, 6, cfg)
    flat, _ = simplex_product_iso(6, 2)
    warm = compose(tensor_with_classical(cert, 2), flat)
    doubled, _ = seesaw_excess(minimal_tensor(sq, make_simplex(2)), 12, cfg, warm_start=warm)
    assert abs(doubled - eps) <= 1e-3
    assert doubled >= pom_excess_witness(minimal_tensor(sq, make_simplex(2)), 2, cfg) - 1e-6
