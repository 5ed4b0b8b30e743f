import json
import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdma_energy.amc import (
    QamSpec,
    build_mode_table,
    min_snr_for_sep,
    q_function,
    qam_sep,
    table_from_json,
    table_to_json,
)
from tdma_energy.costreward import AmcTable

mpmath.mp.dps = 40


def mp_sep(M, snr):
    x = mpmath.sqrt(3 * mpmath.mpf(snr) / (M - 1))
    p = 2 * (1 - 1 / mpmath.sqrt(M)) * mpmath.erfc(x / mpmath.sqrt(2)) / 2
    return 1 - (1 - p) ** 2


class TestSep:
    def test_zero_snr(self):
        assert qam_sep(4, 0.0) == 0.75

    def test_high_snr(self):
        assert qam_sep(4, 1e6) < 1e-15

    def test_q_function(self):
        assert q_function(0.0) == 0.5
        assert q_function(1.0) == pytest.approx(0.15865525393145707, rel=1e-14)

    @pytest.mark.parametrize("M", [4, 16, 64, 256])
    @pytest.mark.parametrize("snr", [0.5, 10.0, 100.0, 400.0])
    def test_against_extended_precision(self, M, snr):
        assert qam_sep(M, snr) == pytest.approx(float(mp_sep(M, snr)), rel=1e-12)

    @settings(max_examples=50)
    @given(M=st.sampled_from([4, 16, 64, 256]), a=st.floats(0.0, 500.0), b=st.floats(0.0, 500.0))
    def test_decreasing(self, M, a, b):
        lo, hi = sorted((a, b))
        assert qam_sep(M, hi) <= qam_sep(M, lo)

    @pytest.mark.parametrize("M", [0, 2, 8, 15, 4.5, True])
    def test_rejects_non_square(self, M):
        with pytest.raises(ValueError):
            qam_sep(M, 1.0)

    def test_rejects_negative_snr(self):
        with pytest.raises(ValueError):
            qam_sep(4, -1.0)


class TestInversion:
    @pytest.mark.parametrize(
        "M,expected",
        [(4, 10.827103114365382729), (16, 57.897434110453263593), (64, 249.19346816742989777)],
    )
    def test_frozen_thresholds(self, M, expected):
        # 40-digit root of the SEP equation at 1e-3, frozen
        assert min_snr_for_sep(M, 1e-3) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("M", [4, 16, 64, 256])
    @pytest.mark.parametrize("sep", [1e-1, 1e-3, 1e-6, 1e-9])
    def test_round_trip(self, M, sep):
        snr = min_snr_for_sep(M, sep)
        assert qam_sep(M, snr) <= sep
        assert qam_sep(M, snr) == pytest.approx(sep, rel=1e-9)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            min_snr_for_sep(4, 0.8)
        with pytest.raises(ValueError):
            min_snr_for_sep(4, 0.0)


class TestModeTable:
    def test_default_table(self):
        tab = build_mode_table(QamSpec())
        assert tab.rho == (2.0, 4.0, 6.0)
        assert tab.p[0] == pytest.approx(10.827103114365382729, rel=1e-12)
        assert all(g1 < g2 for g1, g2 in zip(tab.gamma, tab.gamma[1:]))

    def test_sizes_sorted(self):
        assert QamSpec(sizes=(64, 4)).sizes == (4, 64)

    @pytest.mark.parametrize(
        "kwargs",
        [{"sizes": (4, 8)}, {"sizes": ()}, {"sizes": (4, 4)}, {"sep_target": 0.0}, {"noise_floor": 0.0}],
    )
    def test_spec_validation(self, kwargs):
        with pytest.raises(ValueError):
            QamSpec(**kwargs)

    def test_non_convex_rejected(self, monkeypatch):
        # square QAM ladders are convex in practice; force a concave one
        fake = {4: 10.0, 16: 15.0, 64: 18.0}
        monkeypatch.setattr("tdma_energy.amc.min_snr_for_sep", lambda m, sep: fake[m])
        with pytest.raises(ValueError, match="not convex"):
            build_mode_table(QamSpec())

    def test_json_round_trip(self):
        tab = build_mode_table(QamSpec())
        back = table_from_json(table_to_json(tab))
        assert back == tab
        assert table_from_json(json.loads(table_to_json(tab))) == tab

    def test_json_bad_rows(self):
        with pytest.raises(ValueError):
            table_from_json('[{"rate": 1}]')
        with pytest.raises(ValueError):
            table_from_json('[{"rho": 2, "p": 1}, {"rho": 1, "p": 2}]')

    def test_table_type(self):
        assert isinstance(build_mode_table(QamSpec(sizes=(4,))), AmcTable)
        assert math.isclose(build_mode_table(QamSpec(sizes=(4,))).max_rate, 2.0)
