"""Supporting-line exponents: closed form, line geometry, breakpoints."""

import numpy as np
import pytest

from arqde import (
    AntennaConfig,
    delta_line,
    exponent_breakpoints,
    segment_slope_magnitudes,
    upper_bound_exponent,
)


def _corner_minimum(mt: int, mr: int, b: float) -> float:
    # independent route: minimize d(k) + b*k directly over the integer corners
    k = np.arange(min(mt, mr) + 1)
    return float(np.min((mt - k) * (mr - k) + b * k))


def test_known_values_2x2():
    cfg = AntennaConfig(2, 2)
    assert upper_bound_exponent(cfg, 1.0) == 2.0
    assert upper_bound_exponent(cfg, 2.0) == 3.0
    assert upper_bound_exponent(cfg, 3.0) == 4.0
    assert upper_bound_exponent(cfg, 17.0) == 4.0


def test_siso_is_clipped_identity():
    cfg = AntennaConfig(1, 1)
    for b in (0.1, 0.7, 1.0, 2.5):
        assert upper_bound_exponent(cfg, b) == min(b, 1.0)


def test_zero_ratio_gives_zero_and_negative_rejected():
    cfg = AntennaConfig(3, 2)
    assert upper_bound_exponent(cfg, 0.0) == 0.0
    with pytest.raises(ValueError):
        upper_bound_exponent(cfg, -0.5)


def test_matches_independent_corner_minimum():
    for mt in range(1, 5):
        for mr in range(1, 5):
            cfg = AntennaConfig(mt, mr)
            for b in np.arange(1, 241) * 0.05:
                assert abs(upper_bound_exponent(cfg, float(b)) - _corner_minimum(mt, mr, float(b))) < 1e-9


def test_saturation_threshold():
    for mt in range(1, 6):
        for mr in range(1, 6):
            cfg = AntennaConfig(mt, mr)
            b_sat = mt + mr - 1
            assert upper_bound_exponent(cfg, float(b_sat)) == mt * mr
            assert upper_bound_exponent(cfg, b_sat + 4.0) == mt * mr
            assert upper_bound_exponent(cfg, b_sat - 0.25) < mt * mr


def test_slope_magnitudes():
    assert segment_slope_magnitudes(AntennaConfig(4, 4)).tolist() == [7.0, 5.0, 3.0, 1.0]
    assert segment_slope_magnitudes(AntennaConfig(3, 2)).tolist() == [4.0, 2.0]


def test_delta_line_non_tie_geometry():
    cfg = AntennaConfig(2, 2)
    line = delta_line(cfg, 2.0)
    assert not line.tie
    assert line.touch_corner == 1
    assert line.intercept == 3.0
    assert line.x_intercept == 1.5
    assert line.intercept == upper_bound_exponent(cfg, 2.0)


def test_delta_line_tie_reports_smaller_corner():
    low = delta_line(AntennaConfig(2, 2), 1.0)  # coincides with the flatter segment
    assert low.tie and low.touch_corner == 1 and low.intercept == 2.0
    high = delta_line(AntennaConfig(2, 2), 3.0)  # coincides with the steeper segment
    assert high.tie and high.touch_corner == 0 and high.intercept == 4.0


def test_tie_detection_tolerance():
    assert delta_line(AntennaConfig(2, 2), 1.0 + 5e-10).tie
    assert not delta_line(AntennaConfig(2, 2), 1.0 + 1e-7).tie


def test_delta_line_rejects_nonpositive_ratio():
    with pytest.raises(ValueError):
        delta_line(AntennaConfig(2, 2), 0.0)


def test_breakpoints_known_configs():
    assert exponent_breakpoints(AntennaConfig(2, 2)) == [(1, 2), (3, 4)]
    assert exponent_breakpoints(AntennaConfig(4, 1)) == [(4, 4)]
    assert exponent_breakpoints(AntennaConfig(4, 4)) == [(1, 4), (3, 10), (5, 14), (7, 16)]


def test_breakpoints_are_kinks_of_the_exponent():
    for mt, mr in ((2, 2), (3, 2), (4, 4), (4, 1)):
        cfg = AntennaConfig(mt, mr)
        for b_k, d_k in exponent_breakpoints(cfg):
            assert upper_bound_exponent(cfg, float(b_k)) == float(d_k)
            h = 1e-6
            left = (d_k - upper_bound_exponent(cfg, b_k - h)) / h
            right = (upper_bound_exponent(cfg, b_k + h) - d_k) / h
            # one clipped term flattens at each kink, so the slope drops by 1
            assert left == pytest.approx(right + 1.0, abs=1e-3)
