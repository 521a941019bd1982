import numpy as np
import pytest

from bellforge import spinor
from bellforge.errors import DomainError, NormalizationError, ValidationError
from bellforge.spinor import AnalyzerSetting, ChshSettings


def _settings(a, b, ap, bp, kinds="LLLL"):
    ka, kb, kap, kbp = kinds
    return ChshSettings(
        a=AnalyzerSetting(a, ka),
        b=AnalyzerSetting(b, kb),
        a_prime=AnalyzerSetting(ap, kap),
        b_prime=AnalyzerSetting(bp, kbp),
    )


QUARTER = np.deg2rad([0.0, 22.5, 45.0, 67.5])


def test_states_normalized():
    for state in (spinor.psi_plus(), spinor.psi_minus(), spinor.product_xx()):
        assert np.vdot(state, state).real == pytest.approx(1.0, abs=1e-12)


def test_check_state_rejects_bad_norm_and_shape():
    with pytest.raises(NormalizationError):
        spinor.check_state(np.array([1.0, 0.0, 0.0, 1.0]))
    with pytest.raises(ValidationError):
        spinor.check_state(np.zeros(3))


def test_analyzer_setting_wraps_angle_and_validates_kind():
    s = AnalyzerSetting(np.pi + 0.25, "L")
    assert s.theta == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        AnalyzerSetting(0.1, "Q")


def test_analyzer_observable_is_involutive():
    for kind in "LE":
        obs = spinor.observable_from_setting(AnalyzerSetting(0.37, kind))
        assert np.allclose(obs @ obs, np.eye(2), atol=1e-12)
        assert np.allclose(obs, obs.conj().T, atol=1e-12)


def test_closed_form_correlations():
    rng = np.random.default_rng(11)
    sp, sm, prod = spinor.psi_plus(), spinor.psi_minus(), spinor.product_xx()
    for _ in range(300):
        a, b = rng.uniform(0.0, np.pi, 2)
        ll = spinor.correlation(sp, AnalyzerSetting(a, "L"), AnalyzerSetting(b, "L"))
        assert ll == pytest.approx(np.cos(2 * (a - b)), abs=1e-10)
        ee = spinor.correlation(sp, AnalyzerSetting(a, "E"), AnalyzerSetting(b, "E"))
        assert ee == pytest.approx(np.cos(2 * (a + b)), abs=1e-10)
        le = spinor.correlation(sp, AnalyzerSetting(a, "L"), AnalyzerSetting(b, "E"))
        assert le == pytest.approx(np.cos(2 * a) * np.cos(2 * b), abs=1e-10)
        sll = spinor.correlation(sm, AnalyzerSetting(a, "L"), AnalyzerSetting(b, "L"))
        assert sll == pytest.approx(-np.cos(2 * (a - b)), abs=1e-10)
        see = spinor.correlation(sm, AnalyzerSetting(a, "E"), AnalyzerSetting(b, "E"))
        assert see == pytest.approx(-np.cos(2 * (a - b)), abs=1e-10)
        pll = spinor.correlation(prod, AnalyzerSetting(a, "L"), AnalyzerSetting(b, "L"))
        assert pll == pytest.approx(np.cos(2 * a) * np.cos(2 * b), abs=1e-10)


def test_quarter_settings_reach_tsirelson_both_kinds():
    for kinds in ("LLLL", "EEEE"):
        s = _settings(*QUARTER, kinds=kinds)
        val = spinor.chsh_value(spinor.psi_plus(), s)
        assert val == pytest.approx(spinor.TSIRELSON, abs=1e-9)


def test_chsh_value_uses_minus_on_ab_prime():
    # putting the sign break on a different pair would change this value
    s = _settings(*QUARTER)
    state = spinor.psi_plus()
    p = [
        spinor.correlation(state, s.a, s.b),
        spinor.correlation(state, s.a, s.b_prime),
        spinor.correlation(state, s.a_prime, s.b),
        spinor.correlation(state, s.a_prime, s.b_prime),
    ]
    assert spinor.chsh_value(state, s) == pytest.approx(
        abs(p[0] - p[1]) + abs(p[2] + p[3]), abs=1e-14
    )


def test_maximize_matches_known_optima():
    _, v_ll = spinor.maximize_chsh(spinor.psi_plus(), "LLLL", seed=0)
    assert v_ll == pytest.approx(spinor.TSIRELSON, abs=1e-6)
    _, v_mixed = spinor.maximize_chsh(spinor.psi_plus(), "LELE", seed=0)
    assert v_mixed == pytest.approx(2.0, abs=1e-6)
    _, v_prod = spinor.maximize_chsh(spinor.product_xx(), "LLLL", seed=0)
    assert v_prod == pytest.approx(2.0, abs=1e-6)


def test_maximize_is_deterministic():
    s1, v1 = spinor.maximize_chsh(spinor.psi_minus(), "LLEE", seed=3)
    s2, v2 = spinor.maximize_chsh(spinor.psi_minus(), "LLEE", seed=3)
    assert v1 == v2
    assert s1 == s2


def test_random_states_never_beat_tsirelson():
    rng = np.random.default_rng(5)
    kinds = np.array(list("LE"))
    for _ in range(2000):
        raw = rng.normal(size=4) + 1j * rng.normal(size=4)
        state = raw / np.linalg.norm(raw)
        s = _settings(*rng.uniform(0.0, np.pi, 4), kinds="".join(rng.choice(kinds, 4)))
        assert spinor.chsh_value(state, s) <= spinor.TSIRELSON + 1e-9


def test_singlet_correlation_rotational_invariance():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = rng.normal(size=3)
        a /= np.linalg.norm(a)
        b = rng.normal(size=3)
        b /= np.linalg.norm(b)
        assert spinor.singlet_correlation(a, b) == pytest.approx(-np.dot(a, b), abs=1e-12)
    with pytest.raises(DomainError):
        spinor.singlet_correlation([1.0, 0.0, 0.0], [2.0, 0.0, 0.0])


def test_parse_kinds_validation():
    assert spinor._parse_kinds("LLEE") == ("L", "L", "E", "E")
    assert spinor._parse_kinds(("L", "E", "L", "E")) == ("L", "E", "L", "E")
    with pytest.raises(ValidationError):
        spinor._parse_kinds("LL")
    with pytest.raises(ValidationError):
        spinor._parse_kinds("LLLQ")
