
import numpy as np
import pytest

from pairlab import cluster as cl
from pairlab.errors import ParameterError

REFERENCE_COMB = cl.CombSpec(16.0, 15.0, 444.0, 444.0)


def weights_by_detuning(lines):
    return {round(l.detuning, 9): l.weight for l in lines}


class TestEmissionLines:
    def test_central_line(self):
        for fs, fi in [(16, 15), (10, 13.7), (3.3, 2.1)]:
            lines = cl.emission_lines(cl.CombSpec(fs, fi), 5 * fs)
            w = weights_by_detuning(lines)
            assert w[0.0] == 1.0
            assert max(l.weight for l in lines if l.detuning != 0) < 1

    def test_reference_comb(self):
        lines = cl.emission_lines(REFERENCE_COMB, 40)
        assert [l.detuning for l in lines] == [-32, -16, 0, 16, 32]
        w = [l.weight for l in lines]
        # mismatch of m GHz through the 444 MHz idler line
        expected = [1 / (1 + (2000 * abs(m) / 444) ** 2) for m in (-2, -1, 0, 1, 2)]
        np.testing.assert_allclose(w, expected, rtol=1e-12)
        assert w[1] == pytest.approx(0.047, abs=5e-4) and w[0] == pytest.approx(0.012, abs=5e-4)

    def test_topology(self):
        lines = cl.emission_lines(REFERENCE_COMB, 120)
        w = np.array([l.weight for l in lines])
        d = np.array([l.detuning for l in lines])
        order = np.argsort(w)[::-1]
        assert d[order[0]] == 0 and set(d[order[1:3]]) == {-16, 16} and set(d[order[3:5]]) == {-32, 32}
        np.testing.assert_allclose(w, w[::-1])

    def test_degenerate(self):
        with pytest.warns(RuntimeWarning):
            lines = cl.emission_lines(cl.CombSpec(16, 16), 64)
        assert all(l.weight == 1.0 for l in lines)

    def test_translation(self):
        base = cl.emission_lines(REFERENCE_COMB, 200)
        shifted = cl.emission_lines(cl.CombSpec(16, 15, 444, 444, offset_s=700, offset_i=700), 200)
        ws = [l.weight for l in base if abs(l.detuning) < 150]
        wt = [l.weight for l in shifted if abs(l.detuning - 0.7) < 150]
        np.testing.assert_allclose(ws, wt, rtol=1e-9)

    def test_doublets(self):
        comb = cl.CombSpec(16, 15, 444, 444, offset_i2=1000.0)
        lines = cl.emission_lines(comb, 40)
        assert len(lines) == 10
        assert sorted(w for w in (l.weight for l in lines) if w > 0.9) == [1.0, 1.0]

    def test_pulling(self):
        lines = cl.emission_lines(cl.CombSpec(16, 15, pulling=0.5), 20)
        assert [l.detuning for l in lines] == [-15.5, 0.0, 15.5]

    @pytest.mark.parametrize("kw", [dict(fsr_s=0), dict(linewidth_i=0), dict(pulling=2)])
    def test_bad_comb(self, kw):
        with pytest.raises(ParameterError):
            cl.CombSpec(**kw)
        with pytest.raises(ParameterError):
            cl.emission_lines(REFERENCE_COMB, 0)


class TestSpacing:
    def test_values(self):
        assert cl.cluster_spacing(16, 15) == 240
        assert cl.cluster_spacing(16, 8) == 16
        with pytest.raises(ParameterError):
            cl.cluster_spacing(16, 16)

    def test_wavelength(self):
        assert cl.nm_to_ghz(0.5) == pytest.approx(237.2, abs=0.1)
        assert cl.ghz_to_nm(240) == pytest.approx(0.506, abs=1e-3)
        assert cl.ghz_to_nm(cl.nm_to_ghz(0.37)) == pytest.approx(0.37)

    def test_symmetric_and_divergent(self):
        assert cl.cluster_spacing(16, 15) == cl.cluster_spacing(15, 16)
        gaps = [1, 0.5, 0.1, 0.01, 1e-4]
        spacing = [cl.cluster_spacing(16, 16 - g) for g in gaps]
        assert all(a < b for a, b in zip(spacing, spacing[1:]))


class TestCentralFraction:
    def test_trivial(self):
        assert cl.central_fraction([cl.ClusterLine(0.0, 0.3)]) == 1.0
        assert cl.central_fraction([cl.ClusterLine(float(d), 1.0) for d in range(-2, 3)]) == pytest.approx(0.2)
        with pytest.raises(ParameterError):
            cl.central_fraction([])

    def test_one_cluster(self):
        span = cl.cluster_spacing(16, 15) / 2
        lines = cl.emission_lines(REFERENCE_COMB, span)
        m = np.arange(1, 8)
        oracle = 1 / (1 + 2 * np.sum(1 / (1 + (2000 * m / 444) ** 2)))
        assert cl.central_fraction(lines) == pytest.approx(oracle, rel=1e-12)
        assert cl.central_fraction(lines) == pytest.approx(0.874, abs=1e-3)
        assert 0.60 <= cl.central_fraction(lines) <= 0.90

    def test_window(self):
        lines = cl.emission_lines(REFERENCE_COMB, 120)
        assert cl.central_fraction(lines, 20) > cl.central_fraction(lines, 80) > cl.central_fraction(lines)
        with pytest.raises(ParameterError):
            cl.central_fraction([cl.ClusterLine(5.0, 1.0)], 1.0)

    def test_decreases_with_linewidth(self):
        vals = [cl.central_fraction(cl.emission_lines(cl.CombSpec(16, 15, w, w), 120))
                for w in (100, 300, 444, 800, 2000)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert all(0 < v <= 1 for v in vals)


class TestTuning:
    def test_strain(self):
        assert cl.strain_detuning(10) == 0.0
        assert cl.strain_detuning(20) == 0.0
        assert cl.strain_detuning(60) == pytest.approx(1.0)
        v = np.linspace(0, 120, 121)
        s = cl.strain_detuning(v)
        assert s.max() - s.min() > 2.0
        assert np.all(np.diff(s) >= 0)
        np.testing.assert_allclose(cl.strain_detuning(v, slope=-0.025), -s)
        assert cl.strain_detuning(1e4) == 3.0

    def test_drift(self):
        assert cl.drift_detuning(0, 37.0) == 0.0
        assert cl.drift_detuning(16, 10) == 160.0
        assert cl.drift_detuning(1, 10) == pytest.approx(226 / 20, rel=0.15)
        with pytest.raises(ParameterError):
            cl.drift_detuning(-1)

    def test_trace(self):
        h = np.linspace(0, 16, 161)
        a = cl.drift_trace(h, seed=3)
        assert np.array_equal(a, cl.drift_trace(h, seed=3))
        assert a[0] == 0.0
        b = cl.drift_trace(h, step=50.0, bound=20.0, seed=3)
        assert np.all(np.abs(b - 10 * h) <= 20.0 + 1e-9)
        flat = cl.drift_trace(h, step=0.0)
        np.testing.assert_allclose(flat, 10 * h)
        with pytest.raises(ParameterError):
            cl.drift_trace([1.0, 0.5])
