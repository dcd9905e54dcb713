import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magpol import tables
from magpol.coupled_modes import (
    CoupledSystem,
    TransmissionMap,
    eigenfrequencies,
    eigenfrequency_sweep,
    grid_noise,
    s21,
    transmission_map,
    two_mode_branches,
)
from magpol.model_core import MagnonBranch, PhotonMode

freq = st.floats(min_value=1e8, max_value=1e11)
coup = st.floats(min_value=0.0, max_value=1e10)


def one_by_one(wc=15.732e9, gc=1e6, slope=24.49e9, gm=1.5e6, g=3.075e9, **ports):
    return CoupledSystem([PhotonMode("c", wc, gc)], [MagnonBranch(slope, 0.0, gm)], [[g]], **ports)


# -- closed-form branches --------------------------------------------------

def test_two_mode_examples():
    up, lo = two_mode_branches(15.732e9, 15.732e9, 3.075e9)
    assert (up, lo) == (pytest.approx(18.807e9), pytest.approx(12.657e9))
    assert up - lo == pytest.approx(6.15e9)
    assert two_mode_branches(10e9, 20e9, 0.0) == (20e9, 10e9)
    up, lo = two_mode_branches(10e9, 20e9, 1e9)
    assert up == pytest.approx(20.0990e9, abs=5e4)
    assert lo == pytest.approx(9.9010e9, abs=5e4)


@given(freq, freq, coup)
def test_two_mode_invariants(wc, wm, g):
    up, lo = two_mode_branches(wc, wm, g)
    assert up >= lo
    assert up + lo == pytest.approx(wc + wm, rel=1e-15)
    mean = 0.5 * (wc + wm)
    assert (up - mean) * (lo - mean) == pytest.approx(-((wc - wm) ** 2 / 4 + g * g), rel=1e-9)
    # a few ulps of slack: g can sit below the resolution of the frequencies
    assert up - lo >= 2 * g * (1 - 1e-12) - 4 * np.spacing(max(wc, wm))


def test_two_mode_minimum_gap_at_resonance():
    wm = np.linspace(10e9, 20e9, 10001)
    up, lo = two_mode_branches(15e9, wm, 1e9)
    gap = up - lo
    assert gap.min() == pytest.approx(2e9, rel=1e-12)
    assert wm[np.argmin(gap)] == pytest.approx(15e9)


# -- system validation -------------------------------------------------------

def test_system_validation():
    p = [PhotonMode("a", 1e10, 1e6)]
    mg = [MagnonBranch(28e9, 0.0, 1e6)]
    with pytest.raises(ValueError):
        CoupledSystem([], mg, np.zeros((0, 1)))
    with pytest.raises(ValueError):
        CoupledSystem(p, [], np.zeros((1, 0)))
    with pytest.raises(ValueError):
        CoupledSystem(p, mg, [[-1.0]])
    with pytest.raises(ValueError):
        CoupledSystem(p + [PhotonMode("a", 2e10, 1e6)], mg, [[1.0], [1.0]])
    with pytest.raises(ValueError):
        CoupledSystem(p, mg, [[1.0]], port_in=[1.5e6], port_out=[1e6])
    with pytest.raises(ValueError):
        CoupledSystem(p, mg, [[1.0]], port_in=[-1.0], port_out=[1e6])
    sys = CoupledSystem(p, mg, [[1.0]])
    np.testing.assert_array_equal(sys.port_in, [0.5e6])
    with pytest.raises(ValueError):
        sys.g[0, 0] = 2.0


# -- eigenfrequencies ----------------------------------------------------------

def test_uncoupled_eigenvalues_are_the_diagonal():
    sys = CoupledSystem([PhotonMode("a", 12e9, 1e6), PhotonMode("b", 16e9, 2e6)],
                        [MagnonBranch(28e9, 0.0, 3e6)], np.zeros((2, 1)))
    vals = eigenfrequencies(sys, 0.5)
    np.testing.assert_allclose(vals, [16e9 - 2e6j, 14e9 - 3e6j, 12e9 - 1e6j], rtol=0, atol=1e-3)


@given(st.floats(0.0, 1.5), coup)
def test_lossless_pair_matches_closed_form(b, g):
    sys = CoupledSystem([PhotonMode("c", 15e9, 1e-9)], [MagnonBranch(24.49e9, 0.0, 1e-9)], [[g]])
    vals = eigenfrequencies(sys, b)
    up, lo = two_mode_branches(15e9, 24.49e9 * b, g)
    np.testing.assert_allclose(vals.real, [up, lo], rtol=1e-12, atol=1.0)


def test_two_degenerate_magnons_split_by_root_sum_square():
    g1, g2 = 1.2e9, 0.5e9
    sys = CoupledSystem([PhotonMode("c", 15e9, 1e-3)],
                        [MagnonBranch(30e9, 0.0, 1e-3), MagnonBranch(30e9, 0.0, 1e-3)], [[g1, g2]])
    vals = eigenfrequencies(sys, 0.5)
    assert vals[0].real - vals[-1].real == pytest.approx(2 * np.hypot(g1, g2), rel=1e-12)
    # the dark combination stays on the bare magnon line
    assert vals[1].real == pytest.approx(15e9, rel=1e-12)


@given(st.lists(freq, min_size=1, max_size=3), st.floats(0.0, 1.0), st.data())
def test_eigenvalue_sum_equals_trace(wcs, b, data):
    photons = [PhotonMode(f"p{k}", w, 1e6 * (k + 1)) for k, w in enumerate(wcs)]
    magnons = [MagnonBranch(28e9, 1e8, 2e6), MagnonBranch(20e9, 0.0, 1e6)]
    g = data.draw(st.lists(coup, min_size=2 * len(wcs), max_size=2 * len(wcs)))
    sys = CoupledSystem(photons, magnons, np.reshape(g, (len(wcs), 2)))
    vals = eigenfrequencies(sys, b)
    tr = np.trace(sys.matrix(b))
    assert abs(vals.sum() - tr) <= 1e-12 * np.abs(sys.matrix(b)).sum()
    assert np.all(np.diff(vals.real) <= 0)


def test_sweep_branches_are_continuous():
    sys = tables.six_mode_system()
    b = np.linspace(0.3, 1.0, 1401)
    sweep = eigenfrequency_sweep(sys, b)
    max_slope = max(m.slope for m in sys.magnons)
    jumps = np.abs(np.diff(sweep.real, axis=0))
    assert jumps.max() <= (b[1] - b[0]) * max_slope * (1 + 1e-9)


def test_branch_asymptotes_far_from_resonance():
    # with the magnon tuned far above the photon the lower branch sits just
    # below the photon and the upper one rides just above the magnon line
    g, wc, slope = 1e9, 15e9, 24.49e9
    sys = one_by_one(wc=wc, slope=slope, g=g, gc=1e-6, gm=1e-6)
    for detuning in (10 * g, 40 * g):
        b = (wc + detuning) / slope
        up, lo = eigenfrequencies(sys, b).real
        assert lo < wc and wc - lo == pytest.approx(g * g / detuning, rel=0.02)
        assert up > slope * b and up - slope * b == pytest.approx(g * g / detuning, rel=0.02)
    b = (wc - 10 * g) / slope
    up, lo = eigenfrequencies(sys, b).real
    assert up > wc and lo < slope * b


# -- transmission --------------------------------------------------------------

def test_s21_single_lorentzian_critical_coupling():
    gc = 2e6
    sys = one_by_one(gc=gc, g=0.0, port_in=[gc / 2], port_out=[gc / 2])
    assert abs(s21(sys, 0.3, 15.732e9)) == pytest.approx(0.5, rel=1e-12)


def test_s21_far_detuned_rolls_off():
    sys = one_by_one(g=0.0)
    far = [abs(s21(sys, 0.3, 15.732e9 + d)) for d in (1e9, 1e10, 1e11)]
    assert far[0] < 1e-3
    # Lorentzian tail: falls as 1 / detuning
    assert far[1] / far[0] == pytest.approx(0.1, rel=0.01)
    assert far[2] / far[1] == pytest.approx(0.1, rel=0.01)


def test_s21_resonant_peaks_match_closed_form_splitting():
    sys = one_by_one(g=3.075e9, gc=2.6775e6, gm=1.6235e6)
    b = 15.732e9 / 24.49e9
    f = np.linspace(10e9, 21e9, 2_000_001)
    mag = np.abs(s21(sys, b, f))
    inner = (mag[1:-1] > mag[:-2]) & (mag[1:-1] > mag[2:])
    peaks = f[1:-1][inner]
    peaks = peaks[mag[1:-1][inner] > 0.1 * mag.max()]
    assert peaks.size == 2
    up, lo = two_mode_branches(15.732e9, 24.49e9 * b, 3.075e9)
    assert peaks[1] - peaks[0] == pytest.approx(up - lo, rel=0.01)


@given(st.floats(0.0, 1.5), st.floats(1e9, 4e10), st.floats(0.0, 1.0), st.floats(0.0, 1.0),
       st.floats(0.0, 5e9))
def test_single_mode_passivity(b, f, a_in, a_out, g):
    gc = 3e6
    sys = one_by_one(g=g, gc=gc, port_in=[a_in * gc], port_out=[a_out * gc])
    assert abs(s21(sys, b, f)) <= 1 + 1e-12


def test_s21_scalar_and_vector_agree():
    sys = one_by_one()
    f = np.array([14e9, 15.7e9, 18e9])
    vec = s21(sys, 0.6, f)
    assert isinstance(s21(sys, 0.6, 15.7e9), complex)
    for k in range(3):
        assert vec[k] == s21(sys, 0.6, f[k])


def test_map_single_point_equals_s21():
    sys = one_by_one()
    m = transmission_map(sys, [0.6], [15.0e9], allow_single=True)
    assert m.values.shape == (1, 1)
    assert m.values[0, 0] == s21(sys, 0.6, 15.0e9)


def test_map_rejects_short_and_unsorted_axes():
    sys = one_by_one()
    with pytest.raises(ValueError):
        transmission_map(sys, [0.6], [1e9, 2e9])
    with pytest.raises(ValueError):
        transmission_map(sys, [0.6, 0.5], [1e9, 2e9])
    with pytest.raises(ValueError):
        transmission_map(sys, [0.5, 0.6], [1e9, 2e9], noise=-1.0)


def test_map_is_deterministic_and_order_independent():
    sys = tables.six_mode_system()
    b = np.linspace(0.3, 1.0, 41)
    f = np.linspace(6e9, 27e9, 301)
    a = transmission_map(sys, b, f)
    np.testing.assert_array_equal(a.values, transmission_map(sys, b, f).values)
    n1 = transmission_map(sys, b, f, noise=0.01, seed=7)
    n4 = transmission_map(sys, b, f, noise=0.01, seed=7, threads=4)
    np.testing.assert_array_equal(n1.values, n4.values)
    assert not np.array_equal(n1.values, transmission_map(sys, b, f, noise=0.01, seed=8).values)
    # noise of a column depends only on (seed, column)
    sub = transmission_map(sys, b[5:9], f, noise=0.01, seed=7)
    for k in range(4):
        np.testing.assert_array_equal(sub.values[k], a.values[5 + k] + grid_noise(7, k, f.size, 0.01))
        np.testing.assert_array_equal(n1.values[k], a.values[k] + grid_noise(7, k, f.size, 0.01))


def test_grid_noise_rms():
    z = grid_noise(3, 0, 200_000, 0.01)
    assert np.sqrt(np.mean(np.abs(z) ** 2)) == pytest.approx(0.01, rel=0.01)


def test_transmission_map_container():
    with pytest.raises(ValueError):
        TransmissionMap([0.0, 1.0], [1.0, 2.0], np.zeros((3, 2)))
    with pytest.raises(ValueError):
        TransmissionMap([0.0, 0.0], [1.0, 2.0], np.zeros((2, 2)))
    m = TransmissionMap([0.0, 1.0], [1.0, 2.0], np.array([[1.0, 0.1], [0.01, 1.0]], dtype=complex))
    np.testing.assert_allclose(m.db(), [[0.0, -20.0], [-40.0, 0.0]])
    real = TransmissionMap([0.0, 1.0], [1.0, 2.0], np.array([[-3.0, -1.0], [0.0, -2.0]]))
    assert not real.is_complex
    np.testing.assert_array_equal(real.db(), real.values)


def _full_response(sys, b, f):
    """S21 from the full (photons + magnons) linear-response matrix."""
    n, m = sys.n_photons, sys.n_magnons
    base = np.zeros((n + m, n + m), dtype=complex)
    base[:n, n:] = 1j * sys.g
    base[n:, :n] = 1j * sys.g.T
    w = np.concatenate([sys.photon_freqs(), sys.magnon_freqs(b)])
    gam = np.concatenate([sys.photon_widths(), sys.magnon_widths()])
    drive = np.concatenate([np.sqrt(sys.port_in), np.zeros(m)])
    probe = np.concatenate([np.sqrt(sys.port_out), np.zeros(m)])
    out = []
    for ff in np.atleast_1d(f):
        mat = base + np.diag(1j * (w - ff) + gam)
        out.append(probe @ np.linalg.solve(mat, drive))
    return np.array(out)


@pytest.mark.parametrize("g", [
    [[3e8, 0.0], [2e8, 0.0]],          # one magnon shared by both photons
    [[3e8, 1e8], [2e8, 4e8]],          # every photon sees every magnon
    [[3e8, 0.0], [0.0, 4e8]],          # independent pairs
])
def test_s21_matches_full_linear_response(g):
    sys = CoupledSystem(
        [PhotonMode("a", 10e9, 2e6), PhotonMode("b", 10.5e9, 3e6)],
        [MagnonBranch(28e9, 0.0, 1.5e6), MagnonBranch(27e9, 1e8, 2e6)],
        g, [1e6, 1.2e6], [0.9e6, 1.4e6],
    )
    f = np.linspace(9e9, 12e9, 301)
    for b in (0.3, 0.37, 0.4):
        ref = _full_response(sys, b, f)
        assert np.abs(s21(sys, b, f) - ref).max() <= 1e-12 * np.abs(ref).max()
