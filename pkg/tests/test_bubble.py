import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracground import (DomainError, Grid, ProblemParams, ResolutionError, bubble_scan, cutoff_bubble, gamma_eps,
                        lp_norm, m_bounds_check, normalized_bubble, seminorm_sq_spectral, talenti_bubble)
from fracground.bubble import bubble_mass, cutoff_profile, fit_rate, sobolev_ratio
from fracground.selftest import bandlimited_field

P = ProblemParams()
G128 = Grid(2, 128, 6.0)


def test_talenti_peak_value():
    # grid centre is the origin; U(0) = eps^{-(N-2s)/2}
    U = talenti_bubble(G128, 0.5, 0.1)
    assert U.values[64, 64] == pytest.approx(np.sqrt(10.0), rel=1e-14)
    assert U.values.max() == U.values[64, 64]


def test_talenti_ratio_at_eps():
    # (eps^2 / (2 eps^2))^{(N-2s)/2} = 2^{-(N-2s)/2}; h = 0.2 puts |x| = eps on a node
    g = Grid(2, 64, 6.4)
    U = talenti_bubble(g, 0.5, 0.2)
    assert g.axis[33] == pytest.approx(0.2, abs=1e-14)
    assert U.values[33, 32] / U.values[32, 32] == pytest.approx(2 ** (-0.5), rel=1e-12)


def test_talenti_rejects_nonpositive():
    with pytest.raises(ValueError):
        talenti_bubble(G128, 0.5, 0.0)
    with pytest.raises(ValueError):
        talenti_bubble(G128, 0.5, 0.1, kappa=-1.0)


def test_sobolev_ratio_scale_invariant():
    # ||U||_{2*}^2 / [U]^2 for eps = 0.2, 0.4; the slow r^{-(N-2s)} tail makes the torus
    # error O(eps / L), so the box has to be large
    g = Grid(2, 2048, 96.0)
    r = [lp_norm(talenti_bubble(g, 0.5, e), 4) ** 2 / seminorm_sq_spectral(talenti_bubble(g, 0.5, e), 0.5)
         for e in (0.2, 0.4)]
    assert r[0] == pytest.approx(r[1], rel=1e-2)


def test_cutoff_profile():
    r = np.array([0.0, 0.5, 1.0, 1.5, 1.99, 2.0, 3.0])
    eta = cutoff_profile(r)
    assert np.all(eta[:3] == 1.0) and np.all(eta[5:] == 0.0)
    assert np.all(np.diff(eta) <= 0) and 0 < eta[3] < 1


def test_cutoff_bubble_properties():
    U = talenti_bubble(G128, 0.5, 0.2)
    psi = cutoff_bubble(G128, 0.5, 0.2)
    r = G128.radius
    inner_ball, outside = r <= 1.0, r >= 2.0
    assert np.array_equal(psi.values[inner_ball], U.values[inner_ball])
    assert np.all(psi.values[outside] == 0)
    assert np.all((psi.values >= 0) & (psi.values <= U.values))


def test_cutoff_bubble_domain_error():
    with pytest.raises(DomainError):
        cutoff_bubble(Grid(2, 64, 2.0), 0.5, 0.2)


def test_normalized_bubble():
    v = normalized_bubble(G128, 0.5, 0.2)
    assert lp_norm(v, 4) == pytest.approx(1.0, rel=1e-13)
    assert np.all(v.values >= 0)


def test_gamma_sign_cases():
    v = normalized_bubble(G128, 0.5, 0.3)
    assert gamma_eps(v, ProblemParams(C=1e-12)) < 0
    assert gamma_eps(v, ProblemParams(a=1e-12)) > 0


def test_bubble_mass_matches_quadrature():
    # ||U||_4^4 on R^2 for s = 1/2 is pi (kappa = 1, any eps)
    assert bubble_mass(2, 0.5) == pytest.approx(np.pi, rel=1e-14)
    g = Grid(2, 512, 64.0)
    assert lp_norm(talenti_bubble(g, 0.5, 0.5), 4) ** 4 == pytest.approx(np.pi, rel=1e-2)


def test_resolution_error_and_warning():
    g = Grid(2, 64, 12.0)  # h = 0.375
    with pytest.raises(ResolutionError) as exc:
        bubble_scan(P, g, [0.8, 0.2])
    assert exc.value.min_admissible == pytest.approx(0.375)
    with pytest.warns(RuntimeWarning, match="coarsely resolved"):
        bubble_scan(P, g, [1.6, 0.8])


def test_scan_rejects_single_eps():
    with pytest.raises(ValueError):
        bubble_scan(P, G128, [0.4])


@settings(max_examples=5, deadline=None)
@given(kappa=st.floats(0.1, 10.0))
def test_S_star_invariant_under_kappa(kappa):
    g = Grid(2, 128, 6.0)
    base = bubble_scan(P, g, [0.8, 0.4])
    other = bubble_scan(P, g, [0.8, 0.4], kappa=kappa)
    assert other.S_star_estimate == pytest.approx(base.S_star_estimate, rel=1e-12)


def test_fit_rate_recovers_power_law():
    x = np.array([0.8, 0.4, 0.2, 0.1, 0.05])
    noise = np.array([1.02, 0.97, 1.01, 0.99, 1.03])
    fit = fit_rate(x, 3.0 * x**2 * noise)
    assert fit.slope == pytest.approx(2.0, abs=0.05)
    assert fit.ci_low <= 2.0 <= fit.ci_high


def test_resolved_scan_certifies_bounds(resolved_scan, resolved_params):
    sc = resolved_scan
    assert list(sc.epsilons) == [0.8, 0.4, 0.2, 0.1]
    assert sc.S_star_estimate > 0
    assert sc.gamma_scaled_increasing()
    assert sc.V_of_v_eps[-1] >= 1 / resolved_params.two_star
    assert sc.rate_fits["psi_2star_deficit"].slope == pytest.approx(2.0, rel=0.3)
    # S_* closed form for N = 2, s = 1/2 is sqrt(pi) in this normalization; the extrapolation is close
    assert sc.S_star_estimate == pytest.approx(np.sqrt(np.pi), rel=1e-2)
    # [v_eps]^2 <= S_* (1 + delta(eps)) with delta decreasing to 0 at rate ~ eps^{N-2s}
    excess = np.asarray(sc.v_seminorms) / sc.S_star_estimate - 1
    assert np.all(excess > 0) and np.all(np.diff(excess) < 0)
    assert sc.rate_fits["v_semi_excess"].slope == pytest.approx(1.0, rel=0.3)


def test_sobolev_inequality_samples(resolved_scan):
    rng = np.random.default_rng(7)
    S = resolved_scan.S_star_estimate
    g = Grid(2, 64, 6.0)
    for _ in range(100):
        u = bandlimited_field(g, rng, kmax=int(rng.integers(1, 12)), width=float(rng.uniform(0.5, 3.0)))
        assert sobolev_ratio(u, 0.5) >= S * (1 - 0.05)


def test_m_bounds_examples():
    p = P
    assert m_bounds_check(0.5, 1.0, p).upper_bound == pytest.approx(1.0)
    bad = m_bounds_check(-0.1, 1.0, p)
    assert not bad.passed and bad.message == "lower bound violated"
    edge = m_bounds_check(0.99, 1.0, p)
    assert edge.passed and edge.margin == pytest.approx(0.01)
    over = m_bounds_check(1.2, 1.0, p)
    assert not over.passed and over.message == "upper bound violated"
