import numpy as np
import pytest

from fermistab.correlations import (
    CorrelationMatrix,
    NormalizationError,
    evolve,
    evolve_schedule,
    gibbs_correlation,
    ground_state_correlation,
    normalize,
    product_state_correlation,
)
from fermistab.hamiltonian import (
    CouplingMatrix,
    PerturbationSpec,
    build_quadratic,
    build_ssh,
    operator_norm,
    perturb,
)
from fermistab.lattice import LatticeSpec
from fermistab.observables import energy_density

from tests.test_hamiltonian import random_local_coupling


def test_normalize_scale_and_bound():
    H = build_ssh(200, 1.0)
    Hn, s = normalize(H)
    assert s == pytest.approx(2 * 0.25)  # two terms per row at bound 1/4
    assert operator_norm(Hn.mat) <= np.pi / 2
    # headroom variant covers the whole perturbation ensemble
    Hn2, s2 = normalize(H, coupling_bound=H.coupling_bound + 0.1)
    Hp = perturb(H, PerturbationSpec(delta=0.1, seed=0, instance=0))
    assert operator_norm(Hp.mat / s2) <= np.pi / 2


def test_normalize_identity_override():
    # explicit unit scale leaves the matrix untouched
    H = build_ssh(8, 0.5)
    Hn, s = normalize(H, coupling_bound=1.0, row_terms=1)
    assert s == 1.0
    assert np.array_equal(Hn.mat, H.mat)


def test_normalize_rejects_zero():
    lat = LatticeSpec(d=1, L=4)
    with pytest.raises(NormalizationError):
        normalize(build_quadratic(lat, []))


def test_sign_scale_invariance():
    H = build_ssh(12, 0.7)
    Hs = CouplingMatrix(H.lattice, H.mat / 3.7, H.coupling_bound / 3.7)
    a = ground_state_correlation(H)
    b = ground_state_correlation(Hs)
    assert np.abs(a.mat - b.mat).max() < 1e-12


def test_ground_state_two_mode_block():
    # eigenvalues +-1: the sign function returns the matrix itself
    lat = LatticeSpec(d=1, L=4)
    H = build_quadratic(lat, [(0, 0, 1, 2, 1j)])
    G = ground_state_correlation(H)
    assert np.abs(G.mat - H.mat).max() < 1e-12


def test_ground_state_projector_structure():
    H = build_ssh(30, 0.5)
    G = ground_state_correlation(H)
    G.validate(pure=True)
    assert np.abs(G.mat @ G.mat - np.eye(G.n)).max() < 1e-10
    assert G.zero_modes == 0


def test_ground_state_zero_mode_diagnostics():
    # gapless momentum on the grid: four exact zero frequencies
    # (two bands times the Majorana doubling)
    G = ground_state_correlation(build_ssh(8, 1.0))
    assert G.zero_modes == 4


def test_gibbs_limits():
    H = build_ssh(16, 0.5)
    assert np.abs(gibbs_correlation(H, 0.0).mat).max() == 0.0
    cold = gibbs_correlation(H, 60.0)
    G = ground_state_correlation(H)
    gap = np.abs(np.linalg.eigvalsh(H.mat)).min()
    bound = 2 * np.exp(-2 * 60.0 * gap)
    assert operator_norm(cold.mat - G.mat) <= bound


def test_tanh_sign_scalar_inequality():
    # |tanh(beta x) - sign(x)| <= 2 exp(-2 beta |x|) pointwise
    rng = np.random.default_rng(0)
    x = rng.uniform(-3, 3, size=1000)
    for beta in (0.5, 2.0, 10.0):
        err = np.abs(np.tanh(beta * x) - np.sign(x))
        assert np.all(err <= 2 * np.exp(-2 * beta * np.abs(x)) + 1e-15)


def test_spectral_map_commutes_with_conjugation():
    rng = np.random.default_rng(8)
    lat = LatticeSpec(d=1, L=6, R=2)
    H = random_local_coupling(lat, rng)
    # unitary change of basis first vs matrix function first
    lam, U = np.linalg.eigh(H.mat)
    Q = np.linalg.qr(rng.normal(size=(H.n, H.n)) + 1j * rng.normal(size=(H.n, H.n)))[0]
    f_then_rot = Q @ ground_state_correlation(H).mat @ Q.conj().T
    HQ = CouplingMatrix(lat, Q @ H.mat @ Q.conj().T, H.coupling_bound)
    rot_then_f = (lambda w, V: (V * np.sign(w)) @ V.conj().T)(*np.linalg.eigh(HQ.mat))
    assert np.abs(f_then_rot - rot_then_f).max() < 1e-9


def test_evolve_t0_and_stationarity():
    H = build_ssh(12, 0.8)
    G = ground_state_correlation(H)
    assert np.abs(evolve(G, H, 0.0).mat - G.mat).max() == 0.0
    moved = evolve(G, H, 2.3)
    assert np.abs(moved.mat - G.mat).max() < 1e-12


def test_evolve_group_action_and_unitarity():
    H = build_ssh(10, 1.2)
    G0 = product_state_correlation([1, 0, 1, 0, 1, 0, 1, 0, 1, 0])
    a = evolve(evolve(G0, H, 0.7), H, 1.1)
    b = evolve(G0, H, 1.8)
    assert np.abs(a.mat - b.mat).max() < 1e-9
    w0 = np.linalg.eigvalsh(G0.mat)
    w1 = np.linalg.eigvalsh(b.mat)
    assert np.abs(np.sort(w0) - np.sort(w1)).max() < 1e-10


def test_evolve_schedule_constant_path_matches_evolve():
    H = build_ssh(8, 0.9)
    G0 = product_state_correlation([1, 0, 0, 1, 0, 1, 1, 0])
    direct = evolve(G0, H, 2.0)
    scheduled = evolve_schedule(G0, lambda s: H, T=2.0, steps=64)
    assert np.abs(direct.mat - scheduled.mat).max() < 1e-10


def test_evolve_schedule_step_convergence():
    # doubling the step count moves the final energy density by < 1e-6
    ns = 20
    H0 = build_ssh(ns, 0.0)
    H1 = build_ssh(ns, 1.0)

    def path(s):
        return CouplingMatrix(H1.lattice, (1 - s) * H0.mat + s * H1.mat, H1.coupling_bound)

    G0 = ground_state_correlation(H0)
    e = []
    for steps in (400, 800):
        GT = evolve_schedule(G0, path, T=12.0, steps=steps)
        e.append(energy_density(H1, GT))
    assert abs(e[1] - e[0]) < 1e-6


def test_evolve_schedule_adiabatic_limit():
    # slow gapped ramp lands near the ground state of the endpoint
    ns = 12
    H0 = build_ssh(ns, 0.0)
    H1 = build_ssh(ns, 0.5)

    def path(s):
        return CouplingMatrix(H1.lattice, (1 - s) * H0.mat + s * H1.mat, H1.coupling_bound)

    G0 = ground_state_correlation(H0)
    e_target = energy_density(H1, ground_state_correlation(H1))
    errs = []
    for T in (10.0, 40.0, 160.0):
        GT = evolve_schedule(G0, path, T=T, steps=max(200, int(4 * T)))
        errs.append(abs(energy_density(H1, GT) - e_target))
    assert errs[2] < errs[0]
    assert errs[2] < 2e-4


def test_product_state_correlation():
    G = product_state_correlation([0, 1])
    G.validate(pure=True)
    assert G.mat[0, 1] == 1j
    assert G.mat[2, 3] == -1j


def test_sign_difference_per_mode_bounded():
    # the per-mode trace-norm distance between clean and perturbed ground
    # projectors stays bounded as n grows at fixed delta
    vals = []
    for ns in (40, 80, 160):
        H = build_ssh(ns, 1.0)
        Hp = perturb(H, PerturbationSpec(delta=0.02, seed=4, instance=1))
        G = ground_state_correlation(H).mat
        Gp = ground_state_correlation(Hp).mat
        sv = np.linalg.svd(G - Gp, compute_uv=False)
        vals.append(sv.sum() / (2 * ns))
    assert vals[2] <= 1.3 * vals[0] + 0.05
