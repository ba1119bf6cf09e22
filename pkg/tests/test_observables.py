import numpy as np
import pytest

from fermistab.correlations import (
    CorrelationMatrix,
    gibbs_correlation,
    ground_state_correlation,
)
from fermistab.hamiltonian import (
    PerturbationSpec,
    build_ssh,
    operator_norm,
    perturb,
    ssh_lattice,
)
from fermistab.lattice import LatticeSpec
from fermistab.observables import (
    bond_observable,
    energy_density,
    expectation,
    local_observable,
    number_observable,
    translate,
    translation_average,
    weighted_average,
)

from tests.test_hamiltonian import random_local_coupling


def random_observable(lattice, sites, rng):
    terms = []
    for x in sites:
        for y in sites:
            for a in range(1, 2 * lattice.D + 1):
                for b in range(1, 2 * lattice.D + 1):
                    terms.append((x, y, a, b, 1j * rng.uniform(-1, 1)))
    return local_observable(lattice, terms)


def test_expectation_zero_state():
    H = build_ssh(8, 1.0)
    G = gibbs_correlation(H, 0.0)
    O = bond_observable(H.lattice, 0, 1)
    assert expectation(G, O) == 0.0


def test_expectation_linearity():
    rng = np.random.default_rng(0)
    lat = ssh_lattice(10)
    G = ground_state_correlation(build_ssh(10, 0.7))
    O1 = random_observable(lat, [(2,), (3,)], rng)
    O2 = random_observable(lat, [(5,)], rng)
    combined = weighted_average([(0.3, O1), (-0.7, O2)])
    direct = 0.3 * expectation(G, O1) - 0.7 * expectation(G, O2)
    assert expectation(G, combined) == pytest.approx(direct, abs=1e-12)


def test_number_observable_dimer_ground_state():
    # half an electron per site in the bonding orbital of a decoupled dimer
    H = build_ssh(4, 0.0)
    G = ground_state_correlation(H)
    obs, offset = number_observable(H.lattice, 0)
    assert offset + expectation(G, obs) == pytest.approx(0.5, abs=1e-12)


def test_expectation_recovers_correlation_entries():
    # elementary two-mode observables read out Gamma entry by entry
    lat = ssh_lattice(4)
    G = ground_state_correlation(build_ssh(4, 0.5))
    for x, y, a, b in [(0, 1, 1, 2), (1, 2, 2, 1), (0, 3, 1, 1)]:
        O = local_observable(lat, [(x, y, a, b, 0.5j)])  # builder hermitizes
        i, j = lat.mode_index(x, a), lat.mode_index(y, b)
        assert expectation(G, O) == pytest.approx((1j * G.mat[i, j]).real, abs=1e-12)


def test_translate_identity_and_period():
    rng = np.random.default_rng(1)
    lat = ssh_lattice(8)
    O = random_observable(lat, [(1,), (2,)], rng)
    assert np.array_equal(translate(O, 0).mat, O.mat)
    assert np.array_equal(translate(O, 8).mat, O.mat)
    shifted = translate(O, 3)
    assert shifted.support == frozenset({(4,), (5,)})


def test_translate_preserves_uniform_expectation():
    # one-site-translation-invariant state: expectation unchanged by shifts
    H = build_ssh(12, 1.0)
    G = ground_state_correlation(H)
    O = bond_observable(H.lattice, 3, 4)
    vals = [expectation(G, translate(O, v)) for v in range(12)]
    assert np.ptp(vals) < 1e-10


def test_translation_average_fixed_point():
    lat = ssh_lattice(6)
    rng = np.random.default_rng(2)
    O = random_observable(lat, [(0,)], rng)
    avg = translation_average(O)
    avg.validate()
    again = np.zeros_like(avg.mat)
    for v in range(6):
        again += translate(avg, v).mat / 6
    assert np.abs(again - avg.mat).max() < 1e-12


def test_translation_average_of_bond_is_uniform_chain():
    # averaging the unit bond reproduces the uniform-chain coefficient
    # matrix divided by the site count
    ns = 8
    H_uniform = build_ssh(ns, 1.0)
    O = translation_average(bond_observable(H_uniform.lattice, 0, 1))
    assert np.abs(O.mat - H_uniform.mat / ns).max() < 1e-12


def test_translation_average_momentum_blocks():
    # Fourier conjugation block-diagonalizes a shift-invariant matrix
    ns = 6
    lat = ssh_lattice(ns)
    rng = np.random.default_rng(3)
    avg = translation_average(random_observable(lat, [(0,), (1,)], rng))
    F = np.exp(2j * np.pi * np.outer(np.arange(ns), np.arange(ns)) / ns) / np.sqrt(ns)
    FD = np.kron(F, np.eye(2))
    M = FD.conj().T @ avg.mat @ FD
    for p in range(ns):
        for q in range(ns):
            if p != q:
                block = M[2 * p : 2 * p + 2, 2 * q : 2 * q + 2]
                assert np.abs(block).max() < 1e-10


def test_translation_average_rejects_large_support():
    lat = ssh_lattice(8)
    rng = np.random.default_rng(4)
    O = random_observable(lat, [(0,), (5,)], rng)  # diameter 3 < 4 ok
    translation_average(O)
    O2 = random_observable(lat, [(0,), (3,), (5,)], rng)  # diameter 5 > 4
    with pytest.raises(ValueError):
        translation_average(O2)


def test_averaging_contraction_bound():
    # |sum_ij O_ij A_ij| <= (4 D^2 k / n_sites) ||O_0|| * trace-norm(A)
    rng = np.random.default_rng(5)
    ns = 10
    lat = ssh_lattice(ns)
    for trial in range(25):
        k = int(rng.integers(1, 4))
        base = int(rng.integers(0, ns))
        offs = rng.choice(ns // 2, size=k, replace=False)
        sites = [((base + int(o)) % ns,) for o in offs]
        O0 = random_observable(lat, sites, rng)
        O = translation_average(O0)
        A = random_local_coupling(LatticeSpec(d=1, L=ns, R=ns // 2), rng)
        lhs = abs(np.trace(O.mat.conj().T @ A.mat))
        tn = np.linalg.svd(A.mat, compute_uv=False).sum()
        rhs = 4 * lat.D**2 * k / ns * operator_norm(O0.mat) * tn
        assert lhs <= rhs + 1e-12


def test_local_trace_norm_bound():
    # trace-norm(O) <= 2 D k ||O|| for a k-site observable
    rng = np.random.default_rng(6)
    lat = ssh_lattice(12)
    for k in (1, 2, 3):
        sites = [(int(s),) for s in rng.choice(12, size=k, replace=False)]
        O = random_observable(lat, sites, rng)
        tn = np.linalg.svd(O.mat, compute_uv=False).sum()
        assert tn <= 2 * lat.D * k * operator_norm(O.mat) + 1e-12


def test_energy_density_values():
    # decoupled dimers: exact ground energy -1 per dimer, -1/2 per site
    H = build_ssh(12, 0.0)
    G = ground_state_correlation(H)
    assert energy_density(H, G) == pytest.approx(-0.5, abs=1e-12)
    zero = CorrelationMatrix(np.zeros_like(G.mat))
    assert energy_density(H, zero) == 0.0


def test_energy_density_thermodynamic_limit():
    # uniform chain converges to the quadrature value -2/pi
    vals = []
    for ns in (100, 200, 400):
        H = build_ssh(ns, 1.0)
        vals.append(energy_density(H, ground_state_correlation(H)))
    assert abs(vals[-1] + 2 / np.pi) < 2e-4
    assert abs(vals[-1] + 2 / np.pi) < abs(vals[0] + 2 / np.pi)


def test_weighted_average_validation():
    lat = ssh_lattice(6)
    O = bond_observable(lat, 0, 1)
    with pytest.raises(ValueError):
        weighted_average([(0.4, O), (0.4, O)])
    single = weighted_average([(1.0, O)])
    assert np.array_equal(single.mat, O.mat)


def test_weighted_average_disjoint_mean():
    lat = ssh_lattice(8)
    G = ground_state_correlation(build_ssh(8, 0.6))
    O1, _ = number_observable(lat, 1)
    O2, _ = number_observable(lat, 5)
    avg = weighted_average([(0.5, O1), (0.5, O2)])
    assert expectation(G, avg) == pytest.approx(
        0.5 * expectation(G, O1) + 0.5 * expectation(G, O2), abs=1e-13
    )


def test_weighted_average_stability_inherits_max():
    # the averaged observable can never err more than its worst constituent
    ns = 16
    H = build_ssh(ns, 1.0)
    lat = H.lattice
    obs = [number_observable(lat, s)[0] for s in (0, 5, 11)]
    avg = weighted_average([(1 / 3, o) for o in obs])
    G = ground_state_correlation(H)
    for instance in range(5):
        Hp = perturb(H, PerturbationSpec(delta=0.05, seed=8, instance=instance))
        Gp = ground_state_correlation(Hp)
        errs = [abs(expectation(Gp, o) - expectation(G, o)) for o in obs]
        err_avg = abs(expectation(Gp, avg) - expectation(G, avg))
        assert err_avg <= max(errs) + 1e-12
