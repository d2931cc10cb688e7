"""Pauli-string models: action on bit strings, vectors, and ground energies.

Ground energies are frozen from independent dense diagonalization of the
explicitly tensored operators.
"""

import math

import numpy as np
import pytest

from vdd.hamiltonian import (
    ModelSpec,
    PauliHamiltonian,
    PauliString,
    apply_string,
    apply_to_vector,
    build_model,
    dense_matrix,
    expectation,
    ground_energy,
)
from vdd.state import CapacityError

SQRT5 = math.sqrt(5.0)

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# independently diagonalized reference energies
FROZEN_E0 = [
    (ModelSpec("tfim", 2, g=1.0), -2.236067977499789),  # -sqrt(5)
    (ModelSpec("heisenberg", 2), -3.0),
    (ModelSpec("heisenberg", 4), -6.464101615137755),
    (ModelSpec("heisenberg", 6), -9.974308535551689),
    (ModelSpec("heisenberg", 10), -17.03214082913149),
    (ModelSpec("z1z2", 4), -1.0),
    (ModelSpec("tfim", 8, g=10.0), -80.17507824233951),
    (ModelSpec("tfim", 8, g=20.0), -160.0875097692881),
    (ModelSpec("tfim", 8, g=40.0), -320.0437512208175),
]


def test_pauli_string_validation():
    PauliString(1.0, "XZYI")
    with pytest.raises(ValueError):
        PauliString(1.0, "XQ")
    with pytest.raises(ValueError):
        PauliString(float("inf"), "XX")


def test_apply_string_single_qubit_actions():
    # returns (b', phase) with <b'|s|b> = coeff * phase; Y|0> = i|1>, Y|1> = -i|0>
    assert apply_string(PauliString(1.0, "X"), (0,)) == ((1,), 1.0 + 0j)
    assert apply_string(PauliString(1.0, "Z"), (1,)) == ((1,), -1.0 + 0j)
    assert apply_string(PauliString(1.0, "Y"), (0,)) == ((1,), 1j)
    assert apply_string(PauliString(1.0, "Y"), (1,)) == ((0,), -1j)
    assert apply_string(PauliString(2.5, "I"), (1,)) == ((1,), 1.0 + 0j)


def test_apply_string_multi_qubit():
    bits, phase = apply_string(PauliString(-0.5, "XYZ"), (0, 1, 1))
    assert bits == (1, 0, 1)
    assert phase == pytest.approx((-1j) * (-1.0))


def test_apply_string_matches_dense_matrix_element():
    rng = np.random.default_rng(17)
    h = build_model(ModelSpec("heisenberg", 3, jx=0.4, jy=-1.2, jz=0.9))
    m = dense_matrix(h)
    for s in h.terms:
        for _ in range(4):
            bits = tuple(rng.integers(0, 2, size=3))
            out, phase = apply_string(s, bits)
            col = int("".join(map(str, bits)), 2)
            row = int("".join(map(str, out)), 2)
            term_m = s.coeff * np.asarray(
                np.kron(np.kron(_PAULI[s.ops[0]], _PAULI[s.ops[1]]), _PAULI[s.ops[2]])
            )
            assert term_m[row, col] == pytest.approx(s.coeff * phase, abs=1e-12)
    assert m.shape == (8, 8)


def test_apply_to_vector_matches_dense():
    rng = np.random.default_rng(5)
    for spec in (ModelSpec("tfim", 5, g=1.3), ModelSpec("heisenberg", 4, jx=0.3, jy=1.1, jz=-0.7)):
        h = build_model(spec)
        v = rng.normal(size=2**spec.n) + 1j * rng.normal(size=2**spec.n)
        np.testing.assert_allclose(apply_to_vector(h, v), dense_matrix(h) @ v, atol=1e-12)


def test_dense_matrix_is_hermitian():
    for spec in (ModelSpec("tfim", 3, g=0.7), ModelSpec("heisenberg", 3)):
        m = dense_matrix(build_model(spec))
        np.testing.assert_allclose(m, m.conj().T, atol=1e-14)


def test_expectation_matches_quadratic_form():
    rng = np.random.default_rng(8)
    h = build_model(ModelSpec("heisenberg", 4))
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    v /= np.linalg.norm(v)
    assert expectation(h, v) == pytest.approx(
        float((v.conj() @ dense_matrix(h) @ v).real), abs=1e-12
    )


def test_term_counts_open_vs_periodic():
    tfim_open = build_model(ModelSpec("tfim", 6, g=2.0))
    tfim_periodic = build_model(ModelSpec("tfim", 6, g=2.0, boundary="periodic"))
    assert len(tfim_open.terms) == 5 + 6
    assert len(tfim_periodic.terms) == 6 + 6
    heis = build_model(ModelSpec("heisenberg", 5))
    assert len(heis.terms) == 3 * 4


def test_tfim_g0_ground_energy_is_bond_count():
    for n in range(2, 13):
        e0, state = ground_energy(build_model(ModelSpec("tfim", n, g=0.0)))
        assert e0 == pytest.approx(-(n - 1), abs=1e-9)
        assert np.sum(np.abs(state.amps) ** 2) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("spec,e0", FROZEN_E0, ids=lambda v: str(v))
def test_frozen_ground_energies(spec, e0):
    got, state = ground_energy(build_model(spec))
    assert got == pytest.approx(e0, abs=1e-9)
    # returned state achieves its energy
    assert expectation(build_model(spec), state.amps) == pytest.approx(e0, abs=1e-7)


def test_tfim_n2_g1_closed_form():
    e0, _ = ground_energy(build_model(ModelSpec("tfim", 2, g=1.0)))
    assert e0 == pytest.approx(-SQRT5, abs=1e-12)


def test_iterative_and_dense_eigensolvers_agree():
    # n=10 exercises the matrix-free path; compare against the dense answer
    h = build_model(ModelSpec("tfim", 10, g=1.7))
    e_iter, _ = ground_energy(h)
    evals = np.linalg.eigvalsh(dense_matrix(h))
    assert e_iter == pytest.approx(float(evals[0]), abs=1e-8)


def test_ground_energy_capacity_cap():
    with pytest.raises(CapacityError):
        ground_energy(build_model(ModelSpec("tfim", 13, g=1.0)))


def test_z1z2_spectrum():
    h = build_model(ModelSpec("z1z2", 3))
    evals = np.linalg.eigvalsh(dense_matrix(h))
    assert evals[0] == pytest.approx(-1.0, abs=1e-12)
    assert evals[-1] == pytest.approx(1.0, abs=1e-12)


def test_model_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("xy", 4)
    with pytest.raises(ValueError):
        ModelSpec("tfim", 1)
    with pytest.raises(ValueError):
        ModelSpec("tfim", 4, boundary="twisted")
    with pytest.raises(ValueError):
        ModelSpec("tfim", 4, g=float("nan"))


def test_hamiltonian_is_value_like():
    a = build_model(ModelSpec("tfim", 3, g=0.5))
    b = build_model(ModelSpec("tfim", 3, g=0.5))
    assert isinstance(a, PauliHamiltonian)
    assert a == b
