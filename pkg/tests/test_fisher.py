import numpy as np
import pytest

from vqa_natgrad import fisher, linalg
from vqa_natgrad.circuits import AnsatzSpec, ParameterizedCircuit, Rotation, build_ansatz, sample_random_measurement
from vqa_natgrad.fisher import FisherMatrix, ResourceCounter
from vqa_natgrad.hamiltonians import PauliHamiltonian


def ry1():
    return ParameterizedCircuit(1, (Rotation("Y", 0, 0),), 1)


def z1():
    return PauliHamiltonian.from_list([(1.0, "Z")])


def test_gradient_single_ry():
    for t in (0.3, np.pi / 2, 2.0):
        g = fisher.gradient_parameter_shift(ry1(), z1(), [t])
        assert g[0] == pytest.approx(-np.sin(t), abs=1e-14)


def test_gradient_matches_finite_difference(rng):
    c = build_ansatz(AnsatzSpec("RyRz-CNOT", 3, 2))
    h = PauliHamiltonian.from_list([(0.7, "XZI"), (-0.4, "IYY"), (1.1, "ZIZ")])
    th = rng.uniform(0, 2 * np.pi, c.n_params)
    g = fisher.gradient_parameter_shift(c, h, th)
    eps = 1e-5
    fd = np.array([
        (h.expectation_batch(c.evaluate_batch(th + eps * e))[0]
         - h.expectation_batch(c.evaluate_batch(th - eps * e))[0]) / (2 * eps)
        for e in np.eye(c.n_params)
    ])
    np.testing.assert_allclose(g, fd, atol=1e-8)


def test_gradient_subset_zeros_and_counts(rng):
    c = build_ansatz(AnsatzSpec("Ry-CZ", 3, 1))
    h = PauliHamiltonian.from_list([(1.0, "ZZI")])
    th = rng.uniform(0, 6, c.n_params)
    counter = ResourceCounter()
    g = fisher.gradient_parameter_shift(c, h, th, counter, indices=[1, 4])
    full = fisher.gradient_parameter_shift(c, h, th)
    assert counter.state_preparations == 4
    np.testing.assert_array_equal(g[[0, 2, 3, 5]], 0.0)
    np.testing.assert_allclose(g[[1, 4]], full[[1, 4]])


def test_single_parameter_cfim_and_qfim_equal_one():
    for t in (0.4, 1.0, 2.5):
        np.testing.assert_allclose(fisher.cfim(ry1(), [t]).matrix, [[1.0]], atol=1e-10)
        np.testing.assert_allclose(fisher.qfim_parameter_shift(ry1(), [t]).matrix, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(fisher.qfim_exact(ry1(), [t]).matrix, [[1.0]], atol=1e-12)


def test_rz_on_zero_has_no_information():
    c = ParameterizedCircuit(1, (Rotation("Z", 0, 0),), 1)
    q = fisher.qfim_parameter_shift(c, [0.7])
    assert linalg.rank_tol(q) == 0


def test_qfim_product_state_diagonal():
    # independent Ry on each qubit: F_Q = I
    c = build_ansatz(AnsatzSpec("Ry-CZ", 3, 1))
    c = ParameterizedCircuit(3, tuple(g for g in c.gates if isinstance(g, Rotation))[:3], 3)
    np.testing.assert_allclose(fisher.qfim_parameter_shift(c, [0.3, 1.2, 2.0]).matrix, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("spec", [AnsatzSpec("RyRz-CNOT", 3, 2), AnsatzSpec("Ry-CZ", 4, 2),
                                  AnsatzSpec("RyRz-CNOT", 3, 1, "all-to-all", second_axis="X")])
def test_qfim_methods_agree(spec, rng):
    c = build_ansatz(spec)
    th = rng.uniform(0, 2 * np.pi, c.n_params)
    exact = fisher.qfim_exact(c, th).matrix
    np.testing.assert_allclose(fisher.qfim_parameter_shift(c, th, method="sweep").matrix, exact, atol=1e-10)
    np.testing.assert_allclose(fisher.qfim_parameter_shift(c, th, method="direct").matrix, exact, atol=1e-10)


def test_qfim_random_axis_circuit(rng):
    basis = sample_random_measurement(3, 2, seed=4)
    c = basis.circuit
    th = rng.uniform(0, 2 * np.pi, c.n_params)
    np.testing.assert_allclose(fisher.qfim_parameter_shift(c, th).matrix, fisher.qfim_exact(c, th).matrix, atol=1e-10)


def test_unknown_qfim_method():
    with pytest.raises(ValueError):
        fisher.qfim_parameter_shift(ry1(), [0.1], method="bogus")


def test_reduced_qfim_is_block(rng):
    c = build_ansatz(AnsatzSpec("RyRz-CNOT", 3, 1))
    th = rng.uniform(0, 2 * np.pi, c.n_params)
    full = fisher.qfim_exact(c, th).matrix
    counter = ResourceCounter()
    red = fisher.reduced_qfim(c, th, [4, 0, 2], counter)
    assert red.subset == (0, 2, 4)
    assert counter.state_preparations == 2 * 3 * 4
    mask = np.zeros(c.n_params, bool)
    mask[[0, 2, 4]] = True
    np.testing.assert_allclose(red.matrix[np.ix_(mask, mask)], full[np.ix_(mask, mask)], atol=1e-10)
    assert np.all(red.matrix[~mask] == 0) and np.all(red.matrix[:, ~mask] == 0)
    with pytest.raises(ValueError):
        fisher.reduced_qfim(c, th, [0, 99])


def test_preparation_counts(rng):
    c = build_ansatz(AnsatzSpec("Ry-CZ", 3, 1))
    th = rng.uniform(0, 6, c.n_params)
    m = c.n_params
    counter = ResourceCounter()
    fisher.cfim(c, th, sample_random_measurement(3, 1, seed=0), counter)
    assert counter.state_preparations == 2 * m + 1
    fisher.qfim_parameter_shift(c, th, counter)
    assert counter.state_preparations == 2 * m + 1 + 2 * m * (m + 1)


def test_cfim_is_psd_and_bounded(rng):
    c = build_ansatz(AnsatzSpec("RyRz-CNOT", 3, 2))
    for k in range(5):
        th = rng.uniform(0, 2 * np.pi, c.n_params)
        fq = fisher.qfim_parameter_shift(c, th)
        fc = fisher.cfim(c, th, sample_random_measurement(3, 2, seed=k))
        assert linalg.is_psd(fc.matrix)
        assert fisher.loewner_leq(fc, fq)
        ok, worst = fisher.null_space_containment(fq, fc)
        assert ok, worst


def test_cfim_from_jacobian_floor():
    jac = np.array([[1.0], [-1.0], [5.0]])
    p = np.array([0.5, 0.5, 0.0])
    np.testing.assert_allclose(fisher.cfim_from_jacobian(jac, p), [[4.0]])
    with pytest.raises(ValueError):
        fisher.cfim_from_jacobian(jac, p, prob_floor=0)


def test_null_space_vacuous_and_detects():
    assert fisher.null_space_containment(np.eye(2), np.eye(2)) == (True, 0.0)
    ok, worst = fisher.null_space_containment(np.diag([1.0, 0.0]), np.eye(2))
    assert not ok and worst == pytest.approx(1.0)


def test_loewner_examples():
    assert fisher.loewner_leq(np.diag([0.5, 0.2]), np.eye(2))
    assert not fisher.loewner_leq(np.diag([2.0, 0.0]), np.eye(2))
    with pytest.raises(ValueError):
        fisher.loewner_leq(np.eye(2), np.eye(3))


def test_fisher_distance():
    assert fisher.fisher_distance(0.5 * np.eye(3), np.eye(3)) == 0.0
    assert fisher.fisher_distance(np.zeros((2, 2)), 2 * np.eye(2)) == pytest.approx(np.sqrt(2))


def test_fisher_matrix_roundtrip():
    f = FisherMatrix(np.array([[1.0, 0.2], [0.2, 3.0]]), "reduced", subset=(0, 3))
    back = FisherMatrix.from_dict(f.to_dict())
    np.testing.assert_array_equal(back.matrix, f.matrix)
    assert back.subset == (0, 3) and back.kind == "reduced"


def test_hessian_single_ry():
    for t in (0.3, 1.7):
        h = fisher.hessian_finite_difference(ry1(), z1(), [t])
        assert h[0, 0] == pytest.approx(-np.cos(t), abs=1e-6)


def test_descent_condition_examples():
    f = np.eye(2)
    assert fisher.descent_condition(f, np.eye(2), eta=1.0)
    assert not fisher.descent_condition(f, 10 * np.eye(2), eta=1.0)
    assert fisher.descent_condition(np.zeros((2, 2)), np.eye(2), eta=1.0)
    with pytest.raises(ValueError):
        fisher.descent_condition(f, np.eye(2), eta=0)


def test_trace_search_running_max():
    c = build_ansatz(AnsatzSpec("RyRz-CNOT", 3, 1))
    th = np.linspace(0.1, 2.0, c.n_params)
    res = fisher.trace_objective_search(c, th, layers=1, trials=6, seed=3)
    basis, tr = res
    assert np.all(np.diff(res.history) >= 0)
    assert tr == res.history[-1]
    got = np.trace(fisher.cfim(c, th, basis).matrix)
    assert got == pytest.approx(tr, rel=1e-12)
    assert tr <= np.trace(fisher.qfim_parameter_shift(c, th).matrix) + 1e-9
