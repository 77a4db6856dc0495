"""Acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line (also repeated
in the terminal summary) and then asserts the same condition.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from vqa_natgrad import experiments as ex
from vqa_natgrad import fisher, linalg
from vqa_natgrad.circuits import AnsatzSpec, ParameterizedCircuit, Rotation, build_ansatz, sample_random_measurement
from vqa_natgrad.hamiltonians import PauliHamiltonian, random_instance
from vqa_natgrad.optimizers import (OptimizerConfig, compute_step, run, sample_subsets,
                                    subset_coverage_fraction, subset_coverage_probability)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def random_small_ansatz(rng, max_qubits=6, max_params=24):
    while True:
        n = int(rng.integers(1, max_qubits + 1))
        family = str(rng.choice(["RyRz-CNOT", "Ry-CZ"]))
        spec = AnsatzSpec(family, n, int(rng.integers(1, 5)), str(rng.choice(["ring", "all-to-all"])),
                          second_axis=str(rng.choice(["Z", "X"])))
        if spec.param_count <= max_params:
            return build_ansatz(spec)


def random_pauli_hamiltonian(n, terms, rng):
    pairs = []
    for _ in range(terms):
        ops = "".join(rng.choice(list("IXYZ"), size=n))
        if set(ops) == {"I"}:
            ops = "Z" + ops[1:]
        pairs.append((float(rng.normal()), ops))
    return PauliHamiltonian.from_list(pairs)


def fisher_draws(count=100, seed=3):
    rng = np.random.default_rng(seed)
    for d in range(count):
        c = random_small_ansatz(rng, max_qubits=5, max_params=30)
        th = rng.uniform(0, 2 * np.pi, c.n_params)
        basis = sample_random_measurement(c.n_qubits, int(rng.integers(1, 4)), (seed, d))
        yield c, th, basis


def test_criterion_01_qfim_oracle():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        c = random_small_ansatz(rng)
        th = rng.uniform(0, 2 * np.pi, c.n_params)
        diff = fisher.qfim_parameter_shift(c, th).matrix - fisher.qfim_exact(c, th).matrix
        worst = max(worst, float(np.abs(diff).max()))
    secs = time.perf_counter() - t0
    report(1, worst < 1e-8 and secs < 60, f"max |F_shift - F_exact| = {worst:.2e} (< 1e-8), {secs:.1f}s (< 60s)")


def test_criterion_02_gradient():
    rng = np.random.default_rng(2)
    worst = 0.0
    eps = 1e-5
    for _ in range(10):
        c = build_ansatz(AnsatzSpec(str(rng.choice(["RyRz-CNOT", "Ry-CZ"])), 4, int(rng.integers(1, 4))))
        h = random_pauli_hamiltonian(4, 5, rng)
        th = rng.uniform(0, 2 * np.pi, c.n_params)
        g = fisher.gradient_parameter_shift(c, h, th)
        shifts = np.vstack([th + eps * np.eye(c.n_params), th - eps * np.eye(c.n_params)])
        e = h.expectation_batch(c.evaluate_batch(shifts))
        fd = (e[:c.n_params] - e[c.n_params:]) / (2 * eps)
        worst = max(worst, float(np.abs(g - fd).max()))
    report(2, worst < 1e-6, f"max |shift - central FD| = {worst:.2e} (< 1e-6)")


def test_criterion_03_loewner_bound():
    worst = np.inf
    for c, th, basis in fisher_draws():
        fq = fisher.qfim_parameter_shift(c, th).matrix
        fc = fisher.cfim(c, th, basis).matrix
        worst = min(worst, linalg.min_eigenvalue(fq - fc))
    report(3, worst >= -1e-8, f"min eig(F_Q - F_C) over 100 draws = {worst:.2e} (>= -1e-8)")


def test_criterion_04_null_space():
    worst, rank_ok, with_kernel = 0.0, True, 0
    for c, th, basis in fisher_draws():
        fq = fisher.qfim_parameter_shift(c, th).matrix
        fc = fisher.cfim(c, th, basis).matrix
        _, v = fisher.null_space_containment(fq, fc, 1e-8)
        worst = max(worst, v)
        with_kernel += linalg.rank_tol(fq, 1e-8) < c.n_params
        rank_ok &= linalg.rank_tol(fc, 1e-8) <= linalg.rank_tol(fq, 1e-8)
    ok = worst < 1e-8 and rank_ok
    report(4, ok, f"max v^T F_C v on ker F_Q = {worst:.2e} (< 1e-8), rank(F_C) <= rank(F_Q) in all draws: {rank_ok}"
                  f" ({with_kernel}/100 draws had a kernel)")


def test_criterion_05_single_parameter():
    c = ParameterizedCircuit(1, (Rotation("Y", 0, 0),), 1)
    rng = np.random.default_rng(5)
    worst = 0.0
    done = 0
    while done < 20:
        t = rng.uniform(0, 2 * np.pi)
        if min(abs(t), abs(t - np.pi), abs(t - 2 * np.pi)) < 1e-3:
            continue
        fc = fisher.cfim(c, [t]).matrix[0, 0]
        fq = fisher.qfim_parameter_shift(c, [t]).matrix[0, 0]
        worst = max(worst, abs(fc - 1), abs(fq - 1))
        done += 1
    report(5, worst < 1e-10, f"max deviation from [[1]] = {worst:.2e} (< 1e-10)")


def test_criterion_06_accounting():
    c = build_ansatz(AnsatzSpec("RyRz-CNOT", 3, 2))
    assert c.n_params == 12
    h = random_pauli_hamiltonian(3, 4, np.random.default_rng(6))
    th = np.random.default_rng(7).uniform(0, 2 * np.pi, 12)
    want = {"RNG": 7 * 49, "QNG": 7 * (24 + 312), "GD": 7 * 24, "SCQNG": 7 * (12 + 84)}
    got = {m: run(OptimizerConfig(m, 0.01, 7, subset_size=6), c, h, th).records[-1].preparations for m in want}
    report(6, got == want, f"counters {got} expected {want}")


def test_criterion_07_lemma2():
    exact_ok, mc_ok, worst_z = True, True, 0.0
    draws = 100_000
    for m in range(1, 9):
        for l in range(1, min(4, m) + 1):
            for k in range(0, min(3, m - l) + 1):
                sets = list(itertools.combinations(range(m), l + k))
                hits = sum(set(range(l)) <= set(s) for s in sets)
                exact = Fraction(hits, len(sets))
                exact_ok &= subset_coverage_fraction(m, l, k) == exact
                exact_ok &= abs(subset_coverage_probability(m, l, k) - float(exact)) < 1e-12
                rows = sample_subsets(m, l + k, draws, seed=(m, l, k))
                phat = float(np.mean(np.all(rows[:, :l] == np.arange(l), axis=1)))
                p = float(exact)
                se = np.sqrt(p * (1 - p) / draws)
                if se == 0:
                    mc_ok &= phat == p
                else:
                    z = abs(phat - p) / se
                    worst_z = max(worst_z, z)
                    mc_ok &= z <= 3
    report(7, exact_ok and mc_ok, f"exact rational agreement: {exact_ok}; Monte Carlo max |z| = {worst_z:.2f} (<= 3)")


def test_criterion_08_distance_trend():
    t0 = time.perf_counter()
    c = build_ansatz(AnsatzSpec("RyRz-CNOT", 8, 3))
    th = np.random.default_rng([0, 0]).uniform(0, 2 * np.pi, c.n_params)
    hist = ex.distance_histogram(c, th, 200, (1, 2, 3), seed=0)
    means = [hist[d]["mean"] for d in (1, 2, 3)]
    secs = time.perf_counter() - t0
    ok = means[0] > means[1] > means[2] and secs < 600
    report(8, ok, "mean ||F_C - F_Q/2|| by basis depth 1,2,3 = " + ", ".join(f"{x:.3f}" for x in means)
           + f" (strictly decreasing), {secs:.0f}s (< 600s)")


def test_criterion_09_rank_trend():
    rows = ex.rank_trials(ex.AnalysisConfig(rank_trials=50))
    frac = np.mean([r["rank_random"] >= r["rank_z"] for r in rows])
    q_ok = all(r["rank_q"] >= max(r["rank_z"], r["rank_random"]) for r in rows)
    ex_row = rows[0]
    report(9, frac >= 0.8 and q_ok,
           f"rank(F_random) >= rank(F_Z) in {frac:.0%} of 50 trials (>= 80%), rank(F_Q) >= both in all: {q_ok}"
           f" (trial 0: m={ex_row['m']} Q={ex_row['rank_q']} Z={ex_row['rank_z']} R={ex_row['rank_random']})")


def test_criterion_10_maxcut_ordering():
    t0 = time.perf_counter()
    cfg = ex.ExperimentConfig(
        problem=ex.ProblemConfig("MaxCut", 8, count=10, seed=0),
        ansatz={"family": "Ry-CZ", "layers": 4, "connectivity": "ring"},
        methods=[OptimizerConfig(m, 0.05, 200, basis_layers=3) for m in ("GD", "QNG", "RNG")],
    )
    agg = ex.run_benchmark(cfg).aggregates()
    gd, qng, rng_ = (agg[m]["mean_overlap"] for m in ("GD", "QNG", "RNG"))
    secs = time.perf_counter() - t0
    ok = rng_ > gd and qng > gd and abs(rng_ - qng) <= 0.05 and secs < 1800
    report(10, ok, f"mean overlap GD={gd:.3f} QNG={qng:.3f} RNG={rng_:.3f}; need RNG>GD, QNG>GD, |RNG-QNG|<=0.05;"
                   f" {secs:.0f}s (< 1800s)")


@pytest.fixture(scope="module")
def heisenberg_traces():
    return ex.z_basis_failure(ex.AnalysisConfig(heisenberg_iterations=300))


def test_criterion_11_heisenberg_resources(heisenberg_traces):
    t = heisenberg_traces
    q_final = t["QNG"].final_loss
    r = t["RNG"]
    reached = np.flatnonzero(r.losses <= q_final + 0.02 * abs(q_final))
    preps = int(r.preparations[reached[0]]) if reached.size else None
    q_total = int(t["QNG"].records[-1].preparations)
    gd = t["GD"].final_loss
    ok = preps is not None and preps < q_total / 2 and gd > q_final and gd > r.final_loss
    report(11, ok, f"E_opt={t['e_opt']:.4f}; QNG final {q_final:.4f} after {q_total} preps; RNG within 2% after"
                   f" {preps} preps (< {q_total // 2}); final RNG {r.final_loss:.4f}, GD {gd:.4f} (worse than both)")


def test_criterion_12_z_basis_failure(heisenberg_traces):
    t = heisenberg_traces
    z, r = t["NGZ"], t["RNG"]
    big = float(z.step_norms.max())
    med = float(np.median(r.step_norms))
    ok = big > 10 * med and z.losses.min() > r.final_loss
    report(12, ok, f"Z-basis max step {big:.2f} vs 10x RNG median {10 * med:.3f}; Z-basis best loss"
                   f" {z.losses.min():.4f} vs RNG final {r.final_loss:.4f} (must not reach)")


def test_criterion_13_scqng_boundary():
    c = build_ansatz(AnsatzSpec("RyRz-CNOT", 4, 2))
    h = random_pauli_hamiltonian(4, 6, np.random.default_rng(13))
    th = np.random.default_rng(14).uniform(0, 2 * np.pi, c.n_params)
    a = run(OptimizerConfig("SCQNG", 0.05, 10, subset_size=c.n_params, seed=9), c, h, th)
    b = run(OptimizerConfig("QNG", 0.05, 10, seed=9), c, h, th)
    same = (a.theta.tobytes() == b.theta.tobytes() and a.losses.tobytes() == b.losses.tobytes()
            and list(a.preparations) == list(b.preparations))
    report(13, same, f"SC-QNG(l=m) and QNG traces bitwise identical over 10 iterations: {same}")


def test_criterion_14_descent_condition():
    eta = 0.01
    c = build_ansatz(AnsatzSpec("Ry-CZ", 4, 2))
    checked = violations = zero_steps = 0
    for s in range(20):
        h = random_instance("MaxCut", 4, s).hamiltonian
        th = ex.initial_theta(c.n_params, s)
        for method in ("RNG", "QNG"):
            theta = th.copy()
            for k in range(1, 11):
                g = fisher.gradient_parameter_shift(c, h, theta)
                if method == "QNG":
                    f = fisher.qfim_parameter_shift(c, theta)
                else:
                    f = fisher.cfim(c, theta, sample_random_measurement(4, 1, (s, k)))
                step = compute_step(method, g, f, eta)
                hess = fisher.hessian_finite_difference(c, h, theta)
                new_theta = theta + step
                if fisher.descent_condition(f, hess, eta):
                    if not np.any(step):
                        zero_steps += 1
                    else:
                        checked += 1
                        before = h.expectation_batch(c.evaluate_batch(theta[None]))[0]
                        after = h.expectation_batch(c.evaluate_batch(new_theta[None]))[0]
                        violations += after >= before
                theta = new_theta
    report(14, violations == 0 and checked > 0,
           f"{checked} steps satisfied the condition, {violations} failed to decrease the loss (must be 0);"
           f" {zero_steps} zero steps skipped")
