import numpy as np
import pytest

from pcminimax.blocking import FourierBlockCoefficients


def random_corpus(n=50, seed=2013):
    """Random complex coefficient sets with K <= 4 and N <= 8 (J = N + 1)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        K = int(rng.integers(1, 5))
        N = int(rng.integers(0, 9))
        a = rng.standard_normal((K, N + 1)) + 1j * rng.standard_normal((K, N + 1))
        out.append((FourierBlockCoefficients(a), N))
    return out


def brute_force_QN(a, N):
    """Direct sextuple-loop evaluation of Q_N entries."""
    K = a.shape[0]
    Q = np.zeros(((N + 1) * K, (N + 1) * K), dtype=complex)
    for p in range(N + 1):
        for q in range(N + 1):
            for k in range(K):
                for n in range(K):
                    total = 0j
                    for s in range(min(N - p, N - q) + 1):
                        total += a[k, s + p] * np.conj(a[n, s + q])
                    Q[p * K + k, q * K + n] = total
    return Q


@pytest.fixture(scope="session")
def corpus():
    return random_corpus()


ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record and print one PASS/FAIL line; returns ``ok`` for asserting."""
    def record(number, title, ok, detail):
        line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
