"""Independent reference values for the frozen checks in tests/acceleration.rs.

Usage:
    adacat gen-quadratic --n 100 --seed 1 --out q100.txt
    adacat gen-quadratic --n 20 --seed 3 --out q20.txt
    python3 reference_values.py q100.txt q20.txt ../../data/a1a_synthetic_1605.txt

Needs numpy only. Everything here is recomputed from the files, not from
the Rust implementation.
"""
import sys

import numpy as np

np.set_printoptions(legacy="1.25")


def read_quadratic(path):
    tok = open(path).read().split()
    n = int(tok[0])
    return np.array([float(t) for t in tok[1:1 + n * n]]).reshape(n, n)


def read_libsvm(path, n_features):
    rows, labels = [], []
    for line in open(path):
        line = line.split("#")[0].strip()
        if not line:
            continue
        parts = line.split()
        labels.append(float(parts[0]))
        r = np.zeros(n_features)
        for p in parts[1:]:
            i, v = p.split(":")
            r[int(i) - 1] = float(v)
        rows.append(r)
    return np.array(rows), np.array(labels)


def logistic(z, y):
    m = len(y)
    zy = z * y[:, None]

    def f(w):
        return np.mean(np.logaddexp(0.0, -zy @ w))

    def grad(w):
        s = 0.5 * (1.0 - np.tanh(0.5 * (zy @ w)))  # sigma(-t)
        return -(zy.T @ s) / m

    def hess(w):
        s = 0.5 * (1.0 - np.tanh(0.5 * (zy @ w)))
        return (zy.T * (s * (1 - s))) @ zy / m

    return f, grad, hess


def main(q100, q20, a1a):
    a = read_quadratic(q100)
    ev = np.linalg.eigvalsh(a)
    print(f"q100 lambda_max = {ev[-1]!r}")
    print(f"q100 lambda_min = {ev[0]!r}")
    print(f"q100 trace      = {np.trace(a)!r}")

    # Prox subproblem F(y) = 1/2 y'Ay + L/2 |y - c|^2 with c = ones, L = 0.5.
    b = read_quadratic(q20)
    lam, c = 0.5, np.ones(20)
    y = np.linalg.solve(b + lam * np.eye(20), lam * c)
    fstar = 0.5 * y @ b @ y + 0.5 * lam * np.sum((y - c) ** 2)
    print(f"q20 prox(L=0.5, c=1) F* = {fstar!r}")

    z, lab = read_libsvm(a1a, 123)
    m = len(lab)
    f, grad, hess = logistic(z, lab)
    print(f"a1a rows = {m}, f(0) = {f(np.zeros(123))!r}")
    print(f"a1a |grad f(0)| = {np.linalg.norm(grad(np.zeros(123)))!r}")
    print(f"a1a lambda_max(Z'Z)/(4m) = {np.linalg.eigvalsh(z.T @ z)[-1] / (4 * m)!r}")
    # Newton on the least-norm component; Z is rank deficient, so use lstsq.
    w = np.zeros(123)
    for _ in range(100):
        step = np.linalg.lstsq(hess(w), grad(w), rcond=None)[0]
        w -= step
        if np.linalg.norm(grad(w)) < 1e-15:
            break
    print(f"a1a f* = {f(w)!r} (|grad| = {np.linalg.norm(grad(w)):.2e})")


if __name__ == "__main__":
    main(*sys.argv[1:4])
