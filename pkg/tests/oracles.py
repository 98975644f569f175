"""Independent brute-force oracles for the test suite.

Everything here avoids the code paths of the package under test: linear
algebra is plain Gaussian elimination, series products go through
numpy.convolve, and shell sums are evaluated point by point.
"""

import numpy as np

ORACLE_TOL = 1e-10


def rref(A, tol=ORACLE_TOL):
    """Reduced row echelon form with partial pivoting; returns (R, pivots)."""
    R = np.array(A, dtype=complex)
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        pivot_row = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[pivot_row, c]) <= tol:
            continue
        R[[r, pivot_row]] = R[[pivot_row, r]]
        R[r] = R[r] / R[r, c]
        for other in range(rows):
            if other != r and abs(R[other, c]) > 0:
                R[other] = R[other] - R[other, c] * R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A, tol=ORACLE_TOL):
    return len(rref(A, tol)[1])


def null_space(A, tol=ORACLE_TOL):
    """Nullspace basis (columns) from the row-reduced form."""
    A = np.asarray(A, dtype=complex)
    R, pivots = rref(A, tol)
    cols = A.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=complex)
        v[f] = 1.0
        for i, p in enumerate(pivots):
            v[p] = -R[i, f]
        basis.append(v)
    return np.array(basis).T if basis else np.zeros((cols, 0), dtype=complex)


def column_space(A, tol=ORACLE_TOL):
    """Basis of the column space: pivot columns of the original matrix."""
    A = np.asarray(A, dtype=complex)
    _, pivots = rref(A, tol)
    return A[:, pivots] if pivots else np.zeros((A.shape[0], 0), dtype=complex)


def contains(span, v, tol=1e-8):
    """Whether v lies in the column span (by rank comparison)."""
    if span.shape[1] == 0:
        return float(np.linalg.norm(v)) <= tol
    return rank(np.column_stack([span, v]), tol) == rank(span, tol)


def quotient_oracle(Q, G, tol=ORACLE_TOL):
    """Kernel/image/quotient data for a nilpotent charge by row reduction.

    Returns (ker_dim, im_dim, quotient_dim, induced_gram) with quotient
    representatives chosen as the kernel basis columns independent from the
    image.
    """
    Q = np.asarray(Q, dtype=complex)
    G = np.asarray(G, dtype=complex)
    ker = null_space(Q, tol)
    im = column_space(Q, tol)
    reps = []
    current = im
    for j in range(ker.shape[1]):
        v = ker[:, j]
        if not contains(current, v):
            reps.append(v)
            current = np.column_stack([current, v])
    reps = np.array(reps).T if reps else np.zeros((Q.shape[0], 0), dtype=complex)
    gram = reps.conj().T @ G @ reps
    return ker.shape[1], im.shape[1], reps.shape[1], gram


def series_product_coeffs(a, b, order):
    """Scalar Cauchy product through numpy.convolve, truncated."""
    conv = np.convolve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    return conv[: order + 1]


def super_commutator_matrix(Q, grades):
    """Matrix of F -> QF - (-1)^{|F|} FQ on the operator space, by loops."""
    n = Q.shape[0]
    grades = np.asarray(grades)
    cols = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = 1.0
            sign = -1.0 if (grades[i] - grades[j]) % 2 else 1.0
            cols.append((Q @ E - sign * E @ Q).ravel())
    return np.array(cols).T


def direct_shell_sum(points, weights, energies, values, xs, t):
    """Pointwise restricted transform sum, no vectorization tricks."""
    out = np.zeros(len(xs), dtype=complex)
    for k, x in enumerate(xs):
        acc = 0.0 + 0.0j
        for p, w, e, v in zip(points, weights, energies, values):
            acc += w * v * np.exp(1j * (p @ x - e * t))
        out[k] = acc
    return (2.0 * np.pi) ** -1.5 * out
