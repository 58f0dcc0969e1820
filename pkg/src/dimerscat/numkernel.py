"""
Dense numeric kernels.

Two routines carry all the linear algebra of the package:

* ``eig_sym_tridiagonal`` -- implicit-shift QL iteration for a real
  symmetric tridiagonal matrix, with eigenvectors accumulated from the
  Givens rotations.
* ``solve_complex`` -- LU factorisation with partial pivoting for complex
  square systems. A leading batch axis is supported so that a whole energy
  grid can be factorised in lock step.

Both are deterministic: identical input gives bit-identical output.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConvergenceError, SingularMatrixError, ValidationError

EPS = np.finfo(float).eps
MAX_QL_ITERATIONS = 50


@dataclass(frozen=True)
class SymTriMatrix:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float).reshape(-1)
        e = np.array(self.offdiag, dtype=float).reshape(-1)
        if d.size < 1:
            raise ValidationError("tridiagonal matrix needs dim >= 1")
        if e.size != d.size - 1:
            raise ValidationError(
                f"offdiag has length {e.size}, expected {d.size - 1}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValidationError("tridiagonal matrix has non-finite entries")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def dim(self):
        return self.diag.size

    def to_dense(self):
        return (np.diag(self.diag) + np.diag(self.offdiag, 1)
                + np.diag(self.offdiag, -1))

    def frobenius_norm(self):
        return math.sqrt(float(np.sum(self.diag**2) + 2 * np.sum(self.offdiag**2)))


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues; column ``j`` of ``vectors`` belongs to ``values[j]``."""

    values: np.ndarray
    vectors: np.ndarray


def fix_signs(vectors):
    """Flip columns so the entry of largest magnitude is positive.

    Ties go to the lowest row index (``argmax`` returns the first maximum).
    """
    v = np.array(vectors, dtype=float, copy=True)
    rows = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[rows, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def eig_sym_tridiagonal(m: SymTriMatrix) -> EigenDecomposition:
    n = m.dim
    d = [float(x) for x in m.diag]
    e = [float(x) for x in m.offdiag] + [0.0]
    # rows of zt are the columns of the eigenvector matrix
    zt = np.eye(n)

    for l in range(n):
        iterations = 0
        while True:
            mm = l
            while mm < n - 1:
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= EPS * dd:
                    break
                mm += 1
            if mm == l:
                break
            if iterations == MAX_QL_ITERATIONS:
                raise ConvergenceError(l, iterations)
            iterations += 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[mm] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(mm - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[mm] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = zt[i]
                zi1 = zt[i + 1]
                tmp = zi1.copy()
                zi1 *= c
                zi1 += s * zi
                zi *= c
                zi -= s * tmp
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[mm] = 0.0

    values = np.array(d)
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = fix_signs(zt[order].T)
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigenDecomposition(values=values, vectors=vectors)


def lu_factor(a):
    """In-place style LU with partial pivoting over the last two axes.

    Returns ``(lu, perm)`` where ``perm[..., i]`` is the original row that
    ended up in position ``i``.
    """
    lu = np.array(a, dtype=complex, copy=True)
    if lu.ndim < 2 or lu.shape[-1] != lu.shape[-2]:
        raise ValidationError(f"expected square matrices, got shape {lu.shape}")
    squeeze = lu.ndim == 2
    if squeeze:
        lu = lu[None]
    else:
        lu = lu.reshape((-1,) + lu.shape[-2:])
    nb, n, _ = lu.shape
    batch = np.arange(nb)
    perm = np.tile(np.arange(n), (nb, 1))
    scale = np.max(np.abs(lu), axis=(1, 2))
    tiny = n * EPS * scale

    for k in range(n):
        col = np.abs(lu[:, k:, k])
        p = np.argmax(col, axis=1) + k
        piv = col[batch, p - k]
        bad = np.nonzero((piv <= tiny) | (piv == 0.0))[0]
        if bad.size:
            j = int(bad[0])
            raise SingularMatrixError(k, float(piv[j]), None if squeeze else j)
        swap = np.nonzero(p != k)[0]
        if swap.size:
            ps = p[swap]
            rows_k = lu[swap, k, :].copy()
            lu[swap, k, :] = lu[swap, ps, :]
            lu[swap, ps, :] = rows_k
            pk = perm[swap, k].copy()
            perm[swap, k] = perm[swap, ps]
            perm[swap, ps] = pk
        if k + 1 < n:
            lu[:, k + 1:, k] /= lu[:, k, k][:, None]
            lu[:, k + 1:, k + 1:] -= lu[:, k + 1:, k, None] * lu[:, k, None, k + 1:]

    if squeeze:
        return lu[0], perm[0]
    shape = np.shape(a)
    return lu.reshape(shape), perm.reshape(shape[:-1])


def lu_solve(lu, perm, b):
    lu = np.asarray(lu)
    squeeze = lu.ndim == 2
    b = np.asarray(b, dtype=complex)
    vector_rhs = b.ndim == lu.ndim - 1
    if vector_rhs:
        b = b[..., None]
    if squeeze:
        lu = lu[None]
        perm = np.asarray(perm)[None]
        b = b[None]
    n = lu.shape[-1]
    if b.shape[-2] != n:
        raise ValidationError(
            f"right-hand side has {b.shape[-2]} rows, expected {n}")
    x = np.take_along_axis(b, perm[..., None], axis=-2).copy()
    for i in range(1, n):
        x[..., i, :] -= (lu[..., i:i + 1, :i] @ x[..., :i, :])[..., 0, :]
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[..., i, :] -= (lu[..., i:i + 1, i + 1:] @ x[..., i + 1:, :])[..., 0, :]
        x[..., i, :] /= lu[..., i, i, None]
    if squeeze:
        x = x[0]
    if vector_rhs:
        x = x[..., 0]
    return x


def solve_complex(a, b):
    """Solve ``a @ x = b`` by LU with partial pivoting.

    ``a`` has shape ``(..., n, n)`` and ``b`` shape ``(..., n, r)`` or
    ``(..., n)``. Raises ``SingularMatrixError`` naming the failing pivot.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValidationError("linear system has non-finite entries")
    lu, perm = lu_factor(a)
    return lu_solve(lu, perm, b)
