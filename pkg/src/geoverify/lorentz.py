"""Pointwise linear algebra for so(1, n+1) in a Witt basis ``p, e_1..e_n, q``.

Vectors are column coordinates in that basis; the Gram matrix is
:func:`geoverify.geometry.witt_gram`.  Endomorphisms act by ``v -> M @ v``.
A bivector ``X ^ Y`` acts as ``Z -> g(X, Z) Y - g(Y, Z) X``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .geometry import witt_gram
from .torsion import form_action, torsion_norm

RANK_TOL = 1e-10


def wedge(X, Y, G) -> np.ndarray:
    """Matrix of the bivector ``X ^ Y`` w.r.t. the Gram matrix ``G``."""
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    return np.outer(Y, G @ X) - np.outer(X, G @ Y)


def basis_vector(n: int, k: int) -> np.ndarray:
    v = np.zeros(n + 2)
    v[k] = 1.0
    return v


@dataclass(frozen=True)
class LorentzBivector:
    """Element ``-a p^q + A + p^X`` of the line stabilizer of ``R p``."""

    a: float
    A: np.ndarray
    X: np.ndarray

    @property
    def n(self) -> int:
        return len(self.X)

    def matrix(self) -> np.ndarray:
        return bivector_matrix(self)


def bivector_matrix(b: LorentzBivector) -> np.ndarray:
    n = b.n
    m = np.zeros((n + 2, n + 2))
    m[0, 0] = b.a
    m[0, 1:-1] = -b.X
    m[1:-1, 1:-1] = b.A
    m[1:-1, -1] = b.X
    m[-1, -1] = -b.a
    return m


def matrix_bivector(m, tol: float = 1e-12) -> LorentzBivector:
    """Inverse of :func:`bivector_matrix`; rejects matrices outside the stabilizer."""
    m = np.asarray(m, float)
    N = m.shape[0]
    if N < 2 or m.shape != (N, N):
        raise PreconditionError("expected a square matrix of size n+2 >= 2")
    n = N - 2
    a = m[0, 0]
    A = m[1:-1, 1:-1]
    X = m[1:-1, -1]
    bad = [
        np.max(np.abs(m[1:, 0])) if n + 1 > 0 else 0.0,
        abs(m[0, -1]) if N > 1 else 0.0,
        np.max(np.abs(m[-1, :-1])) if N > 1 else 0.0,
        abs(m[-1, -1] + a),
        np.max(np.abs(m[0, 1:-1] + X)) if n else 0.0,
        np.max(np.abs(A + A.T)) if n else 0.0,
    ]
    if max(bad) > tol:
        raise PreconditionError("matrix is not in the isotropic-line stabilizer shape")
    return LorentzBivector(float(a), A.copy(), X.copy())


def is_antisymmetric(m, G, tol: float = 1e-12) -> bool:
    M = G @ np.asarray(m)
    return float(np.max(np.abs(M + M.T))) <= tol


def stabilizer_basis(kind: str, n: int) -> list:
    """Basis of the stabilizer of the line ``R p`` or of the vector ``p``."""
    if kind not in ("line", "vector"):
        raise ValueError("kind must be 'line' or 'vector'")
    out = []
    z = np.zeros((n, n))
    zv = np.zeros(n)
    if kind == "line":
        out.append(LorentzBivector(1.0, z.copy(), zv.copy()))
    for i in range(n):
        for j in range(i + 1, n):
            A = np.zeros((n, n))
            # e_i ^ e_j maps e_i -> e_j and e_j -> -e_i
            A[j, i] = 1.0
            A[i, j] = -1.0
            out.append(LorentzBivector(0.0, A, zv.copy()))
    for i in range(n):
        X = np.zeros(n)
        X[i] = 1.0
        out.append(LorentzBivector(0.0, z.copy(), X))
    return out


def _as_matrix(b):
    return b.matrix() if isinstance(b, LorentzBivector) else np.asarray(b, float)


def null_space(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal null-space basis (columns) with a relative rank threshold."""
    if M.size == 0:
        return np.eye(M.shape[1])
    u, s, vt = np.linalg.svd(M, full_matrices=True)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * max(1.0, scale)))
    return vt[rank:].T.copy()


def annihilator(tau, subalg, G=None, tol: float = RANK_TOL) -> list:
    """Basis (matrices) of ``{L in span(subalg) : L . tau = 0}``."""
    tau = np.asarray(tau, float)
    mats = [_as_matrix(b) for b in subalg]
    if not mats:
        return []
    if G is None:
        G = witt_gram(tau.shape[0] - 2)
    cols = np.column_stack([form_action(m, tau).ravel() for m in mats])
    ns = null_space(cols, tol)
    return [sum(c * m for c, m in zip(vec, mats)) for vec in ns.T]


@dataclass(frozen=True)
class ShapeResult:
    shape: str
    omega: np.ndarray | None = None
    omega_E: np.ndarray | None = None
    norm2: float | None = None


def wedge_p_omega(omega: np.ndarray) -> np.ndarray:
    """3-form ``p^flat ^ omega`` in Witt coordinates, ``omega`` on the screen."""
    n = omega.shape[0]
    S = np.zeros((n + 2,) * 3)
    q = n + 1
    # p^flat = g(p, .) is the dual of q
    S[q, 1:-1, 1:-1] = omega
    S[1:-1, q, 1:-1] = -omega
    S[1:-1, 1:-1, q] = omega
    return S


def embed_screen_form(omega_E: np.ndarray) -> np.ndarray:
    n = omega_E.shape[0]
    S = np.zeros((n + 2,) * 3)
    S[1:-1, 1:-1, 1:-1] = omega_E
    return S


def classify_shape(S, tol: float = RANK_TOL) -> ShapeResult:
    """Classify a 3-form in Witt coordinates as zero, p^omega, p^omega + omega_E or other."""
    S = np.asarray(S, float)
    N = S.shape[0]
    n = N - 2
    G = witt_gram(n)
    if np.max(np.abs(S)) <= tol:
        return ShapeResult("zero", np.zeros((n, n)), np.zeros((n, n, n)), 0.0)
    # a non-zero S(p, ., .) means a q-leg
    if np.max(np.abs(S[0])) > tol:
        return ShapeResult("other", norm2=torsion_norm(S, G))
    omega = S[-1, 1:-1, 1:-1].copy()
    omega_E = S[1:-1, 1:-1, 1:-1].copy()
    norm2 = torsion_norm(S, G)
    if np.max(np.abs(omega_E)) <= tol:
        return ShapeResult("p^omega", omega, np.zeros_like(omega_E), norm2)
    return ShapeResult("p^omega+omega_E", omega, omega_E, norm2)


def reassemble_shape(res: ShapeResult) -> np.ndarray:
    return wedge_p_omega(res.omega) + embed_screen_form(res.omega_E)


def invariant_subspace_check(gens, basis, tol: float = RANK_TOL) -> bool:
    """True iff every generator maps ``span(basis)`` into itself."""
    B = np.asarray(basis, float)
    if B.ndim == 1:
        B = B[:, None]
    Q, _ = np.linalg.qr(B)
    P = Q @ Q.T
    for b in gens:
        M = _as_matrix(b)
        img = M @ B
        resid = img - P @ img
        if np.max(np.abs(resid)) > tol * max(1.0, float(np.max(np.abs(img)))):
            return False
    return True


def screen_project(v, frame_matrix=None, G=None, tol: float = 1e-10) -> np.ndarray:
    """Screen coefficients of ``v`` in ``p^perp`` (the ``p`` component is dropped).

    ``frame_matrix`` has columns ``p, e_1..e_n, q`` expressed in the same
    coordinates as ``v``; ``G`` is the metric in those coordinates.  With no
    frame, ``v`` is taken in Witt coordinates.
    """
    v = np.asarray(v, float)
    if frame_matrix is None:
        frame_matrix = np.eye(v.shape[0])
        G = witt_gram(v.shape[0] - 2)
    F = np.asarray(frame_matrix, float)
    p = F[:, 0]
    if abs(p @ G @ v) > tol * max(1.0, float(np.max(np.abs(v)))):
        raise PreconditionError("vector is not orthogonal to p")
    E = F[:, 1:-1]
    return E.T @ G @ v


def lie_closure_residual(mats) -> float:
    """Distance of all commutators from the span of ``mats``."""
    mats = [_as_matrix(m) for m in mats]
    if not mats:
        return 0.0
    B = np.column_stack([m.ravel() for m in mats])
    worst = 0.0
    for a in mats:
        for b in mats:
            c = (a @ b - b @ a).ravel()
            coef, *_ = np.linalg.lstsq(B, c, rcond=None)
            worst = max(worst, float(np.max(np.abs(B @ coef - c))))
    return worst


def random_stabilizer_element(kind: str, n: int, rng) -> LorentzBivector:
    a = float(rng.normal()) if kind == "line" else 0.0
    M = rng.normal(size=(n, n))
    return LorentzBivector(a, M - M.T, rng.normal(size=n))

