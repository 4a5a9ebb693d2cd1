"""Brute-force oracle for the homogenized tensor of a laminate.

The cell energy inf_v int L(M + grad v):(M + grad v) is minimized over
continuous piecewise-linear periodic fields v(y) of the lamination
coordinate, so grad v = v' x n. This is a finite-element computation
independent of the closed 1* formulas in :mod:`laminell.lamination`.

Also provides a quadrature check that the diagonal cofactor entries of a
periodic gradient integrate to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from .tensors import ElasticTensor, LaminateProfile, axis_vector, from_mandel


class UnboundedBelowError(ArithmeticError):
    """The discrete cell energy has a negative direction: the infimum is -inf."""

    def __init__(self, rayleigh: float):
        self.rayleigh = rayleigh
        super().__init__(f"discrete cell energy unbounded below (Rayleigh quotient {rayleigh:.3e})")


@dataclass
class CellProblemSolution:
    M: np.ndarray
    n_elems: int
    nodes: np.ndarray
    corrector: np.ndarray   # (n_nodes, 3), periodic: node n_nodes wraps to node 0
    energy: float
    condition: float = math.nan
    notes: list = field(default_factory=list)

    @property
    def corrector_mean(self) -> np.ndarray:
        h = np.diff(np.append(self.nodes, 1.0))
        v = self.corrector
        vn = np.roll(v, -1, axis=0)
        return (0.5 * h[:, None] * (v + vn)).sum(axis=0)

    def as_dict(self) -> dict:
        return {"M": self.M.tolist(), "n_elems": self.n_elems, "energy": self.energy,
                "condition": self.condition}


def aligned_mesh(fractions: Sequence[float], n_elems: int) -> tuple[np.ndarray, np.ndarray]:
    """Node positions on [0, 1) and the layer index of each element.

    Every layer interface is a node; the remaining elements are spread in
    proportion to the layer fractions (at least one per layer).
    """
    fractions = np.asarray(fractions, dtype=float)
    p = len(fractions)
    if n_elems < max(2, p):
        raise ValueError(f"need at least max(2, {p}) elements, got {n_elems}")
    counts = np.maximum(1, np.floor(fractions * n_elems).astype(int))
    while counts.sum() < n_elems:
        counts[np.argmax(fractions * n_elems - counts)] += 1
    while counts.sum() > n_elems:
        k = np.argmax(np.where(counts > 1, counts - fractions * n_elems, -np.inf))
        counts[k] -= 1
    starts = np.concatenate([[0.0], np.cumsum(fractions)[:-1]])
    nodes, owner = [], []
    for k in range(p):
        nodes.extend(starts[k] + fractions[k] * np.arange(counts[k]) / counts[k])
        owner.extend([k] * counts[k])
    return np.array(nodes), np.array(owner)


def uniform_mesh(profile: LaminateProfile, n_elems: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform mesh; each element takes the layer containing its midpoint."""
    nodes = np.arange(n_elems) / n_elems
    mids = nodes + 0.5 / n_elems
    edges = np.cumsum(profile.fractions)
    owner = np.minimum(np.searchsorted(edges, mids, side="right"), len(edges) - 1)
    return nodes, owner


class _CellSystem:
    """Assembled and factored periodic stiffness for one profile and mesh.

    The stiffness does not depend on ``M``, so one factorization serves every
    macroscopic matrix (the polarization in :func:`homogenize_numeric`).
    """

    def __init__(self, profile: LaminateProfile, n_elems: int,
                 mesh: tuple[np.ndarray, np.ndarray] | None):
        nodes, owner = mesh if mesh is not None else aligned_mesh(profile.fractions, n_elems)
        N = len(nodes)
        self.nodes, self.N = nodes, N
        self.h = np.diff(np.append(nodes, 1.0))
        n = axis_vector(profile.axis)
        fulls = [t.full for t in profile.tensors]
        self.Lf = [fulls[k] for k in owner]
        self.Lstack = np.stack(self.Lf)
        dof = 3 * N
        K = np.zeros((dof, dof))
        for e in range(N):
            Ke = np.einsum("ijkl,j,l->ik", self.Lf[e], n, n) / self.h[e]     # acoustic matrix / h
            i0, i1 = 3 * e, 3 * ((e + 1) % N)
            K[i0:i0 + 3, i0:i0 + 3] += Ke
            K[i1:i1 + 3, i1:i1 + 3] += Ke
            K[i0:i0 + 3, i1:i1 + 3] -= Ke
            K[i1:i1 + 3, i0:i0 + 3] -= Ke
        K = 0.5 * (K + K.T)
        # mean-zero constraint via a rank-3 correction c (W W^T) with nodal weights
        wts = 0.5 * (self.h + np.roll(self.h, 1))
        W = np.kron(wts[:, None], np.eye(3))
        scale = max(np.abs(K).max(), 1.0)
        Kc = K + scale * W @ W.T
        self.notes = []
        self.cf = None
        try:
            self.cf = cho_factor(Kc)
            if dof <= 600:
                w = np.linalg.eigvalsh(Kc)
                self.condition = float(w[-1] / w[0])
            else:
                self.condition = math.nan
        except np.linalg.LinAlgError:
            w, _ = eigh(K)
            if w[0] < -1e-12 * scale:
                raise UnboundedBelowError(float(w[0])) from None
            self.Kc = Kc
            self.condition = math.inf
            self.notes.append("singular reduced stiffness; minimum-norm minimizer used")
        self.n = n

    def solve(self, M: np.ndarray) -> CellProblemSolution:
        N, n = self.N, self.n
        ge = np.einsum("eijkl,kl,j->ei", self.Lstack, M, n)          # (L M) n per element
        base = float(self.h @ np.einsum("eijkl,ij,kl->e", self.Lstack, M, M))
        # linear term 2 h (L M n) . w with w = (v1 - v0)/h
        f = (ge - np.roll(ge, 1, axis=0)).ravel()
        if self.cf is not None:
            v = cho_solve(self.cf, f)
        else:
            v = np.linalg.lstsq(self.Kc, f, rcond=None)[0]
        # energy = base - 2 f.v + v K v at the minimizer K v = f  ->  base - f.v
        energy = float(base - f @ v)
        return CellProblemSolution(M=M, n_elems=N, nodes=self.nodes, corrector=v.reshape(N, 3),
                                   energy=energy, condition=self.condition, notes=list(self.notes))


def solve_cell_1d(profile: LaminateProfile, M: np.ndarray, n_elems: int = 64,
                  mesh: tuple[np.ndarray, np.ndarray] | None = None) -> CellProblemSolution:
    """Minimize the discrete periodic cell energy for the macroscopic matrix ``M``.

    Raises :class:`UnboundedBelowError` when the stiffness matrix has a
    negative eigenvalue (possible only for non-strongly-elliptic layers).
    """
    return _CellSystem(profile, n_elems, mesh).solve(np.asarray(M, dtype=float))


def _mandel_basis() -> list[np.ndarray]:
    out = []
    for a in range(6):
        e = np.zeros(6)
        e[a] = 1.0
        out.append(from_mandel(e))
    return out


def homogenize_numeric(profile: LaminateProfile, n_elems: int = 64,
                       mesh: tuple[np.ndarray, np.ndarray] | None = None) -> ElasticTensor:
    """Homogenized tensor from cell energies by polarization over the Mandel basis."""
    system = _CellSystem(profile, n_elems, mesh)
    basis = _mandel_basis()
    diag = [system.solve(E).energy for E in basis]
    c = np.diag(diag)
    for a in range(6):
        for b in range(a + 1, 6):
            eab = system.solve(basis[a] + basis[b]).energy
            c[a, b] = c[b, a] = 0.5 * (eab - diag[a] - diag[b])
    return ElasticTensor(c)


@dataclass(frozen=True)
class TrigField:
    """Periodic vector field on the unit cube given as trigonometric sums.

    ``terms[i]`` lists ``(amplitude, k, kind)`` for component ``i`` with ``k``
    an integer 3-vector and ``kind`` either ``"sin"`` or ``"cos"``; the term
    is ``amplitude * kind(2 pi k.y)``.
    """

    terms: tuple

    @property
    def degree(self) -> int:
        return max((int(np.abs(k).max()) for comp in self.terms for _, k, _ in comp), default=0)

    def gradient(self, y: np.ndarray) -> np.ndarray:
        """grad v at points ``y`` of shape (..., 3); returns (..., 3, 3)."""
        G = np.zeros(y.shape[:-1] + (3, 3))
        for i, comp in enumerate(self.terms):
            for amp, k, kind in comp:
                k = np.asarray(k, dtype=float)
                ph = 2 * math.pi * (y @ k)
                d = np.cos(ph) if kind == "sin" else -np.sin(ph)
                G[..., i, :] += (2 * math.pi * amp) * d[..., None] * k
        return G


def random_trig_field(rng: np.random.Generator, degree: int = 3, terms: int = 4) -> TrigField:
    comps = []
    for _ in range(3):
        comp = []
        for _ in range(terms):
            k = rng.integers(-degree, degree + 1, size=3)
            comp.append((float(rng.normal()), tuple(int(x) for x in k),
                         "sin" if rng.random() < 0.5 else "cos"))
        comps.append(tuple(comp))
    return TrigField(tuple(comps))


def quasi_affinity_check(v: TrigField, points: int | None = None) -> float:
    """max_i |int_cell adj_ii(grad v)| by a tensor-product periodic rule.

    The integrand is a trigonometric polynomial of degree at most 2 deg(v)
    in each variable; the equispaced rule with more than that many points
    per direction integrates it exactly.
    """
    q = points or 2 * v.degree + 2
    t = np.arange(q) / q
    Y = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1).reshape(-1, 3)
    G = v.gradient(Y)
    res = []
    for i in range(3):
        r = [k for k in range(3) if k != i]
        minors = G[:, r[0], r[0]] * G[:, r[1], r[1]] - G[:, r[0], r[1]] * G[:, r[1], r[0]]
        res.append(abs(minors.mean()))
    return float(max(res))

