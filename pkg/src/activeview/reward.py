"""Polynomial confidence field ``C(p, theta) = phi(p) . theta``.

Both bases are stored as monomial exponent tables so the value, gradient and
Hessian come from one place.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .domain import GridDomain, Viewpoint


class SingularParameterError(ValueError):
    pass


# (ex, ey, ez) per regressor, in canonical positional order.
_FULL20 = (
    (0, 0, 0),
    (3, 0, 0), (0, 3, 0), (0, 0, 3),
    (1, 1, 1),
    (2, 1, 0), (2, 0, 1), (0, 2, 1), (1, 2, 0), (1, 0, 2), (0, 1, 2),
    (2, 0, 0), (0, 2, 0), (0, 0, 2),
    (1, 1, 0), (0, 1, 1), (1, 0, 1),
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
)
_REDUCED6 = (
    (0, 1, 2),  # pz^2 py
    (2, 0, 0),  # px^2
    (0, 2, 0),  # py^2
    (0, 0, 2),  # pz^2
    (0, 1, 1),  # py pz
    (1, 0, 1),  # px pz
)
_NAMES = {
    (0, 0, 0): "1", (3, 0, 0): "px^3", (0, 3, 0): "py^3", (0, 0, 3): "pz^3",
    (1, 1, 1): "px*py*pz", (2, 1, 0): "px^2*py", (2, 0, 1): "px^2*pz",
    (0, 2, 1): "py^2*pz", (1, 2, 0): "py^2*px", (1, 0, 2): "pz^2*px",
    (0, 1, 2): "pz^2*py", (2, 0, 0): "px^2", (0, 2, 0): "py^2", (0, 0, 2): "pz^2",
    (1, 1, 0): "px*py", (0, 1, 1): "py*pz", (1, 0, 1): "px*pz",
    (1, 0, 0): "px", (0, 1, 0): "py", (0, 0, 1): "pz",
}


class Basis(enum.Enum):
    FULL20 = "full20"
    REDUCED6 = "reduced6"

    @property
    def exponents(self) -> np.ndarray:
        return np.array(_FULL20 if self is Basis.FULL20 else _REDUCED6)

    @property
    def dim(self) -> int:
        return 20 if self is Basis.FULL20 else 6

    @property
    def names(self) -> list[str]:
        return [_NAMES[tuple(e)] for e in self.exponents.tolist()]

    @classmethod
    def from_dim(cls, dim: int | str) -> Basis:
        table = {"6": cls.REDUCED6, "20": cls.FULL20, "reduced6": cls.REDUCED6, "full20": cls.FULL20}
        try:
            return table[str(dim).lower()]
        except KeyError:
            raise ValueError(f"unknown basis {dim!r}; expected 6 or 20") from None


# Full20 column of each Reduced6 regressor.
REDUCED6_IN_FULL20 = tuple(_FULL20.index(e) for e in _REDUCED6)


def _powers(p: np.ndarray, exps: np.ndarray) -> np.ndarray:
    # p: (..., 3), exps: (m, 3) -> (..., m)
    out = np.ones(p.shape[:-1] + (len(exps),))
    for axis in range(3):
        out = out * p[..., None, axis] ** exps[:, axis]
    return out


def eval_basis(basis: Basis, p) -> np.ndarray:
    """Regressor vector(s) at ``p``; accepts shape ``(3,)`` or ``(M, 3)``."""
    p = np.asarray(p, dtype=float)
    return _powers(p, basis.exponents)


def basis_jacobian(basis: Basis, p) -> np.ndarray:
    """d phi / d p at a single point, shape ``(m, 3)``."""
    p = np.asarray(p, dtype=float)
    exps = basis.exponents
    jac = np.zeros((len(exps), 3))
    for axis in range(3):
        e = exps.copy()
        coef = e[:, axis].astype(float)
        e[:, axis] = np.maximum(e[:, axis] - 1, 0)
        jac[:, axis] = coef * _powers(p, e)
    return jac


def basis_hessian(basis: Basis, p) -> np.ndarray:
    """Second derivatives of each regressor, shape ``(m, 3, 3)``."""
    p = np.asarray(p, dtype=float)
    exps = basis.exponents
    hess = np.zeros((len(exps), 3, 3))
    for a in range(3):
        for b in range(3):
            e = exps.copy()
            coef = e[:, a].astype(float)
            e[:, a] = np.maximum(e[:, a] - 1, 0)
            coef = coef * e[:, b]
            e[:, b] = np.maximum(e[:, b] - 1, 0)
            hess[:, a, b] = coef * _powers(p, e)
    return hess


@dataclass(frozen=True, eq=False)
class RewardModel:
    basis: Basis
    theta: np.ndarray

    def __post_init__(self) -> None:
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if theta.shape != (self.basis.dim,):
            raise ValueError(f"{self.basis.name} needs {self.basis.dim} coefficients, got {theta.size}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta has non-finite entries")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)


def reward(model: RewardModel, p) -> float | np.ndarray:
    return eval_basis(model.basis, p) @ model.theta


def reward_gradient(model: RewardModel, p) -> np.ndarray:
    return model.theta @ basis_jacobian(model.basis, p)


def reward_hessian(model: RewardModel, p) -> np.ndarray:
    return np.tensordot(model.theta, basis_hessian(model.basis, p), axes=1)


def concavity_report(model: RewardModel, p) -> dict:
    """Hessian eigenvalues at ``p`` and whether the Hessian is negative definite.

    Diagnostic only; nothing downstream requires the field to be concave.
    """
    h = reward_hessian(model, p)
    eig = np.linalg.eigvalsh(0.5 * (h + h.T))
    return {"hessian": h, "eigenvalues": eig, "negative_definite": bool(np.all(eig < 0))}


def unconstrained_optimum(theta) -> np.ndarray:
    """Reference closed-form optimum of the six-term field.

    ``[3 t5 t6 / (4 t1 t2), 15 t5^2 / (8 t1 t3), -3 t5 / (2 t1)]`` with 1-based
    coefficient names. It ignores the domain constraint. The expression zeroes
    the x-derivative but not, in general, the y- and z-derivatives; use
    :func:`stationary_points` for exact critical points.
    """
    t = np.asarray(theta, dtype=float)
    if t.shape != (6,):
        raise ValueError("closed-form optimum is defined for the six-term basis only")
    t1, t2, t3, _, t5, t6 = t
    if t1 == 0 or t2 == 0 or t3 == 0:
        raise SingularParameterError("theta_1, theta_2 and theta_3 must be nonzero")
    return np.array([
        3 * t5 * t6 / (4 * t1 * t2),
        15 * t5 ** 2 / (8 * t1 * t3),
        -3 * t5 / (2 * t1),
    ])


def stationary_points(theta) -> np.ndarray:
    """All real critical points of the six-term field, shape ``(k, 3)``.

    The x- and y-equations give x and y as functions of z; substituting into
    the z-equation leaves z * q(z) = 0 with q quadratic.
    """
    t1, t2, t3, t4, t5, t6 = np.asarray(theta, dtype=float)
    if t2 == 0 or t3 == 0:
        raise SingularParameterError("theta_2 and theta_3 must be nonzero")
    # q(z) = -(t1 z + t5)(2 t1 z + t5) / (2 t3) + 2 t4 - t6^2 / (2 t2)
    k = 2 * t4 - t6 ** 2 / (2 * t2)
    q = np.array([-2 * t1 ** 2, -3 * t1 * t5, -t5 ** 2]) / (2 * t3)
    q[2] += k
    zs = [0.0]
    if np.any(q[:2] != 0):
        zs += [r.real for r in np.roots(q) if abs(r.imag) < 1e-12 * (1 + abs(r.real))]
    pts = []
    for z in zs:
        x = -t6 * z / (2 * t2)
        y = -(t1 * z ** 2 + t5 * z) / (2 * t3)
        pts.append((x, y, z))
    return np.array(pts)


def constrained_optimum(model: RewardModel, grid: GridDomain) -> tuple[Viewpoint, float]:
    """Best grid node; ties go to the smallest (elev_idx, azim_idx)."""
    values = reward(model, grid.positions)
    k = int(np.argmax(values))  # first maximum == lexicographic tie-break
    return grid.viewpoint(*divmod(k, grid.n_azim)), float(values[k])
