"""Closed-form spectral machinery for the ring-pursuit coupling matrix.

Each coordinate axis of the linear model evolves as x' = M x + B u with
M = circ(-1, 1, 0, ..., 0).  M is circulant, so its eigenstructure is known in
closed form and nothing here ever runs a numeric eigensolver:

    rho      = exp(-2j pi / n)
    lambda_k = rho**k - 1                      (lambda_0 = 0, the agreement mode)
    v_k[m]   = rho**(k m) / sqrt(n)            (unitary DFT columns)

All nonzero eigenvalues sit on the circle of radius 1 centred at -1, so their
real parts are strictly negative and every non-agreement mode decays.

The exact interval solution, the asymptotic deviation profile and the reduced
agreement velocity all come from resolving states against this basis.  Final
results are real; a lingering imaginary part above 1e-9 means the basis and
the inputs disagree and is reported as an internal error, never truncated
silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LeaderSet, Vec2

_IMAG_TOL = 1e-9


class InternalConsistencyError(ArithmeticError):
    """A closed-form identity failed beyond numerical dust; indicates a bug."""


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvalues and unitary eigenvector matrix of M for one ring size."""

    n: int
    eigenvalues: np.ndarray  # (n,) complex, eigenvalues[0] == 0 exactly
    vectors: np.ndarray      # (n, n) complex, column k is v_k

    def mode(self, k: int) -> tuple[complex, np.ndarray]:
        return complex(self.eigenvalues[k]), self.vectors[:, k]


def build_basis(n: int) -> SpectralBasis:
    if n < 2:
        raise ValueError("ring needs at least 2 agents")
    k = np.arange(n)
    lam = np.exp(-2j * np.pi * k / n) - 1.0
    lam[0] = 0.0 + 0.0j
    m = np.arange(n).reshape(-1, 1)
    vectors = np.exp(-2j * np.pi * (m * k) / n) / np.sqrt(n)
    vectors.setflags(write=False)
    lam.setflags(write=False)
    return SpectralBasis(n=n, eigenvalues=lam, vectors=vectors)


def _real_or_raise(z: np.ndarray, what: str) -> np.ndarray:
    residue = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if residue >= _IMAG_TOL:
        raise InternalConsistencyError(f"{what}: imaginary residue {residue:.3e}")
    return z.real.copy()


def _flags_array(flags: LeaderSet) -> np.ndarray:
    return np.array([1.0 if f else 0.0 for f in flags.flags])


def exact_axis_state(
    basis: SpectralBasis,
    x0: np.ndarray,
    flags: LeaderSet,
    u: float,
    t: float,
) -> np.ndarray:
    """Exact single-axis state at elapsed time t under constant control u.

    Homogeneous part: sum_k e^(lambda_k t) v_k <v_k, x0>.  Forced part: the
    agreement mode integrates linearly in t, each decaying mode k >= 1
    contributes int_0^t e^(lambda_k s) ds = (e^(lambda_k t) - 1) / lambda_k
    times its share of B u, saturating at -1 / lambda_k.
    """
    n = basis.n
    if x0.shape != (n,):
        raise ValueError("x0 must have shape (n,)")
    if t < 0:
        raise ValueError("t must be non-negative")
    lam = basis.eigenvalues
    v = basis.vectors
    b = _flags_array(flags)

    coeff0 = v.conj().T @ x0.astype(complex)
    out = v @ (np.exp(lam * t) * coeff0)

    coeff_b = v.conj().T @ b.astype(complex)
    gain = np.empty(n, dtype=complex)
    gain[0] = t * coeff_b[0]
    gain[1:] = (np.exp(lam[1:] * t) - 1.0) / lam[1:] * coeff_b[1:]
    out = out + u * (v @ gain)
    return _real_or_raise(out, "exact_axis_state")


def deviation_gamma(basis: SpectralBasis, flags: LeaderSet) -> np.ndarray:
    """Per-agent asymptotic offset gains: -Re{ sum_{k>=1} v_k v_k* / lambda_k } B.

    The saturated forced response of each decaying mode is -1 / lambda_k of
    its share of B, hence the leading minus with this eigenvalue convention
    (all lambda_k, k >= 1, have negative real part).  Zero-sum by
    construction (every summand is orthogonal to the agreement mode), and
    exactly zero when every agent detects (B is then pure agreement mode).
    """
    lam = basis.eigenvalues
    v = basis.vectors
    b = _flags_array(flags).astype(complex)
    coeff = v.conj().T @ b
    g = v[:, 1:] @ (-coeff[1:] / lam[1:])
    return _real_or_raise(g, "deviation_gamma")


def deviation_vector(basis: SpectralBasis, flags: LeaderSet, u: float) -> np.ndarray:
    """Asymptotic per-agent deviation along one axis under control component u."""
    return deviation_gamma(basis, flags) * u


def agreement_velocity(leaders: LeaderSet, u_c: Vec2) -> Vec2:
    """Common asymptotic velocity: the detecting fraction times the command."""
    return u_c.scaled(leaders.n_detecting / len(leaders))


@dataclass(frozen=True)
class FormationPrediction:
    """Asymptotic motion: p_i(t) -> alpha + beta u_c t + gamma_i u_c."""

    alpha: Vec2
    beta: float
    gamma: tuple[float, ...]
    u_c: Vec2

    @property
    def velocity(self) -> Vec2:
        return self.u_c.scaled(self.beta)

    def position_at(self, i: int, t: float) -> Vec2:
        drift = self.beta * t + self.gamma[i]
        return Vec2(self.alpha.x + drift * self.u_c.x, self.alpha.y + drift * self.u_c.y)


def predict_formation(
    positions: tuple[Vec2, ...] | list[Vec2],
    leaders: LeaderSet,
    u_c: Vec2,
) -> FormationPrediction:
    """Closed-form prediction of the late-time marching formation.

    alpha is the initial centroid (the agreement mode is conserved up to the
    commanded drift), beta the detecting fraction, gamma the zero-sum offset
    gains.  Predicted positions are collinear along u_c whenever gamma is not
    constant, so, with u_c.x nonzero, the asymptotic slope is u_c.y / u_c.x.
    """
    n = len(positions)
    if len(leaders) != n:
        raise ValueError("leader set size must match position count")
    basis = build_basis(n)
    gamma = deviation_gamma(basis, leaders)
    alpha = Vec2(
        float(sum(p.x for p in positions)) / n,
        float(sum(p.y for p in positions)) / n,
    )
    return FormationPrediction(
        alpha=alpha,
        beta=leaders.n_detecting / n,
        gamma=tuple(float(g) for g in gamma),
        u_c=u_c,
    )
