from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from invgame.errors import DefinitenessError, DimensionError

Matrix = NDArray[np.float64]
MatrixLike = Union[ArrayLike, float]

SYMMETRY_TOL = 1e-12


def as_matrix(value: MatrixLike) -> Matrix:
    """Return ``value`` as a 2-D float array; scalars become 1x1 matrices."""
    matrix = np.atleast_2d(np.asarray(value, dtype=float))
    if matrix.ndim != 2:
        raise DimensionError(f"Expected a matrix, got an array with shape {matrix.shape}.")
    return matrix


def symmetrize(matrix: MatrixLike) -> Matrix:
    matrix = as_matrix(matrix)
    return 0.5 * (matrix + matrix.T)


def is_symmetric(matrix: Matrix, tol: float = SYMMETRY_TOL) -> bool:
    return matrix.shape[0] == matrix.shape[1] and float(np.linalg.norm(matrix - matrix.T)) < tol


def min_eigenvalue(matrix: Matrix) -> float:
    """Smallest eigenvalue of the symmetric part of ``matrix``."""
    return float(np.linalg.eigvalsh(symmetrize(matrix)).min())


@dataclass(frozen=True, eq=False)
class GameSpec:
    """Shared linear dynamics plus the quadratic cost parameters of N players.

    ``R[i][j]`` weighs player ``j``'s input in player ``i``'s cost, so it is
    ``m_j x m_j``.
    """

    A: Matrix
    B: Tuple[Matrix, ...]
    Q: Tuple[Matrix, ...]
    R: Tuple[Tuple[Matrix, ...], ...]

    @classmethod
    def from_arrays(
        cls,
        A: MatrixLike,
        B: Sequence[MatrixLike],
        Q: Sequence[MatrixLike],
        R: Sequence[Sequence[MatrixLike]],
    ) -> "GameSpec":
        spec = cls(
            A=as_matrix(A),
            B=tuple(as_matrix(b) for b in B),
            Q=tuple(as_matrix(q) for q in Q),
            R=tuple(tuple(as_matrix(r) for r in row) for row in R),
        )
        spec.check()
        return spec

    @classmethod
    def dynamics_only(cls, A: MatrixLike, B: Sequence[MatrixLike]) -> "GameSpec":
        """Dynamics with placeholder costs (identity weights on everything)."""
        A = as_matrix(A)
        B = [as_matrix(b) for b in B]
        n = A.shape[0]
        m = [b.shape[1] for b in B]
        return cls.from_arrays(
            A,
            B,
            [np.eye(n) for _ in B],
            [[np.eye(m[j]) if i == j else np.zeros((m[j], m[j])) for j in range(len(B))] for i in range(len(B))],
        )

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return len(self.B)

    @property
    def m(self) -> List[int]:
        return [b.shape[1] for b in self.B]

    def with_costs(self, Q: Sequence[MatrixLike], R: Sequence[Sequence[MatrixLike]]) -> "GameSpec":
        return GameSpec.from_arrays(self.A, self.B, Q, R)

    def with_state_weights(self, Q: Sequence[MatrixLike]) -> "GameSpec":
        return GameSpec.from_arrays(self.A, self.B, Q, self.R)

    def stacked_input_matrix(self) -> Matrix:
        return np.hstack(self.B)

    def validate(self) -> Iterable[str]:
        """Yield human readable validation issues."""
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            yield f"A must be square, got shape {self.A.shape}."
        if self.N == 0:
            yield "A game needs at least one player."
        if len(self.Q) != self.N:
            yield f"Expected {self.N} state weights Q_i, got {len(self.Q)}."
        if len(self.R) != self.N or any(len(row) != self.N for row in self.R):
            yield f"R must be a {self.N}x{self.N} grid of matrices."
            return
        for i, b in enumerate(self.B):
            if b.shape[0] != n:
                yield f"B_{i + 1} has {b.shape[0]} rows, expected {n}."
        m = self.m
        for i, q in enumerate(self.Q):
            if q.shape != (n, n):
                yield f"Q_{i + 1} has shape {q.shape}, expected {(n, n)}."
            elif not is_symmetric(q):
                yield f"Q_{i + 1} is not symmetric."
        for i, row in enumerate(self.R):
            for j, r in enumerate(row):
                if r.shape != (m[j], m[j]):
                    yield f"R_{i + 1}{j + 1} has shape {r.shape}, expected {(m[j], m[j])}."
                elif not is_symmetric(r):
                    yield f"R_{i + 1}{j + 1} is not symmetric."
                elif i == j and min_eigenvalue(r) <= 0.0:
                    yield f"R_{i + 1}{i + 1} must be positive definite."

    def check(self) -> None:
        """Raise on the first validation issue."""
        for issue in self.validate():
            if "positive definite" in issue:
                raise DefinitenessError(issue)
            raise DimensionError(issue)


@dataclass(frozen=True, eq=False)
class FeedbackSet:
    """Per-player gains F_i; the controls are u_i = -F_i x."""

    F: Tuple[Matrix, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "F", tuple(as_matrix(f) for f in self.F))

    @classmethod
    def zeros(cls, spec: GameSpec) -> "FeedbackSet":
        return cls(tuple(np.zeros((mi, spec.n)) for mi in spec.m))

    def __len__(self) -> int:
        return len(self.F)

    def __getitem__(self, index: int) -> Matrix:
        return self.F[index]

    def __iter__(self) -> Iterator[Matrix]:
        return iter(self.F)

    def check_against(self, spec: GameSpec) -> None:
        if len(self.F) != spec.N:
            raise DimensionError(f"Expected {spec.N} feedback gains, got {len(self.F)}.")
        for i, (f, mi) in enumerate(zip(self.F, spec.m)):
            if f.shape != (mi, spec.n):
                raise DimensionError(f"F_{i + 1} has shape {f.shape}, expected {(mi, spec.n)}.")

    def distance(self, other: "FeedbackSet") -> float:
        """Largest Frobenius distance between matching gains."""
        if len(self.F) != len(other.F):
            raise DimensionError("Feedback sets describe different player counts.")
        return max(float(np.linalg.norm(a - b)) for a, b in zip(self.F, other.F))


@dataclass(frozen=True, eq=False)
class ValueSet:
    """Per-player value matrices K_i, kept symmetric."""

    K: Tuple[Matrix, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "K", tuple(symmetrize(k) for k in self.K))

    @classmethod
    def zeros(cls, spec: GameSpec) -> "ValueSet":
        return cls(tuple(np.zeros((spec.n, spec.n)) for _ in range(spec.N)))

    def __len__(self) -> int:
        return len(self.K)

    def __getitem__(self, index: int) -> Matrix:
        return self.K[index]

    def __iter__(self) -> Iterator[Matrix]:
        return iter(self.K)

    def replace(self, index: int, value: Matrix) -> "ValueSet":
        values = list(self.K)
        values[index] = value
        return ValueSet(tuple(values))

    def is_positive_definite(self) -> bool:
        return all(min_eigenvalue(k) > 0.0 for k in self.K)


@dataclass(frozen=True, eq=False)
class AreResidualSet:
    residuals: Tuple[Matrix, ...]
    norms: Tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        residuals = tuple(symmetrize(r) for r in self.residuals)
        object.__setattr__(self, "residuals", residuals)
        object.__setattr__(self, "norms", tuple(float(np.linalg.norm(r)) for r in residuals))

    @property
    def max_norm(self) -> float:
        return max(self.norms) if self.norms else 0.0


def per_player(value: Union[float, Sequence[float]], count: int, name: str) -> List[float]:
    """Broadcast a scalar setting to every player or check a per-player list."""
    if np.isscalar(value):
        return [float(value)] * count  # type: ignore[arg-type]
    values = [float(v) for v in value]  # type: ignore[union-attr]
    if len(values) != count:
        raise DimensionError(f"Expected {count} values for {name}, got {len(values)}.")
    return values
