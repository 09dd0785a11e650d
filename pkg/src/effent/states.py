"""Two-qubit density matrices and the Wootters concurrence.

Basis order is fixed everywhere as ``|00>, |01>, |10>, |11>``; the first
tensor factor is the lower dot (the one read by a configuration-A SET).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
# sigma_y (x) sigma_y is real: the spin flip never mixes real and imaginary parts
YY = np.real(np.kron(SIGMA_Y, SIGMA_Y))

BASIS_LABELS = ("00", "01", "10", "11")
_INDEX = {label: i for i, label in enumerate(BASIS_LABELS)}

# named coherences, (row, column) in the product basis
COHERENCES = {
    "h": (1, 2),
    "g": (0, 3),
    "u": (0, 1),
    "v": (0, 2),
    "p": (1, 3),
    "q": (2, 3),
}


class InvalidStateError(ValueError):
    """Raised when a matrix is not a density matrix within tolerance."""


def check_density_matrix(m: np.ndarray) -> None:
    if m.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("matrix has non-finite entries")
    herm = np.max(np.abs(m - m.conj().T))
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"not Hermitian (deviation {herm:.3e})")
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace is {tr!r}, not 1")
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
    if lam < -PSD_TOL:
        raise InvalidStateError(f"not positive semidefinite (min eigenvalue {lam:.3e})")


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Validated 4x4 density matrix with named element accessors.

    Diagonals: ``a=<00|rho|00>``, ``b=<01|rho|01>``, ``c=<10|rho|10>``,
    ``d=<11|rho|11>``. Coherences: ``h=<01|rho|10>``, ``g=<00|rho|11>``,
    ``u=<00|rho|01>``, ``v=<00|rho|10>``, ``p=<01|rho|11>``, ``q=<10|rho|11>``.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        check_density_matrix(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, m, *, hermitize: bool = False) -> "TwoQubitState":
        m = np.asarray(m, dtype=complex)
        if hermitize:
            m = 0.5 * (m + m.conj().T)
        return cls(m)

    def element(self, row: str, col: str) -> complex:
        return complex(self.matrix[_INDEX[row], _INDEX[col]])

    @property
    def a(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def b(self) -> float:
        return float(self.matrix[1, 1].real)

    @property
    def c(self) -> float:
        return float(self.matrix[2, 2].real)

    @property
    def d(self) -> float:
        return float(self.matrix[3, 3].real)

    @property
    def diagonals(self) -> tuple[float, float, float, float]:
        return self.a, self.b, self.c, self.d

    def coherence(self, name: str) -> complex:
        i, j = COHERENCES[name]
        return complex(self.matrix[i, j])

    h = property(lambda self: self.coherence("h"))
    g = property(lambda self: self.coherence("g"))
    u = property(lambda self: self.coherence("u"))
    v = property(lambda self: self.coherence("v"))
    p = property(lambda self: self.coherence("p"))
    q = property(lambda self: self.coherence("q"))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.matrix.imag == 0))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def conj(self) -> "TwoQubitState":
        return TwoQubitState(self.matrix.conj())

    def __eq__(self, other):
        if not isinstance(other, TwoQubitState):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    def __repr__(self):
        return f"TwoQubitState(diag={np.round(self.diagonals, 6).tolist()}, h={self.h:.6g})"


def pure_state(psi) -> TwoQubitState:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return TwoQubitState(np.outer(psi, psi.conj()))


def bell_state(sign: str = "+") -> TwoQubitState:
    """Density matrix of ``(|01> +/- |10>)/sqrt(2)``."""
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    s = 1.0 if sign == "+" else -1.0
    return pure_state([0.0, 1.0, s, 0.0])


def maximally_mixed() -> TwoQubitState:
    return TwoQubitState(np.eye(4) / 4)


def werner_state(p: float, sign: str = "+") -> TwoQubitState:
    return TwoQubitState(p * bell_state(sign).matrix + (1 - p) * np.eye(4) / 4)


def x_state(a, b, c, d, h=0.0, g=0.0) -> TwoQubitState:
    m = np.diag(np.array([a, b, c, d], dtype=complex))
    m[1, 2], m[2, 1] = h, np.conj(h)
    m[0, 3], m[3, 0] = g, np.conj(g)
    return TwoQubitState(m)


def random_state(seed=None, *, real: bool = False) -> TwoQubitState:
    """Hilbert-Schmidt random state ``M M^dag / Tr`` with Gaussian ``M``.

    Deterministic for a given ``seed`` (anything accepted by
    ``numpy.random.default_rng``).
    """
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((4, 4))
    if not real:
        m = m + 1j * rng.standard_normal((4, 4))
    rho = m @ m.conj().T
    rho = 0.5 * (rho + rho.conj().T) / np.trace(rho).real
    return TwoQubitState(rho)


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, TwoQubitState):
        return rho.matrix
    m = np.asarray(rho, dtype=complex)
    check_density_matrix(m)
    return m


def spin_flip_sqrt_eigenvalues(rho) -> np.ndarray:
    """Descending square roots of the eigenvalues of ``rho (Y x Y) rho* (Y x Y)``."""
    m = _as_matrix(rho)
    r = m @ YY @ m.conj() @ YY
    lam = np.linalg.eigvals(r)
    # eigenvalues are real and non-negative in exact arithmetic
    lam = np.clip(lam.real, 0.0, None)
    return np.sort(np.sqrt(lam))[::-1]


def concurrence(rho) -> float:
    """Wootters concurrence ``max(0, s1 - s2 - s3 - s4)`` clamped to [0, 1]."""
    s = spin_flip_sqrt_eigenvalues(rho)
    return float(min(1.0, max(0.0, s[0] - s[1] - s[2] - s[3])))


def x_state_concurrence(a, b, c, d, h, g) -> float:
    """Closed form ``2 max(0, |h| - sqrt(ad), |g| - sqrt(bc))`` for X-states."""
    return 2.0 * max(0.0, abs(h) - np.sqrt(a * d), abs(g) - np.sqrt(b * c))


def real_part(rho: TwoQubitState) -> TwoQubitState:
    """Entrywise real part, i.e. ``(rho + rho*)/2``; always a valid state."""
    return TwoQubitState(rho.matrix.real.astype(complex))


def partial_transpose(rho) -> np.ndarray:
    m = _as_matrix(rho).reshape(2, 2, 2, 2)
    return m.transpose(0, 3, 2, 1).reshape(4, 4)


def is_ppt(rho, tol: float = 1e-10) -> bool:
    """Peres-Horodecki test; for two qubits PPT is equivalent to separable."""
    pt = partial_transpose(rho)
    return bool(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0] >= -tol)


def format_state(rho: TwoQubitState) -> str:
    """Row-major text dump, one row per line, ``re+im`` pairs at 17 digits."""
    lines = []
    for row in rho.matrix:
        lines.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
    return "\n".join(lines) + "\n"


def parse_state(text: str) -> TwoQubitState:
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    m = np.array([[complex(tok) for tok in row] for row in rows])
    return TwoQubitState(m)
