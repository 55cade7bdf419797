"""Discrete memoryless channels: mutual information, capacity and the
secrecy difference of physically degraded wiretap channels.

All information quantities are in bits.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ConvergenceError, StructuralError

PROB_ATOL = 1e-12
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000
DEFAULT_STARTS = 32
GRID_RESOLUTION = 200
GRID_MAX_INPUTS = 4


def _check_probability_vector(v: np.ndarray, what: str) -> None:
    if v.ndim != 1 or v.size == 0:
        raise StructuralError(f"{what}: expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise StructuralError(f"{what}: entries must be finite and non-negative")
    if abs(v.sum() - 1.0) > PROB_ATOL:
        raise StructuralError(f"{what}: entries sum to {v.sum()!r}, not 1")


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over input symbols ``0..len-1``."""

    probs: np.ndarray

    def __post_init__(self):
        p = _readonly(self.probs)
        _check_probability_vector(p, "distribution")
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, size: int) -> Distribution:
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return self.probs.size

    def __eq__(self, other):
        return isinstance(other, Distribution) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(tuple(self.probs))

    def __repr__(self):
        return f"Distribution({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Row-stochastic matrix ``rows[x, y] = p(y|x)``."""

    rows: np.ndarray

    def __post_init__(self):
        m = _readonly(self.rows)
        if m.ndim != 2 or 0 in m.shape:
            raise StructuralError(f"stochastic matrix must be 2-D and non-empty, got shape {m.shape}")
        for i, r in enumerate(m):
            _check_probability_vector(r, f"row {i}")
        object.__setattr__(self, "rows", m)

    @property
    def n_inputs(self) -> int:
        return self.rows.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.rows.shape[1]

    def __eq__(self, other):
        return isinstance(other, StochasticMatrix) and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash(tuple(map(tuple, self.rows)))

    def __repr__(self):
        return f"StochasticMatrix({self.rows.tolist()})"

    def tolist(self) -> list[list[float]]:
        return self.rows.tolist()


@dataclass(frozen=True)
class WiretapChannel:
    """Physically degraded wiretap channel X -> Y -> Z.

    ``forward`` holds p(y|x) and ``degrading`` holds p(z|y); the
    eavesdropper's law p(z|x) is their product, so Z depends on X only
    through Y.
    """

    forward: StochasticMatrix
    degrading: StochasticMatrix

    def __post_init__(self):
        if not isinstance(self.forward, StochasticMatrix):
            object.__setattr__(self, "forward", StochasticMatrix(self.forward))
        if not isinstance(self.degrading, StochasticMatrix):
            object.__setattr__(self, "degrading", StochasticMatrix(self.degrading))
        if self.forward.n_outputs != self.degrading.n_inputs:
            raise StructuralError(
                f"forward has {self.forward.n_outputs} outputs but degrading "
                f"expects {self.degrading.n_inputs} inputs"
            )

    @property
    def n_inputs(self) -> int:
        return self.forward.n_inputs


@dataclass(frozen=True)
class MaximizabilityReport:
    cap_main: float
    cap_eave: float
    max_difference: float
    argmax_main: Distribution
    argmax_diff: Distribution
    is_simultaneously_maximizable: bool
    tolerance: float


# ---------------------------------------------------------------- channels


def identity_channel(n: int) -> StochasticMatrix:
    return StochasticMatrix(np.eye(n))


def bsc(p: float) -> StochasticMatrix:
    """Binary symmetric channel with crossover probability ``p``."""
    return StochasticMatrix([[1 - p, p], [p, 1 - p]])


def bec(eps: float, n_inputs: int = 2) -> StochasticMatrix:
    """Erasure channel on ``n_inputs`` symbols; output ``n_inputs`` is the erasure."""
    m = np.zeros((n_inputs, n_inputs + 1))
    m[np.arange(n_inputs), np.arange(n_inputs)] = 1 - eps
    m[:, -1] = eps
    return StochasticMatrix(m)


def erasure_on_outputs(eps: float, n: int) -> StochasticMatrix:
    """Degrading map on an alphabet that already contains an erasure symbol
    (the last one): erases the other symbols with probability ``eps`` and
    keeps erasures erased."""
    m = np.zeros((n, n))
    m[np.arange(n - 1), np.arange(n - 1)] = 1 - eps
    m[:, -1] = eps
    m[-1, -1] = 1.0
    return StochasticMatrix(m)


def constant_channel(n_inputs: int, n_outputs: int = 1) -> StochasticMatrix:
    return StochasticMatrix(np.full((n_inputs, n_outputs), 1.0 / n_outputs))


# ---------------------------------------------------------------- measures


def _probs(px) -> np.ndarray:
    if isinstance(px, Distribution):
        return px.probs
    p = np.asarray(px, dtype=float)
    _check_probability_vector(p, "input distribution")
    return p


def _matrix(ch) -> np.ndarray:
    if isinstance(ch, StochasticMatrix):
        return ch.rows
    return StochasticMatrix(ch).rows


def entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def binary_entropy(p: float) -> float:
    return entropy([p, 1 - p])


def _row_entropies(W: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(W > 0, W * np.log2(np.where(W > 0, W, 1.0)), 0.0)
    return -t.sum(axis=1)


def _mi_many(P: np.ndarray, W: np.ndarray, h: np.ndarray) -> np.ndarray:
    """I(X;Y) for every row of ``P`` as H(Y) - H(Y|X)."""
    Q = P @ W
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(Q > 0, Q * np.log2(np.where(Q > 0, Q, 1.0)), 0.0)
    return -t.sum(axis=1) - P @ h


def mutual_information(px, ch) -> float:
    """I(X;Y) in bits for input law ``px`` through channel ``ch``."""
    p = _probs(px)
    W = _matrix(ch)
    if W.shape[0] != p.size:
        raise StructuralError(f"distribution has {p.size} entries, channel has {W.shape[0]} inputs")
    val = float(_mi_many(p[None, :], W, _row_entropies(W))[0])
    return max(val, 0.0)


def compose_degraded(wt: WiretapChannel) -> StochasticMatrix:
    """p(z|x) obtained by marginalising the intermediate output y."""
    m = wt.forward.rows @ wt.degrading.rows
    m = m / m.sum(axis=1, keepdims=True)
    return StochasticMatrix(m)


# ---------------------------------------------------------------- capacity


def _divergences(p: np.ndarray, W: np.ndarray) -> np.ndarray:
    """D(W(.|x) || pW) for every x, in nats."""
    q = p @ W
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(W > 0, W / np.where(q > 0, q, 1.0), 1.0)
        t = np.where(W > 0, W * np.log(ratio), 0.0)
    return t.sum(axis=1)


def blahut_arimoto_iterates(ch, p0=None):
    """Yield ``(p, mi_bits, gap_bits)`` for successive Blahut-Arimoto steps.

    ``gap_bits`` is the duality gap ``log max_x c_x - log sum_x p_x c_x``,
    an upper bound on how far ``mi_bits`` can be from capacity.
    """
    W = _matrix(ch)
    n = W.shape[0]
    p = np.full(n, 1.0 / n) if p0 is None else _probs(p0).copy()
    h = _row_entropies(W)
    while True:
        D = _divergences(p, W)
        Dmax = D.max()
        c = np.exp(D - Dmax)
        s = float(p @ c)
        lower = np.log(s) + Dmax
        gap = (Dmax - lower) / np.log(2)
        mi = float(_mi_many(p[None, :], W, h)[0])
        yield p, mi, max(gap, 0.0)
        p = p * c / s


def blahut_arimoto(ch, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Capacity of a discrete memoryless channel.

    Stops once the duality gap is at most ``tol`` bits, so the returned
    value is within ``tol`` of the true capacity.

    Returns
    -------
    capacity : float
        Mutual information of the returned input law (bits/use).
    argmax : Distribution
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    W = _matrix(ch)
    last = None
    for it, (p, mi, gap) in enumerate(blahut_arimoto_iterates(W)):
        last = (p, mi)
        if gap <= tol:
            p = p / p.sum()
            return mutual_information(p, W), Distribution(p)
        if it + 1 >= max_iter:
            break
    raise ConvergenceError(
        f"Blahut-Arimoto did not reach gap {tol} within {max_iter} iterations",
        last_value=last[1],
        last_iterate=Distribution(last[0] / last[0].sum()),
    )


# ----------------------------------------------------- secrecy difference


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


class _Difference:
    """f(p) = I(X;Y) - I(X;Z) and its gradient."""

    def __init__(self, W: np.ndarray, V: np.ndarray):
        self.W, self.V = W, V
        self.hW, self.hV = _row_entropies(W), _row_entropies(V)

    def values(self, P: np.ndarray) -> np.ndarray:
        return _mi_many(P, self.W, self.hW) - _mi_many(P, self.V, self.hV)

    def value(self, p: np.ndarray) -> float:
        return float(self.values(p[None, :])[0])

    def grad(self, p: np.ndarray) -> np.ndarray:
        return (_div_clipped(p, self.W) - _div_clipped(p, self.V)) / np.log(2)


def _div_clipped(p, W):
    q = np.maximum(p @ W, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(W > 0, W * np.log(np.where(W > 0, W, 1.0) / q), 0.0)
    return t.sum(axis=1)


def _ascend(f: _Difference, p: np.ndarray, tol: float, max_iter: int = 2000):
    val = f.value(p)
    step = 1.0
    for _ in range(max_iter):
        g = f.grad(p)
        improved = False
        while step > 1e-14:
            cand = _project_simplex(p + step * g)
            cval = f.value(cand)
            if cval > val:
                improved = True
                gain = cval - val
                p, val = cand, cval
                step *= 2.0
                break
            step *= 0.5
        if not improved or gain < tol * 1e-3:
            break
    return p, val


def _compositions(total: int, parts: int) -> np.ndarray:
    rows = np.zeros((1, 0), dtype=np.int64)
    used = np.zeros(1, dtype=np.int64)
    for _ in range(parts - 1):
        room = total - used + 1
        parent = np.repeat(np.arange(rows.shape[0]), room)
        offsets = np.arange(parent.size) - np.repeat(np.cumsum(room) - room, room)
        rows = np.hstack([rows[parent], offsets[:, None]])
        used = used[parent] + offsets
    return np.hstack([rows, (total - used)[:, None]])


def simplex_grid(n: int, resolution: int = GRID_RESOLUTION) -> np.ndarray:
    """All points of the probability simplex on the lattice ``1/resolution``."""
    pts = _compositions(resolution, n).astype(float) / resolution
    assert pts.shape[0] == comb(resolution + n - 1, n - 1)
    return pts


def _starts(n: int, count: int, seed: int) -> list[np.ndarray]:
    starts = [np.full(n, 1.0 / n)]
    starts += [np.eye(n)[i] for i in range(n)]
    rng = np.random.default_rng(seed)
    while len(starts) < count:
        starts.append(rng.dirichlet(np.ones(n)))
    return starts[:max(count, n + 1)]


def max_secrecy_difference(
    wt: WiretapChannel,
    tol: float = DEFAULT_TOL,
    *,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    threads: int = 1,
    grid: bool | None = None,
):
    """Best found maximum over p(x) of I(X;Y) - I(X;Z).

    The objective is a difference of concave functions, so this is a
    multistart projected-gradient search. The Blahut-Arimoto maximiser of
    I(X;Y) is always one of the starts. For ``|X| <= 4`` a lattice of step
    1/200 is also scanned and its best point polished.

    Returns ``(value, argmax)``. Ties keep the earliest start.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    W = wt.forward.rows
    V = compose_degraded(wt).rows
    f = _Difference(W, V)
    n = W.shape[0]

    init = _starts(n, starts, seed)
    init.append(blahut_arimoto(W, tol=min(tol, DEFAULT_TOL))[1].probs.copy())
    if grid is None:
        grid = n <= GRID_MAX_INPUTS
    if grid:
        pts = simplex_grid(n)
        best = -np.inf
        best_pt = None
        for lo in range(0, pts.shape[0], 200_000):
            chunk = pts[lo : lo + 200_000]
            vals = f.values(chunk)
            i = int(np.argmax(vals))
            if vals[i] > best:
                best, best_pt = vals[i], chunk[i]
        init.append(best_pt.copy())

    def run(p):
        return _ascend(f, p, tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, init))
    else:
        results = [run(p) for p in init]

    best_i = 0
    for i, (_, v) in enumerate(results):
        if v > results[best_i][1]:
            best_i = i
    p, v = results[best_i]
    p = np.maximum(p, 0.0)
    p = p / p.sum()
    return float(v), Distribution(p)


def check_simultaneously_maximizable(
    wt: WiretapChannel, tol: float = 1e-6, *, solver_tol: float = DEFAULT_TOL, **kwargs
) -> MaximizabilityReport:
    """Decide whether one input law maximizes both I(X;Y) and I(X;Z).

    Argmax sets need not be singletons, so set equality is replaced by a
    cross-evaluation: the verdict is true iff the maximum difference equals
    ``cap_main - cap_eave`` within ``tol`` and the maximiser of I(X;Y) also
    attains ``cap_eave`` on the composed channel within ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    composed = compose_degraded(wt)
    cap_main, argmax_main = blahut_arimoto(wt.forward, tol=solver_tol)
    cap_eave, _ = blahut_arimoto(composed, tol=solver_tol)
    diff, argmax_diff = max_secrecy_difference(wt, tol=solver_tol, **kwargs)
    cross = mutual_information(argmax_main, composed)
    ok = abs(diff - (cap_main - cap_eave)) <= tol and cross >= cap_eave - tol
    return MaximizabilityReport(
        cap_main=cap_main,
        cap_eave=cap_eave,
        max_difference=diff,
        argmax_main=argmax_main,
        argmax_diff=argmax_diff,
        is_simultaneously_maximizable=bool(ok),
        tolerance=tol,
    )
