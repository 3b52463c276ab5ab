"""Instance generation, benchmark ingestion, and serialization.

All randomness in the package lives here: every generator is a pure
function of its arguments including the seed, so replays are
bit-identical.  Complex channel models are emitted in real-stacked form
(the solver never sees complex numbers).

File formats
------------
* Sparse triplet benchmark files: first line ``n nnz``, then nnz lines
  ``i j value`` with 1-based indices.  These files state a maximization
  of <x, M x> over binary x; ingestion converts to our minimization
  convention via Q = -(M + M^T), so min <x, Q x>/2 = -max <x, M x>.
* Native instance files: a self-describing JSON document with base64
  array payloads (see save_instance).
* Best-known sidecar: TSV ``name<TAB>value`` with the published
  maximization optima; '#' starts a comment.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .objectives import (
    LqRecoveryObjective,
    Objective,
    OneBitMimoObjective,
    QuboObjective,
)

SCHEMA = "binopt.instance.v1"

#: density rule for synthetic quadratic instances
DENSE_SMALL = 0.8
DENSE_LARGE = 0.005
LARGE_N = 10_000

#: proportions of nonnegative entries among the nonzeros, by case id
NONNEG_FRACTIONS = {1: 0.4995, 2: 0.4999, 3: 0.49995, 4: 0.49999, 5: 0.5}

VALUE_RANGE = (10.0, 100.0)


class InstanceFormatError(ValueError):
    """Malformed instance file; carries the offending line when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# ---------------------------------------------------------------------------
# instance containers
# ---------------------------------------------------------------------------


@dataclass
class RecoveryInstance:
    A: np.ndarray | sp.csr_matrix
    b: np.ndarray
    x_star: np.ndarray
    s: int
    q: float
    nf: float
    seed: int | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def objective(self) -> LqRecoveryObjective:
        return LqRecoveryObjective(self.A, self.b, self.q)


@dataclass
class MimoInstance:
    A: np.ndarray          # 2m x 2n real stacking of the complex channel
    b: np.ndarray          # 2m stacked observation
    x_star: np.ndarray     # 2n stacked binary symbols
    snr_db: float
    channel: str           # "iid" or "correlated"
    r: float | None = None
    rho: float | None = None
    seed: int | None = None

    def objective(self) -> LqRecoveryObjective:
        return LqRecoveryObjective(self.A, self.b, 2.0)


@dataclass
class OneBitInstance:
    H: np.ndarray
    y: np.ndarray          # +-1 observations
    z_star: np.ndarray     # +-1 transmitted signal
    rho: float
    snr_db: float
    seed: int | None = None

    @property
    def x_star(self) -> np.ndarray:
        return (self.z_star + 1.0) / 2.0

    def objective(self) -> OneBitMimoObjective:
        return OneBitMimoObjective(self.H, self.y, self.rho)


@dataclass(frozen=True)
class QuboSource:
    kind: str              # "beasley" | "synthetic" | "file"
    name: str | None = None
    density: float | None = None
    value_range: tuple[float, float] | None = None
    nonneg_fraction: float | None = None
    case_id: int | None = None
    seed: int | None = None


@dataclass
class QuboInstance:
    Q: np.ndarray | sp.csr_matrix
    source: QuboSource = field(default_factory=lambda: QuboSource(kind="file"))
    best_known: float | None = None

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def objective(self) -> QuboObjective:
        return QuboObjective(self.Q)


# ---------------------------------------------------------------------------
# real stacking
# ---------------------------------------------------------------------------


def stack_complex_matrix(H: np.ndarray) -> np.ndarray:
    """[[Re H, -Im H], [Im H, Re H]] so stacking commutes with H @ w."""
    H = np.asarray(H, dtype=np.complex128)
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def stack_complex_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    return np.concatenate([v.real, v.imag])


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _normalizer(m: int, n: int) -> float:
    # measurement matrices are rescaled by sqrt(m) except at very large n
    return math.sqrt(m) if n <= 10_000 else 1.0


def gen_recovery(m: int, n: int, s: int, q: float, nf: float, seed: int) -> RecoveryInstance:
    """Random binary-signal recovery instance b = A x* + nf * noise."""
    if not 0 < s <= n:
        raise ValueError("support size must satisfy 0 < s <= n")
    if q <= 1.0:
        raise ValueError("q must exceed 1")
    if nf < 0.0:
        raise ValueError("noise factor must be nonnegative")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) / _normalizer(m, n)
    x_star = np.zeros(n)
    x_star[rng.choice(n, size=s, replace=False)] = 1.0
    b = A @ x_star + nf * rng.standard_normal(m)
    return RecoveryInstance(A=A, b=b, x_star=x_star, s=s, q=float(q), nf=float(nf), seed=seed)


def _exp_correlation(k: int, r: float) -> np.ndarray:
    idx = np.arange(k)
    return float(r) ** np.abs(idx[:, None] - idx[None, :]).astype(np.float64)


def _draw_symbols(rng, n: int, Hc: np.ndarray) -> np.ndarray:
    # uniform QPSK with Re, Im in {0, 1}; redrawn in the (vanishingly
    # rare) all-zero case so the noise calibration stays well defined
    while True:
        w = rng.integers(0, 2, n).astype(np.float64) + 1j * rng.integers(0, 2, n)
        if np.linalg.norm(Hc @ w) > 0.0:
            return w


def gen_mimo(
    m: int, n: int, snr_db: float, channel: str = "iid", r: float = 0.2, seed: int = 0
) -> MimoInstance:
    """Classical detection instance in real-stacked form.

    ``channel`` is "iid" (independent Gaussian entries, rescaled like
    the recovery matrices) or "correlated" (exponential spatial
    correlation with coefficient r at both ends).
    """
    if channel not in ("iid", "correlated"):
        raise ValueError("channel must be 'iid' or 'correlated'")
    rng = np.random.default_rng(seed)
    if channel == "iid":
        Hc = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        Hc /= _normalizer(m, n)
    else:
        if abs(r) > 1.0:
            raise ValueError("|r| must not exceed 1")
        Ht = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / math.sqrt(2.0)
        try:
            P = np.linalg.cholesky(_exp_correlation(m, r))
            Qf = np.linalg.cholesky(_exp_correlation(n, r))
        except np.linalg.LinAlgError as err:
            raise ValueError(f"correlation matrix not positive definite for r={r}") from err
        Hc = P @ Ht @ Qf

    w_star = _draw_symbols(rng, n, Hc)
    signal = Hc @ w_star
    snr_lin = 10.0 ** (snr_db / 10.0)
    rho = math.sqrt(float(np.linalg.norm(signal)) ** 2 / (m * snr_lin))
    noise = rho * (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / math.sqrt(2.0)
    y = signal + noise
    return MimoInstance(
        A=stack_complex_matrix(Hc),
        b=stack_complex_vector(y),
        x_star=stack_complex_vector(w_star),
        snr_db=float(snr_db),
        channel=channel,
        r=float(r) if channel == "correlated" else None,
        rho=rho,
        seed=seed,
    )


def gen_onebit(m: int, n: int, snr_db: float, seed: int) -> OneBitInstance:
    """Sign-quantized observation instance y = sgn(H z* + v), sgn(0) = +1."""
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((m, n))
    while True:
        z_star = rng.integers(0, 2, n) * 2.0 - 1.0
        signal = H @ z_star
        norm = float(np.linalg.norm(signal))
        if norm > 0.0:
            break
    snr_lin = 10.0 ** (snr_db / 10.0)
    rho = math.sqrt(norm**2 / (m * snr_lin))
    v = rho * rng.standard_normal(m)
    y = np.where(signal + v >= 0.0, 1.0, -1.0)
    return OneBitInstance(H=H, y=y, z_star=z_star, rho=rho, snr_db=float(snr_db), seed=seed)


def _sample_distinct(rng, upper: int, k: int) -> np.ndarray:
    # k distinct int64 in [0, upper); rejection + dedup keeps memory at
    # O(k) even when upper is huge
    if k > upper:
        raise ValueError("cannot sample more positions than exist")
    pool = np.unique(rng.integers(0, upper, size=int(k * 1.1) + 16, dtype=np.int64))
    while pool.size < k:
        extra = rng.integers(0, upper, size=k, dtype=np.int64)
        pool = np.unique(np.concatenate([pool, extra]))
    keep = rng.permutation(pool.size)[:k]
    return pool[keep]


def _triangle_positions(linear: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # invert the row-major enumeration of the strict upper triangle:
    # row i holds n-1-i slots starting at offset i*(n-1) - i*(i-1)/2
    i_idx = np.arange(n, dtype=np.int64)
    starts = i_idx * (n - 1) - (i_idx * (i_idx - 1)) // 2
    rows = np.searchsorted(starts, linear, side="right") - 1
    cols = rows + 1 + (linear - starts[rows])
    return rows, cols


def gen_qubo_synthetic(n: int, case_id: int, seed: int, density: float | None = None) -> QuboInstance:
    """Random symmetric quadratic instance with zero diagonal.

    Off-diagonal magnitudes are uniform over [10, 100]; the sign split
    is controlled by the case id (fraction of nonnegative entries among
    the nonzeros).  Density defaults to 0.8 below n = 10^4 and 0.005
    from there on, measured over the off-diagonal slots.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if case_id not in NONNEG_FRACTIONS:
        raise ValueError(f"case_id must be in {sorted(NONNEG_FRACTIONS)}")
    if density is None:
        density = DENSE_SMALL if n < LARGE_N else DENSE_LARGE
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    frac = NONNEG_FRACTIONS[case_id]
    rng = np.random.default_rng(seed)
    n_slots = n * (n - 1) // 2
    nnz = int(rng.binomial(n_slots, density))
    linear = _sample_distinct(rng, n_slots, nnz)
    rows, cols = _triangle_positions(linear, n)
    lo, hi = VALUE_RANGE
    values = rng.uniform(lo, hi, size=nnz)
    values[rng.random(nnz) >= frac] *= -1.0

    coo_rows = np.concatenate([rows, cols])
    coo_cols = np.concatenate([cols, rows])
    coo_vals = np.concatenate([values, values])
    if n <= 2000 or density > 0.25:
        Q = np.zeros((n, n))
        Q[coo_rows, coo_cols] = coo_vals
    else:
        Q = sp.coo_matrix((coo_vals, (coo_rows, coo_cols)), shape=(n, n)).tocsr()
    source = QuboSource(
        kind="synthetic",
        density=float(density),
        value_range=VALUE_RANGE,
        nonneg_fraction=frac,
        case_id=case_id,
        seed=seed,
    )
    return QuboInstance(Q=Q, source=source, best_known=None)


# ---------------------------------------------------------------------------
# sparse triplet benchmark format
# ---------------------------------------------------------------------------


def load_best_known() -> dict[str, float]:
    """Bundled benchmark optima (maximization convention)."""
    text = resources.files("binopt").joinpath("data/beasley_best_known.tsv").read_text()
    table: dict[str, float] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, value = line.split("\t")
        table[name] = float(value)
    return table


def parse_beasley(path, best_known: dict[str, float] | None = None) -> QuboInstance:
    """Parse a single-instance sparse triplet file.

    The stated problem maximizes <x, M x>; the returned instance
    minimizes <x, Q x>/2 with Q = -(M + M^T).  The best-known value is
    attached (negated to match) when the file name appears in the
    bundled sidecar.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise InstanceFormatError("empty file", line=1)
    head = lines[0].split()
    if len(head) != 2:
        raise InstanceFormatError("expected header 'n nnz'", line=1)
    try:
        n, nnz = int(head[0]), int(head[1])
    except ValueError as err:
        raise InstanceFormatError(f"bad header: {err}", line=1) from None
    if n <= 0 or nnz < 0:
        raise InstanceFormatError("header values must be positive", line=1)

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    count = 0
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        if count >= nnz:
            raise InstanceFormatError("more triplets than declared", line=lineno)
        parts = raw.split()
        if len(parts) != 3:
            raise InstanceFormatError("expected 'i j value'", line=lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as err:
            raise InstanceFormatError(f"bad triplet: {err}", line=lineno) from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise InstanceFormatError(f"index ({i}, {j}) out of range", line=lineno)
        rows[count], cols[count], vals[count] = i - 1, j - 1, v
        count += 1
    if count != nnz:
        raise InstanceFormatError(
            f"declared {nnz} triplets but found {count}", line=len(lines)
        )

    M = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    Q = -(M + M.T)
    Q = Q.toarray() if n <= 2000 else Q.tocsr()

    name = path.stem
    table = load_best_known() if best_known is None else best_known
    best = -table[name] if name in table else None
    return QuboInstance(Q=Q, source=QuboSource(kind="beasley", name=name), best_known=best)


def write_orlib(instance: QuboInstance, path) -> None:
    """Export to the sparse triplet format; parse_beasley inverts this."""
    Q = instance.Q
    if sp.issparse(Q):
        upper = sp.triu(Q, k=0).tocoo()
        rows, cols, vals = upper.row, upper.col, upper.data
    else:
        rows, cols = np.nonzero(np.triu(Q))
        vals = Q[rows, cols]
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    with open(path, "w") as fh:
        fh.write(f"{Q.shape[0]} {len(vals)}\n")
        for i, j, v in zip(rows, cols, vals):
            # ingestion maps M -> -(M + M^T): off-diagonal entries appear
            # once on each side of the transpose, diagonal entries twice
            out = -v / 2.0 if i == j else -v
            fh.write(f"{i + 1} {j + 1} {out:.17g}\n")


# ---------------------------------------------------------------------------
# native JSON serialization
# ---------------------------------------------------------------------------


def _encode_dense(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a)
    return {
        "encoding": "dense",
        "dtype": str(a.dtype),
        "shape": list(a.shape),
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def _encode_array(a) -> dict:
    if sp.issparse(a):
        a = a.tocsr()
        return {
            "encoding": "csr",
            "shape": list(a.shape),
            "indptr": _encode_dense(a.indptr),
            "indices": _encode_dense(a.indices),
            "data": _encode_dense(a.data),
        }
    return _encode_dense(np.asarray(a))


def _decode_dense(spec: dict) -> np.ndarray:
    raw = base64.b64decode(spec["data"])
    return np.frombuffer(raw, dtype=np.dtype(spec["dtype"])).reshape(spec["shape"]).copy()


def _decode_array(spec: dict):
    if spec["encoding"] == "csr":
        return sp.csr_matrix(
            (
                _decode_dense(spec["data"]),
                _decode_dense(spec["indices"]),
                _decode_dense(spec["indptr"]),
            ),
            shape=tuple(spec["shape"]),
        )
    return _decode_dense(spec)


def save_instance(inst, path) -> None:
    """Write any instance as a self-describing JSON document."""
    if isinstance(inst, QuboInstance):
        doc = {
            "schema": SCHEMA,
            "kind": "qubo",
            "params": {
                "source": {
                    k: (list(v) if isinstance(v, tuple) else v)
                    for k, v in vars(inst.source).items()
                },
                "best_known": inst.best_known,
            },
            "arrays": {"Q": _encode_array(inst.Q)},
        }
    elif isinstance(inst, RecoveryInstance):
        doc = {
            "schema": SCHEMA,
            "kind": "recovery",
            "params": {"s": inst.s, "q": inst.q, "nf": inst.nf, "seed": inst.seed},
            "arrays": {
                "A": _encode_array(inst.A),
                "b": _encode_array(inst.b),
                "x_star": _encode_array(inst.x_star),
            },
        }
    elif isinstance(inst, MimoInstance):
        doc = {
            "schema": SCHEMA,
            "kind": "mimo",
            "params": {
                "snr_db": inst.snr_db,
                "channel": inst.channel,
                "r": inst.r,
                "rho": inst.rho,
                "seed": inst.seed,
            },
            "arrays": {
                "A": _encode_array(inst.A),
                "b": _encode_array(inst.b),
                "x_star": _encode_array(inst.x_star),
            },
        }
    elif isinstance(inst, OneBitInstance):
        doc = {
            "schema": SCHEMA,
            "kind": "onebit",
            "params": {"snr_db": inst.snr_db, "rho": inst.rho, "seed": inst.seed},
            "arrays": {
                "H": _encode_array(inst.H),
                "y": _encode_array(inst.y),
                "z_star": _encode_array(inst.z_star),
            },
        }
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_instance(path):
    """Inverse of save_instance."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise InstanceFormatError(f"not valid JSON: {err}", line=err.lineno) from None
    if doc.get("schema") != SCHEMA:
        raise InstanceFormatError(f"unknown schema {doc.get('schema')!r}")
    kind = doc.get("kind")
    params = doc.get("params", {})
    arrays = {k: _decode_array(v) for k, v in doc.get("arrays", {}).items()}
    if kind == "qubo":
        src = params.get("source", {})
        if src.get("value_range") is not None:
            src["value_range"] = tuple(src["value_range"])
        return QuboInstance(
            Q=arrays["Q"],
            source=QuboSource(**src),
            best_known=params.get("best_known"),
        )
    if kind == "recovery":
        return RecoveryInstance(
            A=arrays["A"], b=arrays["b"].ravel(), x_star=arrays["x_star"].ravel(),
            s=int(params["s"]), q=float(params["q"]), nf=float(params["nf"]),
            seed=params.get("seed"),
        )
    if kind == "mimo":
        return MimoInstance(
            A=arrays["A"], b=arrays["b"].ravel(), x_star=arrays["x_star"].ravel(),
            snr_db=float(params["snr_db"]), channel=params["channel"],
            r=params.get("r"), rho=params.get("rho"), seed=params.get("seed"),
        )
    if kind == "onebit":
        return OneBitInstance(
            H=arrays["H"], y=arrays["y"].ravel(), z_star=arrays["z_star"].ravel(),
            rho=float(params["rho"]), snr_db=float(params["snr_db"]),
            seed=params.get("seed"),
        )
    raise InstanceFormatError(f"unknown instance kind {kind!r}")


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def validate_instance(inst) -> None:
    """Check structural invariants; raise InstanceFormatError on failure."""
    if isinstance(inst, QuboInstance):
        Q = inst.Q
        asym = abs(Q - Q.T)
        worst = asym.max() if sp.issparse(Q) else (float(np.max(asym)) if asym.size else 0.0)
        if worst > 1e-10:
            raise InstanceFormatError(f"Q is not symmetric (max deviation {worst})")
    elif isinstance(inst, RecoveryInstance):
        if not np.all((inst.x_star == 0.0) | (inst.x_star == 1.0)):
            raise InstanceFormatError("ground truth is not binary")
        if int(np.sum(inst.x_star)) != inst.s:
            raise InstanceFormatError("ground truth support size disagrees with s")
        if inst.q <= 1.0:
            raise InstanceFormatError("q must exceed 1")
        if inst.nf < 0.0:
            raise InstanceFormatError("noise factor must be nonnegative")
    elif isinstance(inst, MimoInstance):
        two_m, two_n = inst.A.shape
        if two_m % 2 or two_n % 2:
            raise InstanceFormatError("stacked matrix must have even dimensions")
        m, n = two_m // 2, two_n // 2
        if not np.array_equal(inst.A[:m, :n], inst.A[m:, n:]):
            raise InstanceFormatError("stacking identity violated (real blocks differ)")
        if not np.array_equal(inst.A[:m, n:], -inst.A[m:, :n]):
            raise InstanceFormatError("stacking identity violated (imaginary blocks differ)")
        if not np.all((inst.x_star == 0.0) | (inst.x_star == 1.0)):
            raise InstanceFormatError("ground truth is not binary")
    elif isinstance(inst, OneBitInstance):
        if not np.all(np.abs(inst.y) == 1.0):
            raise InstanceFormatError("observations must be +-1")
        if not np.all(np.abs(inst.z_star) == 1.0):
            raise InstanceFormatError("ground truth must be +-1")
        if inst.rho <= 0.0:
            raise InstanceFormatError("rho must be positive")
    else:
        raise InstanceFormatError(f"unknown instance type {type(inst).__name__}")


def objective_for(inst) -> Objective:
    return inst.objective()
