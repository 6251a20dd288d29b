"""Gell-Mann tensor basis of su(3^n).

Basis elements are tensor products of the (unscaled) Gell-Mann matrices on a
strictly increasing set of sites, identity elsewhere. A Hamiltonian is stored
as a sparse map from :class:`BasisLabel` to real coefficients,
``H = sum_sigma h_sigma Lambda_sigma``.

The basis is orthogonal but not uniformly normalized under the trace pairing:
``tr(Lambda_a Lambda_b) = 2**s * 3**(n - s) * delta_ab`` for an ``s``-body
label. :func:`encode` divides by that per-label norm so that
``decode(encode(H)) == H``.

Commutators of basis elements are expanded site by site from the local
product table ``lambda_a lambda_b = (2/3) delta_ab I + (d_abc + i f_abc) lambda_c``
rather than by multiplying dense matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType

import numpy as np
import scipy.linalg
import scipy.sparse

from qg3.errors import DimensionError, InvalidIndexError, InvalidLabelError, ValidationError

_S3 = math.sqrt(3.0)

_GELL_MANN = np.array(
    [
        [[0, 1, 0], [1, 0, 0], [0, 0, 0]],
        [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]],
        [[1, 0, 0], [0, -1, 0], [0, 0, 0]],
        [[0, 0, 1], [0, 0, 0], [1, 0, 0]],
        [[0, 0, -1j], [0, 0, 0], [1j, 0, 0]],
        [[0, 0, 0], [0, 0, 1], [0, 1, 0]],
        [[0, 0, 0], [0, 0, -1j], [0, 1j, 0]],
        [[1 / _S3, 0, 0], [0, 1 / _S3, 0], [0, 0, -2 / _S3]],
    ],
    dtype=complex,
)
_GELL_MANN.setflags(write=False)

# local operators with index 0 = identity, 1..8 = Gell-Mann
_LOCAL = np.concatenate([np.eye(3, dtype=complex)[None], _GELL_MANN])
_LOCAL_NORM2 = np.array([3.0] + [2.0] * 8)

# _PRODUCT[a, b, c] = coefficient of _LOCAL[c] in _LOCAL[a] @ _LOCAL[b]
_PRODUCT = np.einsum("ckj,abjk->abc", _LOCAL, np.einsum("aij,bjk->abik", _LOCAL, _LOCAL))
_PRODUCT /= _LOCAL_NORM2[None, None, :]
_PRODUCT[np.abs(_PRODUCT) < 1e-15] = 0.0
_PRODUCT.setflags(write=False)

# scaled lambda_8 (unit operator norm), used for unit-norm gate generators
LAMBDA8_UNIT_SCALE = _S3 / 2.0

MAX_DENSE_SITES = 3
MAX_LABEL_SITES = 4


def gell_mann(k: int) -> np.ndarray:
    """Return the 3x3 Gell-Mann matrix ``lambda_k`` for ``k`` in 1..8."""
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= 8:
        raise InvalidIndexError(f"Gell-Mann index must be an integer in 1..8, got {k!r}")
    return _GELL_MANN[k - 1].copy()


@dataclass(frozen=True)
class BasisLabel:
    """A multi-site Gell-Mann product, e.g. ``lambda_4 (x) lambda_6`` on sites 1, 2.

    Sites are 1-based and strictly increasing; ``gm[i]`` is the Gell-Mann index
    acting on ``sites[i]``.
    """

    n: int
    sites: tuple
    gm: tuple

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(x) for x in self.sites))
        object.__setattr__(self, "gm", tuple(int(x) for x in self.gm))
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidLabelError(f"site count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if len(self.sites) != len(self.gm):
            raise InvalidLabelError("sites and gm must have equal length")
        if not 1 <= len(self.sites) <= self.n:
            raise InvalidLabelError(f"body weight must be in 1..{self.n}, got {len(self.sites)}")
        if any(not 1 <= a <= self.n for a in self.sites):
            raise InvalidLabelError(f"sites {self.sites} out of range 1..{self.n}")
        if any(b <= a for a, b in zip(self.sites, self.sites[1:])):
            raise InvalidLabelError(f"sites must be strictly increasing, got {self.sites}")
        if any(not 1 <= k <= 8 for k in self.gm):
            raise InvalidIndexError(f"Gell-Mann indices must be in 1..8, got {self.gm}")

    @classmethod
    def from_factors(cls, n, factors):
        """Build from ``[(site, gm), ...]``; factors are sorted by site."""
        factors = sorted(factors)
        return cls(n, tuple(f[0] for f in factors), tuple(f[1] for f in factors))

    @property
    def factors(self):
        return tuple(zip(self.sites, self.gm))

    @property
    def weight(self) -> int:
        return len(self.sites)

    def sort_key(self):
        return (self.n, self.weight, self.sites, self.gm)

    def __lt__(self, other):
        if not isinstance(other, BasisLabel):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    @property
    def digits(self):
        """Per-site local index (0 for identity), site 1 first."""
        d = [0] * self.n
        for a, k in zip(self.sites, self.gm):
            d[a - 1] = k
        return tuple(d)

    @classmethod
    def from_digits(cls, digits):
        sites = tuple(i + 1 for i, k in enumerate(digits) if k)
        return cls(len(digits), sites, tuple(k for k in digits if k))

    def to_json(self):
        return {"n": self.n, "sites": list(self.sites), "gm": list(self.gm)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["n"], tuple(obj["sites"]), tuple(obj["gm"]))

    def __repr__(self):
        body = ",".join(f"{a}:{k}" for a, k in self.factors)
        return f"BasisLabel(n={self.n}, {body})"


def enumerate_basis(n: int, max_body: int | None = None) -> list[BasisLabel]:
    """All basis labels of su(3^n) with body weight <= ``max_body``.

    Order is canonical: by body weight, then site tuple, then Gell-Mann tuple.
    """
    return list(_tables(n).labels[: _count_upto(n, max_body)])


def basis_size(n: int, max_body: int | None = None) -> int:
    """Number of labels with body weight <= max_body, without building them."""
    top = n if max_body is None else min(max_body, n)
    return sum(math.comb(n, s) * 8**s for s in range(1, top + 1))


def _count_upto(n, max_body):
    return basis_size(n, max_body)


class _Tables:
    __slots__ = ("n", "labels", "index", "weights", "norm2", "digits", "full_to_canonical", "canonical_to_full")

    def __init__(self, n):
        if n < 1:
            raise InvalidLabelError(f"site count must be positive, got {n}")
        self.n = n
        labels = []
        for s in range(1, n + 1):
            for sites in itertools.combinations(range(1, n + 1), s):
                for gm in itertools.product(range(1, 9), repeat=s):
                    labels.append(BasisLabel(n, sites, gm))
        self.labels = tuple(labels)
        self.index = {lab: i for i, lab in enumerate(labels)}
        self.weights = np.array([lab.weight for lab in labels])
        self.norm2 = np.array([2.0**w * 3.0 ** (n - w) for w in self.weights])
        self.digits = np.array([lab.digits for lab in labels], dtype=np.int64).reshape(len(labels), n)
        self.canonical_to_full = self.digits @ (9 ** np.arange(n - 1, -1, -1))
        self.full_to_canonical = np.full(9**n, -1, dtype=np.int64)
        self.full_to_canonical[self.canonical_to_full] = np.arange(len(labels))
        for arr in (self.weights, self.norm2, self.digits, self.canonical_to_full, self.full_to_canonical):
            arr.setflags(write=False)


@lru_cache(maxsize=None)
def _tables(n: int) -> _Tables:
    return _Tables(n)


def label_weights(n: int) -> np.ndarray:
    """Body weight of every canonical basis position."""
    return _tables(n).weights


def label_norms2(n: int) -> np.ndarray:
    """``tr(Lambda^2)`` for every canonical basis position."""
    return _tables(n).norm2


def label_index(label: BasisLabel) -> int:
    return _tables(label.n).index[label]


class CoefficientVector:
    """Sparse real coefficients ``{BasisLabel: h}`` of a traceless Hermitian operator.

    Exact zeros are never stored. Instances are treated as immutable.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms=None):
        self.n = int(n)
        clean = {}
        for lab, h in (terms or {}).items():
            if lab.n != self.n:
                raise DimensionError(f"label {lab} has n={lab.n}, expected {self.n}")
            h = float(h)
            if h != 0.0:
                clean[lab] = h
        self._terms = clean

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def items(self):
        """Terms in canonical label order."""
        return sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())

    def __getitem__(self, label):
        return self._terms.get(label, 0.0)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(lab for lab, _ in self.items())

    def __eq__(self, other):
        if not isinstance(other, CoefficientVector):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def __repr__(self):
        inner = ", ".join(f"{lab.factors}: {h:.6g}" for lab, h in self.items()[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"CoefficientVector(n={self.n}, {{{inner}{more}}})"

    def _check(self, other):
        if self.n != other.n:
            raise DimensionError(f"site counts differ: {self.n} vs {other.n}")

    def __add__(self, other):
        self._check(other)
        out = dict(self._terms)
        for lab, h in other._terms.items():
            out[lab] = out.get(lab, 0.0) + h
        return CoefficientVector(self.n, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, alpha):
        return CoefficientVector(self.n, {lab: alpha * h for lab, h in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, alpha):
        return self * (1.0 / alpha)

    def __neg__(self):
        return -1.0 * self

    @property
    def max_body(self) -> int:
        return max((lab.weight for lab in self._terms), default=0)

    def restrict(self, max_body=None, min_body=1):
        """Keep only terms with ``min_body <= weight <= max_body``."""
        hi = self.n if max_body is None else max_body
        return CoefficientVector(
            self.n, {lab: h for lab, h in self._terms.items() if min_body <= lab.weight <= hi}
        )

    def norm(self) -> float:
        """Euclidean norm of the coefficients."""
        return math.sqrt(sum(h * h for h in self._terms.values()))

    def to_array(self) -> np.ndarray:
        tab = _tables(self.n)
        out = np.zeros(len(tab.labels))
        for lab, h in self._terms.items():
            out[tab.index[lab]] = h
        return out

    @classmethod
    def from_array(cls, n, arr, atol=0.0):
        tab = _tables(n)
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (len(tab.labels),):
            raise DimensionError(f"expected length {len(tab.labels)} for n={n}, got {arr.shape}")
        nz = np.flatnonzero(np.abs(arr) > atol)
        return cls(n, {tab.labels[i]: arr[i] for i in nz})

    def to_json(self):
        return {
            "n": self.n,
            "terms": [{"sites": list(lab.sites), "gm": list(lab.gm), "h": h} for lab, h in self.items()],
        }

    @classmethod
    def from_json(cls, obj):
        n = obj["n"]
        terms = {}
        for t in obj["terms"]:
            lab = BasisLabel(n, tuple(t["sites"]), tuple(t["gm"]))
            terms[lab] = terms.get(lab, 0.0) + float(t["h"])
        return cls(n, terms)

    @classmethod
    def single(cls, label: BasisLabel, h=1.0):
        return cls(label.n, {label: h})


def build_operator(label: BasisLabel) -> np.ndarray:
    """Dense ``3^n x 3^n`` matrix of a basis label (identity on unlisted sites)."""
    if not isinstance(label, BasisLabel):
        raise InvalidLabelError(f"expected BasisLabel, got {type(label).__name__}")
    out = np.ones((1, 1), dtype=complex)
    for k in label.digits:
        out = np.kron(out, _LOCAL[k])
    return out


@lru_cache(maxsize=None)
def _basis_sparse(n: int):
    """Sparse basis tables ``(B^T, conj(B))`` with B of shape (9^n - 1, 9^n).

    Each row of B is one flattened basis operator; every operator has at most
    3^n nonzero entries.
    """
    if n > MAX_DENSE_SITES:
        raise DimensionError(f"dense basis tables are limited to n <= {MAX_DENSE_SITES}")
    rows = [scipy.sparse.csr_matrix(build_operator(lab).reshape(1, -1)) for lab in _tables(n).labels]
    B = scipy.sparse.vstack(rows, format="csr")
    return B.T.tocsr(), B.conj().tocsr()


def decode_array(arr: np.ndarray, n: int) -> np.ndarray:
    """Dense operator(s) from canonical coefficient array(s), no validation.

    ``arr`` may be 1-D (one operator) or 2-D (a batch, one row per operator).
    """
    dim = 3**n
    arr = np.asarray(arr, dtype=float)
    if n <= MAX_DENSE_SITES:
        BT, _ = _basis_sparse(n)
        out = (BT @ arr.T).T
        return out.reshape(arr.shape[:-1] + (dim, dim))
    if arr.ndim != 1:
        return np.array([decode_array(row, n) for row in arr])
    out = np.zeros((dim, dim), dtype=complex)
    labels = _tables(n).labels
    for i in np.flatnonzero(arr):
        out += arr[i] * build_operator(labels[i])
    return out


def encode_array(H: np.ndarray, n: int) -> np.ndarray:
    """Canonical coefficient array of ``H`` by trace projection (no validation)."""
    tab = _tables(n)
    H = np.asarray(H)
    if n <= MAX_DENSE_SITES:
        # tr(Lambda H) = sum conj(Lambda_ij) H_ij for Hermitian Lambda
        _, Bc = _basis_sparse(n)
        return (Bc @ H.reshape(-1)).real / tab.norm2
    out = np.empty(len(tab.labels))
    for i, lab in enumerate(tab.labels):
        out[i] = np.vdot(build_operator(lab), H).real
    return out / tab.norm2


def decode(c: CoefficientVector) -> np.ndarray:
    dim = 3**c.n
    out = np.zeros((dim, dim), dtype=complex)
    for lab, h in c.terms.items():
        out += h * build_operator(lab)
    return out


def _site_count(dim):
    n = round(math.log(dim, 3)) if dim > 1 else 0
    if n < 1 or 3**n != dim:
        raise DimensionError(f"dimension {dim} is not a positive power of 3")
    return n


def encode(H, n: int | None = None, atol: float = 1e-13, tol: float = 1e-9) -> CoefficientVector:
    """Coefficient vector of a Hermitian traceless operator.

    Coefficients with magnitude ``<= atol`` are dropped (round-off from the
    trace projection). Raises :class:`ValidationError` if ``H`` is
    non-Hermitian or has trace beyond ``tol``.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {H.shape}")
    n_dim = _site_count(H.shape[0])
    if n is not None and n != n_dim:
        raise DimensionError(f"operator of dimension {H.shape[0]} does not act on {n} qutrits")
    herm = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if herm > tol:
        raise ValidationError(f"operator is not Hermitian (max |H - H^dagger| = {herm:.3e})", herm)
    tr = abs(np.trace(H))
    if tr > tol * max(1.0, H.shape[0]):
        raise ValidationError(f"operator is not traceless (|tr H| = {tr:.3e})", tr)
    return CoefficientVector.from_array(n_dim, encode_array(H, n_dim), atol=atol)


def _commutator_full(a_digits: np.ndarray, b_digits: np.ndarray) -> np.ndarray:
    """Real coefficients c over the full 9^n product basis with [A, B] = i * sum c Lambda.

    ``a_digits``/``b_digits`` have shape (batch, n). Column 0 (identity) is
    always zero for a commutator.
    """
    batch, n = a_digits.shape
    ab = np.ones((batch, 1), dtype=complex)
    ba = np.ones((batch, 1), dtype=complex)
    for i in range(n):
        ab = np.einsum("bi,bj->bij", ab, _PRODUCT[a_digits[:, i], b_digits[:, i]]).reshape(batch, -1)
        ba = np.einsum("bi,bj->bij", ba, _PRODUCT[b_digits[:, i], a_digits[:, i]]).reshape(batch, -1)
    return ((ab - ba) / 1j).real


def _commutator_canonical(n, a_idx, b_idx, chunk=4096):
    """Bracket coefficients in canonical order for index pairs, shape (batch, 9^n - 1)."""
    tab = _tables(n)
    digits = tab.digits
    a_idx = np.asarray(a_idx)
    b_idx = np.asarray(b_idx)
    out = np.empty((len(a_idx), len(tab.labels)))
    for start in range(0, len(a_idx), chunk):
        sl = slice(start, start + chunk)
        full = _commutator_full(digits[a_idx[sl]], digits[b_idx[sl]])
        out[sl] = full[:, tab.canonical_to_full]
    return out


def commutator_expand(a: BasisLabel, b: BasisLabel, atol: float = 1e-14) -> CoefficientVector:
    """Coefficients ``c`` with ``[Lambda_a, Lambda_b] = i * decode(c)``."""
    if a.n != b.n:
        raise DimensionError(f"labels act on different site counts ({a.n} vs {b.n})")
    full = _commutator_full(np.array([a.digits]), np.array([b.digits]))[0]
    full[np.abs(full) <= atol] = 0.0
    out = {}
    for j in np.flatnonzero(full):
        out[BasisLabel.from_digits(np.unravel_index(j, (9,) * a.n))] = full[j]
    return CoefficientVector(a.n, out)


def bracket(a: CoefficientVector, b: CoefficientVector, atol: float = 1e-14) -> CoefficientVector:
    """Bilinear extension of :func:`commutator_expand`: ``[A, B] = i * decode(result)``."""
    if a.n != b.n:
        raise DimensionError(f"site counts differ: {a.n} vs {b.n}")
    if not len(a) or not len(b):
        return CoefficientVector(a.n)
    tab = _tables(a.n)
    ai = np.array([tab.index[lab] for lab in a.terms])
    bi = np.array([tab.index[lab] for lab in b.terms])
    ah = np.array(list(a.terms.values()))
    bh = np.array(list(b.terms.values()))
    pa, pb = np.meshgrid(np.arange(len(ai)), np.arange(len(bi)), indexing="ij")
    pa, pb = pa.ravel(), pb.ravel()
    coeffs = _commutator_canonical(a.n, ai[pa], bi[pb])
    total = (ah[pa] * bh[pb]) @ coeffs
    return CoefficientVector.from_array(a.n, total, atol=atol)


@dataclass(frozen=True)
class ClosureReport:
    n: int
    generator_max_body: int
    generator_count: int
    achieved_rank: int
    target_rank: int
    depth_used: int
    rank_by_depth: tuple

    @property
    def spans(self) -> bool:
        return self.achieved_rank == self.target_rank

    def to_json(self):
        return {
            "n": self.n,
            "generator_max_body": self.generator_max_body,
            "generator_count": self.generator_count,
            "achieved_rank": self.achieved_rank,
            "target_rank": self.target_rank,
            "depth_used": self.depth_used,
            "rank_by_depth": list(self.rank_by_depth),
            "spans": self.spans,
        }


@lru_cache(maxsize=4096)
def _adjoint_matrix(n, g):
    """Sparse real matrix ad_g with ad_g @ e_l = coefficients of [Lambda_g, Lambda_l] / i."""
    m = len(_tables(n).labels)
    block = _commutator_canonical(n, np.full(m, g), np.arange(m))
    block[np.abs(block) < 1e-13] = 0.0
    return scipy.sparse.csr_matrix(block.T)


def _absorb(Q, cand, tol):
    """Extend the orthonormal column basis Q by the span of ``cand``; return new columns."""
    norms = np.linalg.norm(cand, axis=0)
    cand = cand[:, norms > tol] / norms[norms > tol]
    if cand.shape[1] == 0:
        return cand
    for _ in range(2):
        if Q.shape[1]:
            cand = cand - Q @ (Q.T @ cand)
    if np.max(np.linalg.norm(cand, axis=0), initial=0.0) <= tol:
        return cand[:, :0]
    q, r, _ = scipy.linalg.qr(cand, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    k = int(np.count_nonzero(diag > tol))
    return q[:, :k]


def verify_bracket_closure(n: int, generator_max_body: int = 2, tol: float = 1e-9, max_depth: int = 64):
    """Close the real span of low-body generators under commutators.

    Starting from every label of body weight <= ``generator_max_body``, each
    depth brackets all generators with the directions discovered at the
    previous depth and adds the results to the span (pivoted Gram-Schmidt with
    threshold ``tol``). Stops when the rank is full or stops growing.
    """
    tab = _tables(n)
    m = len(tab.labels)
    gen_idx = np.flatnonzero(tab.weights <= generator_max_body)
    Q = np.eye(m)[:, gen_idx]
    frontier = Q
    ranks = [Q.shape[1]]
    depth = 0
    while Q.shape[1] < m and frontier.shape[1] and depth < max_depth:
        found = []
        for g in gen_idx:
            new = _absorb(Q, _adjoint_matrix(n, int(g)) @ frontier, tol)
            if new.shape[1]:
                Q = np.hstack([Q, new])
                found.append(new)
            if Q.shape[1] == m:
                break
        depth += 1
        ranks.append(Q.shape[1])
        frontier = np.hstack(found) if found else Q[:, :0]
    if len(ranks) > 1 and ranks[-1] == ranks[-2]:
        # last depth added nothing; it does not count as used
        depth -= 1
        ranks.pop()
    return ClosureReport(
        n=n,
        generator_max_body=generator_max_body,
        generator_count=len(gen_idx),
        achieved_rank=int(Q.shape[1]),
        target_rank=m,
        depth_used=depth,
        rank_by_depth=tuple(ranks),
    )
