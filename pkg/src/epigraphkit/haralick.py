"""The fourteen classic texture features of a co-occurrence matrix.

Conventions used throughout (both here and in the test oracles):

* level indices are 0-based and enter the moment sums as their index value;
* entropies use log base 2 by default (``base`` parameter), with 0 log 0 = 0;
* correlation (f3) is 0 when either marginal has zero variance;
* the variance feature (f4) is taken about the row-marginal mean, which for
  symmetric matrices equals the column mean;
* sum variance (f7) is taken about sum entropy (f8), following the original
  published definition;
* the information measures use HXY, HXY1, HXY2 with f12 = 0 when
  max(HX, HY) = 0 and f13 clamped at 0 before the square root;
* the maximal correlation coefficient (f14) is the square root of the
  second-largest eigenvalue of Q, computed on the level set with nonzero
  marginals; a 1x1 Q yields 0 by convention.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import EigenSolverError
from .glcm import CANONICAL_OFFSETS, Glcm, glcm_from_kernel
from .imaging import Kernel

FEATURE_NAMES = tuple(f"f{i}" for i in range(1, 15))


@dataclass(frozen=True)
class HaralickVector:
    """The 14 features; f14 is the maximal correlation coefficient."""

    f1: float  # angular second moment
    f2: float  # contrast
    f3: float  # correlation
    f4: float  # variance
    f5: float  # inverse difference moment
    f6: float  # sum average
    f7: float  # sum variance
    f8: float  # sum entropy
    f9: float  # entropy
    f10: float  # difference variance
    f11: float  # difference entropy
    f12: float  # information measure of correlation I
    f13: float  # information measure of correlation II
    f14: float  # maximal correlation coefficient

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "HaralickVector":
        values = list(values)
        if len(values) != 14:
            raise ValueError(f"expected 14 feature values, got {len(values)}")
        return cls(*(float(v) for v in values))


@dataclass(frozen=True, eq=False)
class QMatrix:
    """Q over the compacted level set.

    ``kept`` maps compact index -> original level; ``index_of`` maps original
    level -> compact index (-1 for levels dropped for having zero marginal).
    """

    q: np.ndarray
    kept: np.ndarray
    index_of: np.ndarray


def _entropy(weights: np.ndarray, base: float) -> float:
    """-sum w log w with the 0 log 0 = 0 convention."""
    w = weights[weights > 0]
    return float(-(w * (np.log(w) / np.log(base))).sum() + 0.0)


def q_matrix(g: Glcm) -> QMatrix:
    """q(i,j) = sum_k p(i,k) p(j,k) / (px(i) py(k)) on the surviving levels.

    Rows and columns with zero row-marginal are removed before the division,
    so every denominator is strictly positive. Each row of the result sums
    to 1.
    """
    rows = np.flatnonzero(g.px > 0)
    ks = np.flatnonzero(g.py > 0)
    sub = g.p[np.ix_(rows, ks)]
    a = sub / g.px[rows, None]  # p(i,k)/px(i)
    b = sub / g.py[ks][None, :]  # p(j,k)/py(k)
    q = a @ b.T
    index_of = np.full(g.levels, -1, dtype=np.int64)
    index_of[rows] = np.arange(rows.size)
    return QMatrix(q=q, kept=rows, index_of=index_of)


def mcc(g: Glcm, literal: bool = False) -> float:
    """Maximal correlation coefficient of a normalized GLCM.

    Default reading: square root of the second-largest eigenvalue of Q
    (sorted by real part, clamped into [0, 1]). With ``literal`` the
    second-largest matrix entry is used instead of the spectrum, kept for
    comparison. Either way a 1x1 Q gives 0.
    """
    qm = q_matrix(g)
    if qm.q.shape[0] <= 1:
        return 0.0
    if literal:
        second = float(np.sort(qm.q, axis=None)[-2])
        return float(np.sqrt(min(max(second, 0.0), 1.0)))
    try:
        eig = np.linalg.eigvals(qm.q)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue solver failed on Q: {exc}", matrix=qm.q) from exc
    second = float(np.sort(eig.real)[-2])
    # eigenvalues below solver round-off are numerically zero; snap them so
    # rank-1 (independent-marginal) matrices return exactly 0 instead of
    # sqrt(round-off)
    if abs(second) < 1e-12:
        second = 0.0
    return float(np.sqrt(min(max(second, 0.0), 1.0)))


def features(g: Glcm, base: float = 2.0) -> HaralickVector:
    """Compute all 14 features of one normalized GLCM."""
    p = g.p
    px, py = g.px, g.py
    n = g.levels
    idx = np.arange(n, dtype=np.float64)
    i_grid = idx[:, None]
    j_grid = idx[None, :]

    mu_x = float((idx * px).sum())
    mu_y = float((idx * py).sum())
    sigma_x = float(np.sqrt(((idx - mu_x) ** 2 * px).sum()))
    sigma_y = float(np.sqrt(((idx - mu_y) ** 2 * py).sum()))

    # distributions of i+j (length 2n-1) and |i-j| (length n)
    sum_idx = (i_grid + j_grid).astype(np.int64)
    diff_idx = np.abs(i_grid - j_grid).astype(np.int64)
    p_sum = np.bincount(sum_idx.ravel(), weights=p.ravel(), minlength=2 * n - 1)
    p_diff = np.bincount(diff_idx.ravel(), weights=p.ravel(), minlength=n)

    f1 = float((p * p).sum())
    kd = np.arange(p_diff.size, dtype=np.float64)
    f2 = float((kd * kd * p_diff).sum())
    if sigma_x > 0 and sigma_y > 0:
        f3 = float(((i_grid * j_grid * p).sum() - mu_x * mu_y) / (sigma_x * sigma_y))
    else:
        f3 = 0.0
    f4 = float(((idx - mu_x) ** 2 * px).sum())
    f5 = float((p / (1.0 + (i_grid - j_grid) ** 2)).sum())
    ks = np.arange(p_sum.size, dtype=np.float64)
    f6 = float((ks * p_sum).sum())
    f8 = _entropy(p_sum, base)
    f7 = float(((ks - f8) ** 2 * p_sum).sum())
    f9 = _entropy(p.ravel(), base)
    mean_diff = float((kd * p_diff).sum())
    f10 = float(((kd - mean_diff) ** 2 * p_diff).sum())
    f11 = _entropy(p_diff, base)

    hx = _entropy(px, base)
    hy = _entropy(py, base)
    marg = px[:, None] * py[None, :]
    mask = p > 0
    log_base = np.log(base)
    hxy1 = float(-(p[mask] * (np.log(marg[mask]) / log_base)).sum())
    hxy2 = _entropy(marg.ravel(), base)
    denom = max(hx, hy)
    f12 = float((f9 - hxy1) / denom) if denom > 0 else 0.0
    f13 = float(np.sqrt(max(0.0, 1.0 - np.exp(-2.0 * (hxy2 - f9)))))
    f14 = mcc(g)

    return HaralickVector(f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11, f12, f13, f14)


def kernel_features(
    k: Kernel, base: float = 2.0, symmetric: bool = True
) -> HaralickVector:
    """Features of a kernel: per-direction vectors averaged component-wise."""
    vectors = [
        features(glcm_from_kernel(k, off, symmetric=symmetric), base=base)
        for off in CANONICAL_OFFSETS
    ]
    mean = np.mean([v.as_array() for v in vectors], axis=0)
    return HaralickVector.from_array(mean)


def kernel_mcc(k: Kernel, symmetric: bool = True) -> float:
    """Direction-averaged maximal correlation coefficient of one kernel."""
    values = [
        mcc(glcm_from_kernel(k, off, symmetric=symmetric)) for off in CANONICAL_OFFSETS
    ]
    return float(np.mean(values))


def features_to_csv(rows: list[tuple[str, HaralickVector]]) -> str:
    """CSV dump ``kernel_id,f1,...,f14`` with full float precision."""
    out = ["kernel_id," + ",".join(FEATURE_NAMES)]
    for kid, vec in rows:
        out.append(kid + "," + ",".join(format(v, ".17g") for v in vec.as_array()))
    return "\n".join(out) + "\n"


def features_from_csv(text: str) -> list[tuple[str, HaralickVector]]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = "kernel_id," + ",".join(FEATURE_NAMES)
    if not lines or lines[0] != header:
        raise ValueError("not a feature csv: unexpected header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append((parts[0], HaralickVector.from_array([float(v) for v in parts[1:]])))
    return rows
