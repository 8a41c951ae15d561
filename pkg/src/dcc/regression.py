"""Ridge-regression estimation of relation tensors.

Matrices (order-2 maps) are fitted in closed form,
B = (X'X + lambda I)^-1 X'Y, with the ridge coefficient selected by
generalized cross-validation.  Order-3 tensors are estimated in two steps:
first a matrix per (verb, object) mapping subject vectors to observed
sentence vectors, then a tensor per verb mapping object vectors to the
unfolded step-one matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .space import VectorSpace
from .tensor import Tensor

DEFAULT_LAMBDA_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class RegressionProblem:
    """Aligned input/output example matrices and a ridge coefficient."""

    inputs: np.ndarray
    outputs: np.ndarray
    lam: float

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        Y = np.asarray(self.outputs, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", Y)
        if X.shape[0] != Y.shape[0]:
            raise ValueError(f"row mismatch: {X.shape[0]} inputs vs {Y.shape[0]} outputs")
        if self.lam < 0:
            raise ValueError("ridge coefficient must be >= 0")


def ridge_fit(p: RegressionProblem) -> np.ndarray:
    """Closed-form ridge solution minimizing ||XB - Y||^2 + lam ||B||^2."""
    X, Y, lam = p.inputs, p.outputs, p.lam
    gram = X.T @ X + lam * np.eye(X.shape[1])
    if lam == 0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise np.linalg.LinAlgError(
            "X'X is singular at lambda=0; use a positive ridge coefficient"
        )
    return np.linalg.solve(gram, X.T @ Y)


def gcv_lambda(p: RegressionProblem, grid: Sequence[float]) -> float:
    """Pick lambda from the grid by generalized cross-validation.

    GCV(lam) = n * RSS(lam) / (n - tr(H(lam)))^2 with H the ridge hat
    matrix; RSS sums over all output columns.  Ties go to the smaller
    lambda.  Grid points with a vanishing denominator are degenerate; if
    every point is degenerate there is nothing to select.
    """
    if len(grid) == 0:
        raise ValueError("empty lambda grid")
    X, Y = p.inputs, p.outputs
    n = X.shape[0]
    U, sing, _ = np.linalg.svd(X, full_matrices=False)
    UtY = U.T @ Y
    best_lam, best_score = None, None
    for lam in sorted(grid):
        if lam < 0:
            raise ValueError("ridge coefficients must be >= 0")
        shrink = sing**2 / (sing**2 + lam) if lam > 0 else (sing > 0).astype(float)
        trace_h = float(np.sum(shrink))
        denom = n - trace_h
        if denom**2 < 1e-12:
            continue
        fitted = U @ (shrink[:, None] * UtY)
        rss = float(np.sum((Y - fitted) ** 2))
        score = n * rss / denom**2
        if best_score is None or score < best_score:
            best_lam, best_score = lam, score
    if best_lam is None:
        raise ValueError("all grid points are degenerate (n - tr(H) vanishes)")
    return best_lam


@dataclass(frozen=True)
class ReducedSpace:
    """Rank-k projection onto the leading right-singular directions."""

    projection: np.ndarray
    k: int

    def project(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.projection


def svd_reduce(space: VectorSpace, k: int) -> tuple[ReducedSpace, VectorSpace]:
    """Truncated SVD of the word-by-context matrix.

    Rows are taken in sorted word order; the reduced vectors are the rows
    of U_k Sigma_k, which is the best rank-k approximation in Frobenius
    norm, and new words can be projected with the returned ReducedSpace.
    """
    words = sorted(space.vectors)
    X = np.stack([space.vectors[w] for w in words])
    if k > min(X.shape):
        raise ValueError(f"k={k} exceeds matrix rank bound {min(X.shape)}")
    U, sing, Vt = np.linalg.svd(X, full_matrices=False)
    reduced_rows = U[:, :k] * sing[:k]
    projection = Vt[:k].T
    basis = tuple(f"svd{i}" for i in range(k))
    from .space import make_space

    reduced = make_space(basis, {w: reduced_rows[i] for i, w in enumerate(words)},
                         weighting="svd-reduced")
    return ReducedSpace(projection, k), reduced


@dataclass(frozen=True)
class SvoExample:
    subject: str
    verb: str
    obj: str
    phrase_token: str


def parse_svo(lines: Iterable[str]) -> list[SvoExample]:
    """TSV lines ``subject<TAB>verb<TAB>object<TAB>phrase-token``."""
    out = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"svo line {lineno}: expected 4 tab-separated fields")
        out.append(SvoExample(*parts))
    return out


def load_svo(path) -> list[SvoExample]:
    with open(path, encoding="utf-8") as fh:
        return parse_svo(fh)


@dataclass
class MultistepResult:
    tensors: dict[str, Tensor]
    skipped: dict[str, str] = field(default_factory=dict)


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def multistep_learn(
    examples: Iterable[SvoExample],
    space: VectorSpace,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    min_examples: int = 3,
    normalize: bool = True,
) -> MultistepResult:
    """Two-step estimation of an order-3 tensor per verb.

    Step one fits, per (verb, object), a matrix sending subject vectors to
    the observed sentence vectors named by each example's phrase token.
    Step two fits, per verb, the tensor sending object vectors to the
    row-major unfolding of the step-one matrices.  Both steps need at
    least ``min_examples`` rows; verbs that cannot complete both steps are
    reported in ``skipped``.  The tensor axes are (sentence, subject,
    object): contract the object axis first, then the subject axis.
    """
    groups: dict[tuple[str, str], list[tuple[np.ndarray, np.ndarray]]] = {}
    dropped: dict[str, int] = {}
    for ex in examples:
        s, ph = space.get(ex.subject), space.get(ex.phrase_token)
        if s is None or ph is None:
            dropped[ex.verb] = dropped.get(ex.verb, 0) + 1
            continue
        if normalize:
            s, ph = _unit(s), _unit(ph)
        groups.setdefault((ex.verb, ex.obj), []).append((s, ph))

    d = space.dim
    vo_matrices: dict[str, list[tuple[np.ndarray, np.ndarray]]] = {}
    step1_skips: dict[str, int] = {}
    for (verb, obj), pairs in sorted(groups.items()):
        if len(pairs) < min_examples or space.get(obj) is None:
            step1_skips[verb] = step1_skips.get(verb, 0) + 1
            continue
        X = np.stack([s for s, _ in pairs])
        Y = np.stack([ph for _, ph in pairs])
        lam = gcv_lambda(RegressionProblem(X, Y, 0.0), lambda_grid)
        B = ridge_fit(RegressionProblem(X, Y, lam))
        matrix = B.T
        obj_vec = space.get(obj)
        if normalize:
            obj_vec = _unit(obj_vec)
        vo_matrices.setdefault(verb, []).append((obj_vec, matrix))

    result = MultistepResult({})
    verbs = sorted(set(v for v, _ in groups) | set(step1_skips) | set(dropped))
    for verb in verbs:
        mats = vo_matrices.get(verb, [])
        if len(mats) < min_examples:
            result.skipped[verb] = (
                f"{len(mats)} verb-object matrices (need {min_examples}); "
                f"{step1_skips.get(verb, 0)} object groups below the example threshold; "
                f"{dropped.get(verb, 0)} rows dropped for missing vectors"
            )
            continue
        X = np.stack([o for o, _ in mats])
        Y = np.stack([m.ravel() for _, m in mats])
        lam = gcv_lambda(RegressionProblem(X, Y, 0.0), lambda_grid)
        B = ridge_fit(RegressionProblem(X, Y, lam))
        tensor = B.T.reshape(d, d, d)
        result.tensors[verb] = Tensor(tensor, verb, "regression")
    return result


def compose_regression(t: Tensor, subject: np.ndarray, obj: np.ndarray) -> np.ndarray:
    """Apply an order-3 regression tensor: contract object, then subject."""
    vo = np.tensordot(t.data, np.asarray(obj, dtype=float), axes=([2], [0]))
    return np.tensordot(vo, np.asarray(subject, dtype=float), axes=([1], [0]))
