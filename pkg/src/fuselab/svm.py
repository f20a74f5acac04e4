"""Soft-margin kernel SVM trained by Sequential Minimal Optimization.

The binary solver is a simplified SMO: working pairs are (first index from
KKT violation scan, second index drawn in randomized order from a seeded
PRNG), with full passes over all points alternating with passes over the
non-bound set.  Training terminates after a configurable number of
consecutive violation-free full passes, refines the bias from the non-bound
support vectors and verifies the KKT conditions; failure to satisfy them is
reported as an explicit convergence error, never silently.

``brute_force_dual`` is an independent oracle for small problems: it
maximizes the same dual objective by accelerated projected-gradient
refinement over the box/equality feasible set and never shares code with
the SMO update.

Multiclass reduction is one-vs-one with pairwise voting.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConvergenceError


@dataclass(frozen=True)
class KernelSpec:
    """RBF or polynomial kernel parameters."""

    kind: str
    gamma: float
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("rbf", "polynomial"):
            raise ConfigError(f"unknown kernel kind '{self.kind}'")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.kind == "polynomial" and self.degree < 1:
            raise ConfigError(f"polynomial degree must be >= 1, got {self.degree}")


def default_rbf_kernel(features: np.ndarray) -> KernelSpec:
    """Scale-aware default: gamma = 1 / (d * var(features)) over the given rows."""
    x = np.asarray(features, dtype=np.float64)
    d = x.shape[1]
    var = float(x.var())
    if var <= 0.0:
        var = 1.0
    return KernelSpec(kind="rbf", gamma=1.0 / (d * var))


def default_poly_kernel(features: np.ndarray, degree: int = 3, coef0: float = 0.0) -> KernelSpec:
    """Default polynomial kernel: gamma = 1/d."""
    d = np.asarray(features).shape[1]
    return KernelSpec(kind="polynomial", gamma=1.0 / d, degree=degree, coef0=coef0)


def kernel_eval(spec: KernelSpec, x: np.ndarray, z: np.ndarray) -> float:
    """K(x, z) for two single vectors."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape or x.ndim != 1:
        raise ValueError(f"kernel arguments must be equal-width vectors, got {x.shape} / {z.shape}")
    if spec.kind == "rbf":
        diff = x - z
        return float(np.exp(-spec.gamma * diff @ diff))
    return float((spec.gamma * (x @ z) + spec.coef0) ** spec.degree)


def kernel_matrix(spec: KernelSpec, x: np.ndarray, z: np.ndarray | None = None) -> np.ndarray:
    """Gram matrix K[i, j] = K(x_i, z_j); symmetric when z is omitted."""
    x = np.asarray(x, dtype=np.float64)
    z = x if z is None else np.asarray(z, dtype=np.float64)
    with np.errstate(over="ignore"):  # overflow surfaces as inf, callers reject it
        if spec.kind == "rbf":
            sq = (
                (x**2).sum(axis=1)[:, None]
                + (z**2).sum(axis=1)[None, :]
                - 2.0 * (x @ z.T)
            )
            np.maximum(sq, 0.0, out=sq)
            return np.exp(-spec.gamma * sq)
        return (spec.gamma * (x @ z.T) + spec.coef0) ** spec.degree


@dataclass(frozen=True)
class SmoConfig:
    C: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 10
    max_sweeps: int = 1000
    seed: int = 0
    cache_mb: int = 256
    track_objective: bool = False

    def __post_init__(self) -> None:
        if self.C <= 0:
            raise ConfigError(f"C must be positive, got {self.C}")
        if self.tolerance <= 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_passes <= 0 or self.max_sweeps <= 0:
            raise ConfigError("pass and sweep limits must be positive")
        if self.cache_mb < 0:
            raise ConfigError("cache budget must be non-negative")


@dataclass(frozen=True)
class SmoReport:
    """Full-training-set diagnostics kept alongside a trained binary model."""

    alphas: np.ndarray
    labels: np.ndarray
    objective: float
    sweeps: int
    objective_trace: tuple[float, ...] | None = None


@dataclass(frozen=True)
class BinarySvmModel:
    """Support vectors with dual coefficients alpha_i * y_i and a bias term."""

    support_vectors: np.ndarray
    dual_coef: np.ndarray
    bias: float
    kernel: KernelSpec
    C: float
    report: SmoReport | None = None

    def __post_init__(self) -> None:
        sv = np.asarray(self.support_vectors, dtype=np.float64)
        dc = np.asarray(self.dual_coef, dtype=np.float64)
        if sv.ndim != 2 or dc.shape != (sv.shape[0],):
            raise ConfigError(f"inconsistent SVM model shapes {sv.shape} / {dc.shape}")
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "dual_coef", dc)


def decision_function(model: BinarySvmModel, x: np.ndarray) -> np.ndarray | float:
    """f(x) = sum_i alpha_i y_i K(sv_i, x) + b for a vector or a matrix of rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    rows = x[None, :] if single else x
    if rows.shape[1] != model.support_vectors.shape[1] and model.support_vectors.size > 0:
        raise ValueError(
            f"input width {rows.shape[1]} does not match model width {model.support_vectors.shape[1]}"
        )
    if model.support_vectors.shape[0] == 0:
        out = np.full(rows.shape[0], model.bias)
    else:
        k = kernel_matrix(model.kernel, rows, model.support_vectors)
        out = k @ model.dual_coef + model.bias
    return float(out[0]) if single else out


def dual_objective(alphas: np.ndarray, labels: np.ndarray, gram: np.ndarray) -> float:
    """Standard soft-margin dual: sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij."""
    ay = alphas * labels
    return float(alphas.sum() - 0.5 * ay @ gram @ ay)


def _check_binary_labels(labels: np.ndarray) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    vals = set(np.unique(y).tolist())
    if not vals <= {-1.0, 1.0}:
        raise ValueError(f"binary labels must be -1/+1, got {sorted(vals)}")
    if vals != {-1.0, 1.0}:
        raise ValueError("both classes must be present in the training data")
    return y


def _refine_bias(alphas, y, g, C, bound_eps, tol):
    """Final bias from the KKT-feasible interval.

    ``g`` holds the bias-free decision values sum_j alpha_j y_j K_ij and
    r = y - g is the bias that would put each point exactly on its margin.
    Interior points and one side of each bound constrain the bias; the
    interior-margin mean is used when it fits the tolerance slab, else the
    slab midpoint.
    """
    r = y - g
    interior = (alphas > bound_eps) & (alphas < C - bound_eps)
    at_zero = alphas <= bound_eps
    at_c = alphas >= C - bound_eps
    lower_mask = interior | (at_zero & (y > 0)) | (at_c & (y < 0))
    upper_mask = interior | (at_zero & (y < 0)) | (at_c & (y > 0))
    lo = r[lower_mask].max() - tol if lower_mask.any() else -np.inf
    hi = r[upper_mask].min() + tol if upper_mask.any() else np.inf
    if interior.any():
        mean = float(r[interior].mean())
        if lo <= mean <= hi:
            return mean
    if np.isinf(lo) and np.isinf(hi):
        return 0.0
    if np.isinf(lo):
        return float(hi)
    if np.isinf(hi):
        return float(lo)
    return float((lo + hi) / 2.0)


def kkt_violations(alphas, y, f, C, tol, bound_eps) -> np.ndarray:
    """Indices violating the KKT optimality conditions beyond ``tol``.

    alpha = 0  requires y f >= 1 - tol; 0 < alpha < C requires |y f - 1| <= tol;
    alpha = C  requires y f <= 1 + tol.
    """
    margin = y * f
    at_zero = alphas <= bound_eps
    at_c = alphas >= C - bound_eps
    interior = ~at_zero & ~at_c
    bad = (
        (at_zero & (margin < 1.0 - tol))
        | (interior & (np.abs(margin - 1.0) > tol))
        | (at_c & (margin > 1.0 + tol))
    )
    return np.flatnonzero(bad)


def smo_train(
    features: np.ndarray,
    labels: np.ndarray,
    kernel: KernelSpec,
    config: SmoConfig,
) -> BinarySvmModel:
    """Train one binary soft-margin SVM; raises ConvergenceError when the
    final KKT check fails within the configured tolerance."""
    x = np.asarray(features, dtype=np.float64)
    y = _check_binary_labels(labels)
    n = x.shape[0]
    if x.ndim != 2 or n != y.shape[0]:
        raise ValueError(f"features {x.shape} and labels {y.shape} do not align")
    if n < 2:
        raise ValueError("need at least 2 training samples")

    cache_budget = config.cache_mb * (1 << 20)
    cached = n * n * 8 <= cache_budget
    gram = kernel_matrix(kernel, x) if cached else None
    if cached:
        if not np.isfinite(gram).all():
            raise ValueError("kernel matrix contains non-finite values")
        diag = np.diag(gram).copy()

        def krow(i: int) -> np.ndarray:
            return gram[i]

    else:
        diag = np.array([kernel_eval(kernel, x[i], x[i]) for i in range(n)])

        def krow(i: int) -> np.ndarray:
            row = kernel_matrix(kernel, x[i : i + 1], x)[0]
            if not np.isfinite(row).all():
                raise ValueError("kernel matrix contains non-finite values")
            return row

    rng = np.random.default_rng(config.seed)
    C, tol = config.C, config.tolerance
    bound_eps = 1e-8 * max(1.0, C)
    alphas = np.zeros(n)
    bias = 0.0
    f = np.zeros(n)  # current decision values over the training set
    trace: list[float] | None = [] if config.track_objective else None

    def record() -> None:
        if trace is not None:
            g = gram if cached else kernel_matrix(kernel, x)
            trace.append(dual_objective(alphas, y, g))

    def take_step(i: int, j: int) -> bool:
        nonlocal bias, f
        if i == j:
            return False
        a_i, a_j = alphas[i], alphas[j]
        e_i, e_j = f[i] - y[i], f[j] - y[j]
        s = y[i] * y[j]
        if s > 0:
            lo, hi = max(0.0, a_i + a_j - C), min(C, a_i + a_j)
        else:
            lo, hi = max(0.0, a_j - a_i), min(C, C + a_j - a_i)
        if hi - lo < 1e-12:
            return False
        row_i, row_j = krow(i), krow(j)
        eta = 2.0 * row_i[j] - diag[i] - diag[j]
        if eta >= 0.0:
            return False
        a_j_new = np.clip(a_j - y[j] * (e_i - e_j) / eta, lo, hi)
        if abs(a_j_new - a_j) < 1e-12:
            return False
        a_i_new = a_i + s * (a_j - a_j_new)
        d_i, d_j = a_i_new - a_i, a_j_new - a_j
        b1 = bias - e_i - y[i] * d_i * diag[i] - y[j] * d_j * row_i[j]
        b2 = bias - e_j - y[i] * d_i * row_i[j] - y[j] * d_j * diag[j]
        if bound_eps < a_i_new < C - bound_eps:
            b_new = b1
        elif bound_eps < a_j_new < C - bound_eps:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0
        f += y[i] * d_i * row_i + y[j] * d_j * row_j + (b_new - bias)
        alphas[i], alphas[j] = a_i_new, a_j_new
        bias = b_new
        record()
        return True

    def examine(i: int) -> bool:
        r = (f[i] - y[i]) * y[i]
        if not ((r < -tol and alphas[i] < C - bound_eps) or (r > tol and alphas[i] > bound_eps)):
            return False
        non_bound = np.flatnonzero((alphas > bound_eps) & (alphas < C - bound_eps))
        for pool in (non_bound, np.arange(n)):
            if pool.size == 0:
                continue
            for j in rng.permutation(pool):
                if take_step(i, int(j)):
                    return True
        return False

    record()
    examine_all = True
    quiet_full_passes = 0
    sweeps = 0
    while sweeps < config.max_sweeps and quiet_full_passes < config.max_passes:
        sweeps += 1
        if examine_all:
            indices = np.arange(n)
        else:
            indices = np.flatnonzero((alphas > bound_eps) & (alphas < C - bound_eps))
        changed = sum(examine(int(i)) for i in indices)
        if examine_all:
            quiet_full_passes = quiet_full_passes + 1 if changed == 0 else 0
            if changed > 0:
                examine_all = False
        elif changed == 0:
            examine_all = True

    g = f - bias
    bias = _refine_bias(alphas, y, g, C, bound_eps, tol)
    f = g + bias
    bad = kkt_violations(alphas, y, f, C, tol, bound_eps)
    if bad.size > 0:
        raise ConvergenceError(
            f"SMO stopped after {sweeps} sweeps with {bad.size}/{n} KKT violations "
            f"(first at index {bad[0]}); raise max_sweeps/max_passes or loosen tolerance"
        )
    equality = abs(float(alphas @ y))
    if equality > 1e-6:
        raise ConvergenceError(f"equality constraint residual {equality:.3e} exceeds 1e-6")

    final_gram = gram if cached else kernel_matrix(kernel, x)
    report = SmoReport(
        alphas=alphas.copy(),
        labels=y.copy(),
        objective=dual_objective(alphas, y, final_gram),
        sweeps=sweeps,
        objective_trace=tuple(trace) if trace is not None else None,
    )
    keep = alphas > 1e-10
    return BinarySvmModel(
        support_vectors=x[keep].copy(),
        dual_coef=(alphas * y)[keep].copy(),
        bias=bias,
        kernel=kernel,
        C=C,
        report=report,
    )


def brute_force_dual(
    features: np.ndarray,
    labels: np.ndarray,
    kernel: KernelSpec,
    C: float,
    resolution: int = 1,
) -> tuple[np.ndarray, float]:
    """Reference maximizer of the SVM dual for small problems (n <= 8).

    Accelerated projected-gradient refinement over the feasible set
    {0 <= a <= C, sum a_i y_i = 0}; ``resolution`` scales the iteration
    budget, and doubling it changes the converged objective by well under
    1e-6 (self-check used by the tests).  Deterministic; shares no update
    code with the SMO path.
    """
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    x = np.asarray(features, dtype=np.float64)
    y = _check_binary_labels(labels)
    n = x.shape[0]
    if n > 8:
        raise ValueError(f"oracle is limited to n <= 8 problems, got n = {n}")
    gram = kernel_matrix(kernel, x)
    q = np.outer(y, y) * gram
    ones = np.ones(n)

    def project(v: np.ndarray) -> np.ndarray:
        # Euclidean projection onto the box intersected with y.a = 0 is
        # clip(v - theta*y); the constraint value g(theta) is piecewise
        # linear and non-increasing with breakpoints where coordinates hit
        # a bound, so the exact theta comes from one interpolation.
        bp = np.sort(np.concatenate([v * y, (v - C) * y]))
        gvals = np.clip(v[None, :] - bp[:, None] * y[None, :], 0.0, C) @ y
        idx = int(np.argmax(gvals <= 0.0))  # first non-positive entry
        g_hi, g_lo = gvals[idx - 1], gvals[idx]
        if g_hi == g_lo:
            theta = bp[idx]
        else:
            theta = bp[idx - 1] + (bp[idx] - bp[idx - 1]) * g_hi / (g_hi - g_lo)
        return np.clip(v - theta * y, 0.0, C)

    def objective(a: np.ndarray) -> float:
        return float(a.sum() - 0.5 * a @ q @ a)

    lips = max(float(np.linalg.eigvalsh(q).max()), 1e-12)
    step = 1.0 / lips
    current = project(np.zeros(n))
    momentum_pt = current.copy()
    t = 1.0
    f_cur = objective(current)
    window_best = f_cur
    for it in range(1, 3000 * resolution + 1):
        candidate = project(momentum_pt + step * (ones - q @ momentum_pt))
        f_cand = objective(candidate)
        if f_cand < f_cur:  # maximizing: momentum overshot, restart from x
            momentum_pt = current.copy()
            t = 1.0
            candidate = project(momentum_pt + step * (ones - q @ momentum_pt))
            f_cand = objective(candidate)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        momentum_pt = candidate + ((t - 1.0) / t_next) * (candidate - current)
        if f_cand >= f_cur:
            current, f_cur = candidate, f_cand
        t = t_next
        if it % 128 == 0:  # stop once a whole window brings no real progress
            if f_cur - window_best <= 1e-14 * max(1.0, abs(f_cur)):
                break
            window_best = f_cur
    return current, f_cur


@dataclass(frozen=True)
class MulticlassSvmModel:
    """One-vs-one collection: one binary model per unordered class pair."""

    n_classes: int
    class_pairs: tuple[tuple[int, int], ...]
    models: tuple[BinarySvmModel, ...]
    class_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        c = self.n_classes
        expected = [(a, b) for a in range(c) for b in range(a + 1, c)]
        if list(self.class_pairs) != expected:
            raise ConfigError(
                f"one-vs-one model must hold exactly the {len(expected)} ordered pairs {expected}"
            )
        if len(self.models) != len(expected):
            raise ConfigError("one binary model required per class pair")


def multiclass_train(
    features: np.ndarray,
    labels: np.ndarray,
    kernel: KernelSpec,
    config: SmoConfig,
    n_classes: int | None = None,
    class_names: tuple[str, ...] | None = None,
) -> MulticlassSvmModel:
    """Train C(C-1)/2 binary models, each on its pair's samples only.

    Within a pair (a, b) with a < b, class a is the +1 side.  Each pair gets
    an independent PRNG stream derived from (config.seed, a, b).
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    present = np.unique(y)
    if present.size < 2:
        raise ValueError("need at least 2 classes to train a multiclass model")
    c = int(present.max()) + 1 if n_classes is None else int(n_classes)
    pairs = []
    models = []
    for a in range(c):
        for b in range(a + 1, c):
            mask = (y == a) | (y == b)
            sub_y = np.where(y[mask] == a, 1.0, -1.0)
            pair_seed = np.random.SeedSequence([config.seed, a, b]).generate_state(1)[0]
            pair_config = SmoConfig(
                C=config.C,
                tolerance=config.tolerance,
                max_passes=config.max_passes,
                max_sweeps=config.max_sweeps,
                seed=int(pair_seed),
                cache_mb=config.cache_mb,
                track_objective=config.track_objective,
            )
            models.append(smo_train(x[mask], sub_y, kernel, pair_config))
            pairs.append((a, b))
    return MulticlassSvmModel(
        n_classes=c, class_pairs=tuple(pairs), models=tuple(models), class_names=class_names
    )


def multiclass_decision_values(model: MulticlassSvmModel, x: np.ndarray) -> np.ndarray:
    """Pairwise decision values, one column per class pair (positive favors
    the pair's smaller class id)."""
    rows = np.atleast_2d(np.asarray(x, dtype=np.float64))
    return np.column_stack([decision_function(m, rows) for m in model.models])


def multiclass_predict_batch(
    model: MulticlassSvmModel, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vote-based prediction for a batch.

    Returns (labels, votes, margins): votes counts pairwise wins per class;
    margins sums |decision value| over the pairs each class won.  Vote ties
    go to the larger margin sum, residual ties to the smaller class id.
    A decision value of exactly 0 counts for the pair's smaller class id.
    """
    rows = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = rows.shape[0]
    votes = np.zeros((n, model.n_classes), dtype=np.int64)
    margins = np.zeros((n, model.n_classes))
    decisions = multiclass_decision_values(model, rows)
    for col, (a, b) in enumerate(model.class_pairs):
        fvals = decisions[:, col]
        wins_a = fvals >= 0.0
        votes[wins_a, a] += 1
        votes[~wins_a, b] += 1
        margins[wins_a, a] += np.abs(fvals[wins_a])
        margins[~wins_a, b] += np.abs(fvals[~wins_a])
    top = votes.max(axis=1, keepdims=True)
    tiebreak = np.where(votes == top, margins, -np.inf)
    labels = tiebreak.argmax(axis=1)  # argmax takes the smallest index on ties
    return labels, votes, margins


def multiclass_predict(model: MulticlassSvmModel, x: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    """Single-sample form of ``multiclass_predict_batch``."""
    labels, votes, margins = multiclass_predict_batch(model, np.asarray(x)[None, :])
    return int(labels[0]), votes[0], margins[0]


_HEADER_MAGIC = "MSVM1"


def save_multiclass(model: MulticlassSvmModel, path: Path | str) -> None:
    """Text header (shapes, kernels, biases, class table) + f32 payload."""
    lines = [_HEADER_MAGIC, f"classes {model.n_classes}", f"pairs {len(model.models)}"]
    if model.class_names is not None:
        for i, name in enumerate(model.class_names):
            lines.append(f"name {i} {name}")
    for (a, b), m in zip(model.class_pairs, model.models):
        k = m.kernel
        lines.append(
            f"pair {a} {b} kind {k.kind} gamma {k.gamma!r} degree {k.degree} "
            f"coef0 {k.coef0!r} C {m.C!r} m {m.support_vectors.shape[0]} "
            f"d {m.support_vectors.shape[1]} bias {m.bias!r}"
        )
    header = "\n".join(lines) + "\nDATA\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        for m in model.models:
            fh.write(m.support_vectors.astype("<f4").tobytes())
            fh.write(m.dual_coef.astype("<f4").tobytes())


def load_multiclass(path: Path | str) -> MulticlassSvmModel:
    data = Path(path).read_bytes()
    sep = data.index(b"DATA\n")
    lines = data[:sep].decode("utf-8").splitlines()
    if not lines or lines[0] != _HEADER_MAGIC:
        raise ValueError(f"{path}: not a multiclass SVM model file")
    n_classes = 0
    names: dict[int, str] = {}
    pair_specs = []
    for line in lines[1:]:
        parts = line.split(" ")
        if parts[0] == "classes":
            n_classes = int(parts[1])
        elif parts[0] == "name":
            names[int(parts[1])] = " ".join(parts[2:])
        elif parts[0] == "pair":
            kv = dict(zip(parts[3::2], parts[4::2]))
            pair_specs.append(((int(parts[1]), int(parts[2])), kv))
    payload = data[sep + len(b"DATA\n") :]
    offset = 0
    pairs = []
    models = []
    for (a, b), kv in pair_specs:
        m, d = int(kv["m"]), int(kv["d"])
        sv = np.frombuffer(payload, dtype="<f4", count=m * d, offset=offset).reshape(m, d)
        offset += 4 * m * d
        dc = np.frombuffer(payload, dtype="<f4", count=m, offset=offset)
        offset += 4 * m
        kernel = KernelSpec(
            kind=kv["kind"],
            gamma=float(kv["gamma"]),
            degree=int(kv["degree"]),
            coef0=float(kv["coef0"]),
        )
        models.append(
            BinarySvmModel(
                support_vectors=sv,
                dual_coef=dc,
                bias=float(kv["bias"]),
                kernel=kernel,
                C=float(kv["C"]),
            )
        )
        pairs.append((a, b))
    class_names = tuple(names[i] for i in range(n_classes)) if len(names) == n_classes else None
    return MulticlassSvmModel(
        n_classes=n_classes, class_pairs=tuple(pairs), models=tuple(models), class_names=class_names
    )
