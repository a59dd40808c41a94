"""Monte Carlo laboratory for elliptical two-class problems.

Covariance model builders, scale-mixture samplers for four elliptical
laws, oracle error computation for the true-parameter Fisher rule, the
conditional error of a fitted rule, and a replicated experiment runner
with per-replication seed streams.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._validation import as_square_matrix, as_vector
from .classifier import FLAVORS, DiscriminantModel, fit_cv, predict
from .errors import DegenerateClassesError, SingularBasisError, SolverFailureError

COV_KINDS = ("compound_symmetry_0.5", "ar1_0.8", "explicit")
LAW_KINDS = ("normal", "t2_standardized", "mixture_normal", "cauchy")

# Monte Carlo draws are generated in blocks so oracle estimates at large
# draw counts do not hold the whole sample in memory at once.
_MC_BLOCK = 50_000


@dataclass
class CovModel:
    """A named covariance model with its materialized matrix."""

    kind: str
    p: int
    matrix: NDArray[np.float64]

    def __post_init__(self) -> None:
        if self.kind not in COV_KINDS:
            raise ValueError(f"unknown covariance kind {self.kind!r}, expected one of {COV_KINDS}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        self.matrix = as_square_matrix(self.matrix, "matrix")
        if self.matrix.shape[0] != self.p:
            raise ValueError(f"matrix is {self.matrix.shape[0]}x{self.matrix.shape[1]}, expected p={self.p}")


def build_sigma(kind: str, p: int, matrix: ArrayLike | None = None) -> CovModel:
    """Materialize a covariance model.

    ``compound_symmetry_0.5``: unit diagonal, every off-diagonal 0.5.
    ``ar1_0.8``: entry (i, j) = 0.8^|i-j|.
    ``explicit``: caller supplies the matrix (must be symmetric positive
    definite); the named kinds forbid a matrix argument.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if kind == "compound_symmetry_0.5":
        if matrix is not None:
            raise ValueError("matrix argument is only valid with kind='explicit'")
        sigma = np.full((p, p), 0.5)
        np.fill_diagonal(sigma, 1.0)
    elif kind == "ar1_0.8":
        if matrix is not None:
            raise ValueError("matrix argument is only valid with kind='explicit'")
        idx = np.arange(p)
        sigma = 0.8 ** np.abs(np.subtract.outer(idx, idx)).astype(np.float64)
    elif kind == "explicit":
        if matrix is None:
            raise ValueError("kind='explicit' requires a matrix")
        sigma = as_square_matrix(matrix, "matrix")
        if sigma.shape[0] != p:
            raise ValueError(f"matrix is {sigma.shape[0]}x{sigma.shape[1]}, expected p={p}")
        if float(np.abs(sigma - sigma.T).max()) > 1e-8:
            raise ValueError("explicit covariance must be symmetric")
        sigma = (sigma + sigma.T) / 2.0
        _cholesky(sigma)  # positive-definiteness gate
    else:
        raise ValueError(f"unknown covariance kind {kind!r}, expected one of {COV_KINDS}")
    return CovModel(kind=kind, p=p, matrix=sigma)


@dataclass(frozen=True)
class EllipticalLaw:
    """A sampling law; kappa is the small-scale weight of the mixture."""

    kind: str
    kappa: float = 0.8

    def __post_init__(self) -> None:
        if self.kind not in LAW_KINDS:
            raise ValueError(f"unknown law {self.kind!r}, expected one of {LAW_KINDS}")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must be in (0, 1), got {self.kappa}")


def _coerce_law(law: EllipticalLaw | str) -> EllipticalLaw:
    if isinstance(law, EllipticalLaw):
        return law
    return EllipticalLaw(kind=str(law))


def _coerce_cov(cov: CovModel | ArrayLike) -> NDArray[np.float64]:
    if isinstance(cov, CovModel):
        return cov.matrix
    return as_square_matrix(cov, "cov")


def _cholesky(sigma: NDArray[np.float64]) -> NDArray[np.float64]:
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite") from exc


def sample_elliptical(law: EllipticalLaw | str, n: int, mu: ArrayLike,
                      cov: CovModel | ArrayLike,
                      seed: int | np.random.SeedSequence | np.random.Generator = 0,
                      ) -> NDArray[np.float64]:
    """Draw n rows from an elliptical law centered at mu.

    All laws start from z ~ N(0, cov) via the Cholesky factor, then mix
    the radial scale:

    * normal: x = mu + z.
    * t2_standardized: x = mu + (z / sqrt(chi2_2 / 2)) / sqrt(2), so the
      scatter parameter of the output equals cov.
    * mixture_normal: scale 1 with probability kappa, 3 otherwise, divided
      by sqrt(kappa + 9 (1 - kappa)) so the output covariance equals cov.
    * cauchy: x = mu + z / |w| with scalar w ~ N(0, 1); no moments exist,
      cov acts as the scatter parameter only.

    Deterministic per seed. The normal block is drawn before the mixing
    variables, so the underlying Gaussian core is shared across laws at a
    fixed seed.
    """
    law = _coerce_law(law)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    center = as_vector(mu, "mu")
    sigma = _coerce_cov(cov)
    if sigma.shape[0] != center.size:
        raise ValueError(f"mu has length {center.size} but cov is {sigma.shape[0]}x{sigma.shape[1]}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lower = _cholesky(sigma)

    core = rng.standard_normal((n, center.size)) @ lower.T
    if law.kind == "normal":
        return center + core
    if law.kind == "t2_standardized":
        chi = np.maximum(rng.chisquare(2, n), 1e-300)
        t_rows = core / np.sqrt(chi / 2.0)[:, None]
        return center + t_rows / math.sqrt(2.0)
    if law.kind == "mixture_normal":
        wide = rng.random(n) >= law.kappa
        scale = np.where(wide, 3.0, 1.0)
        divisor = math.sqrt(law.kappa + 9.0 * (1.0 - law.kappa))
        return center + core * scale[:, None] / divisor
    # cauchy
    w = rng.standard_normal(n)
    denom = np.maximum(np.abs(w), 1e-12)
    return center + core / denom[:, None]


def _phi(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _mc_block_sizes(total: int) -> list[int]:
    blocks = []
    remaining = total
    while remaining > 0:
        take = min(_MC_BLOCK, remaining)
        blocks.append(take)
        remaining -= take
    return blocks


def fisher_oracle_error(mu1: ArrayLike, mu2: ArrayLike, cov: CovModel | ArrayLike,
                        law: EllipticalLaw | str = "normal",
                        mc_draws: int = 200_000,
                        seed: int | np.random.SeedSequence = 0) -> float:
    """Misclassification rate of the true-parameter Fisher rule.

    For the normal law this is the closed form Phi(-sqrt(Delta)/2) with
    Delta = delta' Sigma^-1 delta. For the other laws it is a Monte Carlo
    estimate: fresh draws from each class are classified by the rule
    sign((x - (mu1+mu2)/2)' Sigma^-1 delta), ties to class 1, and the two
    class error rates are averaged with equal weight.
    """
    law = _coerce_law(law)
    c1 = as_vector(mu1, "mu1")
    c2 = as_vector(mu2, "mu2")
    if c1.size != c2.size:
        raise ValueError(f"mu1 and mu2 disagree on length: {c1.size} vs {c2.size}")
    sigma = _coerce_cov(cov)
    if sigma.shape[0] != c1.size:
        raise ValueError(f"centers have length {c1.size} but cov is {sigma.shape[0]}x{sigma.shape[1]}")
    delta = c1 - c2
    if float(np.abs(delta).max()) == 0.0:
        return 0.5
    try:
        weights = np.linalg.solve(sigma, delta)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is singular") from exc

    if law.kind == "normal":
        delta_p = float(delta @ weights)
        return _phi(-math.sqrt(delta_p) / 2.0)

    if mc_draws < 1:
        raise ValueError(f"mc_draws must be >= 1, got {mc_draws}")
    mid = (c1 + c2) / 2.0
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    stream1, stream2 = root.spawn(2)
    rng1 = np.random.default_rng(stream1)
    rng2 = np.random.default_rng(stream2)
    wrong1 = 0
    wrong2 = 0
    for take in _mc_block_sizes(mc_draws):
        block1 = sample_elliptical(law, take, c1, sigma, rng1)
        block2 = sample_elliptical(law, take, c2, sigma, rng2)
        wrong1 += int(np.count_nonzero((block1 - mid) @ weights < 0.0))
        wrong2 += int(np.count_nonzero((block2 - mid) @ weights >= 0.0))
    return (wrong1 / mc_draws + wrong2 / mc_draws) / 2.0


def conditional_error_Rn(model: DiscriminantModel, mu1: ArrayLike, mu2: ArrayLike,
                         cov: CovModel | ArrayLike, law: EllipticalLaw | str,
                         mc_draws: int = 10_000,
                         seed: int | np.random.SeedSequence = 0) -> float:
    """Monte Carlo conditional error of a fitted rule under the true law.

    Equal-weight average of the class-1 and class-2 misclassification
    rates on ``mc_draws`` fresh draws per class.
    """
    law = _coerce_law(law)
    c1 = as_vector(mu1, "mu1")
    c2 = as_vector(mu2, "mu2")
    sigma = _coerce_cov(cov)
    if mc_draws < 1:
        raise ValueError(f"mc_draws must be >= 1, got {mc_draws}")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    stream1, stream2 = root.spawn(2)
    rng1 = np.random.default_rng(stream1)
    rng2 = np.random.default_rng(stream2)
    wrong1 = 0
    wrong2 = 0
    for take in _mc_block_sizes(mc_draws):
        block1 = sample_elliptical(law, take, c1, sigma, rng1)
        block2 = sample_elliptical(law, take, c2, sigma, rng2)
        wrong1 += int(np.count_nonzero(predict(model, block1) != 1))
        wrong2 += int(np.count_nonzero(predict(model, block2) != 2))
    return (wrong1 / mc_draws + wrong2 / mc_draws) / 2.0


@dataclass
class ExperimentSpec:
    """Full description of one replicated two-class study.

    Class means follow the sparse-shift design: mu1 = 0 and mu2 has its
    first s0 coordinates equal to 1.
    """

    law: EllipticalLaw
    cov: CovModel
    p: int
    n1: int
    n2: int
    n_test_per_class: int
    s0: int
    reps: int
    base_seed: int
    methods: tuple[str, ...]
    cv_folds: int = 10
    n_lambdas: int = 20

    def __post_init__(self) -> None:
        if not isinstance(self.law, EllipticalLaw):
            self.law = _coerce_law(self.law)
        if not isinstance(self.cov, CovModel):
            raise ValueError("cov must be a CovModel (use build_sigma)")
        for name in ("p", "n1", "n2", "n_test_per_class", "s0", "reps"):
            value = getattr(self, name)
            if int(value) != value or int(value) < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            setattr(self, name, int(value))
        if self.s0 > self.p:
            raise ValueError(f"s0={self.s0} exceeds p={self.p}")
        if self.cov.p != self.p:
            raise ValueError(f"cov is {self.cov.p}-dimensional but p={self.p}")
        if int(self.base_seed) != self.base_seed or self.base_seed < 0:
            raise ValueError(f"base_seed must be a non-negative integer, got {self.base_seed!r}")
        self.base_seed = int(self.base_seed)
        methods = tuple(str(m).replace("-", "_") for m in self.methods)
        if len(methods) == 0:
            raise ValueError("methods must be non-empty")
        bad = [m for m in methods if m not in FLAVORS]
        if bad:
            raise ValueError(f"unknown methods {bad}, expected among {FLAVORS}")
        if len(set(methods)) != len(methods):
            raise ValueError("methods contains duplicates")
        self.methods = methods
        if self.cv_folds < 2:
            raise ValueError(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.n_lambdas < 2:
            raise ValueError(f"n_lambdas must be >= 2, got {self.n_lambdas}")
        if self.n1 < self.cv_folds or self.n2 < self.cv_folds:
            raise ValueError(
                f"each class needs >= cv_folds={self.cv_folds} training rows, "
                f"got n1={self.n1}, n2={self.n2}"
            )

    @property
    def mu1(self) -> NDArray[np.float64]:
        return np.zeros(self.p)

    @property
    def mu2(self) -> NDArray[np.float64]:
        out = np.zeros(self.p)
        out[: self.s0] = 1.0
        return out


@dataclass
class ReplicationResult:
    """Per-replication outcomes, keyed by method."""

    rep: int
    seed: int
    errors: dict[str, float]
    lambdas: dict[str, float]
    failures: dict[str, str]


@dataclass
class MethodSummary:
    """Aggregate over the successful replications of one method."""

    method: str
    mean_error_pct: float | None
    sd_pct: float | None
    reps_used: int
    failures: int


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    summaries: list[MethodSummary]
    replications: list[ReplicationResult]


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run the replicated study described by ``spec``.

    Replication r uses seed base_seed + r, split into five independent
    streams: class-1 train, class-2 train, class-1 test, class-2 test,
    and the cross-validation fold shuffle. Methods share the draws and the
    fold assignment within a replication, so comparisons are matched.

    Solver failures are caught per (replication, method), recorded with
    their message, and excluded from the aggregates; the failure count is
    part of the summary.
    """
    sigma = spec.cov.matrix
    mu1 = spec.mu1
    mu2 = spec.mu2
    replications: list[ReplicationResult] = []

    for rep in range(spec.reps):
        rep_seed = spec.base_seed + rep
        train1_s, train2_s, test1_s, test2_s, cv_s = np.random.SeedSequence(rep_seed).spawn(5)
        x1 = sample_elliptical(spec.law, spec.n1, mu1, sigma, train1_s)
        x2 = sample_elliptical(spec.law, spec.n2, mu2, sigma, train2_s)
        t1 = sample_elliptical(spec.law, spec.n_test_per_class, mu1, sigma, test1_s)
        t2 = sample_elliptical(spec.law, spec.n_test_per_class, mu2, sigma, test2_s)
        test = np.vstack([t1, t2])
        truth = np.concatenate([
            np.ones(spec.n_test_per_class, dtype=np.int64),
            np.full(spec.n_test_per_class, 2, dtype=np.int64),
        ])

        errors: dict[str, float] = {}
        lambdas: dict[str, float] = {}
        failures: dict[str, str] = {}
        for method in spec.methods:
            try:
                model, _ = fit_cv(
                    x1, x2, flavor=method, k=spec.cv_folds,
                    n_lambdas=spec.n_lambdas, seed=cv_s,
                )
                predicted = predict(model, test)
                errors[method] = float(np.mean(predicted != truth))
                lambdas[method] = model.lam
            except (SolverFailureError, SingularBasisError, DegenerateClassesError) as exc:
                failures[method] = f"{type(exc).__name__}: {exc}"
        replications.append(ReplicationResult(
            rep=rep, seed=rep_seed, errors=errors, lambdas=lambdas, failures=failures,
        ))

    summaries = []
    for method in spec.methods:
        values = [r.errors[method] for r in replications if method in r.errors]
        n_fail = sum(1 for r in replications if method in r.failures)
        if values:
            mean_pct = float(np.mean(values) * 100.0)
            sd_pct = float(np.std(values, ddof=1) * 100.0) if len(values) >= 2 else None
        else:
            mean_pct = None
            sd_pct = None
        summaries.append(MethodSummary(
            method=method, mean_error_pct=mean_pct, sd_pct=sd_pct,
            reps_used=len(values), failures=n_fail,
        ))
    return ExperimentResult(spec=spec, summaries=summaries, replications=replications)


def sparsity_sweep(spec: ExperimentSpec,
                   s0_values: list[int]) -> list[tuple[int, ExperimentResult]]:
    """Re-run the study at each sparsity level, in the order given."""
    if len(s0_values) == 0:
        raise ValueError("s0_values must be non-empty")
    cleaned = []
    for value in s0_values:
        if int(value) != value or int(value) < 1:
            raise ValueError(f"s0 values must be positive integers, got {value!r}")
        if int(value) > spec.p:
            raise ValueError(f"s0={value} exceeds p={spec.p}")
        cleaned.append(int(value))
    return [
        (s0, run_experiment(dataclasses.replace(spec, s0=s0)))
        for s0 in cleaned
    ]


_SPEC_REQUIRED = ("law", "cov", "p", "n1", "n2", "n_test_per_class",
                  "s0", "reps", "base_seed", "methods")
_SPEC_OPTIONAL = ("kappa", "cov_matrix", "cv_folds", "n_lambdas")


def spec_from_mapping(doc: dict, source: str = "<spec>") -> ExperimentSpec:
    """Build an ExperimentSpec from a parsed JSON/TOML mapping.

    Field names mirror the dataclass; ``law`` and ``cov`` are kind tokens,
    with optional ``kappa`` (mixture weight) and ``cov_matrix`` (required
    exactly when cov = "explicit").
    """
    if not isinstance(doc, dict):
        raise ValueError(f"{source}: expected a mapping at top level")
    missing = [k for k in _SPEC_REQUIRED if k not in doc]
    if missing:
        raise ValueError(f"{source}: missing fields: {', '.join(missing)}")
    unknown = [k for k in doc if k not in _SPEC_REQUIRED + _SPEC_OPTIONAL]
    if unknown:
        raise ValueError(f"{source}: unknown fields: {', '.join(sorted(unknown))}")

    def integer(name: str) -> int:
        value = doc[name]
        if isinstance(value, bool) or int(value) != value:
            raise ValueError(f"{source}: field {name!r} must be an integer, got {value!r}")
        return int(value)

    law_kind = str(doc["law"]).replace("-", "_")
    kappa = float(doc.get("kappa", 0.8))
    try:
        law = EllipticalLaw(kind=law_kind, kappa=kappa)
    except ValueError as exc:
        raise ValueError(f"{source}: field 'law': {exc}") from None

    p = integer("p")
    cov_kind = str(doc["cov"])
    matrix = doc.get("cov_matrix")
    if cov_kind != "explicit" and matrix is not None:
        raise ValueError(f"{source}: field 'cov_matrix' is only valid with cov='explicit'")
    try:
        cov = build_sigma(cov_kind, p, matrix=matrix)
    except ValueError as exc:
        raise ValueError(f"{source}: field 'cov': {exc}") from None

    methods = doc["methods"]
    if isinstance(methods, str) or not isinstance(methods, (list, tuple)):
        raise ValueError(f"{source}: field 'methods' must be a list of method names")

    try:
        return ExperimentSpec(
            law=law,
            cov=cov,
            p=p,
            n1=integer("n1"),
            n2=integer("n2"),
            n_test_per_class=integer("n_test_per_class"),
            s0=integer("s0"),
            reps=integer("reps"),
            base_seed=integer("base_seed"),
            methods=tuple(str(m) for m in methods),
            cv_folds=integer("cv_folds") if "cv_folds" in doc else 10,
            n_lambdas=integer("n_lambdas") if "n_lambdas" in doc else 20,
        )
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None


def load_spec(path: str | Path) -> ExperimentSpec:
    """Read an ExperimentSpec from a .json or .toml document."""
    p = Path(path)
    suffix = p.suffix.lower()
    text = p.read_text(encoding="utf-8")
    if suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(
                f"{p}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
    elif suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"{p}: invalid TOML: {exc}") from None
    else:
        raise ValueError(f"{p}: unsupported spec format {suffix!r} (use .json or .toml)")
    return spec_from_mapping(doc, source=str(p))
