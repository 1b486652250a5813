"""Monotonicity, invariance and classical-reduction checks, plus a seeded
randomized search for monotonicity violations."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from .algebra import AlgebraSignature
from .channels import (
    Channel,
    apply,
    congruent_embedding_classical,
    congruent_embedding_quantum,
    min_kraus_count,
    push_state,
    random_channel,
)
from .errors import NotFaithfulImage
from .funcalc import MonotoneFunction, get_function
from .metrics import GramReport, fisher_rao_gram, gns_pairing, gram, gram_matrix, metric_gns_form, metric_trace_form
from .states import (
    DEFAULT_FLOOR,
    FaithfulState,
    anticommutator_solve,
    from_probability_vector,
    random_faithful_state,
    random_tangent,
    tangent_basis,
)

DEFAULT_TOL = 1e-8
DEFAULT_POOL = ("2", "3", "1,1", "1,1,1", "1,2", "2,2")


def pullback_gram(
    f: MonotoneFunction,
    ch: Channel,
    sigma: FaithfulState,
    floor: float = DEFAULT_FLOOR,
    state_seed=None,
    allow_unvalidated: bool = False,
) -> GramReport:
    """Gram matrix of the target metric at the image of ``sigma``, pulled back
    to the source tangent basis."""
    image = push_state(ch, sigma, floor)
    pushed = [apply(ch, b) for b in tangent_basis(ch.source)]
    g = gram_matrix(f, image, pushed, allow_unvalidated)
    return GramReport(ch.source, f.name, g, f.value_at_one, state_seed)


@dataclass
class MonotonicityReport:
    channel: str
    function: str
    defect: float
    tolerance: float
    state_seed: int | None = None
    trial: int | None = None
    verdict: str = field(init=False)

    def __post_init__(self):
        self.verdict = "violation" if self.defect < -self.tolerance else "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {
            "trial": self.trial,
            "channel": self.channel,
            "f": self.function,
            "state_seed": self.state_seed,
            "defect": self.defect,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }


def _min_eig_sym(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])


def monotonicity_check(
    f: MonotoneFunction,
    ch: Channel,
    sigma: FaithfulState,
    tol: float = DEFAULT_TOL,
    state_seed=None,
    trial=None,
    allow_unvalidated: bool = False,
) -> MonotonicityReport:
    """Smallest eigenvalue of G_source - (pullback of G_target); negative
    beyond ``tol`` means the metric contracts less than the channel allows."""
    source = gram(f, sigma, allow_unvalidated=allow_unvalidated).gram
    pulled = pullback_gram(f, ch, sigma, allow_unvalidated=allow_unvalidated).gram
    return MonotonicityReport(ch.describe(), f.name, _min_eig_sym(source - pulled), tol, state_seed, trial)


@dataclass
class InvarianceReport:
    channel: str
    function: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_json(self) -> dict:
        return {
            "channel": self.channel,
            "f": self.function,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def invariance_check(f: MonotoneFunction, embed: Channel, sigma: FaithfulState, tol: float = DEFAULT_TOL) -> InvarianceReport:
    """Largest entrywise gap between the Gram matrix and its pullback through
    a channel that has a left inverse of the same kind."""
    source = gram(f, sigma).gram
    pulled = pullback_gram(f, embed, sigma).gram
    dev = float(np.max(np.abs(source - pulled))) if source.size else 0.0
    return InvarianceReport(embed.describe(), f.name, dev, tol)


def random_simplex_point(n: int, rng, floor: float = 1e-3) -> np.ndarray:
    p = rng.dirichlet(np.ones(n))
    p = np.maximum(p, floor)
    return p / p.sum()


def cencov_reduction_check(f: MonotoneFunction, n: int, trials: int = 100, seed=0) -> float:
    """Largest entrywise gap between the metric Gram matrix and the Fisher-Rao
    Gram matrix divided by f(1) at random points of the open simplex."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    basis = tangent_basis((1,) * n)
    coords = np.array([[b.blocks[i][0, 0].real for i in range(n)] for b in basis])
    worst = 0.0
    for _ in range(trials):
        p = random_simplex_point(n, rng)
        g = gram(f, from_probability_vector(p)).gram
        fr = fisher_rao_gram(p, coords) / f.value_at_one
        worst = max(worst, float(np.max(np.abs(g - fr))))
    return worst


def two_form_check(functions, sig, trials: int = 100, seed=0) -> dict:
    """Relative gap between trace-form and GNS-form evaluations on random
    tangent pairs; the imaginary part of the GNS pairing is recorded."""
    rng = np.random.default_rng(seed)
    sig = AlgebraSignature.parse(sig)
    worst_rel, worst_imag = 0.0, 0.0
    for i in range(trials):
        f = functions[i % len(functions)]
        rho = random_faithful_state(sig, rng, floor=1e-3 / sig.matrix_size)
        a, b = random_tangent(sig, rng), random_tangent(sig, rng)
        t = metric_trace_form(f, rho, a, b)
        v, w = anticommutator_solve(rho, a), anticommutator_solve(rho, b)
        g = metric_gns_form(f, rho, v, w)
        scale = max(abs(t), metric_trace_form(f, rho, a, a) ** 0.5 * metric_trace_form(f, rho, b, b) ** 0.5)
        worst_rel = max(worst_rel, abs(t - g) / scale)
        worst_imag = max(worst_imag, abs(gns_pairing(f, rho, v, w).imag))
    return {"signature": list(sig.block_dims), "trials": trials, "max_relative_gap": worst_rel, "max_abs_imag": worst_imag}


@dataclass
class SearchConfig:
    signatures: tuple = DEFAULT_POOL
    functions: tuple = ("sld", "rld", "kmb", "wy", "geometric")
    trials: int = 1000
    seed: int = 0
    kraus_min: int = 1
    kraus_max: int = 4
    tolerance: float = DEFAULT_TOL
    workers: int = 1
    state_floor: float = 1e-4
    allow_unvalidated: bool = False

    def __post_init__(self):
        self.signatures = tuple(str(AlgebraSignature.parse(s)) for s in self.signatures)
        self.functions = tuple(self.functions)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 1 <= self.kraus_min <= self.kraus_max:
            raise ValueError("need 1 <= kraus_min <= kraus_max")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for f in self.functions:
            self._function(f)

    @staticmethod
    def _function(f) -> MonotoneFunction:
        return f if isinstance(f, MonotoneFunction) else get_function(f)

    def function_pool(self) -> list[MonotoneFunction]:
        return [self._function(f) for f in self.functions]

    def echo(self) -> dict:
        """Configuration as it affects results; worker count is excluded."""
        return {
            "signatures": list(self.signatures),
            "functions": [self._function(f).name for f in self.functions],
            "trials": self.trials,
            "seed": self.seed,
            "kraus_min": self.kraus_min,
            "kraus_max": self.kraus_max,
            "tolerance": self.tolerance,
            "state_floor": self.state_floor,
        }


def run_trial(cfg: SearchConfig, index: int) -> dict:
    """One search trial; its randomness depends only on (cfg.seed, index)."""
    rng = np.random.default_rng([cfg.seed, index])
    pool = cfg.signatures
    source = AlgebraSignature.parse(pool[rng.integers(len(pool))])
    target = AlgebraSignature.parse(pool[rng.integers(len(pool))])
    funcs = cfg.function_pool()
    f = funcs[rng.integers(len(funcs))]
    # pairs like [3]->[1,1] admit no trace-preserving map with one Kraus each
    kraus_count = max(int(rng.integers(cfg.kraus_min, cfg.kraus_max + 1)), min_kraus_count(source, target))
    channel_seed = int(rng.integers(2**31))
    state_seed = int(rng.integers(2**31))
    floor = min(cfg.state_floor, 0.5 / source.matrix_size)
    row = {
        "trial": index,
        "signature": f"[{source}]->[{target}]",
        "f": f.name,
        "kraus_count": kraus_count,
        "channel_seed": channel_seed,
        "state_seed": state_seed,
    }
    ch = random_channel(source, target, kraus_count, channel_seed)
    sigma = random_faithful_state(source, state_seed, floor=floor)
    try:
        report = monotonicity_check(
            f, ch, sigma, cfg.tolerance, state_seed=state_seed, trial=index, allow_unvalidated=cfg.allow_unvalidated
        )
    except NotFaithfulImage:
        row.update(defect=None, verdict="skipped", channel=ch.describe())
        return row
    row.update(defect=report.defect, verdict=report.verdict, channel=report.channel)
    return row


def _run_chunk(args) -> list[dict]:
    cfg, indices = args
    return [run_trial(cfg, i) for i in indices]


@dataclass
class SearchResult:
    config: SearchConfig
    rows: list[dict]
    wall_time: float

    @property
    def violations(self) -> list[dict]:
        bad = [r for r in self.rows if r["verdict"] == "violation"]
        return sorted(bad, key=lambda r: (r["defect"], r["trial"]))

    @property
    def skipped(self) -> int:
        return sum(r["verdict"] == "skipped" for r in self.rows)

    @property
    def min_defect(self) -> float | None:
        d = [r["defect"] for r in self.rows if r["defect"] is not None]
        return min(d) if d else None

    def summary(self, include_wall_time: bool = True) -> dict:
        doc = {
            "config": self.config.echo(),
            "trials": len(self.rows),
            "skipped": self.skipped,
            "skip_rate": self.skipped / len(self.rows),
            "violations": [
                {
                    "trial": r["trial"],
                    "channel": r["channel"],
                    "signature": r["signature"],
                    "f": r["f"],
                    "state_seed": r["state_seed"],
                    "channel_seed": r["channel_seed"],
                    "defect": r["defect"],
                    "tolerance": self.config.tolerance,
                    "verdict": r["verdict"],
                }
                for r in self.violations
            ],
            "min_defect_overall": self.min_defect,
        }
        if include_wall_time:
            doc["wall_time"] = self.wall_time
        return doc

    def summary_json(self, include_wall_time: bool = True) -> str:
        return json.dumps(self.summary(include_wall_time), indent=2, sort_keys=True)

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["trial", "signature", "f", "defect", "verdict"])
        for r in self.rows:
            writer.writerow([r["trial"], r["signature"], r["f"], "" if r["defect"] is None else repr(r["defect"]), r["verdict"]])
        return buf.getvalue()


def counterexample_search(cfg: SearchConfig) -> SearchResult:
    """Run ``cfg.trials`` indexed trials, optionally across worker processes;
    results are merged by trial index so the worker count cannot change them."""
    start = time.perf_counter()
    indices = list(range(cfg.trials))
    if cfg.workers == 1:
        rows = [run_trial(cfg, i) for i in indices]
    else:
        chunks = [indices[w::cfg.workers] for w in range(cfg.workers)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = [r for part in pool.map(_run_chunk, [(cfg, c) for c in chunks if c]) for r in part]
        rows.sort(key=lambda r: r["trial"])
    return SearchResult(cfg, rows, time.perf_counter() - start)


def monotonicity_suite(functions, source, target=None, trials: int = 100, seed=0, tol: float = DEFAULT_TOL, kraus_max: int = 4) -> dict:
    """Random channels source -> target checked against every function."""
    source = AlgebraSignature.parse(source)
    target = source if target is None else AlgebraSignature.parse(target)
    reports, skipped = [], 0
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        kc = max(int(rng.integers(1, kraus_max + 1)), min_kraus_count(source, target))
        ch = random_channel(source, target, kc, rng)
        state_seed = int(rng.integers(2**31))
        sigma = random_faithful_state(source, state_seed, floor=min(1e-4, 0.5 / source.matrix_size))
        try:
            for f in functions:
                reports.append(monotonicity_check(f, ch, sigma, tol, state_seed=state_seed, trial=i))
        except NotFaithfulImage:
            skipped += 1
    return {
        "suite": "monotonicity",
        "source": list(source.block_dims),
        "target": list(target.block_dims),
        "functions": [f.name for f in functions],
        "trials": trials,
        "skipped": skipped,
        "min_defect": min((r.defect for r in reports), default=None),
        "violations": [r.to_json() for r in reports if not r.passed],
    }


def haar_unitary(dim: int, rng) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.eye(1, dtype=complex)


def random_partition(n: int, m: int, rng) -> list[list[int]]:
    """Random partition of range(m) into n non-empty cells."""
    labels = np.concatenate([np.arange(n), rng.integers(0, n, m - n)])
    rng.shuffle(labels)
    return [sorted(np.flatnonzero(labels == i).tolist()) for i in range(n)]


def random_classical_embedding(rng, max_n: int = 4, max_m: int = 8):
    n = int(rng.integers(2, max_n + 1))
    m = int(rng.integers(n, max_m + 1))
    cells = random_partition(n, m, rng)
    q = np.zeros(m)
    for cell in cells:
        w = rng.dirichlet(np.ones(len(cell))) + 0.05
        q[cell] = w / w.sum()
    for cell in cells:
        q[cell[-1]] = 1.0 - q[cell[:-1]].sum()
    embed, left = congruent_embedding_classical(cells, q)
    return embed, left, n


def random_quantum_embedding(rng, source_dims=(2, 3), ancilla_dims=(2, 3)):
    n = int(rng.choice(source_dims))
    d = int(rng.choice(ancilla_dims))
    tau = random_faithful_state((d,), rng, floor=min(1e-2, 0.5 / d))
    embed, left = congruent_embedding_quantum(haar_unitary(n * d, rng), tau)
    return embed, left, n


def invariance_suite(functions, kind: str = "both", trials: int = 100, seed=0, tol: float = DEFAULT_TOL) -> dict:
    """Gram equality under random congruent embeddings (classical and/or quantum)."""
    kinds = ("classical", "quantum") if kind == "both" else (kind,)
    worst, failures, count = 0.0, [], 0
    for kd in kinds:
        for i in range(trials):
            rng = np.random.default_rng([seed, i, 0 if kd == "classical" else 1])
            if kd == "classical":
                embed, _, n = random_classical_embedding(rng)
                sigma = from_probability_vector(random_simplex_point(n, rng))
            else:
                embed, _, n = random_quantum_embedding(rng)
                sigma = random_faithful_state((n,), rng, floor=1e-3)
            for f in functions:
                rep = invariance_check(f, embed, sigma, tol)
                count += 1
                worst = max(worst, rep.max_deviation)
                if not rep.passed:
                    failures.append({"kind": kd, "trial": i, **rep.to_json()})
    return {"suite": "invariance", "kinds": list(kinds), "checks": count, "max_deviation": worst, "tolerance": tol, "violations": failures}
