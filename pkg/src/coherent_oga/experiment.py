"""Seeded instances, the per-instance audit pipeline, and report writers."""

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import make_rng
from .analysis import (
    check_final_state,
    check_lemma_suite,
    classify,
    diagnostics,
    in_regime,
    lebesgue_report,
    summarize_checks,
)
from .linalg import project_onto_span, solve_spd
from .oga import run_oga
from .oracle import DEFAULT_BUDGET, best_m_term, plant_instance, reference_from_best

INSTANCE_KINDS = ("planted", "random", "decoy", "mixed", "mixed3")
ORACLE_MODES = ("exact", "relaxed")


@dataclass(frozen=True)
class InstanceSpec:
    kind: str = "mixed"
    coeff_low: float = 1.0
    coeff_high: float = 2.0
    noise_norm: float = 0.5

    def __post_init__(self):
        if self.kind not in INSTANCE_KINDS:
            raise ValueError(f"instance kind must be one of {INSTANCE_KINDS}, got {self.kind!r}")

    def kind_for(self, seed):
        if self.kind == "mixed":
            return ("planted", "random")[seed % 2]
        if self.kind == "mixed3":
            return ("planted", "random", "decoy")[seed % 3]
        return self.kind


def random_signal(dim, seed):
    """Unit-norm Gaussian direction in R^dim."""
    v = make_rng(seed, stream=3).standard_normal(dim)
    return v / np.linalg.norm(v)


def _orthogonal_group(gram, anchor, size, m_coherence, rng):
    """``size`` mutually orthogonal atoms, each with ``|<atom, anchor>| >= M / 2``."""
    cand = np.flatnonzero(np.abs(gram[anchor]) >= 0.5 * m_coherence)
    group = []
    for a in rng.permutation(cand):
        if a != anchor and all(abs(gram[a, b]) <= 1e-12 for b in group):
            group.append(int(a))
            if len(group) == size:
                return group
    return None


def decoy_signal(dictionary, m, seed, noise_scale=0.05, max_tries=50):
    """Signal whose optimal m-term support contains an atom OGA never selects in 2m steps.

    Needs a dictionary holding an atom ``r`` that is coherent with ``3m - 2``
    mutually orthogonal atoms (any subset of a union of two orthonormal bases
    qualifies). Correlations with ``f`` are prescribed as ``t`` on ``r`` and on
    ``m - 1`` partners whose pairing with ``r`` gains energy, and slightly
    above ``t`` on ``2m - 1`` decoys whose pairing with ``r`` loses it. OGA
    takes the decoys first, which pushes ``r`` below the partners, while the
    best m-term support is the partners plus ``r``.
    """
    gram = dictionary.full_gram
    M = dictionary.m_coherence
    if not M > 0:
        raise ValueError("decoy instances need a dictionary with positive coherence")
    rng = make_rng(seed, stream=4)
    n_decoys = 2 * m - 1
    for _ in range(max_tries):
        r = int(rng.integers(dictionary.count))
        group = _orthogonal_group(gram, r, n_decoys + m - 1, M, rng)
        if group is not None:
            break
    else:
        raise ValueError(f"no atom with {3 * m - 2} orthogonal coherent neighbours found in {dictionary.label}")
    decoys, partners = group[:n_decoys], group[n_decoys:]
    t = rng.uniform(0.5, 1.5)
    sign_r = rng.choice([-1.0, 1.0])
    offsets = np.sort(rng.uniform(0.1, 0.4, size=n_decoys))[::-1] * M
    support = [r] + partners + decoys
    target = [sign_r * t]
    target += [-sign_r * np.sign(gram[q, r]) * t for q in partners]
    target += [sign_r * np.sign(gram[p, r]) * t * (1 + off) for p, off in zip(decoys, offsets)]
    atoms = dictionary.atoms[support]
    coeffs = solve_spd(dictionary.gram(support), np.array(target))
    _, perp, _ = project_onto_span(atoms, rng.standard_normal(dictionary.dim))
    return coeffs @ atoms + perp * (noise_scale * t / np.linalg.norm(perp))


def make_instance(dictionary, m, seed, spec):
    """Return ``(kind, f, planted_ref_or_None)`` for ``seed``."""
    kind = spec.kind_for(seed)
    if kind == "planted":
        f, ref = plant_instance(dictionary, m, spec.coeff_low, spec.coeff_high, spec.noise_norm, seed)
        return kind, f, ref
    if kind == "decoy":
        return kind, decoy_signal(dictionary, m, seed), None
    return kind, random_signal(dictionary.dim, seed), None


@dataclass(frozen=True, eq=False)
class InstanceReport:
    seed: int
    kind: str
    dict_label: str
    dim: int
    atom_count: int
    m_coherence: float
    m: int
    steps: int
    stop_reason: str
    lebesgue: object
    checks: list = field(default_factory=list)
    trace: object = None

    @property
    def regime_ok(self):
        return in_regime(self.m, self.m_coherence)

    @property
    def failed(self):
        return self.lebesgue.failed or any(c.failed for c in self.checks)

    def to_dict(self):
        return {
            "instance": {
                "seed": self.seed,
                "kind": self.kind,
                "dict_label": self.dict_label,
                "dim": self.dim,
                "atom_count": self.atom_count,
                "coherence": self.m_coherence,
                "m": self.m,
                "steps": self.steps,
                "stop_reason": self.stop_reason,
                "regime_ok": self.regime_ok,
            },
            "lebesgue": self.lebesgue.to_dict(),
            "checks": [c.to_dict() for c in self.checks],
        }


def audit(dictionary, f, m, oracle="exact", planted_ref=None, budget=DEFAULT_BUDGET, steps=None,
          seed=0, kind="explicit"):
    """Run OGA for ``2m`` steps on ``f`` and check it against a reference decomposition.

    ``oracle="exact"`` computes sigma_m(f) by enumeration and uses the optimal
    support as the reference; ``"relaxed"`` uses ``planted_ref`` and its
    remainder norm in place of sigma_m.
    """
    if oracle not in ORACLE_MODES:
        raise ValueError(f"oracle must be one of {ORACLE_MODES}, got {oracle!r}")
    steps = 2 * m if steps is None else int(steps)
    if steps < m:
        raise ValueError(f"steps={steps} must be at least m={m}")
    M = dictionary.m_coherence
    trace = run_oga(dictionary, f, steps)
    if oracle == "exact":
        ref = reference_from_best(best_m_term(dictionary, f, m, budget=budget))
        mode = "exact"
    else:
        if planted_ref is None:
            raise ValueError("relaxed oracle needs a planted reference decomposition")
        ref = planted_ref
        mode = "relaxed"
    classes = classify(trace, ref)
    diag = diagnostics(trace, ref, dictionary, classes)
    checks = check_lemma_suite(trace, ref, m, M, dictionary, classes, diag)
    checks += check_final_state(trace, ref, m, M, dictionary, classes, diag)
    leb = lebesgue_report(trace, ref.v0_norm, m, M, sigma_mode=mode)
    return InstanceReport(
        seed=int(seed),
        kind=kind,
        dict_label=dictionary.label,
        dim=dictionary.dim,
        atom_count=dictionary.count,
        m_coherence=M,
        m=m,
        steps=steps,
        stop_reason=trace.stop_reason,
        lebesgue=leb,
        checks=checks,
        trace=trace,
    )


def run_seed(dictionary, m, seed, spec, oracle="exact", budget=DEFAULT_BUDGET, steps=None, keep_trace=False):
    kind, f, ref = make_instance(dictionary, m, seed, spec)
    if oracle == "relaxed" and ref is None:
        raise ValueError(f"seed {seed} gives a {kind} instance; relaxed oracle needs planted instances")
    rep = audit(dictionary, f, m, oracle, ref, budget, steps, seed, kind)
    if not keep_trace:
        rep = InstanceReport(**{**rep.__dict__, "trace": None})
    return rep


_WORKER_DICT = None


def _init_worker(dictionary):
    global _WORKER_DICT
    _WORKER_DICT = dictionary


def _worker(args):
    return run_seed(_WORKER_DICT, *args)


def run_sweep(dictionary, m, seeds, spec, oracle="exact", budget=DEFAULT_BUDGET, steps=None, workers=1,
              keep_traces=False):
    """Audit every seed; reports come back sorted by seed regardless of ``workers``."""
    seeds = sorted(set(int(s) for s in seeds))
    jobs = [(m, s, spec, oracle, budget, steps, keep_traces) for s in seeds]
    if workers <= 1 or len(seeds) <= 1:
        reports = [run_seed(dictionary, *job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(dictionary,)) as pool:
            reports = list(pool.map(_worker, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return sorted(reports, key=lambda r: r.seed)


def report_json(reports):
    if isinstance(reports, InstanceReport):
        payload = reports.to_dict()
    else:
        payload = [r.to_dict() for r in reports]
    return json.dumps(payload, indent=1, allow_nan=True) + "\n"


SUMMARY_COLUMNS = [
    "seed", "kind", "m", "regime_ok", "sigma_mode", "sigma", "final_residual", "ratio",
    "lebesgue_passed", "worst_slack", "n_checks", "n_passed", "n_failed", "n_vacuous", "n_reported_violations",
]


def summary_row(rep):
    active = [c for c in rep.checks if c.precondition_met and c.asserted]
    return {
        "seed": rep.seed,
        "kind": rep.kind,
        "m": rep.m,
        "regime_ok": int(rep.regime_ok),
        "sigma_mode": rep.lebesgue.sigma_mode,
        "sigma": repr(rep.lebesgue.sigma),
        "final_residual": repr(rep.lebesgue.final_residual),
        "ratio": repr(rep.lebesgue.ratio),
        "lebesgue_passed": int(rep.lebesgue.passed),
        "worst_slack": repr(max((c.slack_used for c in active), default=0.0)),
        "n_checks": len(active),
        "n_passed": sum(c.passed for c in active),
        "n_failed": sum(not c.passed for c in active),
        "n_vacuous": sum(not c.precondition_met for c in rep.checks),
        "n_reported_violations": sum(c.precondition_met and not c.asserted and not c.passed for c in rep.checks),
    }


def summary_csv(reports):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for rep in reports:
        w.writerow(summary_row(rep))
    return buf.getvalue()


def family_summary(reports):
    """Check counts per family aggregated over many reports."""
    total = {}
    for rep in reports:
        for fam, s in summarize_checks(rep.checks).items():
            t = total.setdefault(fam, dict.fromkeys(s, 0))
            for key, val in s.items():
                t[key] += val
    return dict(sorted(total.items(), key=lambda kv: _family_order(kv[0])))


def _family_order(fam):
    digits = "".join(ch for ch in fam if ch.isdigit())
    return (0, int(digits)) if fam.startswith("lemma") and digits else (1, fam)
