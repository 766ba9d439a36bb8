"""Seminorm deviation profiles for operator sequences.

For a family ``T_n -> T`` and a probe ``f`` (or probe pair ``(f, g)``):

* weak:        ``|<g, (T_n - T) f>|``
* strong:      ``||(T_n - T) f||``
* star_strong: ``||(T_n - T) f|| + ||(T_n* - T*) f||``
* norm:        strong deviation at the normalized probe (a norm proxy)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .basis import SparseVector, inner
from .certify import DEFAULT_TOL, CovarianceInterval, covariance_bounds
from .families import FamilyHandle
from .spaces import Space

MODES = ("weak", "strong", "star_strong", "norm")
MODE_ALIASES = {"star": "star_strong", "star-strong": "star_strong", "weak_to_zero": "weak"}
#: reporting threshold for "reached the limit"
THRESHOLD = 1e-6
#: modes under which covariance is lower semicontinuous along the sequence
LSC_MODES = ("strong", "star_strong", "norm")


def normalize_mode(mode: str) -> str:
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


@dataclass(frozen=True)
class Probe:
    id: str
    f: SparseVector
    g: SparseVector | None = None


def default_probes(space: Space, seed: int = 0, n_basis: int = 8, n_random: int = 2, support: int = 4, window: int = 16) -> list[Probe]:
    """First ``n_basis`` basis vectors plus ``n_random`` seeded random unit vectors.

    Random probes have ``support`` nonzero complex Gaussian amplitudes on
    labels drawn from the first ``window`` positions of the space.
    """
    probes = [Probe(f"e{k}", SparseVector.basis(lab)) for k, lab in enumerate(space.labels(n_basis))]
    rng = np.random.default_rng(seed)
    labs = space.labels(window)
    for r in range(n_random):
        pick = sorted(rng.choice(len(labs), size=min(support, len(labs)), replace=False))
        amps = rng.standard_normal(len(pick)) + 1j * rng.standard_normal(len(pick))
        v = SparseVector({labs[i]: complex(a) for i, a in zip(pick, amps)})
        probes.append(Probe(f"r{r}", v / v.norm()))
    return probes


def weak_pairs(probes: Sequence[Probe]) -> list[Probe]:
    return [Probe(f"{p.id}|{q.id}", p.f, q.f) for p in probes for q in probes]


@dataclass
class Row:
    n: int
    probe_id: str
    deviation: float
    bound: float | None = None


@dataclass
class ConvergenceReport:
    family: str
    params: dict
    mode: str
    n_max: int
    probes: list[Probe]
    rows: list[Row] = field(default_factory=list)
    cov_track: list[tuple] = field(default_factory=list)
    threshold: float = THRESHOLD
    lsc_flag: bool = False
    lsc_applicable: bool = True

    def deviations(self, probe_id: str) -> list[float]:
        return [r.deviation for r in self.rows if r.probe_id == probe_id]

    def first_settled(self) -> dict:
        """Per probe, the smallest ``n0`` with ``dev(n) <= threshold`` for all tested ``n >= n0``."""
        out = {}
        for p in self.probes:
            devs = self.deviations(p.id)
            n0 = None
            for n in range(len(devs), 0, -1):
                if devs[n - 1] <= self.threshold:
                    n0 = n
                else:
                    break
            out[p.id] = n0
        return out

    @property
    def converged(self) -> bool:
        if not self.rows:
            return True
        return all(v is not None for v in self.first_settled().values())

    @property
    def passed(self) -> bool:
        return self.converged and not self.lsc_flag

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "mode": self.mode,
            "n_max": self.n_max,
            "threshold": self.threshold,
            "probes": {p.id: p.f.to_json() if p.g is None else {"f": p.f.to_json(), "g": p.g.to_json()} for p in self.probes},
            "rows": [{"n": r.n, "probe_id": r.probe_id, "deviation": r.deviation, "bound": r.bound} for r in self.rows],
            "first_settled": self.first_settled() if self.rows else {},
            "cov_track": [{"n": n, "lower": lo, "upper": up} for n, lo, up in self.cov_track],
            "lsc_flag": self.lsc_flag,
            "lsc_applicable": self.lsc_applicable,
            "passed": self.passed,
        }


def _deviation(mode: str, tn, t, probe: Probe) -> float:
    f = probe.f
    if mode == "norm":
        f = f / f.norm()
    diff = tn.apply(f) - t.apply(f)
    if mode == "weak":
        return abs(inner(probe.g, diff))
    dev = diff.norm()
    if mode == "star_strong":
        dev += (tn.apply_adjoint(f) - t.apply_adjoint(f)).norm()
    return dev


def iter_deviations(fam: FamilyHandle, mode: str, probes: Sequence[Probe], n_max: int) -> Iterator[Row]:
    """Rows in ``(n, probe)`` order; each row is computed exactly up to rounding."""
    mode = normalize_mode(mode)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not probes:
        raise ValueError("need at least one probe")
    t = fam.limit
    use_bound = fam.bound is not None and mode == _bound_mode(fam.claimed_mode)
    for n in range(1, n_max + 1):
        tn = fam.member(n)
        if tn.domain != t.domain:
            raise ValueError("family members and limit act on different spaces")
        for p in probes:
            b = fam.bound(n, p.f) if use_bound else None
            yield Row(n, p.id, _deviation(mode, tn, t, p), b)


def _bound_mode(claimed: str) -> str:
    return {"weak_to_zero": "weak"}.get(claimed, claimed)


def deviation_profile(
    fam: FamilyHandle,
    mode: str,
    probes: Sequence[Probe] | None = None,
    n_max: int = 64,
    seed: int = 0,
    threshold: float = THRESHOLD,
) -> ConvergenceReport:
    mode = normalize_mode(mode)
    if probes is None:
        probes = default_probes(fam.space, seed)
        if mode == "weak":
            probes = weak_pairs(probes)
    elif mode == "weak" and any(p.g is None for p in probes):
        raise ValueError("weak mode needs probe pairs")
    report = ConvergenceReport(fam.name, dict(fam.params), mode, n_max, list(probes), threshold=threshold)
    report.rows = list(iter_deviations(fam, mode, probes, n_max))
    return report


def covariance_track(fam: FamilyHandle, n_max: int = 64, depth: int = 64, tol: float = DEFAULT_TOL) -> ConvergenceReport:
    """Covariance intervals of ``member(1..n_max)`` and of the limit.

    Member ``n`` is truncated at ``depth + n`` labels: members of a
    convergent family differ from the limit on a window that drifts with
    ``n``, and a fixed truncation would miss it.

    The lower-semicontinuity flag compares the limit's lower bound with the
    smallest member upper bound over the tail window ``[n_max/2, n_max]``.
    It is only meaningful for strong-type convergence (covariance is not
    weakly lower semicontinuous), so it is never raised for weak families.
    """
    if n_max < 1 or depth < 1:
        raise ValueError("n_max and depth must be >= 1")
    report = ConvergenceReport(fam.name, dict(fam.params), "cov", n_max, [])
    members: list[CovarianceInterval] = []
    for n in range(1, n_max + 1):
        c = covariance_bounds(fam.member(n), depth + n)
        members.append(c)
        report.cov_track.append((n, c.lower, c.upper))
    lim = covariance_bounds(fam.limit, depth)
    report.cov_track.append(("limit", lim.lower, lim.upper))
    tail = members[max(n_max // 2, 1) - 1:]
    report.lsc_applicable = fam.claimed_mode in LSC_MODES
    if report.lsc_applicable:
        report.lsc_flag = lim.lower > min(c.upper for c in tail) + tol
    return report
