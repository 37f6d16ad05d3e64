"""Checks of the shift-two inequality mu_{k+2} <= lambda_k and its ingredients.

All verdicts computed here are numerical evidence: conforming P1 elements
bound both the Neumann and the Dirichlet eigenvalues from above, so a
discrete comparison is not a rigorous enclosure.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as la

from .eig import DEFAULT_TOL
from .errors import MetadataMismatch, NonConvexCorner, NonMonotone, NotEnoughEigenvalues
from .fem_scalar import Spectrum, mesh_matrices, multiplicity_groups, scalar_spectrum, zero_mode_count
from .fem_vector import (
    div_curl_matrices,
    normal_trace_perp_gradient,
    reentrant_corners,
    tangential_constraints,
    vector_mass,
    vector_spectrum,
)
from .geometry import Polygon, TriMesh, triangulate

EVIDENCE = "numerical evidence"
SLACK_CONSTANT = 1.0
MIN_SLACK = 1e-6


def slack_for(h: float | None, constant: float = SLACK_CONSTANT) -> float:
    """Relative verdict slack max(1e-6, C h^2)."""
    return max(MIN_SLACK, constant * (h or 0.0) ** 2)


# --------------------------------------------------------------------------- merge


@dataclass(frozen=True)
class MergedEntry:
    value: float
    source: str
    source_index: int  # 1-based index in the source spectrum (mu_j or lambda_j)


@dataclass
class MergedSpectrum:
    entries: list[MergedEntry]
    domain: str | None = None
    mesh_h: float | None = None

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    @property
    def sources(self) -> list[str]:
        return [e.source for e in self.entries]

    def count(self, source: str, upto: float | None = None) -> int:
        return sum(1 for e in self.entries
                   if e.source == source and (upto is None or e.value <= upto))

    def __len__(self):
        return len(self.entries)

    def to_json(self) -> dict:
        return {"domain": self.domain, "mesh_h": self.mesh_h,
                "entries": [asdict(e) for e in self.entries]}


def _check_metadata(a: Spectrum, b: Spectrum):
    if a.domain is not None and b.domain is not None and a.domain != b.domain:
        raise MetadataMismatch(f"spectra from different domains: {a.domain!r} vs {b.domain!r}")
    if (a.mesh_h is None) != (b.mesh_h is None) or (
            a.mesh_h is not None and not math.isclose(a.mesh_h, b.mesh_h, rel_tol=1e-12)):
        raise MetadataMismatch(f"spectra from different meshes: h={a.mesh_h} vs h={b.mesh_h}")


def merge_spectra(neumann: Spectrum, dirichlet: Spectrum) -> MergedSpectrum:
    """Sorted union of the positive Neumann and the Dirichlet eigenvalues."""
    _check_metadata(neumann, dirichlet)
    nz = zero_mode_count(neumann.values)
    items = [(v, 0, "neumann", j + 1) for j, v in enumerate(neumann.values) if j >= nz]
    items += [(v, 1, "dirichlet", j + 1) for j, v in enumerate(dirichlet.values)]
    items.sort(key=lambda t: (t[0], t[1], t[3]))
    entries = [MergedEntry(float(v), src, idx) for v, _, src, idx in items]
    return MergedSpectrum(entries, neumann.domain or dirichlet.domain, neumann.mesh_h)


# --------------------------------------------------------------------------- inequality


@dataclass
class InequalityRecord:
    k: int
    mu_k2: float
    lambda_k: float
    gap: float
    verdict: str
    mu_k1: float
    filonov_ok: bool
    lambda_k_simple: bool
    mu_k3: float | None = None
    shift3_exceeds: bool | None = None


@dataclass
class InequalityReport:
    records: list[InequalityRecord]
    domain: str | None
    mesh_h: float | None
    slack: float
    boundary_has_segment: bool
    evidence: str = EVIDENCE

    @property
    def verdicts(self) -> list[str]:
        return [r.verdict for r in self.records]

    @property
    def violated(self) -> bool:
        return any(r.verdict == "violated" for r in self.records)

    @property
    def all_strict(self) -> bool:
        return all(r.verdict == "strict" for r in self.records)

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "mesh_h": self.mesh_h,
            "slack": self.slack,
            "evidence": self.evidence,
            "strictness_condition": {"boundary_has_segment": self.boundary_has_segment},
            "records": [asdict(r) for r in self.records],
        }

    def csv_rows(self):
        yield ["k", "mu_k+2", "lambda_k", "gap", "verdict"]
        for r in self.records:
            yield [r.k, repr(r.mu_k2), repr(r.lambda_k), repr(r.gap), r.verdict]


def verdict(mu: float, lam: float, slack: float) -> str:
    if mu < lam - slack * lam:
        return "strict"
    if mu > lam + slack * lam:
        return "violated"
    return "nonstrict_within_tol"


def check_inequality(neumann: Spectrum, dirichlet: Spectrum, k_max: int,
                     slack: float | None = None, boundary_has_segment: bool = True
                     ) -> InequalityReport:
    """Compare mu_{k+2} with lambda_k for k = 1..k_max.

    ``slack`` defaults to ``slack_for(mesh_h)``.  Each record also carries the
    weaker comparison mu_{k+1} < lambda_k and, when mu_{k+3} is available,
    whether the shift could be raised to three at that k.
    """
    _check_metadata(neumann, dirichlet)
    if len(neumann) < k_max + 2 or len(dirichlet) < k_max:
        raise NotEnoughEigenvalues(
            f"need {k_max + 2} Neumann and {k_max} Dirichlet eigenvalues, "
            f"got {len(neumann)} and {len(dirichlet)}")
    if slack is None:
        slack = slack_for(neumann.mesh_h)
    mu, lam = neumann.values, dirichlet.values
    records = []
    for k in range(1, k_max + 1):
        m2, lk, m1 = float(mu[k + 1]), float(lam[k - 1]), float(mu[k])
        rec = InequalityRecord(k, m2, lk, lk - m2, verdict(m2, lk, slack), m1, bool(m1 < lk),
                               dirichlet.multiplicity(k - 1) == 1)
        if len(mu) > k + 2:
            rec.mu_k3 = float(mu[k + 2])
            rec.shift3_exceeds = bool(rec.mu_k3 > lk)
        records.append(rec)
    return InequalityReport(records, neumann.domain, neumann.mesh_h, slack, boundary_has_segment)


@dataclass
class InequalityStudy:
    """Inequality reports over refinement levels plus stability-aware verdicts."""

    levels: list[int]
    reports: list[InequalityReport]
    final_verdicts: list[str]
    evidence: str = EVIDENCE

    @property
    def finest(self) -> InequalityReport:
        return self.reports[-1]

    @property
    def violated(self) -> bool:
        return any(r.violated for r in self.reports)

    @property
    def all_strict(self) -> bool:
        return all(v == "strict" for v in self.final_verdicts)

    def to_json(self) -> dict:
        return {
            "levels": self.levels,
            "final_verdicts": self.final_verdicts,
            "evidence": self.evidence,
            "reports": [r.to_json() for r in self.reports],
        }


def stable_verdicts(reports: list[InequalityReport]) -> list[str]:
    """Finest-level verdicts, downgraded to inconclusive if the last two levels disagree."""
    if len(reports) < 2:
        return list(reports[-1].verdicts)
    a, b = reports[-2].verdicts, reports[-1].verdicts
    return [vb if va == vb else "inconclusive" for va, vb in zip(a, b)]


def level_spectra(mesh: TriMesh, n_neumann: int, n_dirichlet: int, tol: float = DEFAULT_TOL):
    return (scalar_spectrum(mesh, "neumann", n_neumann, tol),
            scalar_spectrum(mesh, "dirichlet", n_dirichlet, tol))


def inequality_study(polygon: Polygon, levels_list, k_max: int, tol: float = DEFAULT_TOL,
                     slack: float | None = None) -> InequalityStudy:
    """Run ``check_inequality`` on the FEM spectra of every refinement level."""
    levels = sorted(levels_list)
    reports = []
    for level in levels:
        mesh = triangulate(polygon, level)
        neu, dir_ = level_spectra(mesh, k_max + 3, k_max + 1, tol)
        reports.append(check_inequality(neu, dir_, k_max, slack))
    return InequalityStudy(levels, reports, stable_verdicts(reports))


# --------------------------------------------------------------------------- counting


def counting_check(merged: MergedSpectrum, dirichlet: Spectrum, k: int,
                   rtol: float = 1e-9) -> bool:
    """True iff at least k+1 positive Neumann eigenvalues lie in (0, lambda_k]."""
    if len(dirichlet) < k:
        raise NotEnoughEigenvalues(f"lambda_{k} not available")
    lam = float(dirichlet.values[k - 1]) * (1 + rtol)
    n_below = merged.count("neumann", upto=lam)
    if n_below >= k + 1:
        return True
    neu = [e.value for e in merged.entries if e.source == "neumann"]
    if not neu or max(neu) <= lam:
        raise NotEnoughEigenvalues("Neumann list ends below lambda_k; count is inconclusive")
    return False


# --------------------------------------------------------------------------- crosscheck


@dataclass
class CrosscheckLevel:
    level: int
    h: float
    vector_values: list[float]
    merged_values: list[float]
    merged_sources: list[str]
    deviations: list[float]
    labels: list[str]
    label_match: bool

    @property
    def max_deviation(self) -> float:
        return max(self.deviations)


@dataclass
class CrosscheckReport:
    domain: str
    levels: list[CrosscheckLevel]
    ratios: list[float] = field(default_factory=list)
    monotone: bool = True
    evidence: str = EVIDENCE

    def to_json(self) -> dict:
        return {"domain": self.domain, "ratios": self.ratios, "monotone": self.monotone,
                "evidence": self.evidence,
                "levels": [asdict(lv) | {"max_deviation": lv.max_deviation} for lv in self.levels]}


def labels_match(labels, values, sources) -> bool:
    """Per cluster of the merged scalar values, gradient fields pair with Neumann entries."""
    for g in multiplicity_groups(values):
        n_grad = sum(labels[i] == "gradient_type" for i in g)
        n_perp = sum(labels[i] == "perp_gradient_type" for i in g)
        n_neu = sum(sources[i] == "neumann" for i in g)
        if n_grad != n_neu or n_perp != len(g) - n_neu:
            return False
    return True


def min_max_crosscheck(polygon: Polygon, levels_list, count: int,
                       tol: float = DEFAULT_TOL) -> CrosscheckReport:
    """Vector-form eigenvalues against the merged scalar spectra, level by level."""
    out = []
    for level in sorted(levels_list):
        mesh = triangulate(polygon, level)
        vspec, fields = vector_spectrum(mesh, count, tol)
        # the whole Dirichlet spectrum is used when the mesh has fewer interior dofs
        neu, dir_ = level_spectra(mesh, count + 1, min(count, len(mesh.interior_vertices)), tol)
        merged = merge_spectra(neu, dir_)
        mv = merged.values[:count]
        srcs = merged.sources[:count]
        dev = np.abs(vspec.values - mv) / mv
        labels = [f.label for f in fields]
        out.append(CrosscheckLevel(level, mesh.h, vspec.values.tolist(), mv.tolist(), srcs,
                                   dev.tolist(), labels, labels_match(labels, mv, srcs)))
    devs = [lv.max_deviation for lv in out]
    ratios = [a / b if b > 0 else math.inf for a, b in zip(devs, devs[1:])]
    # one non-monotone step is tolerated before the study counts as failing
    monotone = sum(1 for r in ratios if r <= 1.0) <= 1
    return CrosscheckReport(polygon.name, out, ratios, monotone)


# --------------------------------------------------------------------------- certificate


@dataclass
class CertificateReport:
    k: int
    dimension: int
    in_constrained_space: bool
    identity_max_rel_error: float
    max_rayleigh: float
    lambda_k: float
    certificate_ok: bool
    normal_trace_max: float
    count_below: int | None = None
    counting_ok: bool | None = None
    evidence: str = EVIDENCE

    def to_json(self) -> dict:
        return asdict(self)


def test_space_certificate(mesh: TriMesh, k: int, tol: float = 1e-8,
                           counting: str | bool = "auto",
                           solver_tol: float = DEFAULT_TOL) -> CertificateReport:
    """Build the 2k fields (phi_j, 0), (0, phi_j) from discrete Dirichlet modes and test them.

    Checks that they are admissible, that the div-curl energy equals the sum
    of the component stiffness energies, that the largest Rayleigh quotient
    on their span is lambda_k^h (up to ``tol``, relative), and optionally
    that the discrete vector operator has at least 2k eigenvalues at or below
    lambda_k^h.  ``counting="auto"`` skips the last part on reentrant meshes.
    """
    dspec = scalar_spectrum(mesh, "dirichlet", k, solver_tol)
    phi = dspec.vectors
    n = mesh.n_points
    B = np.zeros((2 * n, 2 * k))
    B[:n, :k] = phi
    B[n:, k:] = phi
    cons = tangential_constraints(mesh)
    inside = all(cons.contains(B[:, j]) for j in range(2 * k))

    D, C = div_curl_matrices(mesh)
    K, _ = mesh_matrices(mesh)
    F = B.T @ ((D.full + C.full) @ B)
    Ks = phi.T @ (K.full @ phi)
    expected = la.block_diag(Ks, Ks)
    scale = np.abs(np.diag(expected)).max()
    ident_err = float(np.abs(F - expected).max() / scale)

    G = B.T @ (vector_mass(mesh).full @ B)
    dim = int(np.linalg.matrix_rank(G, tol=1e-10 * np.abs(G).max()))
    ritz = la.eigh(0.5 * (F + F.T), 0.5 * (G + G.T), eigvals_only=True)
    lam_k = float(dspec.values[k - 1])
    max_rq = float(ritz.max())
    trace = max(float(np.abs(normal_trace_perp_gradient(mesh, phi[:, j])).max())
                for j in range(k))
    report = CertificateReport(k, dim, inside, ident_err, max_rq, lam_k,
                               bool(max_rq <= lam_k * (1 + tol)), trace)

    if counting == "auto":
        counting = len(reentrant_corners(mesh)) == 0
    if counting:
        if len(reentrant_corners(mesh)):
            raise NonConvexCorner("operator counting needs a convex-cornered mesh")
        vspec, _ = vector_spectrum(mesh, 2 * k + 4, solver_tol)
        report.count_below = int(np.sum(vspec.values <= lam_k * (1 + tol)))
        report.counting_ok = report.count_below >= 2 * k
    return report


test_space_certificate.__test__ = False  # keep pytest from collecting it on import


# --------------------------------------------------------------------------- convergence


@dataclass
class ConvergenceReport:
    domain: str
    bc: str
    k: int
    levels: list[int]
    h: list[float]
    values: list[float]
    orders: list[float]
    extrapolated: float
    monotone: bool

    def to_json(self) -> dict:
        return asdict(self)


def richardson(values):
    """Observed orders from successive triples and the extrapolated limit of the last one."""
    v = np.asarray(values, dtype=float)
    d = -np.diff(v)
    if len(v) < 3:
        raise ValueError("need at least 3 levels")
    if np.any(d <= 0):
        raise NonMonotone("eigenvalue differences are not positive; ratios unusable",
                          values=v.tolist())
    orders = [math.log2(d[i] / d[i + 1]) for i in range(len(d) - 1)]
    p = orders[-1]
    limit = v[-1] - d[-1] / (2 ** p - 1)
    return orders, float(limit)


def convergence_study(polygon: Polygon, bc: str, k: int, levels_list,
                      tol: float = DEFAULT_TOL) -> ConvergenceReport:
    """k-th eigenvalue (1-based, mu_1 = 0 for Neumann) across refinement levels."""
    levels = sorted(levels_list)
    if len(levels) < 3:
        raise ValueError("convergence study needs at least 3 levels")
    vals, hs = [], []
    for level in levels:
        mesh = triangulate(polygon, level)
        spec = scalar_spectrum(mesh, bc, k, tol)
        vals.append(float(spec.values[k - 1]))
        hs.append(mesh.h)
    monotone = all(b <= a * (1 + 1e-8) for a, b in zip(vals, vals[1:]))
    orders, limit = richardson(vals)
    return ConvergenceReport(polygon.name, bc, k, levels, hs, vals, orders, limit, monotone)
