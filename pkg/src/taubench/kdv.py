"""Free-energy assembly and exact KdV / string-equation residuals.

The free energy F(t_0..t_K) collects amplitudes from an IntersectionTable:
the coefficient of prod t_i^{k_i} is the amplitude with k_i insertions of
index i, divided by prod k_i!, at the genus forced by the dimension
constraint sum(d_i) = 3g - 3 + n.  A table never covers every (g, n), so
every series here carries a mask of monomials whose coefficients are not
fully determined; residual coefficients are classified as verified_zero,
uncovered or nonzero accordingly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError
from .exact import Exponents, TruncatedSeries, rational_to_str, t_variables
from .ribbon import IntersectionTable

DEFAULT_CAP = 8
DEFAULT_MAX_INDEX = 4


def _forced_genus(dsum: int, n: int) -> int | None:
    """Genus forced by sum(d_i) = 3g - 3 + n, or None if no genus fits."""
    num = dsum - n + 3
    if num < 0 or num % 3:
        return None
    return num // 3


@dataclass(frozen=True)
class MaskedSeries:
    """Truncated series plus the set of exponent tuples it does not determine.

    A masked exponent means "this coefficient has unknown extra
    contributions"; masked coefficients are stored as whatever partial value
    is known (usually zero) and must never be classified as verified.
    """

    series: TruncatedSeries
    mask: frozenset[Exponents]

    def _supports(self) -> frozenset[Exponents]:
        return frozenset(self.series.terms) | self.mask

    def __add__(self, other: "MaskedSeries") -> "MaskedSeries":
        return MaskedSeries(self.series + other.series, self.mask | other.mask)

    def __sub__(self, other: "MaskedSeries") -> "MaskedSeries":
        return MaskedSeries(self.series - other.series, self.mask | other.mask)

    def scale(self, value) -> "MaskedSeries":
        if not value:
            return MaskedSeries(self.series.scale(0), frozenset())
        return MaskedSeries(self.series.scale(value), self.mask)

    def __mul__(self, other: "MaskedSeries") -> "MaskedSeries":
        series = self.series * other.series
        cap = series.cap
        mask: set[Exponents] = set()
        for mask_side, support_side in (
            (self.mask, other._supports()),
            (other.mask, self._supports()),
        ):
            for ea in mask_side:
                for eb in support_side:
                    expo = tuple(x + y for x, y in zip(ea, eb))
                    if series.degree_of(expo) <= cap:
                        mask.add(expo)
        return MaskedSeries(series, frozenset(mask))

    def diff(self, name: str, order: int = 1) -> "MaskedSeries":
        series = self.series.diff(name, order)
        idx = series.variables.index(name)
        mask = set()
        for expo in self.mask:
            if expo[idx] >= order:
                new = list(expo)
                new[idx] -= order
                mask.add(tuple(new))
        return MaskedSeries(series, frozenset(mask))


@dataclass(frozen=True)
class FreeEnergy:
    """Assembled free energy with provenance and coverage bookkeeping."""

    series: TruncatedSeries
    mask: frozenset[Exponents]
    genus_range: tuple[int, ...]
    provenance: frozenset[tuple[int, int]]  # (g, n) fragments consumed
    coverage_gap: tuple[tuple[int, int, tuple[int, ...]], ...]  # missing (g,n,d)
    max_index: int
    cap: int

    def masked(self) -> MaskedSeries:
        return MaskedSeries(self.series, self.mask)


def _monomial_name(variables, expo) -> str:
    bits = [
        f"{v}^{e}" if e > 1 else v for v, e in zip(variables, expo) if e
    ]
    return "*".join(bits) if bits else "1"


def assemble_free_energy(
    table: IntersectionTable,
    max_genus: int = 1,
    cap: int = DEFAULT_CAP,
    max_index: int = DEFAULT_MAX_INDEX,
) -> FreeEnergy:
    """Build F from the table; monomials the table cannot determine are
    masked and listed in the coverage gap (no exception: the gap report is
    the contract, since no finite table covers every monomial in the cap)."""
    names, weights, cap = t_variables(max_index, cap)
    provenance = table.fragments()
    terms: dict[Exponents, Fraction] = {}
    mask: set[Exponents] = set()
    gap: list[tuple[int, int, tuple[int, ...]]] = []
    for total in range(1, cap + 1):
        for expo in _exponents_of_degree(len(names), total):
            n = sum(expo)
            dsum = sum(i * k for i, k in enumerate(expo))
            g = _forced_genus(dsum, n)
            if g is None:
                continue  # dimension constraint forces an exact zero
            dtuple = tuple(
                sorted(
                    itertools.chain.from_iterable([i] * k for i, k in enumerate(expo)),
                    reverse=True,
                )
            )
            if g <= max_genus and (g, n) in provenance:
                key = (g, dtuple)
                if key not in table.entries:
                    raise DomainError(f"table fragment ({g},{n}) missing {dtuple}")
                denom = 1
                for k in expo:
                    for j in range(2, k + 1):
                        denom *= j
                value = table.entries[key] / denom
                if value:
                    terms[expo] = value
            else:
                mask.add(expo)
                gap.append((g, n, dtuple))
    series = TruncatedSeries(names, weights, cap, terms)
    # provenance audit: every used entry was routed to its unique forced genus
    for expo in series.terms:
        n = sum(expo)
        dsum = sum(i * k for i, k in enumerate(expo))
        g = _forced_genus(dsum, n)
        assert g is not None and (g, n) in provenance
    return FreeEnergy(
        series=series,
        mask=frozenset(mask),
        genus_range=tuple(range(max_genus + 1)),
        provenance=frozenset(provenance),
        coverage_gap=tuple(sorted(set(gap))),
        max_index=max_index,
        cap=cap,
    )


def _exponents_of_degree(arity: int, total: int):
    if arity == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _exponents_of_degree(arity - 1, total - first):
            yield (first,) + rest


def _all_exponents_up_to(arity: int, max_total: int):
    for total in range(max_total + 1):
        yield from _exponents_of_degree(arity, total)


@dataclass
class ResidualReport:
    """Exact residual plus a status per monomial inside the reliable window."""

    name: str
    residual: MaskedSeries
    window: int
    entries: list[dict] = field(default_factory=list)

    @property
    def series(self) -> TruncatedSeries:
        return self.residual.series

    def status_of(self, expo: Exponents) -> str:
        for item in self.entries:
            if item["exponents"] == list(expo):
                return item["status"]
        raise DomainError(f"{expo} outside the reliable window")

    def covered_nonzero(self) -> list[dict]:
        return [e for e in self.entries if e["status"] == "nonzero"]

    def counts(self) -> dict[str, int]:
        out = {"verified_zero": 0, "uncovered": 0, "nonzero": 0}
        for item in self.entries:
            out[item["status"]] += 1
        return out

    def to_json(self) -> dict:
        return {
            "residual": self.name,
            "window": self.window,
            "counts": self.counts(),
            "monomials": self.entries,
        }


def _classify(name: str, residual: MaskedSeries, window: int) -> ResidualReport:
    series = residual.series
    if window < 0:
        raise DomainError("series cap too small for a reliable window")
    entries = []
    for expo in _all_exponents_up_to(len(series.variables), window):
        if series.degree_of(expo) > window:
            continue
        coeff = series.coefficient(expo)
        if expo in residual.mask:
            status = "uncovered"
        elif coeff:
            status = "nonzero"
        else:
            status = "verified_zero"
        entries.append(
            {
                "monomial": _monomial_name(series.variables, expo),
                "exponents": list(expo),
                "status": status,
                "value": str(coeff) if coeff.im else rational_to_str(coeff.re),
            }
        )
    return ResidualReport(name=name, residual=residual, window=window, entries=entries)


def kdv_residual(free_energy: FreeEnergy) -> ResidualReport:
    """R = dU/dt1 - U dU/dt0 - (1/12) d^3U/dt0^3 with U = d^2F/dt0^2.

    The report window is cap - 5: a residual coefficient at degree d draws
    on F-coefficients up to degree d + 5 (two derivatives into U, then up to
    three more), so higher degrees would be truncation artifacts.
    """
    f = free_energy.masked()
    u = f.diff("t0", 2)
    residual = (
        u.diff("t1")
        - u * u.diff("t0")
        - u.diff("t0", 3).scale(Fraction(1, 12))
    )
    return _classify("kdv", residual, free_energy.cap - 5)


def string_residual(free_energy: FreeEnergy) -> ResidualReport:
    """S = dF/dt0 - t0^2/2 - sum_i t_{i+1} dF/dt_i, reliable to cap - 1."""
    f = free_energy.masked()
    names = f.series.variables
    weights = f.series.weights
    cap = f.series.cap
    residual = f.diff("t0")
    t0sq = TruncatedSeries.variable(names, weights, cap, "t0") ** 2
    residual = residual - MaskedSeries(t0sq.scale(Fraction(1, 2)), frozenset())
    for i in range(len(names) - 1):
        t_next = MaskedSeries(
            TruncatedSeries.variable(names, weights, cap, f"t{i + 1}"), frozenset()
        )
        residual = residual - t_next * f.diff(f"t{i}")
    return _classify("string", residual, free_energy.cap - 1)


def mutation_report(
    table: IntersectionTable,
    max_genus: int = 1,
    cap: int = DEFAULT_CAP,
    max_index: int = DEFAULT_MAX_INDEX,
) -> dict:
    """Perturb each table entry by +1 and record, per entry, every residual
    coefficient that moves from verified_zero to nonzero in either the KdV
    or the string residual."""
    out = {}
    for key in sorted(table.entries):
        g, dtuple = key
        mutated = IntersectionTable(dict(table.entries))
        mutated.entries[key] = mutated.entries[key] + 1
        fe = assemble_free_energy(mutated, max_genus, cap, max_index)
        flips = []
        for report in (kdv_residual(fe), string_residual(fe)):
            for item in report.covered_nonzero():
                flips.append(f"{report.name}:{item['monomial']}")
        out[f"g{g}:({','.join(map(str, dtuple))})"] = sorted(flips)
    return out
