"""Trivalent ribbon graph enumeration and the graph side of the main identity.

A ribbon (fat) graph on d darts is a pair of permutations: sigma, whose
3-cycles are the vertices with their cyclic dart order, and alpha, a
fixed-point-free involution whose transpositions are the edges.  Faces are
the cycles of sigma o alpha and carry labels 1..n.  Isomorphisms are dart
bijections conjugating sigma to sigma and alpha to alpha while preserving
every face label.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import (
    BudgetError,
    ConventionMismatch,
    DomainError,
    PoleError,
    Unstable,
)
from .exact import ExactMatrix, double_factorial, solve_linear_exact

DEFAULT_MAX_DARTS = 12

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


# ---------------------------------------------------------------------------
# Dart structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DartStructure:
    """Trivalent combinatorial map with labeled faces."""

    sigma: tuple[int, ...]
    alpha: tuple[int, ...]
    face_labels: tuple[int, ...]  # per dart, values in 1..n

    @property
    def dart_count(self) -> int:
        return len(self.sigma)

    @property
    def vertex_count(self) -> int:
        return self.dart_count // 3

    @property
    def edge_count(self) -> int:
        return self.dart_count // 2

    @property
    def face_count(self) -> int:
        return len(set(self.face_labels))

    @property
    def genus(self) -> int:
        chi = self.vertex_count - self.edge_count + self.face_count
        if chi % 2:
            raise DomainError("odd Euler characteristic")
        return (2 - chi) // 2

    def validate(self) -> None:
        d = self.dart_count
        if d % 6:
            raise DomainError("dart count must be divisible by 6")
        if sorted(self.sigma) != list(range(d)) or sorted(self.alpha) != list(range(d)):
            raise DomainError("sigma/alpha are not permutations")
        for i in range(d):
            if self.sigma[i] == i or self.sigma[self.sigma[self.sigma[i]]] != i:
                raise DomainError("sigma is not a product of 3-cycles")
            if self.alpha[i] == i or self.alpha[self.alpha[i]] != i:
                raise DomainError("alpha is not a fixed-point-free involution")
        if not _is_connected(self.sigma, self.alpha):
            raise DomainError("dart structure is not connected")
        for cycle in face_cycles(self.sigma, self.alpha):
            labels = {self.face_labels[x] for x in cycle}
            if len(labels) != 1:
                raise DomainError("face labels are not constant on faces")
        n = self.face_count
        if sorted(set(self.face_labels)) != list(range(1, n + 1)):
            raise DomainError("face labels must be exactly 1..n")

    def to_json(self, aut_order: int | None = None) -> dict:
        out = {
            "darts": self.dart_count,
            "sigma": list(self.sigma),
            "alpha": list(self.alpha),
            "face_labels": list(self.face_labels),
        }
        if aut_order is not None:
            out["aut_order"] = aut_order
        return out


def face_cycles(sigma: Sequence[int], alpha: Sequence[int]) -> list[tuple[int, ...]]:
    """Cycles of sigma o alpha, each cycle one face, in first-dart order."""
    d = len(sigma)
    seen = [False] * d
    cycles = []
    for start in range(d):
        if seen[start]:
            continue
        cycle = []
        x = start
        while not seen[x]:
            seen[x] = True
            cycle.append(x)
            x = sigma[alpha[x]]
        cycles.append(tuple(cycle))
    return cycles


def _is_connected(sigma: Sequence[int], alpha: Sequence[int]) -> bool:
    d = len(sigma)
    seen = [False] * d
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        x = stack.pop()
        for y in (sigma[x], alpha[x]):
            if not seen[y]:
                seen[y] = True
                count += 1
                stack.append(y)
    return count == d


def _rooted_encoding(sigma, alpha, root):
    """Relabel darts by breadth-first discovery from root (sigma then alpha).

    Returns (sigma', alpha', old-dart-per-new-label).  Rooted connected maps
    have no nontrivial automorphisms fixing the root, so the encoding is a
    complete isomorphism invariant of the rooted map.
    """
    d = len(sigma)
    label = [-1] * d
    order = [root]
    label[root] = 0
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        for y in (sigma[x], alpha[x]):
            if label[y] < 0:
                label[y] = len(order)
                order.append(y)
    sig2 = [0] * d
    alf2 = [0] * d
    for x in range(d):
        sig2[label[x]] = label[sigma[x]]
        alf2[label[x]] = label[alpha[x]]
    return tuple(sig2), tuple(alf2), order


def canonical_encoding(struct: DartStructure):
    """Minimum rooted encoding over all roots, including face labels."""
    best = None
    for root in range(struct.dart_count):
        sig2, alf2, order = _rooted_encoding(struct.sigma, struct.alpha, root)
        labels = tuple(struct.face_labels[x] for x in order)
        enc = (sig2, alf2, labels)
        if best is None or enc < best:
            best = enc
    return best


def canonicalize(struct: DartStructure) -> DartStructure:
    sig2, alf2, labels = canonical_encoding(struct)
    return DartStructure(sig2, alf2, labels)


def automorphism_order(struct: DartStructure) -> int:
    """Order of the dart-permutation group commuting with sigma and alpha
    and fixing every face label.

    Automorphisms of a connected map act freely on darts, so the order equals
    the number of roots whose encoding attains the canonical one.
    """
    encodings = []
    for root in range(struct.dart_count):
        sig2, alf2, order = _rooted_encoding(struct.sigma, struct.alpha, root)
        labels = tuple(struct.face_labels[x] for x in order)
        encodings.append((sig2, alf2, labels))
    best = min(encodings)
    return sum(1 for enc in encodings if enc == best)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RibbonGraphClass:
    """Isomorphism class of a trivalent ribbon graph with labeled faces."""

    canonical: DartStructure
    aut_order: int
    edge_face_pairs: tuple[tuple[int, int], ...]

    def to_json(self) -> dict:
        return self.canonical.to_json(aut_order=self.aut_order)


def _canonical_sigma(darts: int) -> tuple[int, ...]:
    sigma = [0] * darts
    for v in range(darts // 3):
        a = 3 * v
        sigma[a], sigma[a + 1], sigma[a + 2] = a + 1, a + 2, a
    return tuple(sigma)


def _involutions(darts: int) -> Iterator[tuple[int, ...]]:
    """All fixed-point-free involutions on 0..darts-1."""
    alpha = [-1] * darts

    def rec(lo: int):
        while lo < darts and alpha[lo] >= 0:
            lo += 1
        if lo == darts:
            yield tuple(alpha)
            return
        for hi in range(lo + 1, darts):
            if alpha[hi] < 0:
                alpha[lo], alpha[hi] = hi, lo
                yield from rec(lo + 1)
                alpha[lo] = alpha[hi] = -1

    yield from rec(0)


def _edge_face_pairs(struct: DartStructure) -> tuple[tuple[int, int], ...]:
    pairs = []
    for d in range(struct.dart_count):
        e = struct.alpha[d]
        if d < e:
            f1, f2 = struct.face_labels[d], struct.face_labels[e]
            pairs.append((min(f1, f2), max(f1, f2)))
    return tuple(sorted(pairs))


@lru_cache(maxsize=None)
def enumerate_trivalent(
    g: int, n: int, max_darts: int = DEFAULT_MAX_DARTS
) -> tuple[RibbonGraphClass, ...]:
    """Complete duplicate-free list of labeled-face trivalent classes.

    Vertices V = 2(n+2g-2), edges E = 3(n+2g-2), faces n; every class is
    connected with Euler genus g.
    """
    if g < 0 or n < 1:
        raise DomainError("need genus >= 0 and at least one face")
    k = n + 2 * g - 2
    if k < 1:
        raise Unstable(f"no trivalent graph for (g, n) = ({g}, {n})")
    darts = 6 * k
    if darts > max_darts:
        raise BudgetError(f"{darts} darts exceeds budget {max_darts}")
    sigma = _canonical_sigma(darts)
    classes: dict[tuple, RibbonGraphClass] = {}
    labelings = list(itertools.permutations(range(1, n + 1)))
    for alpha in _involutions(darts):
        faces = face_cycles(sigma, alpha)
        if len(faces) != n:
            continue
        if not _is_connected(sigma, alpha):
            continue
        face_index = [0] * darts  # unlabeled face id per dart
        for fi, cycle in enumerate(faces):
            for x in cycle:
                face_index[x] = fi
        # rooted encodings computed once; labelings only permute face ids
        rooted = []
        for root in range(darts):
            sig2, alf2, order = _rooted_encoding(sigma, alpha, root)
            rooted.append((sig2, alf2, tuple(face_index[x] for x in order)))
        for lab in labelings:
            encodings = [
                (sig2, alf2, tuple(lab[f] for f in fidx))
                for sig2, alf2, fidx in rooted
            ]
            canon = min(encodings)
            if canon in classes:
                continue
            aut = sum(1 for enc in encodings if enc == canon)
            struct = DartStructure(*canon)
            assert struct.genus == g and struct.face_count == n
            classes[canon] = RibbonGraphClass(
                canonical=struct,
                aut_order=aut,
                edge_face_pairs=_edge_face_pairs(struct),
            )
    return tuple(classes[key] for key in sorted(classes))


# ---------------------------------------------------------------------------
# Graph side of the main identity
# ---------------------------------------------------------------------------


def kontsevich_sum(
    g: int, n: int, lams: Sequence[Fraction], max_darts: int = DEFAULT_MAX_DARTS
) -> Fraction:
    """Sum over classes of 2^{-V}/|Aut| * prod_e 2/(lambda_i + lambda_j)."""
    lams = [Fraction(x) for x in lams]
    if len(lams) != n:
        raise DomainError("need one lambda per face")
    total = Fraction(0)
    for cls in enumerate_trivalent(g, n, max_darts):
        weight = Fraction(1, 2 ** cls.canonical.vertex_count * cls.aut_order)
        for f1, f2 in cls.edge_face_pairs:
            denom = lams[f1 - 1] + lams[f2 - 1]
            if denom == 0:
                raise PoleError(f"lambda_{f1} + lambda_{f2} = 0")
            weight *= Fraction(2) / denom
        total += weight
    return total


@dataclass
class IntersectionTable:
    """Map (genus, descending exponent tuple) -> exact amplitude."""

    entries: dict[tuple[int, tuple[int, ...]], Fraction]

    def merge(self, other: "IntersectionTable") -> "IntersectionTable":
        merged = dict(self.entries)
        merged.update(other.entries)
        return IntersectionTable(merged)

    def fragments(self) -> set[tuple[int, int]]:
        """The (g, n) blocks this table covers."""
        return {(g, len(d)) for g, d in self.entries}

    def to_json(self) -> dict:
        from .exact import rational_to_str

        return {
            f"g{g}:({','.join(map(str, d))})": rational_to_str(v)
            for (g, d), v in sorted(self.entries.items())
        }


def _exponent_multisets(total: int, n: int) -> list[tuple[int, ...]]:
    """Descending tuples (d_1 >= ... >= d_n >= 0) with sum `total`."""
    out = []

    def rec(remaining, slots, bound, prefix):
        if slots == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for d in range(min(remaining, bound), -1, -1):
            rec(remaining - d, slots - 1, d, prefix + [d])

    rec(total, n, total, [])
    return out


def _sample_points(n: int, count: int, denom: int) -> list[list[Fraction]]:
    """Deterministic pole-free, rank-robust lambda tuples."""
    return [
        [Fraction(_PRIMES[i]) + Fraction(k + 1, denom) for i in range(n)]
        for k in range(count)
    ]


@lru_cache(maxsize=None)
def _convention_ratios(max_darts: int) -> tuple[Fraction, Fraction]:
    """Graph side over normalized LHS at the two base cases.

    The base normalisations <tau_0^3> = 1 and <tau_1> = 1/24 are forced by
    the string equation and the genus-one one-point value; both ratios must
    be exactly 1 for the 2^{-V} convention used here.
    """
    r03 = kontsevich_sum(0, 3, [Fraction(1)] * 3, max_darts) / Fraction(1)
    r11 = kontsevich_sum(1, 1, [Fraction(2)], max_darts) / Fraction(1, 192)
    return r03, r11


def extract_intersection_numbers(
    g: int,
    n: int,
    max_darts: int = DEFAULT_MAX_DARTS,
    denom: int = 11,
) -> IntersectionTable:
    """Solve the main identity for all amplitudes with sum(d_i) = 3g-3+n.

    Evaluates the graph sum at >= 25% more deterministic sample points than
    unknowns and demands an exactly zero overdetermination residual.
    """
    ratios = _convention_ratios(max_darts)
    if ratios != (Fraction(1), Fraction(1)):
        raise ConventionMismatch(
            "graph-sum normalisation does not close at the base cases",
            ratios=ratios,
        )
    total = 3 * g - 3 + n
    if total < 0:
        raise Unstable(f"negative dimension for (g, n) = ({g}, {n})")
    multisets = _exponent_multisets(total, n)
    unknowns = len(multisets)
    count = max(unknowns + 1, -(-unknowns * 5 // 4))
    points = _sample_points(n, count, denom)
    rows = []
    rhs = []
    for lams in points:
        row = []
        for ms in multisets:
            acc = Fraction(0)
            for perm in set(itertools.permutations(ms)):
                term = Fraction(1)
                for lam, d in zip(lams, perm):
                    term /= lam ** (2 * d + 1)
                acc += term
            factor = 1
            for d in ms:
                factor *= double_factorial(2 * d - 1)
            row.append(acc * factor)
        rows.append(row)
        rhs.append(kontsevich_sum(g, n, lams, max_darts))
    solution = solve_linear_exact(ExactMatrix(rows), rhs)
    return IntersectionTable(
        {(g, ms): value for ms, value in zip(multisets, solution)}
    )


def base_table(max_genus: int = 1, max_darts: int = DEFAULT_MAX_DARTS) -> IntersectionTable:
    """All fragments with n + 2g - 2 <= max_darts/6 and g <= max_genus."""
    table = IntersectionTable({})
    kmax = max_darts // 6
    for g in range(max_genus + 1):
        for k in range(1, kmax + 1):
            n = k + 2 - 2 * g
            if n >= 1:
                table = table.merge(extract_intersection_numbers(g, n, max_darts))
    return table
