"""Finite-alphabet probability tables.

A :class:`DistTable` is a dense array over the product of the outcome
alphabets of an ordered scope of observables.  Indexing is row-major over
the scope order (first observable slowest), which is also the order of the
flat ``values`` list in the JSON form.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_TABLE_SIZE = 2**24
INGEST_TOL = 1e-9
NEG_CLAMP_TOL = 1e-12
IDENTITY_TOL = 1e-12


class ProbabilityError(ValueError):
    pass


class UnknownObservable(ProbabilityError):
    pass


class DuplicateObservable(ProbabilityError):
    pass


class TableTooLarge(ProbabilityError):
    pass


@dataclass(frozen=True)
class ObservableDecl:
    id: str
    k: int

    def __post_init__(self):
        if int(self.k) < 1:
            raise ProbabilityError(f"alphabet size of {self.id!r} must be >= 1, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    def to_dict(self) -> dict:
        return {"id": self.id, "k": self.k}


def _check_unique(scope: Sequence[ObservableDecl]) -> None:
    seen = set()
    for obs in scope:
        if obs.id in seen:
            raise DuplicateObservable(f"observable {obs.id!r} appears twice")
        seen.add(obs.id)


@dataclass(frozen=True)
class DistTable:
    """Probability table over ``scope``; ``values.shape == (k_1, ..., k_n)``.

    Construction clamps entries in ``[-1e-12, 0)`` to zero and rejects
    anything more negative, or totals off from 1 by more than ``1e-9``.
    The stored array is read-only.
    """

    scope: tuple[ObservableDecl, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        scope = tuple(self.scope)
        _check_unique(scope)
        shape = tuple(o.k for o in scope)
        size = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if size > MAX_TABLE_SIZE:
            raise TableTooLarge(f"table of size {size} exceeds cap {MAX_TABLE_SIZE}")
        vals = np.array(self.values, dtype=float)
        if vals.size != size:
            raise ProbabilityError(f"expected {size} entries for scope {shape}, got {vals.size}")
        vals = vals.reshape(shape)
        if not np.all(np.isfinite(vals)):
            raise ProbabilityError("table contains non-finite entries")
        if vals.size and vals.min() < -NEG_CLAMP_TOL:
            raise ProbabilityError(f"negative probability {vals.min():.3e}")
        vals[vals < 0] = 0.0
        total = vals.sum()
        if abs(total - 1.0) > INGEST_TOL:
            raise ProbabilityError(f"table sums to {total!r}, not 1")
        vals.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "values", vals)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(o.id for o in self.scope)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(o.k for o in self.scope)

    def axis(self, obs_id: str) -> int:
        try:
            return self.ids.index(obs_id)
        except ValueError:
            raise UnknownObservable(f"{obs_id!r} not in scope {self.ids}") from None

    def decl(self, obs_id: str) -> ObservableDecl:
        return self.scope[self.axis(obs_id)]

    def transpose(self, order: Sequence[str]) -> "DistTable":
        """Same distribution with the scope reordered to ``order``."""
        if sorted(order) != sorted(self.ids):
            raise UnknownObservable(f"order {list(order)} is not a permutation of {self.ids}")
        axes = [self.axis(i) for i in order]
        return DistTable(tuple(self.scope[a] for a in axes), np.transpose(self.values, axes))

    def allclose(self, other: "DistTable", tol: float = IDENTITY_TOL) -> bool:
        """Entrywise comparison after aligning ``other`` to this scope order."""
        if set(self.scope) != set(other.scope):
            return False
        other = other.transpose(list(self.ids))
        return bool(np.max(np.abs(self.values - other.values), initial=0.0) <= tol)

    def to_dict(self) -> dict:
        return {
            "scope": [o.to_dict() for o in self.scope],
            "values": [float(v) for v in self.values.ravel()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DistTable":
        scope = tuple(ObservableDecl(str(o["id"]), int(o["k"])) for o in data["scope"])
        return cls(scope, np.asarray(data["values"], dtype=float))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DistTable":
        return cls.from_dict(json.loads(text))


def marginalize(table: DistTable, keep: Iterable[str]) -> DistTable:
    """Sum out every observable not in ``keep``; the result keeps table order."""
    keep = set(keep)
    for obs_id in keep:
        table.axis(obs_id)
    drop = tuple(i for i, o in enumerate(table.scope) if o.id not in keep)
    if not drop:
        return table
    scope = tuple(o for o in table.scope if o.id in keep)
    return DistTable(scope, table.values.sum(axis=drop))


def product_extension(singles: Sequence[DistTable]) -> DistTable:
    """Outer product of single-observable tables."""
    scope: list[ObservableDecl] = []
    vals = np.ones(())
    for t in singles:
        if len(t.scope) != 1:
            raise ProbabilityError(f"expected a single-observable table, got scope {t.ids}")
        scope.append(t.scope[0])
        vals = np.multiply.outer(vals, t.values)
    _check_unique(scope)
    return DistTable(tuple(scope), vals)


def compatible(a: DistTable, b: DistTable, tol: float = INGEST_TOL) -> bool:
    """True iff the marginals of ``a`` and ``b`` on their shared scope agree."""
    shared = [i for i in a.ids if i in set(b.ids)]
    if not shared:
        return True
    if any(a.decl(i).k != b.decl(i).k for i in shared):
        return False
    ma = marginalize(a, shared)
    mb = marginalize(b, shared).transpose(ma.ids)
    return bool(np.max(np.abs(ma.values - mb.values)) <= tol)


def uniform(obs: ObservableDecl) -> DistTable:
    return DistTable((obs,), np.full(obs.k, 1.0 / obs.k))


def point_mass(scope: Sequence[ObservableDecl], outcome: Sequence[int]) -> DistTable:
    vals = np.zeros(tuple(o.k for o in scope))
    vals[tuple(outcome)] = 1.0
    return DistTable(tuple(scope), vals)
