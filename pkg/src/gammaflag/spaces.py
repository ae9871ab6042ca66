"""Named flag-variety specs and a small registry used by the CLI and tests."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import lie
from .schubert import FlagSpace

LABELS = {
    "P1": ("A", 1, ()),
    "P2": ("A", 2, (1,)),
    "GR24": ("A", 3, (0, 2)),
    "FL3": ("A", 2, ()),
}


@dataclass(frozen=True)
class SpaceSpec:
    """A simple type, rank and parabolic subset (0-based), optionally labelled."""

    type_letter: str
    rank: int
    subset: tuple[int, ...]
    label: str = ""

    @classmethod
    def from_label(cls, label: str) -> "SpaceSpec":
        key = label.upper().replace("(", "").replace(")", "").replace(",", "")
        if key in LABELS:
            t, r, subset = LABELS[key]
            return cls(t, r, subset, label=label)
        # bare type+rank, e.g. "A3"
        if len(key) >= 2 and key[0] in "ABCDEFG" and key[1:].isdigit():
            return cls(key[0], int(key[1:]), (), label=label)
        raise ValueError(f"unknown space label {label!r}")

    @classmethod
    def parse(cls, space: str, ip: str | None = None) -> "SpaceSpec":
        """Parse e.g. ('A2', '2') or ('Gr24', None); ip is 1-based, comma separated."""
        base = cls.from_label(space)
        if ip is None or ip.strip() == "":
            return base
        subset = tuple(sorted(int(tok) - 1 for tok in ip.split(",") if tok.strip()))
        return cls(base.type_letter, base.rank, subset, label=space)

    @property
    def is_type_a(self) -> bool:
        return self.type_letter == "A"

    def name(self) -> str:
        if self.label:
            return self.label
        ip = ",".join(str(i + 1) for i in self.subset)
        return f"{self.type_letter}{self.rank}[{ip}]"


@lru_cache(maxsize=32)
def _build(type_letter: str, rank: int, subset: tuple[int, ...], cap: int) -> FlagSpace:
    system = lie.build_root_system(lie.cartan_datum(type_letter, rank))
    return FlagSpace(lie.minimal_reps(system, subset, cap=cap))


def flag_space(spec: SpaceSpec | str, cap: int = lie.DEFAULT_WEYL_CAP) -> FlagSpace:
    if isinstance(spec, str):
        spec = SpaceSpec.from_label(spec)
    return _build(spec.type_letter, spec.rank, tuple(spec.subset), cap)
