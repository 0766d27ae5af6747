from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple, Union

from frailz.errors import ValidationError

Kind = Literal["numeric", "categorical"]
CovariateValue = Union[float, str]


@dataclass(frozen=True)
class CovariateSpec:
    """
    One covariate of a schema.

    For categorical covariates ``levels`` is the ordered level set and ``reference``
    the level that expands to the zero vector. The reference defaults to the
    first declared level.
    """

    name: str
    kind: Kind = "numeric"
    levels: Tuple[str, ...] = ()
    reference: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("covariate name must be non-empty")
        if self.kind not in ("numeric", "categorical"):
            raise ValidationError(f"covariate {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "numeric":
            if self.levels or self.reference is not None:
                raise ValidationError(f"numeric covariate {self.name!r} cannot declare levels")
            return
        levels = tuple(str(level) for level in self.levels)
        if len(levels) < 2:
            raise ValidationError(f"categorical covariate {self.name!r} needs at least two levels")
        if len(set(levels)) != len(levels):
            raise ValidationError(f"categorical covariate {self.name!r} has duplicate levels")
        reference = levels[0] if self.reference is None else str(self.reference)
        if reference not in levels:
            raise ValidationError(
                f"categorical covariate {self.name!r}: reference {reference!r} is not a level"
            )
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "reference", reference)

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"

    @property
    def indicator_levels(self) -> Tuple[str, ...]:
        """Non-reference levels, in declared order."""
        return tuple(level for level in self.levels if level != self.reference)

    @property
    def columns(self) -> Tuple[str, ...]:
        if not self.is_categorical:
            return (self.name,)
        return tuple(f"{self.name}:{level}" for level in self.indicator_levels)

    @classmethod
    def numeric(cls, name: str) -> "CovariateSpec":
        return cls(name=name)

    @classmethod
    def categorical(
        cls, name: str, levels: Sequence[str], reference: Optional[str] = None
    ) -> "CovariateSpec":
        return cls(name=name, kind="categorical", levels=tuple(levels), reference=reference)


@dataclass(frozen=True)
class CovariateSchema:
    covariates: Tuple[CovariateSpec, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        covariates = tuple(self.covariates)
        names = [c.name for c in covariates]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate covariate names in schema: {names}")
        object.__setattr__(self, "covariates", covariates)

    def __len__(self) -> int:
        return len(self.covariates)

    def __iter__(self):
        return iter(self.covariates)

    def __getitem__(self, name: str) -> CovariateSpec:
        for spec in self.covariates:
            if spec.name == name:
                return spec
        raise KeyError(name)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.covariates)

    @property
    def kinds(self) -> Tuple[Kind, ...]:
        return tuple(c.kind for c in self.covariates)

    @property
    def levels(self) -> Dict[str, Tuple[str, ...]]:
        return {c.name: c.levels for c in self.covariates if c.is_categorical}

    @property
    def categorical(self) -> Tuple[CovariateSpec, ...]:
        return tuple(c for c in self.covariates if c.is_categorical)

    @property
    def columns(self) -> Tuple[str, ...]:
        """Names of the expanded design columns, in expansion order."""
        return tuple(col for spec in self.covariates for col in spec.columns)

    def replace(self, name: str, spec: CovariateSpec) -> "CovariateSchema":
        if name not in self.names:
            raise KeyError(name)
        return CovariateSchema(tuple(spec if c.name == name else c for c in self.covariates))

    def to_dict(self) -> List[dict]:
        out = []
        for spec in self.covariates:
            entry: dict = {"name": spec.name, "kind": spec.kind}
            if spec.is_categorical:
                entry["levels"] = list(spec.levels)
                entry["reference"] = spec.reference
            out.append(entry)
        return out

    @classmethod
    def from_dict(cls, entries: Iterable[dict]) -> "CovariateSchema":
        return cls(
            tuple(
                CovariateSpec(
                    name=e["name"],
                    kind=e.get("kind", "numeric"),
                    levels=tuple(e.get("levels", ())),
                    reference=e.get("reference"),
                )
                for e in entries
            )
        )


@dataclass(frozen=True)
class Observation:
    """A single clustered, right-censored observation."""

    time: float
    status: int
    cluster: str
    covariates: Tuple[CovariateValue, ...] = ()
    row_id: int = 0

    def __post_init__(self) -> None:
        if not self.time > 0:
            raise ValidationError(f"row {self.row_id}: time must be > 0, got {self.time!r}")
        if self.status not in (0, 1):
            raise ValidationError(f"row {self.row_id}: status must be 0 or 1, got {self.status!r}")
