"""Plain-JSON forms of properties, targets, combiners, facts and configs.

Used for the config snapshot in transcript headers and, piecewise, by the
scenario loader. The ``*_from_json`` functions raise ``KeyError``,
``TypeError`` or ``ValueError`` on bad input; callers add context.
"""

from __future__ import annotations

from .comparison import Combiner, CombinerKind, TargetSet
from .domain import (
    Aggregator,
    AlwaysTrue,
    DefiningProperty,
    DomainMapping,
    Fact,
    FactForm,
    LabelHasPrefix,
    MagnitudeInRange,
    MappingEntry,
)
from .machine import ProtocolMode, SessionConfig


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"{what} must be an integer, got {v!r}")
    return v


def _enum(cls, v):
    if not isinstance(v, str):
        raise TypeError(f"expected a {cls.__name__} name, got {v!r}")
    try:
        return cls(v.upper())
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ValueError(f"{v!r} is not one of {choices}") from None


def property_to_json(prop: DefiningProperty) -> list:
    out = []
    for atom in prop.atoms:
        if isinstance(atom, MagnitudeInRange):
            out.append({"kind": "magnitude_in_range", "lo": atom.lo, "hi": atom.hi,
                        "inclusive": atom.inclusive})
        elif isinstance(atom, LabelHasPrefix):
            out.append({"kind": "label_has_prefix", "prefix": atom.prefix})
        else:
            out.append({"kind": "always_true"})
    return out


def property_from_json(data) -> DefiningProperty:
    if data is None:
        return DefiningProperty()
    if not isinstance(data, list):
        raise TypeError("property must be a list of atoms")
    atoms = []
    for atom in data:
        kind = atom["kind"]
        if kind == "magnitude_in_range":
            inclusive = atom.get("inclusive", True)
            if not isinstance(inclusive, bool):
                raise TypeError("inclusive must be a boolean")
            atoms.append(MagnitudeInRange(_int(atom["lo"], "lo"), _int(atom["hi"], "hi"), inclusive))
        elif kind == "label_has_prefix":
            if not isinstance(atom["prefix"], str):
                raise TypeError("prefix must be a string")
            atoms.append(LabelHasPrefix(atom["prefix"]))
        elif kind == "always_true":
            atoms.append(AlwaysTrue())
        else:
            raise ValueError(f"unknown property atom {kind!r}")
    return DefiningProperty(tuple(atoms))


def target_to_json(t: TargetSet) -> dict:
    return {"magnitudes": sorted(t.accepted_magnitudes),
            "label_predicate": property_to_json(t.label_predicate)}


def target_from_json(data) -> TargetSet:
    if isinstance(data, list):
        data = {"magnitudes": data}
    if not isinstance(data, dict):
        raise TypeError("target set must be an object or a list of magnitudes")
    mags = data["magnitudes"]
    if not isinstance(mags, list):
        raise TypeError("magnitudes must be a list")
    return TargetSet(frozenset(_int(m, "magnitude") for m in mags),
                     property_from_json(data.get("label_predicate")))


def combiner_to_json(c: Combiner) -> dict:
    out = {"kind": c.kind.value}
    if c.mapping_id is not None:
        out["mapping"] = c.mapping_id
    out["epsilon"] = c.epsilon
    return out


def combiner_from_json(data) -> Combiner:
    if isinstance(data, str):
        data = {"kind": data}
    if not isinstance(data, dict):
        raise TypeError("combiner must be an object or a kind name")
    return Combiner(_enum(CombinerKind, data.get("kind", "DIFFERENCE")),
                    data.get("mapping"), _int(data.get("epsilon", 0), "epsilon"))


def fact_to_json(f: Fact) -> dict:
    return {"id": f.fact_id, "domain": f.domain_id, "form": f.form.value,
            "label": f.label, "magnitude": f.magnitude}


def fact_from_json(data, domain_id: str | None = None) -> Fact:
    return Fact(data["id"], data.get("domain", domain_id),
                _enum(FactForm, data.get("form", "ANSWER")),
                data.get("label", data["id"]), _int(data["magnitude"], "magnitude"))


def mapping_to_json(m: DomainMapping) -> dict:
    return {"id": m.mapping_id, "source": m.source_domain_id, "target": m.target_domain_id,
            "aggregator": m.aggregator.value,
            "entries": [{"sources": list(e.sources), "target": fact_to_json(e.target)}
                        for e in m.entries]}


def mapping_from_json(data) -> DomainMapping:
    entries = tuple(MappingEntry(tuple(sorted(e["sources"])), fact_from_json(e["target"]))
                    for e in data["entries"])
    return DomainMapping(data["id"], data["source"], data["target"],
                         _enum(Aggregator, data["aggregator"]), entries)


def config_to_json(cfg: SessionConfig) -> dict:
    return {
        "session_id": cfg.session_id,
        "i_threshold": cfg.i_threshold,
        "j_threshold": cfg.j_threshold,
        "r_max": cfg.r_max,
        "mode": cfg.mode.value,
        "combiner": combiner_to_json(cfg.combiner),
        "target_i": target_to_json(cfg.target_i),
        "target_j": target_to_json(cfg.target_j),
        "mappings": [mapping_to_json(m) for m in cfg.mappings],
    }


def config_from_json(data) -> SessionConfig:
    return SessionConfig(
        session_id=data["session_id"],
        i_threshold=_int(data["i_threshold"], "i_threshold"),
        j_threshold=_int(data["j_threshold"], "j_threshold"),
        r_max=_int(data["r_max"], "r_max"),
        mode=_enum(ProtocolMode, data.get("mode", "PAPER_LITERAL")),
        combiner=combiner_from_json(data.get("combiner", "DIFFERENCE")),
        target_i=target_from_json(data.get("target_i", [0])),
        target_j=target_from_json(data.get("target_j", [0])),
        mappings=tuple(mapping_from_json(m) for m in data.get("mappings", [])),
    )
