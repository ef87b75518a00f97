"""Resource metadata records and the repository that holds them.

A record is an opaque id plus a map from property type (a short token such
as "auth", "cite", "key") to a set of string values.  Values are opaque and
compared by exact equality; no normalization is applied here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping

_FORBIDDEN_CHARS = ("\t", "\n", "\r")


class RecordError(ValueError):
    """Malformed record input; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownResourceError(KeyError):
    def __init__(self, resource_id):
        super().__init__(resource_id)
        self.resource_id = resource_id

    def __str__(self):
        return f"unknown resource id: {self.resource_id!r}"


def _check_token(token: str, what: str) -> None:
    if not isinstance(token, str) or not token:
        raise ValueError(f"{what} must be a non-empty string, got {token!r}")
    if any(c.isspace() for c in token):
        raise ValueError(f"{what} must not contain whitespace: {token!r}")


def _check_value(value: str, what: str) -> None:
    if not isinstance(value, str) or not value:
        raise ValueError(f"{what} must be a non-empty string, got {value!r}")
    if any(c in value for c in _FORBIDDEN_CHARS):
        raise ValueError(f"{what} must not contain tab/newline: {value!r}")


@dataclass(frozen=True)
class ResourceRecord:
    """One resource: an id plus property-type -> value-set metadata."""

    id: str
    properties: Mapping[str, FrozenSet[str]] = field(default_factory=dict)

    def values(self, mu: str) -> FrozenSet[str]:
        """Value set for property type ``mu``; absent property == empty set."""
        return self.properties.get(mu, frozenset())


def make_record(rid: str, properties: Mapping[str, Iterable[str]]) -> ResourceRecord:
    """Validate and freeze raw id/properties into a ResourceRecord."""
    _check_value(rid, "resource id")
    props: Dict[str, FrozenSet[str]] = {}
    for mu, vals in properties.items():
        _check_token(mu, "property type")
        frozen = frozenset(vals)
        for v in frozen:
            _check_value(v, f"value of {mu!r}")
        if frozen:
            props[mu] = frozen
    return ResourceRecord(rid, props)


class Repository:
    """Immutable collection of ResourceRecords keyed by id.

    Safe for concurrent read access; nothing mutates a repository after
    construction.
    """

    def __init__(self, records: Iterable[ResourceRecord] = ()):
        self._records: Dict[str, ResourceRecord] = {}
        for rec in records:
            if rec.id in self._records:
                raise ValueError(f"duplicate resource id: {rec.id!r}")
            self._records[rec.id] = rec

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, rid: str) -> bool:
        return rid in self._records

    def __iter__(self) -> Iterator[ResourceRecord]:
        for rid in self.ids():
            yield self._records[rid]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Repository):
            return NotImplemented
        if set(self._records) != set(other._records):
            return False
        return all(
            self._records[rid].properties == other._records[rid].properties
            for rid in self._records
        )

    def ids(self) -> list:
        return sorted(self._records)

    def record(self, rid: str) -> ResourceRecord:
        try:
            return self._records[rid]
        except KeyError:
            raise UnknownResourceError(rid) from None

    def meta(self, rid: str, mu: str) -> FrozenSet[str]:
        """Value set of property ``mu`` for resource ``rid`` (may be empty)."""
        return self.record(rid).values(mu)

    def property_types(self) -> list:
        types = set()
        for rec in self._records.values():
            types.update(rec.properties)
        return sorted(types)


def meta(repo: Repository, rid: str, mu: str) -> FrozenSet[str]:
    return repo.meta(rid, mu)


def ingest(lines: Iterable[str]) -> Repository:
    """Build a Repository from JSON-lines record text.

    Each non-blank line is one record object:
        {"id": "m1", "properties": {"key": ["swarm", "algorithms"]}}

    Duplicate ids and malformed lines raise RecordError with the line number.
    """
    records: Dict[str, ResourceRecord] = {}
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise RecordError(line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict) or "id" not in obj:
            raise RecordError(line_no, "record must be an object with an 'id' field")
        props = obj.get("properties", {})
        if not isinstance(props, dict):
            raise RecordError(line_no, "'properties' must be an object")
        for mu, vals in props.items():
            if not isinstance(vals, list):
                raise RecordError(line_no, f"values of {mu!r} must be an array")
        try:
            rec = make_record(obj["id"], props)
        except ValueError as exc:
            raise RecordError(line_no, str(exc)) from exc
        if rec.id in records:
            raise RecordError(line_no, f"duplicate resource id: {rec.id!r}")
        records[rec.id] = rec
    return Repository(records.values())


def save_repository(repo: Repository, destination) -> None:
    """Write a repository as canonical JSON lines (sorted ids, sorted values)."""
    with open(destination, "w", encoding="utf-8") as fh:
        for rec in repo:
            obj = {
                "id": rec.id,
                "properties": {mu: sorted(rec.properties[mu]) for mu in sorted(rec.properties)},
            }
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def load_repository(source) -> Repository:
    with open(source, "r", encoding="utf-8") as fh:
        return ingest(fh)
