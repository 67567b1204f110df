"""JSON schemas and (de)serialization.

Matrices are stored dense and row-major as ``{rows, cols, data: [[re, im],
...]}``; floats round-trip bit-exactly at double precision.  Combs record
their leg convention in a ``leg_order`` header: ascending time order in the
file, descending time order inside the stored Choi matrix, output leg before
input leg within each slot.

Loaders validate structure eagerly and report the path of the first
violation, e.g. ``members[2].payload.choi.rows``.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .channels import Basis, ChoiChannel, Instrument
from .combs import Comb
from .consistency import CombFamily, ConsistencyReport, DistributionFamily
from .distributions import JointDistribution
from .errors import CombKitError, SchemaError

LEG_ORDER = "times ascending in file; choi legs descending in time, output leg then input leg per slot"


def _expect(obj: Any, kind: type, path: str, what: str):
    if not isinstance(obj, kind) or (kind is int and isinstance(obj, bool)):
        raise SchemaError(f"expected {what}, got {type(obj).__name__}", path)
    return obj


def _get(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"missing key {key!r}", path)
    return obj[key]


def _number(obj: Any, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise SchemaError(f"expected a number, got {type(obj).__name__}", path)
    return float(obj)


def _string_list(obj: Any, path: str) -> list[str]:
    _expect(obj, list, path, "a list of strings")
    return [str(_expect(s, str, f"{path}[{i}]", "a string")) for i, s in enumerate(obj)]


# ---------------------------------------------------------------------------
# matrices


def matrix_to_json(m: np.ndarray) -> dict:
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(v.real), float(v.imag)] for v in m.reshape(-1)],
    }


def matrix_from_json(obj: Any, path: str = "$") -> np.ndarray:
    _expect(obj, dict, path, "a matrix object")
    rows = _expect(_get(obj, "rows", path), int, f"{path}.rows", "an integer")
    cols = _expect(_get(obj, "cols", path), int, f"{path}.cols", "an integer")
    if rows < 1 or cols < 1:
        raise SchemaError("rows and cols must be positive", path)
    data = _expect(_get(obj, "data", path), list, f"{path}.data", "a list")
    if len(data) != rows * cols:
        raise SchemaError(
            f"data has {len(data)} entries, expected rows*cols = {rows * cols}",
            f"{path}.data",
        )
    out = np.empty(rows * cols, dtype=np.complex128)
    for i, entry in enumerate(data):
        epath = f"{path}.data[{i}]"
        _expect(entry, list, epath, "a [re, im] pair")
        if len(entry) != 2:
            raise SchemaError("expected a [re, im] pair", epath)
        out[i] = complex(_number(entry[0], epath), _number(entry[1], epath))
    return out.reshape(rows, cols)


# ---------------------------------------------------------------------------
# channels and instruments


def channel_to_json(c: ChoiChannel) -> dict:
    return {
        "dim_in": c.dim_in,
        "dim_out": c.dim_out,
        "label": c.label,
        "choi": matrix_to_json(c.choi),
    }


def channel_from_json(obj: Any, path: str = "$") -> ChoiChannel:
    _expect(obj, dict, path, "a channel object")
    dim_in = _expect(_get(obj, "dim_in", path), int, f"{path}.dim_in", "an integer")
    dim_out = _expect(_get(obj, "dim_out", path), int, f"{path}.dim_out", "an integer")
    label = str(obj.get("label", ""))
    choi = matrix_from_json(_get(obj, "choi", path), f"{path}.choi")
    try:
        return ChoiChannel(dim_in, dim_out, choi, label)
    except CombKitError as exc:
        raise SchemaError(str(exc), path) from exc


def instrument_to_json(inst: Instrument) -> dict:
    return {
        "outcomes": [
            {"label": lbl, "channel": channel_to_json(ch)} for lbl, ch in inst.outcomes
        ]
    }


def instrument_from_json(obj: Any, path: str = "$") -> Instrument:
    _expect(obj, dict, path, "an instrument object")
    outcomes_obj = _expect(_get(obj, "outcomes", path), list, f"{path}.outcomes", "a list")
    outcomes = []
    for i, entry in enumerate(outcomes_obj):
        epath = f"{path}.outcomes[{i}]"
        _expect(entry, dict, epath, "an outcome object")
        label = str(_get(entry, "label", epath))
        channel = channel_from_json(_get(entry, "channel", epath), f"{epath}.channel")
        outcomes.append((label, channel))
    try:
        return Instrument(tuple(outcomes))
    except CombKitError as exc:
        raise SchemaError(str(exc), path) from exc


# ---------------------------------------------------------------------------
# combs and distributions


def comb_to_json(comb: Comb) -> dict:
    return {
        "times": list(comb.times),
        "slots": [
            {"time": t, "dim_in": comb.dims_in[i], "dim_out": comb.dims_out[i]}
            for i, t in enumerate(comb.times)
        ],
        "leg_order": LEG_ORDER,
        "choi": matrix_to_json(comb.choi),
    }


def comb_from_json(obj: Any, path: str = "$") -> Comb:
    _expect(obj, dict, path, "a comb object")
    times = _string_list(_get(obj, "times", path), f"{path}.times")
    slots = _expect(_get(obj, "slots", path), list, f"{path}.slots", "a list")
    if len(slots) != len(times):
        raise SchemaError(
            f"{len(slots)} slots for {len(times)} times", f"{path}.slots"
        )
    dims_in, dims_out = [], []
    for i, slot in enumerate(slots):
        spath = f"{path}.slots[{i}]"
        _expect(slot, dict, spath, "a slot object")
        time = str(_get(slot, "time", spath))
        if time != times[i]:
            raise SchemaError(f"slot time {time!r} != times[{i}] = {times[i]!r}", spath)
        dims_in.append(_expect(_get(slot, "dim_in", spath), int, f"{spath}.dim_in", "an integer"))
        dims_out.append(_expect(_get(slot, "dim_out", spath), int, f"{spath}.dim_out", "an integer"))
    choi = matrix_from_json(_get(obj, "choi", path), f"{path}.choi")
    try:
        comb = Comb(tuple(times), tuple(dims_in), tuple(dims_out), choi)
        comb.validate()
    except CombKitError as exc:
        raise SchemaError(str(exc), path) from exc
    return comb


def distribution_to_json(dist: JointDistribution) -> dict:
    return {
        "times": list(dist.times),
        "alphabets": [list(a) for a in dist.alphabets],
        "probs": [
            {"outcomes": list(outcomes), "p": p} for outcomes, p in dist.items()
        ],
    }


def distribution_from_json(obj: Any, path: str = "$") -> JointDistribution:
    _expect(obj, dict, path, "a distribution object")
    times = _string_list(_get(obj, "times", path), f"{path}.times")
    alphabets_obj = _expect(
        _get(obj, "alphabets", path), list, f"{path}.alphabets", "a list"
    )
    alphabets = [
        tuple(_string_list(a, f"{path}.alphabets[{i}]")) for i, a in enumerate(alphabets_obj)
    ]
    if len(alphabets) != len(times):
        raise SchemaError("need one alphabet per time", f"{path}.alphabets")
    table = np.zeros(tuple(len(a) for a in alphabets))
    probs = _expect(_get(obj, "probs", path), list, f"{path}.probs", "a list")
    for i, entry in enumerate(probs):
        epath = f"{path}.probs[{i}]"
        _expect(entry, dict, epath, "a probability entry")
        outcomes = _string_list(_get(entry, "outcomes", epath), f"{epath}.outcomes")
        if len(outcomes) != len(times):
            raise SchemaError(f"expected {len(times)} outcomes", f"{epath}.outcomes")
        idx = []
        for j, (out, alpha) in enumerate(zip(outcomes, alphabets)):
            if out not in alpha:
                raise SchemaError(
                    f"outcome {out!r} not in alphabet for time {times[j]!r}",
                    f"{epath}.outcomes[{j}]",
                )
            idx.append(alpha.index(out))
        table[tuple(idx)] = _number(_get(entry, "p", epath), f"{epath}.p")
    try:
        return JointDistribution(tuple(times), tuple(alphabets), table)
    except CombKitError as exc:
        raise SchemaError(str(exc), path) from exc


# ---------------------------------------------------------------------------
# families

_PAYLOAD_LOADERS = {
    "comb": comb_from_json,
    "distribution": distribution_from_json,
}


def family_kind(obj: Any, path: str = "$") -> str:
    """Sniff whether a family document holds combs or distributions."""
    _expect(obj, dict, path, "a family object")
    members = _expect(_get(obj, "members", path), list, f"{path}.members", "a list")
    if not members:
        raise SchemaError("family has no members", f"{path}.members")
    payload = _get(
        _expect(members[0], dict, f"{path}.members[0]", "a member object"),
        "payload",
        f"{path}.members[0]",
    )
    _expect(payload, dict, f"{path}.members[0].payload", "a payload object")
    if "choi" in payload:
        return "comb"
    if "probs" in payload:
        return "distribution"
    raise SchemaError(
        "payload is neither a comb (choi) nor a distribution (probs)",
        f"{path}.members[0].payload",
    )


def _family_to_json(ground_times, members, to_payload) -> dict:
    ordered = sorted(members, key=lambda k: (len(k), k))
    return {
        "ground_times": list(ground_times),
        "members": [
            {"times": list(times), "payload": to_payload(members[times])}
            for times in ordered
        ],
    }


def comb_family_to_json(family: CombFamily) -> dict:
    return _family_to_json(family.ground_times, family.members, comb_to_json)


def distribution_family_to_json(family: DistributionFamily) -> dict:
    return _family_to_json(family.ground_times, family.members, distribution_to_json)


def _family_members_from_json(obj: Any, kind: str, path: str):
    ground = _string_list(_get(obj, "ground_times", path), f"{path}.ground_times")
    members_obj = _expect(_get(obj, "members", path), list, f"{path}.members", "a list")
    loader = _PAYLOAD_LOADERS[kind]
    members = {}
    for i, entry in enumerate(members_obj):
        epath = f"{path}.members[{i}]"
        _expect(entry, dict, epath, "a member object")
        times = tuple(_string_list(_get(entry, "times", epath), f"{epath}.times"))
        payload = loader(_get(entry, "payload", epath), f"{epath}.payload")
        if payload.times != tuple(sorted(times)):
            raise SchemaError(
                f"member times {times} do not match payload times {payload.times}",
                f"{epath}.times",
            )
        members[times] = payload
    return ground, members


def comb_family_from_json(obj: Any, path: str = "$") -> CombFamily:
    if family_kind(obj, path) != "comb":
        raise SchemaError("expected a comb family", path)
    ground, members = _family_members_from_json(obj, "comb", path)
    try:
        return CombFamily(tuple(ground), members)
    except CombKitError as exc:
        raise SchemaError(str(exc), path) from exc


def distribution_family_from_json(obj: Any, path: str = "$") -> DistributionFamily:
    if family_kind(obj, path) != "distribution":
        raise SchemaError("expected a distribution family", path)
    ground, members = _family_members_from_json(obj, "distribution", path)
    try:
        return DistributionFamily(tuple(ground), members)
    except CombKitError as exc:
        raise SchemaError(str(exc), path) from exc


# ---------------------------------------------------------------------------
# reports and bases


def report_to_json(report: ConsistencyReport) -> dict:
    return report.as_dict()


def basis_map_from_json(obj: Any, path: str = "$") -> dict[str, Basis]:
    """Per-time bases: ``{"t1": {"vectors": matrix, "labels": [...]}, ...}``."""
    _expect(obj, dict, path, "a basis mapping")
    out = {}
    for time, spec in obj.items():
        epath = f"{path}.{time}"
        _expect(spec, dict, epath, "a basis object")
        vectors = matrix_from_json(_get(spec, "vectors", epath), f"{epath}.vectors")
        labels = tuple(_string_list(spec.get("labels", []), f"{epath}.labels"))
        try:
            out[str(time)] = Basis(vectors, labels)
        except CombKitError as exc:
            raise SchemaError(str(exc), epath) from exc
    return out


# ---------------------------------------------------------------------------
# file helpers


def load_json_file(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}", "$") from exc


def save_json_file(obj: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")
