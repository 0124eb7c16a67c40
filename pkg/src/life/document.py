"""Network and state documents (JSON, ``"life_version": 1``) with exact decimal fluxes."""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from importlib import resources
from typing import Any

from .linalg import to_fraction
from .network import CONSTANT, LINEAR, SINK, SOURCE, Edge, Hill, Network, NetworkError
from .stoichiometry import FluxAssignment, MetaboliteState

FORMAT_VERSION = 1
_WS = " \t\n\r"


class ParseError(ValueError):
    """Malformed document; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line
        self.reason = message


@dataclass(frozen=True)
class NetworkDocument:
    network: Network
    flux: FluxAssignment | None
    missing_flux: tuple[str, ...] = ()
    given_flux: tuple[tuple[str, Fraction], ...] = ()

    def intake_flux(self) -> dict[str, Fraction]:
        """Intake fluxes keyed by intake vertex; every intake must carry one."""
        given = dict(self.given_flux)
        out = {}
        for e in self.network.edges:
            if e.is_intake:
                if e.label not in given:
                    raise MissingDataError(f"no flux value on intake {e.label}")
                out[e.head] = given[e.label]
        if not out:
            raise MissingDataError("the network has no intakes")
        return out

    def require_flux(self) -> FluxAssignment:
        if self.flux is None:
            raise MissingDataError(f"no flux values for edges {list(self.missing_flux)}")
        return self.flux


class MissingDataError(LookupError):
    """A command needs data the document does not carry."""


# positions of list entries, for line diagnostics


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _skip(text: str, i: int) -> int:
    while i < len(text) and text[i] in _WS:
        i += 1
    return i


def _entry_lines(text: str) -> dict[str, list[int]]:
    """Line of every element of each top-level array, keyed by member name."""
    dec = json.JSONDecoder()
    out: dict[str, list[int]] = {}
    i = _skip(text, 0)
    if i >= len(text) or text[i] != "{":
        return out
    i = _skip(text, i + 1)
    while i < len(text) and text[i] != "}":
        key, i = dec.raw_decode(text, i)
        i = _skip(text, i)
        i = _skip(text, i + 1)  # ':'
        if text[i] == "[":
            lines = []
            i = _skip(text, i + 1)
            while text[i] != "]":
                lines.append(_line_of(text, i))
                _, i = dec.raw_decode(text, i)
                i = _skip(text, i)
                if text[i] == ",":
                    i = _skip(text, i + 1)
            i += 1
            out[key] = lines
        else:
            _, i = dec.raw_decode(text, i)
        i = _skip(text, i)
        if i < len(text) and text[i] == ",":
            i = _skip(text, i + 1)
    return out


# numbers


def _number(value, what: str, line: int | None) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int, Decimal)):
        raise ParseError(f"{what} must be a decimal string, got {value!r}", line)
    try:
        return Fraction(value) if not isinstance(value, str) else to_fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{what} is not a valid number: {value!r}", line) from None


def format_exact(value: Fraction) -> str:
    """Decimal string when the value has a finite decimal expansion, else ``p/q``."""
    value = Fraction(value)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(value.numerator)
    scaled = abs(value.numerator) * 10**digits // value.denominator
    whole, frac = divmod(scaled, 10**digits)
    sign = "-" if value < 0 else ""
    return f"{sign}{whole}.{str(frac).rjust(digits, '0')}"


# kinetics


def _kinetics(spec, line):
    if not isinstance(spec, dict) or "type" not in spec:
        raise ParseError("kinetics must be an object with a 'type'", line)
    kind = spec["type"]
    if kind == "linear":
        extra = set(spec) - {"type"}
        if extra:
            raise ParseError(f"unexpected kinetics fields {sorted(extra)}", line)
        return LINEAR
    if kind == "hill":
        extra = set(spec) - {"type", "p", "K"}
        if extra:
            raise ParseError(f"unexpected kinetics fields {sorted(extra)}", line)
        if "p" not in spec or "K" not in spec:
            raise ParseError("hill kinetics needs 'p' and 'K'", line)
        p = spec["p"]
        if isinstance(p, bool) or not isinstance(p, (int, Decimal)) or int(p) != p:
            raise ParseError(f"hill exponent must be an integer, got {p!r}", line)
        try:
            return Hill(int(p), _number(spec["K"], "hill K", line))
        except NetworkError as exc:
            raise ParseError(str(exc), line) from None
    raise ParseError(f"unknown kinetics type {kind!r}", line)


def _kinetics_doc(kin) -> dict:
    if isinstance(kin, Hill):
        return {"type": "hill", "p": kin.p, "K": format_exact(kin.K)}
    return {"type": "linear"}


# parsing


def _load(text: str) -> Any:
    if not text.strip():
        raise ParseError("empty document", 1)
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None


def _check_version(doc, lines_hint=1):
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object", lines_hint)
    if doc.get("life_version") != FORMAT_VERSION:
        raise ParseError(f"expected \"life_version\": {FORMAT_VERSION}, got {doc.get('life_version')!r}", lines_hint)


def _fields(entry, allowed, required, what, line):
    if not isinstance(entry, dict):
        raise ParseError(f"{what} entries must be objects", line)
    extra = set(entry) - allowed
    if extra:
        raise ParseError(f"unexpected {what} fields {sorted(extra)}", line)
    for key in required:
        if key not in entry:
            raise ParseError(f"{what} entry lacks '{key}'", line)


def parse_document(text: str) -> NetworkDocument:
    """Parse a network document; fluxes are kept only if every edge has one."""
    doc = _load(text)
    _check_version(doc)
    lines = _entry_lines(text)
    extra = set(doc) - {"life_version", "vertices", "edges", "intakes", "excretions", "name", "description"}
    if extra:
        raise ParseError(f"unexpected top-level keys {sorted(extra)}", 1)
    vertices = doc.get("vertices", [])
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise ParseError("'vertices' must be a list of strings", (lines.get("vertices") or [1])[0])
    order = {SOURCE: 0, **{v: i + 1 for i, v in enumerate(vertices)}, SINK: len(vertices) + 1}

    entries: list[tuple[Edge, Fraction | None, int | None]] = []

    def section(name):
        items = doc.get(name, [])
        if not isinstance(items, list):
            raise ParseError(f"'{name}' must be a list", 1)
        where = lines.get(name, [])
        for k, item in enumerate(items):
            yield item, (where[k] if k < len(where) else None)

    def add(edge, flux, line, prev_key):
        key = (order.get(edge.tail, -1), order.get(edge.head, -1))
        if edge.tail not in order or edge.head not in order:
            raise ParseError(f"edge {edge.label} references an unknown vertex", line)
        if prev_key is not None and key <= prev_key:
            if key == prev_key:
                raise ParseError(f"duplicate edge {edge.label}", line)
            raise ParseError(f"edge {edge.label} is out of lexicographic order", line)
        entries.append((edge, flux, line))
        return key

    prev = None
    for item, line in section("intakes"):
        _fields(item, {"to", "flux", "kinetics"}, ("to",), "intake", line)
        if "kinetics" in item and item["kinetics"] != {"type": "constant"}:
            raise ParseError("intake kinetics must be constant", line)
        flux = _number(item["flux"], "flux", line) if "flux" in item else None
        prev = add(Edge(SOURCE, item["to"], CONSTANT), flux, line, prev)
    prev = None
    for item, line in section("edges"):
        _fields(item, {"from", "to", "kinetics", "flux"}, ("from", "to", "kinetics"), "edge", line)
        if item["from"] == item["to"]:
            raise ParseError(f"self-loop on {item['from']!r}", line)
        if item["to"] == SINK or item["from"] == SOURCE:
            raise ParseError("intakes and excretions belong in their own sections", line)
        flux = _number(item["flux"], "flux", line) if "flux" in item else None
        prev = add(Edge(item["from"], item["to"], _kinetics(item["kinetics"], line)), flux, line, prev)
    prev = None
    for item, line in section("excretions"):
        _fields(item, {"from", "kinetics", "flux"}, ("from", "kinetics"), "excretion", line)
        flux = _number(item["flux"], "flux", line) if "flux" in item else None
        prev = add(Edge(item["from"], SINK, _kinetics(item["kinetics"], line)), flux, line, prev)

    try:
        net = Network(tuple(vertices), tuple(e for e, _, _ in entries))
    except NetworkError as exc:
        line = None
        for e, _, ln in entries:
            if e.label in str(exc) or repr(e.tail) in str(exc):
                line = ln
                break
        raise ParseError(str(exc), line) from None
    for e, fl, ln in entries:
        if fl is not None and fl < 0:
            raise ParseError(f"negative flux on {e.label}", ln)
    by_edge = {(e.tail, e.head): fl for e, fl, _ in entries}
    given = tuple((e.label, by_edge[(e.tail, e.head)]) for e in net.edges if by_edge[(e.tail, e.head)] is not None)
    missing = tuple(e.label for e in net.edges if by_edge[(e.tail, e.head)] is None)
    if missing:
        return NetworkDocument(net, None, missing, given)
    flux = FluxAssignment(tuple(by_edge[(e.tail, e.head)] for e in net.edges))
    return NetworkDocument(net, flux, (), given)


def parse_network(text: str) -> Network:
    return parse_document(text).network


def serialize_document(net: Network, flux: FluxAssignment | None = None) -> str:
    """Canonical text; parse_document(serialize_document(...)) reproduces the input exactly."""

    def fl(j):
        return {} if flux is None else {"flux": format_exact(flux[j])}

    intakes, edges, excretions = [], [], []
    for j, e in enumerate(net.edges):
        if e.is_intake:
            intakes.append({"to": e.head, **fl(j)})
        elif e.is_excretion:
            excretions.append({"from": e.tail, "kinetics": _kinetics_doc(e.kinetics), **fl(j)})
        else:
            edges.append({"from": e.tail, "to": e.head, "kinetics": _kinetics_doc(e.kinetics), **fl(j)})

    def block(name, items):
        if not items:
            return f'  "{name}": []'
        body = ",\n".join("    " + json.dumps(it) for it in items)
        return f'  "{name}": [\n{body}\n  ]'

    parts = [
        f'  "life_version": {FORMAT_VERSION}',
        f'  "vertices": {json.dumps(list(net.vertices))}',
        block("intakes", intakes),
        block("edges", edges),
        block("excretions", excretions),
    ]
    return "{\n" + ",\n".join(parts) + "\n}\n"


# states


def parse_state(text: str, net: Network) -> MetaboliteState:
    """State document: ``{"life_version": 1, "state": {...}}`` keyed by vertex, or a list in vertex order."""
    doc = _load(text)
    _check_version(doc)
    raw = doc.get("state")
    line = (_entry_lines(text).get("state") or [None])[0]
    if isinstance(raw, list):
        if len(raw) != net.n:
            raise ParseError(f"state has {len(raw)} entries, network has {net.n} vertices", line)
        values = [_number(v, "state value", line) for v in raw]
    elif isinstance(raw, dict):
        unknown = set(raw) - set(net.vertices)
        if unknown:
            raise ParseError(f"state names unknown vertices {sorted(unknown)}", line)
        missing = [v for v in net.vertices if v not in raw]
        if missing:
            raise ParseError(f"state lacks vertices {missing}", line)
        values = [_number(raw[v], "state value", line) for v in net.vertices]
    else:
        raise ParseError("'state' must be an object or a list", line)
    if any(v < 0 for v in values):
        raise ParseError("state values must be nonnegative", line)
    return MetaboliteState(tuple(values))


def serialize_state(net: Network, state) -> str:
    body = ", ".join(f"{json.dumps(v)}: {json.dumps(format_exact(to_fraction(x)))}" for v, x in zip(net.vertices, state))
    return '{"life_version": 1, "state": {' + body + "}}\n"


# bundled corpus


def bundled_names() -> list[str]:
    folder = resources.files("life") / "networks"
    return sorted(p.name[: -len(".json")] for p in folder.iterdir() if p.name.endswith(".json"))


def bundled_text(name: str) -> str:
    path = resources.files("life") / "networks" / f"{name}.json"
    if not path.is_file():
        raise FileNotFoundError(f"no bundled document named {name!r}; have {bundled_names()}")
    return path.read_text(encoding="utf-8")


def load_bundled(name: str) -> NetworkDocument:
    """One of the shipped example networks, e.g. ``load_bundled("rct")``."""
    return parse_document(bundled_text(name))
