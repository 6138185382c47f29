"""Strict configuration parsing for the command line layer.

Documents are JSON with a rigid schema: unknown keys are rejected at every
level, duplicate keys are rejected at parse time, and all rational numbers
are serialized as ``"p/q"`` strings (plain integers are also accepted).
Floats are only allowed where a quantity is genuinely numerical (never for
multiplicities, masses, or intersection numbers).
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import ConfigError
from .potential import IntersectionTable, Section
from .skeleton import Divisor, build_model

MODEL_KEYS = {"n", "semistable", "divisors", "faces", "intersection_table",
              "sections", "coefficients"}
COMMAND_KEYS = {"cycle", "residues", "potential", "matching", "mass_terms",
                "atomic", "domain", "density", "masses", "boundary",
                "grid", "expected", "resolution", "power", "nodes", "values"}


def _no_duplicates(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} in configuration")
        seen[key] = value
    return seen


def load_document(path):
    try:
        with open(path) as fh:
            return json.load(fh, object_pairs_hook=_no_duplicates)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")


def check_keys(mapping, allowed, context):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{context} must be an object")
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(
            f"unknown keys {unknown} in {context}; allowed: {sorted(allowed)}")


def require(mapping, key, context):
    if key not in mapping:
        raise ConfigError(f"missing required key {key!r} in {context}")
    return mapping[key]


def rational(value, context):
    """Parse an exact rational: an int or a ``"p/q"`` string."""
    if isinstance(value, bool):
        raise ConfigError(f"{context} must be a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{context} is not a valid rational: {value!r}")
    if isinstance(value, float):
        raise ConfigError(
            f"{context} must be exact; write floats as \"p/q\" strings")
    raise ConfigError(f"{context} is not a rational: {value!r}")


def integer(value, context, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{context} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{context} must be >= {minimum}, got {value}")
    return value


def id_list(value, context):
    if not isinstance(value, list):
        raise ConfigError(f"{context} must be a list of divisor ids")
    return [integer(v, f"{context} entry") for v in value]


def build_model_from_config(doc):
    """Assemble the divisor model from the parsed document."""
    n = integer(require(doc, "n", "model config"), "n", minimum=1)
    semistable = doc.get("semistable", False)
    if not isinstance(semistable, bool):
        raise ConfigError("semistable must be a boolean")
    raw_divisors = require(doc, "divisors", "model config")
    if not isinstance(raw_divisors, list) or not raw_divisors:
        raise ConfigError("divisors must be a nonempty list")
    divisors = []
    for k, entry in enumerate(raw_divisors):
        ctx = f"divisors[{k}]"
        check_keys(entry, {"id", "b", "a", "degrees"}, ctx)
        ident = integer(require(entry, "id", ctx), f"{ctx}.id")
        b = integer(entry.get("b", 1), f"{ctx}.b", minimum=1)
        a = rational(entry.get("a", 0), f"{ctx}.a")
        deg = entry.get("degrees")
        degree = rational(deg, f"{ctx}.degrees") if deg is not None else None
        divisors.append(Divisor(ident, b, a, degree=degree))
    raw_faces = require(doc, "faces", "model config")
    if not isinstance(raw_faces, list) or not raw_faces:
        raise ConfigError("faces must be a nonempty list")
    faces = [id_list(f, f"faces[{k}]") for k, f in enumerate(raw_faces)]
    return build_model(divisors, faces, n, semistable)


def build_table_from_config(entries, n):
    if not isinstance(entries, list):
        raise ConfigError("intersection_table must be a list")
    table = IntersectionTable(n)
    for k, entry in enumerate(entries):
        ctx = f"intersection_table[{k}]"
        check_keys(entry, {"L_power", "divisor_powers", "stratum", "value"},
                   ctx)
        lp = integer(require(entry, "L_power", ctx), f"{ctx}.L_power",
                     minimum=0)
        powers_raw = entry.get("divisor_powers", {})
        if not isinstance(powers_raw, dict):
            raise ConfigError(f"{ctx}.divisor_powers must be an object")
        powers = {}
        for key, val in powers_raw.items():
            try:
                ident = int(key)
            except ValueError:
                raise ConfigError(
                    f"{ctx}.divisor_powers key {key!r} is not a divisor id")
            powers[ident] = integer(val, f"{ctx}.divisor_powers[{key}]",
                                    minimum=1)
        stratum = id_list(entry.get("stratum", []), f"{ctx}.stratum")
        value = rational(require(entry, "value", ctx), f"{ctx}.value")
        table.add(lp, powers, tuple(stratum), value)
    return table


def build_sections_from_config(entries, model):
    """Sections given by global exponent vectors over the sorted divisors.

    Each exponent vector is projected onto every face: coordinates of
    divisors absent from the face carry no valuation there.
    """
    if not isinstance(entries, list) or not entries:
        raise ConfigError("sections must be a nonempty list")
    order = [d.id for d in sorted(model.divisors, key=lambda d: d.id)]
    sections = []
    for k, entry in enumerate(entries):
        ctx = f"sections[{k}]"
        check_keys(entry, {"support", "norm_exp"}, ctx)
        raw = require(entry, "support", ctx)
        if not isinstance(raw, list) or not raw:
            raise ConfigError(f"{ctx}.support must be a nonempty list")
        vectors = []
        for j, vec in enumerate(raw):
            if not isinstance(vec, list) or len(vec) != len(order):
                raise ConfigError(
                    f"{ctx}.support[{j}] needs one exponent per divisor "
                    f"({len(order)})")
            vectors.append([rational(e, f"{ctx}.support[{j}]") for e in vec])
        norm = rational(require(entry, "norm_exp", ctx), f"{ctx}.norm_exp")
        support = {}
        for face in model.faces:
            key = face.index_set
            pos = {i: order.index(i) for i in key}
            support[key] = tuple(tuple(vec[pos[i]] for i in key)
                                 for vec in vectors)
        sections.append(Section(support, norm))
    return sections


def coefficients_from_config(mapping, model):
    if not isinstance(mapping, dict):
        raise ConfigError("coefficients must map divisor ids to rationals")
    known = {d.id for d in model.divisors}
    out = {}
    for key, val in mapping.items():
        try:
            ident = int(key)
        except ValueError:
            raise ConfigError(f"coefficients key {key!r} is not a divisor id")
        if ident not in known:
            raise ConfigError(f"coefficients key {ident} is not a divisor")
        out[ident] = rational(val, f"coefficients[{key}]")
    missing = sorted(known - set(out))
    if missing:
        raise ConfigError(f"coefficients missing for divisors {missing}")
    return out


def face_key_from_string(text, context):
    """Parse face keys written ``"0,1"`` or as an id list."""
    if isinstance(text, list):
        return tuple(sorted(id_list(text, context)))
    if isinstance(text, str):
        try:
            return tuple(sorted(int(p) for p in text.split(",") if p != ""))
        except ValueError:
            raise ConfigError(f"{context} is not a face key: {text!r}")
    raise ConfigError(f"{context} is not a face key: {text!r}")


def validate_toplevel(doc):
    check_keys(doc, MODEL_KEYS | COMMAND_KEYS, "config document")
