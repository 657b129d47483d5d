"""JSON documents for systems and simulations, and the bundled fixtures."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from gptctx.core import GptSystem
from gptctx.simulation import UnivalentSimulation
from gptctx.zoo import system_from_ref

FIXTURES = ("bit_in_trit", "bit_in_trit_plain", "toy_bit_model", "identity_d2", "restricted_effects")


class DocumentError(ValueError):
    """A JSON document could not be read or has the wrong shape."""


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DocumentError("cannot read %s: %s" % (path, exc)) from exc


def system_from_doc(doc):
    if isinstance(doc, str):
        return load_system(doc)
    if not isinstance(doc, dict):
        raise DocumentError("system document must be an object or a zoo name")
    try:
        return GptSystem.from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise DocumentError(str(exc)) from exc


def load_system(ref):
    """Zoo name (``"simplex:3"``) or path to a system JSON file."""
    if ref.endswith(".json") or Path(ref).is_file():
        return system_from_doc(_read_json(ref))
    try:
        return system_from_ref(ref)
    except (KeyError, ValueError) as exc:
        raise DocumentError(str(exc)) from exc


def simulation_from_doc(doc):
    if not isinstance(doc, dict):
        raise DocumentError("simulation document must be an object")
    missing = {"source", "target", "state_map", "effect_map"} - set(doc)
    if missing:
        raise DocumentError("simulation document missing keys: %s" % ", ".join(sorted(missing)))
    source = system_from_doc(doc["source"])
    target = system_from_doc(doc["target"])
    try:
        return UnivalentSimulation(source, target, doc["state_map"], doc["effect_map"], float(doc.get("epsilon", 0.0)))
    except (ValueError, TypeError) as exc:
        raise DocumentError(str(exc)) from exc


def load_simulation(path):
    return simulation_from_doc(_read_json(path))


def dump(obj, path):
    Path(path).write_text(json.dumps(obj.to_dict(), indent=1) + "\n")


def fixture_path(name):
    if name not in FIXTURES:
        raise KeyError("unknown fixture %r (known: %s)" % (name, ", ".join(FIXTURES)))
    return resources.files("gptctx") / "fixtures" / ("%s.json" % name)


def load_fixture(name):
    return simulation_from_doc(json.loads(fixture_path(name).read_text()))
