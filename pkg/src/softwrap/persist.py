"""JSON model files.

Top level: format_version, approach, schema, hyperparams, calibration,
member_seeds, trees. Node ids are list positions and stay stable across a
save/load round trip. Floats are written with ``repr`` precision, so loaded
models predict bit-identically.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .core import FeatureSchema, atomic_write_text, encoded_columns
from .errors import CorruptModel, FormatVersionMismatch, SchemaError
from .trees import APPROACHES, CRISP, FUZZY, LEAF, SOFT, SPLIT, LeafStats, Node, QualityImpactModel, Tree, TreeHyperparams

FORMAT_VERSION = "1"


def _node_to_json(n: Node, columns) -> dict:
    d: dict = {"id": n.id, "kind": n.kind}
    if n.kind == LEAF:
        d["stats"] = n.stats.to_json()
        return d
    d["feature"] = n.feature
    d["feature_name"] = columns[n.feature].name
    if n.kind in (SPLIT, CRISP):
        d["threshold"] = n.threshold
    elif n.kind == FUZZY:
        d["partition"] = list(n.partition)
    elif n.kind == SOFT:
        d["slope"] = n.slope
        d["offset"] = n.offset
        crossing = -n.offset / n.slope
        spread = 2.0 / abs(n.slope)
        d["crossing"] = crossing
        d["display"] = [crossing - spread, crossing, crossing + spread]
    d["children"] = list(n.children)
    return d


def _node_from_json(d: dict) -> Node:
    kind = d["kind"]
    if kind == LEAF:
        s = d["stats"]
        return Node(
            int(d["id"]),
            LEAF,
            stats=LeafStats(
                float(s["weight_correct"]),
                float(s["weight_incorrect"]),
                None if s.get("calibrated_u") is None else float(s["calibrated_u"]),
                None if s.get("calibration_n") is None else float(s["calibration_n"]),
                None if s.get("calibration_incorrect") is None else float(s["calibration_incorrect"]),
            ),
        )
    node = Node(int(d["id"]), kind, feature=int(d["feature"]), children=tuple(int(c) for c in d["children"]))
    if kind in (SPLIT, CRISP):
        node.threshold = float(d["threshold"])
    elif kind == FUZZY:
        a, b, c = (float(v) for v in d["partition"])
        node.partition = (a, b, c)
    elif kind == SOFT:
        node.slope = float(d["slope"])
        node.offset = float(d["offset"])
    else:
        raise CorruptModel(f"unknown node kind {kind!r}")
    return node


def model_to_json(m: QualityImpactModel) -> dict:
    cols = m.columns
    return {
        "format_version": FORMAT_VERSION,
        "approach": m.approach,
        "schema": m.schema.to_json(),
        "hyperparams": m.hyperparams.to_json(),
        "calibration": m.calibration,
        "member_seeds": [str(s) for s in m.member_seeds],
        "trees": [{"nodes": [_node_to_json(n, cols) for n in t.nodes]} for t in m.trees],
    }


def dumps_model(m: QualityImpactModel) -> str:
    return json.dumps(model_to_json(m), indent=1, sort_keys=True) + "\n"


def model_from_json(obj: dict) -> QualityImpactModel:
    if not isinstance(obj, dict) or "format_version" not in obj:
        raise CorruptModel("missing format_version")
    if str(obj["format_version"]) != FORMAT_VERSION:
        raise FormatVersionMismatch(f"model format {obj['format_version']!r}, expected {FORMAT_VERSION!r}")
    try:
        approach = obj["approach"]
        if approach not in APPROACHES:
            raise CorruptModel(f"unknown approach {approach!r}")
        schema = FeatureSchema.from_json(obj["schema"])
        hp = TreeHyperparams.from_json(obj["hyperparams"])
        arity = len(encoded_columns(schema))
        trees = []
        for t in obj["trees"]:
            nodes = [_node_from_json(d) for d in t["nodes"]]
            for i, n in enumerate(nodes):
                if n.id != i or any(not (i < c < len(nodes)) for c in n.children):
                    raise CorruptModel(f"bad node links at node {i}")
                if not n.is_leaf and not 0 <= n.feature < arity:
                    raise CorruptModel(f"feature index out of range at node {i}")
            trees.append(Tree(nodes))
        if not trees:
            raise CorruptModel("model has no trees")
        cal = obj.get("calibration")
        return QualityImpactModel(approach, schema, hp, trees, [int(s) for s in obj.get("member_seeds", [])], cal)
    except CorruptModel:
        raise
    except (KeyError, TypeError, ValueError, SchemaError) as exc:
        raise CorruptModel(f"{type(exc).__name__}: {exc}") from exc


def loads_model(text: str) -> QualityImpactModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"not valid JSON: {exc}") from exc
    return model_from_json(obj)


def save_model(m: QualityImpactModel, path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_model(m))


def load_model(path: str | os.PathLike) -> QualityImpactModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))
