"""Auditor for exported, unprotected components reaching sensitive APIs.

For every component that is exported and carries no permission attribute,
the roots are all concrete methods of the component class plus its inner
classes.  Direct invokes of a sensitive API are reported first; remaining
APIs are searched through the call graph up to a configurable depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .callgraph import CallGraph, reachable_hits
from .dex import CodeModel, parse_method_key
from .manifest import ManifestModel, is_exported, is_protected

DEFAULT_APIS = Path(__file__).parent / "data" / "sensitive_apis.txt"
DEFAULT_DEPTH = 5

SENSITIVE_URIS = {
    "content://sms": "sms",
    "content://contacts": "contacts",
    "content://com.android.contacts": "contacts",
    "content://call_log": "call_log",
    "content://media/external": "media",
}


@dataclass
class SensitiveApiList:
    patterns: list[tuple[str, str]] = field(default_factory=list)  # (pattern, label)

    @classmethod
    def load(cls, path=None) -> "SensitiveApiList":
        p = Path(path) if path else DEFAULT_APIS
        patterns = []
        for line in p.read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            pattern, _, label = line.partition(" ")
            patterns.append((pattern, label.strip() or "sensitive"))
        return cls(patterns)

    def match(self, key: str) -> str | None:
        """Return the data-kind label when the method key matches a pattern."""
        for pattern, label in self.patterns:
            if match_key_pattern(pattern, key):
                return label
        return None


def match_key_pattern(pattern: str, key: str) -> bool:
    """Key matching for API/taint lists.

    Exact key, class wildcard (``Lcls;->*``), name-prefix wildcard
    (``Lcls;->put*``) or proto-insensitive (``Lcls;->name``).
    """
    if pattern == key:
        return True
    if pattern.endswith("->*"):
        return key.startswith(pattern[:-1])
    if pattern.endswith("*"):
        return key.startswith(pattern[:-1])
    if "(" not in pattern:
        return key.startswith(pattern + "(")
    return False


@dataclass(frozen=True)
class ComponentFinding:
    component_class: str  # class descriptor
    kind: str
    sensitive_api: str
    containing_method: str
    path: tuple[str, ...]
    data_kind: str
    confidence: str = "high"

    def sort_key(self):
        return (self.component_class, self.sensitive_api, self.containing_method)


def class_to_descriptor(class_name: str) -> str:
    return "L" + class_name.replace(".", "/") + ";"


def audit_components(
    man: ManifestModel,
    code: CodeModel,
    g: CallGraph,
    apis: SensitiveApiList,
    depth: int = DEFAULT_DEPTH,
) -> tuple[list[ComponentFinding], list[str]]:
    """Returns (findings, warnings). Warnings cover declared-but-absent classes."""
    findings: dict[tuple[str, str, str], ComponentFinding] = {}
    warnings: list[str] = []

    for comp in man.components:
        if not is_exported(comp, man.target_sdk) or is_protected(comp):
            continue
        desc = class_to_descriptor(comp.class_name)
        roots = _component_roots(code, desc)
        if not roots:
            warnings.append(f"declared component class absent from code: {comp.class_name}")
            continue

        # direct invokes inside the component's own methods
        direct_apis: set[str] = set()
        for root in sorted(roots):
            meth = code.method(root)
            for ins in meth.instructions:
                if ins.ref_kind != "method" or ins.resolved_ref is None:
                    continue
                label = apis.match(ins.resolved_ref)
                if label is None:
                    continue
                label, conf = _refine_query(ins.resolved_ref, label, meth)
                key = (desc, ins.resolved_ref, root)
                findings.setdefault(
                    key,
                    ComponentFinding(
                        component_class=desc,
                        kind=comp.kind,
                        sensitive_api=ins.resolved_ref,
                        containing_method=root,
                        path=(root,),
                        data_kind=label,
                        confidence=conf,
                    ),
                )
                direct_apis.add(ins.resolved_ref)

        # call-graph search for APIs not hit directly
        targets = {
            node: apis.match(node)
            for node in g.nodes()
            if apis.match(node) is not None and node not in direct_apis
        }
        if targets:
            for root, target, path in reachable_hits(g, roots, set(targets), depth):
                containing = path[-1]
                meth = code.method(containing)
                label, conf = _refine_query(target, targets[target], meth)
                key = (desc, target, containing)
                findings.setdefault(
                    key,
                    ComponentFinding(
                        component_class=desc,
                        kind=comp.kind,
                        sensitive_api=target,
                        containing_method=containing,
                        path=tuple(path),
                        data_kind=label,
                        confidence=conf,
                    ),
                )
    return sorted(findings.values(), key=ComponentFinding.sort_key), warnings


def _component_roots(code: CodeModel, desc: str) -> set[str]:
    """Concrete methods of the component class and its inner classes."""
    inner_prefix = desc[:-1] + "$"
    roots: set[str] = set()
    for cls_desc, cls in code.classes.items():
        if cls_desc == desc or cls_desc.startswith(inner_prefix):
            for m in cls.methods:
                if m.is_concrete:
                    roots.add(m.key)
    return roots


def _refine_query(api_key: str, label: str, meth) -> tuple[str, str]:
    """ContentResolver.query alone is only medium confidence; a sensitive
    content URI in the same method pins the data kind and raises it."""
    cls, name, _params, _ret = parse_method_key(api_key)
    if cls != "Landroid/content/ContentResolver;" or name != "query":
        return label, "high"
    if meth is not None:
        for ins in meth.instructions:
            if ins.ref_kind == "string" and ins.resolved_ref:
                for uri, uri_label in SENSITIVE_URIS.items():
                    if ins.resolved_ref.startswith(uri):
                        return uri_label, "high"
    return label, "medium"
