"""Source-to-sink taint leak detection.

Phase 1 is a forward, flow-sensitive register taint per method over the
linear instruction stream.  A global, flow-insensitive field store links
writes and reads of the same field key.  Phase 2 is depth-bounded and
summary-based: each method summary records which parameter slots taint the
return value and which reach a sink inside, and callers apply summaries at
call sites.  Cycles are cut by iterating the summary computation to a
bounded fixpoint.

Taint is tracked per named register slot; the second register of a wide
value is not modeled separately.  Any invoke with a tainted argument taints
the receiver register (builder-style writes) and, for calls we cannot see
into, the result.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .callgraph import CallGraph
from .components import match_key_pattern
from .dex import CodeModel, DexMethod
from .errors import TaintSpecError
from .manifest import ManifestModel

log = logging.getLogger(__name__)

DEFAULT_SPEC = Path(__file__).parent / "data" / "sources_sinks.txt"
DEFAULT_DEPTH = 5
SUMMARY_ITERATIONS = 3

CHANNELS = {"network", "sms", "log", "shared_prefs", "intent", "file", "exec"}

INTERNET_PERMISSION = "android.permission.INTERNET"

_PRIMITIVES = {
    "void": "V", "boolean": "Z", "byte": "B", "short": "S", "char": "C",
    "int": "I", "long": "J", "float": "F", "double": "D",
}


@dataclass
class TaintSpec:
    sources: list[tuple[str, str, str]] = field(default_factory=list)  # (pattern, label, origin)
    sinks: list[tuple[str, str, str]] = field(default_factory=list)  # (pattern, channel, origin)
    warnings: list[str] = field(default_factory=list)

    def match_source(self, key: str) -> str | None:
        for pattern, label, _origin in self.sources:
            if match_key_pattern(pattern, key):
                return label
        return None

    def match_sink(self, key: str) -> str | None:
        for pattern, channel, _origin in self.sinks:
            if match_key_pattern(pattern, key):
                return channel
        return None

    def union(self, other: "TaintSpec") -> "TaintSpec":
        return TaintSpec(
            sources=self.sources + [s for s in other.sources if s not in self.sources],
            sinks=self.sinks + [s for s in other.sinks if s not in self.sinks],
            warnings=self.warnings + other.warnings,
        )


def load_taint_spec(path=None, origin: str | None = None) -> TaintSpec:
    """Parse a source/sink list; the embedded default when path is omitted."""
    if path is None:
        p = DEFAULT_SPEC
        origin = origin or "default"
    else:
        p = Path(path)
        origin = origin or "supplementary"
    spec = TaintSpec()
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            pattern, role, tag = _parse_spec_line(line)
        except ValueError as exc:
            spec.warnings.append(f"{p.name}:{lineno}: {exc}")
            log.warning("%s:%d: unparseable line: %s", p.name, lineno, exc)
            continue
        if role == "_SOURCE_":
            spec.sources.append((pattern, tag or "sensitive", origin))
        else:
            spec.sinks.append((pattern, tag or "network", origin))
    if not spec.sources and not spec.sinks:
        raise TaintSpecError(f"{p}: no sources or sinks parsed")
    return spec


def _parse_spec_line(line: str) -> tuple[str, str, str | None]:
    lhs, sep, rhs = line.partition("->")
    if lhs.strip().startswith("L"):
        # canonical key form; the arrow inside the key is part of it, so the
        # role separator is the *last* '->'
        lhs, sep, rhs = line.rpartition("->")
        lhs = lhs.strip()
    else:
        lhs = lhs.strip()
    if not sep:
        raise ValueError("missing '->' separator")
    rhs = rhs.strip()
    role, _, tag = rhs.partition(":")
    role = role.strip()
    if role not in ("_SOURCE_", "_SINK_"):
        raise ValueError(f"bad role {role!r}")
    tag = tag.strip() or None
    if role == "_SINK_" and tag is not None and tag not in CHANNELS:
        raise ValueError(f"unknown channel {tag!r}")
    if lhs.startswith("<") and lhs.endswith(">"):
        return _susi_to_key(lhs[1:-1]), role, tag
    if lhs.startswith("L"):
        return lhs, role, tag
    raise ValueError(f"bad signature {lhs!r}")


def _susi_to_key(body: str) -> str:
    """``pkg.Cls: ret name(a,b)`` to ``Lpkg/Cls;->name(AB)R`` (canonical)."""
    cls, _, sig = body.partition(":")
    cls = cls.strip()
    sig = sig.strip()
    ret_type, _, rest = sig.partition(" ")
    name, _, args = rest.partition("(")
    args = args.rstrip(")")
    params = [a.strip() for a in args.split(",") if a.strip()]
    return (
        _java_to_descriptor(cls)
        + "->"
        + name.strip()
        + "("
        + "".join(_java_to_descriptor(a) for a in params)
        + ")"
        + _java_to_descriptor(ret_type)
    )


def _java_to_descriptor(t: str) -> str:
    dims = 0
    while t.endswith("[]"):
        t = t[:-2]
        dims += 1
    base = _PRIMITIVES.get(t) or ("L" + t.replace(".", "/") + ";")
    return "[" * dims + base


def augment_for_internet(spec: TaintSpec, man: ManifestModel, extra: TaintSpec | None) -> TaintSpec:
    """Supplementary sinks only apply to apps holding the INTERNET permission."""
    if extra is None or INTERNET_PERMISSION not in man.uses_permissions:
        return spec
    return spec.union(extra)


class SrcToken(NamedTuple):
    source: str  # matched method key
    label: str
    site: tuple[str, int]  # (method key, instruction offset)
    path: tuple[str, ...]  # flow witness, ends at the holding method


class ParamToken(NamedTuple):
    index: int


class SinkHit(NamedTuple):
    param: int
    sink: str
    channel: str
    site: tuple[str, int]
    suffix: tuple[str, ...]  # methods from this summary's owner down to the sink


@dataclass
class Summary:
    ret_params: frozenset[int] = frozenset()
    ret_sources: frozenset[SrcToken] = frozenset()
    sink_hits: frozenset[SinkHit] = frozenset()
    param_fields: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class LeakFinding:
    source: str
    sink: str
    channel: str
    source_site: tuple[str, int]
    sink_site: tuple[str, int]
    path: tuple[str, ...]
    data_kind: str

    def sort_key(self):
        return (self.source, self.sink, self.source_site, self.sink_site)


def analyze_leaks(
    code: CodeModel, g: CallGraph, spec: TaintSpec, depth: int = DEFAULT_DEPTH
) -> list[LeakFinding]:
    return _Engine(code, g, spec, depth).run()


class _Engine:
    def __init__(self, code: CodeModel, g: CallGraph, spec: TaintSpec, depth: int):
        self.code = code
        self.g = g
        self.spec = spec
        self.depth = depth
        self.summaries: dict[str, Summary] = {}
        self.field_store: dict[str, set[SrcToken]] = {}

    def run(self) -> list[LeakFinding]:
        methods = [m for m in self.code.all_methods() if m.is_concrete]
        order = self._bottom_up_order(methods)

        for _ in range(SUMMARY_ITERATIONS):
            changed = False
            for m in order:
                summary, field_writes, _ = self._analyze(m, symbolic=True)
                if self.summaries.get(m.key) != summary:
                    self.summaries[m.key] = summary
                    changed = True
                for fk, tokens in field_writes.items():
                    bucket = self.field_store.setdefault(fk, set())
                    if not tokens <= bucket:
                        bucket.update(tokens)
                        changed = True
            if not changed:
                break

        findings: dict[tuple, LeakFinding] = {}
        for m in order:
            _, _, found = self._analyze(m, symbolic=False)
            for f in found:
                findings.setdefault((f.source, f.sink, f.source_site, f.sink_site), f)
        return sorted(findings.values(), key=LeakFinding.sort_key)

    def _bottom_up_order(self, methods: list[DexMethod]) -> list[DexMethod]:
        """Callees before callers (DFS postorder; cycles broken arbitrarily)."""
        index = {m.key: m for m in methods}
        seen: set[str] = set()
        order: list[DexMethod] = []

        def visit(key: str) -> None:
            seen.add(key)
            for callee in sorted(self.g.callees(key)):
                if callee in index and callee not in seen:
                    visit(callee)
            order.append(index[key])

        for key in sorted(index):
            if key not in seen:
                visit(key)
        return order

    def _analyze(self, m: DexMethod, symbolic: bool):
        regs: dict[int, frozenset] = {}
        if symbolic:
            base = m.registers - m.ins
            for i in range(m.ins):
                regs[base + i] = frozenset({ParamToken(i)})

        pending: frozenset = frozenset()
        ret_params: set[int] = set()
        ret_sources: set[SrcToken] = set()
        sink_hits: set[SinkHit] = set()
        param_fields: set[tuple[int, str]] = set()
        field_writes: dict[str, set[SrcToken]] = {}
        findings: list[LeakFinding] = []

        def get(r: int) -> frozenset:
            return regs.get(r, frozenset())

        for ins in m.instructions:
            op = ins.mnemonic
            if ins.opaque:
                continue
            if op.startswith("move-result"):
                regs[ins.registers[0]] = pending
                pending = frozenset()
            elif op == "move-exception":
                regs[ins.registers[0]] = frozenset()
            elif op.startswith("move"):
                regs[ins.registers[0]] = get(ins.registers[1])
            elif op.startswith("const") or op in ("new-instance", "new-array"):
                regs[ins.registers[0]] = frozenset()
            elif op.startswith("return") and op != "return-void":
                for t in get(ins.registers[0]):
                    if isinstance(t, ParamToken):
                        ret_params.add(t.index)
                    else:
                        ret_sources.add(t)
            elif op.startswith("aget"):
                regs[ins.registers[0]] = get(ins.registers[1])
            elif op.startswith("aput"):
                regs[ins.registers[1]] = get(ins.registers[1]) | get(ins.registers[0])
            elif op.startswith(("iget", "sget")):
                fk = ins.resolved_ref
                stored = self.field_store.get(fk, set()) if fk else set()
                regs[ins.registers[0]] = frozenset(self._rebase(t, m.key) for t in stored)
            elif op.startswith(("iput", "sput")):
                fk = ins.resolved_ref
                if fk:
                    for t in get(ins.registers[0]):
                        if isinstance(t, ParamToken):
                            param_fields.add((t.index, fk))
                        else:
                            field_writes.setdefault(fk, set()).add(t)
            elif ins.is_invoke and ins.resolved_ref is not None:
                pending = self._invoke(
                    m, ins, regs, get, symbolic, sink_hits, param_fields, field_writes, findings
                )
            elif op == "filled-new-array" or op == "filled-new-array/range":
                pending = frozenset().union(*(get(r) for r in ins.registers)) if ins.registers else frozenset()
            elif op == "array-length" or op == "check-cast":
                if op == "array-length":
                    regs[ins.registers[0]] = get(ins.registers[1])
            elif op == "instance-of":
                regs[ins.registers[0]] = frozenset()
            elif _is_binop(op):
                if op.endswith("/2addr"):
                    regs[ins.registers[0]] = get(ins.registers[0]) | get(ins.registers[1])
                elif "lit" in op:
                    regs[ins.registers[0]] = get(ins.registers[1])
                else:
                    regs[ins.registers[0]] = get(ins.registers[1]) | get(ins.registers[2])
            elif op.startswith("cmp"):
                regs[ins.registers[0]] = get(ins.registers[1]) | get(ins.registers[2])
            elif _is_unop(op):
                regs[ins.registers[0]] = get(ins.registers[1])
            # branches, switches, throw, monitor, nop: no register effect

        summary = Summary(
            ret_params=frozenset(ret_params),
            ret_sources=frozenset(ret_sources),
            sink_hits=frozenset(sink_hits),
            param_fields=tuple(sorted(param_fields)),
        )
        return summary, field_writes, findings

    def _invoke(self, m, ins, regs, get, symbolic, sink_hits, param_fields, field_writes, findings):
        target = ins.resolved_ref
        arg_tokens = [get(r) for r in ins.registers]
        all_tokens = frozenset().union(*arg_tokens) if arg_tokens else frozenset()
        result: set = set()

        channel = self.spec.match_sink(target)
        if channel is not None:
            for i, tokens in enumerate(arg_tokens):
                for t in tokens:
                    if isinstance(t, SrcToken):
                        findings.append(self._finding(t, target, channel, (m.key, ins.offset), t.path))
                    elif symbolic:
                        sink_hits.add(
                            SinkHit(t.index, target, channel, (m.key, ins.offset), (m.key,))
                        )

        callee_summary = self.summaries.get(target) if self.depth >= 1 else None
        if callee_summary is not None:
            for hit in callee_summary.sink_hits:
                suffix = (m.key,) + hit.suffix
                if len(suffix) - 1 > self.depth:
                    continue
                if hit.param < len(arg_tokens):
                    for t in arg_tokens[hit.param]:
                        if isinstance(t, SrcToken):
                            full = t.path + hit.suffix
                            if len(full) - 1 <= self.depth:
                                findings.append(
                                    self._finding(t, hit.sink, hit.channel, hit.site, full)
                                )
                        elif symbolic:
                            sink_hits.add(replace_hit(hit, t.index, suffix))
            for i in callee_summary.ret_params:
                if i < len(arg_tokens):
                    result |= arg_tokens[i]
            for t in callee_summary.ret_sources:
                ext = t.path + (m.key,)
                if len(ext) - 1 <= self.depth:
                    result.add(t._replace(path=ext))
            for i, fk in callee_summary.param_fields:
                if i < len(arg_tokens):
                    for t in arg_tokens[i]:
                        if isinstance(t, ParamToken):
                            if symbolic:
                                param_fields.add((t.index, fk))
                        else:
                            field_writes.setdefault(fk, set()).add(t)
        elif all_tokens:
            # opaque callee: arguments may flow into the result
            result |= all_tokens

        label = self.spec.match_source(target)
        if label is not None:
            result.add(SrcToken(source=target, label=label, site=(m.key, ins.offset), path=(m.key,)))

        # builder-style writes: a tainted argument taints the receiver
        if not ins.mnemonic.startswith(("invoke-static", "invoke-custom")) and len(ins.registers) > 1:
            extra = frozenset().union(*arg_tokens[1:])
            if extra:
                recv = ins.registers[0]
                regs[recv] = get(recv) | extra

        return frozenset(result)

    def _finding(self, t: SrcToken, sink: str, channel: str, sink_site, path) -> LeakFinding:
        return LeakFinding(
            source=t.source,
            sink=sink,
            channel=channel,
            source_site=t.site,
            sink_site=sink_site,
            path=tuple(path),
            data_kind=t.label,
        )

    @staticmethod
    def _rebase(t: SrcToken, method_key: str) -> SrcToken:
        if t.path and t.path[-1] == method_key:
            return t
        return t._replace(path=t.path + (method_key,))


def replace_hit(hit: SinkHit, param: int, suffix: tuple[str, ...]) -> SinkHit:
    return SinkHit(param, hit.sink, hit.channel, hit.site, suffix)


_BINOP_ROOTS = ("add-", "sub-", "rsub-", "mul-", "div-", "rem-", "and-", "or-", "xor-", "shl-", "shr-", "ushr-")
_UNOP_ROOTS = ("neg-", "not-", "int-to-", "long-to-", "float-to-", "double-to-")


def _is_binop(op: str) -> bool:
    return op.startswith(_BINOP_ROOTS)


def _is_unop(op: str) -> bool:
    return op.startswith(_UNOP_ROOTS)
