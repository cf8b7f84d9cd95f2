"""DEX file parser and multi-DEX merge.

Reads the published little-endian DEX layout (versions 035-041), decodes
method bodies into instruction streams, and merges classesN.dex files into
one :class:`CodeModel`.  Unknown opcodes are kept opaque at their correct
width so the stream never desynchronizes.
"""

from __future__ import annotations

import logging
import re
import struct
import zlib

from ..container import ApkArtifact, read_entry
from ..errors import AbstractMethodError, DexMagicError, NoDexEntryError, UnknownMethodError
from . import opcodes as op
from .model import (
    CodeModel,
    DexClass,
    DexMethod,
    Instruction,
    format_field_key,
    format_method_key,
)

log = logging.getLogger(__name__)

NO_INDEX = 0xFFFFFFFF
_DEX_NAME = re.compile(r"^classes([2-9][0-9]*)?\.dex$")
_MAGIC = re.compile(rb"^dex\n03[5-9]\x00|^dex\n04[01]\x00")


def load_app_code(a: ApkArtifact) -> CodeModel:
    """Parse and merge every classesN.dex entry of the artifact."""
    names = sorted(
        (n for n in a.entry_names() if _DEX_NAME.match(n)),
        key=lambda n: int(_DEX_NAME.match(n).group(1) or 1),
    )
    if not names:
        raise NoDexEntryError(f"{a.path}: no classes*.dex entry")
    model = CodeModel()
    for name in names:
        data = read_entry(a, name)
        parse_dex(data, into=model, origin=name)
        model.dex_count += 1
    return model


def parse_dex(data: bytes, into: CodeModel | None = None, origin: str = "classes.dex") -> CodeModel:
    model = into if into is not None else CodeModel()
    if into is None:
        model.dex_count = 1
    d = _DexReader(data, origin)
    d.check_header(model)
    d.load_pools()
    for cls in d.classes():
        model.add_class(cls)
    model.string_pool.update(d.strings)
    return model


class _DexReader:
    def __init__(self, data: bytes, origin: str):
        self.data = data
        self.origin = origin

    def u16(self, off):
        return struct.unpack_from("<H", self.data, off)[0]

    def u32(self, off):
        return struct.unpack_from("<I", self.data, off)[0]

    def check_header(self, model: CodeModel) -> None:
        if len(self.data) < 0x70 or not _MAGIC.match(self.data[:8]):
            raise DexMagicError(f"{self.origin}: bad DEX magic {self.data[:8]!r}")
        checksum = self.u32(8)
        actual = zlib.adler32(self.data[12:]) & 0xFFFFFFFF
        if checksum != actual:
            model.warnings.append(
                f"{self.origin}: adler32 checksum mismatch "
                f"(header 0x{checksum:08x}, actual 0x{actual:08x})"
            )

    def load_pools(self) -> None:
        d = self.data
        self.string_ids_size, self.string_ids_off = self.u32(0x38), self.u32(0x3C)
        self.type_ids_size, self.type_ids_off = self.u32(0x40), self.u32(0x44)
        self.proto_ids_size, self.proto_ids_off = self.u32(0x48), self.u32(0x4C)
        self.field_ids_size, self.field_ids_off = self.u32(0x50), self.u32(0x54)
        self.method_ids_size, self.method_ids_off = self.u32(0x58), self.u32(0x5C)
        self.class_defs_size, self.class_defs_off = self.u32(0x60), self.u32(0x64)

        self.strings = [
            self._string_data(self.u32(self.string_ids_off + 4 * i))
            for i in range(self.string_ids_size)
        ]
        self.types = [
            self.strings[self.u32(self.type_ids_off + 4 * i)] for i in range(self.type_ids_size)
        ]
        self.protos = []
        for i in range(self.proto_ids_size):
            off = self.proto_ids_off + 12 * i
            ret = self.types[self.u32(off + 4)]
            params_off = self.u32(off + 8)
            params = self._type_list(params_off) if params_off else ()
            self.protos.append((params, ret))
        self.fields = []
        for i in range(self.field_ids_size):
            off = self.field_ids_off + 8 * i
            self.fields.append(
                format_field_key(
                    self.types[self.u16(off)],
                    self.strings[self.u32(off + 4)],
                    self.types[self.u16(off + 2)],
                )
            )
        self.methods = []
        for i in range(self.method_ids_size):
            off = self.method_ids_off + 8 * i
            cls = self.types[self.u16(off)]
            params, ret = self.protos[self.u16(off + 2)]
            name = self.strings[self.u32(off + 4)]
            self.methods.append((format_method_key(cls, name, params, ret), cls, name, params, ret))

    def _type_list(self, off) -> tuple[str, ...]:
        size = self.u32(off)
        return tuple(self.types[self.u16(off + 4 + 2 * i)] for i in range(size))

    def _string_data(self, off: int) -> str:
        _n, off = _uleb128(self.data, off)
        end = self.data.index(b"\x00", off)
        return decode_mutf8(self.data[off:end])

    def classes(self):
        for i in range(self.class_defs_size):
            off = self.class_defs_off + 32 * i
            class_idx = self.u32(off)
            access = self.u32(off + 4)
            super_idx = self.u32(off + 8)
            interfaces_off = self.u32(off + 12)
            class_data_off = self.u32(off + 24)
            cls = DexClass(
                descriptor=self.types[class_idx],
                superclass=self.types[super_idx] if super_idx != NO_INDEX else None,
                interfaces=self._type_list(interfaces_off) if interfaces_off else (),
                access_flags=access,
            )
            if class_data_off:
                self._class_data(class_data_off, cls)
            yield cls

    def _class_data(self, off: int, cls: DexClass) -> None:
        data = self.data
        n_static, off = _uleb128(data, off)
        n_instance, off = _uleb128(data, off)
        n_direct, off = _uleb128(data, off)
        n_virtual, off = _uleb128(data, off)
        for _ in range(n_static + n_instance):
            _idx, off = _uleb128(data, off)
            _flags, off = _uleb128(data, off)
        # method_idx deltas restart at each of the two method lists
        off = self._method_list(data, off, n_direct, cls)
        off = self._method_list(data, off, n_virtual, cls)

    def _method_list(self, data: bytes, off: int, count: int, cls: DexClass) -> int:
        idx = 0
        for i in range(count):
            idx_diff, off = _uleb128(data, off)
            flags, off = _uleb128(data, off)
            code_off, off = _uleb128(data, off)
            idx = idx_diff if i == 0 else idx + idx_diff
            key, class_desc, name, params, ret = self.methods[idx]
            m = DexMethod(
                key=key,
                class_desc=class_desc,
                name=name,
                params=params,
                return_type=ret,
                access_flags=flags,
            )
            if code_off:
                self._code_item(code_off, m)
            cls.methods.append(m)
        return off

    def _code_item(self, off: int, m: DexMethod) -> None:
        m.registers = self.u16(off)
        m.ins = self.u16(off + 2)
        insns_size = self.u32(off + 12)
        insns_off = off + 16
        m.instructions = self._decode_insns(insns_off, insns_size)

    def _decode_insns(self, base: int, size: int) -> list[Instruction]:
        out: list[Instruction] = []
        pos = 0
        while pos < size:
            unit = self.u16(base + pos * 2)
            opcode = unit & 0xFF
            if opcode == 0x00 and unit != 0x0000:
                ins = self._payload(base, pos, unit)
            else:
                ins = self._decode_one(base, pos, opcode, unit)
            out.append(ins)
            pos += ins.width
        return out

    def _payload(self, base: int, pos: int, ident: int) -> Instruction:
        off = base + pos * 2
        if ident == op.PACKED_SWITCH_PAYLOAD:
            n = self.u16(off + 2)
            width = n * 2 + 4
            name = "packed-switch-payload"
        elif ident == op.SPARSE_SWITCH_PAYLOAD:
            n = self.u16(off + 2)
            width = n * 4 + 2
            name = "sparse-switch-payload"
        elif ident == op.FILL_ARRAY_PAYLOAD:
            elem = self.u16(off + 2)
            n = self.u32(off + 4)
            width = (elem * n + 1) // 2 + 4
            name = "fill-array-data-payload"
        else:
            width = 1
            name = f"unknown-payload-{ident:04x}"
        return Instruction(offset=pos, opcode=ident, mnemonic=name, width=width, opaque=True)

    def _decode_one(self, base: int, pos: int, opcode: int, unit: int) -> Instruction:
        name, fmt, ref_kind = op.OPCODES[opcode]
        width = op.FORMAT_WIDTH[fmt]
        off = base + pos * 2
        hi = (unit >> 8) & 0xFF
        regs: tuple[int, ...] = ()
        ref_index = None
        literal = None
        target = None

        if fmt in ("12x",):
            regs = (hi & 0xF, hi >> 4)
        elif fmt == "11n":
            regs = (hi & 0xF,)
            literal = _sign(hi >> 4, 4)
        elif fmt == "11x":
            regs = (hi,)
        elif fmt == "10t":
            target = pos + _sign(hi, 8)
        elif fmt == "20t":
            target = pos + _sign(self.u16(off + 2), 16)
        elif fmt == "22x":
            regs = (hi, self.u16(off + 2))
        elif fmt == "21t":
            regs = (hi,)
            target = pos + _sign(self.u16(off + 2), 16)
        elif fmt in ("21s", "21h"):
            regs = (hi,)
            literal = _sign(self.u16(off + 2), 16)
        elif fmt == "21c":
            regs = (hi,)
            ref_index = self.u16(off + 2)
        elif fmt == "23x":
            regs = (hi, self.data[off + 2], self.data[off + 3])
        elif fmt == "22b":
            regs = (hi, self.data[off + 2])
            literal = _sign(self.data[off + 3], 8)
        elif fmt == "22t":
            regs = (hi & 0xF, hi >> 4)
            target = pos + _sign(self.u16(off + 2), 16)
        elif fmt == "22s":
            regs = (hi & 0xF, hi >> 4)
            literal = _sign(self.u16(off + 2), 16)
        elif fmt == "22c":
            regs = (hi & 0xF, hi >> 4)
            ref_index = self.u16(off + 2)
        elif fmt == "30t":
            target = pos + _sign(self.u32(off + 2), 32)
        elif fmt == "32x":
            regs = (self.u16(off + 2), self.u16(off + 4))
        elif fmt == "31i":
            regs = (hi,)
            literal = _sign(self.u32(off + 2), 32)
        elif fmt == "31t":
            regs = (hi,)
            target = pos + _sign(self.u32(off + 2), 32)
        elif fmt == "31c":
            regs = (hi,)
            ref_index = self.u32(off + 2)
        elif fmt in ("35c", "45cc"):
            count = hi >> 4
            g = hi & 0xF
            ref_index = self.u16(off + 2)
            arg_unit = self.u16(off + 4)
            nibbles = (arg_unit & 0xF, (arg_unit >> 4) & 0xF, (arg_unit >> 8) & 0xF, (arg_unit >> 12) & 0xF, g)
            regs = nibbles[: min(count, 5)]
        elif fmt in ("3rc", "4rcc"):
            count = hi
            ref_index = self.u16(off + 2)
            first = self.u16(off + 4)
            regs = tuple(range(first, first + count))
        elif fmt == "51l":
            regs = (hi,)
            literal = _sign(
                self.u16(off + 2)
                | (self.u16(off + 4) << 16)
                | (self.u16(off + 6) << 32)
                | (self.u16(off + 8) << 48),
                64,
            )

        resolved = None
        if ref_index is not None and ref_kind != "none":
            try:
                if ref_kind == "string":
                    resolved = self.strings[ref_index]
                elif ref_kind == "type":
                    resolved = self.types[ref_index]
                elif ref_kind == "field":
                    resolved = self.fields[ref_index]
                elif ref_kind == "method":
                    resolved = self.methods[ref_index][0]
            except IndexError:
                resolved = None

        return Instruction(
            offset=pos,
            opcode=opcode,
            mnemonic=name,
            width=width,
            registers=regs,
            ref_kind=ref_kind if resolved is not None else ("none" if ref_index is None else ref_kind),
            resolved_ref=resolved,
            literal=literal,
            branch_target=target,
            opaque=name.startswith("unused-"),
        )


def method_body(model: CodeModel, key: str) -> list[Instruction]:
    """Instruction list of a concrete method."""
    m = model.method(key)
    if m is None:
        raise UnknownMethodError(key)
    if not m.is_concrete:
        raise AbstractMethodError(key)
    return m.instructions


def _uleb128(data: bytes, off: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        b = data[off]
        off += 1
        result |= (b & 0x7F) << shift
        if not b & 0x80:
            return result, off
        shift += 7


def _sign(value: int, bits: int) -> int:
    return value - (1 << bits) if value & (1 << (bits - 1)) else value


def decode_mutf8(raw: bytes) -> str:
    """Decode MUTF-8 (CESU-8 with 0xC0 0x80 for NUL), lossy on bad input."""
    try:
        s = raw.replace(b"\xc0\x80", b"\x00").decode("utf-8", errors="surrogatepass")
        # collapse CESU-8 surrogate pairs into real code points
        return s.encode("utf-16", "surrogatepass").decode("utf-16", errors="replace")
    except (UnicodeDecodeError, UnicodeEncodeError):
        log.warning("invalid MUTF-8 sequence, replacing")
        return raw.decode("utf-8", errors="replace")


def dump_method(model: CodeModel, key: str) -> str:
    """Stable textual listing of one method body (debug CLI)."""
    lines = [key]
    for ins in method_body(model, key):
        parts = [f"  {ins.offset:04x}: {ins.mnemonic}"]
        if ins.registers:
            parts.append(" " + ", ".join(f"v{r}" for r in ins.registers))
        if ins.resolved_ref is not None:
            parts.append(f" {ins.resolved_ref!r}" if ins.ref_kind == "string" else f" {ins.resolved_ref}")
        if ins.literal is not None:
            parts.append(f" #{ins.literal}")
        if ins.branch_target is not None:
            parts.append(f" -> {ins.branch_target:04x}")
        lines.append("".join(parts))
    return "\n".join(lines) + "\n"
