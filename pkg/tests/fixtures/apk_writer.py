"""Builds signed APK fixtures: zip packaging, v1 (PKCS#7) signing and a
synthetic v2 signing block spliced in front of the central directory."""

from __future__ import annotations

import struct
import zipfile
from datetime import datetime, timedelta, timezone
from pathlib import Path

from cryptography import x509
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import rsa
from cryptography.hazmat.primitives.serialization import pkcs7
from cryptography.x509.oid import NameOID

SIG_MAGIC = b"APK Sig Block 42"
V2_ID = 0x7109871A
V3_ID = 0xF05368C0

_cert_cache: dict[tuple, tuple] = {}


def make_cert(cn: str = "Test", org: str = "TestOrg") -> tuple:
    """Self-signed cert + key, cached because RSA keygen dominates runtime."""
    if (cn, org) not in _cert_cache:
        key = rsa.generate_private_key(public_exponent=65537, key_size=2048)
        name = x509.Name([
            x509.NameAttribute(NameOID.COMMON_NAME, cn),
            x509.NameAttribute(NameOID.ORGANIZATION_NAME, org),
        ])
        now = datetime(2020, 1, 1, tzinfo=timezone.utc)
        cert = (
            x509.CertificateBuilder()
            .subject_name(name)
            .issuer_name(name)
            .public_key(key.public_key())
            .serial_number(x509.random_serial_number())
            .not_valid_before(now)
            .not_valid_after(now + timedelta(days=365 * 30))
            .sign(key, hashes.SHA256())
        )
        _cert_cache[(cn, org)] = (cert, key)
    return _cert_cache[(cn, org)]


def build_apk(
    path,
    entries: dict[str, bytes],
    sign: str | None = "v1",
    cn: str = "Test",
    org: str = "TestOrg",
) -> Path:
    """Write a zip with the given entries; sign='v1' | 'v2' | None."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        for name, data in sorted(entries.items()):
            info = zipfile.ZipInfo(name, date_time=(2020, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, data)
        if sign == "v1":
            cert, key = make_cert(cn, org)
            manifest = _jar_manifest(entries)
            zf.writestr(zipfile.ZipInfo("META-INF/MANIFEST.MF", (2020, 1, 1, 0, 0, 0)), manifest)
            zf.writestr(zipfile.ZipInfo("META-INF/CERT.SF", (2020, 1, 1, 0, 0, 0)), manifest)
            blob = (
                pkcs7.PKCS7SignatureBuilder()
                .set_data(manifest)
                .add_signer(cert, key, hashes.SHA256())
                .sign(serialization.Encoding.DER, [pkcs7.PKCS7Options.DetachedSignature])
            )
            zf.writestr(zipfile.ZipInfo("META-INF/CERT.RSA", (2020, 1, 1, 0, 0, 0)), blob)
    if sign == "v2":
        cert, _key = make_cert(cn, org)
        _splice_signing_block(path, _v2_block(cert.public_bytes(serialization.Encoding.DER)))
    return path


def _jar_manifest(entries: dict[str, bytes]) -> bytes:
    import base64
    import hashlib

    lines = ["Manifest-Version: 1.0", ""]
    for name, data in sorted(entries.items()):
        digest = base64.b64encode(hashlib.sha256(data).digest()).decode()
        lines += [f"Name: {name}", f"SHA-256-Digest: {digest}", ""]
    return ("\r\n".join(lines) + "\r\n").encode()


def _lv(data: bytes) -> bytes:
    return struct.pack("<I", len(data)) + data


def _v2_block(cert_der: bytes, scheme_id: int = V2_ID) -> bytes:
    """Signing-block bytes holding one signer with one certificate.

    Digests/signatures are placeholders; only the nested length-prefixed
    structure and the certificate matter to consumers here.
    """
    digests = _lv(_lv(struct.pack("<I", 0x0103) + _lv(b"\x00" * 32)))
    certs = _lv(_lv(cert_der))
    signed_data = _lv(digests + certs + _lv(b""))  # + empty additional attrs
    signatures = _lv(_lv(struct.pack("<I", 0x0103) + _lv(b"\x00" * 64)))
    public_key = _lv(b"\x00" * 16)
    signer = _lv(signed_data + signatures + public_key)
    signers = _lv(signer)
    pair = struct.pack("<Q", 4 + len(signers)) + struct.pack("<I", scheme_id) + signers
    size = len(pair) + 8 + 16  # pairs + trailing size copy + magic
    return struct.pack("<Q", size) + pair + struct.pack("<Q", size) + SIG_MAGIC


def _splice_signing_block(path: Path, block: bytes) -> None:
    raw = bytearray(path.read_bytes())
    eocd = raw.rfind(b"PK\x05\x06")
    assert eocd >= 0
    cd_off = struct.unpack_from("<I", raw, eocd + 16)[0]
    struct.pack_into("<I", raw, eocd + 16, cd_off + len(block))
    path.write_bytes(bytes(raw[:cd_off]) + block + bytes(raw[cd_off:]))
