"""Exception hierarchy shared by all analysis modules."""


class ApkAuditError(Exception):
    """Base class for everything raised by this package."""


class NotAZipError(ApkAuditError):
    """File is not a ZIP container (bad magic / no central directory)."""


class EntryMissingError(ApkAuditError):
    """Requested entry name not present in the archive."""


class CrcMismatchError(ApkAuditError):
    """Entry decompressed but its CRC-32 does not match the directory record."""


class MalformedSigningBlockError(ApkAuditError):
    """APK Signing Block present but structurally broken (non-fatal: warning)."""


class AxmlError(ApkAuditError):
    """Base for binary-XML decode failures."""


class TruncatedChunkError(AxmlError):
    pass


class BadStringPoolError(AxmlError):
    pass


class MissingPackageError(ApkAuditError):
    """Manifest root lacks the mandatory package attribute."""


class DexError(ApkAuditError):
    """Base for DEX parse failures."""


class NoDexEntryError(DexError):
    pass


class DexMagicError(DexError):
    pass


class UnknownMethodError(DexError):
    pass


class AbstractMethodError(DexError):
    """Method exists but has no code item (abstract or native)."""


class RuleSchemaError(ApkAuditError):
    """Behavior rules file violates the expected JSON schema."""


class TaintSpecError(ApkAuditError):
    """Source/sink list empty or unusable."""


class BridgeError(ApkAuditError):
    """Device bridge command failed (no device, unauthorized, ...)."""
