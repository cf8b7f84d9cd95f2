"""Static-analysis toolkit for auditing pre-installed Android packages."""

__version__ = "0.1.0"

from .container import ApkArtifact, open_apk, read_entry  # noqa: F401
from .report import AnalysisConfig, AppReport, analyze_apk  # noqa: F401
