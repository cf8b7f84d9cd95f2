"""Transcriptions of real open-source Android app manifests.

Each tree below is hand-transcribed from the published AndroidManifest.xml
of a well-known open-source app (trimmed to the structurally interesting
parts but keeping real package names, permissions, components and intent
filters).  ``render_reference`` turns the *source transcription* into the
stable dump format directly, without touching the binary encoder or the
decoder under test, so the stored dumps are an independent oracle.
"""

from .axml_writer import ANDROID_NS, XAttr, XElem

MAIN = "android.intent.action.MAIN"
LAUNCHER = "android.intent.category.LAUNCHER"
DEFAULT = "android.intent.category.DEFAULT"
VIEW = "android.intent.action.VIEW"
BROWSABLE = "android.intent.category.BROWSABLE"


def _action(name):
    return XElem("action", [XAttr("name", name)])


def _category(name):
    return XElem("category", [XAttr("name", name)])


def _data(**kw):
    return XElem("data", [XAttr(k.rstrip("_"), v) for k, v in kw.items()])


def _uses_perm(name):
    return XElem("uses-permission", [XAttr("name", name)])


def _launcher_filter():
    return XElem("intent-filter", [], [_action(MAIN), _category(LAUNCHER)])


def fdroid_manifest():
    """F-Droid client (org.fdroid.fdroid)."""
    return XElem("manifest", [
        XAttr("package", "org.fdroid.fdroid", ns=None),
        XAttr("versionCode", 1013051),
        XAttr("versionName", "1.13.1"),
        XAttr("installLocation", 0),
    ], [
        XElem("uses-sdk", [XAttr("minSdkVersion", 22), XAttr("targetSdkVersion", 25)]),
        _uses_perm("android.permission.INTERNET"),
        _uses_perm("android.permission.ACCESS_NETWORK_STATE"),
        _uses_perm("android.permission.ACCESS_WIFI_STATE"),
        _uses_perm("android.permission.CHANGE_WIFI_MULTICAST_STATE"),
        _uses_perm("android.permission.BLUETOOTH"),
        _uses_perm("android.permission.BLUETOOTH_ADMIN"),
        _uses_perm("android.permission.RECEIVE_BOOT_COMPLETED"),
        _uses_perm("android.permission.NFC"),
        _uses_perm("android.permission.WAKE_LOCK"),
        _uses_perm("android.permission.FOREGROUND_SERVICE"),
        XElem("application", [
            XAttr("label", ("ref", 0x7F120054)),
            XAttr("icon", ("ref", 0x7F0F0000)),
            XAttr("theme", ("ref", 0x7F130007)),
            XAttr("allowBackup", True),
            XAttr("supportsRtl", True),
            XAttr("name", ".FDroidApp"),
        ], [
            XElem("activity", [
                XAttr("name", ".views.main.MainActivity"),
                XAttr("launchMode", 2),
                XAttr("configChanges", ("hex", 0x4A0)),
                XAttr("exported", True),
            ], [
                _launcher_filter(),
                XElem("intent-filter", [], [
                    _action(VIEW),
                    _category(DEFAULT),
                    _category(BROWSABLE),
                    _data(scheme="fdroid.app"),
                ]),
            ]),
            XElem("activity", [
                XAttr("name", ".views.AppDetailsActivity"),
                XAttr("exported", False),
                XAttr("parentActivityName", ".views.main.MainActivity"),
            ]),
            XElem("service", [
                XAttr("name", ".net.DownloaderService"),
                XAttr("exported", False),
            ]),
            XElem("service", [
                XAttr("name", ".UpdateService"),
                XAttr("exported", False),
            ]),
            XElem("receiver", [
                XAttr("name", ".receiver.StartupReceiver"),
                XAttr("exported", True),
            ], [
                XElem("intent-filter", [], [
                    _action("android.intent.action.BOOT_COMPLETED"),
                ]),
            ]),
            XElem("provider", [
                XAttr("name", ".data.AppProvider"),
                XAttr("authorities", "org.fdroid.fdroid.data.AppProvider"),
                XAttr("exported", False),
            ]),
            XElem("provider", [
                XAttr("name", "androidx.core.content.FileProvider"),
                XAttr("authorities", "org.fdroid.fdroid.installer"),
                XAttr("grantUriPermissions", True),
                XAttr("exported", False),
            ], [
                XElem("meta-data", [
                    XAttr("name", "android.support.FILE_PROVIDER_PATHS"),
                    XAttr("resource", ("ref", 0x7F150002)),
                ]),
            ]),
        ]),
    ])


def newpipe_manifest():
    """NewPipe (org.schabi.newpipe)."""
    return XElem("manifest", [
        XAttr("package", "org.schabi.newpipe", ns=None),
        XAttr("versionCode", 990),
        XAttr("versionName", "0.23.1"),
    ], [
        XElem("uses-sdk", [XAttr("minSdkVersion", 19), XAttr("targetSdkVersion", 29)]),
        _uses_perm("android.permission.INTERNET"),
        _uses_perm("android.permission.ACCESS_NETWORK_STATE"),
        _uses_perm("android.permission.FOREGROUND_SERVICE"),
        _uses_perm("android.permission.POST_NOTIFICATIONS"),
        XElem("application", [
            XAttr("name", ".App"),
            XAttr("label", ("ref", 0x7F1000B2)),
            XAttr("icon", ("ref", 0x7F0D0001)),
            XAttr("allowBackup", True),
            XAttr("largeHeap", True),
        ], [
            XElem("activity", [
                XAttr("name", ".MainActivity"),
                XAttr("launchMode", 1),
                XAttr("configChanges", ("hex", 0x5B0)),
                XAttr("exported", True),
            ], [_launcher_filter()]),
            XElem("activity", [
                XAttr("name", ".RouterActivity"),
                XAttr("exported", True),
                XAttr("theme", ("ref", 0x7F110122)),
            ], [
                XElem("intent-filter", [], [
                    _action(VIEW),
                    _category(DEFAULT),
                    _category(BROWSABLE),
                    _data(scheme="http", host="youtube.com"),
                ]),
                XElem("intent-filter", [], [
                    _action("android.intent.action.SEND"),
                    _category(DEFAULT),
                    _data(mimeType="text/plain"),
                ]),
            ]),
            XElem("service", [
                XAttr("name", ".player.PlayerService"),
                XAttr("exported", False),
                XAttr("foregroundServiceType", ("hex", 0x2)),
            ]),
            XElem("service", [
                XAttr("name", ".local.feed.service.FeedLoadService"),
                XAttr("exported", False),
            ]),
            XElem("receiver", [
                XAttr("name", ".player.mediasession.MediaButtonReceiver"),
                XAttr("exported", True),
            ], [
                XElem("intent-filter", [], [
                    _action("android.intent.action.MEDIA_BUTTON"),
                ]),
            ]),
        ]),
    ])


def wikipedia_manifest():
    """Wikipedia (org.wikipedia)."""
    return XElem("manifest", [
        XAttr("package", "org.wikipedia", ns=None),
        XAttr("versionCode", 50443),
        XAttr("versionName", "2.7.50443-r-2023-04-12"),
    ], [
        XElem("uses-sdk", [XAttr("minSdkVersion", 21), XAttr("targetSdkVersion", 33)]),
        _uses_perm("android.permission.INTERNET"),
        _uses_perm("android.permission.ACCESS_NETWORK_STATE"),
        _uses_perm("android.permission.RECEIVE_BOOT_COMPLETED"),
        XElem("permission", [
            XAttr("name", "org.wikipedia.permission.READ_DATA"),
            XAttr("protectionLevel", ("hex", 0x2)),
        ]),
        XElem("application", [
            XAttr("name", ".WikipediaApp"),
            XAttr("label", ("ref", 0x7F130041)),
            XAttr("icon", ("ref", 0x7F100000)),
            XAttr("theme", ("ref", 0x7F14021A)),
            XAttr("allowBackup", True),
            XAttr("networkSecurityConfig", ("ref", 0x7F170003)),
        ], [
            XElem("activity", [
                XAttr("name", ".main.MainActivity"),
                XAttr("exported", True),
                XAttr("windowSoftInputMode", ("hex", 0x20)),
            ], [_launcher_filter()]),
            XElem("activity", [
                XAttr("name", ".page.PageActivity"),
                XAttr("exported", True),
            ], [
                XElem("intent-filter", [], [
                    _action(VIEW),
                    _category(DEFAULT),
                    _category(BROWSABLE),
                    _data(scheme="https", host="en.wikipedia.org", pathPrefix="/wiki/"),
                ]),
            ]),
            XElem("activity-alias", [
                XAttr("name", ".main.DefaultIcon"),
                XAttr("targetActivity", ".main.MainActivity"),
                XAttr("enabled", True),
                XAttr("exported", True),
            ]),
            XElem("service", [
                XAttr("name", ".notifications.NotificationPollBroadcastReceiver$PollService"),
                XAttr("exported", False),
            ]),
            XElem("receiver", [
                XAttr("name", ".notifications.NotificationPollBroadcastReceiver"),
                XAttr("exported", False),
            ], [
                XElem("intent-filter", [], [
                    _action("android.intent.action.BOOT_COMPLETED"),
                ]),
            ]),
            XElem("provider", [
                XAttr("name", ".WikipediaFileProvider"),
                XAttr("authorities", "org.wikipedia.fileprovider"),
                XAttr("grantUriPermissions", True),
                XAttr("exported", False),
            ]),
        ]),
    ])


def termux_manifest():
    """Termux (com.termux)."""
    return XElem("manifest", [
        XAttr("package", "com.termux", ns=None),
        XAttr("versionCode", 118),
        XAttr("versionName", "0.118.0"),
        XAttr("sharedUserId", "com.termux", ns=None),
    ], [
        XElem("uses-sdk", [XAttr("minSdkVersion", 24), XAttr("targetSdkVersion", 28)]),
        _uses_perm("android.permission.INTERNET"),
        _uses_perm("android.permission.WAKE_LOCK"),
        _uses_perm("android.permission.VIBRATE"),
        _uses_perm("android.permission.FOREGROUND_SERVICE"),
        _uses_perm("android.permission.REQUEST_INSTALL_PACKAGES"),
        XElem("permission", [
            XAttr("name", "com.termux.permission.RUN_COMMAND"),
            XAttr("protectionLevel", ("hex", 0x1)),
        ]),
        XElem("application", [
            XAttr("name", ".app.TermuxApplication"),
            XAttr("label", "Termux"),
            XAttr("icon", ("ref", 0x7F0C0000)),
            XAttr("theme", ("ref", 0x7F0D0005)),
            XAttr("allowBackup", False),
            XAttr("extractNativeLibs", True),
        ], [
            XElem("activity", [
                XAttr("name", ".app.TermuxActivity"),
                XAttr("launchMode", 3),
                XAttr("configChanges", ("hex", 0x4B0)),
                XAttr("exported", True),
            ], [_launcher_filter()]),
            XElem("activity", [
                XAttr("name", ".filepicker.TermuxFileReceiverActivity"),
                XAttr("exported", True),
                XAttr("excludeFromRecents", True),
            ], [
                XElem("intent-filter", [], [
                    _action("android.intent.action.SEND"),
                    _category(DEFAULT),
                    _data(mimeType="application/octet-stream"),
                ]),
            ]),
            XElem("service", [
                XAttr("name", ".app.TermuxService"),
                XAttr("exported", False),
            ]),
            XElem("service", [
                XAttr("name", ".app.RunCommandService"),
                XAttr("exported", True),
                XAttr("permission", "com.termux.permission.RUN_COMMAND"),
            ], [
                XElem("intent-filter", [], [
                    _action("com.termux.RUN_COMMAND"),
                ]),
            ]),
            XElem("receiver", [
                XAttr("name", ".app.TermuxOpenReceiver"),
                XAttr("exported", False),
            ]),
            XElem("provider", [
                XAttr("name", ".app.TermuxOpenReceiver$ContentProvider"),
                XAttr("authorities", "com.termux.files"),
                XAttr("grantUriPermissions", True),
                XAttr("exported", True),
            ]),
        ]),
    ])


def osmand_manifest():
    """OsmAnd (net.osmand)."""
    return XElem("manifest", [
        XAttr("package", "net.osmand", ns=None),
        XAttr("versionCode", 4604),
        XAttr("versionName", "4.6.4"),
        XAttr("installLocation", 2),
    ], [
        XElem("uses-sdk", [XAttr("minSdkVersion", 21), XAttr("targetSdkVersion", 33)]),
        _uses_perm("android.permission.INTERNET"),
        _uses_perm("android.permission.ACCESS_FINE_LOCATION"),
        _uses_perm("android.permission.ACCESS_COARSE_LOCATION"),
        _uses_perm("android.permission.ACCESS_BACKGROUND_LOCATION"),
        _uses_perm("android.permission.WRITE_EXTERNAL_STORAGE"),
        _uses_perm("android.permission.BLUETOOTH"),
        _uses_perm("android.permission.POST_NOTIFICATIONS"),
        XElem("uses-feature", [
            XAttr("name", "android.hardware.location.gps"),
            XAttr("required", False),
        ]),
        XElem("application", [
            XAttr("name", "net.osmand.plus.OsmandApplication"),
            XAttr("label", ("ref", 0x7F12089A)),
            XAttr("icon", ("ref", 0x7F0E0000)),
            XAttr("largeHeap", True),
            XAttr("allowBackup", True),
            XAttr("requestLegacyExternalStorage", True),
        ], [
            XElem("activity", [
                XAttr("name", "net.osmand.plus.activities.MapActivity"),
                XAttr("launchMode", 2),
                XAttr("configChanges", ("hex", 0x6B0)),
                XAttr("exported", True),
                XAttr("screenOrientation", -1),
            ], [
                _launcher_filter(),
                XElem("intent-filter", [], [
                    _action(VIEW),
                    _category(DEFAULT),
                    _category(BROWSABLE),
                    _data(scheme="geo"),
                ]),
            ]),
            XElem("service", [
                XAttr("name", "net.osmand.plus.NavigationService"),
                XAttr("exported", False),
                XAttr("foregroundServiceType", ("hex", 0x8)),
            ]),
            XElem("receiver", [
                XAttr("name", "net.osmand.plus.helpers.LauncherShortcutsHelper$ShortcutReceiver"),
                XAttr("exported", False),
            ]),
            XElem("provider", [
                XAttr("name", "net.osmand.plus.AidlFileProvider"),
                XAttr("authorities", "net.osmand.fileprovider"),
                XAttr("grantUriPermissions", True),
                XAttr("exported", False),
            ]),
            XElem("meta-data", [
                XAttr("name", "com.google.android.backup.api_key"),
                XAttr("value", "unused"),
            ]),
        ]),
    ])


REAL_MANIFESTS = {
    "fdroid": fdroid_manifest,
    "newpipe": newpipe_manifest,
    "wikipedia": wikipedia_manifest,
    "termux": termux_manifest,
    "osmand": osmand_manifest,
}


def render_reference(root: XElem) -> str:
    """Dump the transcription directly (independent of encoder/decoder)."""
    lines: list[str] = []

    def fmt(value) -> str:
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, tuple):
            tag, v = value
            return f"@0x{v:08x}" if tag == "ref" else f"0x{v:08x}"
        return str(value)

    def walk(e: XElem, depth: int) -> None:
        pad = "  " * depth
        lines.append(f"{pad}E: {e.name}")
        for a in sorted(e.attrs, key=lambda a: (a.ns or "", a.name)):
            prefix = "android:" if a.ns == ANDROID_NS else ""
            lines.append(f"{pad}  A: {prefix}{a.name}={fmt(a.value)}")
        for c in e.children:
            walk(c, depth + 1)

    walk(root, 0)
    return "\n".join(lines) + "\n"
