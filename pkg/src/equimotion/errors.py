"""Exception hierarchy shared across the package.

Each class carries the process exit code used by the CLI: 2 usage,
3 data, 4 no-ROI, 5 model artifact.
"""


class EquimotionError(Exception):
    exit_code = 1


class UsageError(EquimotionError):
    exit_code = 2


class DataError(EquimotionError):
    """Malformed manifest, image, label or split input."""

    exit_code = 3


class NoRoiError(EquimotionError):
    """The detector produced no detection above its score threshold."""

    exit_code = 4


class ModelError(EquimotionError):
    """Model artifact missing, corrupt, or format-incompatible."""

    exit_code = 5
