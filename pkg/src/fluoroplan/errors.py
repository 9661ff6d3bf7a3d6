"""Exception hierarchy shared by all fluoroplan modules.

Every error carries a machine-readable ``code`` (stable snake_case string)
so the service layer can put it on the wire unchanged, and the CLI can map
it to an exit code.
"""

from __future__ import annotations


class FluoroplanError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details


class ValidationError(FluoroplanError):
    """Input violates a documented invariant (bad field, bad value)."""

    code = "validation_error"


class ParseError(ValidationError):
    """File contents are not parseable (malformed JSON, bad structure)."""

    code = "parse_error"


class SchemaVersionError(ValidationError):
    """File carries an unknown "schema" version tag."""

    code = "schema_version_error"


class IoError(FluoroplanError):
    """Filesystem-level failure (missing file, unwritable path)."""

    code = "io_error"


class ImageError(IoError):
    """Image file unreadable or not 8/16-bit single-channel grayscale."""

    code = "image_error"


class DegenerateGeometry(FluoroplanError):
    """Geometry collapsed to something unusable (zero-length, zero-area)."""

    code = "degenerate_geometry"


class DegenerateProjection(DegenerateGeometry):
    """Screw endpoints project onto the same pixel (viewed end-on)."""

    code = "degenerate_projection"


class DegenerateTrim(DegenerateGeometry):
    """Disk trim consumes the entire bounding box."""

    code = "degenerate_trim"


class DegenerateScrew(DegenerateGeometry):
    """An edit or construction produced a zero-length screw axis."""

    code = "degenerate_screw"


class PadTooLarge(DegenerateGeometry):
    """Configured padding does not fit inside the (half) bounding box."""

    code = "pad_too_large"


class NoHit(FluoroplanError):
    """A click landed on no vertebra box / no screw glyph."""

    code = "no_hit"


class NoOverlap(FluoroplanError):
    """Adjacent boxes do not overlap vertically; no disk length available."""

    code = "no_overlap"


class UnpairedLabel(ValidationError):
    """A vertebra label is annotated in only one of the two views."""

    code = "unpaired_label"


class DuplicateLabel(ValidationError):
    """A vertebra label appears twice in the same view."""

    code = "duplicate_label"


class TooManyVertebrae(ValidationError):
    """More labeled vertebrae than a single fluoroscopic case supports."""

    code = "too_many_vertebrae"


class CatalogUnderflow(FluoroplanError):
    """Planned dimension is below the smallest catalog entry."""

    code = "catalog_underflow"


class InsufficientCorrespondences(ValidationError):
    """Fewer than two landmark pairs supplied to the discrepancy fit."""

    code = "insufficient_correspondences"


class DegenerateFit(ValidationError):
    """All lateral-view landmark values coincide; the fit is underdetermined."""

    code = "degenerate_fit"


class NonPositiveGain(ValidationError):
    """Discrepancy fit produced gain <= 0 (views vertically mirrored)."""

    code = "non_positive_gain"


class SpecError(ValidationError):
    """Phantom specification is internally inconsistent (geometry exceeds image)."""

    code = "spec_error"


class MissingTruth(ValidationError):
    """Plan references a screw absent from the ground-truth file."""

    code = "missing_truth"


class ServiceError(FluoroplanError):
    """Base for session/protocol-level errors."""

    code = "service_error"


class UnknownMessage(ServiceError):
    code = "unknown_message"


class UnknownSession(ServiceError):
    code = "unknown_session"


class UnknownScrew(ServiceError):
    code = "unknown_screw"


class UnknownLabel(ServiceError):
    code = "unknown_label"


class StaleRevision(ServiceError):
    """Client's expected_revision does not match the session revision."""

    code = "stale_revision"


class ForbiddenPath(ServiceError):
    """open_case path escapes the configured case root."""

    code = "forbidden_path"
