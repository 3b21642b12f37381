"""Exception hierarchy shared by the library and the CLI."""


class LabError(Exception):
    """Domain error: inputs are well formed but violate a precondition."""


class DimensionError(LabError, ValueError):
    pass


class OutsideEfficientMargin(LabError):
    """Raised when a computation needs every outer weight bounded away from zero."""


class InputFormatError(Exception):
    """Malformed file or field. Carries the offending file and field when known."""

    def __init__(self, message, path=None, field=None):
        self.path = path
        self.field = field
        where = ", ".join(s for s in (f"file={path}" if path else "", f"field={field}" if field else "") if s)
        super().__init__(f"{message} ({where})" if where else message)
