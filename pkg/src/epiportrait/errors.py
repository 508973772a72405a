"""Exception types shared across the pipeline."""


class EpiPortraitError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(EpiPortraitError):
    """Fatal input-format problem (missing header, duplicate code, bad geometry).

    Parsers raise this instead of quarantining when the whole file is suspect.
    """


class UnknownCodeError(EpiPortraitError, KeyError):
    """A community/body code that does not resolve."""

    def __init__(self, code):
        super().__init__(code)
        self.code = code

    def __str__(self):
        return f"unknown code: {self.code!r}"


class DegenerateCategoryError(EpiPortraitError):
    """An RNA category whose maximum is zero: arc angles are undefined."""

    def __init__(self, category):
        super().__init__(category)
        self.category = category

    def __str__(self):
        return f"category {self.category!r} is empty (max value 0); arc angle undefined"


class ZeroPopulationError(EpiPortraitError):
    """Per-10k rescaling requested for a community with zero population."""

    def __init__(self, code):
        super().__init__(code)
        self.code = code

    def __str__(self):
        return f"community {self.code!r} has zero population; per-10k mode impossible"


class LayoutAreaError(EpiPortraitError):
    """Viewport too small for the requested bodies."""

    def __init__(self, total_disc_area, viewport_area, suggested_scale):
        self.total_disc_area = total_disc_area
        self.viewport_area = viewport_area
        self.suggested_scale = suggested_scale
        super().__init__(
            f"total disc area {total_disc_area:.1f} exceeds 70% of viewport "
            f"area {viewport_area:.1f}; zoom out by at least x{suggested_scale:.2f}"
        )
