"""
Errors raised by the evaluation pipeline.

Every error derives from ReclensError so that management commands and views
can turn them into a single user-facing message.
"""


class ReclensError(Exception):
    """Base class for all reclens errors."""


class LogIOError(ReclensError):
    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = str(reason)
        super().__init__(f"cannot read {self.path}: {self.reason}")


class MalformedRecord(ReclensError):
    def __init__(self, line_no, reason):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class DuplicateHitId(ReclensError):
    def __init__(self, hit_id, line_no=None):
        self.hit_id = hit_id
        self.line_no = line_no
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(f"duplicate hit_id {hit_id!r}{where}")


class EmptyDenominator(ReclensError):
    """A rate was requested over zero trials."""


class EmptyPopulation(ReclensError):
    """No customer received a recommendation."""


class InvalidSample(ReclensError):
    """A sample summary violates n >= 2, 0 <= mean <= 1 or sd >= 0."""


class DegenerateVariance(ReclensError):
    """A test statistic has a zero variance term."""


class ConstantSeries(ReclensError):
    """A correlation input has zero variance."""


class LengthMismatch(ReclensError):
    """Paired inputs differ in length or are too short."""


class SeriesMismatch(ReclensError):
    """Daily series do not share one date axis."""


class InvalidConfig(ReclensError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = {"__all__": [errors]}
        self.errors = dict(errors)
        parts = []
        for field, messages in self.errors.items():
            text = "; ".join(str(m) for m in messages)
            parts.append(text if field == "__all__" else f"{field}: {text}")
        super().__init__(", ".join(parts) or "invalid configuration")
