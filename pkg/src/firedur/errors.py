"""Exception hierarchy shared by all pipeline stages.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
anything else -> 3.
"""


class FiredurError(Exception):
    """Base class for every error this package raises deliberately."""


class ConfigError(FiredurError):
    """Bad run configuration or command-line usage."""


class DataError(FiredurError):
    """Input data violates a documented contract."""


# --- ingest ---------------------------------------------------------------

class MissingColumn(DataError):
    def __init__(self, name):
        super().__init__(f"required column missing: {name}")
        self.name = name


class MalformedCsv(DataError):
    def __init__(self, line, detail=""):
        msg = f"malformed CSV row at line {line}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.line = line


class DuplicateCode(DataError):
    def __init__(self, category, code):
        super().__init__(f"duplicate code {code!r} in category {category}")
        self.category = category
        self.code = code


class EmptyCategory(DataError):
    def __init__(self, category):
        super().__init__(f"dictionary category {category} is empty or missing")
        self.category = category


class ParseError(DataError):
    def __init__(self, position, detail=""):
        msg = f"geometry parse error at position {position}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.position = position


class UnsupportedGeometry(DataError):
    def __init__(self, kind):
        super().__init__(f"unsupported geometry kind: {kind}")
        self.kind = kind


class BadMagic(DataError):
    def __init__(self, detail="bad file signature"):
        super().__init__(detail)


class UnsupportedShapeType(DataError):
    def __init__(self, code):
        super().__init__(f"unsupported shape type: {code}")
        self.code = code


class RecordCountMismatch(DataError):
    def __init__(self, shp_count, dbf_count):
        super().__init__(
            f".shp has {shp_count} records but .dbf has {dbf_count}")
        self.shp_count = shp_count
        self.dbf_count = dbf_count


class DegenerateGeometry(DataError):
    def __init__(self, detail="geometry has no usable vertices"):
        super().__init__(detail)


class UnknownCode(DataError):
    def __init__(self, category, code):
        super().__init__(f"code {code!r} not present in category {category}")
        self.category = category
        self.code = code


# --- clean ----------------------------------------------------------------

class UnparseableDate(DataError):
    def __init__(self, text):
        super().__init__(f"unparseable date: {text!r}")
        self.text = text


class NegativeDuration(DataError):
    def __init__(self, alarm, cont):
        super().__init__(f"containment {cont} precedes alarm {alarm}")


class EmptyDataset(DataError):
    def __init__(self, detail="dataset is empty"):
        super().__init__(detail)


# --- features -------------------------------------------------------------

class UnknownColumn(DataError):
    def __init__(self, name):
        super().__init__(f"unknown feature column: {name}")
        self.name = name


class DegenerateSplit(DataError):
    def __init__(self, detail="temporal split left one side empty"):
        super().__init__(detail)


# --- models ---------------------------------------------------------------

class WidthMismatch(DataError):
    def __init__(self, expected, got):
        super().__init__(f"row width {got} does not match trained width {expected}")
        self.expected = expected
        self.got = got


class MissingValidation(DataError):
    def __init__(self):
        super().__init__("early stopping requires validation rows")


class CodeOutOfRange(DataError):
    def __init__(self, column, code, size):
        super().__init__(
            f"categorical code {code} out of range for column {column} (table size {size})")


class ShapeMismatch(DataError):
    def __init__(self, detail):
        super().__init__(detail)


# --- evaluation -----------------------------------------------------------

class LengthMismatch(DataError):
    def __init__(self, n_true, n_pred):
        super().__init__(f"length mismatch: {n_true} true vs {n_pred} predicted")


class TooFewRows(DataError):
    def __init__(self, n, k):
        super().__init__(f"cannot build {k} folds from {n} rows")
