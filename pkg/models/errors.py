"""Error hierarchy shared by the pipeline and the CLI."""

from typing import Optional

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_STORAGE = 4
EXIT_BUSY = 5
EXIT_DOMAIN = 6

# Each error code maps onto exactly one exit code.
EXIT_CODES = {
    'MISSING_STAGE': EXIT_USAGE,
    'UNKNOWN_MEASURE': EXIT_USAGE,
    'UNKNOWN_LEVEL': EXIT_USAGE,
    'LEVEL_NOT_APPLICABLE': EXIT_USAGE,
    'NON_ADDITIVE_MEASURE': EXIT_USAGE,
    'UNKNOWN_KPI_IN_CONFIG': EXIT_USAGE,
    'BAD_OPTION': EXIT_USAGE,
    'MALFORMED_ROW': EXIT_INPUT,
    'OVERLAPPING_ZONES': EXIT_INPUT,
    'DUPLICATE_NAME': EXIT_INPUT,
    'DUPLICATE_SEQUENCE': EXIT_INPUT,
    'UNDECODABLE_INPUT': EXIT_INPUT,
    'BAD_HEADER': EXIT_INPUT,
    'INVALID_CONFIG': EXIT_INPUT,
    'NON_FINITE_COORDINATE': EXIT_INPUT,
    'STORAGE_FAILURE': EXIT_STORAGE,
    'WORKSPACE_BUSY': EXIT_BUSY,
    'UNRESOLVED_KEY': EXIT_DOMAIN,
    'UNKNOWN_CUSTOMER': EXIT_DOMAIN,
    'EMPTY_RANGE': EXIT_DOMAIN,
    'EMPTY_WAREHOUSE': EXIT_DOMAIN,
    'DIVISION_BY_ZERO_BASELINE': EXIT_DOMAIN,
    'MISSING_PERIOD': EXIT_DOMAIN,
    'INVARIANT_VIOLATION': EXIT_DOMAIN,
    'NON_MONOTONIC_AFTER_SORT': EXIT_DOMAIN,
    'SERIES_TOO_SHORT': EXIT_DOMAIN,
}


class RfidmartError(Exception):
    """Base error carrying a stable code and the CLI exit status for it."""

    def __init__(self, code: str, message: str, detail: Optional[dict] = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.detail = detail or {}

    @property
    def exit_code(self) -> int:
        return EXIT_CODES.get(self.code, EXIT_DOMAIN)

    def to_line(self) -> str:
        """Single machine-parseable line for stderr."""
        text = self.message.replace('"', "'")
        return f'error code={self.code} exit={self.exit_code} message="{text}"'


class ConfigError(RfidmartError):
    pass


class StoreMapError(RfidmartError):
    pass


class IngestError(RfidmartError):
    pass


class StagingError(RfidmartError):
    pass


class TrajectoryError(RfidmartError):
    pass


class WarehouseError(RfidmartError):
    pass


class CubeError(RfidmartError):
    pass


class JourneyError(RfidmartError):
    pass


class BscError(RfidmartError):
    pass


class SimConfigError(RfidmartError):
    pass


class WorkspaceError(RfidmartError):
    pass
