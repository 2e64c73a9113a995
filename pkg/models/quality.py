from dataclasses import dataclass, field
from typing import Dict, List


@dataclass(frozen=True)
class RejectRecord:
    """A rejected input line, kept verbatim with the reason it failed."""
    line_no: int
    reason: str
    raw_line: str


@dataclass
class QualityReport:
    """Profile of one parsed source file; rows_read = rows_accepted + rows_rejected."""
    source_kind: str
    rows_read: int = 0
    rows_accepted: int = 0
    rows_rejected: int = 0
    reject_reasons: Dict[str, int] = field(default_factory=dict)
    null_counts: Dict[str, int] = field(default_factory=dict)
    duplicate_count: int = 0
    out_of_bounds_count: int = 0

    def record_accept(self) -> None:
        self.rows_read += 1
        self.rows_accepted += 1

    def record_reject(self, reason: str) -> None:
        self.rows_read += 1
        self.rows_rejected += 1
        self.reject_reasons[reason] = self.reject_reasons.get(reason, 0) + 1

    @property
    def is_balanced(self) -> bool:
        return self.rows_read == self.rows_accepted + self.rows_rejected

    def to_dict(self) -> dict:
        return {
            'source_kind': self.source_kind,
            'rows_read': self.rows_read,
            'rows_accepted': self.rows_accepted,
            'rows_rejected': self.rows_rejected,
            'reject_reasons': dict(sorted(self.reject_reasons.items())),
            'null_counts': dict(sorted(self.null_counts.items())),
            'duplicate_count': self.duplicate_count,
            'out_of_bounds_count': self.out_of_bounds_count,
        }

    @staticmethod
    def from_dict(data: dict) -> 'QualityReport':
        return QualityReport(
            source_kind=data.get('source_kind', ''),
            rows_read=data.get('rows_read', 0),
            rows_accepted=data.get('rows_accepted', 0),
            rows_rejected=data.get('rows_rejected', 0),
            reject_reasons=dict(data.get('reject_reasons') or {}),
            null_counts=dict(data.get('null_counts') or {}),
            duplicate_count=data.get('duplicate_count', 0),
            out_of_bounds_count=data.get('out_of_bounds_count', 0),
        )


@dataclass
class ParseResult:
    accepted: List
    rejects: List[RejectRecord]
    report: QualityReport
    accepted_raw: List[str] = field(default_factory=list)
