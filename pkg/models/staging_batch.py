from dataclasses import dataclass
from typing import Optional

LOADED = 'LOADED'
TRANSFORMED = 'TRANSFORMED'
BATCH_STATES = (LOADED, TRANSFORMED)


@dataclass
class StagingBatch:
    batch_id: int
    kind: str               # 'pings' or 'pos'
    source_file: str
    checksum: str           # sha256 of the source bytes
    state: str = LOADED
    rows_accepted: int = 0
    rows_rejected: int = 0

    @property
    def stem(self) -> str:
        return f"{self.batch_id:06d}-{self.kind}"

    @property
    def accepted_file(self) -> str:
        return f"{self.stem}.accepted.csv"

    @property
    def rejects_file(self) -> str:
        return f"{self.stem}.rejects.csv"

    @property
    def report_file(self) -> str:
        return f"{self.stem}.quality.yaml"

    @staticmethod
    def from_dict(data: dict) -> 'StagingBatch':
        return StagingBatch(
            batch_id=int(data['batch_id']),
            kind=data['kind'],
            source_file=data.get('source_file', ''),
            checksum=data['checksum'],
            state=data.get('state', LOADED),
            rows_accepted=int(data.get('rows_accepted', 0)),
            rows_rejected=int(data.get('rows_rejected', 0)),
        )

    def to_dict(self) -> dict:
        return {
            'batch_id': self.batch_id,
            'kind': self.kind,
            'source_file': self.source_file,
            'checksum': self.checksum,
            'state': self.state,
            'rows_accepted': self.rows_accepted,
            'rows_rejected': self.rows_rejected,
        }


def matches_state(batch: StagingBatch, state: Optional[str]) -> bool:
    return state is None or batch.state == state
