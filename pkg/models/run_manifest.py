from dataclasses import dataclass, field
from typing import Dict, List

INGEST = 'ingest'
LOAD = 'load'
STAGES = (INGEST, LOAD)


@dataclass
class StageRecord:
    stage: str
    batch_ids: List[int] = field(default_factory=list)
    completed_at: str = ''
    rows: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'stage': self.stage,
            'batch_ids': list(self.batch_ids),
            'completed_at': self.completed_at,
            'rows': dict(sorted(self.rows.items())),
        }

    @staticmethod
    def from_dict(data: dict) -> 'StageRecord':
        return StageRecord(
            stage=data['stage'],
            batch_ids=[int(b) for b in data.get('batch_ids') or []],
            completed_at=data.get('completed_at', ''),
            rows={k: int(v) for k, v in (data.get('rows') or {}).items()},
        )


@dataclass
class RunManifest:
    """What ran against a workspace, in the order it ran."""
    workspace: str
    config_digest: str = ''
    stages: List[StageRecord] = field(default_factory=list)

    def completed(self, stage: str) -> bool:
        return any(record.stage == stage for record in self.stages)

    def to_dict(self) -> dict:
        return {
            'workspace': self.workspace,
            'config_digest': self.config_digest,
            'stages': [record.to_dict() for record in self.stages],
        }

    @staticmethod
    def from_dict(data: dict) -> 'RunManifest':
        return RunManifest(
            workspace=data.get('workspace', ''),
            config_digest=data.get('config_digest', ''),
            stages=[StageRecord.from_dict(s) for s in data.get('stages') or []],
        )
