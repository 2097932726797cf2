import json
import time
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema

from kgpoly.services.diagram import Diagram, canonical_key, serialize
from kgpoly.services.qpoly import LaurentPoly

try:
    import psutil  # type: ignore
except Exception:  # pragma: no cover
    psutil = None

SCHEMA_VERSION = "1"
BASE_DIR = Path(__file__).resolve().parent.parent
SCHEMA_PATH = BASE_DIR / "resources" / "schema" / f"run_report.v{SCHEMA_VERSION}.json"


class ReportError(RuntimeError):
    pass


@dataclass
class ReportItem:
    name: str
    passed: bool
    diagram: Optional[Diagram] = None
    n: Optional[int] = None
    polynomial: Optional[LaurentPoly] = None
    expected: Optional[LaurentPoly] = None
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"name": self.name, "passed": self.passed}
        if self.diagram is not None:
            data["key"] = canonical_key(self.diagram).decode("ascii")
            data["diagram"] = serialize(self.diagram)
        if self.n is not None:
            data["n"] = self.n
        if self.polynomial is not None:
            data["polynomial"] = self.polynomial.to_pairs()
        if self.expected is not None:
            data["expected"] = self.expected.to_pairs()
        if self.detail:
            data["detail"] = self.detail
        return data


@dataclass
class RunReport:
    command: List[str]
    kind: str
    n: int
    seed: Optional[int] = None
    count: Optional[int] = None
    items: List[ReportItem] = field(default_factory=list)
    started: float = field(default_factory=time.monotonic)
    finished: Optional[float] = None

    def add(self, item: ReportItem) -> ReportItem:
        self.items.append(item)
        return item

    def finish(self) -> "RunReport":
        self.finished = time.monotonic()
        return self

    @property
    def failures(self) -> List[ReportItem]:
        return [item for item in self.items if not item.passed]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        end = self.finished if self.finished is not None else time.monotonic()
        failures = self.failures
        data: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "command": list(self.command),
            "kind": self.kind,
            "n": self.n,
            "seed": self.seed,
            "count": self.count,
            "items": [item.to_dict() for item in self.items],
            "counts": {
                "total": len(self.items),
                "passed": len(self.items) - len(failures),
                "failed": len(failures),
            },
            "failures": [item.to_dict() for item in failures],
            "elapsed_seconds": round(max(0.0, end - self.started), 6),
        }
        memory = memory_stats()
        if memory:
            data["memory"] = memory
        return data

    def to_json(self) -> str:
        data = self.to_dict()
        validate_report(data)
        return json.dumps(data, indent=2)


def memory_stats() -> Dict[str, float]:
    stats: Dict[str, float] = {}
    if psutil is None:
        return stats
    try:
        info = psutil.Process().memory_info()
        stats["rss_mb"] = float(info.rss) / (1024**2)
        stats["vms_mb"] = float(info.vms) / (1024**2)
        return stats
    except Exception:
        return stats


@lru_cache(maxsize=1)
def load_schema() -> Dict[str, Any]:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


def validate_report(data: Dict[str, Any]) -> None:
    try:
        jsonschema.validate(instance=data, schema=load_schema())
    except jsonschema.ValidationError as e:
        raise ReportError(f"Run report does not match schema v{SCHEMA_VERSION}: {e.message}") from e
