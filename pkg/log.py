import datetime
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import app_config
from errors import MalformedInput
from serialization import read_json

logger = logging.getLogger(__name__)


def hash_file(path) -> str:
    """sha256 of the file bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def hash_files(paths: Iterable) -> Dict[str, str]:
    return {str(p): hash_file(p) for p in paths}


@dataclass
class RunManifest:
    """Everything needed to replay a CLI run and compare its payload."""

    command: str
    arguments: Dict[str, Any]
    fixture_hashes: Dict[str, str] = field(default_factory=dict)
    library_version: str = app_config.__version__
    outcome: str = "ok"
    exit_code: int = 0
    payload: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        return cls(
            command=data["command"],
            arguments=dict(data.get("arguments", {})),
            fixture_hashes=dict(data.get("fixture_hashes", {})),
            library_version=data.get("library_version", ""),
            outcome=data.get("outcome", "ok"),
            exit_code=int(data.get("exit_code", 0)),
            payload=data.get("payload", {}),
        )


class CertificateLogger:
    def __init__(self, log_dir: Optional[str] = None):
        """Initialize CertificateLogger with log directory"""
        self.log_dir = Path(log_dir or app_config.HK_LOG_DIR)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.run_history = []
        self.load_logs_history()

    def create_run_log(
        self,
        manifest: RunManifest,
        start_time: datetime.datetime,
        end_time: datetime.datetime,
        status: str,
        error_message: Optional[str] = None,
    ) -> Dict[str, Any]:
        """Create a log entry for a certificate run"""
        duration = (end_time - start_time).total_seconds()
        log_entry = {
            "run_timestamp": start_time.isoformat(),
            "manifest": manifest.to_dict(),
            "execution_details": {
                "start_time": start_time.isoformat(),
                "end_time": end_time.isoformat(),
                "duration_seconds": duration,
                "status": status,
            },
        }
        if error_message:
            log_entry["error_message"] = error_message

        self.add_log_entry(log_entry)
        return log_entry

    def add_log_entry(self, log_entry: Dict[str, Any]) -> Path:
        """Add a log entry to run history and save it to file"""
        self.run_history.append(log_entry)

        timestamp = datetime.datetime.fromisoformat(log_entry["run_timestamp"].split("+")[0])
        log_file = self.log_dir / f"run_log_{timestamp.strftime('%Y%m%d_%H%M%S_%f')}.json"
        with open(log_file, "w") as f:
            json.dump(log_entry, f, indent=4, default=str)
        logger.debug(f"Run log written to {log_file}")
        return log_file

    def load_logs_history(self):
        """Load run history from log files, newest first"""
        self.run_history = []
        for log_file in sorted(self.log_dir.glob("run_log_*.json"), reverse=True):
            try:
                with open(log_file, "r") as f:
                    self.run_history.append(json.load(f))
            except (OSError, json.JSONDecodeError) as e:
                logger.warning(f"Error loading log file {log_file}: {str(e)}")

    def summarize(self, log_entry: Dict[str, Any]) -> Dict[str, Any]:
        """One history row: what ran, how it ended, and whether its inputs still hash the same."""
        manifest = log_entry.get("manifest", {})
        details = log_entry.get("execution_details", {})
        recorded = manifest.get("fixture_hashes", {})
        present = [p for p in recorded if Path(p).is_file()]
        return {
            "run_timestamp": log_entry.get("run_timestamp"),
            "command": manifest.get("command", ""),
            "outcome": details.get("status", manifest.get("outcome")),
            "exit_code": manifest.get("exit_code"),
            "duration": self.format_duration(float(details.get("duration_seconds", 0))),
            "inputs_unchanged": bool(recorded)
            and len(present) == len(recorded)
            and hash_files(present) == {p: recorded[p] for p in present},
        }

    def get_run_history(self, page: int = 1, per_page: int = 10) -> Dict[str, Any]:
        """Summaries of stored runs, newest first, one page at a time"""
        if page < 1 or per_page < 1:
            raise MalformedInput("page and per_page must be positive", {"page": page, "per_page": per_page})
        total = len(self.run_history)
        pages = max(1, -(-total // per_page))
        window = self.run_history[(page - 1) * per_page : page * per_page]
        return {
            "runs": [self.summarize(entry) for entry in window],
            "page": page,
            "pages": pages,
            "total": total,
            "has_next": page < pages,
        }

    def format_duration(self, seconds):
        """Format duration in seconds to a readable string"""
        if seconds < 60:
            return f"{seconds:.1f} seconds"
        elif seconds < 3600:
            return f"{int(seconds // 60)}m {int(seconds % 60)}s"
        hours = int(seconds // 3600)
        remaining = seconds % 3600
        return f"{hours}h {int(remaining // 60)}m {int(remaining % 60)}s"

    def clear_old_logs(self, days_to_keep=30) -> int:
        """Delete logs older than days_to_keep; returns how many were removed"""
        cutoff_date = datetime.datetime.now() - datetime.timedelta(days=days_to_keep)
        removed = 0
        for log_file in self.log_dir.glob("run_log_*.json"):
            try:
                file_date = datetime.datetime.strptime(log_file.stem.split("_")[2], "%Y%m%d")
            except (IndexError, ValueError):
                logger.warning(f"Skipping unrecognised log file name {log_file.name}")
                continue
            if file_date < cutoff_date:
                log_file.unlink()
                removed += 1
        if removed:
            self.load_logs_history()
        return removed


def load_manifest(path) -> RunManifest:
    """Read a manifest from either a bare manifest file or a stored run log."""
    data = read_json(path)
    if not isinstance(data, dict) or "command" not in data.get("manifest", data):
        raise MalformedInput(f"{path} is not a run manifest", {"path": str(path)})
    return RunManifest.from_dict(data.get("manifest", data))
