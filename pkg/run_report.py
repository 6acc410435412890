"""Run Report - the JSON document describing one CLI run."""
import hashlib
import logging
import time
import uuid
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Sequence

from config import Config, TOOL_VERSION
from errors import MixvError, error_details, exit_code_for

logger = logging.getLogger(__name__)


class RunStatus(Enum):
    """Run lifecycle states"""
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


def inputs_digest(paths: Sequence[str] = (), parameters: Optional[Dict] = None) -> str:
    """sha256 over the input files' bytes and the sorted parameter echo."""
    digest = hashlib.sha256()
    for path in paths:
        digest.update(str(path).encode('utf-8'))
        digest.update(b'\0')
        try:
            digest.update(Path(path).read_bytes())
        except OSError:
            digest.update(b'<unreadable>')
        digest.update(b'\0')
    for key in sorted(parameters or {}):
        digest.update(f"{key}={parameters[key]!r}\0".encode('utf-8'))
    return digest.hexdigest()


class RunReport:
    """One CLI invocation: command echo, inputs digest, results, timing and settings.

    Everything except the timing fields and run_id is a function of the inputs, so two
    runs of the same command on the same files produce equal `to_dict(timing=False)`.
    """

    def __init__(self, command: Sequence[str], paths: Sequence[str] = (),
                 parameters: Optional[Dict] = None):
        self.run_id = str(uuid.uuid4())
        self.command = list(command)
        self.paths = [str(path) for path in paths]
        self.parameters = dict(parameters or {})
        self.digest = inputs_digest(self.paths, self.parameters)
        self.status = RunStatus.RUNNING
        self.exit_code: Optional[int] = None
        self.result: Dict = {}
        self.error: Optional[Dict] = None
        self.started_at = datetime.now()
        self.completed_at: Optional[datetime] = None
        self._clock = time.perf_counter()
        self.elapsed_s: Optional[float] = None

    def complete(self, result: Dict, exit_code: int = 0):
        """Mark the run as completed with its result payload"""
        self.result = result
        self.exit_code = exit_code
        self.status = RunStatus.COMPLETED
        self._stop()
        logger.info(f"Run {self.run_id[:8]} completed: {' '.join(self.command)} "
                    f"(exit {exit_code}, {self.elapsed_s:.3f}s)")

    def fail(self, error: BaseException):
        """Mark the run as failed"""
        self.exit_code = exit_code_for(error)
        self.status = RunStatus.FAILED
        if isinstance(error, MixvError):
            self.error = error_details(error)
        else:
            self.error = {"kind": "internal_error", "message": f"{type(error).__name__}: {error}"}
        self._stop()
        logger.error(f"Run {self.run_id[:8]} failed: {' '.join(self.command)} - {self.error['message']}")

    def _stop(self):
        self.completed_at = datetime.now()
        self.elapsed_s = time.perf_counter() - self._clock

    def settings(self) -> Dict:
        return {
            "max_enum": Config.MAX_ENUM,
            "eps_split": Config.EPS_SPLIT,
            "identity_tol": Config.IDENTITY_TOL,
            "gadget_max_magnitude": Config.GADGET_MAX_MAGNITUDE,
        }

    def to_dict(self, timing: bool = True) -> Dict:
        """Convert the report to a JSON-ready dictionary."""
        document = {
            "tool_version": TOOL_VERSION,
            "command": self.command,
            "inputs": {"files": self.paths, "parameters": self.parameters, "sha256": self.digest},
            "status": self.status.value,
            "exit_code": self.exit_code,
            "settings": self.settings(),
        }
        document.update(self.result)
        if self.error is not None:
            document["error"] = self.error
        if timing:
            document["run_id"] = self.run_id
            document["timing"] = {
                "started_at": self.started_at.isoformat(),
                "completed_at": self.completed_at.isoformat() if self.completed_at else None,
                "elapsed_s": self.elapsed_s,
            }
        return document

    def __repr__(self) -> str:
        return (f"RunReport(id={self.run_id[:8]}, command='{' '.join(self.command)}', "
                f"status={self.status.value}, exit={self.exit_code})")
