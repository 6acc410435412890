"""Local SQLite run ledger for mixv."""
import sqlite3
import logging
import json
from typing import List, Dict, Optional

from config import Config

logger = logging.getLogger(__name__)


class Database:
    """Stores run reports so verification results can be reviewed later."""

    def __init__(self, db_path: Optional[str] = None):
        """Initialize database connection.

        Args:
            db_path: Path to SQLite database file (Config.DATABASE_PATH if None)
        """
        self.db_path = db_path or Config.DATABASE_PATH
        self.conn = None
        self.init_database()

    def init_database(self):
        """Initialize database and create tables if they don't exist."""
        try:
            self.conn = sqlite3.connect(self.db_path, check_same_thread=False)
            self.conn.row_factory = sqlite3.Row

            self.conn.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id TEXT NOT NULL UNIQUE,
                    command TEXT NOT NULL,
                    inputs_digest TEXT NOT NULL,
                    exit_code INTEGER,
                    status TEXT NOT NULL,
                    report_json TEXT NOT NULL,
                    started_at TEXT NOT NULL,
                    completed_at TEXT
                )
            """)
            self.conn.execute("""
                CREATE INDEX IF NOT EXISTS idx_runs_digest
                ON runs(inputs_digest)
            """)
            self.conn.commit()

            logger.debug(f"Run ledger initialized at {self.db_path}")

        except Exception as e:
            logger.error(f"Error initializing database: {e}")
            raise

    def record_run(self, report) -> int:
        """Store a finished run.

        Args:
            report: RunReport

        Returns:
            Row ID
        """
        document = report.to_dict()
        cursor = self.conn.execute(
            """INSERT INTO runs
               (run_id, command, inputs_digest, exit_code, status, report_json,
                started_at, completed_at)
               VALUES (?, ?, ?, ?, ?, ?, ?, ?)""",
            (report.run_id, " ".join(report.command), report.digest, report.exit_code,
             report.status.value, json.dumps(document, sort_keys=True),
             document["timing"]["started_at"], document["timing"]["completed_at"])
        )
        self.conn.commit()
        logger.info(f"Recorded run {report.run_id[:8]} in {self.db_path}")
        return cursor.lastrowid

    def _row_to_dict(self, row) -> Dict:
        entry = dict(row)
        entry['report'] = json.loads(entry.pop('report_json'))
        return entry

    def get_recent_runs(self, limit: int = 20) -> List[Dict]:
        """Get the most recent runs, newest first.

        Args:
            limit: Maximum number of runs

        Returns:
            List of run dictionaries (report decoded)
        """
        cursor = self.conn.execute(
            "SELECT * FROM runs ORDER BY id DESC LIMIT ?",
            (limit,)
        )
        return [self._row_to_dict(row) for row in cursor.fetchall()]

    def get_run(self, run_id: str) -> Optional[Dict]:
        """Get a run by its run ID (a unique prefix is accepted)."""
        cursor = self.conn.execute(
            "SELECT * FROM runs WHERE run_id LIKE ? ORDER BY id DESC",
            (f"{run_id}%",)
        )
        rows = cursor.fetchall()
        if len(rows) != 1:
            return None
        return self._row_to_dict(rows[0])

    def get_runs_by_digest(self, digest: str) -> List[Dict]:
        """Earlier runs over the same inputs."""
        cursor = self.conn.execute(
            "SELECT * FROM runs WHERE inputs_digest = ? ORDER BY id",
            (digest,)
        )
        return [self._row_to_dict(row) for row in cursor.fetchall()]

    def close(self):
        """Close database connection."""
        if self.conn:
            self.conn.close()
