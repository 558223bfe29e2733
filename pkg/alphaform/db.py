"""
SQLite store for suite reports.
"""
import json
import sqlite3
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from .schemas import RunStatus, SuiteName, SuiteReport


def datetime_serializer(obj):
    if isinstance(obj, datetime):
        return obj.isoformat()
    raise TypeError(f"Object of type {type(obj)} is not JSON serializable")


def _value(field) -> str:
    return field.value if hasattr(field, "value") else field


class ReportDB:
    """One row per ``verify --store`` run."""

    def __init__(self, db_path: str = "./data/reports.db"):
        self.db_path = db_path
        Path(db_path).parent.mkdir(parents=True, exist_ok=True)
        self._init_db()

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        return conn

    def _init_db(self):
        conn = self._connect()
        cursor = conn.cursor()
        cursor.execute("""
            CREATE TABLE IF NOT EXISTS reports (
                report_id TEXT PRIMARY KEY,
                suite TEXT NOT NULL,
                bounds TEXT NOT NULL,
                status TEXT NOT NULL,
                results TEXT NOT NULL,
                metadata TEXT NOT NULL,
                created_at TEXT NOT NULL
            )
        """)
        cursor.execute("CREATE INDEX IF NOT EXISTS idx_suite ON reports(suite)")
        cursor.execute("CREATE INDEX IF NOT EXISTS idx_created_at ON reports(created_at)")
        conn.commit()
        conn.close()

    def _columns(self, report: SuiteReport) -> tuple:
        return (
            _value(report.suite),
            json.dumps(report.bounds),
            _value(report.status),
            json.dumps([r.model_dump() for r in report.results], default=datetime_serializer),
            json.dumps(report.metadata.model_dump(), default=datetime_serializer),
            report.metadata.created_at.isoformat(),
        )

    def create_report(self, report: SuiteReport) -> SuiteReport:
        conn = self._connect()
        conn.execute("""
            INSERT INTO reports (suite, bounds, status, results, metadata, created_at, report_id)
            VALUES (?, ?, ?, ?, ?, ?, ?)
        """, self._columns(report) + (report.report_id,))
        conn.commit()
        conn.close()
        return report

    def get_report(self, report_id: str) -> Optional[SuiteReport]:
        conn = self._connect()
        row = conn.execute("SELECT * FROM reports WHERE report_id = ?", (report_id,)).fetchone()
        conn.close()
        return self._row_to_report(row) if row else None

    def update_report(self, report: SuiteReport) -> SuiteReport:
        conn = self._connect()
        conn.execute("""
            UPDATE reports
            SET suite = ?, bounds = ?, status = ?, results = ?, metadata = ?, created_at = ?
            WHERE report_id = ?
        """, self._columns(report) + (report.report_id,))
        conn.commit()
        conn.close()
        return report

    def list_reports(self, limit: int = 20, offset: int = 0) -> List[SuiteReport]:
        """Newest first."""
        conn = self._connect()
        rows = conn.execute("""
            SELECT * FROM reports
            ORDER BY created_at DESC
            LIMIT ? OFFSET ?
        """, (limit, offset)).fetchall()
        conn.close()
        return [self._row_to_report(row) for row in rows]

    def _row_to_report(self, row: sqlite3.Row) -> SuiteReport:
        return SuiteReport(
            report_id=row["report_id"],
            suite=SuiteName(row["suite"]),
            bounds=json.loads(row["bounds"]),
            status=RunStatus(row["status"]),
            results=json.loads(row["results"]),
            metadata=json.loads(row["metadata"]),
        )
