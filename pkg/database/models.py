from sqlalchemy import Column, Integer, String, Text, DateTime, Float, ForeignKey, create_engine
from sqlalchemy.orm import declarative_base, relationship, sessionmaker
from datetime import datetime, timezone
import json
import logging
import uuid
from typing import Dict, Any, List, Optional

logger = logging.getLogger(__name__)

# Create the SQLAlchemy base
Base = declarative_base()

# namespace for reproducible run ids
RUN_NAMESPACE = uuid.UUID("6f1d2c1e-8a53-5b0e-9c4e-2f7a1d0b9e11")


def make_run_id(command: str, config: Dict[str, Any], seed: int) -> str:
    """UUID5 of command, canonical config JSON and seed."""
    payload = json.dumps({"command": command, "config": config, "seed": seed}, sort_keys=True)
    return str(uuid.uuid5(RUN_NAMESPACE, payload))


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class ExperimentRun(Base):
    """One CLI invocation with its config and summary."""

    __tablename__ = 'experiment_runs'

    id = Column(Integer, primary_key=True)
    run_id = Column(String(36), unique=True, nullable=False)
    command = Column(String(50), nullable=False)
    seed = Column(Integer, nullable=False, default=0)
    config_json = Column(Text, nullable=False)
    summary_json = Column(Text, nullable=True)
    created_at = Column(DateTime, default=_utcnow)

    rows = relationship("ParameterRow", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<ExperimentRun(id={self.run_id}, command='{self.command}')>"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "command": self.command,
            "seed": self.seed,
            "config": json.loads(self.config_json),
            "summary": json.loads(self.summary_json) if self.summary_json else None,
            "rows": [row.to_dict() for row in sorted(self.rows, key=lambda r: r.position)],
        }


class ParameterRow(Base):
    """A per-parameter result line: classification, height estimate and radius."""

    __tablename__ = 'parameter_rows'

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('experiment_runs.id'))
    position = Column(Integer, nullable=False)

    lambda_repr = Column(String(255), nullable=False)
    kind = Column(String(20), nullable=True)
    status = Column(Text, nullable=True)
    height_estimate = Column(Float, nullable=True)
    error_radius = Column(Float, nullable=True)

    run = relationship("ExperimentRun", back_populates="rows")

    def __repr__(self):
        return f"<ParameterRow(lambda='{self.lambda_repr}', kind='{self.kind}')>"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lambda_repr,
            "kind": self.kind,
            "status": self.status,
            "height_estimate": self.height_estimate,
            "error_radius": self.error_radius,
        }


def _float_or_none(value: Any) -> Optional[float]:
    if value is None or value == "":
        return None
    return float(value)


class DatabaseManager:
    """Stores run summaries and rows; artifacts on disk stay the primary output."""

    def __init__(self, db_path: str = "sqlite:///experiments.db"):
        """Initialize the database manager.

        Args:
            db_path: SQLAlchemy connection string
        """
        self.engine = create_engine(db_path)
        self.Session = sessionmaker(bind=self.engine)

        # Create tables if they don't exist
        Base.metadata.create_all(self.engine)

    def create_run(self, command: str, config: Dict[str, Any], seed: int,
                   summary: Optional[Dict[str, Any]] = None) -> str:
        """Create (or replace) the record of a run.

        Args:
            command: Subcommand name
            config: Validated config as a JSON-able dict
            seed: Random seed
            summary: Summary of the outputs

        Returns:
            The run id, identical for identical command, config and seed
        """
        run_id = make_run_id(command, config, seed)
        session = self.Session()
        try:
            existing = session.query(ExperimentRun).filter_by(run_id=run_id).first()
            if existing:
                session.delete(existing)
                session.flush()
            session.add(ExperimentRun(
                run_id=run_id,
                command=command,
                seed=seed,
                config_json=json.dumps(config, sort_keys=True),
                summary_json=json.dumps(summary, sort_keys=True) if summary is not None else None,
            ))
            session.commit()
            logger.info("stored run %s (%s)", run_id, command)
            return run_id
        finally:
            session.close()

    def store_rows(self, run_id: str, rows: List[Dict[str, Any]]) -> int:
        """Attach report rows to a run.

        Rows are dicts with a "lambda" key and optional "kind", "status",
        "height_estimate" and "error_radius".

        Returns:
            Number of rows stored
        """
        session = self.Session()
        try:
            run = session.query(ExperimentRun).filter_by(run_id=run_id).first()

            if not run:
                raise ValueError(f"Run with ID {run_id} not found")

            start = len(run.rows)
            for offset, row in enumerate(rows):
                session.add(ParameterRow(
                    run_id=run.id,
                    position=start + offset,
                    lambda_repr=str(row.get("lambda", "")),
                    kind=row.get("kind"),
                    status=row.get("status"),
                    height_estimate=_float_or_none(row.get("height_estimate")),
                    error_radius=_float_or_none(row.get("error_radius")),
                ))

            session.commit()
            return len(rows)
        finally:
            session.close()

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        session = self.Session()
        try:
            run = session.query(ExperimentRun).filter_by(run_id=run_id).first()
            if run:
                return run.to_dict()
            return None
        finally:
            session.close()

    def list_runs(self, command: Optional[str] = None) -> List[Dict[str, Any]]:
        """Runs in creation order, optionally filtered by subcommand; rows are omitted."""
        session = self.Session()
        try:
            query = session.query(ExperimentRun)
            if command is not None:
                query = query.filter_by(command=command)
            return [{"run_id": run.run_id, "command": run.command, "seed": run.seed}
                    for run in query.order_by(ExperimentRun.id).all()]
        finally:
            session.close()

    def delete_run(self, run_id: str) -> bool:
        """Delete a run and its rows.

        Returns:
            Success status
        """
        session = self.Session()
        try:
            run = session.query(ExperimentRun).filter_by(run_id=run_id).first()
            if not run:
                return False

            session.delete(run)  # Will cascade delete rows
            session.commit()
            return True
        finally:
            session.close()
