"""
Run output writer
Writes CSV tables and JSON reports for one command run, each stamped with the
config hash and library version
"""

import csv
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)


class OutputWriter:
    """Write the artifacts of one run into OUTPUT_DIR/<command>-<config hash>/"""

    def __init__(self, base_dir: str, command: str, config_hash: str, version: str):
        """
        Initialize output writer

        Args:
            base_dir: Directory holding all runs
            command: Subcommand name
            config_hash: Hash of the experiment config
            version: Library version
        """
        self.command = command
        self.config_hash = config_hash
        self.version = version
        self.run_dir = Path(base_dir) / f"{command}-{config_hash}"

        # Try to create directory, fall back to /tmp if permission denied
        try:
            self.run_dir.mkdir(parents=True, exist_ok=True)
        except PermissionError:
            fallback = Path("/tmp/exact_approx_runs") / self.run_dir.name
            logger.warning(f"Permission denied for {self.run_dir}, using {fallback}")
            self.run_dir = fallback
            self.run_dir.mkdir(parents=True, exist_ok=True)

        self.files: List[str] = []
        logger.info(f"OutputWriter initialized at: {self.run_dir}")

    def _stamp(self) -> Dict:
        return {"config_hash": self.config_hash, "version": self.version}

    def write_json(self, name: str, payload: Dict) -> Path:
        """Write a JSON report with the stamp fields first"""
        path = self.run_dir / name
        document = {**self._stamp(), **payload}
        try:
            with open(path, "w") as f:
                json.dump(document, f, indent=2, sort_keys=False)
                f.write("\n")
        except Exception as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
        self.files.append(name)
        logger.debug(f"Wrote {path}")
        return path

    def write_csv(self, name: str, rows: Sequence[Dict], columns: Optional[Sequence[str]] = None) -> Path:
        """Write rows as CSV; a leading comment line carries the stamp"""
        path = self.run_dir / name
        columns = list(columns or (rows[0].keys() if rows else []))
        try:
            with open(path, "w", newline="") as f:
                f.write(f"# config_hash={self.config_hash} version={self.version}\n")
                writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
                writer.writeheader()
                for row in rows:
                    writer.writerow(row)
        except Exception as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
        self.files.append(name)
        logger.debug(f"Wrote {len(rows)} rows to {path}")
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.run_dir / name
        with open(path, "w") as f:
            f.write(text)
        self.files.append(name)
        return path

    def finish(self, status: str, exit_code: int, config: Dict, summary: Optional[Dict] = None) -> Path:
        """
        Write run.json: command, status, exit code, config and the list of files

        The finishing time is the only field that differs between reruns.
        """
        manifest = {
            "command": self.command,
            "status": status,
            "exit_code": exit_code,
            "config": config,
            "files": sorted(self.files),
            "summary": summary or {},
            "finished_at": datetime.now().isoformat(),
        }
        path = self.write_json("run.json", manifest)
        logger.info(f"Run {self.command} finished with status {status} (exit {exit_code}): {self.run_dir}")
        return path
