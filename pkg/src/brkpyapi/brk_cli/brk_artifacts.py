import json
import logging
from pathlib import Path
from typing import Any, Dict, Sequence

import numpy as np
from PyCRC.CRCCCITT import CRCCCITT


CSV_FORMAT: str = "%.17g"


def crc_of(path: Path) -> int:
    """
    CRC-CCITT of a file's bytes.

    :param path: File to check.
    :type path: Path
    :return: Checksum.
    :rtype: int
    """
    return CRCCCITT().calculate(input_data=path.read_bytes())


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class ArtifactWriter:
    """
    Writes the result files of one run and keeps their checksums.
    """
    def __init__(self, directory: Path, formats: Sequence[str] = ("csv", "json")):
        """
        :param directory: Run directory, created when missing.
        :type directory: Path
        :param formats: Enabled result formats; the summary is always written.
        :type formats: Sequence[str]
        """
        self.directory: Path = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.formats: tuple = tuple(formats)
        self.checksums: Dict[str, dict] = {}

    def _record(self, path: Path) -> Path:
        self.checksums[path.name] = {"crc_ccitt": crc_of(path), "bytes": path.stat().st_size}
        logging.debug(f"wrote {path} (crc 0x{self.checksums[path.name]['crc_ccitt']:04x})")
        return path

    def record(self, path: Path) -> Path:
        """
        Adds a file written elsewhere, such as the configuration echo.
        """
        return self._record(Path(path))

    def write_csv(self, name: str, table: np.ndarray, header: Sequence[str]) -> Path:
        """
        Writes a table in full double precision with a header row. Skipped when csv is disabled.
        """
        path: Path = self.directory / name
        if "csv" not in self.formats:
            return path
        np.savetxt(path, np.atleast_2d(table), delimiter=",", fmt=CSV_FORMAT, header=",".join(header), comments="")
        return self._record(path)

    def write_json(self, name: str, payload: Any) -> Path:
        """
        Writes a result document. Skipped when json is disabled.
        """
        path: Path = self.directory / name
        if "json" not in self.formats:
            return path
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_plain))
        return self._record(path)

    def write_summary(self, summary: dict) -> Path:
        """
        Writes summary.json with the checksums of every other artifact.
        """
        path: Path = self.directory / "summary.json"
        document: dict = dict(summary)
        document["artifacts"] = dict(sorted(self.checksums.items()))
        path.write_text(json.dumps(document, indent=2, sort_keys=True, default=_plain))
        logging.info(f"summary written to {path}")
        return path


def state_header(prefix: str, n: int) -> list:
    return [prefix] + [f"u{j + 1}" for j in range(n)]
