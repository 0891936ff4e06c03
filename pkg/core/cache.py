"""On-disk cache of per-lattice constants.

Entries are JSON files keyed by discriminant, a hash of the basis and the
working precision. Each file carries a SHA-256 checksum of its constants so
an edited or truncated file is detected and recomputed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from pathlib import Path
from typing import Callable

from core.eisenstein import LatticeConstants
from core.quadfield import Lattice

logger = logging.getLogger(__name__)


def basis_hash(lattice: Lattice) -> str:
    order = lattice.order
    descriptor = f"{order.disc}:{order.conductor}:{order.omega_trace}:{order.omega_norm}"
    return hashlib.sha256(descriptor.encode("utf-8")).hexdigest()[:12]


def _checksum(payload: dict[str, object]) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ConstantsCache:
    """Thread-safe store of :class:`LatticeConstants` under ``directory``."""

    def __init__(self, directory: Path) -> None:
        self.directory = Path(directory)
        self._lock = threading.Lock()

    def path_for(self, lattice: Lattice, precision: int) -> Path:
        name = f"disc{lattice.order.disc}_{basis_hash(lattice)}_p{precision}.json"
        return self.directory / name

    def load(self, lattice: Lattice, precision: int) -> LatticeConstants | None:
        path = self.path_for(lattice, precision)
        with self._lock:
            if not path.exists():
                logger.info("Constants cache miss for %s at %d bits", lattice.order, precision)
                return None
            try:
                document = json.loads(path.read_text(encoding="utf-8"))
                constants = document["constants"]
                if document.get("checksum") != _checksum(constants):
                    raise ValueError("checksum mismatch")
                result = LatticeConstants.from_json(constants)
            except (ValueError, KeyError, TypeError) as exc:
                logger.warning("Ignoring corrupt cache file %s: %s", path, exc)
                return None
        logger.info("Constants cache hit for %s at %d bits", lattice.order, precision)
        return result

    def store(self, lattice: Lattice, constants: LatticeConstants) -> Path:
        payload = constants.to_json()
        document = {
            "key": {"disc": lattice.order.disc, "basis": basis_hash(lattice), "precision": constants.precision},
            "constants": payload,
            "checksum": _checksum(payload),
        }
        path = self.path_for(lattice, constants.precision)
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(document, indent=2, sort_keys=True), encoding="utf-8")
        logger.debug("Stored constants in %s", path)
        return path

    def get_or_compute(
        self,
        lattice: Lattice,
        precision: int,
        compute: Callable[[], LatticeConstants],
    ) -> LatticeConstants:
        cached = self.load(lattice, precision)
        if cached is not None:
            return cached
        constants = compute()
        self.store(lattice, constants)
        return constants

    def entries(self) -> list[dict[str, object]]:
        if not self.directory.exists():
            return []
        listing = []
        for path in sorted(self.directory.glob("disc*.json")):
            try:
                document = json.loads(path.read_text(encoding="utf-8"))
                valid = document.get("checksum") == _checksum(document["constants"])
                key = document.get("key", {})
            except (ValueError, KeyError, TypeError):
                valid, key = False, {}
            listing.append({"file": path.name, "key": key, "valid": valid})
        return listing

    def clear(self) -> int:
        removed = 0
        with self._lock:
            if not self.directory.exists():
                return 0
            for path in self.directory.glob("disc*.json"):
                path.unlink()
                removed += 1
        logger.info("Removed %d cache files from %s", removed, self.directory)
        return removed
