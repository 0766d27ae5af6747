from __future__ import annotations

import json
import logging
import os
import platform
import shlex
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence

from frailz.constants import MANIFEST_NAME, VERSION
from frailz.utils.utils import file_digest, text_digest, write_json

logger = logging.getLogger("frailz.manifest")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """
    What a command ran with and what it wrote.

    The command line together with the resolved config and seeds is enough to
    repeat the run; digests pin the inputs it read.
    """

    argv: List[str]
    config: Dict[str, object] = field(default_factory=dict)
    seeds: Dict[str, object] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    version: str = VERSION
    python: str = field(default_factory=platform.python_version)
    started: str = field(default_factory=_now)
    finished: Optional[str] = None

    @property
    def command_line(self) -> str:
        return shlex.join(["frailz", *self.argv])

    @property
    def config_digest(self) -> str:
        return text_digest(json.dumps(self.config, sort_keys=True, default=str))

    def add_input(self, path: str, label: Optional[str] = None) -> None:
        self.inputs[label or path] = file_digest(path)

    def add_outputs(self, paths: Sequence[str]) -> None:
        for path in paths:
            name = os.path.basename(path)
            if name not in self.outputs:
                self.outputs.append(name)

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["command_line"] = self.command_line
        payload["config_digest"] = self.config_digest
        return payload

    def write(self, out_dir: str) -> str:
        self.finished = _now()
        path = os.path.join(out_dir, MANIFEST_NAME)
        write_json(self.to_dict(), path)
        logger.debug("Manifest written to %s", path)
        return path
