import os
import shutil
import tempfile
from contextlib import contextmanager
from typing import Iterator

from loguru import logger

from kerrcat.experiments.store import ResultStore


class RunSessionManager:
    """
    Manages run directories under one output root: tables are written into a
    staging directory that replaces ``<root>/<name>`` only when the run succeeds.
    """

    def __init__(self, root: str):
        self.root = root

    @contextmanager
    def transaction(self, name: str) -> Iterator[ResultStore]:
        """
        Commit on success (atomic rename), rollback on error (staging removed).
        """
        os.makedirs(self.root, exist_ok=True)
        staging = tempfile.mkdtemp(prefix=f".{name}.", dir=self.root)
        target = os.path.join(self.root, name)
        try:
            yield ResultStore(staging)
            if os.path.isdir(target):
                logger.info(f"Replacing previous results in {target}")
                shutil.rmtree(target)
            os.replace(staging, target)
            logger.info(f"Run '{name}' committed to {target}")
        except BaseException as e:
            shutil.rmtree(staging, ignore_errors=True)
            logger.error(f"Run '{name}' rolled back: {e}")
            raise
