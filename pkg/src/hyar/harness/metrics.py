"""CSV metrics log, evaluation log, and the run manifest."""
from __future__ import annotations

import os

from .. import numkit as nk

METRICS_HEADER = ("env_step,episode,return_ma100,success_ma100,loss_vae,"
                  "loss_dyn,critic_loss,actor_loss,bound_coverage")
EVAL_HEADER = "env_step,mean_return,success_rate"


def _cell(v) -> str:
    """Ints verbatim; floats through repr() so reruns match bit for bit."""
    if isinstance(v, bool):
        raise TypeError("write 0/1, not booleans")
    if isinstance(v, (int,)):
        return str(v)
    return repr(float(v))


class CsvLog:
    """Append-per-row CSV writer; flushes each row so aborts keep whole lines."""

    def __init__(self, path: str, header: str, resume: bool = False):
        self.path = path
        fresh = not (resume and os.path.exists(path))
        self._fh = open(path, "w" if fresh else "a", encoding="utf-8")
        if fresh:
            self._fh.write(header + "\n")
            self._fh.flush()

    def row(self, values) -> None:
        self._fh.write(",".join(_cell(v) for v in values) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def write_manifest(path: str, config, checkpoint_name: str,
                   checkpoint_path: str) -> str:
    """Resolved config plus the checkpoint's git-style blob hash; returns it."""
    sha = nk.git_blob_sha1(checkpoint_path)
    lines = config.manifest_lines() + [
        f"checkpoint = {checkpoint_name}",
        f"checkpoint_sha1 = {sha}",
        f"checkpoint_format = {nk.MAGIC}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return sha
