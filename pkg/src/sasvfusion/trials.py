"""Columnar trial lists and the tab-separated trial file format.

A trial file has the header ``trial_id\ts_asv\ts_cm\tlabel``; labels are
``tar.bf``, ``non.bf``, ``spf`` or ``-`` (unlabeled). Scores are written with
17 significant digits so that a write/read cycle is lossless.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .classes import UNLABELED, label_from_name, label_name
from .errors import DomainError

HEADER = ("trial_id", "s_asv", "s_cm", "label")


class TrialScore(NamedTuple):
    trial_id: str
    s_asv: float
    s_cm: float
    label: Optional[int]


def fmt(x):
    return format(float(x), ".17g")


@dataclass(eq=False)
class Trials:
    """Parallel arrays describing a list of trials."""

    trial_id: np.ndarray
    s_asv: np.ndarray
    s_cm: np.ndarray
    label: np.ndarray

    def __post_init__(self):
        self.trial_id = np.asarray(self.trial_id, dtype=object)
        self.s_asv = np.asarray(self.s_asv, dtype=float)
        self.s_cm = np.asarray(self.s_cm, dtype=float)
        self.label = np.asarray(self.label, dtype=np.int64)
        n = self.trial_id.shape[0]
        if not (self.s_asv.shape == self.s_cm.shape == self.label.shape == (n,)):
            raise DomainError("trial columns differ in length")
        if not (np.all(np.isfinite(self.s_asv)) and np.all(np.isfinite(self.s_cm))):
            raise DomainError("trial scores must be finite")

    def __len__(self):
        return self.label.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            lab = int(self.label[i])
            yield TrialScore(self.trial_id[i], float(self.s_asv[i]), float(self.s_cm[i]), None if lab == UNLABELED else lab)

    def __eq__(self, other):
        return (
            isinstance(other, Trials)
            and len(self) == len(other)
            and np.array_equal(self.trial_id, other.trial_id)
            and np.array_equal(self.s_asv, other.s_asv)
            and np.array_equal(self.s_cm, other.s_cm)
            and np.array_equal(self.label, other.label)
        )

    @property
    def is_labeled(self):
        return bool(np.all(self.label != UNLABELED))

    def subset(self, mask):
        return Trials(self.trial_id[mask], self.s_asv[mask], self.s_cm[mask], self.label[mask])

    @classmethod
    def from_rows(cls, rows):
        rows = list(rows)
        return cls(
            [r.trial_id for r in rows],
            [r.s_asv for r in rows],
            [r.s_cm for r in rows],
            [UNLABELED if r.label is None else r.label for r in rows],
        )


def format_tsv(trials, extra=None):
    """Trial file contents as a string; ``extra`` maps additional column names to arrays."""
    extra = extra or {}
    lines = ["\t".join(HEADER + tuple(extra))]
    for i in range(len(trials)):
        tid = str(trials.trial_id[i])
        if "\t" in tid or "\n" in tid:
            raise DomainError(f"trial id {tid!r} contains a tab or newline")
        cols = [tid, fmt(trials.s_asv[i]), fmt(trials.s_cm[i]), label_name(int(trials.label[i]))]
        cols.extend(fmt(col[i]) if not isinstance(col[i], str) else col[i] for col in extra.values())
        lines.append("\t".join(cols))
    return "\n".join(lines) + "\n"


def write_tsv(trials, path, extra=None):
    """Write a trial file; see :func:`format_tsv`."""
    text = format_tsv(trials, extra)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def read_tsv(path):
    """Read a trial file written by :func:`write_tsv` (extra columns are ignored)."""
    with open(path, encoding="utf-8", newline="") as f:
        # split on LF only: ids may hold other Unicode line separators
        lines = [line.removesuffix("\r") for line in f.read().split("\n")]
    if lines == [""]:
        raise DomainError(f"{path}: empty trial file")
    header = tuple(lines[0].split("\t"))
    if header[:4] != HEADER:
        raise DomainError(f"{path}: header must start with {'/'.join(HEADER)}")
    ids, sa, sc, lab = [], [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) < 4:
            raise DomainError(f"{path}:{lineno}: expected 4 columns")
        try:
            ids.append(cols[0])
            sa.append(float(cols[1]))
            sc.append(float(cols[2]))
            lab.append(label_from_name(cols[3]))
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: {exc}") from None
    return Trials(ids, sa, sc, lab)
