"""Class indexing used throughout the package.

The three hypotheses are always stored in the order ``(spf, non.bf, tar.bf)``.
Integer labels index into that order; ``UNLABELED`` marks trials without
ground truth.
"""

SPF = 0
NONBF = 1
TARBF = 2
UNLABELED = -1

CLASS_NAMES = ("spf", "non.bf", "tar.bf")
# keys used in prior / cost configuration documents
PRIOR_KEYS = ("spf", "nonbf", "tarbf")

_BY_NAME = {name: i for i, name in enumerate(CLASS_NAMES)}
_BY_NAME["-"] = UNLABELED


def label_from_name(name):
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown class label {name!r}") from None


def label_name(code):
    return "-" if code == UNLABELED else CLASS_NAMES[code]
