"""Pseudo-label synthesis from point/line weak labels.

Label documents and configs may be given as JSON text or as plain dicts.
Images are 2-D uint8 arrays; masks come back as 2-D bool arrays.
"""

import json

from . import _weakseg
from ._weakseg import (
    ConstraintGeometryError,
    LabelError,
    bce_dice_loss,
    close,
    dice,
    dilate,
    erode,
    fill_polygon,
    mean_smooth,
    rasterize_bezier,
    rasterize_segment,
)

__version__ = _weakseg.version()

__all__ = [
    "ConstraintGeometryError",
    "LabelError",
    "bce_dice_loss",
    "bounding_boxes",
    "close",
    "default_config",
    "dice",
    "dilate",
    "erode",
    "fill_polygon",
    "generate",
    "make_phantom",
    "mean_smooth",
    "parse_labels",
    "rasterize_bezier",
    "rasterize_segment",
]


def _text(doc):
    if doc is None:
        return ""
    return doc if isinstance(doc, str) else json.dumps(doc)


def default_config():
    return json.loads(_weakseg.effective_config(""))


def parse_labels(document):
    """Validates a weak-label document and returns its canonical dict form."""
    return json.loads(_weakseg.canonical_labels(_text(document)))


def bounding_boxes(document, margin=0):
    """(kind, row_min, row_max, col_min, col_max) per region."""
    return _weakseg.bounding_boxes(_text(document), margin)


def generate(image, labels, config=None, *, return_timings=False):
    """Pseudo-label mask for one slice. `config` holds overrides of the defaults."""
    mask, _empty, timings = _weakseg.generate(image, _text(labels), _text(config))
    return (mask, timings) if return_timings else mask


def make_phantom(kind="anterior_horn", seed=0, noise_sigma=0.0, height=224, width=224):
    """Returns (image, truth, labels dict)."""
    image, truth, labels = _weakseg.make_phantom(kind, seed, noise_sigma, height, width)
    return image, truth, json.loads(labels)
