"""Label-free synthetic tumors in CT volumes.

Volumes are numpy arrays shaped (nz, ny, nx); spacing is (sx, sy, sz) in
millimeters; recipes and configs are JSON strings shared with the CLI.
"""

import importlib
import os
import sys

try:
    from . import _core
except ImportError:  # dev tree: extension lives in the build dir
    _core_dir = os.environ.get("TUMORSYNTH_CORE_DIR")
    if _core_dir is None:
        raise
    sys.path.insert(0, _core_dir)
    _core = importlib.import_module("_core")
    sys.modules[__name__ + "._core"] = _core

CoreError = _core.CoreError
synthesize = _core.synthesize
dsc = _core.dsc
nsd = _core.nsd
extract_features = _core.extract_features
load_volume = _core.load_volume
save_volume = _core.save_volume
default_config = _core.default_config
make_recipe = _core.make_recipe
case_seed = _core.case_seed
lesion_seed = _core.lesion_seed

__version__ = _core.__version__
__all__ = [
    "CoreError",
    "synthesize",
    "dsc",
    "nsd",
    "extract_features",
    "load_volume",
    "save_volume",
    "default_config",
    "make_recipe",
    "case_seed",
    "lesion_seed",
]
