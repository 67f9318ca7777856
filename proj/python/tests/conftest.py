import os
import sys

# ctest points this at the in-tree build; an editable install would otherwise win.
_build = os.environ.get("ERGKIT_MODULE_DIR")
if _build:
    sys.meta_path[:] = [f for f in sys.meta_path if not type(f).__module__.startswith("_editable_skbc_ergkit")]
    sys.path.insert(0, _build)
    sys.modules.pop("ergkit", None)
