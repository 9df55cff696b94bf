"""Dockerfile version-pin mining and update recommendation."""

import importlib.util
import os
import sys


def _load_extension():
    try:
        from . import _dockmeta  # installed layout

        return _dockmeta
    except ImportError:
        pass
    # Development layout: the extension lives in the build tree and
    # DOCKMETA_EXT_DIR points at it.
    ext_dir = os.environ.get("DOCKMETA_EXT_DIR")
    if not ext_dir:
        raise ImportError(
            "dockmeta._dockmeta not built; install the package or set "
            "DOCKMETA_EXT_DIR to the build directory"
        )
    for name in sorted(os.listdir(ext_dir)):
        if name.startswith("_dockmeta") and name.endswith(".so"):
            spec = importlib.util.spec_from_file_location(
                "dockmeta._dockmeta", os.path.join(ext_dir, name)
            )
            module = importlib.util.module_from_spec(spec)
            sys.modules["dockmeta._dockmeta"] = module
            spec.loader.exec_module(module)
            return module
    raise ImportError(f"no _dockmeta extension found in {ext_dir}")


_ext = _load_extension()

parse_dockerfile = _ext.parse_dockerfile
extract_urls = _ext.extract_urls
match_github_url = _ext.match_github_url
version_sort = _ext.version_sort
unified_diff = _ext.unified_diff
scan = _ext.scan
classify = _ext.classify
groups = _ext.groups
recommend = _ext.recommend

__all__ = [
    "parse_dockerfile",
    "extract_urls",
    "match_github_url",
    "version_sort",
    "unified_diff",
    "scan",
    "classify",
    "groups",
    "recommend",
]
