"""Python bindings for the aetrace label-history pipeline.

The compiled extension normally sits inside this package (installed wheel).
During development the CMake build tree hosts it instead; point
AETRACE_EXT_DIR at the directory containing the built module.
"""

import importlib
import importlib.util
import os
import sys
from pathlib import Path


def _load_core():
    try:
        return importlib.import_module("aetrace._core")
    except ImportError:
        ext_dir = os.environ.get("AETRACE_EXT_DIR")
        if not ext_dir:
            raise
        candidates = sorted(Path(ext_dir).glob("_core*.so")) or sorted(
            Path(ext_dir).glob("_core*.pyd")
        )
        if not candidates:
            raise ImportError(f"no _core extension found under {ext_dir}")
        spec = importlib.util.spec_from_file_location("aetrace._core", candidates[0])
        module = importlib.util.module_from_spec(spec)
        sys.modules["aetrace._core"] = module
        spec.loader.exec_module(module)
        return module


_core = _load_core()

AetraceError = _core.AetraceError
locate_section_4_8 = _core.locate_section_4_8
section_4_8_text = _core.section_4_8_text
parse_eu_number = _core.parse_eu_number
build_product_url = _core.build_product_url
extract_pdf_text = _core.extract_pdf_text
clean_term_text = _core.clean_term_text
judge = _core.judge
accuracy = _core.accuracy
km_estimate = _core.km_estimate
expand_atc = _core.expand_atc
run_pipeline = _core.run_pipeline

__all__ = [
    "AetraceError",
    "locate_section_4_8",
    "section_4_8_text",
    "parse_eu_number",
    "build_product_url",
    "extract_pdf_text",
    "clean_term_text",
    "judge",
    "accuracy",
    "km_estimate",
    "expand_atc",
    "run_pipeline",
]
