from paradox_lens import __version__

__all__ = [
    "TOOL_NAME",
    "TOOL_VERSION",
    "SUMMARY_SCHEMA_VERSION",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_DATA",
    "EXIT_NUMERICAL",
    "DEFINITION_MEDIAN_STRICT",
    "DEFINITION_XBAR_MAJORITY",
    "DEFINITIONS",
    "SOURCE_OBSERVED",
    "SOURCE_2K_BINOMIAL",
    "SOURCE_2K_GAUSS",
    "SOURCE_3K",
    "SOURCES",
    "FLAG_VARIANCE_CLAMPED",
]

TOOL_NAME = "paradox_lens"
TOOL_VERSION = __version__

# Bumped whenever a key of a JSON summary changes meaning or disappears
SUMMARY_SCHEMA_VERSION = "1.0"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

DEFINITION_MEDIAN_STRICT = "median-strict"
DEFINITION_XBAR_MAJORITY = "xbar-majority"
DEFINITIONS = (DEFINITION_MEDIAN_STRICT, DEFINITION_XBAR_MAJORITY)

SOURCE_OBSERVED = "observed"
SOURCE_2K_BINOMIAL = "model-2k-binomial"
SOURCE_2K_GAUSS = "model-2k-gauss"
SOURCE_3K = "model-3k"
SOURCES = (SOURCE_OBSERVED, SOURCE_2K_BINOMIAL, SOURCE_2K_GAUSS, SOURCE_3K)

FLAG_VARIANCE_CLAMPED = "variance-clamped"
