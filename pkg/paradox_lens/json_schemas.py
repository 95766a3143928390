from .constants import DEFINITIONS, SOURCES, SUMMARY_SCHEMA_VERSION, TOOL_NAME

__all__ = [
    "ANALYZE_SUMMARY",
    "PREDICT_SUMMARY",
    "GENERATE_SUMMARY",
    "SWEEP_SUMMARY",
    "REWIRE_SUMMARY",
    "RUN_MANIFEST",
    "SUMMARY_SCHEMAS",
]


def _make_schema_id(name: str) -> str:
    return f"urn:{TOOL_NAME}:schemas:{name}:{SUMMARY_SCHEMA_VERSION}"


_SCHEMA = "https://json-schema.org/draft/2020-12/schema"

_PROBABILITY = {"type": "number", "minimum": 0, "maximum": 1}
_CORRELATION = {"type": "number", "minimum": -1, "maximum": 1}
_COUNT = {"type": "integer", "minimum": 0}
_DEGREE = {"type": "integer", "minimum": 1}
_SHA256 = {"type": "string", "pattern": "^[0-9a-f]{64}$"}


def _header(command: str) -> dict:
    return {
        "schema_version": {"const": SUMMARY_SCHEMA_VERSION},
        "command": {"const": command},
    }


_INPUT = {
    "type": "object",
    "properties": {
        "path": {"type": "string"},
        "sha256": _SHA256,
    },
    "required": ["path", "sha256"],
}

_INGESTION = {
    "type": "object",
    "properties": {
        "raw_lines": _COUNT,
        "parsed_edges": _COUNT,
        "dropped_self_loops": _COUNT,
        "deduplicated_edges": _COUNT,
        "relabeled_ids": {"type": "boolean"},
        "isolated_nodes": _COUNT,
    },
    "required": [
        "raw_lines",
        "parsed_edges",
        "dropped_self_loops",
        "deduplicated_edges",
        "relabeled_ids",
        "isolated_nodes",
    ],
}

_GRAPH = {
    "type": "object",
    "properties": {
        "node_count": _COUNT,
        "edge_count": _COUNT,
        "mean_degree": {"type": "number", "minimum": 0},
        "max_degree": _COUNT,
        "assortativity": _CORRELATION,
    },
    "required": ["node_count", "edge_count", "mean_degree", "max_degree", "assortativity"],
}

_GENERATION_REPORT = {
    "type": "object",
    "properties": {
        "seed": _COUNT,
        "spec_digest": _SHA256,
        "node_count": _COUNT,
        "edge_count": _COUNT,
        "sampled_edges": _COUNT,
        "relabeled_ends": _COUNT,
        "repaired_conflicts": _COUNT,
        "dropped_conflicts": _COUNT,
        "joint_tv_distance": {"type": "number", "minimum": 0},
        "degree_tv_distance": {"type": "number", "minimum": 0},
        "target_assortativity": _CORRELATION,
        "realized_assortativity": _CORRELATION,
    },
    "required": [
        "seed",
        "spec_digest",
        "node_count",
        "edge_count",
        "sampled_edges",
        "relabeled_ends",
        "repaired_conflicts",
        "dropped_conflicts",
        "joint_tv_distance",
        "degree_tv_distance",
        "target_assortativity",
        "realized_assortativity",
    ],
}


ANALYZE_SUMMARY = {
    "$id": _make_schema_id("analyze_summary"),
    "$schema": _SCHEMA,
    "title": "AnalyzeSummary",
    "type": "object",
    "properties": {
        **_header("analyze"),
        "input": _INPUT,
        "ingestion": _INGESTION,
        "graph": _GRAPH,
        "definition": {"enum": list(DEFINITIONS)},
        # Q_>: probability that a random edge end has a higher-degree partner, weighted by the node's degree class
        "q_exceed_prob": _PROBABILITY,
        "k_c": _DEGREE,
        "mu_half_crossing": {"oneOf": [_DEGREE, {"type": "null"}]},
        "global_p": _PROBABILITY,
        "paradox_nodes": _COUNT,
        "active_nodes": _COUNT,
        "excluded_isolated": _COUNT,
        "definition_disagreements": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"k": _DEGREE, "nodes": _COUNT},
                "required": ["k", "nodes"],
            },
        },
        "xbar_at_critical_degree": {
            "type": "object",
            "properties": {
                "k": _DEGREE,
                "nodes": _COUNT,
                "mean": _PROBABILITY,
                "variance": {"type": "number", "minimum": 0},
            },
            "required": ["k", "nodes", "mean", "variance"],
        },
    },
    "required": [
        "schema_version",
        "command",
        "input",
        "ingestion",
        "graph",
        "definition",
        "q_exceed_prob",
        "k_c",
        "global_p",
        "paradox_nodes",
        "active_nodes",
    ],
}

PREDICT_SUMMARY = {
    "$id": _make_schema_id("predict_summary"),
    "$schema": _SCHEMA,
    "title": "PredictSummary",
    "type": "object",
    "properties": {
        **_header("predict"),
        "input": _INPUT,
        "definition": {"enum": list(DEFINITIONS)},
        "k_c": _DEGREE,
        "observed_global_p": _PROBABILITY,
        "models": {
            "type": "object",
            "propertyNames": {"enum": list(SOURCES)},
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "global_p": _PROBABILITY,
                    # Mean over degree classes of |f_model(k) - f_observed(k)|
                    "mean_abs_error": {"type": "number", "minimum": 0},
                    "flagged_classes": {"type": "array", "items": _DEGREE},
                },
                "required": ["global_p", "mean_abs_error", "flagged_classes"],
            },
        },
    },
    "required": ["schema_version", "command", "input", "definition", "k_c", "observed_global_p", "models"],
}

GENERATE_SUMMARY = {
    "$id": _make_schema_id("generate_summary"),
    "$schema": _SCHEMA,
    "title": "GenerateSummary",
    "type": "object",
    "properties": {
        **_header("generate"),
        "generator": {"enum": ["lognormal", "matrix", "core-periphery"]},
        "seed": _COUNT,
        "graph": _GRAPH,
        "target_assortativity": {"oneOf": [_CORRELATION, {"type": "null"}]},
        "report": {"oneOf": [_GENERATION_REPORT, {"type": "null"}]},
    },
    "required": ["schema_version", "command", "generator", "seed", "graph", "report"],
}

SWEEP_SUMMARY = {
    "$id": _make_schema_id("sweep_summary"),
    "$schema": _SCHEMA,
    "title": "SweepSummary",
    "type": "object",
    "properties": {
        **_header("sweep"),
        "m": {"type": "number"},
        "s": {"type": "number", "exclusiveMinimum": 0},
        "k_max": _DEGREE,
        "definition": {"enum": list(DEFINITIONS)},
        "points": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "c": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
                    "r": _CORRELATION,
                    "p_paradox": _PROBABILITY,
                    "transition_width": _COUNT,
                    "empirical_seed": _COUNT,
                    "empirical_r": _CORRELATION,
                    "empirical_global_p": _PROBABILITY,
                    # Fitted target the generator realizes at empirical_node_count
                    "reference_r": _CORRELATION,
                    "reference_global_p": _PROBABILITY,
                },
                "required": ["c", "r", "p_paradox", "transition_width"],
            },
        },
        "empirical_node_count": {"oneOf": [{"type": "integer", "minimum": 2}, {"type": "null"}]},
    },
    "required": ["schema_version", "command", "m", "s", "k_max", "points"],
}

REWIRE_SUMMARY = {
    "$id": _make_schema_id("rewire_summary"),
    "$schema": _SCHEMA,
    "title": "RewireSummary",
    "type": "object",
    "properties": {
        **_header("rewire"),
        "input": _INPUT,
        "seed": _COUNT,
        "target_r": _CORRELATION,
        "tolerance": {"type": "number", "minimum": 0},
        "initial_r": _CORRELATION,
        "achieved_r": _CORRELATION,
        "steps": _COUNT,
        "accepted_swaps": _COUNT,
        "reached": {"type": "boolean"},
        "graph": _GRAPH,
    },
    "required": [
        "schema_version",
        "command",
        "input",
        "seed",
        "target_r",
        "initial_r",
        "achieved_r",
        "steps",
        "accepted_swaps",
        "reached",
    ],
}

RUN_MANIFEST = {
    "$id": _make_schema_id("run_manifest"),
    "$schema": _SCHEMA,
    "title": "RunManifest",
    "type": "object",
    "properties": {
        "command_line": {"type": "array", "items": {"type": "string"}},
        "command": {"enum": ["analyze", "predict", "generate", "sweep", "rewire"]},
        "input_digests": {"type": "object", "additionalProperties": _SHA256},
        "seeds": {"type": "array", "items": _COUNT},
        "tool_version": {"type": "string"},
        "summary_schema_version": {"const": SUMMARY_SCHEMA_VERSION},
        "timestamp": {"type": "string", "format": "date-time"},
        "outputs": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"path": {"type": "string"}, "sha256": _SHA256},
                "required": ["path", "sha256"],
            },
        },
    },
    "required": [
        "command_line",
        "command",
        "input_digests",
        "seeds",
        "tool_version",
        "summary_schema_version",
        "timestamp",
        "outputs",
    ],
}

SUMMARY_SCHEMAS = {
    "analyze": ANALYZE_SUMMARY,
    "predict": PREDICT_SUMMARY,
    "generate": GENERATE_SUMMARY,
    "sweep": SWEEP_SUMMARY,
    "rewire": REWIRE_SUMMARY,
}
