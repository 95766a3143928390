import aiofiles
import asyncio
import io
import jsonschema
import numpy as np
import pandas as pd

from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .constants import SUMMARY_SCHEMA_VERSION, TOOL_VERSION
from .degree_structure import DegreeStats
from .graph import Graph, write_edge_list
from .json_schemas import RUN_MANIFEST, SUMMARY_SCHEMAS
from .logger import logger
from .models import OutputFile, RunManifest
from .observed import ParadoxProfile
from .utils import frame_to_csv, json_dump_stable, sha256_bytes

__all__ = [
    "summary_header",
    "graph_summary",
    "validate_summary",
    "prediction_frame",
    "edge_list_text",
    "write_artifacts",
    "build_manifest",
    "write_manifest",
]


def summary_header(command: str) -> dict:
    return {"schema_version": SUMMARY_SCHEMA_VERSION, "command": command}


def graph_summary(g: Graph, stats: DegreeStats) -> dict:
    return {
        "node_count": g.node_count,
        "edge_count": g.edge_count,
        "mean_degree": stats.mean_degree,
        "max_degree": int(stats.degrees[-1]),
        "assortativity": stats.assortativity,
    }


def validate_summary(summary: dict) -> None:
    """Raises jsonschema.ValidationError if the summary does not match the schema of its command."""
    jsonschema.validate(summary, SUMMARY_SCHEMAS[summary["command"]], cls=jsonschema.Draft202012Validator)


def prediction_frame(observed: ParadoxProfile, predictions: dict[str, ParadoxProfile]) -> pd.DataFrame:
    """
    One row per degree class: p(k), the observed f(k) and one f column per model (``f_2k_binomial``, ...). The flags
    column joins the model flags of each class with ';'.
    """

    df = pd.DataFrame({"k": observed.degrees, "p": observed.p, "f_observed": observed.f})
    flags: dict[int, list[str]] = {}

    for source, profile in predictions.items():
        if not np.array_equal(profile.degrees, observed.degrees):
            raise ValueError(f"{source} profile is defined on different degree classes than the observed profile")
        df[f"f_{source.removeprefix('model-').replace('-', '_')}"] = profile.f
        for k, fl in profile.flags.items():
            flags.setdefault(k, []).extend(f"{source}:{f}" for f in fl)

    df["flags"] = [";".join(flags.get(k, ())) for k in observed.degrees.tolist()]
    return df


def edge_list_text(g: Graph, header: dict[str, str]) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf, header)
    return buf.getvalue()


async def _write_one(path: Path, content: str, semaphore: asyncio.Semaphore) -> OutputFile:
    data = content.encode("utf-8")
    async with semaphore:
        async with aiofiles.open(path, "wb") as fh:
            await fh.write(data)
    logger.debug(f"Wrote {path} ({len(data)} bytes)")
    return OutputFile(path=str(path), sha256=sha256_bytes(data))


async def write_artifacts(files: dict[Path, str | pd.DataFrame | dict], threads: int) -> tuple[OutputFile, ...]:
    """
    Writes CSV frames, JSON summaries (validated against their schemas first) and plain text concurrently, at most
    ``threads`` at a time. Parent directories are created as needed.
    :return: The written files with their content digests, sorted by path.
    """

    rendered: dict[Path, str] = {}
    for path, content in files.items():
        if isinstance(content, pd.DataFrame):
            rendered[path] = frame_to_csv(content)
        elif isinstance(content, dict):
            if "command" in content and "schema_version" in content:
                validate_summary(content)
            rendered[path] = json_dump_stable(content)
        else:
            rendered[path] = content

    for parent in {p.parent for p in rendered}:
        parent.mkdir(parents=True, exist_ok=True)

    semaphore = asyncio.Semaphore(threads)
    outputs = await asyncio.gather(*(_write_one(p, c, semaphore) for p, c in rendered.items()))

    logger.info(f"Wrote {len(outputs)} artifacts")
    return tuple(sorted(outputs, key=lambda o: o.path))


def build_manifest(
    command_line: Sequence[str],
    command: str,
    input_digests: dict[str, str],
    seeds: Sequence[int],
    outputs: Sequence[OutputFile],
) -> RunManifest:
    return RunManifest(
        command_line=tuple(command_line),
        command=command,
        input_digests=input_digests,
        seeds=tuple(seeds),
        tool_version=TOOL_VERSION,
        summary_schema_version=SUMMARY_SCHEMA_VERSION,
        timestamp=datetime.now(timezone.utc),
        outputs=tuple(outputs),
    )


async def write_manifest(path: Path, manifest: RunManifest) -> None:
    content = manifest.model_dump(mode="json")
    jsonschema.validate(content, RUN_MANIFEST, cls=jsonschema.Draft202012Validator)
    path.parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(path, "wb") as fh:
        await fh.write(json_dump_stable(content).encode("utf-8"))
    logger.info(f"Wrote run manifest {path}")
