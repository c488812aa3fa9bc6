#!/usr/bin/env python3
"""Register a CSV/TXT/TSF file as a dataset artifact in a local store."""

import argparse
import sys
from pathlib import Path

from tslens.artifacts import ArtifactStore
from tslens.datasets import dataset_from_payload
from tslens.errors import TsLensError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("path", help="input file (.csv, .txt, or .tsf)")
    parser.add_argument("--name", default=None, help="artifact name (default: file stem)")
    parser.add_argument("--store-root", default="tslens-store")
    args = parser.parse_args(argv)

    path = Path(args.path)
    payload = path.read_bytes()
    name = args.name or path.stem
    try:
        parsed = dataset_from_payload(payload, {"filename": path.name}, default_name=name)
        first = parsed.series[0]
        metadata = {
            "filename": path.name,
            "format": parsed.source_format,
            "series_names": ",".join(parsed.series_names),
            "rows": str(first.n),
            "channels": str(first.channel_count),
        }
        if first.frequency_seconds is not None:
            metadata["frequency_seconds"] = str(first.frequency_seconds)
        artifact = ArtifactStore(args.store_root).put_artifact("dataset", name, payload, metadata)
    except TsLensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{artifact.kind}/{artifact.name}@{artifact.version} id={artifact.id}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
