"""Run the acceptance suite and write the per-criterion verdicts as JSON."""

import argparse
import json
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-o", "--output", default="acceptance.json")
    args = ap.parse_args()
    rc = pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"])
    verdicts = {str(k): {"pass": ok, "detail": d} for k, (ok, d) in sorted(sys.modules["conftest"].ACCEPTANCE.items())}
    Path(args.output).write_text(json.dumps(verdicts, indent=2) + "\n")
    print(f"{sum(v['pass'] for v in verdicts.values())}/{len(verdicts)} criteria passed -> {args.output}")
    return int(rc)


if __name__ == "__main__":
    sys.exit(main())
