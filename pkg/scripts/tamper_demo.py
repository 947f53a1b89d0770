"""Run a drill, corrupt its dumped audit log, and watch verification localize it.

Writes three log files into the work directory: the clean original, a copy
with one flipped byte, and a copy with one record deleted. Verification
pins each kind of damage to the earliest affected sequence number.
"""

import argparse
import tempfile
from pathlib import Path

from mindcap.audit import verify_file, write_log
from mindcap.runner import Scenario, run_scenario


def _describe(path: Path) -> str:
    ok, first_bad, count = verify_file(path)
    if ok:
        return f"ok ({count} records)"
    if first_bad is None:
        return "unparseable"
    return f"tampered, earliest bad seq {first_bad}"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", default=None, help="where to write the log files")
    parser.add_argument("--seed", type=int, default=42, help="scenario seed")
    args = parser.parse_args()
    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="tamper-"))
    workdir.mkdir(parents=True, exist_ok=True)

    report = run_scenario(Scenario(name="drill", agent="quiz", episodes=6, seed=args.seed))
    clean = workdir / "audit.log"
    write_log(report.trail.records(), clean)
    print(f"log written: {clean}")
    print(f"clean copy:   {_describe(clean)}")

    lines = clean.read_text(encoding="utf-8").splitlines()
    target = len(lines) // 2

    flipped_line = lines[target]
    pos = flipped_line.index("\tdetail=") + len("\tdetail=")
    flipped_line = flipped_line[:pos] + chr(ord(flipped_line[pos]) ^ 1) + flipped_line[pos + 1 :]
    flipped = workdir / "audit_flipped.log"
    flipped.write_text(
        "\n".join(lines[:target] + [flipped_line] + lines[target + 1 :]) + "\n",
        encoding="utf-8",
    )
    print(f"byte flip at seq {target}: {_describe(flipped)}")

    clipped = workdir / "audit_deleted.log"
    clipped.write_text(
        "\n".join(lines[:target] + lines[target + 1 :]) + "\n", encoding="utf-8"
    )
    print(f"deleted seq {target}:      {_describe(clipped)}")


if __name__ == "__main__":
    main()
