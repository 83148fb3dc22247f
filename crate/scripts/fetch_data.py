#!/usr/bin/env python3
"""Extract benchmark CSVs from the keel_ds wheel into ./data.

Usage: scripts/fetch_data.py [--wheel PATH] [--out DIR]

Without --wheel the wheel is fetched with `pip download keel_ds==0.2.5`.
"""
import argparse
import pathlib
import subprocess
import sys
import tempfile
import zipfile

MEMBERS = {
    "optdigits.csv": "keel_ds/data/balanced/raw/optdigits.dat",
    "letter.csv": "keel_ds/data/balanced/raw/letter.dat",
}


def find_wheel(tmp):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-d", tmp, "keel_ds==0.2.5"],
        check=True,
    )
    return next(pathlib.Path(tmp).glob("keel_ds-*.whl"))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel")
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        wheel = pathlib.Path(args.wheel) if args.wheel else find_wheel(tmp)
        with zipfile.ZipFile(wheel) as z:
            for name, member in MEMBERS.items():
                lines = z.read(member).decode().splitlines()
                rows = [l.strip() for l in lines if l.strip() and not l.startswith("@")]
                (out / name).write_text("\n".join(rows) + "\n")
                print(f"{out / name}: {len(rows)} rows")
    print("nursery.csv is not bundled; place the UCI nursery.data file at", out / "nursery.csv")


if __name__ == "__main__":
    main()
