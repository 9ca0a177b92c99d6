#!/usr/bin/env python3
# Copyright 2026 The Servoland Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Recompute run summaries from trace CSVs and compare with summary.csv.

Either point it at an existing batch directory (summary.csv plus traces/) or
let it run the CLI first:

    recompute_summary.py --dir out/mc
    recompute_summary.py --cli build/tools/servoland --config configs/nominal_noise.yaml \
        --runs 40 --work-dir /tmp/recompute
"""

import argparse
import csv
import math
import pathlib
import subprocess
import sys

APPROACH_DISTANCE = 1.0
BEFORE_TRIGGER = {"fly_to_hover", "hover"}
TOLERANCE = 1e-9


def read_trace(path):
    with open(path, newline="") as f:
        version = f.readline().strip()
        if version != "# servoland-trace v1":
            raise ValueError(f"{path}: unexpected version line {version!r}")
        return list(csv.DictReader(f))


def recompute(rows):
    t = [float(r["t"]) for r in rows]
    last = rows[-1]
    phase = last["phase"]
    if phase == "motors_off":
        result = "landed"
    elif phase == "aborted":
        result = "missed_deck" if last["event"] == "missed_deck" else "lost_target"
    else:
        result = "timed_out"

    trigger_time = next((float(r["t"]) for r in rows if r["phase"] == "catch_up" and r["event"]), None)
    first_detection = next(
        (float(r["t"]) for r in rows if r["detected"] == "1" and r["phase"] not in BEFORE_TRIGGER), None
    )
    min_distance = min(
        math.dist(
            (float(r["uav_x"]), float(r["uav_y"]), float(r["uav_z"])),
            (float(r["deck_x"]), float(r["deck_y"]), float(r["deck_z"])),
        )
        for r in rows
    )

    out = {
        "result": result,
        "duration": t[-1],
        "trigger_time": trigger_time,
        "first_detection": first_detection,
        "min_deck_distance": min_distance,
        "approached": min_distance < APPROACH_DISTANCE,
        "final_event": last["event"] if phase == "aborted" else "",
        "detection_to_touchdown": None,
        "touchdown_offset": None,
        "touchdown_rel_speed": None,
    }
    if result == "landed":
        if first_detection is not None:
            out["detection_to_touchdown"] = t[-1] - first_detection
        else:
            out["detection_to_touchdown"] = t[-1] - (trigger_time or 0.0)
        out["touchdown_offset"] = math.hypot(
            float(last["uav_x"]) - float(last["deck_x"]), float(last["uav_y"]) - float(last["deck_y"])
        )
        yaw = float(last["uav_yaw"])
        vx, vy = float(last["vel_vx"]), float(last["vel_vy"])
        wx = math.cos(yaw) * vx - math.sin(yaw) * vy
        wy = math.sin(yaw) * vx + math.cos(yaw) * vy
        out["touchdown_rel_speed"] = math.hypot(wx - float(last["deck_vx"]), wy - float(last["deck_vy"]))
    return out


def parse_reported(row):
    def opt(key):
        return float(row[key]) if row[key] else None

    return {
        "result": row["result"],
        "duration": float(row["duration"]),
        "trigger_time": opt("trigger_time"),
        "first_detection": opt("first_detection"),
        "min_deck_distance": float(row["min_deck_distance"]),
        "approached": row["approached"] == "1",
        "final_event": row["final_event"],
        "detection_to_touchdown": opt("detection_to_touchdown"),
        "touchdown_offset": opt("touchdown_offset"),
        "touchdown_rel_speed": opt("touchdown_rel_speed"),
    }


def same(a, b):
    if isinstance(a, float) and isinstance(b, float):
        return abs(a - b) <= TOLERANCE * max(1.0, abs(a), abs(b))
    return a == b


def check_batch(directory):
    directory = pathlib.Path(directory)
    with open(directory / "summary.csv", newline="") as f:
        reported = list(csv.DictReader(f))
    if not reported:
        print("summary.csv has no runs")
        return 1
    mismatches = 0
    for row in reported:
        trace = directory / "traces" / f"run_{row['seed']}.csv"
        expected = recompute(read_trace(trace))
        got = parse_reported(row)
        for key, value in expected.items():
            if not same(value, got[key]):
                mismatches += 1
                print(f"seed {row['seed']}: {key} reported {got[key]!r}, recomputed {value!r}")
    landed = sum(1 for r in reported if r["result"] == "landed")
    approached = sum(1 for r in reported if r["approached"] == "1")
    print(f"{len(reported)} runs checked, {landed} landed, {approached} approached, {mismatches} mismatches")
    return 0 if mismatches == 0 else 1


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--dir", help="existing batch output directory")
    parser.add_argument("--cli", help="servoland executable; runs a batch first")
    parser.add_argument("--config", help="configuration for the batch")
    parser.add_argument("--runs", type=int, default=20)
    parser.add_argument("--work-dir", default="recompute_work")
    args = parser.parse_args()

    if args.cli:
        cmd = [args.cli, "mc", "--runs", str(args.runs), "--out", args.work_dir, "--traces"]
        if args.config:
            cmd += ["--config", args.config]
        subprocess.run(cmd, check=True)
        return check_batch(args.work_dir)
    if args.dir:
        return check_batch(args.dir)
    parser.error("give --dir or --cli")
    return 2


if __name__ == "__main__":
    sys.exit(main())
