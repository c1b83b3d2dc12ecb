#!/usr/bin/env python3
"""Generates the bundled grid description files in data/.

The scenario parameters are documented defaults in typical per-unit ranges.
Every multi-machine grid follows the same aggregation-friendly pattern: the
external system is a slack bus behind a single weak tie, and the monitored
generator G1 plus the inverters form a coherent group behind it. The group
then swings against the external grid like one equivalent machine, which is
the regime the aggregated swing model describes.
"""
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

GEN_M = {"fast": 0.2, "medium": 0.4, "slow": 0.8}
GEN_D = 0.15
T_GOV = 0.2

# synchronverter electrical defaults (filter + transformer, p.u.)
INV_ELEC = "0.01 0.05 0.05 0.01 0.05 1.0 0.0002"  # r_f l_f c_f r_t l_t mf_if deadband


def header(grid, dyn, step_pm=-0.1, horizon=5.0, dt=1e-4):
    return [
        f"grid {grid} {dyn}",
        f"step_pm {step_pm}",
        f"horizon {horizon}",
        f"dt {dt}",
    ]


def write(grid, dyn, lines):
    path = DATA / f"{grid}_{dyn}.grid"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")


def smib():
    for dyn, m in GEN_M.items():
        lines = header("smib", dyn, dt=1e-3)
        lines += [
            "bus 2",
            "branch 0 1 0.2",
            "slack 1 1.0 0.0",
            # governor off: the 2-state SMIB regression model is exact here
            f"gen 0 {m} {GEN_D} {T_GOV} 0.05 0",
        ]
        write("smib", dyn, lines)


def bus3():
    # slack (external grid) - G1 - battery inverter; the 0-1 tie is the weak
    # link, the inverter rides with G1
    for dyn, m in GEN_M.items():
        lines = header("bus3", dyn)
        lines += [
            "bus 3",
            "branch 0 1 0.5",
            "branch 1 2 3.0",
            "load 2 0.01 -0.002",
            "slack 0 1.0 0.0",
            f"gen 1 {m} {GEN_D} {T_GOV} 0.0 1",
            "inv 2 0.05 0.3 " + INV_ELEC,
        ]
        write("bus3", dyn, lines)


def cigre14():
    # 15 buses: 0 = HV slack, 1 = G1 substation, two MV feeders plus a tie
    feeder1 = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8)]
    feeder2 = [(1, 9), (9, 10), (10, 11), (11, 12), (12, 13), (13, 14)]
    tie = [(8, 14)]
    for dyn, m in GEN_M.items():
        lines = header("cigre14", dyn, dt=5e-5)
        lines += ["bus 15", "branch 0 1 0.8"]
        for f, t in feeder1 + feeder2 + tie:
            lines.append(f"branch {f} {t} 10.0")
        for b in (3, 4, 5, 7, 8, 10, 11, 12, 13, 14):
            lines.append(f"load {b} 0.005 -0.001")
        lines.append("slack 0 1.0 0.0")
        lines.append(f"gen 1 {m} {GEN_D} {T_GOV} 0.0 1")
        for b in range(2, 14):
            lines.append(f"inv {b} 0.05 0.5 {INV_ELEC}")
        write("cigre14", dyn, lines)


def ieee118():
    rng = random.Random(118)
    n_bus = 118
    # meshed transmission topology: ring backbone plus random chords, 186
    # branches total like the reference system. Bus 0 is the interconnection
    # to the external system; only its two ring branches touch it, so the
    # remaining 117 buses swing as one coherent group against it.
    branches = [(i, (i + 1) % n_bus) for i in range(n_bus)]
    have = {frozenset(b) for b in branches}
    while len(branches) < 186:
        a, b = rng.randrange(1, n_bus), rng.randrange(1, n_bus)
        if a == b or frozenset((a, b)) in have:
            continue
        have.add(frozenset((a, b)))
        branches.append((a, b))
    sus = {}
    for b in branches:
        sus[b] = 1.0 if 0 in b else round(rng.uniform(20.0, 40.0), 3)

    # 19 generator buses (unit labels G1..G19); the dynamics setting decides
    # which units are synchronous machines, the rest are synchronverters
    gen_buses = [9, 11, 24, 25, 30, 45, 48, 53, 58, 60, 64, 65, 68, 79, 86, 88, 99, 102, 110]
    sync_units = {
        "fast": [1],
        "medium": [1, 5, 7],
        "slow": [1, 5, 7, 14, 17, 18],
    }

    load_buses = sorted(rng.sample([b for b in range(1, n_bus) if b not in gen_buses], 50))
    g_load = 0.02 / len(load_buses)

    for dyn, m in GEN_M.items():
        sync = sync_units[dyn]
        lines = header("ieee118", dyn)
        lines += [f"bus {n_bus}"]
        for br in branches:
            lines.append(f"branch {br[0]} {br[1]} {sus[br]}")
        for b in load_buses:
            lines.append(f"load {b} {g_load:.6f} {-0.2 * g_load:.6f}")
        lines.append("slack 0 1.0 0.0")
        # dispatch: secondary machines carry a small share, G1 starts unloaded
        extra = [u for u in sync if u != 1]
        pm_each = round(0.01 / len(extra), 4) if extra else 0.0
        for unit in range(1, 20):
            bus = gen_buses[unit - 1]
            if unit in sync:
                pm0 = 0.0 if unit == 1 else pm_each
                lines.append(f"gen {bus} {m} {GEN_D} {T_GOV} {pm0} 1")
        for unit in range(1, 20):
            bus = gen_buses[unit - 1]
            if unit not in sync:
                lines.append(f"inv {bus} 0.15 0.5 {INV_ELEC}")
        write("ieee118", dyn, lines)


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    smib()
    bus3()
    cigre14()
    ieee118()
