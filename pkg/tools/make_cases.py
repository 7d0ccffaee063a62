"""Regenerates the case files shipped in src/ucbenders/cases/."""

import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "ucbenders" / "cases"


def gen(id, bus, p_min, p_max, cost, su, sd, ru, rd, up, dn, init):
    return {
        "id": id, "bus": bus, "p_min": p_min, "p_max": p_max, "cost_lin": cost,
        "startup_cost": su, "shutdown_cost": sd, "ramp_up": ru, "ramp_down": rd,
        "min_up": up, "min_down": dn, "initial_status": init,
    }


def line(id, a, b, x, lim, eligible=True):
    return {"id": id, "from_bus": a, "to_bus": b, "reactance": x,
            "flow_limit": lim, "outage_eligible": eligible}


CASES = {}

CASES["tiny2"] = {
    "name": "tiny2",
    "horizon": 1,
    "reference_bus": "b1",
    "buses": ["b1", "b2"],
    "generators": [
        gen("g1", "b1", 10, 100, 10, 100, 0, 100, 100, 1, 1, -2),
        gen("g2", "b2", 10, 50, 20, 50, 0, 100, 100, 1, 1, -2),
    ],
    "lines": [line("l1", "b1", "b2", 0.1, 100)],
    "demand": {"b1": [120.0], "b2": [0.0]},
}

CASES["desk1"] = {
    "name": "desk1",
    "horizon": 3,
    "reference_bus": "b1",
    "buses": ["b1", "b2", "b3"],
    "generators": [
        gen("g1", "b1", 10, 80, 12, 40, 10, 60, 60, 1, 1, 4),
        gen("g2", "b2", 8, 60, 25, 15, 4, 50, 50, 1, 1, -4),
    ],
    "lines": [
        line("l12", "b1", "b2", 0.10, 60),
        line("l23", "b2", "b3", 0.12, 60),
        line("l13", "b1", "b3", 0.15, 60),
    ],
    "demand": {
        "b1": [20.0, 25.0, 22.0],
        "b2": [25.0, 32.0, 28.0],
        "b3": [15.0, 20.0, 17.0],
    },
}

CASES["desk2"] = {
    "name": "desk2",
    "horizon": 4,
    "reference_bus": "b1",
    "buses": ["b1", "b2", "b3", "b4"],
    "generators": [
        gen("g1", "b1", 15, 100, 10, 25, 6, 80, 80, 2, 2, 5),
        gen("g2", "b3", 10, 70, 22, 18, 5, 60, 60, 1, 1, 3),
        gen("g3", "b2", 5, 40, 35, 12, 3, 40, 40, 1, 1, -3),
    ],
    "lines": [
        line("l12", "b1", "b2", 0.10, 80),
        line("l23", "b2", "b3", 0.11, 80),
        line("l34", "b3", "b4", 0.09, 80),
        line("l41", "b4", "b1", 0.12, 80),
    ],
    "demand": {
        "b1": [25.0, 30.0, 34.0, 28.0],
        "b2": [30.0, 36.0, 40.0, 33.0],
        "b3": [20.0, 24.0, 27.0, 22.0],
        "b4": [15.0, 18.0, 21.0, 17.0],
    },
}

CASES["desk3"] = {
    "name": "desk3",
    "horizon": 4,
    "reference_bus": "b1",
    "buses": ["b1", "b2", "b3", "b4", "b5"],
    "generators": [
        gen("g1", "b1", 20, 120, 11, 30, 8, 90, 90, 2, 2, 6),
        gen("g2", "b3", 10, 80, 20, 20, 5, 70, 70, 2, 1, -2),
        gen("g3", "b5", 5, 50, 32, 10, 3, 45, 45, 1, 1, -5),
    ],
    "lines": [
        line("l12", "b1", "b2", 0.10, 90),
        line("l23", "b2", "b3", 0.12, 90),
        line("l34", "b3", "b4", 0.08, 90),
        line("l45", "b4", "b5", 0.11, 90),
        line("l51", "b5", "b1", 0.09, 90),
        line("l24", "b2", "b4", 0.14, 90, eligible=False),
    ],
    "demand": {
        "b1": [28.0, 34.0, 38.0, 30.0],
        "b2": [22.0, 27.0, 31.0, 24.0],
        "b3": [18.0, 22.0, 25.0, 20.0],
        "b4": [16.0, 20.0, 23.0, 18.0],
        "b5": [12.0, 15.0, 18.0, 14.0],
    },
}

CASES["desk4"] = {
    "name": "desk4",
    "horizon": 5,
    "reference_bus": "b1",
    "buses": ["b1", "b2", "b3", "b4", "b5", "b6"],
    "generators": [
        gen("g1", "b1", 25, 140, 9, 70, 18, 110, 110, 2, 2, 8),
        gen("g2", "b3", 15, 90, 18, 45, 12, 80, 80, 2, 2, 4),
        gen("g3", "b5", 8, 60, 28, 30, 8, 55, 55, 1, 1, -3),
        gen("g4", "b6", 5, 35, 40, 18, 4, 35, 35, 1, 1, -6),
    ],
    "lines": [
        line("l12", "b1", "b2", 0.10, 110),
        line("l23", "b2", "b3", 0.12, 110),
        line("l34", "b3", "b4", 0.09, 110),
        line("l45", "b4", "b5", 0.11, 110),
        line("l56", "b5", "b6", 0.10, 110),
        line("l61", "b6", "b1", 0.13, 110),
        line("l14", "b1", "b4", 0.15, 110, eligible=False),
        line("l25", "b2", "b5", 0.16, 110, eligible=False),
    ],
    "demand": {
        "b1": [30.0, 35.0, 42.0, 38.0, 31.0],
        "b2": [26.0, 31.0, 37.0, 33.0, 27.0],
        "b3": [22.0, 26.0, 31.0, 28.0, 23.0],
        "b4": [18.0, 21.0, 26.0, 23.0, 19.0],
        "b5": [14.0, 17.0, 21.0, 18.0, 15.0],
        "b6": [10.0, 12.0, 15.0, 13.0, 11.0],
    },
}

CASES["desk5"] = {
    "name": "desk5",
    "horizon": 6,
    "reference_bus": "b1",
    "buses": ["b1", "b2", "b3", "b4", "b5", "b6"],
    "generators": [
        gen("g1", "b1", 30, 150, 8, 80, 20, 120, 120, 3, 2, 10),
        gen("g2", "b2", 20, 100, 15, 50, 14, 90, 90, 2, 2, 6),
        gen("g3", "b4", 12, 75, 24, 38, 10, 65, 65, 2, 1, -2),
        gen("g4", "b5", 8, 55, 33, 26, 7, 50, 50, 1, 1, -4),
        gen("g5", "b6", 4, 30, 45, 15, 4, 30, 30, 1, 1, -8),
    ],
    "lines": [
        line("l12", "b1", "b2", 0.10, 130),
        line("l23", "b2", "b3", 0.11, 130),
        line("l34", "b3", "b4", 0.09, 130),
        line("l45", "b4", "b5", 0.12, 130),
        line("l56", "b5", "b6", 0.10, 130),
        line("l61", "b6", "b1", 0.13, 130),
        line("l13", "b1", "b3", 0.14, 130, eligible=False),
        line("l46", "b4", "b6", 0.15, 130, eligible=False),
    ],
    "demand": {
        "b1": [34.0, 40.0, 47.0, 52.0, 44.0, 36.0],
        "b2": [28.0, 33.0, 39.0, 43.0, 36.0, 30.0],
        "b3": [24.0, 28.0, 33.0, 37.0, 31.0, 26.0],
        "b4": [20.0, 23.0, 28.0, 31.0, 26.0, 21.0],
        "b5": [15.0, 18.0, 21.0, 23.0, 19.0, 16.0],
        "b6": [11.0, 13.0, 15.0, 17.0, 14.0, 12.0],
    },
}


def build_rts24():
    buses = [f"b{i}" for i in range(1, 25)]
    lines = []
    x_cycle = [0.084, 0.086, 0.105, 0.088, 0.082, 0.096, 0.061, 0.076,
               0.119, 0.054, 0.143, 0.066, 0.105, 0.092, 0.087, 0.101,
               0.059, 0.110, 0.073, 0.068, 0.094, 0.115, 0.080, 0.090]
    for i in range(24):
        a, b = i + 1, (i + 1) % 24 + 1
        lines.append(line(f"l{a}_{b}", f"b{a}", f"b{b}", x_cycle[i], 175))
    chords = [(1, 5, 0.091), (3, 9, 0.119), (4, 9, 0.104), (6, 10, 0.061),
              (8, 10, 0.165), (11, 14, 0.042), (12, 23, 0.124), (13, 23, 0.087),
              (15, 24, 0.052), (16, 19, 0.039)]
    for a, b, x in chords:
        lines.append(line(f"l{a}_{b}", f"b{a}", f"b{b}", x, 175))
    assert len(lines) == 34

    gens = [
        gen("g1", "b1", 16, 152, 13.3, 110, 28, 120, 120, 4, 2, 10),
        gen("g2", "b2", 16, 152, 13.3, 110, 28, 120, 120, 4, 2, 10),
        gen("g3", "b7", 25, 300, 20.7, 160, 40, 180, 180, 8, 4, 12),
        gen("g4", "b13", 69, 591, 20.9, 220, 55, 240, 240, 8, 5, 16),
        gen("g5", "b15", 54, 215, 21.2, 120, 30, 150, 150, 6, 3, -2),
        gen("g6", "b16", 54, 155, 10.5, 100, 25, 120, 120, 5, 3, 8),
        gen("g7", "b18", 100, 400, 5.5, 260, 65, 280, 280, 12, 6, 24),
        gen("g8", "b21", 100, 400, 5.5, 260, 65, 280, 280, 12, 6, 24),
        gen("g9", "b22", 10, 300, 0.1, 80, 20, 300, 300, 1, 1, 24),
        gen("g10", "b23", 62, 660, 10.5, 230, 58, 260, 260, 8, 5, 20),
    ]

    # daily system profile (fraction of peak) spread over 24 buses
    profile = [0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96,
               0.96, 0.95, 0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96,
               0.91, 0.83, 0.73, 0.63]
    bus_peak = {
        "b1": 108, "b2": 97, "b3": 180, "b4": 74, "b5": 71, "b6": 136,
        "b7": 125, "b8": 171, "b9": 175, "b10": 195, "b13": 265, "b14": 194,
        "b15": 317, "b16": 100, "b18": 333, "b19": 181, "b20": 128,
    }
    demand = {}
    for b in buses:
        peak = bus_peak.get(b, 0.0)
        demand[b] = [round(peak * f, 1) for f in profile]
    return {
        "name": "rts24",
        "horizon": 24,
        "reference_bus": "b1",
        "buses": buses,
        "generators": gens,
        "lines": lines,
        "demand": demand,
    }


CASES["rts24"] = build_rts24()


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in CASES.items():
        path = OUT / f"{name}.json"
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
