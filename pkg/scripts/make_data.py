"""Regenerate everything under data/ from the built-in synthetic worlds.

All generation is seeded, so rerunning this script reproduces the
committed files byte for byte.  Run from the repository root:

    python3 scripts/make_data.py
"""
import json
import pathlib

from occupath import worlds

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"

TWO_BLOCKS_SPEC = {
    "world": "../two_blocks_world.json",
    "seeds": [0, 1, 2, 3, 4],
    "start": [1.2, 5.0],
    "goal": [8.8, 5.0],
    "map": {
        "features": 1000,
        "lengthscale": 0.6,
        "epochs": 5,
        "step": 0.02,
        "l2": 1e-4,
        "grid_spacing": 1.9,
        "beams": 90,
        "scan_range": 14.0,
    },
    "body": None,  # filled in below
    "planner": {
        "eps_w": 0.03,
        "path_features": 100,
        "path_lengthscale": 0.15,
    },
    "rrt": {"max_samples": 6000},
}

OFFICE_SPEC = {
    "carmen": "../office_corridor.log",
    "seeds": [0, 1, 2, 3, 4],
    "start": [2.2, 3.2],
    "goal": [16.7, 10.2],
    "map": {
        "features": 2000,
        "lengthscale": 0.5,
        "epochs": 6,
        "step": 0.02,
        "l2": 1e-4,
        "free_per_beam": 2,
        "subsample": 1,
        "max_range": 12.0,
    },
    "body": None,
    "planner": {
        "via": [[16.7, 3.2]],
        "eps_w": 0.03,
        "path_features": 100,
        "path_lengthscale": 0.15,
    },
    "rrt": {"max_samples": 12000},
}


def disc_offsets(radius: float, rim_points: int = 6) -> list[list[float]]:
    from occupath.objective import disc_body
    off = disc_body(radius, rim_points).offsets
    return [[round(v, 12) for v in row] for row in off.tolist()]


def main() -> None:
    DATA.mkdir(exist_ok=True)
    (DATA / "experiments").mkdir(exist_ok=True)

    worlds.two_blocks_world().save(DATA / "two_blocks_world.json")
    worlds.office_world().save(DATA / "office_world.json")

    with open(DATA / "office_corridor.log", "w") as fh:
        from occupath.worldio import write_carmen
        write_carmen(worlds.office_scans(), fh)

    TWO_BLOCKS_SPEC["body"] = disc_offsets(0.4)
    OFFICE_SPEC["body"] = disc_offsets(0.3)
    for name, spec in (("two_blocks", TWO_BLOCKS_SPEC), ("office", OFFICE_SPEC)):
        with open(DATA / "experiments" / f"{name}.json", "w") as fh:
            json.dump(spec, fh, indent=1, sort_keys=True)
            fh.write("\n")

    for p in sorted(DATA.rglob("*")):
        if p.is_file():
            print(f"{p.relative_to(DATA.parent)}  ({p.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
