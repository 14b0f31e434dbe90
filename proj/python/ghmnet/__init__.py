"""Greenberg-Hastings dynamics on sensor networks in hallway domains."""

import json as _json
from pathlib import Path as _Path

from ._core import (
    GhmError,
    H1Basis,
    HallwayDomain,
    Network,
    augment_boundary_sensors,
    build_domain,
    build_network,
    cohomology_class,
    estimate_seed_probability,
    evade,
    find_defect,
    find_seed,
    hallway_grid_rects,
    homology_basis,
    is_continuous,
    paper_scenario,
    random_state,
    realize_class,
    run,
    run_scenario,
    sever_defect_links,
    step,
    wilson,
)

__version__ = "0.1.0"


def run_scenario_file(path, out_dir):
    """Run a scenario file; relative paths inside it resolve against its folder."""
    path = _Path(path)
    return run_scenario(path.read_text(), _Path(out_dir), path.parent)


def run_scenario_dict(scenario, out_dir):
    return run_scenario(_json.dumps(scenario), _Path(out_dir))


__all__ = [name for name in dir() if not name.startswith("_")]
