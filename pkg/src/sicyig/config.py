"""Sensor configuration: schema, unit-suffixed keys, load/save round trip.

Configs are TOML with one canonical unit per quantity baked into every
key name (``width_nm``, ``b_sat_G``, ``t0_us``, ...).  Dimensionless
quantities carry a marker suffix (``_prob``, ``_ratio``, ``_factor``,
``_count``, ...), so no bare numeric key exists.  Unknown keys are
rejected with the nearest valid key named, which also catches unit-suffix
mistakes such as ``width_um``.
"""

from __future__ import annotations

import difflib
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .deer import DeerScenario
from .magnetostatics import StripeGeometry, find_xopt
from .photonics import PhcLattice
from .snr import SnrBudget
from .spectra import HyperfineCoupling, SpinSystem
from .swr import SwrModel

SCHEMA_VERSION = 1

UNIT_SUFFIXES = (
    "_nm", "_um", "_G", "_GHz", "_MHz", "_us", "_W", "_per_nm2", "_per_cm2",
    "_G_nm2", "_MHz_per_G", "_deg", "_prob", "_ratio", "_factor", "_count",
    "_hbar", "_unit", "_version",
)

# (section, key, kind); kind: f float, i int, s str, v3 three floats,
# fl float list.  Section "" holds top-level keys; "spin_system" and
# "spin_system.hyperfine" are arrays of tables.
_SCHEMA = [
    ("", "schema_version", "i"),
    ("stripe", "width_nm", "f"),
    ("stripe", "thickness_nm", "f"),
    ("stripe", "length_um", "f"),
    ("stripe", "b_sat_G", "f"),
    ("membrane", "thickness_nm", "f"),
    ("membrane", "probe_depth_nm", "f"),
    ("microwave", "frequency_GHz", "f"),
    ("swr", "exchange_G_nm2", "f"),
    ("swr", "grid_count", "i"),
    ("swr", "gyromag_MHz_per_G", "f"),
    ("swr", "boundary", "s"),
    ("swr", "scan_start_G", "f"),
    ("swr", "scan_stop_G", "f"),
    ("spin_system", "label", "s"),
    ("spin_system", "spin_hbar", "f"),
    ("spin_system", "g_factor", "v3"),
    ("spin_system", "g_euler_deg", "v3"),
    ("spin_system", "d_zfs_MHz", "f"),
    ("spin_system", "e_zfs_MHz", "f"),
    ("spin_system", "linewidth_G", "f"),
    ("spin_system.hyperfine", "nuclear_spin_hbar", "f"),
    ("spin_system.hyperfine", "a_MHz", "v3"),
    ("spin_system.hyperfine", "euler_deg", "v3"),
    ("deer", "plane_distance_nm", "f"),
    ("deer", "concentration_per_nm2", "f"),
    ("deer", "pump_flip_prob", "f"),
    ("deer", "b0_direction_unit", "v3"),
    ("deer", "g_probe_factor", "f"),
    ("deer", "g_target_factor", "f"),
    ("deer", "t0_us", "f"),
    ("deer", "td_start_us", "f"),
    ("deer", "td_stop_us", "f"),
    ("deer", "td_count", "i"),
    ("snr", "t0_us", "f"),
    ("snr", "t2_us", "f"),
    ("snr", "collection_prob", "f"),
    ("snr", "detection_prob", "f"),
    ("snr", "sigma_over_area_ratio", "f"),
    ("snr", "power_W", "f"),
    ("snr", "wavelength_nm", "f"),
    ("snr", "integration_time_us", "f"),
    ("snr", "contrast_x_ratio", "f"),
    ("snr", "phi_mean_ratio", "f"),
    ("snr", "cycles_count", "i"),
    ("snr", "repetition_time_us", "f"),
    ("photonic", "r_over_a_ratio", "f"),
    ("photonic", "eps_background_ratio", "f"),
    ("photonic", "eps_hole_ratio", "f"),
    ("photonic", "zpl_wavelength_nm", "f"),
    ("photonic", "planewaves_count", "i"),
    ("photonic", "kpoints_per_segment_count", "i"),
]

_SECTION_ORDER = ["stripe", "membrane", "microwave", "swr", "spin_system",
                  "deer", "snr", "photonic"]


class ConfigError(ValueError):
    """Invalid configuration file content."""


def _schema_keys(section: str) -> dict[str, str]:
    return {k: kind for sec, k, kind in _SCHEMA if sec == section}


def _check_keys(section: str, table: dict, context: str):
    valid = _schema_keys(section)
    for key, value in table.items():
        if section == "spin_system" and key == "hyperfine":
            continue
        if key not in valid:
            candidates = list(valid) + (["hyperfine"] if section == "spin_system" else [])
            near = difflib.get_close_matches(key, candidates, n=1, cutoff=0.4)
            hint = f"; closest valid key is {near[0]!r}" if near else ""
            raise ConfigError(f"unknown key {key!r} in {context}{hint}")
        kind = valid[key]
        if kind == "f" and (isinstance(value, bool)
                            or not isinstance(value, (int, float))):
            raise ConfigError(f"{context}.{key} must be a number")
        if kind == "i" and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(f"{context}.{key} must be an integer")
        if kind == "s" and not isinstance(value, str):
            raise ConfigError(f"{context}.{key} must be a string")
        if kind in ("v3", "fl"):
            if not isinstance(value, list) or (kind == "v3" and len(value) != 3):
                raise ConfigError(f"{context}.{key} must be a list"
                                  + (" of three numbers" if kind == "v3" else ""))


@dataclass(frozen=True)
class SensorConfig:
    """Validated configuration with typed views onto each subsystem."""

    data: dict

    @property
    def stripe(self) -> StripeGeometry:
        s = self.data["stripe"]
        return StripeGeometry(s["width_nm"], s["thickness_nm"],
                              s["length_um"], s["b_sat_G"])

    @property
    def membrane_thickness_nm(self) -> float:
        return float(self.data["membrane"]["thickness_nm"])

    @property
    def probe_depth_nm(self) -> float:
        return float(self.data["membrane"]["probe_depth_nm"])

    @property
    def microwave_freq_GHz(self) -> float:
        return float(self.data["microwave"]["frequency_GHz"])

    @property
    def swr_model(self) -> SwrModel:
        s = self.data["swr"]
        return SwrModel(self.stripe, s["exchange_G_nm2"], s["grid_count"],
                        s["gyromag_MHz_per_G"], s["boundary"])

    @property
    def swr_scan_G(self) -> tuple[float, float]:
        return (float(self.data["swr"]["scan_start_G"]),
                float(self.data["swr"]["scan_stop_G"]))

    @property
    def spin_systems(self) -> list[SpinSystem]:
        out = []
        for t in self.data.get("spin_system", []):
            hfs = tuple(
                HyperfineCoupling(h["nuclear_spin_hbar"], tuple(h["a_MHz"]),
                                  tuple(h.get("euler_deg", (0.0, 0.0, 0.0))))
                for h in t.get("hyperfine", []))
            out.append(SpinSystem(
                spin=t["spin_hbar"], g=tuple(t["g_factor"]),
                d_zfs_MHz=t.get("d_zfs_MHz", 0.0),
                e_zfs_MHz=t.get("e_zfs_MHz", 0.0), hyperfine=hfs,
                linewidth_G=t.get("linewidth_G", 1.0),
                label=t.get("label", ""),
                g_euler_deg=tuple(t.get("g_euler_deg", (0.0, 0.0, 0.0)))))
        return out

    def spin_system(self, label: str) -> SpinSystem:
        for s in self.spin_systems:
            if s.label == label:
                return s
        raise KeyError(f"no spin system labelled {label!r} in config")

    @property
    def deer_scenario(self) -> DeerScenario:
        d = self.data["deer"]
        td = tuple(np.linspace(d["td_start_us"], d["td_stop_us"], d["td_count"]))
        return DeerScenario(
            dx_nm=d["plane_distance_nm"], c2d_per_nm2=d["concentration_per_nm2"],
            p_pump=d["pump_flip_prob"], b0_direction=tuple(d["b0_direction_unit"]),
            g_probe=d["g_probe_factor"], g_target=d["g_target_factor"],
            t0_us=d["t0_us"], td_grid_us=td)

    @property
    def snr_budget(self) -> SnrBudget:
        s = self.data["snr"]
        return SnrBudget(
            t0_us=s["t0_us"], t2_us=s["t2_us"], p_coll=s["collection_prob"],
            p_det=s["detection_prob"], sigma_over_area=s["sigma_over_area_ratio"],
            power_W=s["power_W"], wavelength_nm=s["wavelength_nm"],
            integration_time_us=s["integration_time_us"],
            x_contrast=s["contrast_x_ratio"], phi_mean=s["phi_mean_ratio"],
            n_cycles=s["cycles_count"], t_rep_us=s["repetition_time_us"])

    @property
    def phc_lattice(self) -> PhcLattice:
        p = self.data["photonic"]
        return PhcLattice(p["r_over_a_ratio"], p["eps_background_ratio"],
                          p["eps_hole_ratio"])

    @property
    def zpl_wavelength_nm(self) -> float:
        return float(self.data["photonic"]["zpl_wavelength_nm"])


def default_config_path() -> Path:
    return Path(__file__).parent / "data" / "reference_design.toml"


def load_config(path) -> SensorConfig:
    """Parse and validate a sensor configuration file."""
    raw = Path(path).read_bytes()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    top = {k: v for k, v in data.items() if not isinstance(v, (dict, list))}
    _check_keys("", top, "top level")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {data.get('schema_version')!r}")
    for section, table in data.items():
        if section == "schema_version":
            continue
        if section == "spin_system":
            for i, t in enumerate(table):
                _check_keys("spin_system", t, f"spin_system[{i}]")
                for j, h in enumerate(t.get("hyperfine", [])):
                    _check_keys("spin_system.hyperfine", h,
                                f"spin_system[{i}].hyperfine[{j}]")
            continue
        if section not in _SECTION_ORDER:
            near = difflib.get_close_matches(section, _SECTION_ORDER, n=1, cutoff=0.4)
            hint = f"; closest valid section is {near[0]!r}" if near else ""
            raise ConfigError(f"unknown section {section!r}{hint}")
        _check_keys(section, table, f"[{section}]")

    cfg = SensorConfig(data)
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: SensorConfig):
    if cfg.probe_depth_nm >= cfg.membrane_thickness_nm:
        raise ConfigError("probe depth must be smaller than the membrane thickness")
    x_opt, _ = find_xopt(cfg.stripe)
    ideal = x_opt - cfg.stripe.thickness_nm / 2
    if abs(cfg.membrane_thickness_nm - ideal) > 20.0:
        warnings.warn(
            f"membrane thickness {cfg.membrane_thickness_nm:.0f} nm is more "
            f"than 20 nm away from the gradient optimum {ideal:.0f} nm",
            stacklevel=3)
    # domain objects validate their own invariants on construction
    for attr in ("deer_scenario", "snr_budget", "phc_lattice", "swr_model",
                 "spin_systems"):
        getattr(cfg, attr)


def _fmt_value(kind: str, value) -> str:
    if kind == "i":
        return str(int(value))
    if kind == "s":
        return f'"{value}"'
    if kind == "f":
        text = f"{float(value):.12g}"
        if "." not in text and "e" not in text and "inf" not in text:
            text += ".0"
        return text
    if kind in ("v3", "fl"):
        return "[" + ", ".join(_fmt_value("f", v) for v in value) + "]"
    raise AssertionError(kind)


def save_config(cfg: SensorConfig, path) -> None:
    """Write a configuration in canonical form (stable ordering, LF).

    ``save_config(load_config(p), p2)`` reproduces byte-identical content
    for files previously written by this function.
    """
    lines = [f"schema_version = {cfg.data['schema_version']}"]
    for section in _SECTION_ORDER:
        if section not in cfg.data:
            continue
        keys = _schema_keys(section)
        if section == "spin_system":
            for t in cfg.data["spin_system"]:
                lines.append("")
                lines.append("[[spin_system]]")
                for key, kind in keys.items():
                    if key in t:
                        lines.append(f"{key} = {_fmt_value(kind, t[key])}")
                for h in t.get("hyperfine", []):
                    lines.append("")
                    lines.append("[[spin_system.hyperfine]]")
                    for key, kind in _schema_keys("spin_system.hyperfine").items():
                        if key in h:
                            lines.append(f"{key} = {_fmt_value(kind, h[key])}")
            continue
        lines.append("")
        lines.append(f"[{section}]")
        for key, kind in keys.items():
            if key in cfg.data[section]:
                lines.append(f"{key} = {_fmt_value(kind, cfg.data[section][key])}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
