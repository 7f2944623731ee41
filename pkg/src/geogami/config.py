"""Run configuration: JSON schema, validation, presets, and builders.

The config file is a single versioned JSON document.  Angles are degrees
in files and at the CLI; the builders convert to radians, so conversion
happens at the boundary only.  The dataclasses below mirror the file
(degrees included), which makes parse -> serialize -> parse an identity.

Presets ship inside the package; the ``GEOGAMI_PRESET_DIR`` environment
variable overrides their location.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .compliance import CompositionLaw, SideAssembly
from .kinematics import MassLayout
from .locomotion import (ActuationProgram, DampingParams, ReleaseModel,
                         Simulator, SupportPolygon)
from .transmission import EngagementSchedule, GearboxConfig

SCHEMA_VERSION = 1
PRESET_ENV_VAR = "GEOGAMI_PRESET_DIR"
SIMULATION_MODES = ("cyclic", "pyramid", "spindle5", "spindle10")


class ConfigError(ValueError):
    """A run configuration failed to parse or validate."""


@dataclass(frozen=True)
class GearboxSpec:
    worm_teeth: int = 43
    driver_teeth: int = 5
    driven_teeth: int = 10
    spool_radius_mm: float = 8.0
    sector_arc_deg: float = 90.0
    efficiency_worm: float = 0.78
    efficiency_spur: float = 0.90
    corner_count: int = 4
    motor_torque_nm: float = 2.4e-4


@dataclass(frozen=True)
class MassLayoutSpec:
    central_mass_kg: float = 0.25
    corner_masses_kg: Tuple[float, ...] = (0.25, 0.25, 0.25, 0.25)
    ray_angles_deg: Tuple[float, ...] = (90.0, 0.0, 270.0, 180.0)
    rest_radii_mm: Tuple[float, ...] = (94.4, 94.4, 94.4, 94.4)


@dataclass(frozen=True)
class SideSpec:
    origami_joint_stiffness: float = 0.48
    origami_joint_count: int = 5
    skeleton_left: float = 0.6
    skeleton_right: float = 0.6
    cable_stiffness: Optional[float] = None   # None = inextensible
    routing_gain: float = 1.0
    angular_to_radial: float = 1.0


@dataclass(frozen=True)
class DampingSpec:
    frequency_hz: float = 2.5
    damping_ratio: float = 0.10
    amplitude_deg: float = 18.0


@dataclass(frozen=True)
class SupportSpec:
    contact_lever_mm: float = 0.0


@dataclass(frozen=True)
class ProgramSpec:
    motor_speed_rad_s: float = 30.0
    duration_s: float = 36.1
    mode: str = "cyclic"
    first_corner: int = 4
    initial_roll_deg: float = 0.0
    max_contraction_mm: Optional[float] = None
    spindle_max_contraction_mm: float = 25.1
    release_model: str = "instant_return"
    origami: bool = True
    spindle_profiles: Dict[str, Tuple[float, ...]] = field(default_factory=lambda: {
        "pyramid": (1.0, 0.75, 0.5, 0.25),
        "spindle5": (0.55, 0.5, 0.45, 0.5),
        "spindle10": (1.1, 1.0, 0.9, 1.0),
    })
    damping_with_origami: DampingSpec = DampingSpec(2.2, 0.35, 12.0)
    damping_without_origami: DampingSpec = DampingSpec(2.5, 0.10, 18.0)
    allow_damping_override: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Everything one reproducible experiment run needs; fully deterministic."""

    gearbox: GearboxSpec = GearboxSpec()
    mass_layout: MassLayoutSpec = MassLayoutSpec()
    sides: Tuple[SideSpec, SideSpec, SideSpec, SideSpec] = (
        SideSpec(), SideSpec(), SideSpec(), SideSpec())
    program: ProgramSpec = ProgramSpec()
    support: SupportSpec = SupportSpec()
    composition_law: str = "B"
    description: str = ""
    schema_version: int = SCHEMA_VERSION

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {self.schema_version}, "
                f"expected {SCHEMA_VERSION}")
        if self.composition_law not in ("A", "B"):
            raise ConfigError(
                f"composition_law must be 'A' or 'B', got {self.composition_law!r}")
        if self.gearbox.corner_count != 4:
            raise ConfigError("gearbox.corner_count must be 4")
        if len(self.sides) != 4:
            raise ConfigError(f"need 4 sides, got {len(self.sides)}")
        layout = self.mass_layout
        if len(layout.corner_masses_kg) != 4 or len(layout.ray_angles_deg) != 4 \
                or len(layout.rest_radii_mm) != 4:
            raise ConfigError("mass_layout needs 4 corners")
        if self.program.mode not in SIMULATION_MODES:
            raise ConfigError(
                f"mode must be one of {SIMULATION_MODES}, got {self.program.mode!r}")
        if self.program.mode != "cyclic":
            profile = self.program.spindle_profiles.get(self.program.mode)
            if profile is None or len(profile) != 4:
                raise ConfigError(
                    f"spindle profile for mode {self.program.mode!r} must list "
                    "4 take-up multipliers")
        try:
            ReleaseModel(self.program.release_model)
        except ValueError:
            raise ConfigError(
                f"unknown release_model {self.program.release_model!r}")
        with_d = self.program.damping_with_origami
        without_d = self.program.damping_without_origami
        if (with_d.damping_ratio < without_d.damping_ratio
                and not self.program.allow_damping_override):
            raise ConfigError(
                "with-origami damping ratio must be >= without-origami "
                "(set allow_damping_override to relax)")
        # builders run the per-field range checks of the domain types
        try:
            self.build_gearbox()
            self.build_layout()
            self.build_sides()
            self.build_polygon()
            self.build_program()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # -- builders (degrees -> radians happens here) ---------------------------

    def build_gearbox(self) -> GearboxConfig:
        g = self.gearbox
        return GearboxConfig(
            worm_teeth=g.worm_teeth, driver_teeth=g.driver_teeth,
            driven_teeth=g.driven_teeth, spool_radius=g.spool_radius_mm,
            sector_arc=math.radians(g.sector_arc_deg),
            efficiency_worm=g.efficiency_worm, efficiency_spur=g.efficiency_spur,
            corner_count=g.corner_count, motor_torque=g.motor_torque_nm)

    def build_layout(self) -> MassLayout:
        m = self.mass_layout
        return MassLayout(
            central_mass=m.central_mass_kg,
            corner_masses=tuple(m.corner_masses_kg),
            ray_angles=tuple(math.radians(a) for a in m.ray_angles_deg),
            rest_radii=tuple(m.rest_radii_mm))

    def build_sides(self, origami: Optional[bool] = None) -> Tuple[SideAssembly, ...]:
        attached = self.program.origami if origami is None else origami
        sides = []
        for spec, rest in zip(self.sides, self.mass_layout.rest_radii_mm):
            chain = (spec.origami_joint_stiffness,) * spec.origami_joint_count \
                if attached else ()
            sides.append(SideAssembly(
                origami_chain=chain,
                skeleton_left=spec.skeleton_left,
                skeleton_right=spec.skeleton_right,
                cable_stiffness=math.inf if spec.cable_stiffness is None
                else spec.cable_stiffness,
                routing_gain=spec.routing_gain,
                rest_radius=rest,
                angular_to_radial=spec.angular_to_radial))
        return tuple(sides)

    def build_polygon(self) -> SupportPolygon:
        layout = self.build_layout()
        return SupportPolygon.from_link_endpoints(
            layout.rest_radii, layout.ray_angles,
            contact_lever=self.support.contact_lever_mm)

    def build_schedule(self, mode: Optional[str] = None) -> EngagementSchedule:
        mode = self.program.mode if mode is None else mode
        if mode == "cyclic":
            return EngagementSchedule.cyclic(
                sector_arc=math.radians(self.gearbox.sector_arc_deg),
                first_corner=self.program.first_corner,
                corner_count=self.gearbox.corner_count)
        profile = self.program.spindle_profiles.get(mode)
        if profile is None:
            raise ConfigError(f"no spindle profile configured for mode {mode!r}")
        return EngagementSchedule.spindle(profile)

    def build_program(self, mode: Optional[str] = None,
                      origami: Optional[bool] = None) -> ActuationProgram:
        p = self.program
        mode = p.mode if mode is None else mode
        attached = p.origami if origami is None else origami
        damping_spec = p.damping_with_origami if attached \
            else p.damping_without_origami
        if mode == "cyclic":
            max_u = p.max_contraction_mm
        else:
            max_u = p.spindle_max_contraction_mm
        return ActuationProgram(
            motor_speed=p.motor_speed_rad_s,
            duration=p.duration_s,
            schedule=self.build_schedule(mode),
            release_model=ReleaseModel(p.release_model),
            damping=DampingParams(
                frequency_hz=damping_spec.frequency_hz,
                damping_ratio=damping_spec.damping_ratio,
                amplitude_rad=math.radians(damping_spec.amplitude_deg)),
            max_contraction=max_u)

    def build_simulator(self, mode: Optional[str] = None,
                        origami: Optional[bool] = None) -> Simulator:
        return Simulator(
            gearbox=self.build_gearbox(),
            layout=self.build_layout(),
            sides=self.build_sides(origami),
            polygon=self.build_polygon(),
            program=self.build_program(mode, origami),
            composition_law=CompositionLaw(self.composition_law),
            initial_roll=math.radians(self.program.initial_roll_deg))

    # -- (de)serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        data = asdict(self)
        # asdict maps tuples to lists already via dict/list recursion
        return json.loads(json.dumps(data))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            gearbox = GearboxSpec(**data.get("gearbox", {}))
            layout_raw = dict(data.get("mass_layout", {}))
            for key in ("corner_masses_kg", "ray_angles_deg", "rest_radii_mm"):
                if key in layout_raw:
                    layout_raw[key] = tuple(layout_raw[key])
            mass_layout = MassLayoutSpec(**layout_raw)
            sides = tuple(SideSpec(**s) for s in data.get(
                "sides", [{}, {}, {}, {}]))
            program_raw = dict(data.get("program", {}))
            for key in ("damping_with_origami", "damping_without_origami"):
                if key in program_raw:
                    program_raw[key] = DampingSpec(**program_raw[key])
            if "spindle_profiles" in program_raw:
                program_raw["spindle_profiles"] = {
                    name: tuple(vals)
                    for name, vals in program_raw["spindle_profiles"].items()}
            program = ProgramSpec(**program_raw)
            support = SupportSpec(**data.get("support", {}))
            return cls(
                gearbox=gearbox, mass_layout=mass_layout, sides=sides,
                program=program, support=support,
                composition_law=data.get("composition_law", "B"),
                description=data.get("description", ""),
                schema_version=data.get("schema_version", SCHEMA_VERSION))
        except TypeError as exc:
            raise ConfigError(f"unknown or missing config field: {exc}") from exc


def load_config(path: str) -> RunConfig:
    """Load and validate a run configuration from a JSON file."""
    try:
        with open(path) as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}")
    config = RunConfig.from_dict(data)
    config.validate()
    return config


def preset_dir() -> Optional[Path]:
    """Directory holding preset configs when overridden by the environment."""
    override = os.environ.get(PRESET_ENV_VAR)
    return Path(override) if override else None


def available_presets() -> List[str]:
    directory = preset_dir()
    if directory is not None:
        return sorted(p.stem for p in directory.glob("*.json"))
    package_dir = resources.files("geogami").joinpath("presets")
    return sorted(p.name[:-5] for p in package_dir.iterdir()
                  if p.name.endswith(".json"))


def load_preset(name: str) -> RunConfig:
    """Load a named preset, honoring the GEOGAMI_PRESET_DIR override."""
    directory = preset_dir()
    if directory is not None:
        path = directory / f"{name}.json"
        if not path.exists():
            raise ConfigError(
                f"preset {name!r} not found in {directory} "
                f"(available: {', '.join(available_presets()) or 'none'})")
        return load_config(str(path))
    package_dir = resources.files("geogami").joinpath("presets")
    candidate = package_dir.joinpath(f"{name}.json")
    if not candidate.is_file():
        raise ConfigError(
            f"unknown preset {name!r} "
            f"(available: {', '.join(available_presets())})")
    data = json.loads(candidate.read_text())
    config = RunConfig.from_dict(data)
    config.validate()
    return config


def write_atomic(path: str, content: str) -> None:
    """Write a file via a temp name + rename so readers never see partials."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=target.name)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(content)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def dump_config(config: RunConfig, path: str) -> None:
    write_atomic(path, json.dumps(config.to_dict(), indent=2) + "\n")
