"""Quasi-static event-driven rolling engine.

Advances the motor angle, applies the engagement schedule, maps cable
retraction to per-corner contraction, and watches the world COM against
the support pivot.  Rolls are quantized pivot-advance events (pi/2 for the
cyclic drive, pi/4 for spindle drives) rather than integrated rigid-body
dynamics; a parametric damped sinusoid is overlaid on the roll-angle trace
after each roll and does not feed back into the COM computation.

One simulation run is strictly sequential; independent runs share only
immutable configs and may execute in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, TextIO, Tuple

from .compliance import (CompositionLaw, JointModel, SideAssembly,
                         cable_series_stiffness, default_joint_model,
                         JointFamily, return_angle)
from .kinematics import (BodyState, MassLayout, mass_offset_xy, radii,
                         world_com)
from .transmission import EngagementSchedule, GearboxConfig, ScheduleMode

TIP_BISECTION_TOL = 1e-9  # s
_PIVOT_Y_TOL = 1e-9


class SimulationError(RuntimeError):
    """The engine reached a state it cannot advance."""


class EventKind(Enum):
    ENGAGEMENT_START = "engagement_start"
    ENGAGEMENT_END = "engagement_end"
    TIP = "tip"
    ROLL_COMPLETE = "roll_complete"
    STALL = "stall"
    SATURATION = "saturation"


@dataclass(frozen=True)
class SimEvent:
    kind: EventKind
    time: float
    motor_angle: float
    state: BodyState
    corner: Optional[int] = None
    direction: Optional[int] = None

    def token(self) -> str:
        """Symbolic token for the trace CSV event column."""
        if self.corner is not None:
            return f"{self.kind.value}:{self.corner}"
        if self.direction is not None:
            sign = "+" if self.direction > 0 else "-"
            return f"{self.kind.value}:{sign}"
        return self.kind.value


class ReleaseModel(Enum):
    INSTANT_RETURN = "instant_return"
    RETURN_ANGLE_LIMITED = "return_angle_limited"


@dataclass(frozen=True)
class DampingParams:
    """Post-tip ring-down: natural frequency proxy, damping ratio, amplitude."""

    frequency_hz: float = 2.5
    damping_ratio: float = 0.10
    amplitude_rad: float = math.radians(18.0)

    def __post_init__(self) -> None:
        if self.frequency_hz <= 0:
            raise ValueError("frequency must be > 0")
        if not 0 <= self.damping_ratio <= 1:
            raise ValueError("damping ratio must be in [0, 1]")
        if self.amplitude_rad < 0:
            raise ValueError("amplitude must be >= 0")

    def overlay(self, dt_since_roll: float) -> float:
        """Damped sinusoid value at a time offset after a roll."""
        if dt_since_roll <= 0 or self.amplitude_rad == 0:
            return 0.0
        omega = 2 * math.pi * self.frequency_hz
        zeta = self.damping_ratio
        omega_d = omega * math.sqrt(max(1 - zeta * zeta, 0.0))
        return self.amplitude_rad * math.exp(-zeta * omega * dt_since_roll) \
            * math.sin(omega_d * dt_since_roll)


@dataclass(frozen=True)
class ActuationProgram:
    """Motor trajectory, schedule, release behavior, and damping overlay.

    ``max_contraction`` is the saturation limit of a corner (mm); None
    disables saturation (the cyclic drive is bounded by its engagement
    window instead).  ``bend_per_contraction`` converts contraction to
    joint bend for the return-angle-limited release model.
    """

    motor_speed: float
    duration: float
    schedule: EngagementSchedule
    release_model: ReleaseModel = ReleaseModel.INSTANT_RETURN
    damping: DampingParams = DampingParams()
    max_contraction: Optional[float] = None
    return_joint: Optional[JointModel] = None
    bend_per_contraction: float = 0.0697   # rad/mm

    def __post_init__(self) -> None:
        if self.motor_speed < 0:
            raise ValueError("motor speed must be >= 0 (winding positive)")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        if self.max_contraction is not None and self.max_contraction <= 0:
            raise ValueError("max_contraction must be > 0 or None")
        if self.bend_per_contraction <= 0:
            raise ValueError("bend_per_contraction must be > 0")

    @property
    def roll_quantum(self) -> float:
        """Roll increment per tip: pi/2 cyclic, pi/4 for spindle drives."""
        if self.schedule.mode is ScheduleMode.CYCLIC_SECTOR:
            return math.pi / 2
        return math.pi / 4


@dataclass(frozen=True)
class SupportPolygon:
    """Contact-capable points in the body frame; the lowest one is the pivot.

    ``contact_lever`` is the effective horizontal lead of the contact patch
    (mm): the COM must pass the pivot by this much before a tip, modeling
    the flattened footprint of the compliant rim.  Zero gives the strict
    COM-past-vertex test.
    """

    vertices: Tuple[Tuple[float, float], ...]
    contact_lever: float = 0.0
    ground_contact: int = 0

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise ValueError("support polygon needs at least 3 vertices")
        if any(not (math.isfinite(x) and math.isfinite(y))
               for x, y in self.vertices):
            raise ValueError("support polygon vertices must be finite")
        area2 = 0.0
        n = len(self.vertices)
        for k in range(n):
            x0, y0 = self.vertices[k]
            x1, y1 = self.vertices[(k + 1) % n]
            area2 += x0 * y1 - x1 * y0
        if area2 <= 0:
            raise ValueError("vertices must be ordered counterclockwise")
        if self.contact_lever < 0:
            raise ValueError("contact lever must be >= 0")

    @classmethod
    def from_link_endpoints(cls, radii_values: Sequence[float],
                            angles: Sequence[float],
                            contact_lever: float = 0.0) -> "SupportPolygon":
        """Polygon through the link endpoints, ordered counterclockwise.

        Coordinates within 1e-9 of zero are snapped to zero so that
        axis-aligned endpoints sit exactly on the axes.
        """
        def snap(value: float) -> float:
            return 0.0 if abs(value) < 1e-9 else value

        pts = sorted(
            ((a % (2 * math.pi), r) for r, a in zip(radii_values, angles)))
        vertices = tuple((snap(r * math.cos(a)), snap(r * math.sin(a)))
                         for a, r in pts)
        return cls(vertices=vertices, contact_lever=contact_lever)


@dataclass(frozen=True)
class TippingReport:
    tipping: bool
    direction: int          # +1 forward (+x), -1 backward, 0 stable
    com_offset_x: float     # world COM x relative to the body center
    forward_pivot_x: float  # world x of the leading ground vertex, ditto
    rear_pivot_x: float
    pivot_index: int


def tipping_check(layout: MassLayout, state: BodyState,
                  polygon: SupportPolygon) -> TippingReport:
    """Compare the world COM against the ground-contact pivot.

    Tipping iff the COM x strictly exceeds the pivot x (plus the contact
    lever) in the roll direction; a COM exactly over the pivot is stable.
    All x values are taken relative to the body center, which cancels the
    common R*phi translation.
    """
    c, s = math.cos(state.roll_angle), math.sin(state.roll_angle)
    dbx, dby = mass_offset_xy(layout, state.radii)
    com_x = c * dbx - s * dby
    if not math.isfinite(com_x):
        raise ValueError("degenerate state: COM is not finite")
    min_y = math.inf
    for vx, vy in polygon.vertices:
        wy = s * vx + c * vy
        if wy < min_y:
            min_y = wy
    tol = _PIVOT_Y_TOL * max(1.0, abs(min_y))
    ground = [(k, c * vx - s * vy)
              for k, (vx, vy) in enumerate(polygon.vertices)
              if (s * vx + c * vy) - min_y <= tol]
    if not ground:
        raise ValueError("degenerate support polygon: pivot undefined")
    rear_idx, rear_x = min(ground, key=lambda item: item[1])
    fwd_idx, fwd_x = max(ground, key=lambda item: item[1])
    lever = polygon.contact_lever
    if com_x > fwd_x + lever:
        return TippingReport(True, 1, com_x, fwd_x, rear_x, fwd_idx)
    if com_x < rear_x - lever:
        return TippingReport(True, -1, com_x, fwd_x, rear_x, rear_idx)
    return TippingReport(False, 0, com_x, fwd_x, rear_x, fwd_idx)


def execute_roll(state: BodyState, direction: int,
                 quantum: float = math.pi / 2) -> BodyState:
    """Advance the roll angle by one quantum about the current pivot.

    The ring order of the schedule makes the next engaged corner land on
    the new uphill side, so corner indices effectively remap by one ring
    position per roll; the body center advances by R * quantum through the
    no-slip coordinate.
    """
    if direction not in (-1, 1):
        raise ValueError("direction must be +1 or -1")
    return replace(state, roll_angle=state.roll_angle + direction * quantum)


@dataclass(frozen=True)
class TraceRecord:
    time: float
    motor_angle: float
    roll_angle: float        # with post-tip oscillation overlay
    com_x: float
    com_y: float
    retractions: Tuple[float, float, float, float]
    tensions: Tuple[float, float, float, float]
    event: str = ""


TRACE_CSV_HEADER = ("t_s,theta_m_rad,phi_rad,xG_mm,yG_mm,"
                    "L1_mm,L2_mm,L3_mm,L4_mm,T1_N,T2_N,T3_N,T4_N,event")


@dataclass
class SimTrace:
    """Time-ordered simulation output plus run summary."""

    records: List[TraceRecord] = field(default_factory=list)
    events: List[SimEvent] = field(default_factory=list)
    rolls_completed: int = 0
    travel_mm: float = 0.0
    stalled: bool = False
    final_state: Optional[BodyState] = None

    def write_csv(self, stream: TextIO) -> None:
        def fmt(value: float, digits: int) -> str:
            # rounding first keeps float dust from printing as "-0.000000"
            return f"{round(value, digits) + 0.0:.{digits}f}"

        stream.write(TRACE_CSV_HEADER + "\n")
        for r in self.records:
            lengths = ",".join(fmt(v, 6) for v in r.retractions)
            tensions = ",".join(fmt(v, 6) for v in r.tensions)
            stream.write(
                f"{fmt(r.time, 9)},{fmt(r.motor_angle, 6)},"
                f"{fmt(r.roll_angle, 9)},{fmt(r.com_x, 6)},{fmt(r.com_y, 6)},"
                f"{lengths},{tensions},{r.event}\n")

    def summary_line(self) -> str:
        stall = "yes" if self.stalled else "no"
        return (f"rolls={self.rolls_completed} travel_mm={self.travel_mm:.1f} "
                f"stall={stall}")


class Simulator:
    """Event-driven quasi-static run of one actuation program.

    The full body state lives in BodyState snapshots; ``step`` consumes and
    returns them, so a run is a pure fold over time steps.
    """

    def __init__(self, gearbox: GearboxConfig, layout: MassLayout,
                 sides: Sequence[SideAssembly], polygon: SupportPolygon,
                 program: ActuationProgram,
                 composition_law: CompositionLaw = CompositionLaw.ALL_SERIES,
                 initial_roll: float = 0.0) -> None:
        if len(sides) != 4:
            raise ValueError("need 4 side assemblies")
        self.gearbox = gearbox
        self.layout = layout
        self.sides = tuple(sides)
        self.polygon = polygon
        self.program = program
        self.law = composition_law
        self.initial_roll = initial_roll
        self.cable_stiffnesses = tuple(
            cable_series_stiffness(side, composition_law) for side in sides)
        # mm of contraction per second of engaged winding at each corner
        base = gearbox.spool_radius * gearbox.spool_per_driver \
            * program.motor_speed / gearbox.worm_teeth
        sched = program.schedule
        if sched.mode is ScheduleMode.FIXED_SPINDLE:
            self._rates = tuple(base * s / side.routing_gain
                                for s, side in zip(sched.take_up, self.sides))
        else:
            self._rates = tuple(base / side.routing_gain for side in self.sides)
        # engagement phase: index of the current cyclic window.  Kept as an
        # integer cursor so boundary releases can never be skipped or doubled
        # by float rounding of the window arithmetic.
        self._window: Optional[int] = None

    # -- state helpers ----------------------------------------------------

    def initial_state(self) -> BodyState:
        return BodyState.from_contractions(
            self.layout, (0.0, 0.0, 0.0, 0.0), roll_angle=self.initial_roll)

    def _with_contractions(self, state: BodyState, contractions: Sequence[float],
                           time: float) -> BodyState:
        contractions = tuple(contractions)
        return BodyState(roll_angle=state.roll_angle,
                         support_radius=state.support_radius,
                         contractions=contractions,
                         radii=radii(self.layout, contractions), time=time)

    def _window_index(self, time: float) -> int:
        """Cyclic window containing ``time`` (nudged against rounding)."""
        sched = self.program.schedule
        theta_d = self.program.motor_speed * time / self.gearbox.worm_teeth
        return math.floor(theta_d / sched.sector_arc + 1e-9)

    def _sync_window(self, time: float) -> None:
        if self.program.schedule.mode is ScheduleMode.CYCLIC_SECTOR:
            self._window = self._window_index(time)

    def _corner_of_window(self, window: int) -> int:
        sched = self.program.schedule
        return (sched.first_corner - 1 + window) % sched.corner_count + 1

    def _engaged_corners(self, time: float) -> Tuple[int, ...]:
        sched = self.program.schedule
        if sched.mode is ScheduleMode.FIXED_SPINDLE:
            return tuple(c for c in range(1, 5) if sched.take_up[c - 1] > 0)
        if self._window is None:
            self._sync_window(time)
        return (self._corner_of_window(self._window),)

    def _next_window_boundary(self) -> float:
        """Time of the next cyclic window transition."""
        sched = self.program.schedule
        if sched.mode is ScheduleMode.FIXED_SPINDLE or self.program.motor_speed == 0:
            return math.inf
        boundary_motor = (self._window + 1) * sched.sector_arc * self.gearbox.worm_teeth
        return boundary_motor / self.program.motor_speed

    def _advance_contractions(self, state: BodyState, engaged: Sequence[int],
                              time: float) -> Tuple[float, ...]:
        """Contractions at ``time`` assuming no events inside the interval."""
        dt = time - state.time
        u = list(state.contractions)
        cap = self.program.max_contraction
        for corner in engaged:
            value = u[corner - 1] + self._rates[corner - 1] * dt
            if cap is not None:
                value = min(value, cap)
            u[corner - 1] = value
        return tuple(u)

    def _released_contraction(self, contraction: float) -> float:
        """Contraction retained after the cable goes slack at disengagement."""
        if self.program.release_model is ReleaseModel.INSTANT_RETURN:
            return 0.0
        if contraction <= 0:
            return 0.0
        joint = self.program.return_joint or default_joint_model(
            JointFamily.FOLDING_24MM)
        theta = contraction * self.program.bend_per_contraction
        theta = min(max(theta, joint.valid_range[0]), joint.valid_range[1])
        if theta <= 0:
            return 0.0
        recovered = return_angle(joint, theta) / theta
        return contraction * (1.0 - recovered)

    # -- event machinery ---------------------------------------------------

    def detect_stall(self, state: BodyState) -> Optional[SimEvent]:
        """Tripod-lock check: engaged set fully saturated and still stable.

        Only a non-releasing (fixed-spindle) schedule can freeze the shape
        permanently; the cyclic drive releases at the window boundary and
        carries on, so it never stalls here.
        """
        program = self.program
        if program.schedule.mode is not ScheduleMode.FIXED_SPINDLE:
            return None
        cap = program.max_contraction
        if cap is None:
            return None
        engaged = self._engaged_corners(state.time)
        if not engaged:
            return None
        if any(state.contractions[c - 1] < cap for c in engaged):
            return None
        if tipping_check(self.layout, state, self.polygon).tipping:
            return None
        return SimEvent(EventKind.STALL, state.time,
                        program.motor_speed * state.time, state)

    def _bisect_tip(self, state: BodyState, engaged: Sequence[int],
                    t_lo: float, t_hi: float) -> float:
        """First instant in (t_lo, t_hi] where the tipping predicate holds."""
        def tipping_at(t: float) -> bool:
            probe = self._with_contractions(
                state, self._advance_contractions(state, engaged, t), t)
            return tipping_check(self.layout, probe, self.polygon).tipping

        while t_hi - t_lo > TIP_BISECTION_TOL:
            mid = 0.5 * (t_lo + t_hi)
            if tipping_at(mid):
                t_hi = mid
            else:
                t_lo = mid
        return t_hi

    def _resolve_tips(self, state: BodyState,
                      events: List[SimEvent]) -> BodyState:
        """Execute rolls until the state is stable again."""
        motor_angle = self.program.motor_speed * state.time
        for _ in range(8):
            report = tipping_check(self.layout, state, self.polygon)
            if not report.tipping:
                return state
            events.append(SimEvent(EventKind.TIP, state.time, motor_angle,
                                   state, direction=report.direction))
            state = execute_roll(state, report.direction,
                                 self.program.roll_quantum)
            events.append(SimEvent(EventKind.ROLL_COMPLETE, state.time,
                                   motor_angle, state,
                                   direction=report.direction))
        raise SimulationError("state keeps tipping after 8 consecutive rolls")

    def step(self, state: BodyState, dt: float) -> Tuple[BodyState, List[SimEvent]]:
        """Advance one time step, emitting the events crossed inside it."""
        if dt <= 0:
            raise ValueError("dt must be > 0")
        if any(not math.isfinite(u) for u in state.contractions):
            raise SimulationError("non-finite contraction in state")
        program = self.program
        if self._window is None:
            self._sync_window(state.time)
        t_end = state.time + dt
        events: List[SimEvent] = []
        state = self._resolve_tips(state, events)
        while state.time < t_end:
            t0 = state.time
            engaged = self._engaged_corners(t0)
            boundary = self._next_window_boundary()
            cap = program.max_contraction
            t_sat = math.inf
            sat_corner = None
            if cap is not None:
                for corner in engaged:
                    rate = self._rates[corner - 1]
                    head = cap - state.contractions[corner - 1]
                    if rate > 0 and head > 0:
                        t_cross = t0 + head / rate
                        if t_cross < t_sat:
                            t_sat, sat_corner = t_cross, corner
            t_stop = min(t_end, boundary, t_sat)

            probe = self._with_contractions(
                state, self._advance_contractions(state, engaged, t_stop), t_stop)
            if tipping_check(self.layout, probe, self.polygon).tipping:
                t_tip = self._bisect_tip(state, engaged, t0, t_stop)
                state = self._with_contractions(
                    state, self._advance_contractions(state, engaged, t_tip),
                    t_tip)
                state = self._resolve_tips(state, events)
                continue

            state = probe
            if t_stop == t_sat and sat_corner is not None:
                u = list(state.contractions)
                u[sat_corner - 1] = cap
                state = self._with_contractions(state, u, state.time)
                events.append(SimEvent(
                    EventKind.SATURATION, state.time,
                    program.motor_speed * state.time, state, corner=sat_corner))
                stall = self.detect_stall(state)
                if stall is not None:
                    events.append(stall)
                    return state, events
            if t_stop == boundary and boundary < math.inf:
                old_corner = self._corner_of_window(self._window)
                self._window += 1
                new_corner = self._corner_of_window(self._window)
                u = list(state.contractions)
                u[old_corner - 1] = self._released_contraction(u[old_corner - 1])
                state = self._with_contractions(state, u, state.time)
                motor_angle = program.motor_speed * state.time
                events.append(SimEvent(EventKind.ENGAGEMENT_END, state.time,
                                       motor_angle, state, corner=old_corner))
                events.append(SimEvent(EventKind.ENGAGEMENT_START, state.time,
                                       motor_angle, state, corner=new_corner))
                # release can shift the COM; re-check stability
                state = self._resolve_tips(state, events)
        return state, events

    # -- full run -----------------------------------------------------------

    def run(self, dt: float = 1e-3,
            initial_state: Optional[BodyState] = None) -> SimTrace:
        """Run the whole program, producing a deterministic trace."""
        program = self.program
        state = initial_state if initial_state is not None else self.initial_state()
        self._window = None
        self._sync_window(state.time)
        trace = SimTrace()
        roll_times: List[Tuple[float, int]] = []

        def phi_display(t: float, phi: float) -> float:
            total = phi
            for t_roll, direction in roll_times:
                total += direction * program.damping.overlay(t - t_roll)
            return total

        def record(st: BodyState, event: str = "") -> None:
            com = world_com(self.layout, st)
            lengths = tuple(side.routing_gain * u
                            for side, u in zip(self.sides, st.contractions))
            tensions = tuple(k * u for k, u in
                             zip(self.cable_stiffnesses, st.contractions))
            trace.records.append(TraceRecord(
                time=st.time, motor_angle=program.motor_speed * st.time,
                roll_angle=phi_display(st.time, st.roll_angle),
                com_x=float(com[0]), com_y=float(com[1]),
                retractions=lengths, tensions=tensions, event=event))

        def absorb(events: List[SimEvent]) -> bool:
            for event in events:
                trace.events.append(event)
                if event.kind is EventKind.ROLL_COMPLETE:
                    trace.rolls_completed += 1
                    roll_times.append((event.time, event.direction or 1))
                record(event.state, event.token())
                if event.kind is EventKind.STALL:
                    trace.stalled = True
                    return True
            return False

        for corner in self._engaged_corners(state.time):
            trace.events.append(SimEvent(
                EventKind.ENGAGEMENT_START, state.time,
                program.motor_speed * state.time, state, corner=corner))
            record(state, trace.events[-1].token())
        record(state)

        start = state
        n_steps = int(math.ceil(program.duration / dt - 1e-12)) \
            if program.duration > 0 else 0
        for k in range(n_steps):
            t_next = start.time + min((k + 1) * dt, program.duration)
            state, events = self.step(state, t_next - state.time)
            if absorb(events):
                break
            record(state)

        trace.final_state = state
        trace.travel_mm = state.support_radius * (state.roll_angle -
                                                  start.roll_angle)
        return trace


def run_program(gearbox: GearboxConfig, layout: MassLayout,
                sides: Sequence[SideAssembly], polygon: SupportPolygon,
                program: ActuationProgram,
                composition_law: CompositionLaw = CompositionLaw.ALL_SERIES,
                initial_roll: float = 0.0, dt: float = 1e-3,
                initial_state: Optional[BodyState] = None) -> SimTrace:
    """Convenience wrapper: build a Simulator and run the program."""
    sim = Simulator(gearbox, layout, sides, polygon, program,
                    composition_law, initial_roll)
    return sim.run(dt=dt, initial_state=initial_state)
