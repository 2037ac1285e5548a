import time
from logging import getLogger
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from numpy.random import Generator

from finite_qrf.bundles import (apply_frame_morphism, bundle_reduction_residual, cocycle_violations, fiber_coordinate,
                                field_invariance_violation, localization_error_bound, orientation_violations,
                                relational_local_algebra, relativize_field, restrict_field)
from finite_qrf.errors import PreconditionError, QrfError, ScenarioError
from finite_qrf.geometry import (gr_coupled_relativize, indefinite_geometry_probabilities, isometric_frame_transform,
                                 metric_from_section, metric_sub_bundle, path_restricted_observable,
                                 reduced_restriction, sector_equation_weights, stratify)
from finite_qrf.group_frames import (SystemAction, duality_check, external_frame_transform,
                                     gauge_relational_local_observable, invariance_violation, localizability_curve,
                                     localizability_family, orbit_identity_residual, origin_shift_residual,
                                     reduce_frame, reduction_residual, relational_local_observable,
                                     relative_state_covariance_residual, restrict, restriction_factorization_residual,
                                     translation_field, unit_preservation_residual)
from finite_qrf.integral import (OperatorField, change_of_variables_check, channel_interchange_check,
                                 field_linearity_residual, ov_integrate, pairing_residual, pairing_residual_on_basis,
                                 povm_mixture_residual, reconstruct_field)
from finite_qrf.measure import (CovariantPovm, Povm, SampleSpace, born_measure, check_covariance, compose_with_channel,
                                ideal_povm, push_forward, push_forward_measure, right_translation_action)
from finite_qrf.names import status_fail, status_pass, status_precondition_error, toolkit_version
from finite_qrf.operators import (Channel, Operator, State, apply_channel_heisenberg, apply_channel_schrodinger,
                                  basis_projector, expect, zero)
from finite_qrf.options import ToolkitOptions
from finite_qrf.parallel_progress_bar import run_in_order
from finite_qrf.pde_lift import duality_residual, kernel_membership, symmetry_action_on_solutions
from finite_qrf.report import CheckResult, Report
from finite_qrf.scenario import CheckSpec, Scenario, point
from finite_qrf.symmetry import (Torsor, act_on_operator, duality_pairing_residual, identity_inclusion,
                                 representation_violation)
from finite_qrf.utils import random_channel, random_field, random_hermitian, random_povm, random_state

logger = getLogger("finite_qrf_checks")

_missing = object()


class CheckContext:
    """
    Resolves the arguments of one check against the scenario. The string "random" in place of a state, operator,
    field, POVM or channel draws a fresh seeded sample.
    """

    def __init__(self, scenario: Scenario, args: Dict[str, Any], rng: Generator, tol: float):
        self.scenario = scenario
        self.args = args
        self.rng = rng
        self.tol = tol

    def arg(self, key: str, default: Any = _missing) -> Any:
        if key in self.args:
            return self.args[key]
        if default is _missing:
            raise ScenarioError(f"missing argument {key!r}", f"args.{key}")
        return default

    def has(self, key: str) -> bool:
        return key in self.args and self.args[key] != "random"

    def decl(self, section: str, key: str) -> Any:
        return self.scenario.get(section, self.arg(key), f"args.{key}")

    def state(self, key: str, dim: int) -> Operator:
        if self.arg(key, "random") == "random":
            return random_state(dim, self.rng)
        rho = self.decl("states", key)
        if rho.dim != dim:
            raise PreconditionError(f"state {self.args[key]!r} has dim {rho.dim}, expected {dim}.")
        return rho

    def operator(self, key: str, dim: int) -> Operator:
        if self.arg(key, "random") == "random":
            return random_hermitian(dim, self.rng)
        ref = self.arg(key)
        section = "operators" if ref in self.scenario.declarations["operators"] else "states"
        a = self.scenario.get(section, ref, f"args.{key}")
        if a.dim != dim:
            raise PreconditionError(f"operator {ref!r} has dim {a.dim}, expected {dim}.")
        return a

    def povm(self, key: str = "povm", size_key: str = "points", dim_key: str = "frame_dim") -> Povm:
        if self.has(key):
            return self.decl("povms", key)
        return random_povm(SampleSpace(range(int(self.arg(size_key, 4)))), int(self.arg(dim_key, 2)), self.rng)

    def field(self, space: SampleSpace, key: str = "field", dim_key: str = "system_dim") -> OperatorField:
        if self.has(key):
            return self.decl("operator_fields", key)
        return random_field(space, int(self.arg(dim_key, 2)), self.rng)

    def system(self) -> SystemAction:
        return SystemAction(self.decl("reps", "system_rep"))

    def trials(self) -> int:
        return int(self.arg("trials", 1))


CheckFunction = Callable[[CheckContext], float]
check_registry: Dict[str, CheckFunction] = {}


def register(kind: str) -> Callable[[CheckFunction], CheckFunction]:
    def decorator(function: CheckFunction) -> CheckFunction:
        check_registry[kind] = function
        return function

    return decorator


@register("channel.duality")
def _channel_duality(ctx: CheckContext) -> float:
    psi: Channel = ctx.decl("channels", "channel")
    rho = ctx.state("state", psi.dim_in)
    a = ctx.operator("operator", psi.dim_out)
    return abs(expect(apply_channel_schrodinger(psi, rho), a) - expect(rho, apply_channel_heisenberg(psi, a)))


@register("symmetry.representation")
def _representation(ctx: CheckContext) -> float:
    return representation_violation(ctx.decl("reps", "rep"))


@register("symmetry.action_duality")
def _action_duality(ctx: CheckContext) -> float:
    rep = ctx.decl("reps", "rep")
    return duality_pairing_residual(rep, ctx.state("state", rep.dim), ctx.operator("operator", rep.dim))


@register("symmetry.semidirect_factorization")
def _semidirect_factorization(ctx: CheckContext) -> float:
    sd = ctx.decl("semidirect_products", "semidirect")
    group = sd.product
    failures = 0
    for g in group.elements:
        t, l = sd.pair(g)
        failures += group.multiply(sd.embed_normal(t), sd.embed_acting(l)) != g
    return float(failures)


@register("povm.covariance")
def _povm_covariance(ctx: CheckContext) -> float:
    povm = ctx.decl("povms", "povm")
    rep = ctx.decl("reps", "rep")
    group = ctx.decl("groups", "group")
    inclusion = ctx.decl("subgroups", "inclusion") if ctx.has("inclusion") else identity_inclusion(group)
    covariant = CovariantPovm(povm, rep, right_translation_action(group.order, group.mul, inclusion.embed))
    return check_covariance(covariant, ctx.tol).violation


@register("measure.push_forward")
def _push_forward(ctx: CheckContext) -> float:
    povm = ctx.povm()
    mapping = {point(x): point(y) for x, y in ctx.arg("map")}
    pushed = push_forward(povm, mapping)
    omega = ctx.state("state", povm.dim)
    classical = push_forward_measure(born_measure(povm, omega), povm.space, mapping, pushed.space)
    return float(np.max(np.abs(born_measure(pushed, omega) - classical)))


@register("measure.channel_composition")
def _channel_composition(ctx: CheckContext) -> float:
    povm = ctx.decl("povms", "povm")
    psi = ctx.decl("channels", "channel")
    omega = ctx.state("state", psi.dim_in)
    transported = born_measure(compose_with_channel(psi, povm), omega)
    return float(np.max(np.abs(transported - born_measure(povm, apply_channel_schrodinger(psi, omega)))))


@register("integral.pairing")
def _integral_pairing(ctx: CheckContext) -> float:
    worst = 0.0
    for _ in range(ctx.trials()):
        e = ctx.povm()
        f = ctx.field(e.space)
        rho, omega = random_state(f.dim, ctx.rng), random_state(e.dim, ctx.rng)
        worst = max(worst, pairing_residual_on_basis(f, e), pairing_residual(f, e, rho, omega))
    return worst


@register("integral.change_of_variables")
def _change_of_variables(ctx: CheckContext) -> float:
    worst = 0.0
    for _ in range(ctx.trials()):
        e = ctx.povm()
        target = SampleSpace(range(int(ctx.arg("target_points", 3)))) if not ctx.has("field") \
            else ctx.decl("operator_fields", "field").space
        f = ctx.field(target)
        if ctx.arg("map", "random") == "random":
            images = ctx.rng.integers(0, len(target), size=len(e.space))
            mapping = {x: target.points[i] for x, i in zip(e.space, images)}
        else:
            mapping = {point(x): point(y) for x, y in ctx.arg("map")}
        worst = max(worst, change_of_variables_check(f, mapping, e))
    return worst


@register("integral.channel_interchange")
def _channel_interchange(ctx: CheckContext) -> float:
    worst = 0.0
    for _ in range(ctx.trials()):
        e = ctx.povm()
        f = ctx.field(e.space)
        if ctx.has("channel"):
            psi = ctx.decl("channels", "channel")
        else:
            psi = random_channel(int(ctx.arg("target_dim", e.dim)), e.dim, ctx.rng)
        worst = max(worst, channel_interchange_check(f, e, psi))
    return worst


@register("integral.bilinearity")
def _bilinearity(ctx: CheckContext) -> float:
    worst = 0.0
    for _ in range(ctx.trials()):
        e = ctx.povm()
        f = ctx.field(e.space)
        g = random_field(e.space, f.dim, ctx.rng)
        a, b = ctx.rng.standard_normal(2) + 1j * ctx.rng.standard_normal(2)
        other = random_povm(e.space, e.dim, ctx.rng)
        weight = float(ctx.rng.uniform())
        worst = max(worst, field_linearity_residual(f, g, a, b, e), povm_mixture_residual(f, e, other, weight))
    return worst


@register("integral.reconstruction")
def _reconstruction(ctx: CheckContext) -> float:
    worst = 0.0
    for _ in range(ctx.trials()):
        space = SampleSpace(range(int(ctx.arg("points", 4)))) if not ctx.has("field") \
            else ctx.decl("operator_fields", "field").space
        f = ctx.field(space)
        recovered = reconstruct_field(ov_integrate(f, ideal_povm(space)), space, f.dim)
        worst = max(worst, max(a.distance(b) for a, b in zip(f.values, recovered.values)))
    return worst


def _group_inputs(ctx: CheckContext):
    frame = ctx.decl("group_frames", "frame")
    sys = ctx.system()
    return frame, sys, ctx.operator("operator", sys.dim)


@register("group.duality")
def _group_duality(ctx: CheckContext) -> float:
    frame, sys, a = _group_inputs(ctx)
    worst = 0.0
    for _ in range(ctx.trials()):
        rho, omega = ctx.state("state", sys.dim), ctx.state("frame_state", frame.dim)
        worst = max(worst, duality_check(rho, omega, a, frame, sys))
    return worst


@register("group.invariance")
def _group_invariance(ctx: CheckContext) -> float:
    frame, sys, a = _group_inputs(ctx)
    return invariance_violation(a, frame, sys)


@register("group.unit_preservation")
def _group_unit(ctx: CheckContext) -> float:
    return unit_preservation_residual(ctx.decl("group_frames", "frame"), ctx.system())


@register("group.restriction_factorization")
def _group_restriction_factorization(ctx: CheckContext) -> float:
    frame, sys, a = _group_inputs(ctx)
    return restriction_factorization_residual(a, ctx.state("frame_state", frame.dim), frame, sys)


@register("group.orbit_identity")
def _group_orbit_identity(ctx: CheckContext) -> float:
    frame, sys, a = _group_inputs(ctx)
    return orbit_identity_residual(ctx.state("state", sys.dim), ctx.state("frame_state", frame.dim), a, frame, sys)


@register("group.relative_state_covariance")
def _group_relative_state_covariance(ctx: CheckContext) -> float:
    frame, sys = ctx.decl("group_frames", "frame"), ctx.system()
    return relative_state_covariance_residual(ctx.state("state", sys.dim), ctx.state("frame_state", frame.dim),
                                              frame, sys)


@register("group.reduction")
def _group_reduction(ctx: CheckContext) -> float:
    sys = ctx.system()
    return reduction_residual(ctx.operator("operator", sys.dim), ctx.decl("group_frames", "sub_frame"),
                              ctx.decl("subgroups", "inclusion"), sys)


@register("group.external_transform")
def _group_external_transform(ctx: CheckContext) -> float:
    frame, sys, a = _group_inputs(ctx)
    return external_frame_transform(a, frame, ctx.decl("group_frames", "frame_prime"), ctx.decl("channels", "channel"),
                                    sys, ctx.tol)


@register("group.origin_shift")
def _group_origin_shift(ctx: CheckContext) -> float:
    sys = ctx.system()
    group = sys.group
    rho = ctx.state("state", sys.dim)
    weights = ctx.arg("measure", "random")
    weights = ctx.rng.dirichlet(np.ones(group.order)) if weights == "random" else np.asarray(weights, dtype=float)
    torsor = Torsor(group, {g: g for g in group.elements})
    measure = dict(zip(group.elements, weights))
    shifts = [int(ctx.arg("shift"))] if "shift" in ctx.args else list(group.elements)
    return max(origin_shift_residual(rho, measure, torsor, h, sys) for h in shifts)


@register("group.localizability")
def _group_localizability(ctx: CheckContext) -> float:
    frame, sys, a = _group_inputs(ctx)
    localized = ctx.decl("states", "localized_state")
    curve = localizability_curve(a, frame, sys, localizability_family(localized, ctx.arg("parameters")))
    if "expected" in ctx.args:
        return float(np.max(np.abs(curve - np.asarray(ctx.arg("expected"), dtype=float))))
    return float(curve[-1])


@register("group.relational_local_observable")
def _group_relational_local_observable(ctx: CheckContext) -> float:
    sd = ctx.decl("semidirect_products", "semidirect")
    frame, sys, a = _group_inputs(ctx)
    omega = ctx.state("frame_state", frame.dim)
    local = relational_local_observable(translation_field(a, sd, sys), frame, omega, ctx.tol)
    residual = local.distance(restrict(a, omega, reduce_frame(frame, sd.embed_normal), sys))
    if ctx.has("expected"):
        residual = max(residual, local.distance(ctx.decl("operators", "expected")))
    return residual


@register("group.gauge_local_observable")
def _group_gauge_local_observable(ctx: CheckContext) -> float:
    frame = ctx.decl("group_frames", "frame")
    field = ctx.decl("operator_fields", "field")
    local = gauge_relational_local_observable(field, frame, ctx.state("frame_state", frame.dim),
                                              ctx.decl("reps", "gauge_rep"))
    return local.distance(ctx.decl("operators", "expected"))


def _bundle_inputs(ctx: CheckContext):
    return ctx.decl("fields", "field"), ctx.decl("bundle_frames", "frame")


@register("bundle.invariance")
def _bundle_invariance(ctx: CheckContext) -> float:
    return field_invariance_violation(*_bundle_inputs(ctx))


@register("bundle.localization")
def _bundle_localization(ctx: CheckContext) -> float:
    field, frame = _bundle_inputs(ctx)
    p = point(ctx.arg("point"))
    if "frame_state" in ctx.args:
        omega = ctx.state("frame_state", frame.dim)
    elif frame.is_ideal(ctx.tol):
        omega = State.unchecked(basis_projector(frame.space.index(frame.section(p)), frame.dim).matrix)
    else:
        raise PreconditionError("Localization at a point needs a frame state or an ideal frame.")
    return restrict_field(field, frame, omega).distance(field(p))


@register("bundle.localization_bound")
def _bundle_localization_bound(ctx: CheckContext) -> float:
    field, frame = _bundle_inputs(ctx)
    worst = 0.0
    for _ in range(ctx.trials()):
        error, bound = localization_error_bound(field, frame, ctx.state("frame_state", frame.dim),
                                                point(ctx.arg("point")))
        worst = max(worst, error - bound)
    return max(worst, 0.0)


@register("bundle.reduction")
def _bundle_reduction(ctx: CheckContext) -> float:
    field, frame = _bundle_inputs(ctx)
    reduction = ctx.scenario.bundle_reductions.get(ctx.arg("frame"))
    if reduction is None:
        raise ScenarioError(f"bundle frame {ctx.arg('frame')!r} is not declared as a reduction", "args.frame")
    return bundle_reduction_residual(field, reduction.sub, frame, reduction.inclusion, reduction.base_embedding)


@register("bundle.morphism")
def _bundle_morphism(ctx: CheckContext) -> float:
    return apply_frame_morphism(ctx.decl("morphisms", "morphism"), ctx.decl("fields", "field"), ctx.tol)


@register("bundle.local_algebra")
def _bundle_local_algebra(ctx: CheckContext) -> float:
    field, frame = _bundle_inputs(ctx)
    states = [ctx.scenario.get("states", ref, "args.states") for ref in ctx.arg("states")]
    report = relational_local_algebra(field, frame, states, ctx.tol)
    return float(abs(report.span_dimension - int(ctx.arg("expected_span")))
                 + abs(report.closure_dimension - int(ctx.arg("expected_closure"))))


@register("bundle.cocycle")
def _bundle_cocycle(ctx: CheckContext) -> float:
    bundle = ctx.decl("bundles", "bundle")
    sections = [ctx.scenario.get("sections", ref, "args.sections") for ref in ctx.arg("sections")]
    return float(cocycle_violations(bundle, sections))


@register("bundle.orientation")
def _bundle_orientation(ctx: CheckContext) -> float:
    section = ctx.decl("sections", "section")
    return float(orientation_violations(section.bundle, section))


@register("pde.duality")
def _pde_duality(ctx: CheckContext) -> float:
    t = ctx.decl("difference_operators", "operator")
    return max(duality_residual(t, ctx.field(t.grid)) for _ in range(ctx.trials()))


@register("pde.kernel")
def _pde_kernel(ctx: CheckContext) -> float:
    t = ctx.decl("difference_operators", "operator")
    membership = kernel_membership(t, ctx.decl("operator_fields", "field"), ctx.tol)
    if "expected_residual" in ctx.args:
        return abs(membership.residual - float(ctx.arg("expected_residual")))
    return membership.residual


@register("pde.symmetry")
def _pde_symmetry(ctx: CheckContext) -> float:
    t = ctx.decl("difference_operators", "operator")
    action = ctx.decl("grid_actions", "action")
    field = ctx.decl("operator_fields", "field")
    elements = [int(ctx.arg("element"))] if "element" in ctx.args else list(action.group.elements)
    worst = 0.0
    for g in elements:
        moved = symmetry_action_on_solutions(t, action, field, g, ctx.tol)
        worst = max(worst, kernel_membership(t, moved, ctx.tol).residual)
        if ctx.has("expected_field"):
            expected = ctx.decl("operator_fields", "expected_field")
            worst = max(worst, max(a.distance(b) for a, b in zip(moved.values, expected.values)))
    return worst


@register("geometry.stratification")
def _geometry_stratification(ctx: CheckContext) -> float:
    model = ctx.decl("frame_bundle_models", "model")
    little = model.little_group.order
    failures = 0
    for p in model.base:
        sectors = stratify(model, p)
        flat = [b for sector in sectors for b in sector]
        failures += len(flat) != len(set(flat)) or set(flat) != set(model.bundle.fiber(p))
        for index, sector in enumerate(sectors):
            failures += len(sector) != little
            failures += any(model.sector(model.bundle.act(b, model.inclusion(h))) != index
                            for b in sector for h in model.little_group.elements)
        if "expected_sectors" in ctx.args:
            failures += len(sectors) != int(ctx.arg("expected_sectors"))
    return float(failures)


@register("geometry.metric")
def _geometry_metric(ctx: CheckContext) -> float:
    model = ctx.decl("frame_bundle_models", "model")
    section = ctx.decl("sections", "section")
    sectors = metric_from_section(model, section)
    sub = metric_sub_bundle(model, section)
    failures = sum(sub.embedding[sub.tetrad(p)] != section(p) for p in section.domain)
    failures += sum(model.sector(b) != sectors[b[0]] for b in sub.embedding.values())
    if "expected" in ctx.args:
        failures += sum(sectors[point(p)] != int(s) for p, s in ctx.arg("expected").items())
    return float(failures)


@register("geometry.probabilities")
def _geometry_probabilities(ctx: CheckContext) -> float:
    model = ctx.decl("frame_bundle_models", "model")
    frame = ctx.decl("bundle_frames", "frame")
    omega = ctx.state("frame_state", frame.dim)
    probabilities = indefinite_geometry_probabilities(model, frame, omega)
    measure = dict(zip(frame.space, frame.measure(omega)))
    residual = abs(sum(probabilities.cells.values()) - 1.0)
    for p in frame.region:
        fiber_mass = sum(measure[b] for b in model.bundle.fiber(p))
        residual = max(residual, abs(probabilities.base_marginal(p) - fiber_mass))
    for p, sector, expected in ctx.arg("expected_cells", []):
        residual = max(residual, abs(probabilities.cells[(point(p), int(sector))] - float(expected)))
    return residual


@register("geometry.reduced_agreement")
def _geometry_reduced_agreement(ctx: CheckContext) -> float:
    model = ctx.decl("frame_bundle_models", "model")
    frame = ctx.decl("bundle_frames", "frame")
    return reduced_restriction(model, frame.section, frame, ctx.decl("fields", "field"),
                               ctx.state("frame_state", frame.dim), ctx.tol).residual


@register("geometry.gr_degeneracy")
def _geometry_gr_degeneracy(ctx: CheckContext) -> float:
    model = ctx.decl("frame_bundle_models", "model")
    field, frame = _bundle_inputs(ctx)
    equations = {int(s): ctx.scenario.get("difference_operators", ref, "args.equations")
                 for s, ref in ctx.arg("equations").items()}
    width = ctx.arg("soft_width", None)
    coupled = gr_coupled_relativize(model, frame.section, frame, field, equations, ctx.tol,
                                    None if width is None else float(width))
    mode = ctx.arg("mode", "all")
    if mode == "all":
        return coupled.distance(relativize_field(field, frame))
    if mode == "none":
        return coupled.distance(zero(coupled.dim))
    # Only the named sector solves its equation: the coupled operator keeps exactly that sector's points.
    sector = int(ctx.arg("sector"))
    weights = sector_equation_weights(model, field, equations, ctx.tol)
    if {s for s, w in weights.items() if w > 0} != {sector}:
        logger.info("Solved sectors %s, expected only %d.", weights, sector)
        return float("inf")
    values = [act_on_operator(field.sys_rep, field(b[0]), fiber_coordinate(model.bundle, frame.section, b))
              if model.sector(b) == sector else zero(field.dim) for b in frame.space]
    return coupled.distance(ov_integrate(OperatorField(frame.space, values), frame.povm))


@register("geometry.isometry")
def _geometry_isometry(ctx: CheckContext) -> float:
    outcome = isometric_frame_transform(ctx.decl("morphisms", "morphism"), ctx.decl("frame_bundle_models", "model"),
                                        ctx.decl("fields", "field"), ctx.tol)
    if outcome.classification != ctx.arg("expected", outcome.classification):
        logger.info("Morphism classified as %s, expected %s.", outcome.classification, ctx.arg("expected"))
        return float("inf")
    return outcome.residual


@register("geometry.path_observable")
def _geometry_path_observable(ctx: CheckContext) -> float:
    pf = ctx.decl("path_frames", "path_frame")
    observable = path_restricted_observable(pf, ctx.decl("frame_bundle_models", "model"),
                                            ctx.decl("sections", "section"), ctx.decl("fields", "field"),
                                            ctx.state("frame_state", pf.povm.dim), ctx.arg("variant"))
    return observable.distance(ctx.decl("operators", "expected"))


def validate_checks(scenario: Scenario):
    """
    :raises ScenarioError: if a check names an unknown kind.
    """
    for index, spec in enumerate(scenario.checks):
        if spec.kind not in check_registry:
            raise ScenarioError(f"unknown check kind {spec.kind!r}", f"$.checks[{index}].kind")


def run_check(scenario: Scenario, index: int, spec: CheckSpec, options: ToolkitOptions) -> CheckResult:
    """
    Runs one check with its own generator seeded by (seed, index), so results do not depend on scheduling.
    """
    tol = spec.tolerance if spec.tolerance is not None else options.tolerance
    ctx = CheckContext(scenario, spec.args, np.random.default_rng([options.seed, index]), tol)
    start = time.perf_counter()
    try:
        residual = float(check_registry[spec.kind](ctx))
    except PreconditionError as error:
        logger.info("Check %s: precondition error: %s", spec.name, error)
        return CheckResult(spec.name, spec.kind, status_precondition_error, error.residual,
                           time.perf_counter() - start, str(error))
    except QrfError as error:
        logger.info("Check %s could not be evaluated: %s", spec.name, error)
        return CheckResult(spec.name, spec.kind, status_precondition_error, None, time.perf_counter() - start,
                           str(error))
    except (KeyError, TypeError, ValueError, IndexError) as error:
        # Malformed arguments, e.g. a point or cell the declarations do not contain.
        message = f"invalid arguments: {type(error).__name__}: {error}"
        logger.info("Check %s could not be evaluated: %s", spec.name, message)
        return CheckResult(spec.name, spec.kind, status_precondition_error, None, time.perf_counter() - start,
                           message)
    status = status_pass if residual <= tol else status_fail
    logger.debug("Check %s (%s): %s, residual %s.", spec.name, spec.kind, status, residual)
    return CheckResult(spec.name, spec.kind, status, residual, time.perf_counter() - start)


def run_scenario(scenario: Scenario, options: Optional[ToolkitOptions] = None) -> Report:
    """
    Runs every check of the scenario and collects the results in declaration order.
    """
    options = options if options is not None else ToolkitOptions(tolerance=scenario.tolerance)
    validate_checks(scenario)
    arguments = [(scenario, index, spec, options) for index, spec in enumerate(scenario.checks)]
    results: List[CheckResult] = run_in_order(run_check, arguments, n_jobs=options.n_jobs,
                                              backend=options.parallel_backend, show_progress=options.show_progress,
                                              desc=scenario.name) if arguments else []
    report = Report(results, version=toolkit_version, digest=scenario.digest, scenario=scenario.name,
                    include_timings=options.include_timings)
    logger.info("Scenario %s: %d passed, %d failed.", scenario.name, report.passed, report.failed)
    return report
