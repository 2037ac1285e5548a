import hashlib
import json
from logging import getLogger
from pathlib import Path
from typing import Any, Callable, Dict, Hashable, List, NamedTuple, Optional, Union

import numpy as np
from numpy import ndarray

from finite_qrf.bundles import (BundleFrame, FrameMorphism, LocalSection, PrincipalBundle, QuantumField,
                                compose_morphisms, ideal_bundle_frame, identity_morphism, reduce_bundle_frame,
                                trivial_bundle)
from finite_qrf.errors import InvariantViolationError, QrfError, ScenarioError
from finite_qrf.geometry import FrameBundleModel, PathFrame
from finite_qrf.group_frames import GroupFrame, group_space, ideal_group_frame, reduce_frame
from finite_qrf.integral import OperatorField
from finite_qrf.measure import Povm, SampleSpace, ideal_povm
from finite_qrf.names import scenario_schema_id
from finite_qrf.operators import (PAULI, Channel, Operator, State, Unitary, basis_projector, compose_channels,
                                  depolarizing_channel, identity_channel, matrix_from_json,
                                  partial_trace_reprepare_channel, unitary_channel)
from finite_qrf.options import DEFAULT_TOLERANCE
from finite_qrf.pde_lift import (DifferenceOperator, GridAction, forward_difference, fourier_mode_annihilator,
                                 periodic_grid, translation_action)
from finite_qrf.symmetry import (FiniteGroup, SemidirectProduct, SubgroupInclusion, UnitaryRep, cyclic_group,
                                 dihedral_group, direct_product, identity_inclusion, permutation_representation,
                                 regular_representation, restrict_representation, subgroup_from_elements,
                                 symmetric_group, tensor_representation, trivial_group, trivial_inclusion,
                                 trivial_representation)

logger = getLogger("finite_qrf_scenario")

# Declarations are built in this order; later sections may reference earlier ones.
declaration_sections = (
    "groups",
    "semidirect_products",
    "subgroups",
    "reps",
    "frame_bundle_models",
    "bundles",
    "sections",
    "povms",
    "states",
    "operators",
    "channels",
    "group_frames",
    "bundle_frames",
    "fields",
    "operator_fields",
    "difference_operators",
    "grid_actions",
    "morphisms",
    "path_frames",
)


class CheckSpec(NamedTuple):
    name: str
    kind: str
    args: Dict[str, Any]
    tolerance: Optional[float]


class BundleReduction(NamedTuple):
    sub: BundleFrame
    inclusion: SubgroupInclusion
    base_embedding: Dict[Hashable, Hashable]


class Scenario:
    """
    A validated scenario: named declarations of every kind and the ordered list of checks to run on them.
    """

    def __init__(self, name: str, tolerance: float = DEFAULT_TOLERANCE, digest: Optional[str] = None):
        self.name = name
        self.tolerance = tolerance
        self.digest = digest
        self.declarations: Dict[str, Dict[str, Any]] = {section: {} for section in declaration_sections}
        self.bundle_reductions: Dict[str, BundleReduction] = {}
        self.checks: List[CheckSpec] = []

    def get(self, section: str, ref: Any, json_path: Optional[str] = None) -> Any:
        """
        Resolves a reference to a declaration.

        :raises ScenarioError: if nothing of that kind is declared under the id.
        """
        declared = self.declarations[section]
        if not isinstance(ref, str) or ref not in declared:
            raise ScenarioError(f"unresolved reference {ref!r} in {section}", json_path)
        return declared[ref]

    def count(self, section: str) -> int:
        return len(self.declarations[section])


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def scenario_digest(data: Any) -> str:
    """
    The sha256 of the canonical serialization, stable under key reordering.
    """
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Reads, builds and validates a scenario file.

    :raises ScenarioError: on parse errors and unresolved references.
    :raises InvariantViolationError: when a declared object fails its invariants, located at its JSON path.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as error:
        raise ScenarioError(f"cannot read scenario: {error}", str(path))
    except json.JSONDecodeError as error:
        raise ScenarioError(f"invalid JSON: {error}", str(path))
    logger.debug("Loaded %s.", path)
    return build_scenario(data, default_name=path.stem)


def build_scenario(data: Any, default_name: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object", "$")
    schema = data.get("schema", scenario_schema_id)
    if schema != scenario_schema_id:
        raise ScenarioError(f"unsupported schema {schema!r}, expected {scenario_schema_id!r}", "$.schema")
    unknown = set(data) - set(declaration_sections) - {"schema", "name", "tolerance", "checks", "description"}
    if unknown:
        raise ScenarioError(f"unknown keys {sorted(unknown)}", "$")
    scenario = Scenario(str(data.get("name", default_name)), float(data.get("tolerance", DEFAULT_TOLERANCE)),
                        scenario_digest(data))
    builder = _Builder(scenario)
    for section in declaration_sections:
        entries = data.get(section, {})
        if not isinstance(entries, dict):
            raise ScenarioError(f"{section} must be an object keyed by id", f"$.{section}")
        for ref, spec in entries.items():
            json_path = f"$.{section}.{ref}"
            try:
                scenario.declarations[section][ref] = builder.build(section, ref, spec, json_path)
            except InvariantViolationError as error:
                raise error.at(json_path)
            except ScenarioError:
                raise
            except (QrfError, KeyError, TypeError, ValueError, IndexError) as error:
                raise ScenarioError(f"cannot build declaration: {error}", json_path)
            logger.debug("Built %s.", json_path)
    checks = data.get("checks", [])
    if not isinstance(checks, list):
        raise ScenarioError("checks must be a list", "$.checks")
    for index, check in enumerate(checks):
        json_path = f"$.checks[{index}]"
        if not isinstance(check, dict) or "kind" not in check:
            raise ScenarioError("a check needs at least a kind", json_path)
        args = check.get("args", {})
        if not isinstance(args, dict):
            raise ScenarioError("check arguments must be an object", f"{json_path}.args")
        tolerance = check.get("tolerance")
        try:
            tolerance = None if tolerance is None else float(tolerance)
        except (TypeError, ValueError):
            raise ScenarioError(f"invalid tolerance {tolerance!r}", f"{json_path}.tolerance")
        scenario.checks.append(CheckSpec(str(check.get("name", f"check-{index}")), str(check["kind"]), dict(args),
                                         tolerance))
    logger.info("Scenario %s: %d checks declared.", scenario.name, len(scenario.checks))
    return scenario


def point(value: Any) -> Hashable:
    """
    JSON arrays name composite points such as (base point, group element); they become tuples.
    """
    if isinstance(value, list):
        return tuple(point(v) for v in value)
    return value


def parse_matrix(spec: Any, scenario: Optional[Scenario] = None) -> ndarray:
    """
    Parses a matrix given either as nested lists (with [re, im] pairs for complex entries) or as a shorthand:
    {"pauli": "Z"}, {"identity": n}, {"zero": n}, {"diag": [...]}, {"ket": [...]} (projector onto the normalized
    vector), {"basis": [index, dim]}, {"kron": [a, b]}, {"mix": [[weight, a], ...]} or {"ref": id} of a declared
    operator or state.
    """
    if isinstance(spec, list):
        return matrix_from_json(spec)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValueError(f"cannot parse matrix {spec!r}")
    (key, value), = spec.items()
    if key == "pauli":
        return PAULI[value].copy()
    if key == "identity":
        return np.eye(int(value), dtype=complex)
    if key == "zero":
        return np.zeros((int(value), int(value)), dtype=complex)
    if key == "diag":
        return np.diag(_complex_vector(value))
    if key == "ket":
        vector = _complex_vector(value)
        vector = vector / np.linalg.norm(vector)
        return np.outer(vector, vector.conj())
    if key == "basis":
        index, dim = (int(v) for v in value)
        return basis_projector(index, dim).matrix.copy()
    if key == "kron":
        result = np.eye(1, dtype=complex)
        for factor in value:
            result = np.kron(result, parse_matrix(factor, scenario))
        return result
    if key == "mix":
        return sum(complex(*_pair(weight)) * parse_matrix(part, scenario) for weight, part in value)
    if key == "ref" and scenario is not None:
        for section in ("operators", "states"):
            if value in scenario.declarations[section]:
                return scenario.declarations[section][value].matrix.copy()
        raise ScenarioError(f"unresolved operator reference {value!r}")
    raise ValueError(f"unknown matrix shorthand {key!r}")


def _pair(value: Any):
    if isinstance(value, list):
        return float(value[0]), float(value[1])
    return float(value), 0.0


def _complex_vector(values: List[Any]) -> ndarray:
    return np.array([complex(*_pair(v)) for v in values], dtype=complex)


class _Builder:
    """
    Builds declarations of every section from their JSON specs.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._builders: Dict[str, Callable[[str, Any, str], Any]] = {
            "groups": self._group,
            "semidirect_products": self._semidirect,
            "subgroups": self._subgroup,
            "reps": self._rep,
            "frame_bundle_models": self._frame_bundle_model,
            "bundles": self._bundle,
            "sections": self._section,
            "povms": self._povm,
            "states": self._state,
            "operators": self._operator,
            "channels": self._channel,
            "group_frames": self._group_frame,
            "bundle_frames": self._bundle_frame,
            "fields": self._field,
            "operator_fields": self._operator_field,
            "difference_operators": self._difference_operator,
            "grid_actions": self._grid_action,
            "morphisms": self._morphism,
            "path_frames": self._path_frame,
        }

    def build(self, section: str, ref: str, spec: Any, json_path: str) -> Any:
        if not isinstance(spec, dict) and section not in ("states", "operators"):
            raise ScenarioError("declaration must be an object", json_path)
        return self._builders[section](ref, spec, json_path)

    def get(self, section: str, ref: Any, json_path: str) -> Any:
        return self.scenario.get(section, ref, json_path)

    def _tol(self, spec: Dict[str, Any]) -> float:
        return float(spec.get("tolerance", self.scenario.tolerance))

    def _group(self, ref: str, spec: Dict[str, Any], json_path: str) -> FiniteGroup:
        if "cyclic" in spec:
            return cyclic_group(int(spec["cyclic"]))
        if "symmetric" in spec:
            return symmetric_group(int(spec["symmetric"]))
        if "trivial" in spec:
            return trivial_group()
        if "product" in spec:
            first, second = (self.get("groups", g, f"{json_path}.product") for g in spec["product"])
            return direct_product(first, second)
        if "table" in spec:
            labels = [point(label) for label in spec["labels"]] if "labels" in spec else None
            return FiniteGroup(spec["table"], identity=int(spec.get("identity", 0)), labels=labels, name=ref)
        raise ScenarioError("group needs one of cyclic, symmetric, trivial, product, table", json_path)

    def _semidirect(self, ref: str, spec: Dict[str, Any], json_path: str) -> SemidirectProduct:
        if "dihedral" in spec:
            product = dihedral_group(int(spec["dihedral"]))
        else:
            normal = self.get("groups", spec["normal"], f"{json_path}.normal")
            acting = self.get("groups", spec["acting"], f"{json_path}.acting")
            product = SemidirectProduct(normal, acting, spec["action"], name=ref)
        # The product group and its two factors become referable as a group and subgroups.
        self.scenario.declarations["groups"][ref] = product.product
        self.scenario.declarations["groups"][f"{ref}.translations"] = product.normal
        self.scenario.declarations["groups"][f"{ref}.acting"] = product.acting
        self.scenario.declarations["subgroups"][f"{ref}.translations"] = product.embed_normal
        self.scenario.declarations["subgroups"][f"{ref}.acting"] = product.embed_acting
        return product

    def _subgroup(self, ref: str, spec: Dict[str, Any], json_path: str) -> SubgroupInclusion:
        parent = self.get("groups", spec["parent"], f"{json_path}.parent")
        if spec.get("trivial"):
            inclusion = trivial_inclusion(parent)
        elif spec.get("identity"):
            inclusion = identity_inclusion(parent)
        elif "elements" in spec:
            inclusion = subgroup_from_elements(parent, [int(g) for g in spec["elements"]], name=ref)
        else:
            sub = self.get("groups", spec["sub"], f"{json_path}.sub")
            inclusion = SubgroupInclusion(sub, parent, spec["embed"])
        self.scenario.declarations["groups"].setdefault(ref, inclusion.sub)
        return inclusion

    def _rep(self, ref: str, spec: Dict[str, Any], json_path: str) -> UnitaryRep:
        if "restrict" in spec:
            rep = self.get("reps", spec["restrict"], f"{json_path}.restrict")
            return restrict_representation(rep, self.get("subgroups", spec["subgroup"], f"{json_path}.subgroup"))
        if "tensor" in spec:
            first, second = (self.get("reps", r, f"{json_path}.tensor") for r in spec["tensor"])
            return tensor_representation(first, second)
        group = self.get("groups", spec["group"], f"{json_path}.group")
        if spec.get("regular"):
            return regular_representation(group)
        if "trivial" in spec:
            return trivial_representation(group, int(spec["trivial"]))
        if "permutation" in spec:
            return permutation_representation(group, spec["permutation"], name=ref)
        if "matrices" in spec:
            matrices = [parse_matrix(m, self.scenario) for m in spec["matrices"]]
            return UnitaryRep(group, matrices, tol=self._tol(spec), name=ref)
        raise ScenarioError("rep needs one of regular, trivial, permutation, matrices, restrict, tensor", json_path)

    def _frame_bundle_model(self, ref: str, spec: Dict[str, Any], json_path: str) -> FrameBundleModel:
        inclusion = self.get("subgroups", spec["subgroup"], f"{json_path}.subgroup")
        model = FrameBundleModel([point(p) for p in spec["base"]], inclusion, name=ref)
        self.scenario.declarations["bundles"][ref] = model.bundle
        return model

    def _bundle(self, ref: str, spec: Dict[str, Any], json_path: str) -> PrincipalBundle:
        group = self.get("groups", spec["group"], f"{json_path}.group")
        base = [point(p) for p in spec["base"]]
        if spec.get("trivial"):
            return trivial_bundle(base, group, name=ref)
        total = [point(b) for b in spec["total"]]
        action = {point(b): [point(c) for c in images] for b, images in spec["action"].items()}
        proj = {point(b): point(p) for b, p in spec["proj"].items()}
        return PrincipalBundle(base, group, total, proj, action, name=ref)

    def _section(self, ref: str, spec: Dict[str, Any], json_path: str) -> LocalSection:
        bundle = self.get("bundles", spec["bundle"], f"{json_path}.bundle")
        if "constant" in spec:
            domain = [point(p) for p in spec.get("domain", bundle.base.points)]
            values = {p: (p, int(spec["constant"])) for p in domain}
        elif "elements" in spec:
            values = {point(p): (point(p), int(g)) for p, g in spec["elements"].items()}
        else:
            values = {point(p): point(b) for p, b in spec["values"].items()}
        return LocalSection(bundle, values, name=ref)

    def _space(self, spec: Dict[str, Any], json_path: str) -> SampleSpace:
        if "group" in spec:
            return group_space(self.get("groups", spec["group"], f"{json_path}.group"))
        if "section" in spec:
            section = self.get("sections", spec["section"], f"{json_path}.section")
            return SampleSpace(section.bundle.points_over(section.domain))
        if "grid" in spec:
            return periodic_grid(int(spec["grid"]))
        return SampleSpace(point(p) for p in spec["points"])

    def _povm(self, ref: str, spec: Dict[str, Any], json_path: str) -> Povm:
        space = self._space(spec, json_path)
        if spec.get("ideal"):
            return ideal_povm(space)
        effects = [Operator.unchecked(parse_matrix(e, self.scenario)) for e in spec["effects"]]
        return Povm(space, effects, tol=self._tol(spec), name=ref)

    def _state(self, ref: str, spec: Any, json_path: str) -> State:
        tol = self._tol(spec) if isinstance(spec, dict) else self.scenario.tolerance
        return State(parse_matrix(_matrix_spec(spec), self.scenario), tol=tol)

    def _operator(self, ref: str, spec: Any, json_path: str) -> Operator:
        return Operator(parse_matrix(_matrix_spec(spec), self.scenario))

    def _channel(self, ref: str, spec: Dict[str, Any], json_path: str) -> Channel:
        if "identity" in spec:
            return identity_channel(int(spec["identity"]))
        if "unitary" in spec:
            return unitary_channel(Operator(parse_matrix(spec["unitary"], self.scenario)))
        if "rep_element" in spec:
            rep = self.get("reps", spec["rep_element"]["rep"], f"{json_path}.rep_element.rep")
            return unitary_channel(rep(int(spec["rep_element"]["element"])))
        if "depolarizing" in spec:
            return depolarizing_channel(int(spec["depolarizing"]), float(spec.get("p", 1.0)))
        if "reprepare" in spec:
            return partial_trace_reprepare_channel(State(parse_matrix(spec["reprepare"], self.scenario)))
        if "compose" in spec:
            outer, inner = (self.get("channels", c, f"{json_path}.compose") for c in spec["compose"])
            return compose_channels(outer, inner)
        if "basis_permutation" in spec:
            # Heisenberg picture P_i -> P_images[i]
            images = [int(i) for i in spec["basis_permutation"]]
            matrix = np.zeros((len(images), len(images)), dtype=complex)
            matrix[np.arange(len(images)), images] = 1.0
            return unitary_channel(Unitary(matrix, tol=self._tol(spec)))
        if "kraus" in spec:
            return Channel([parse_matrix(k, self.scenario) for k in spec["kraus"]], tol=self._tol(spec))
        raise ScenarioError("channel needs one of identity, unitary, rep_element, depolarizing, reprepare, compose, "
                            "basis_permutation, kraus", json_path)

    def _group_frame(self, ref: str, spec: Dict[str, Any], json_path: str) -> GroupFrame:
        if "ideal" in spec:
            return ideal_group_frame(self.get("groups", spec["ideal"], f"{json_path}.ideal"), name=ref)
        if "reduce" in spec:
            sub = self.get("group_frames", spec["reduce"], f"{json_path}.reduce")
            inclusion = self.get("subgroups", spec["inclusion"], f"{json_path}.inclusion")
            return reduce_frame(sub, inclusion, tol=self._tol(spec))
        group = self.get("groups", spec["group"], f"{json_path}.group")
        rep = self.get("reps", spec["rep"], f"{json_path}.rep")
        povm = self.get("povms", spec["povm"], f"{json_path}.povm")
        inclusion = self.get("subgroups", spec["inclusion"], f"{json_path}.inclusion") if "inclusion" in spec else None
        return GroupFrame(group, rep, povm, inclusion, tol=self._tol(spec), name=ref)

    def _bundle_frame(self, ref: str, spec: Dict[str, Any], json_path: str) -> BundleFrame:
        if "reduce" in spec:
            sub = self.get("bundle_frames", spec["reduce"], f"{json_path}.reduce")
            bundle = self.get("bundles", spec["bundle"], f"{json_path}.bundle")
            inclusion = self.get("subgroups", spec["inclusion"], f"{json_path}.inclusion")
            embedding = {point(b): point(c) for b, c in spec["embedding"]}
            base_embedding = {point(p): point(q) for p, q in spec["base_embedding"]}
            frame = reduce_bundle_frame(sub, bundle, inclusion, embedding, base_embedding, tol=self._tol(spec))
            self.scenario.bundle_reductions[ref] = BundleReduction(sub, inclusion, base_embedding)
            return frame
        section = self.get("sections", spec["section"], f"{json_path}.section")
        if spec.get("ideal"):
            return ideal_bundle_frame(section.bundle, section, name=ref)
        rep = self.get("reps", spec["rep"], f"{json_path}.rep")
        povm = self.get("povms", spec["povm"], f"{json_path}.povm")
        inclusion = self.get("subgroups", spec["inclusion"], f"{json_path}.inclusion") if "inclusion" in spec else None
        return BundleFrame(section.bundle, section, rep, povm, inclusion, tol=self._tol(spec), name=ref)

    def _field(self, ref: str, spec: Dict[str, Any], json_path: str) -> QuantumField:
        rep = self.get("reps", spec["rep"], f"{json_path}.rep")
        values = {point(p): Operator(parse_matrix(m, self.scenario)) for p, m in _items(spec["values"])}
        return QuantumField(values, rep, name=ref)

    def _operator_field(self, ref: str, spec: Dict[str, Any], json_path: str) -> OperatorField:
        space = self._space(spec, json_path)
        return OperatorField(space, [Operator(parse_matrix(m, self.scenario)) for m in spec["values"]])

    def _difference_operator(self, ref: str, spec: Dict[str, Any], json_path: str) -> DifferenceOperator:
        if "forward_difference" in spec:
            return forward_difference(int(spec["forward_difference"]))
        if "fourier_mode" in spec:
            return fourier_mode_annihilator(int(spec["fourier_mode"]["size"]), int(spec["fourier_mode"]["mode"]))
        grid = self._space(spec, json_path)
        if "identity" in spec:
            return DifferenceOperator(grid, np.eye(len(grid)), name=ref)
        if "zero" in spec:
            return DifferenceOperator(grid, np.zeros((len(grid), len(grid))), name=ref)
        return DifferenceOperator(grid, matrix_from_json(spec["matrix"]), name=ref)

    def _grid_action(self, ref: str, spec: Dict[str, Any], json_path: str) -> GridAction:
        if "translation" in spec:
            return translation_action(int(spec["translation"]))
        group = self.get("groups", spec["group"], f"{json_path}.group")
        return GridAction(group, self._space(spec, json_path), spec["table"])

    def _morphism(self, ref: str, spec: Dict[str, Any], json_path: str) -> FrameMorphism:
        if "identity" in spec:
            return identity_morphism(self.get("bundle_frames", spec["identity"], f"{json_path}.identity"))
        if "compose" in spec:
            second, first = (self.get("morphisms", m, f"{json_path}.compose") for m in spec["compose"])
            return compose_morphisms(second, first)
        psi = self.get("channels", spec["channel"], f"{json_path}.channel")
        source = self.get("bundle_frames", spec["source"], f"{json_path}.source")
        target = self.get("bundle_frames", spec["target"], f"{json_path}.target")
        theta = {point(b): point(c) for b, c in spec["theta"]}
        return FrameMorphism(psi, theta, source, target, name=ref)

    def _path_frame(self, ref: str, spec: Dict[str, Any], json_path: str) -> PathFrame:
        povm = self.get("povms", spec["povm"], f"{json_path}.povm")
        lift = {point(t): point(b) for t, b in _items(spec["lift"])} if "lift" in spec else None
        stationary = self.get("subgroups", spec["stationary"], f"{json_path}.stationary") if "stationary" in spec \
            else None
        path = {point(t): point(p) for t, p in _items(spec["path"])}
        return PathFrame([point(t) for t in spec["parameters"]], path, povm, lift, stationary, name=ref)


def _items(value: Any) -> List:
    """
    Pairs of a JSON object, or the entries of a JSON list of [key, value] pairs for composite keys.
    """
    if isinstance(value, dict):
        return list(value.items())
    return [tuple(pair) for pair in value]


def _matrix_spec(spec: Any) -> Any:
    if isinstance(spec, dict) and "matrix" in spec:
        return spec["matrix"]
    return spec
