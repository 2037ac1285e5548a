from itertools import permutations, product
from logging import getLogger
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy import ndarray

from finite_qrf.errors import DimensionMismatchError, InvalidElementError, InvariantViolationError
from finite_qrf.operators import Operator, State, Unitary
from finite_qrf.options import DEFAULT_TOLERANCE

logger = getLogger("finite_qrf_symmetry")

Element = int


class FiniteGroup:
    """
    A finite group given by its Cayley table on element indices. Element names are optional labels.
    """

    def __init__(self, mul: Union[ndarray, Sequence[Sequence[int]]], identity: int = 0,
                 labels: Optional[Sequence[Hashable]] = None, name: str = "group"):
        """
        Initializes the group and checks the group axioms exhaustively.
        :param mul: The Cayley table, mul[a][b] is the index of the product a*b.
        :param identity: The index of the identity element.
        :param labels: (Optional) Names of the elements, defaults to their indices.
        :param name: A name used in messages.
        """
        table = np.array(mul, dtype=int)
        order = table.shape[0]
        if table.ndim != 2 or table.shape != (order, order) or order == 0:
            raise InvariantViolationError("cayley-table", f"table of shape {table.shape} is not square", name)
        if np.any(table < 0) or np.any(table >= order):
            raise InvariantViolationError("closure", "table contains entries outside the group", name)
        if not 0 <= identity < order:
            raise InvariantViolationError("identity", f"identity index {identity} out of range", name)
        if np.any(table[identity, :] != np.arange(order)) or np.any(table[:, identity] != np.arange(order)):
            raise InvariantViolationError("identity", f"element {identity} is not a two-sided identity", name)
        # (ab)c == a(bc) for all triples.
        if np.any(table[table, :] != table[:, table]):
            raise InvariantViolationError("associativity", "Cayley table is not associative", name)
        inverses = np.argmax(table == identity, axis=1)
        elements = np.arange(order)
        if np.any(table[elements, inverses] != identity) or np.any(table[inverses, elements] != identity):
            raise InvariantViolationError("inverse", "some element has no two-sided inverse", name)
        table.setflags(write=False)
        inverses.setflags(write=False)
        self.mul = table
        self.inv = inverses
        self.identity = identity
        self.name = name
        self.labels: Tuple[Hashable, ...] = tuple(labels) if labels is not None else tuple(range(order))
        if len(self.labels) != order or len(set(self.labels)) != order:
            raise InvariantViolationError("labels", "element labels must be unique and one per element", name)
        self._label_index = {label: i for i, label in enumerate(self.labels)}

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    @property
    def elements(self) -> range:
        return range(self.order)

    def multiply(self, a: Element, b: Element) -> Element:
        return int(self.mul[self.check_element(a), self.check_element(b)])

    def inverse(self, a: Element) -> Element:
        return int(self.inv[self.check_element(a)])

    def product(self, *elements: Element) -> Element:
        result = self.identity
        for element in elements:
            result = self.multiply(result, element)
        return result

    def check_element(self, a: Element) -> Element:
        if not isinstance(a, (int, np.integer)) or not 0 <= a < self.order:
            raise InvalidElementError(f"{a} is not an element index of {self.name} (order {self.order}).")
        return int(a)

    def index(self, label: Hashable) -> Element:
        """
        Looks up the element index of a label.
        """
        if label not in self._label_index:
            raise InvalidElementError(f"{label!r} is not an element of {self.name}.")
        return self._label_index[label]

    def is_abelian(self) -> bool:
        return bool(np.all(self.mul == self.mul.T))

    def __repr__(self) -> str:
        return f"FiniteGroup(name={self.name!r}, order={self.order})"


def trivial_group() -> FiniteGroup:
    return FiniteGroup([[0]], name="1")


def cyclic_group(order: int) -> FiniteGroup:
    elements = np.arange(order)
    return FiniteGroup((elements[:, None] + elements[None, :]) % order, name=f"Z{order}")


def symmetric_group(degree: int) -> FiniteGroup:
    """
    The symmetric group on {0, ..., degree-1}; elements are permutation tuples in lexicographic order and the
    product is composition, (s*t)(i) = s(t(i)).
    """
    elements = list(permutations(range(degree)))
    index = {element: i for i, element in enumerate(elements)}
    table = [[index[tuple(s[t[i]] for i in range(degree))] for t in elements] for s in elements]
    return FiniteGroup(table, identity=0, labels=elements, name=f"S{degree}")


def direct_product(first: FiniteGroup, second: FiniteGroup) -> FiniteGroup:
    """
    The direct product; the element (a, b) has index a * |second| + b.
    """
    pairs = list(product(first.elements, second.elements))
    table = [[first.multiply(a, c) * second.order + second.multiply(b, d) for c, d in pairs] for a, b in pairs]
    labels = [(first.labels[a], second.labels[b]) for a, b in pairs]
    identity = first.identity * second.order + second.identity
    return FiniteGroup(table, identity=identity, labels=labels, name=f"{first.name}x{second.name}")


class SubgroupInclusion:
    """
    An injective homomorphism sub -> parent.
    """

    def __init__(self, sub: FiniteGroup, parent: FiniteGroup, embed: Sequence[int]):
        """
        Initializes and validates the inclusion.
        :param sub: The subgroup.
        :param parent: The parent group.
        :param embed: embed[h] is the parent index of the subgroup element h.
        """
        embed = np.array(embed, dtype=int)
        if embed.shape != (sub.order,) or np.any(embed < 0) or np.any(embed >= parent.order):
            raise InvariantViolationError("embedding", "embedding must map every subgroup element into the parent")
        if len(set(embed.tolist())) != sub.order:
            raise InvariantViolationError("injectivity", "embedding is not injective")
        if embed[sub.identity] != parent.identity:
            raise InvariantViolationError("identity", "embedding does not preserve the identity")
        if np.any(embed[sub.mul] != parent.mul[embed[:, None], embed[None, :]]):
            raise InvariantViolationError("homomorphism", "embedding is not a homomorphism")
        embed.setflags(write=False)
        self.sub = sub
        self.parent = parent
        self.embed = embed
        self._preimage = {int(g): h for h, g in enumerate(embed)}

    def __call__(self, h: Element) -> Element:
        return int(self.embed[self.sub.check_element(h)])

    def contains(self, g: Element) -> bool:
        return int(g) in self._preimage

    def preimage(self, g: Element) -> Element:
        if int(g) not in self._preimage:
            raise InvalidElementError(f"{g} is not in the image of {self.sub.name} in {self.parent.name}.")
        return self._preimage[int(g)]

    @property
    def image(self) -> List[Element]:
        return [int(g) for g in self.embed]


def identity_inclusion(group: FiniteGroup) -> SubgroupInclusion:
    return SubgroupInclusion(group, group, list(group.elements))


def trivial_inclusion(group: FiniteGroup) -> SubgroupInclusion:
    return SubgroupInclusion(trivial_group(), group, [group.identity])


def subgroup_from_elements(parent: FiniteGroup, elements: Sequence[Element],
                           name: str = "subgroup") -> SubgroupInclusion:
    """
    Builds the subgroup formed by the given parent elements together with its inclusion.
    """
    elements = [parent.check_element(g) for g in elements]
    position = {g: i for i, g in enumerate(elements)}
    try:
        table = [[position[parent.multiply(a, b)] for b in elements] for a in elements]
    except KeyError:
        raise InvariantViolationError("closure", f"elements {elements} are not closed under multiplication", name)
    if parent.identity not in position:
        raise InvariantViolationError("identity", "subgroup elements must contain the identity", name)
    sub = FiniteGroup(table, identity=position[parent.identity], labels=[parent.labels[g] for g in elements], name=name)
    return SubgroupInclusion(sub, parent, elements)


def left_cosets(inclusion: SubgroupInclusion) -> Tuple[List[Tuple[Element, ...]], ndarray]:
    """
    Enumerates the left cosets gH of a subgroup H in its parent.
    Cosets are sorted by their smallest element, which is used as the coset representative.

    :param inclusion: The subgroup inclusion.
    :return: The list of cosets (sorted element tuples) and an array mapping each parent element to its coset index.
    """
    parent = inclusion.parent
    coset_of = -np.ones(parent.order, dtype=int)
    cosets = []
    for g in parent.elements:
        if coset_of[g] >= 0:
            continue
        coset = tuple(sorted(parent.multiply(g, h) for h in inclusion.image))
        for element in coset:
            coset_of[element] = len(cosets)
        cosets.append(coset)
    return cosets, coset_of


class UnitaryRep:
    """
    A unitary representation of a finite group: U(g)U(h) = U(gh).
    """

    def __init__(self, group: FiniteGroup, matrices: Sequence[Union[ndarray, Operator]], tol: float = DEFAULT_TOLERANCE,
                 name: str = "rep"):
        """
        Initializes the representation and checks the homomorphism property on all pairs.
        :param group: The represented group.
        :param matrices: One unitary matrix per element index.
        :param tol: The tolerance for unitarity and the homomorphism law.
        :param name: A name used in messages.
        """
        if len(matrices) != group.order:
            raise InvariantViolationError("representation", f"expected {group.order} matrices, got {len(matrices)}",
                                          name)
        arrays = [m.matrix if isinstance(m, Operator) else np.asarray(m, dtype=complex) for m in matrices]
        try:
            self.matrices = tuple(Unitary(m, tol=tol) for m in arrays)
        except InvariantViolationError as error:
            raise error.at(name)
        if len({m.dim for m in self.matrices}) != 1:
            raise DimensionMismatchError(f"{name}: representation matrices have different dimensions.")
        self.group = group
        self.name = name
        violation = representation_violation(self)
        if violation > tol:
            raise InvariantViolationError("homomorphism", f"U(g)U(h) differs from U(gh) by {violation}", name,
                                          violation)

    @classmethod
    def unchecked(cls, group: FiniteGroup, matrices: Sequence[ndarray], name: str = "rep") -> "UnitaryRep":
        rep = cls.__new__(cls)
        rep.group = group
        rep.matrices = tuple(Unitary.unchecked(m) for m in matrices)
        rep.name = name
        return rep

    @property
    def dim(self) -> int:
        return self.matrices[0].dim

    def __call__(self, g: Element) -> Unitary:
        return self.matrices[self.group.check_element(g)]


def representation_violation(rep: UnitaryRep) -> float:
    """
    The largest operator-norm violation of U(e) = 1 and U(g)U(h) = U(gh) over all pairs.
    """
    group = rep.group
    stacked = np.stack([m.matrix for m in rep.matrices])
    identity_violation = np.linalg.norm(stacked[group.identity] - np.eye(rep.dim), ord=2)
    products = np.einsum("aij,bjk->abik", stacked, stacked)
    expected = stacked[group.mul]
    pair_violation = np.max(np.linalg.norm(products - expected, ord=2, axis=(2, 3)))
    return float(max(identity_violation, pair_violation))


def trivial_representation(group: FiniteGroup, dim: int = 1) -> UnitaryRep:
    return UnitaryRep.unchecked(group, [np.eye(dim, dtype=complex)] * group.order, name="trivial")


def permutation_representation(group: FiniteGroup, right_action: Union[ndarray, Sequence[Sequence[int]]],
                               name: str = "permutation") -> UnitaryRep:
    """
    The representation on C^points induced by a right action of the group on a finite set of points:
    U(g)|y> = |y.g^-1>, so that U(g)^dagger P_y U(g) = P_{y.g} for the basis projectors P_y.

    :param group: The acting group.
    :param right_action: right_action[y][g] is the index of y.g.
    :param name: A name used in messages.
    :return: The permutation representation.
    """
    table = np.array(right_action, dtype=int)
    points = table.shape[0]
    matrices = []
    for g in group.elements:
        matrix = np.zeros((points, points), dtype=complex)
        inverse = group.inverse(g)
        for y in range(points):
            matrix[table[y, inverse], y] = 1.0
        matrices.append(matrix)
    return UnitaryRep(group, matrices, name=name)


def regular_representation(group: FiniteGroup) -> UnitaryRep:
    """
    The right-regular representation, U(g)|x> = |x g^-1>.
    """
    return permutation_representation(group, group.mul, name=f"regular({group.name})")


def restrict_representation(rep: UnitaryRep, inclusion: SubgroupInclusion) -> UnitaryRep:
    if inclusion.parent is not rep.group:
        raise DimensionMismatchError("Inclusion parent is not the represented group.")
    return UnitaryRep.unchecked(inclusion.sub, [rep(inclusion(h)).matrix for h in inclusion.sub.elements],
                                name=f"{rep.name}|{inclusion.sub.name}")


def tensor_representation(first: UnitaryRep, second: UnitaryRep) -> UnitaryRep:
    """
    The diagonal representation g -> U_1(g) (x) U_2(g).
    """
    if first.group is not second.group:
        raise DimensionMismatchError("Diagonal representation needs both factors on the same group.")
    matrices = [np.kron(a.matrix, b.matrix) for a, b in zip(first.matrices, second.matrices)]
    return UnitaryRep.unchecked(first.group, matrices,
                                name=f"{first.name}x{second.name}")


def act_on_state(rep: UnitaryRep, g: Element, rho: Operator) -> State:
    """
    The left action on states, g.rho = U(g) rho U(g)^dagger.
    """
    unitary = rep(g).matrix
    if rho.dim != rep.dim:
        raise DimensionMismatchError(f"State of dim {rho.dim} cannot be acted on by {rep.name} of dim {rep.dim}.")
    return State.unchecked(unitary @ rho.matrix @ unitary.conj().T)


def act_on_operator(rep: UnitaryRep, a: Operator, g: Element) -> Operator:
    """
    The right action on operators, a.g = U(g)^dagger a U(g).
    """
    unitary = rep(g).matrix
    if a.dim != rep.dim:
        raise DimensionMismatchError(f"Operator of dim {a.dim} cannot be acted on by {rep.name} of dim {rep.dim}.")
    return Operator.unchecked(unitary.conj().T @ a.matrix @ unitary)


def duality_pairing_residual(rep: UnitaryRep, rho: Operator, a: Operator) -> float:
    """
    max_g |tr[g.rho a] - tr[rho a.g]|.
    """
    residuals = [abs(np.trace(act_on_state(rep, g, rho).matrix @ a.matrix)
                     - np.trace(rho.matrix @ act_on_operator(rep, a, g).matrix)) for g in rep.group.elements]
    return float(max(residuals))


class SemidirectProduct:
    """
    The semidirect product T x| L of a normal subgroup T with an acting group L. The pair (t, l) has index
    l * |T| + t and multiplication (t, l)(t', l') = (t l(t'), l l').
    """

    def __init__(self, normal: FiniteGroup, acting: FiniteGroup, action: Union[ndarray, Sequence[Sequence[int]]],
                 name: Optional[str] = None):
        """
        Initializes the semidirect product.
        :param normal: The normal subgroup T (translations).
        :param acting: The acting group L.
        :param action: action[l][t] is the index of l(t); each row must be an automorphism of T and l -> l(.)
            a homomorphism into Aut(T).
        :param name: (Optional) A name of the product group.
        """
        table = np.array(action, dtype=int)
        if table.shape != (acting.order, normal.order):
            raise InvariantViolationError("automorphism-table", f"expected shape {(acting.order, normal.order)}")
        for l in acting.elements:
            automorphism = table[l]
            if sorted(automorphism.tolist()) != list(normal.elements):
                raise InvariantViolationError("automorphism", f"action of {l} is not a bijection")
            if np.any(automorphism[normal.mul] != normal.mul[automorphism[:, None], automorphism[None, :]]):
                raise InvariantViolationError("automorphism", f"action of {l} is not a homomorphism of T")
        if np.any(table[acting.identity] != np.arange(normal.order)):
            raise InvariantViolationError("automorphism", "identity of L must act trivially")
        for l, k in product(acting.elements, acting.elements):
            if np.any(table[acting.multiply(l, k)] != table[l][table[k]]):
                raise InvariantViolationError("action", "l -> l(.) is not a homomorphism into Aut(T)")
        table.setflags(write=False)
        self.normal = normal
        self.acting = acting
        self.action = table
        pairs = [(t, l) for l in acting.elements for t in normal.elements]
        mul = [[self.pair_index(normal.multiply(t, table[l][u]), acting.multiply(l, m)) for u, m in pairs]
               for t, l in pairs]
        labels = [(normal.labels[t], acting.labels[l]) for t, l in pairs]
        self.product = FiniteGroup(mul, identity=self.pair_index(normal.identity, acting.identity), labels=labels,
                                   name=name or f"{normal.name}x|{acting.name}")
        self.embed_normal = SubgroupInclusion(normal, self.product,
                                              [self.pair_index(t, acting.identity) for t in normal.elements])
        self.embed_acting = SubgroupInclusion(acting, self.product,
                                              [self.pair_index(normal.identity, l) for l in acting.elements])

    def pair_index(self, t: Element, l: Element) -> Element:
        return l * self.normal.order + t

    def pair(self, g: Element) -> Tuple[Element, Element]:
        g = self.product.check_element(g)
        return g % self.normal.order, g // self.normal.order


def factorize_semidirect(sd: SemidirectProduct, g: Element) -> Tuple[Element, Element]:
    """
    Factorizes g = (t, e)(e, l) into its translation part t and its acting part l.
    """
    return sd.pair(g)


def dihedral_group(n: int) -> SemidirectProduct:
    """
    The dihedral group Z_n x| Z_2 with the reflection acting by t -> -t.
    """
    rotations = cyclic_group(n)
    reflections = cyclic_group(2)
    action = [list(range(n)), [(-t) % n for t in range(n)]]
    return SemidirectProduct(rotations, reflections, action, name=f"D{n}")


class Torsor:
    """
    A set with a free and transitive left group action, identified with the group by choosing an origin:
    every point x is written x = g.x_origin and stored by its coordinate g.
    """

    def __init__(self, group: FiniteGroup, coordinates: Dict[Hashable, Element]):
        """
        :param group: The acting group.
        :param coordinates: The coordinate of each point relative to the current origin.
        """
        if sorted(coordinates.values()) != list(group.elements):
            raise InvariantViolationError("torsor", "coordinates must be a bijection onto the group")
        self.group = group
        self.coordinates = dict(coordinates)

    @property
    def points(self) -> List[Hashable]:
        return list(self.coordinates)

    def origin(self) -> Hashable:
        return next(x for x, g in self.coordinates.items() if g == self.group.identity)

    def shift_origin(self, h: Element) -> "Torsor":
        """
        Moves the origin to h.x_origin; a point x = g.x_origin then has coordinate g h^-1.
        """
        inverse = self.group.inverse(h)
        return Torsor(self.group, {x: self.group.multiply(g, inverse) for x, g in self.coordinates.items()})

    def act(self, g: Element, x: Hashable) -> Hashable:
        target = self.group.multiply(g, self.coordinates[x])
        return next(y for y, c in self.coordinates.items() if c == target)
