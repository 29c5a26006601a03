import pytest
from sympy import ImmutableMatrix

from errors import GeneratorMovesPolarization, GeneratorNotIsometry, NotIsotropic, ZeroVector
from fixture_utils import corpus, load_fixture
from isotropy import (
    FOUND,
    NONEXISTENCE,
    NOT_FOUND,
    all_isotropic,
    apply_word,
    cusp_orbit_partition,
    digits,
    find_isotropic,
    find_orthogonal_vector,
    find_polarization,
    find_second_isotropic,
    isotropic_in_shell,
    shell_tasks,
    task_vectors,
    verify_found,
)
from lattice import Lattice, is_primitive, norm, pair
from monodromy import eichler_transvection

SWAP = [[0, 1], [1, 0]]


@pytest.fixture
def u():
    return load_fixture("U")


@pytest.fixture
def uu():
    return load_fixture("UU")


@pytest.fixture
def rank5():
    return load_fixture("rank5-a")


@pytest.fixture
def anisotropic():
    """x^2 - 3y^2 has no rational zeros but the form is indefinite"""
    return Lattice("diag(1,-3)", ImmutableMatrix([[1, 0], [0, -3]]))


class TestEnumerationOrder:
    def test_digit_order(self):
        assert digits(2) == [1, -1, 2, -2]

    def test_tasks_by_support_size(self):
        tasks = shell_tasks(3, 1)
        assert [t[1] for t in tasks] == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]

    def test_vectors_reach_the_shell(self):
        vectors = list(task_vectors(2, 2, (0, 1)))
        assert vectors[0] == (1, 2)
        assert all(max(abs(c) for c in v) == 2 for v in vectors)
        assert all(v[0] > 0 for v in vectors)
        assert len(vectors) == 6


class TestFindIsotropic:
    def test_hyperbolic_plane(self, u):
        result = find_isotropic(u, 1)
        assert result.status == FOUND
        assert result.vector == (1, 0)
        assert result.examined == 1

    def test_rank5(self, rank5):
        result = find_isotropic(rank5, 2)
        assert result.vector == (1, 0, 0, 1, 0)
        assert result.height == 1
        assert verify_found(rank5, result)

    def test_definite_is_nonexistence(self):
        result = find_isotropic(load_fixture("posdef5"), 3)
        assert result.status == NONEXISTENCE
        assert result.vector is None

    def test_indefinite_without_hit(self, anisotropic):
        result = find_isotropic(anisotropic, 3)
        assert result.status == NOT_FOUND
        assert result.height == 3
        assert result.examined > 0

    def test_deterministic(self, rank5):
        assert find_isotropic(rank5, 2) == find_isotropic(rank5, 2)

    @pytest.mark.parametrize("seed", [None, 7])
    def test_parallel_matches_serial(self, rank5, seed):
        serial = find_isotropic(rank5, 2, workers=1)
        parallel = find_isotropic(rank5, 2, workers=2, seed=seed)
        assert parallel == serial

    def test_parallel_not_found_matches_serial(self, anisotropic):
        assert find_isotropic(anisotropic, 2, workers=2, seed=3) == find_isotropic(anisotropic, 2, workers=1)

    def test_result_dict(self, u):
        assert find_isotropic(u, 1).to_dict() == {
            "result": "found",
            "vector": [1, 0],
            "height": 1,
            "examined": 1,
            "sieved": 0,
        }


class TestCorpus:
    """Every indefinite corpus lattice has a primitive isotropic witness at height 2"""

    def test_corpus_size(self):
        lattices = corpus()
        assert len(lattices) >= 20
        assert all(5 <= lat.rank <= 8 for lat in lattices)

    @pytest.mark.parametrize("lat", corpus(), ids=lambda lat: lat.name)
    def test_isotropic_found(self, lat):
        result = find_isotropic(lat, 2)
        assert result.found
        assert norm(lat, result.vector) == 0
        assert is_primitive(result.vector)


class TestRelativeSearches:
    def test_second_isotropic_in_u(self, u):
        assert find_second_isotropic(u, (1, 0), 1).vector == (0, 1)

    def test_second_isotropic_in_uu(self, uu):
        assert find_second_isotropic(uu, (1, 0, 0, 0), 1).vector == (0, 1, 0, 0)

    def test_polarization(self, uu):
        result = find_polarization(uu, (1, 0, 0, 0), 1)
        assert result.vector == (0, 0, 1, 1)
        assert norm(uu, result.vector) > 0
        assert pair(uu, result.vector, (1, 0, 0, 0)) == 0

    def test_delta_must_be_isotropic(self, rank5):
        with pytest.raises(NotIsotropic):
            find_second_isotropic(rank5, (1, 0, 0, 0, 0), 1)

    def test_delta_must_be_nonzero(self, rank5):
        with pytest.raises(ZeroVector):
            find_polarization(rank5, (0, 0, 0, 0, 0), 1)

    def test_even_orthogonal_vector(self, rank5):
        result = find_orthogonal_vector(rank5, (1, 0, 0, 1, 0), 2)
        assert result.vector == (0, 0, 0, 0, 1)
        assert norm(rank5, result.vector) == -2


class TestShells:
    def test_shell_one_of_u(self, u):
        assert list(isotropic_in_shell(u, 1)) == [(1, 0), (0, 1)]

    def test_orthogonal_filter(self, uu):
        vectors = all_isotropic(uu, 1, orthogonal_to=(1, 0, 0, 0))
        assert (1, 0, 0, 0) in vectors
        assert (0, 1, 0, 0) not in vectors
        assert all(pair(uu, v, (1, 0, 0, 0)) == 0 for v in vectors)


class TestCuspPartition:
    def test_no_generators(self, u):
        classes = cusp_orbit_partition(u, None, [], 1, 1)
        assert [c.representative for c in classes] == [(1, 0), (0, 1)]

    def test_swap_merges(self, u):
        classes = cusp_orbit_partition(u, None, [SWAP], 1, 1)
        assert len(classes) == 1
        cls = classes[0]
        assert cls.members == [(1, 0), (0, 1)]
        assert cls.witness_words[(0, 1)] == ["g0"]
        for member, word in cls.witness_words.items():
            assert apply_word(word, [SWAP], cls.representative) == member

    def test_depth_zero_keeps_singletons(self, u):
        assert len(cusp_orbit_partition(u, None, [SWAP], 1, 0)) == 2

    def test_generator_not_isometry(self, u):
        with pytest.raises(GeneratorNotIsometry) as e:
            cusp_orbit_partition(u, None, [[[1, 1], [0, 1]]], 1, 1)
        assert e.value.details["generator"] == 0

    def test_generator_moves_polarization(self, uu):
        block_swap = [
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [1, 0, 0, 0],
            [0, 1, 0, 0],
        ]
        with pytest.raises(GeneratorMovesPolarization):
            cusp_orbit_partition(uu, (0, 0, 1, 1), [block_swap], 1, 1)

    def test_transvection_merges_e1_with_e1_plus_e2(self, uu):
        T = eichler_transvection(uu, (0, 0, 1, 0), (0, 1, 0, 0))
        assert T.apply((1, 0, 0, 0)) == (1, 0, 1, 0)
        classes = cusp_orbit_partition(uu, None, [T.matrix], 1, 1)
        cls = next(c for c in classes if (1, 0, 0, 0) in c.members)
        assert (1, 0, 1, 0) in cls.members
        for member, word in cls.witness_words.items():
            assert apply_word(word, [T.matrix], cls.representative) == member

    def test_generator_order_does_not_change_classes(self, uu):
        transvection = eichler_transvection(uu, (0, 0, 1, 0), (0, 1, 0, 0)).matrix
        swap_first_plane = [
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
        ]
        forward = cusp_orbit_partition(uu, None, [transvection, swap_first_plane], 1, 2)
        backward = cusp_orbit_partition(uu, None, [swap_first_plane, transvection], 1, 2)
        assert {frozenset(c.members) for c in forward} == {frozenset(c.members) for c in backward}
        assert len(forward) < len(all_isotropic(uu, 1))

    def test_partition_dict(self, u):
        payload = cusp_orbit_partition(u, None, [SWAP], 1, 1)[0].to_dict()
        assert payload["representative"] == [1, 0]
        assert {"member": [0, 1], "word": ["g0"]} in payload["witness_words"]
