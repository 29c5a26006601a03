import numpy as np
import pytest
from sympy import Matrix, eye

from errors import (
    IndexTooHigh,
    NotIsometry,
    NotNilpotent,
    NotUnipotent,
    OddNorm,
    PreconditionViolated,
    RankTooSmall,
    SearchExhausted,
    ZeroVector,
)
from fixture_utils import load_fixture
from lattice import norm, pair
from linalg_utils import exact_inverse, random_unimodular, rank
from monodromy import (
    check_isometry,
    eichler_transvection,
    exp_nilpotent,
    jordan_type,
    large_radius_certificate,
    log_unipotent,
    primitive_invariant_cycle,
    rank_profile,
    recheck_large_radius_certificate,
    transvection_matrix,
    unipotency_index,
    weight_filtration_order2,
)
from sympow import J3, sym_power_operator

DELTA = (1, 0, 0, 1, 0)


@pytest.fixture
def rank5():
    return load_fixture("rank5-a")


@pytest.fixture
def uuu():
    return load_fixture("UUU")


@pytest.fixture
def index3(rank5):
    return eichler_transvection(rank5, DELTA, (0, 0, 0, 0, 1))


@pytest.fixture
def index2(rank5):
    return eichler_transvection(rank5, DELTA, (0, 1, 1, 0, 1))


def random_orthogonal_vector(rng, j, rank=6, bound=3):
    """Random v in UUU orthogonal to the basis vector e_j (partner index j ^ 1)."""
    v = [int(c) for c in rng.integers(-bound, bound + 1, size=rank)]
    v[j ^ 1] = 0
    return tuple(v)


def random_isotropic_transvection(uuu, rng):
    """E(b_j, v) with v a nonzero vector of the isotropic span of e in the two other planes."""
    while True:
        j = int(rng.integers(0, 6))
        b, c = (int(x) for x in rng.integers(-3, 4, size=2))
        if b or c:
            break
    others = [k for k in (0, 2, 4) if k != j - j % 2]
    v = [0] * 6
    v[others[0]], v[others[1]] = b, c
    return transvection_matrix(uuu, uuu.basis_vector(j), v)


def jordan_blocks(N):
    """Block sizes read off sympy's Jordan form, largest first."""
    _, J = Matrix(N).jordan_form()
    sizes, size = [], 1
    for i in range(J.rows - 1):
        if J[i, i + 1] == 1:
            size += 1
        else:
            sizes.append(size)
            size = 1
    sizes.append(size)
    return sorted(sizes, reverse=True)


class TestCheckIsometry:
    def test_identity(self, rank5):
        assert check_isometry(rank5, eye(5)).apply(DELTA) == DELTA

    def test_witness_pair(self):
        u = load_fixture("U")
        with pytest.raises(NotIsometry) as e:
            check_isometry(u, [[1, 1], [0, 1]])
        assert e.value.details["x"] == [0, 1]
        assert e.value.details["after"] == 2


class TestEichlerTransvection:
    def test_index_three(self, rank5, index3):
        assert index3.apply(DELTA) == DELTA
        assert unipotency_index(index3) == 3
        assert jordan_type(index3.nilpotent_part()).to_list() == [3, 1, 1]

    def test_isotropic_v_gives_index_two(self, index2):
        assert unipotency_index(index2) == 2

    def test_delta_not_isotropic(self, rank5):
        with pytest.raises(PreconditionViolated) as e:
            eichler_transvection(rank5, (1, 0, 0, 0, 0), (0, 1, 0, 0, 0))
        assert e.value.details["condition"] == "pair(delta,delta)=0"

    def test_v_not_orthogonal(self, rank5):
        with pytest.raises(PreconditionViolated) as e:
            eichler_transvection(rank5, DELTA, (1, 0, 0, 0, 0))
        assert e.value.details["condition"] == "pair(delta,v)=0"

    def test_odd_norm(self, rank5):
        with pytest.raises(OddNorm):
            eichler_transvection(rank5, DELTA, (0, 1, 0, 0, 0))

    def test_zero_delta(self, rank5):
        with pytest.raises(ZeroVector):
            eichler_transvection(rank5, (0, 0, 0, 0, 0), (0, 1, 0, 0, 0))

    def test_composition_law(self, rank5):
        v, w = (0, 1, 1, 0, 0), (0, 0, 1, 0, 1)
        summed = tuple(a + b for a, b in zip(v, w))
        product = transvection_matrix(rank5, DELTA, v) * transvection_matrix(rank5, DELTA, w)
        assert product == transvection_matrix(rank5, DELTA, summed)

    def test_power_and_inverse(self, rank5, index3):
        assert Matrix(index3.power(3).matrix) == transvection_matrix(rank5, DELTA, (0, 0, 0, 0, 3))
        assert Matrix(index3.inverse().matrix) == transvection_matrix(rank5, DELTA, (0, 0, 0, 0, -1))
        assert Matrix(index3.compose(index3.inverse()).matrix) == eye(5)

    def test_randomized_suite(self, uuu):
        """Fifty random (delta, v) pairs with v of even nonzero norm"""
        rng = np.random.default_rng(20240501)
        checked = 0
        while checked < 50:
            j = int(rng.integers(0, 6))
            delta = uuu.basis_vector(j)
            v = random_orthogonal_vector(rng, j)
            if norm(uuu, v) == 0:
                continue
            T = eichler_transvection(uuu, delta, v)
            N = T.nilpotent_part()
            assert T.apply(delta) == delta
            assert Matrix(T.matrix).T * Matrix(uuu.gram) * Matrix(T.matrix) == Matrix(uuu.gram)
            assert any(N * N)
            assert not any(N * N * N)
            assert jordan_type(N).multiplicity(3) == 1
            checked += 1


class TestJordanType:
    def test_zero_operator(self):
        assert jordan_type(Matrix.zeros(3, 3)).to_list() == [1, 1, 1]

    def test_single_block(self):
        N = Matrix([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
        jt = jordan_type(N)
        assert jt.to_list() == [3]
        assert jt.largest == 3

    def test_not_nilpotent(self):
        with pytest.raises(NotNilpotent):
            jordan_type(eye(3))

    def test_non_unipotent_index(self):
        assert unipotency_index(Matrix([[1, 0], [0, 2]])) is None

    def test_agrees_with_jordan_form(self, rank5, index3, index2):
        rank8 = load_fixture("diag(1,1,1,-1,-1,-1,-1,-1)")
        operators = [
            index3.nilpotent_part(),
            index2.nilpotent_part(),
            eichler_transvection(rank8, (1, 0, 0, 1, 0, 0, 0, 0), (0, 0, 0, 0, 1, 1, 0, 0)).nilpotent_part(),
            sym_power_operator(J3, 2) - eye(6),
            Matrix([[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 0]]),
        ]
        for N in operators:
            assert jordan_type(N).to_list() == jordan_blocks(N)

    def test_agrees_with_jordan_form_after_conjugation(self, uuu):
        rng = np.random.default_rng(5)
        for _ in range(8):
            j = int(rng.integers(0, 6))
            v = random_orthogonal_vector(rng, j)
            if not any(v):
                continue
            N = transvection_matrix(uuu, uuu.basis_vector(j), v) - eye(6)
            P = random_unimodular(6, rng)
            conj = exact_inverse(P) * N * P
            assert jordan_type(conj).to_list() == jordan_blocks(conj)

    def test_rank_profile(self, index3):
        profile = rank_profile(index3)
        assert profile["index"] == 3
        assert profile["rank_sequence"] == [5, 2, 1, 0]


class TestLogExp:
    def test_round_trip(self, index3):
        N = log_unipotent(index3)
        assert exp_nilpotent(N) == Matrix(index3.matrix)

    def test_log_of_index_two_is_nilpotent_part(self, index2):
        assert log_unipotent(index2) == index2.nilpotent_part()

    def test_log_requires_unipotent(self):
        with pytest.raises(NotUnipotent):
            log_unipotent(-eye(2))


class TestWeightFiltration:
    def test_dimensions_and_parity(self, rank5, index2):
        filtration, parity = weight_filtration_order2(index2)
        assert filtration.dims == (2, 3, 5)
        assert parity.rank_t_minus_id == 2
        assert parity.even
        for w in filtration.W1_basis:
            assert index2.apply(w) == w

    def test_index_too_high(self, index3):
        with pytest.raises(IndexTooHigh):
            weight_filtration_order2(index3)

    def test_identity(self, rank5):
        with pytest.raises(PreconditionViolated):
            weight_filtration_order2(check_isometry(rank5, eye(5)))

    def test_not_unipotent(self):
        minus = check_isometry(load_fixture("U"), -eye(2))
        with pytest.raises(NotUnipotent):
            weight_filtration_order2(minus)

    def test_parity_under_random_conjugation(self, uuu):
        """rank(T - id) stays even for index-2 transvections and their conjugates"""
        rng = np.random.default_rng(7)
        seen = 0
        for _ in range(200):
            j = int(rng.integers(0, 6))
            delta = uuu.basis_vector(j)
            b, c = (int(x) for x in rng.integers(-3, 4, size=2))
            if b == 0 and c == 0:
                continue
            # isotropic v in the two U blocks not containing delta
            others = [k for k in (0, 2, 4) if k != j - j % 2]
            v = [0] * 6
            v[others[0]], v[others[1]] = b, c
            T = transvection_matrix(uuu, delta, v)
            P = random_unimodular(6, rng)
            conj = exact_inverse(P) * T * P
            if unipotency_index(conj) != 2:
                continue
            assert rank(conj - eye(6)) % 2 == 0
            seen += 1
        assert seen > 150

    def test_parity_on_products(self, uuu):
        """Commuting products and non-commuting compositions of isotropic transvections"""
        rng = np.random.default_rng(11)
        commuting = noncommuting = 0
        for _ in range(200):
            A = random_isotropic_transvection(uuu, rng)
            B = random_isotropic_transvection(uuu, rng)
            candidates = [(A * B, A * B == B * A)]
            if A * B != B * A:
                noncommuting += 1
                candidates.append((B * A * exact_inverse(B), False))
            for M, commute in candidates:
                if unipotency_index(M) != 2:
                    continue
                _, parity = weight_filtration_order2(check_isometry(uuu, M))
                assert parity.even
                assert parity.rank_t_minus_id == rank(M - eye(6))
                commuting += commute
        assert commuting > 10
        assert noncommuting > 10

    def test_parity_on_explicit_noncommuting_composition(self, uuu):
        T = transvection_matrix(uuu, (1, 0, 0, 0, 0, 0), (0, 0, 1, 0, 0, 0))
        g = transvection_matrix(uuu, (0, 0, 0, 1, 0, 0), (0, 0, 0, 0, 1, 0))
        assert g * T != T * g
        M = g * T * exact_inverse(g)
        assert unipotency_index(M) == 2
        _, parity = weight_filtration_order2(check_isometry(uuu, M))
        assert parity.rank_t_minus_id == 2
        assert parity.even


class TestLargeRadiusCertificate:
    def test_rank5_degree2(self, rank5):
        cert = large_radius_certificate(rank5, 2, 2)
        assert cert.valid, cert.failed_checks()
        assert cert.witnesses["delta"] == [1, 0, 0, 1, 0]
        assert cert.witnesses["v"] == [0, 0, 0, 0, 1]
        assert len(cert.witnesses["T"]) == 15
        assert cert.witnesses["jordan_type"][0] == 5

    def test_recheck(self, rank5):
        payload = large_radius_certificate(rank5, 2, 2).to_dict()
        assert recheck_large_radius_certificate(payload).valid

    def test_recheck_detects_tampering(self, rank5):
        payload = large_radius_certificate(rank5, 1, 2).to_dict()
        payload["witnesses"]["T"][0][0] += 1
        recheck = recheck_large_radius_certificate(payload)
        assert not recheck.valid
        assert "T_is_symmetric_power" in recheck.failed_checks()

    def test_rank_too_small(self):
        with pytest.raises(RankTooSmall):
            large_radius_certificate(load_fixture("UU"), 2, 2)

    def test_definite_lattice(self):
        with pytest.raises(SearchExhausted) as e:
            large_radius_certificate(load_fixture("posdef5"), 2, 2)
        assert e.value.outcome == "nonexistence"


class TestInvariantCycle:
    def test_delta0(self, rank5, index3):
        cert = primitive_invariant_cycle(index3)
        assert cert.valid, cert.failed_checks()
        delta0 = tuple(cert.witnesses["delta0"])
        assert delta0 in (DELTA, tuple(-c for c in DELTA))
        assert norm(rank5, delta0) == 0
        assert pair(rank5, delta0, (0, 0, 0, 0, 1)) == 0

    def test_requires_index_three(self, index2):
        with pytest.raises(PreconditionViolated):
            primitive_invariant_cycle(index2)
