import pytest

from ordist.quadfield import Modulus, make_field
from ordist.distribution import build_presentation, level_torsion


def prime_above(K, q, idx=0):
    _, ids = K.splitting_type(q)
    return ids[idx]


@pytest.fixture(scope="session")
def field7():
    return make_field(7)


@pytest.fixture(scope="session")
def triple7(field7):
    """The three-prime presentation over Q(sqrt(-7)) with torsion Z/2.

    Built once per session; level_torsion is invoked here so every
    consumer sees the cached dual-oracle result.
    """
    K = field7
    m = Modulus(K, tuple((prime_above(K, q), 1) for q in (7, 11, 23)))
    P = build_presentation(K, m)
    level_torsion(P)
    return P
