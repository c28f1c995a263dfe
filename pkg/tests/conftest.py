"""テスト共通のフィクスチャ"""
import pytest

from modules.analytic import SmoothWeight
from modules.forms import BinaryCubicForm, enumerate_orbits

SMALL_DISC = 2000


@pytest.fixture(scope='session')
def positive_records():
    return list(enumerate_orbits(SMALL_DISC, 1, workers=1))


@pytest.fixture(scope='session')
def negative_records():
    return list(enumerate_orbits(SMALL_DISC, -1, workers=1))


@pytest.fixture
def field_23():
    """判別式 -23 の三次体の極大形式"""
    return BinaryCubicForm(1, 0, -1, -1)


@pytest.fixture(scope='session')
def sharp_weight():
    return SmoothWeight('sharp')


@pytest.fixture(scope='session')
def bump_weight():
    return SmoothWeight('bump')

