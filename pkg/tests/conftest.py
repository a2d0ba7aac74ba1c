"""
测试共享夹具
"""

from pathlib import Path

import pytest

from src.i18n import set_language
from src.scenario import builtin_thanksgiving, load_schedule_csv
from src.tsp_solvers import CAMPUS5, CAMPUS10, as_matrix

PROJECT_ROOT = Path(__file__).parent.parent
DATA_DIR = PROJECT_ROOT / "data"
FIXTURE_DIR = DATA_DIR / "fixtures"


@pytest.fixture(autouse=True)
def reset_language():
    """i18n 使用全局语言，每个测试前后恢复为中文"""
    set_language("zh")
    yield
    set_language("zh")


@pytest.fixture
def baseline():
    return builtin_thanksgiving()


@pytest.fixture
def augmented():
    return builtin_thanksgiving(augmented=True)


@pytest.fixture
def delayed():
    return builtin_thanksgiving(delayed=True)


@pytest.fixture
def augmented_delayed():
    return builtin_thanksgiving(augmented=True, delayed=True)


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def load_fixture():
    """按文件名读取调度夹具"""
    def _load(name, scenario):
        return load_schedule_csv(FIXTURE_DIR / name, scenario)
    return _load


@pytest.fixture
def campus5():
    return as_matrix(CAMPUS5)


@pytest.fixture
def campus10():
    return as_matrix(CAMPUS10)


@pytest.fixture
def baseline_mapping():
    return {"cook": "Sarah", "supervisor": "Sarah", "driver1": "Michael", "driver2": "Sarah"}
