import pytest

from lmaudit import _core_py
from lmaudit.data import AuditDataset, AuditRecord, FactorTaxonomy

try:
    from lmaudit import _core_cy
except ImportError:  # extension not built in this environment
    _core_cy = None

BACKENDS = [pytest.param(_core_py, id="py")]
if _core_cy is not None:
    BACKENDS.append(pytest.param(_core_cy, id="cy"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Each scalar-kernel backend available in this build."""
    return request.param


def tiny_dataset() -> AuditDataset:
    """Balanced 2x2 design with one covariate, 8 records, errors by hand."""
    taxonomies = (
        FactorTaxonomy("gender", ("female", "male")),
        FactorTaxonomy("age", ("young", "old"), ordinal=True),
    )
    rows = [
        ("s1", "female", "young", 10.0, 0.040),
        ("s2", "female", "young", 20.0, 0.050),
        ("s3", "female", "old", 30.0, 0.060),
        ("s4", "female", "old", 40.0, 0.070),
        ("s5", "male", "young", 50.0, 0.045),
        ("s6", "male", "young", 60.0, 0.055),
        ("s7", "male", "old", 70.0, 0.080),
        ("s8", "male", "old", 80.0, 0.090),
    ]
    records = tuple(
        AuditRecord(
            sample_id=sid,
            factors={"gender": g, "age": a},
            covariates={"size": c},
            error=e,
        )
        for sid, g, a, c, e in rows
    )
    return AuditDataset(taxonomies=taxonomies, covariate_names=("size",), records=records)


@pytest.fixture
def dataset8() -> AuditDataset:
    return tiny_dataset()
