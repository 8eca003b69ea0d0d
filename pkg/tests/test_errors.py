import pytest

from mmdtest import (
    DataError,
    DistributionError,
    EnumerationTooLargeError,
    IncompleteTableError,
    InsufficientSamplesError,
    MMDTestError,
    PairingError,
    ParameterError,
    ShapeError,
)


@pytest.mark.parametrize(
    "exc",
    [
        DataError,
        DistributionError,
        EnumerationTooLargeError,
        IncompleteTableError,
        InsufficientSamplesError,
        PairingError,
        ParameterError,
        ShapeError,
    ],
)
def test_all_errors_share_base(exc):
    # callers can catch the whole library surface with one except clause
    assert issubclass(exc, MMDTestError)
    assert issubclass(exc, Exception)


def test_base_not_caught_by_value_error():
    assert not issubclass(MMDTestError, ValueError)
