import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from bvpgaf import container
from bvpgaf.errors import ContainerError


@settings(max_examples=50, deadline=None)
@given(st.lists(arrays(np.float64, array_shapes(min_dims=0, max_dims=3, min_side=0, max_side=5)), max_size=4))
def test_roundtrip(tensors):
    named = [(f"t{i}", a) for i, a in enumerate(tensors)]
    back, meta = container.loads(container.dumps(named, {"k": [1, 2]}))
    assert meta == {"k": [1, 2]}
    assert [n for n, _ in back] == [n for n, _ in named]
    for (_, a), (_, b) in zip(named, back):
        assert a.shape == b.shape
        np.testing.assert_array_equal(a, b)


def test_layout():
    blob = container.dumps([("x", np.array([1.5]))], {"b": 1, "a": 2})
    magic, version, hlen = struct.unpack_from("<4sHI", blob)
    assert magic == b"BVPT" and version == 1
    assert blob[10:10 + hlen].startswith(b'{"meta":{"a":2,"b":1}')
    assert blob[-8:] == struct.pack("<d", 1.5)


def test_identical_content_identical_bytes():
    a = container.dumps([("w", np.arange(6.0).reshape(2, 3))], {"z": 1, "a": 0})
    b = container.dumps([("w", np.arange(6.0).reshape(2, 3))], {"a": 0, "z": 1})
    assert a == b


@pytest.mark.parametrize(
    "mutate, needle",
    [
        (lambda b: b[:5], "truncated before header"),
        (lambda b: b"XXXX" + b[4:], "magic"),
        (lambda b: b[:4] + struct.pack("<H", 9) + b[6:], "version"),
        (lambda b: b[:-3], "truncated"),
        (lambda b: b + b"\0", "trailing"),
    ],
)
def test_corruption_detected(mutate, needle):
    blob = container.dumps([("x", np.ones((2, 2)))])
    with pytest.raises(ContainerError, match=needle):
        container.loads(mutate(blob))
