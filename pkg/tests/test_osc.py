import socket

import pytest
from hypothesis import given
from hypothesis import strategies as st

from john.osc import (
    BadAddress,
    OscEndpoint,
    OscMessage,
    OscSender,
    UnsupportedType,
    emit,
    encode_osc,
    osc_for_emission,
)
from john.transport import BEGIN, END, STOPPED, TICK, Emission

from conftest import make_block
from osc_ref import ref_decode, ref_encode


def test_golden_time_message():
    data = encode_osc(OscMessage("/john/time", (1.5,)))
    assert data == b"/john/time\x00\x00,f\x00\x00\x3f\xc0\x00\x00"
    assert len(data) == 20


def test_golden_no_arg_message():
    data = encode_osc(OscMessage("/john/pause"))
    assert data == b"/john/pause\x00,\x00\x00\x00"
    assert len(data) == 16


def test_bad_addresses():
    with pytest.raises(BadAddress):
        encode_osc(OscMessage("john/time", (1.0,)))
    with pytest.raises(BadAddress):
        encode_osc(OscMessage("/jöhn", ()))
    with pytest.raises(BadAddress):
        encode_osc(OscMessage("/a\0b", ()))


def test_unsupported_args():
    with pytest.raises(UnsupportedType):
        encode_osc(OscMessage("/x", (True,)))
    with pytest.raises(UnsupportedType):
        encode_osc(OscMessage("/x", (2**40,)))
    with pytest.raises(UnsupportedType):
        encode_osc(OscMessage("/x", ([1, 2],)))
    with pytest.raises(UnsupportedType):
        encode_osc(OscMessage("/x", ("nul\0",)))


def test_matches_reference_encoder():
    corpus = [
        ("/john/time", [1.5]),
        ("/john/pause", []),
        ("/john/event/begin", ["ab" * 16, 2, "storm", "ff", 10.0, 30.0]),
        ("/john/event/end", ["ab" * 16, 2]),
        ("/john/stop", []),
        ("/a", ["x"]),
        ("/lights/hue", [359, 0.25, "mood"]),
        ("/n", [-2147483648, 2147483647]),
    ]
    for address, args in corpus:
        assert encode_osc(OscMessage(address, tuple(args))) == ref_encode(address, args)


addr_st = st.text(alphabet="abcdefghijklmnopqrstuvwxyz/_0123456789", min_size=1, max_size=20)
arg_st = st.one_of(
    st.integers(-(2**31), 2**31 - 1),
    st.floats(width=32, allow_nan=False, allow_infinity=False),
    st.text(max_size=12).filter(lambda s: "\0" not in s),
)


@given(addr_st, st.lists(arg_st, max_size=5))
def test_encode_properties(suffix, args):
    msg = OscMessage("/" + suffix, tuple(args))
    data = encode_osc(msg)
    assert len(data) % 4 == 0
    assert data == ref_encode(msg.address, list(args))
    address, decoded = ref_decode(data)
    assert address == msg.address
    for want, got in zip(args, decoded):
        if isinstance(want, float):
            assert got == pytest.approx(want, rel=1e-6) or (want == got == 0)
        else:
            assert got == want


def test_emission_mapping():
    assert osc_for_emission(Emission(TICK, 5000.0)) == OscMessage("/john/time", (5.0,))

    b = make_block(3, 2, 10_000, 30_000, karma="storm", nuance="ff")
    begin = osc_for_emission(Emission(BEGIN, 10_000.0, b))
    assert begin == OscMessage(
        "/john/event/begin", (b.id, 2, "storm", "ff", 10.0, 30.0))
    end = osc_for_emission(Emission(END, 40_000.0, b))
    assert end == OscMessage("/john/event/end", (b.id, 2))
    assert osc_for_emission(Emission(STOPPED, 40_000.0)) == OscMessage("/john/stop")


def test_emit_fans_out_to_all_endpoints():
    endpoints = [OscEndpoint("127.0.0.1", 9000), OscEndpoint("127.0.0.1", 9001)]
    pairs = emit(Emission(TICK, 1000.0), endpoints)
    assert [ep for ep, _ in pairs] == endpoints
    assert len({msg for _, msg in pairs}) == 1


def test_endpoint_parse():
    assert OscEndpoint.parse("127.0.0.1:9000") == OscEndpoint("127.0.0.1", 9000)
    assert OscEndpoint.parse("max.local:7400").port == 7400
    with pytest.raises(ValueError):
        OscEndpoint.parse("9000")


def test_sender_delivers_datagram_and_isolates_failures():
    rx = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    rx.bind(("127.0.0.1", 0))
    rx.settimeout(2)
    port = rx.getsockname()[1]
    sender = OscSender([
        OscEndpoint("name-that-does-not-resolve.invalid", 1),  # fails, logged
        OscEndpoint("127.0.0.1", port),
    ])
    try:
        sender.send(Emission(TICK, 2500.0))
        data, _ = rx.recvfrom(4096)
    finally:
        sender.close()
        rx.close()
    assert ref_decode(data) == ("/john/time", [2.5])
