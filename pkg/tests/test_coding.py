import numpy as np
import pytest

from ncml.protocol.coding import CodedPacket, Packet, ReceiverState, try_decode, xor_combine


def packets(n, length=16, seed=0):
    rng = np.random.default_rng(seed)
    return [Packet(i, rng.bytes(length)) for i in range(n)]


def xor_bytes(a, b):
    return bytes(x ^ y for x, y in zip(a, b))


def test_combine_two_packets():
    a, b = packets(2)
    coded = xor_combine([a, b])
    assert coded.constituents == frozenset({0, 1})
    assert coded.payload == xor_bytes(a.payload, b.payload)


def test_peeling_recovers_the_partner():
    # a xor (a xor b) = b
    a, b = packets(2)
    coded = xor_combine([a, b])
    assert xor_combine([coded, a]).payload == b.payload
    assert xor_combine([coded, a]).constituents == frozenset({1})


def test_three_way_cancellation():
    a, b, c = packets(3)
    abc = xor_combine([a, b, c])
    ab = xor_combine([a, b])
    peeled = xor_combine([abc, ab])
    assert peeled.constituents == frozenset({2})
    assert peeled.payload == c.payload


def test_self_cancellation_rejected():
    a, _ = packets(2)
    with pytest.raises(ValueError):
        xor_combine([a, a])


def test_empty_and_mismatched_inputs_rejected():
    with pytest.raises(ValueError):
        xor_combine([])
    a = Packet(0, b"\x01\x02")
    b = Packet(1, b"\x01\x02\x03")
    with pytest.raises(ValueError):
        xor_combine([a, b])


def test_packet_validation():
    with pytest.raises(ValueError):
        Packet(-1, b"x")
    with pytest.raises(ValueError):
        Packet(0, b"")
    with pytest.raises(ValueError):
        CodedPacket(frozenset(), b"x")


def test_decode_with_one_missing_constituent():
    a, b = packets(2)
    rx = ReceiverState()
    rx.receive_packet(a)
    try_decode(rx, xor_combine([a, b]))
    assert rx.have[1] == b.payload
    assert rx.buffer == []


def test_decode_with_nothing_missing_discards():
    a, b = packets(2)
    rx = ReceiverState()
    rx.receive_packet(a)
    rx.receive_packet(b)
    try_decode(rx, xor_combine([a, b]))
    assert set(rx.have) == {0, 1}
    assert rx.buffer == []


def test_undecodable_packet_is_buffered_and_chains_to_fixpoint():
    a, b, c = packets(3)
    rx = ReceiverState()
    rx.receive_packet(a)
    try_decode(rx, xor_combine([a, b, c]))  # two missing: buffered
    assert set(rx.have) == {0}
    assert len(rx.buffer) == 1
    rx.receive_packet(b)  # unlocks the buffered combination
    assert set(rx.have) == {0, 1, 2}
    assert rx.have[2] == c.payload
    assert rx.buffer == []


def test_buffered_chain_through_coded_delivery():
    a, b, c = packets(3, seed=5)
    rx = ReceiverState()
    rx.receive_packet(a)
    try_decode(rx, xor_combine([a, b, c]))
    try_decode(rx, xor_combine([b]))  # singleton coded packet = plain resend
    assert set(rx.have) == {0, 1, 2}


def test_knowledge_is_monotone_under_random_traffic():
    rng = np.random.default_rng(9)
    originals = packets(6, seed=9)
    rx = ReceiverState()
    for _ in range(300):
        known = set(rx.have)
        ids = rng.choice(6, size=int(rng.integers(1, 4)), replace=False)
        parts = [originals[i] for i in ids]
        try:
            coded = xor_combine(parts)
        except ValueError:
            continue
        try_decode(rx, coded)
        assert set(rx.have) >= known
        for i, payload in rx.have.items():
            assert payload == originals[i].payload
