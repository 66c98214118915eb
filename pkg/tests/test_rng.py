"""Generator tests against published reference vectors, then determinism."""

from cyclic_swarm.rng import Pcg32, _splitmix64


def test_splitmix64_reference_vector():
    # first output of splitmix64 for state 0, from Vigna's reference code
    assert _splitmix64(0) == 0xE220A8397B1DCDAF


def test_pcg32_core_reference_vector():
    # O'Neill's pcg32-demo: seed 42, stream 54 -> known first five outputs.
    # Drive the core update directly to bypass our seed whitening.
    g = Pcg32(0, 0)
    g._state = 0
    g._inc = (54 << 1) | 1
    g.u32()
    g._state = (g._state + 42) & ((1 << 64) - 1)
    g.u32()
    got = [g.u32() for _ in range(5)]
    assert got == [0xA15C02B7, 0x7B47F409, 0xBA1D3330, 0x83D2F293, 0xBFA4784B]


def test_same_seed_same_stream():
    a = [Pcg32(123, 7).u64() for _ in range(100)]
    b = [Pcg32(123, 7).u64() for _ in range(100)]
    assert a == b


def test_seed_and_stream_both_matter():
    base = [Pcg32(1, 0).u32() for _ in range(8)]
    assert [Pcg32(2, 0).u32() for _ in range(8)] != base
    assert [Pcg32(1, 1).u32() for _ in range(8)] != base


def test_uniform_range_and_resolution():
    g = Pcg32(2024)
    xs = [g.uniform() for _ in range(10_000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    assert len(set(xs)) == len(xs)  # 53-bit draws should not collide here
    ys = [Pcg32(5).uniform(-3.0, 2.0) for _ in range(1)]
    assert -3.0 <= ys[0] < 2.0
