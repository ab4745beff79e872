import pytest

from scenario_witness.partitions import (
    full_separability_structure,
    m_separability_structure,
    make_partition,
    parse_structure,
    set_partitions,
)


def test_full_separability_bipartite():
    st = full_separability_structure((3, 3))
    (p,) = st.partitions
    assert p.free_block == (2,) and p.contracted == [0]
    assert p.free_dim((3, 3)) == 3


def test_full_separability_tripartite():
    (p,) = full_separability_structure((2, 2, 2)).partitions
    assert p.free_block == (3,)
    assert [p.blocks[i] for i in p.contracted] == [(1,), (2,)]
    assert p.free_dim((2, 2, 2)) == 2


def test_free_block_prefers_largest():
    (p,) = full_separability_structure((2, 3)).partitions
    assert p.free_block == (2,)
    (p,) = full_separability_structure((3, 2)).partitions
    assert p.free_block == (1,)


def test_set_partition_count():
    # Bell numbers
    assert [sum(1 for _ in set_partitions(list(range(n)))) for n in range(1, 6)] == [1, 2, 5, 15, 52]


def test_m_sep_three_parties():
    st = m_separability_structure((2, 2, 2), 2)
    got = {p.as_sets() for p in st.partitions}
    want = {frozenset({frozenset({1}), frozenset({2, 3})}),
            frozenset({frozenset({2}), frozenset({1, 3})}),
            frozenset({frozenset({3}), frozenset({1, 2})})}
    assert got == want
    # brute force: all partitions with blocks of size <= 2 that are not refinements of another
    cands = [frozenset(map(frozenset, p)) for p in set_partitions([1, 2, 3]) if max(map(len, p)) <= 2]
    assert len(cands) == 4

    def refines(f, c):
        return f != c and all(any(b <= cb for cb in c) for b in f)

    maximal = {c for c in cands if not any(refines(c, o) for o in cands)}
    assert maximal == want


def test_m_sep_small_cases():
    (p,) = m_separability_structure((2, 2, 2), 1).partitions
    assert len(p.blocks) == 3
    (p,) = m_separability_structure((2, 2), 1).partitions
    assert p.blocks == ((1,), (2,))


def test_m_sep_four_parties():
    st = m_separability_structure((2, 2, 2, 2), 3)
    # blocks of size <= 3 not refining another: the 4 partitions {k}|rest and 3 pairings 2+2
    assert len(st.partitions) == 7


def test_m_sep_bad_m():
    with pytest.raises(ValueError):
        m_separability_structure((2, 2, 2), 3)


def test_make_partition_validation():
    with pytest.raises(ValueError):
        make_partition((2, 2, 2), [[1], [2]])
    with pytest.raises(ValueError):
        make_partition((2, 2, 2), [[1, 2], [2, 3]])


@pytest.mark.parametrize("text,label", [
    ("full", "1|2|3!3"),
    ("1|2,3", "1|2,3!2"),
    ("2|1,3!1", "2|1,3!1"),
    ("1|2|3", "1|2|3!3"),
])
def test_parse(text, label):
    assert parse_structure(text, (2, 2, 2)).label() == label


def test_parse_label_round_trip():
    for text in ("full", "m-sep:2", "3|1,2", "1|2,3;2|1,3"):
        st = parse_structure(text, (2, 2, 2))
        assert parse_structure(st.label(), (2, 2, 2)).label() == st.label()


@pytest.mark.parametrize("text", ["", "1|2", "1|2,3!5", "m-sep:x", "a|b", "1|1,2,3"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_structure(text, (2, 2, 2))


def test_letters():
    st = parse_structure("1|2,3", (2, 2, 2))
    assert st.partitions[0].letters() == "A-BC"


def test_single_block_is_all_free():
    (p,) = parse_structure("1,2,3", (2, 2, 2)).partitions
    assert p.contracted == [] and p.free_dim((2, 2, 2)) == 8


def test_tie_break_is_last_party():
    assert parse_structure("1|2|3", (2, 2, 2)).label() == parse_structure("full", (2, 2, 2)).label()
