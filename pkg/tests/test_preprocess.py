import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loglens.errors import BadPattern, LogLensError, MissingEntityIds, MissingTimestamps
from loglens.preprocess import (
    PartitionConfig,
    PartitionSet,
    PreprocessorConfig,
    clean,
    partition,
)

from conftest import make_batch, utc


# -- clean ------------------------------------------------------------------

def test_clean_replacement_example():
    batch = make_batch(["connect 10.0.0.1 ok"])
    config = PreprocessorConfig(custom_replace_list=[(r"\d+\.\d+\.\d+\.\d+", "<IP>")])
    out, table = clean(batch, config)
    assert out.bodies == ["connect <IP> ok"]
    assert table[(0, "<IP>")] == ["10.0.0.1"]


def test_clean_empty_config_is_identity():
    batch = make_batch(["a,b  c", "untouched"])
    out, table = clean(batch, PreprocessorConfig())
    assert out.bodies == batch.bodies
    assert not table


def test_clean_delimiters_example():
    batch = make_batch(["a,b,c"])
    out, _ = clean(batch, PreprocessorConfig(custom_delimiters_regex=[","]))
    assert out.bodies == ["a b c"]


def test_clean_delimiters_before_replacements():
    batch = make_batch(["user=alice|status=ok"])
    config = PreprocessorConfig(
        custom_delimiters_regex=[r"\|"],
        custom_replace_list=[(r"user=\w+", "<USER>")])
    out, table = clean(batch, config)
    assert out.bodies == ["<USER> status=ok"]
    assert table[(0, "<USER>")] == ["user=alice"]


def test_clean_replacements_apply_in_list_order():
    batch = make_batch(["error code 404 at 10.1.1.1"])
    config = PreprocessorConfig(custom_replace_list=[
        (r"\d+\.\d+\.\d+\.\d+", "<IP>"),
        (r"\d+", "<NUM>"),
    ])
    out, table = clean(batch, config)
    assert out.bodies == ["error code <NUM> at <IP>"]
    assert table[(0, "<IP>")] == ["10.1.1.1"]
    assert table[(0, "<NUM>")] == ["404"]


def test_clean_multiple_matches_collected_in_order():
    batch = make_batch(["1 then 2 then 33"])
    out, table = clean(batch, PreprocessorConfig(custom_replace_list=[(r"\d+", "<N>")]))
    assert out.bodies == ["<N> then <N> then <N>"]
    assert table[(0, "<N>")] == ["1", "2", "33"]


def test_clean_touches_only_bodies():
    batch = make_batch(["x 1", "y 2"], entity_ids=["e1", "e2"], labels=[0, 1])
    out, _ = clean(batch, PreprocessorConfig(custom_replace_list=[(r"\d+", "<N>")]))
    assert out.entity_ids == ["e1", "e2"]
    assert out.labels == [0, 1]


def test_clean_bad_pattern_positional_error():
    config = PreprocessorConfig(custom_replace_list=[(r"\d+", "<N>"), ("(", "<BAD>")])
    with pytest.raises(BadPattern) as err:
        clean(make_batch(["x"]), config)
    assert err.value.position == 1


def test_clean_idempotent_when_placeholders_inert():
    config = PreprocessorConfig(custom_replace_list=[(r"\d+", "<NUM>")])
    batch = make_batch(["a 1 b 22 c"])
    once, _ = clean(batch, config)
    twice, table = clean(once, config)
    assert twice.bodies == once.bodies
    assert not table


_token = st.text(alphabet="abcXYZ0123456789.", min_size=1, max_size=6)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(_token, min_size=1, max_size=6).map(" ".join),
                min_size=1, max_size=5))
def test_clean_extraction_is_faithful(bodies):
    # every extracted original must re-substitute to reproduce the input
    config = PreprocessorConfig(custom_replace_list=[(r"\d+", "\x01")])
    out, table = clean(make_batch(bodies), config)
    for i, cleaned in enumerate(out.bodies):
        originals = list(table.get((i, "\x01"), []))
        rebuilt = []
        for ch in cleaned:
            rebuilt.append(originals.pop(0) if ch == "\x01" else ch)
        assert "".join(rebuilt) == bodies[i]
        assert not originals


# -- partition --------------------------------------------------------------

def test_fixed_window_arithmetic():
    batch = make_batch([f"l{i}" for i in range(7)])
    parts = partition(batch, PartitionConfig(strategy="fixed_window", window_size=3))
    assert [m for _, m in parts.partitions] == [[0, 1, 2], [3, 4, 5], [6]]
    assert [pid for pid, _ in parts.partitions] == ["window_0", "window_1", "window_2"]


def test_sliding_window_example():
    batch = make_batch([f"l{i}" for i in range(5)])
    parts = partition(batch, PartitionConfig(
        strategy="sliding_window", window_size=3, step=1))
    assert [m for _, m in parts.partitions] == [[0, 1, 2], [1, 2, 3], [2, 3, 4]]


def test_sliding_window_short_input_yields_nothing():
    batch = make_batch(["a", "b"])
    parts = partition(batch, PartitionConfig(
        strategy="sliding_window", window_size=3, step=1))
    assert parts.partitions == []


def test_sliding_window_step_two():
    batch = make_batch([f"l{i}" for i in range(8)])
    parts = partition(batch, PartitionConfig(
        strategy="sliding_window", window_size=4, step=2))
    assert [m for _, m in parts.partitions] == [[0, 1, 2, 3], [2, 3, 4, 5], [4, 5, 6, 7]]


def test_identifier_groups_by_entity():
    batch = make_batch(["a", "b", "c", "d"],
                       entity_ids=["blk_1", "blk_2", "blk_1", "blk_2"])
    parts = partition(batch, PartitionConfig(strategy="identifier"))
    assert parts.partitions == [("blk_1", [0, 2]), ("blk_2", [1, 3])]


def test_identifier_order_by_first_appearance():
    batch = make_batch(["a", "b", "c"], entity_ids=["z9", "a1", "z9"])
    parts = partition(batch, PartitionConfig(strategy="identifier"))
    assert [pid for pid, _ in parts.partitions] == ["z9", "a1"]


def test_identifier_null_entities_skipped():
    batch = make_batch(["a", "b", "c"], entity_ids=["e", None, "e"])
    parts = partition(batch, PartitionConfig(strategy="identifier"))
    assert parts.partitions == [("e", [0, 2])]
    assert parts.skipped_records == 1


def test_identifier_all_null_raises():
    batch = make_batch(["a", "b"])
    with pytest.raises(MissingEntityIds):
        partition(batch, PartitionConfig(strategy="identifier"))


def test_time_window_six_hour_example():
    hours = [0, 1, 7]
    batch = make_batch(["a", "b", "c"], timestamps=[utc(h * 3600) for h in hours])
    parts = partition(batch, PartitionConfig(strategy="time_window", duration=6 * 3600.0))
    assert [m for _, m in parts.partitions] == [[0, 1], [2]]


def test_time_window_epoch_aligned_ids():
    batch = make_batch(["a"], timestamps=[utc(7 * 3600)])
    parts = partition(batch, PartitionConfig(strategy="time_window", duration=6 * 3600.0))
    assert parts.partitions[0][0] == "bucket_1"


def test_time_window_requires_timestamps():
    batch = make_batch(["a"])
    with pytest.raises(MissingTimestamps):
        partition(batch, PartitionConfig(strategy="time_window", duration=60.0))


def test_min_partition_len_filter():
    batch = make_batch([f"l{i}" for i in range(7)])
    parts = partition(batch, PartitionConfig(
        strategy="fixed_window", window_size=3, min_partition_len=2))
    assert [m for _, m in parts.partitions] == [[0, 1, 2], [3, 4, 5]]


def test_partition_config_validation():
    assert PartitionConfig(strategy="bogus").validate()
    assert PartitionConfig(strategy="fixed_window", window_size=0).validate()
    assert PartitionConfig(strategy="sliding_window", window_size=2, step=3).validate()
    assert PartitionConfig(strategy="time_window", duration=0).validate()
    assert not PartitionConfig(strategy="sliding_window", window_size=3, step=3).validate()


def test_partition_validation_raises_on_use():
    with pytest.raises(LogLensError):
        partition(make_batch(["a"]), PartitionConfig(strategy="bogus"))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 40), w=st.integers(1, 10))
def test_fixed_window_covers_all_indices_once(n, w):
    batch = make_batch([f"l{i}" for i in range(n)])
    parts = partition(batch, PartitionConfig(strategy="fixed_window", window_size=w))
    seen = [i for _, members in parts.partitions for i in members]
    assert seen == list(range(n))
    assert len(parts.partitions) == -(-n // w)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(0, 30), w=st.integers(1, 8), data=st.data())
def test_sliding_window_counts_and_termination(n, w, data):
    step = data.draw(st.integers(1, w))
    batch = make_batch([f"l{i}" for i in range(n)])
    parts = partition(batch, PartitionConfig(
        strategy="sliding_window", window_size=w, step=step))
    expected = (n - w) // step + 1 if n >= w else 0
    assert len(parts.partitions) == expected
    for _, members in parts.partitions:
        assert len(members) == w
        assert members == list(range(members[0], members[0] + w))
    if step == 1 and n >= w:
        # every index in [w-1, n-1] terminates exactly one window
        assert [m[-1] for _, m in parts.partitions] == list(range(w - 1, n))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["e1", "e2", "e3", None]), min_size=1, max_size=30))
def test_identifier_conserves_nonnull_indices(entity_ids):
    batch = make_batch([f"l{i}" for i in range(len(entity_ids))], entity_ids=entity_ids)
    if all(e is None for e in entity_ids):
        with pytest.raises(MissingEntityIds):
            partition(batch, PartitionConfig(strategy="identifier"))
        return
    parts = partition(batch, PartitionConfig(strategy="identifier"))
    seen = sorted(i for _, members in parts.partitions for i in members)
    assert seen == [i for i, e in enumerate(entity_ids) if e is not None]
    for pid, members in parts.partitions:
        assert all(entity_ids[i] == pid for i in members)
        assert members == sorted(members)


def test_partition_set_csv_round_trip(tmp_path):
    batch = make_batch([f"l{i}" for i in range(5)])
    parts = partition(batch, PartitionConfig(
        strategy="sliding_window", window_size=3, step=1))
    path = tmp_path / "parts.csv"
    parts.to_csv(path)
    again = PartitionSet.from_csv(path)
    assert again.partitions == parts.partitions
