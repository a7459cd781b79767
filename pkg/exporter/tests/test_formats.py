import struct

import numpy as np
import pytest

from lieb_export import count_frequencies, join_word, write_lieb, write_stats


class TestWriteLieb:
    def test_exact_byte_layout(self, tmp_path):
        matrix = np.array([[1.5, -2.0]], dtype=np.float32)
        path = write_lieb([("d1", [("a", 0)], matrix)], 2, tmp_path / "x.lieb")
        expected = (
            b"LIEB"
            + struct.pack("<HHIQ", 1, 1, 2, 1)
            + struct.pack("<H", 2) + b"d1"
            + struct.pack("<I", 1)
            + struct.pack("<H", 1) + b"a" + struct.pack("<I", 0)
            + matrix.tobytes()
        )
        assert path.read_bytes() == expected

    def test_lowercase_flag_bit(self, tmp_path):
        matrix = np.zeros((1, 2), dtype=np.float32)
        cased = write_lieb([("d", [("a", 0)], matrix)], 2, tmp_path / "c.lieb",
                           lowercased=False)
        flags = struct.unpack_from("<H", cased.read_bytes(), 6)[0]
        assert flags == 0

    def test_shape_mismatch_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="does not match"):
            write_lieb([("d", [("a", 0)], np.zeros((2, 2)))], 2, tmp_path / "x")

    def test_no_sequences_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="no sequences"):
            write_lieb([], 2, tmp_path / "x")

    def test_empty_sequence_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="no tokens"):
            write_lieb([("d", [], np.zeros((0, 2)))], 2, tmp_path / "x")


class TestStats:
    def test_exact_text(self, tmp_path):
        path = write_stats(3, {"b": 1, "a": 2}, {"ab": 3}, tmp_path / "s.tsv")
        assert path.read_text() == (
            "#N 3\na\t2\tsubword\nb\t1\tsubword\nab\t3\tword\n"
        )

    def test_tab_in_term_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="tab"):
            write_stats(1, {"a\tb": 1}, {}, tmp_path / "s.tsv")

    def test_count_frequencies(self):
        docs = [
            [("shin", 0), ("##gles", 0), ("rash", 1)],
            [("rash", 0), ("rash", 1)],               # repeats count once
            [("shin", 0), ("##gles", 0)],
        ]
        n_docs, df_sub, df_word = count_frequencies(docs)
        assert n_docs == 3
        assert df_sub == {"shin": 2, "##gles": 2, "rash": 2}
        assert df_word == {"shingles": 2, "rash": 2}


def test_join_word_strips_continuation_markers():
    assert join_word(["shin", "##gles"]) == "shingles"
    assert join_word(["pain"]) == "pain"
    assert join_word(["a", "##b", "##c"]) == "abc"
