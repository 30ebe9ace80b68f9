"""Round trips and parse failures for the text formats."""

import numpy as np
import pytest

from lda_rlct.gibbs import PosteriorDraws
from lda_rlct.io import (
    ParseError,
    read_dataset,
    read_draws,
    read_true_model,
    write_dataset,
    write_draws,
    write_true_model,
)
from lda_rlct.model import generate_dataset, sample_true_model


class TestDatasetFormat:
    def test_round_trip(self, tmp_path):
        model = sample_true_model(10, 5, 2, np.random.default_rng(1))
        data = generate_dataset(model, 250, np.random.default_rng(2))
        path = tmp_path / "data.txt"
        write_dataset(data, path)
        back = read_dataset(path)
        assert np.array_equal(back.docs, data.docs)
        assert np.array_equal(back.words, data.words)
        assert np.array_equal(back.counts, data.counts)

    def test_header_and_one_based_indices(self, tmp_path):
        model = sample_true_model(4, 3, 2, np.random.default_rng(3))
        data = generate_dataset(model, 5, np.random.default_rng(4))
        path = tmp_path / "data.txt"
        write_dataset(data, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "4 3 5"
        for line in lines[1:]:
            j, i = (int(x) for x in line.split("\t"))
            assert 1 <= j <= 3 and 1 <= i <= 4

    def test_bad_token_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 2 5\n1\t1\n")
        with pytest.raises(ParseError, match="promises 5 tokens"):
            read_dataset(path)

    def test_out_of_range_token(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 2 1\n1\t4\n")
        with pytest.raises(ParseError, match="bad.txt:2"):
            read_dataset(path)


class TestTruthFormat:
    def test_round_trip_exact(self, tmp_path):
        model = sample_true_model(7, 4, 3, np.random.default_rng(5),
                                  doc_dist=np.array([0.4, 0.3, 0.2, 0.1]))
        path = tmp_path / "truth.txt"
        write_true_model(model, path)
        back = read_true_model(path)
        assert np.array_equal(back.A0, model.A0)
        assert np.array_equal(back.B0, model.B0)
        assert np.array_equal(back.doc_dist, model.doc_dist)

    def test_dimension_header(self, tmp_path):
        model = sample_true_model(7, 4, 3, np.random.default_rng(6))
        path = tmp_path / "truth.txt"
        write_true_model(model, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "A0 7 3"
        assert lines[8] == "B0 3 4"

    def test_truncated_block(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("A0 3 2\n0.5 0.5\n")
        with pytest.raises(ParseError):
            read_true_model(path)

    def test_wrong_row_width(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("A0 2 2\n0.5 0.5 0.5\n0.5 0.5\n")
        with pytest.raises(ParseError, match="bad.txt:2"):
            read_true_model(path)


class TestDrawDump:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        A = np.stack([rng.dirichlet(np.ones(4), size=2).T for _ in range(3)])
        B = np.stack([rng.dirichlet(np.ones(2), size=3).T for _ in range(3)])
        draws = PosteriorDraws(A=A, B=B)
        path = tmp_path / "draws.txt"
        write_draws(draws, path)
        back = read_draws(path)
        assert np.array_equal(back.A, draws.A)
        assert np.array_equal(back.B, draws.B)

    def test_draw_indices_checked(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("draw 1\nA 1 1\n1.0\nB 1 1\n1.0\n")
        with pytest.raises(ParseError, match="expected 'draw 0'"):
            read_draws(path)
