import json
import tempfile
from fractions import Fraction
from pathlib import Path
from unittest import TestCase

import numpy as np

from utils.reporting import dumps, map_ordered, read_csv, write_csv, write_json


def square(x):
    return x * x


class TestJson(TestCase):

    def test_sorted_keys_and_rationals(self):
        text = dumps({"b": Fraction(-1, 2), "a": np.float64(0.5), "c": np.int64(3)})
        self.assertEqual(list(json.loads(text)), ["a", "b", "c"])
        self.assertEqual(json.loads(text)["b"], "-1/2")
        self.assertTrue(text.endswith("\n"))

    def test_unknown_types_rejected(self):
        with self.assertRaises(TypeError):
            dumps({"x": object()})

    def test_write_creates_directories(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(Path(tmp) / "nested" / "r.json", {"x": 1})
            self.assertEqual(json.loads(path.read_text()), {"x": 1})


class TestCsv(TestCase):

    def test_fixed_columns(self):
        rows = [{"lambda": Fraction(-2), "kind": "rational", "extra": 1},
                {"lambda": "root", "kind": None}]
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv(Path(tmp) / "t.csv", ["lambda", "kind"], rows)
            self.assertEqual(path.read_text().splitlines()[0], "lambda,kind")
            self.assertEqual(read_csv(path), [{"lambda": "-2", "kind": "rational"},
                                              {"lambda": "root", "kind": ""}])

    def test_nested_values_serialized_as_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv(Path(tmp) / "t.csv", ["factor"], [{"factor": ["1", "0", "1"]}])
            self.assertEqual(json.loads(read_csv(path)[0]["factor"]), ["1", "0", "1"])


class TestMapOrdered(TestCase):

    def test_serial_keeps_order(self):
        self.assertEqual(map_ordered(square, [3, 1, 2]), [9, 1, 4])

    def test_empty(self):
        self.assertEqual(map_ordered(square, [], threads=4), [])
